#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace resetgraph {

/// Configuration / input errors (CLI exit code 2).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Numerical / solver failures (CLI exit code 3).
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A frequency grid point coincides with a pole of the system.
struct PoleOnAxisError : std::domain_error {
    explicit PoleOnAxisError(double omega_)
        : std::domain_error("pole on the imaginary axis at omega = " + std::to_string(omega_)),
          omega(omega_) {}
    double omega;
};

// Worker cap shared by all parallel loops. 0 means "use hardware_concurrency".
void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks; callers
// write results into pre-sized slots so the merge order is deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Deterministic, platform-independent RNG (xoshiro-style splitmix64 core).
/// std::mt19937 distributions are implementation-defined, so seeds would not
/// reproduce across standard libraries; this generator does.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Log-uniform over [lo, hi], lo > 0.
    double log_uniform(double lo, double hi);

    /// Integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::uint64_t state_;
};

/// FNV-1a 64-bit hash, hex-encoded; used to stamp configs into outputs.
std::string fnv1a_hex(const std::string& data);

std::vector<double> logspace(double lo, double hi, int count);
std::vector<double> linspace(double lo, double hi, int count);

}  // namespace resetgraph
