#include "resetgraph/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace resetgraph {

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int n) { g_max_threads.store(n < 0 ? 0 : n); }

int max_threads() {
    int n = g_max_threads.load();
    if (n <= 0) {
        unsigned hw = std::thread::hardware_concurrency();
        n = hw == 0 ? 1 : static_cast<int>(hw);
    }
    return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(max_threads()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

double Rng::log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::vector<double> logspace(double lo, double hi, int count) {
    std::vector<double> out;
    if (count <= 0) return out;
    if (count == 1) {
        out.push_back(lo);
        return out;
    }
    double llo = std::log10(lo), lhi = std::log10(hi);
    out.reserve(count);
    for (int i = 0; i < count; ++i)
        out.push_back(std::pow(10.0, llo + (lhi - llo) * i / (count - 1)));
    return out;
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out;
    if (count <= 0) return out;
    if (count == 1) {
        out.push_back(lo);
        return out;
    }
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
    return out;
}

}  // namespace resetgraph
