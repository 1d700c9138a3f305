#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace resetgraph {

// Tolerances for the linear-system layer.
inline constexpr double kTolHurwitz = 1e-9;   // absolute, on eigenvalue real parts
inline constexpr double kTolReal = 1e-7;      // |Im| threshold for real-axis crossings
inline constexpr double kTolNormal = 1e-8;    // relative commutator norm
inline constexpr double kTolRank = 1e-8;      // sigma_min/sigma_max numerical rank cutoff

/// LTI system x' = Ax + Bu, y = Cx + Du. Square (inputs == outputs).
/// A zero-state system (m = 0) represents a static gain D.
struct StateSpace {
    Eigen::MatrixXd A, B, C, D;

    StateSpace() = default;
    StateSpace(Eigen::MatrixXd A_, Eigen::MatrixXd B_, Eigen::MatrixXd C_, Eigen::MatrixXd D_);

    int states() const { return static_cast<int>(A.rows()); }
    int size() const { return static_cast<int>(D.rows()); }  // inputs == outputs

    /// Throws ConfigError on inconsistent or non-square dimensions.
    void validate() const;

    static StateSpace static_gain(const Eigen::MatrixXd& D);
};

/// SISO rational transfer function, coefficients in descending powers of s.
struct TransferFunction {
    std::vector<double> num, den;

    TransferFunction() = default;
    TransferFunction(std::vector<double> num_, std::vector<double> den_);

    /// Throws ConfigError if improper or the denominator leading coefficient is zero.
    void validate() const;
};

/// Real-axis extremes [p0, p1] of the eigenvalue loci of G(jw).
struct SpectrumInterval {
    double p0 = 0.0, p1 = 0.0;
};

/// Controllable-canonical-form realization; (A, B) controllable by construction.
StateSpace to_state_space(const TransferFunction& tf);

/// C (jwI - A)^{-1} B + D. Throws PoleOnAxisError when jw is an eigenvalue of A.
Eigen::MatrixXcd freq_response(const StateSpace& sys, double omega);
std::complex<double> freq_response(const TransferFunction& tf, double omega);

/// Response at w = 0 and w -> infinity, both exact (A must be invertible for dc).
Eigen::MatrixXd dc_gain(const StateSpace& sys);

bool is_hurwitz(const Eigen::MatrixXd& A);
bool is_controllable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// G(jw) commutes with its conjugate transpose at every grid point.
/// SISO systems return true without evaluation.
bool is_normal(const StateSpace& sys, const std::vector<double>& omegas);

/// Default frequency grid: 2000 log-spaced points over [1e-3, 1e3] rad/s.
std::vector<double> default_omega_grid();

/// L2 gain: sup_w sigma_max(G(jw)), grid sweep plus golden-section refinement.
/// Requires A Hurwitz (throws std::domain_error otherwise).
double hinf_norm(const StateSpace& sys);

/// p0/p1 from real eigenvalue-locus crossings over the grid plus the analytic
/// w = 0 and w -> infinity limits. For SISO systems, Im-sign changes between
/// grid points are additionally refined by bisection.
SpectrumInterval real_spectrum_interval(const StateSpace& sys, const std::vector<double>& omegas);

/// Frequency-response samples (eigenvalue loci for MIMO), closed under
/// conjugation, ordered by omega.
std::vector<std::complex<double>> nyquist_curve(const StateSpace& sys,
                                                const std::vector<double>& omegas);

/// A - eps*I pole shift; used to apply KYP machinery to marginally stable plants.
StateSpace shift_poles(const StateSpace& sys, double eps);

/// Negation (C, D sign-flipped) and scalar scaling of the I/O map.
StateSpace negate(const StateSpace& sys);
StateSpace scale_output(const StateSpace& sys, double c);

}  // namespace resetgraph
