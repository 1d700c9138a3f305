#include "resetgraph/linsys.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "resetgraph/util.hpp"

namespace resetgraph {

using Cplx = std::complex<double>;

StateSpace::StateSpace(Eigen::MatrixXd A_, Eigen::MatrixXd B_, Eigen::MatrixXd C_,
                       Eigen::MatrixXd D_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(std::move(D_)) {
    validate();
}

void StateSpace::validate() const {
    if (A.rows() != A.cols()) throw ConfigError("A must be square");
    if (D.rows() != D.cols()) throw ConfigError("system must be square (inputs == outputs)");
    const auto m = A.rows();
    const auto n = D.rows();
    if (B.rows() != m || B.cols() != n) throw ConfigError("B dimensions inconsistent with A, D");
    if (C.rows() != n || C.cols() != m) throw ConfigError("C dimensions inconsistent with A, D");
    if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite())
        throw ConfigError("system matrices must be finite");
}

StateSpace StateSpace::static_gain(const Eigen::MatrixXd& D) {
    StateSpace sys;
    const auto n = D.rows();
    sys.A.resize(0, 0);
    sys.B.resize(0, n);
    sys.C.resize(n, 0);
    sys.D = D;
    sys.validate();
    return sys;
}

TransferFunction::TransferFunction(std::vector<double> num_, std::vector<double> den_)
    : num(std::move(num_)), den(std::move(den_)) {
    validate();
}

void TransferFunction::validate() const {
    if (den.empty()) throw ConfigError("transfer function denominator is empty");
    if (num.empty()) throw ConfigError("transfer function numerator is empty");
    if (den.front() == 0.0) throw ConfigError("denominator leading coefficient must be nonzero");
    if (num.size() > den.size()) throw ConfigError("transfer function must be proper");
}

StateSpace to_state_space(const TransferFunction& tf) {
    tf.validate();
    const int n = static_cast<int>(tf.den.size()) - 1;  // state dimension
    // Normalize so the denominator is monic, pad the numerator to full length.
    std::vector<double> a(n + 1), b(n + 1, 0.0);
    for (int i = 0; i <= n; ++i) a[i] = tf.den[i] / tf.den[0];
    const int pad = n + 1 - static_cast<int>(tf.num.size());
    for (int i = 0; i < static_cast<int>(tf.num.size()); ++i) b[pad + i] = tf.num[i] / tf.den[0];

    StateSpace sys;
    if (n == 0) return StateSpace::static_gain(Eigen::MatrixXd::Constant(1, 1, b[0]));

    sys.A = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) sys.A(0, j) = -a[j + 1];
    for (int i = 1; i < n; ++i) sys.A(i, i - 1) = 1.0;
    sys.B = Eigen::MatrixXd::Zero(n, 1);
    sys.B(0, 0) = 1.0;
    sys.C = Eigen::MatrixXd::Zero(1, n);
    for (int j = 0; j < n; ++j) sys.C(0, j) = b[j + 1] - b[0] * a[j + 1];
    sys.D = Eigen::MatrixXd::Constant(1, 1, b[0]);
    sys.validate();
    return sys;
}

Eigen::MatrixXcd freq_response(const StateSpace& sys, double omega) {
    const int m = sys.states();
    if (m == 0) return sys.D.cast<Cplx>();
    Eigen::MatrixXcd E = Cplx(0.0, omega) * Eigen::MatrixXcd::Identity(m, m) - sys.A.cast<Cplx>();
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(E);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) throw PoleOnAxisError(omega);
    return sys.C.cast<Cplx>() * lu.solve(sys.B.cast<Cplx>()) + sys.D.cast<Cplx>();
}

std::complex<double> freq_response(const TransferFunction& tf, double omega) {
    const Cplx s(0.0, omega);
    auto horner = [&](const std::vector<double>& coeffs) {
        Cplx v(0.0, 0.0);
        for (double c : coeffs) v = v * s + c;
        return v;
    };
    Cplx den = horner(tf.den);
    double scale = 0.0;
    for (double c : tf.den) scale = std::max(scale, std::abs(c));
    scale *= std::max(1.0, std::pow(std::abs(omega), static_cast<double>(tf.den.size() - 1)));
    if (std::abs(den) <= 1e-14 * std::max(scale, 1.0)) throw PoleOnAxisError(omega);
    return horner(tf.num) / den;
}

Eigen::MatrixXd dc_gain(const StateSpace& sys) {
    if (sys.states() == 0) return sys.D;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys.A);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) throw PoleOnAxisError(0.0);
    return sys.D - sys.C * lu.solve(sys.B);
}

bool is_hurwitz(const Eigen::MatrixXd& A) {
    if (A.rows() == 0) return true;
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw SolverError("eigenvalue solver failed on A");
    return (es.eigenvalues().real().array() < -kTolHurwitz).all();
}

bool is_controllable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    const int m = static_cast<int>(A.rows());
    if (A.cols() != m || B.rows() != m) throw ConfigError("controllability: dimension mismatch");
    if (m == 0) return true;
    const int nb = static_cast<int>(B.cols());
    Eigen::MatrixXd K(m, m * nb);
    Eigen::MatrixXd blk = B;
    for (int i = 0; i < m; ++i) {
        K.middleCols(i * nb, nb) = blk;
        blk = A * blk;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(K);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return false;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) / sv(0) > kTolRank) ++rank;
    return rank == m;
}

bool is_normal(const StateSpace& sys, const std::vector<double>& omegas) {
    if (sys.size() == 1) return true;  // scalars commute
    for (double w : omegas) {
        Eigen::MatrixXcd G = freq_response(sys, w);
        Eigen::MatrixXcd comm = G.adjoint() * G - G * G.adjoint();
        double scale = std::max(1.0, G.squaredNorm());
        if (comm.norm() > kTolNormal * scale) return false;
    }
    return true;
}

std::vector<double> default_omega_grid() { return logspace(1e-3, 1e3, 2000); }

namespace {

double sigma_max(const StateSpace& sys, double omega) {
    Eigen::MatrixXcd G = freq_response(sys, omega);
    if (G.rows() == 1) return std::abs(G(0, 0));
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(G);
    return svd.singularValues()(0);
}

// Golden-section maximization of f over [lo, hi].
template <typename F>
double golden_max(F f, double lo, double hi, int iters) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    return std::max(f1, f2);
}

}  // namespace

double hinf_norm(const StateSpace& sys) {
    sys.validate();
    if (!is_hurwitz(sys.A)) throw std::domain_error("hinf_norm requires a Hurwitz A");
    const auto grid = default_omega_grid();
    if (sys.states() == 0) return sigma_max(sys, 0.0);

    double best = 0.0;
    int best_idx = -1;
    for (int i = 0; i < static_cast<int>(grid.size()); ++i) {
        double s = sigma_max(sys, grid[i]);
        if (s > best) {
            best = s;
            best_idx = i;
        }
    }
    // Analytic endpoints.
    double s0 = dc_gain(sys).jacobiSvd().singularValues()(0);
    double sinf = sys.D.rows() > 0 ? sys.D.jacobiSvd().singularValues()(0) : 0.0;
    best = std::max({best, s0, sinf});

    // Local refinement around the best grid point (log-omega bracket).
    if (best_idx >= 0) {
        double lo = best_idx > 0 ? grid[best_idx - 1] : grid[best_idx] * 0.1;
        double hi = best_idx + 1 < static_cast<int>(grid.size()) ? grid[best_idx + 1]
                                                                 : grid[best_idx] * 10.0;
        double refined = golden_max(
            [&](double lw) { return sigma_max(sys, std::exp(lw)); }, std::log(lo), std::log(hi),
            80);
        best = std::max(best, refined);
    }
    // The peak can also sit below the first grid point.
    double low = golden_max([&](double w) { return sigma_max(sys, w); }, 0.0, grid.front(), 60);
    return std::max(best, low);
}

namespace {

// All eigenvalues of G(jw); the scalar value itself for SISO.
Eigen::VectorXcd loci_at(const StateSpace& sys, double omega) {
    Eigen::MatrixXcd G = freq_response(sys, omega);
    if (G.rows() == 1) {
        Eigen::VectorXcd v(1);
        v(0) = G(0, 0);
        return v;
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(G, false);
    return es.eigenvalues();
}

void collect_real(const Eigen::VectorXcd& vals, std::vector<double>& out) {
    for (int i = 0; i < vals.size(); ++i)
        if (std::abs(vals(i).imag()) <= kTolReal) out.push_back(vals(i).real());
}

void collect_real_matrix_eigs(const Eigen::MatrixXd& M, std::vector<double>& out) {
    if (M.rows() == 1) {
        out.push_back(M(0, 0));
        return;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    collect_real(es.eigenvalues(), out);
}

}  // namespace

SpectrumInterval real_spectrum_interval(const StateSpace& sys, const std::vector<double>& omegas) {
    sys.validate();
    if (!is_hurwitz(sys.A)) throw std::domain_error("real_spectrum_interval requires a Hurwitz A");
    std::vector<double> reals;
    // Exact limits: w = 0 and w -> infinity.
    collect_real_matrix_eigs(dc_gain(sys), reals);
    collect_real_matrix_eigs(sys.D, reals);

    if (sys.size() == 1) {
        // SISO: locate Im-sign changes between grid points by bisection.
        double prev_w = 0.0;
        double prev_im = 0.0;
        bool have_prev = false;
        for (double w : omegas) {
            Cplx g = freq_response(sys, w)(0, 0);
            if (std::abs(g.imag()) <= kTolReal) reals.push_back(g.real());
            if (have_prev && prev_im * g.imag() < 0.0) {
                double lo = prev_w, hi = w, flo = prev_im;
                for (int it = 0; it < 80; ++it) {
                    double mid = 0.5 * (lo + hi);
                    double fm = freq_response(sys, mid)(0, 0).imag();
                    if (flo * fm <= 0.0) {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                reals.push_back(freq_response(sys, 0.5 * (lo + hi))(0, 0).real());
            }
            prev_w = w;
            prev_im = g.imag();
            have_prev = true;
        }
    } else {
        for (double w : omegas) collect_real(loci_at(sys, w), reals);
    }

    if (reals.empty())
        throw SolverError("no real eigenvalue-locus crossings found (grid too coarse?)");
    auto [mn, mx] = std::minmax_element(reals.begin(), reals.end());
    return SpectrumInterval{*mn, *mx};
}

std::vector<std::complex<double>> nyquist_curve(const StateSpace& sys,
                                                const std::vector<double>& omegas) {
    std::vector<Cplx> out;
    out.reserve(2 * omegas.size());
    for (double w : omegas) {
        Eigen::VectorXcd vals = loci_at(sys, w);
        for (int i = 0; i < vals.size(); ++i) {
            out.push_back(vals(i));
            if (std::abs(vals(i).imag()) > 1e-15 * std::max(1.0, std::abs(vals(i))))
                out.push_back(std::conj(vals(i)));
        }
    }
    return out;
}

StateSpace shift_poles(const StateSpace& sys, double eps) {
    StateSpace out = sys;
    if (out.states() > 0)
        out.A -= eps * Eigen::MatrixXd::Identity(out.states(), out.states());
    return out;
}

StateSpace negate(const StateSpace& sys) {
    StateSpace out = sys;
    out.C = -out.C;
    out.D = -out.D;
    return out;
}

StateSpace scale_output(const StateSpace& sys, double c) {
    StateSpace out = sys;
    out.C *= c;
    out.D *= c;
    return out;
}

}  // namespace resetgraph
