#include "resetgraph/sdpcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "resetgraph/sgregions.hpp"
#include "resetgraph/util.hpp"

namespace resetgraph {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void LmiProblem::add_block(LmiBlock blk) {
    if (blk.F0.rows() != blk.F0.cols()) throw ConfigError("LMI block must be square");
    for (auto& [idx, F] : blk.terms) {
        if (idx < 0 || idx >= num_vars_) throw ConfigError("LMI term variable index out of range");
        if (F.rows() != blk.F0.rows() || F.cols() != blk.F0.cols())
            throw ConfigError("LMI term dimension mismatch");
    }
    blocks_.push_back(std::move(blk));
}

int LmiProblem::add_symmetric_var(int m) {
    int base = num_vars_;
    num_vars_ += sym_var_count(m);
    return base;
}

int sym_var_count(int m) { return m * (m + 1) / 2; }

Eigen::MatrixXd sym_basis(int m, int k) {
    MatrixXd E = MatrixXd::Zero(m, m);
    int idx = 0;
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            if (idx == k) {
                E(i, j) = 1.0;
                E(j, i) = 1.0;
                return E;
            }
            ++idx;
        }
    throw ConfigError("sym_basis index out of range");
}

Eigen::MatrixXd sym_from_vars(const VectorXd& theta, int base, int m) {
    MatrixXd P = MatrixXd::Zero(m, m);
    int idx = base;
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            P(i, j) = theta(idx);
            P(j, i) = theta(idx);
            ++idx;
        }
    return P;
}

// ---------------------------------------------------------------------------
// Primal-dual interior-point solver (HKM predictor-corrector) for
//   maximize b'y  s.t.  Z_b = C_b - sum_i y_i A_{i,b} >= 0,
// used here exclusively through the slack formulation
//   minimize t   s.t.  G_b(theta) <= t*I  for every block.
// ---------------------------------------------------------------------------
namespace {

constexpr int kMaxIters = 200;
constexpr double kIpmTol = 1e-9;
// Secondary acceptance for stalled runs: the best iterate is still returned
// when it meets this bound; feasibility is decided by an independent residual
// check afterwards, so a slightly loose iterate only errs conservatively.
constexpr double kIpmTolLoose = 1e-7;

double trdot(const MatrixXd& A, const MatrixXd& B) {
    return (A.array() * B.transpose().array()).sum();
}

struct Block {
    int n = 0;
    MatrixXd C;
    std::vector<int> vars;       // global variable indices active in this block
    std::vector<MatrixXd> A;     // aligned with vars
};

// Largest step alpha such that S + alpha*dS stays PSD (0.98 safety applied by
// the caller). S must be positive definite.
double max_step(const Eigen::LLT<MatrixXd>& llt, const MatrixXd& dS) {
    MatrixXd L = llt.matrixL();
    MatrixXd W = L.triangularView<Eigen::Lower>().solve(dS);
    W = L.triangularView<Eigen::Lower>().solve(W.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (W + W.transpose()),
                                               Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();
    if (lmin >= -1e-14) return 1e18;
    return -1.0 / lmin;
}

struct IpmOutcome {
    bool converged = false;  // optimality criteria met (needed to conclude infeasibility)
    VectorXd y;              // best iterate seen, whether or not converged
    int iterations = 0;
};

IpmOutcome solve_dual_sdp(std::vector<Block>& blocks, const VectorXd& b) {
    const int nv = static_cast<int>(b.size());
    const int nb = static_cast<int>(blocks.size());
    int total_dim = 0;
    for (auto& blk : blocks) total_dim += blk.n;

    VectorXd y = VectorXd::Zero(nv);
    std::vector<MatrixXd> X(nb), Z(nb);
    for (int k = 0; k < nb; ++k) {
        double s = 1.0 + blocks[k].C.norm();
        for (auto& A : blocks[k].A) s = std::max(s, 1.0 + A.norm());
        X[k] = s * MatrixXd::Identity(blocks[k].n, blocks[k].n);
        Z[k] = s * MatrixXd::Identity(blocks[k].n, blocks[k].n);
    }

    std::vector<Eigen::LLT<MatrixXd>> lltZ(nb), lltX(nb);
    std::vector<MatrixXd> Zinv(nb), Rd(nb);
    std::vector<std::vector<MatrixXd>> T(nb);  // T[k][j] = Zinv A_j X per block

    IpmOutcome out;
    double bnorm = 1.0 + b.norm();
    double cnorm = 1.0;
    for (auto& blk : blocks) cnorm = std::max(cnorm, blk.C.norm());

    VectorXd best_y = y;
    double best_metric = std::numeric_limits<double>::infinity();
    int since_best = 0;

    for (int iter = 0; iter < kMaxIters; ++iter) {
        out.iterations = iter;
        // Factor current iterates; a failure here means the step control broke.
        bool factor_ok = true;
        for (int k = 0; k < nb && factor_ok; ++k) {
            lltZ[k].compute(Z[k]);
            lltX[k].compute(X[k]);
            if (lltZ[k].info() != Eigen::Success || lltX[k].info() != Eigen::Success)
                factor_ok = false;
            else
                Zinv[k] = lltZ[k].solve(MatrixXd::Identity(blocks[k].n, blocks[k].n));
        }
        if (!factor_ok) break;

        double mu = 0.0;
        for (int k = 0; k < nb; ++k) mu += trdot(X[k], Z[k]);
        mu /= total_dim;

        // Residuals and objective values.
        VectorXd rp = b;
        double pobj = 0.0;
        for (int k = 0; k < nb; ++k) {
            auto& blk = blocks[k];
            pobj += trdot(blk.C, X[k]);
            for (std::size_t j = 0; j < blk.vars.size(); ++j)
                rp(blk.vars[j]) -= trdot(blk.A[j], X[k]);
        }
        double dobj = b.dot(y);
        double dinf = 0.0;
        for (int k = 0; k < nb; ++k) {
            auto& blk = blocks[k];
            Rd[k] = blk.C - Z[k];
            for (std::size_t j = 0; j < blk.vars.size(); ++j)
                Rd[k] -= y(blk.vars[j]) * blk.A[j];
            dinf = std::max(dinf, Rd[k].norm() / (1.0 + cnorm));
        }
        double pinf = rp.norm() / bnorm;
        double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
        if (std::getenv("RG_IPM_DEBUG"))
            std::fprintf(stderr, "it=%d mu=%.3e pinf=%.3e dinf=%.3e gap=%.3e pobj=%.6e dobj=%.6e\n",
                         iter, mu, pinf, dinf, relgap, pobj, dobj);
        double metric = std::max({pinf, dinf, relgap});
        if (metric < best_metric) {
            best_metric = metric;
            best_y = y;
            since_best = 0;
        } else {
            ++since_best;
        }
        if (metric < kIpmTol) {
            out.converged = true;
            out.y = y;
            return out;
        }
        out.y = best_y;
        if (!std::isfinite(metric) || y.norm() > 1e14) break;
        if (since_best > 12) break;  // stalled in numerical noise; keep the best iterate

        // Schur complement O_ij = sum_b tr(A_i Zinv A_j X).
        MatrixXd O = MatrixXd::Zero(nv, nv);
        for (int k = 0; k < nb; ++k) {
            auto& blk = blocks[k];
            T[k].resize(blk.vars.size());
            for (std::size_t j = 0; j < blk.vars.size(); ++j)
                T[k][j] = Zinv[k] * blk.A[j] * X[k];
            for (std::size_t i = 0; i < blk.vars.size(); ++i)
                for (std::size_t j = 0; j < blk.vars.size(); ++j)
                    O(blk.vars[i], blk.vars[j]) += trdot(blk.A[i], T[k][j]);
        }
        O = 0.5 * (O + O.transpose()).eval();

        double ridge = 1e-13 * (1.0 + O.diagonal().cwiseAbs().maxCoeff());
        Eigen::LDLT<MatrixXd> ldlt;
        for (int attempt = 0; attempt < 6; ++attempt) {
            ldlt.compute(O + ridge * MatrixXd::Identity(nv, nv));
            if (ldlt.info() == Eigen::Success && ldlt.isPositive()) break;
            ridge *= 100.0;
        }
        if (ldlt.info() != Eigen::Success) break;

        auto solve_direction = [&](double sigma_mu, bool corrector,
                                   const std::vector<MatrixXd>& dZp,
                                   const std::vector<MatrixXd>& dXp, VectorXd& dy,
                                   std::vector<MatrixXd>& dZ, std::vector<MatrixXd>& dX) {
            VectorXd rhs = rp;
            for (int k = 0; k < nb; ++k) {
                auto& blk = blocks[k];
                MatrixXd Gm = Zinv[k] * Rd[k] * X[k];
                MatrixXd Hm;
                if (corrector) Hm = Zinv[k] * dZp[k] * dXp[k];
                for (std::size_t i = 0; i < blk.vars.size(); ++i) {
                    double gi = -trdot(blk.A[i], X[k]) - trdot(blk.A[i], Gm);
                    if (sigma_mu != 0.0) gi += sigma_mu * trdot(blk.A[i], Zinv[k]);
                    if (corrector) gi -= trdot(blk.A[i], Hm);
                    rhs(blk.vars[i]) -= gi;
                }
            }
            dy = ldlt.solve(rhs);
            dZ.resize(nb);
            dX.resize(nb);
            for (int k = 0; k < nb; ++k) {
                auto& blk = blocks[k];
                dZ[k] = Rd[k];
                for (std::size_t j = 0; j < blk.vars.size(); ++j)
                    dZ[k] -= dy(blk.vars[j]) * blk.A[j];
                MatrixXd dXk = -X[k] - Zinv[k] * Rd[k] * X[k];
                if (sigma_mu != 0.0) dXk += sigma_mu * Zinv[k];
                for (std::size_t j = 0; j < blk.vars.size(); ++j)
                    dXk += dy(blk.vars[j]) * T[k][j];
                if (corrector) dXk -= Zinv[k] * dZp[k] * dXp[k];
                dX[k] = 0.5 * (dXk + dXk.transpose()).eval();
            }
        };

        // Predictor.
        VectorXd dy_p;
        std::vector<MatrixXd> dZ_p, dX_p;
        solve_direction(0.0, false, {}, {}, dy_p, dZ_p, dX_p);
        double ap = 1.0, ad = 1.0;
        for (int k = 0; k < nb; ++k) {
            ap = std::min(ap, 0.98 * max_step(lltX[k], dX_p[k]));
            ad = std::min(ad, 0.98 * max_step(lltZ[k], dZ_p[k]));
        }
        double mu_aff = 0.0;
        for (int k = 0; k < nb; ++k)
            mu_aff += trdot(X[k] + ap * dX_p[k], Z[k] + ad * dZ_p[k]);
        mu_aff /= total_dim;
        double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);
        // Recentre instead of pushing complementarity when the iterate is
        // still far from primal feasibility; plain Mehrotra drives mu to the
        // floor and stalls on primal-degenerate instances otherwise.
        if (rp.norm() > 10.0 * mu) sigma = std::max(sigma, 0.5);

        // Corrector.
        VectorXd dy;
        std::vector<MatrixXd> dZ, dX;
        solve_direction(sigma * mu, true, dZ_p, dX_p, dy, dZ, dX);
        ap = 1.0;
        ad = 1.0;
        for (int k = 0; k < nb; ++k) {
            ap = std::min(ap, 0.98 * max_step(lltX[k], dX[k]));
            ad = std::min(ad, 0.98 * max_step(lltZ[k], dZ[k]));
        }
        for (int k = 0; k < nb; ++k) {
            X[k] += ap * dX[k];
            Z[k] += ad * dZ[k];
        }
        y += ad * dy;
    }
    out.converged = best_metric <= kIpmTolLoose;
    out.y = best_y;
    return out;
}

}  // namespace

LmiSolution lmi_feasible(const LmiProblem& prob) {
    const int K = prob.num_vars();
    const int tvar = K;  // slack variable index

    std::vector<Block> blocks;
    blocks.reserve(prob.blocks().size());
    for (const auto& src : prob.blocks()) {
        // Convert to "<= 0" sense, then to dual form Z = C - sum y_i A_i with
        // the t-slack entering every block as A_t = -I.
        double sgn = src.sense == BlockSense::NegSemidef ? 1.0 : -1.0;
        Block blk;
        blk.n = static_cast<int>(src.F0.rows());
        blk.C = -sgn * src.F0;
        for (const auto& [idx, F] : src.terms) {
            blk.vars.push_back(idx);
            blk.A.push_back(sgn * F);
        }
        blk.vars.push_back(tvar);
        blk.A.push_back(-MatrixXd::Identity(blk.n, blk.n));
        blocks.push_back(std::move(blk));
    }

    VectorXd b = VectorXd::Zero(K + 1);
    b(tvar) = -1.0;  // maximize -t

    LmiSolution sol;
    IpmOutcome ipm = solve_dual_sdp(blocks, b);
    sol.iterations = ipm.iterations;
    sol.converged = ipm.converged;
    sol.theta = ipm.y.head(K);
    sol.slack = ipm.y(tvar);

    // Independent verification: evaluate every block at theta.
    double residual = -std::numeric_limits<double>::infinity();
    for (const auto& src : prob.blocks()) {
        double sgn = src.sense == BlockSense::NegSemidef ? 1.0 : -1.0;
        MatrixXd G = sgn * src.F0;
        for (const auto& [idx, F] : src.terms) G += sgn * sol.theta(idx) * F;
        if (G.rows() == 0) continue;
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (G + G.transpose()),
                                                   Eigen::EigenvaluesOnly);
        residual = std::max(residual, es.eigenvalues().maxCoeff());
    }
    sol.residual = residual;
    // A verified witness certifies feasibility on its own; concluding
    // infeasibility additionally requires the solver to have reached the
    // optimum (otherwise a better witness might still exist).
    if (residual <= kTolLmi)
        sol.status = SolveStatus::Feasible;
    else
        sol.status = sol.converged ? SolveStatus::Infeasible : SolveStatus::Indeterminate;
    return sol;
}

// ---------------------------------------------------------------------------
// KYP radius optimization
// ---------------------------------------------------------------------------
namespace {

// Bisection probes accept only near-exact LMI satisfaction; the public
// kTolLmi would let the r -> 0 marginal boundary of sigma = +1 solves leak
// through as spurious tiny exclusion disks.
constexpr double kProbeTol = 3e-9;
// Certified sigma = +1 radii at or below the tolerance-blur scale are
// reported infeasible: they are artifacts of the marginal point r = 0 and
// would carve genuine SG boundary points out of the region.
constexpr double kSigmaPlusFloor = 1e-4;

struct KypProbeResult {
    SolveStatus status;
    MatrixXd P;
    double residual;
    bool psd;
};

// Feasibility of the containment LMI at a fixed radius (normalized system).
KypProbeResult kyp_probe(const StateSpace& H, int sigma, double lambda, double r,
                         bool require_psd) {
    const int m = H.states();
    LmiProblem prob(0);
    const int pbase = prob.add_symmetric_var(m);

    Eigen::Matrix2d Pi = build_pi(sigma, lambda, r);
    MatrixXd Theta = build_theta(H, Pi);

    LmiBlock main;
    main.sense = BlockSense::NegSemidef;
    main.F0 = -Theta;
    const int n = H.size();
    for (int k = 0; k < sym_var_count(m); ++k) {
        MatrixXd E = sym_basis(m, k);
        MatrixXd F = MatrixXd::Zero(m + n, m + n);
        F.topLeftCorner(m, m) = H.A.transpose() * E + E * H.A;
        F.topRightCorner(m, n) = E * H.B;
        F.bottomLeftCorner(n, m) = H.B.transpose() * E;
        main.terms.emplace_back(pbase + k, std::move(F));
    }
    prob.add_block(std::move(main));

    if (require_psd && m > 0) {
        LmiBlock psd;
        psd.sense = BlockSense::PosSemidef;
        psd.F0 = MatrixXd::Zero(m, m);
        for (int k = 0; k < sym_var_count(m); ++k)
            psd.terms.emplace_back(pbase + k, sym_basis(m, k));
        prob.add_block(std::move(psd));
    }

    LmiSolution sol = lmi_feasible(prob);
    KypProbeResult out;
    out.residual = sol.residual;
    out.P = sym_from_vars(sol.theta, pbase, m);
    if (sol.residual <= kProbeTol)
        out.status = SolveStatus::Feasible;
    else
        out.status = sol.converged ? SolveStatus::Infeasible : SolveStatus::Indeterminate;
    out.psd = true;
    if (m > 0 && out.status == SolveStatus::Feasible) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(out.P, Eigen::EigenvaluesOnly);
        out.psd = es.eigenvalues().minCoeff() >= -kTolPsd;
        if (require_psd && !out.psd) out.status = SolveStatus::Infeasible;
    }
    return out;
}

// Tracks probe outcomes and enforces that feasibility is monotone in r^2.
struct MonotonicityAudit {
    int sigma;
    double max_infeasible_r = -1.0, min_infeasible_r = std::numeric_limits<double>::infinity();
    double max_feasible_r = -1.0, min_feasible_r = std::numeric_limits<double>::infinity();

    void record(double r, SolveStatus st) {
        if (st == SolveStatus::Feasible) {
            max_feasible_r = std::max(max_feasible_r, r);
            min_feasible_r = std::min(min_feasible_r, r);
        } else if (st == SolveStatus::Infeasible) {
            max_infeasible_r = std::max(max_infeasible_r, r);
            min_infeasible_r = std::min(min_infeasible_r, r);
        }
        // sigma = -1: feasible set is an upper interval in r; sigma = +1: lower.
        bool bad = sigma < 0 ? (max_infeasible_r > 0 && min_feasible_r < max_infeasible_r * (1.0 - 1e-12))
                             : (max_feasible_r > 0 && min_infeasible_r < max_feasible_r * (1.0 - 1e-12));
        if (bad) throw SolverError("KYP bisection monotonicity violated");
    }
};

}  // namespace

KypResult kyp_solve(const StateSpace& H, int sigma, double lambda, bool require_psd,
                    double hinf_hint) {
    H.validate();
    if (sigma != -1 && sigma != 1) throw ConfigError("sigma must be -1 or +1");
    if (!is_hurwitz(H.A)) throw std::domain_error("kyp_solve requires a Hurwitz A");

    double hinf = hinf_hint >= 0.0 ? hinf_hint : hinf_norm(H);
    // Normalize the output scale so LMI data stays O(1) even for high-gain
    // systems or far-out centers; SG(c*H) = c*SG(H) makes this exact.
    const double c = std::max({1.0, hinf, std::abs(lambda)});
    StateSpace Hn = scale_output(H, 1.0 / c);
    const double ln = lambda / c;
    const double gain_n = hinf / c;  // <= 1

    KypResult result;
    MonotonicityAudit audit{sigma};
    auto probe = [&](double r) {
        KypProbeResult pr = kyp_probe(Hn, sigma, ln, r, require_psd);
        if (pr.status == SolveStatus::Indeterminate) {
            // One rescue attempt at a nudged radius before recording the miss.
            pr = kyp_probe(Hn, sigma, ln, r * (1.0 + 1e-7), require_psd);
            if (pr.status == SolveStatus::Indeterminate) result.indeterminate_seen = true;
        }
        audit.record(r, pr.status);
        return pr;
    };

    double lo = kTolR, hi = gain_n + std::abs(ln) + 1e-2;
    KypProbeResult at_lo = probe(lo), at_hi = probe(hi);

    KypProbeResult witness{};
    double r_witness = 0.0;
    if (sigma < 0) {
        // Minimal covering radius: infeasible below, feasible above.
        if (at_lo.status == SolveStatus::Feasible) {
            witness = at_lo;  // point-like SG (static gain at its own value)
            r_witness = lo;
        } else {
            for (int k = 0; k < 6 && at_hi.status != SolveStatus::Feasible; ++k) {
                hi *= 2.0;
                at_hi = probe(hi);
            }
            if (at_hi.status != SolveStatus::Feasible) return result;  // infeasible/indeterminate
            witness = at_hi;
            r_witness = hi;
            for (int it = 0; it < 60 && (hi - lo) > 1e-8 * hi; ++it) {
                double mid = 0.5 * (lo + hi);
                KypProbeResult pm = probe(mid);
                if (pm.status == SolveStatus::Feasible) {
                    hi = mid;
                    witness = pm;
                    r_witness = mid;
                } else {
                    lo = mid;
                }
            }
        }
    } else {
        // Maximal excluded radius: feasible below, infeasible above.
        if (at_lo.status != SolveStatus::Feasible) return result;
        witness = at_lo;
        r_witness = lo;
        for (int k = 0; k < 6 && at_hi.status == SolveStatus::Feasible; ++k) {
            witness = at_hi;
            r_witness = hi;
            hi *= 2.0;
            at_hi = probe(hi);
        }
        if (at_hi.status == SolveStatus::Feasible)
            throw SolverError("excluded-disk radius did not saturate");
        for (int it = 0; it < 60 && (hi - lo) > 1e-8 * hi; ++it) {
            double mid = 0.5 * (lo + hi);
            KypProbeResult pm = probe(mid);
            if (pm.status == SolveStatus::Feasible) {
                lo = mid;
                witness = pm;
                r_witness = mid;
            } else {
                hi = mid;
            }
        }
        if (r_witness <= kSigmaPlusFloor) return result;  // blur artifact, not a real exclusion
    }

    KypCertificate cert;
    cert.sigma = sigma;
    cert.lambda = lambda;
    cert.r = c * std::max(r_witness, kTolR);
    cert.P = c * c * witness.P;
    cert.psd = witness.psd;
    cert.residual = witness.residual;
    cert.scale = c;
    cert.indeterminate_seen = result.indeterminate_seen;
    result.cert = cert;
    return result;
}

// ---------------------------------------------------------------------------
// Reset-map admissibility LMI
// ---------------------------------------------------------------------------

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& P) {
    if (P.rows() != P.cols()) throw ConfigError("psd_sqrt: matrix must be square");
    if (P.rows() == 0) return P;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (P + P.transpose()));
    VectorXd ev = es.eigenvalues();
    if (ev.minCoeff() < -kTolPsd)
        throw std::invalid_argument("psd_sqrt: matrix has eigenvalue below -tol_psd");
    VectorXd s = ev.cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
}

ResetStructureSpec ResetStructureSpec::fixed(Eigen::MatrixXd R) {
    ResetStructureSpec rs;
    rs.kind = ResetStructure::Fixed;
    rs.fixed_R = std::move(R);
    return rs;
}

namespace {

struct ResetVarMap {
    MatrixXd fixed_part;                                   // constant part of R
    std::vector<std::pair<int, MatrixXd>> entry_dirs;      // (var, dR) pairs
};

ResetVarMap reset_structure_vars(const ResetStructureSpec& rs, int m, LmiProblem& prob) {
    ResetVarMap vm;
    vm.fixed_part = MatrixXd::Zero(m, m);
    switch (rs.kind) {
        case ResetStructure::Fixed:
            if (rs.fixed_R.rows() != m || rs.fixed_R.cols() != m)
                throw ConfigError("fixed reset map has wrong dimensions");
            vm.fixed_part = rs.fixed_R;
            break;
        case ResetStructure::Free:
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    MatrixXd dir = MatrixXd::Zero(m, m);
                    dir(i, j) = 1.0;
                    vm.entry_dirs.emplace_back(prob.add_scalar_var(), std::move(dir));
                }
            break;
        case ResetStructure::Scalar:
            vm.entry_dirs.emplace_back(prob.add_scalar_var(), MatrixXd::Identity(m, m));
            break;
        case ResetStructure::Partial: {
            if (rs.partial_p < 0 || rs.partial_p > m)
                throw ConfigError("partial reset block size out of range");
            vm.fixed_part.bottomRightCorner(m - rs.partial_p, m - rs.partial_p) =
                MatrixXd::Identity(m - rs.partial_p, m - rs.partial_p);
            for (int i = 0; i < rs.partial_p; ++i)
                for (int j = 0; j < rs.partial_p; ++j) {
                    MatrixXd dir = MatrixXd::Zero(m, m);
                    dir(i, j) = 1.0;
                    vm.entry_dirs.emplace_back(prob.add_scalar_var(), std::move(dir));
                }
            break;
        }
    }
    return vm;
}

// Builds the (2m+n) x (2m+n) admissibility block for one P.
void add_admissibility_block(LmiProblem& prob, const MatrixXd& P, const MatrixXd& S,
                             const MatrixXd& M, const ResetVarMap& vm, int rho_var,
                             double fixed_rho) {
    const int m = static_cast<int>(P.rows());
    const int n = static_cast<int>(M.rows()) - m;
    if (n < 1) throw ConfigError("M must be (m+n) x (m+n) with n >= 1");
    const int N = 2 * m + n;

    LmiBlock blk;
    blk.sense = BlockSense::PosSemidef;
    blk.F0 = MatrixXd::Zero(N, N);
    blk.F0.topLeftCorner(m, m) = P;
    blk.F0.bottomRightCorner(m, m) = MatrixXd::Identity(m, m);
    MatrixXd SRfix = S * vm.fixed_part;
    blk.F0.block(m + n, 0, m, m) = SRfix;
    blk.F0.block(0, m + n, m, m) = SRfix.transpose();
    if (rho_var < 0) blk.F0.topLeftCorner(m + n, m + n) += fixed_rho * M;

    if (rho_var >= 0) {
        MatrixXd F = MatrixXd::Zero(N, N);
        F.topLeftCorner(m + n, m + n) = M;
        blk.terms.emplace_back(rho_var, std::move(F));
    }
    for (const auto& [var, dir] : vm.entry_dirs) {
        MatrixXd F = MatrixXd::Zero(N, N);
        MatrixXd SD = S * dir;
        F.block(m + n, 0, m, m) = SD;
        F.block(0, m + n, m, m) = SD.transpose();
        blk.terms.emplace_back(var, std::move(F));
    }
    prob.add_block(std::move(blk));
}

void add_nonneg_block(LmiProblem& prob, int var) {
    LmiBlock blk;
    blk.sense = BlockSense::PosSemidef;
    blk.F0 = MatrixXd::Zero(1, 1);
    MatrixXd one = MatrixXd::Identity(1, 1);
    blk.terms.emplace_back(var, one);
    prob.add_block(std::move(blk));
}

MatrixXd assemble_R(const ResetVarMap& vm, const VectorXd& theta) {
    MatrixXd R = vm.fixed_part;
    for (const auto& [var, dir] : vm.entry_dirs) R += theta(var) * dir;
    return R;
}

}  // namespace

AdmissibilityResult admissibility_solve(const Eigen::MatrixXd& P, const Eigen::MatrixXd& M,
                                        const ResetStructureSpec& structure, bool rho_free,
                                        double fixed_rho) {
    const int m = static_cast<int>(P.rows());
    if (M.rows() != M.cols()) throw ConfigError("M must be square");
    MatrixXd S = psd_sqrt(P);

    LmiProblem prob(0);
    ResetVarMap vm = reset_structure_vars(structure, m, prob);
    int rho_var = rho_free ? prob.add_scalar_var() : -1;
    add_admissibility_block(prob, P, S, M, vm, rho_var, fixed_rho);
    if (rho_free) add_nonneg_block(prob, rho_var);

    LmiSolution sol = lmi_feasible(prob);
    AdmissibilityResult out;
    out.status = sol.status;
    out.residual = sol.residual;
    if (sol.status == SolveStatus::Feasible) {
        out.R = assemble_R(vm, sol.theta);
        out.rho = rho_free ? std::max(0.0, sol.theta(rho_var)) : fixed_rho;
    } else {
        out.R = vm.fixed_part;
        out.rho = fixed_rho;
    }
    return out;
}

JointAdmissibilityResult admissibility_solve_joint(const std::vector<Eigen::MatrixXd>& Ps,
                                                   const Eigen::MatrixXd& M,
                                                   const ResetStructureSpec& structure,
                                                   bool common_rho) {
    if (Ps.empty()) throw ConfigError("joint admissibility needs at least one P");
    const int m = static_cast<int>(Ps.front().rows());

    LmiProblem prob(0);
    ResetVarMap vm = reset_structure_vars(structure, m, prob);

    int shared_rho = -1;
    if (common_rho) {
        shared_rho = prob.add_scalar_var();
        add_nonneg_block(prob, shared_rho);
    }

    std::vector<int> rho_vars;
    rho_vars.reserve(Ps.size());
    for (const auto& P : Ps) {
        if (P.rows() != m || P.cols() != m)
            throw ConfigError("all P matrices must share dimensions");
        int rv = common_rho ? shared_rho : prob.add_scalar_var();
        if (!common_rho) add_nonneg_block(prob, rv);
        rho_vars.push_back(rv);
        add_admissibility_block(prob, P, psd_sqrt(P), M, vm, rv, 0.0);
    }

    LmiSolution sol = lmi_feasible(prob);
    JointAdmissibilityResult out;
    out.status = sol.status;
    out.residual = sol.residual;
    out.rhos = VectorXd::Zero(static_cast<int>(Ps.size()));
    if (sol.status == SolveStatus::Feasible) {
        out.R = assemble_R(vm, sol.theta);
        for (std::size_t i = 0; i < Ps.size(); ++i)
            out.rhos(static_cast<int>(i)) = std::max(0.0, sol.theta(rho_vars[i]));
    } else {
        out.R = vm.fixed_part;
    }
    return out;
}

}  // namespace resetgraph
