#include "resetgraph/design.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "resetgraph/util.hpp"

namespace resetgraph {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MStructure MStructure::build(const StateSpace& ctrl, double k1, double k2) {
    ctrl.validate();
    if (ctrl.size() != 1) throw ConfigError("conic M structure is defined for SISO controllers");
    if (!(k1 > k2)) throw ConfigError("conic M structure requires k1 > k2");
    Eigen::Matrix2d K;
    K << -k1, 1.0, 1.0, k2;
    MStructure ms;
    ms.k1 = k1;
    ms.k2 = k2;
    ms.M = build_theta(ctrl, K);
    return ms;
}

PCollection collect_P_set(const StateSpace& bls, const std::vector<double>& lambdas) {
    bls.validate();
    if (lambdas.empty()) throw ConfigError("collect_P_set: lambda grid is empty");
    std::vector<std::string> failures;
    if (!is_hurwitz(bls.A)) failures.push_back("A is not Hurwitz");
    if (!is_controllable(bls.A, bls.B)) failures.push_back("(A, B) is not controllable");
    if (!is_normal(bls, default_omega_grid())) failures.push_back("system is not normal");
    if (!failures.empty()) {
        std::string msg = "base linear system fails hypothesis checks:";
        for (const auto& f : failures) msg += " " + f + ";";
        throw ConfigError(msg);
    }
    PCollection pc;
    pc.region = patch_overapprox(bls, lambdas);
    pc.certs = pc.region.provenance.certificates;
    return pc;
}

std::vector<FeasibleCandidate> synthesize_reset(const PCollection& pcol,
                                                const std::vector<double>& k1_grid, double k2,
                                                const StateSpace& bls,
                                                const ResetStructureSpec& structure,
                                                bool common_rho, bool include_zero_baseline) {
    if (k1_grid.empty()) throw ConfigError("synthesize_reset: k1 grid is empty");
    for (double k1 : k1_grid)
        if (!(k1 > k2)) throw ConfigError("synthesize_reset: every k1 must exceed k2");
    if (pcol.certs.empty()) throw ConfigError("synthesize_reset: empty P set");

    const int m = bls.states();
    std::vector<MatrixXd> Ps;
    Ps.reserve(pcol.certs.size());
    for (const auto& cert : pcol.certs)
        if (cert.psd) Ps.push_back(cert.P);
    if (Ps.empty()) throw ConfigError("synthesize_reset: no PSD witnesses in the P set");

    std::vector<std::vector<FeasibleCandidate>> slots(k1_grid.size());
    parallel_for(k1_grid.size(), [&](std::size_t i) {
        MStructure ms = MStructure::build(bls, k1_grid[i], k2);
        auto& out = slots[i];
        JointAdmissibilityResult res =
            admissibility_solve_joint(Ps, ms.M, structure, common_rho);
        if (res.status == SolveStatus::Feasible)
            out.push_back({res.R, k1_grid[i], res.rhos, res.residual});
        if (include_zero_baseline &&
            (out.empty() || out.front().R.cwiseAbs().maxCoeff() > 1e-9)) {
            JointAdmissibilityResult zero = admissibility_solve_joint(
                Ps, ms.M, ResetStructureSpec::fixed(MatrixXd::Zero(m, m)), common_rho);
            if (zero.status == SolveStatus::Feasible)
                out.push_back({zero.R, k1_grid[i], zero.rhos, zero.residual});
        }
    });

    std::vector<FeasibleCandidate> feasible;
    for (auto& s : slots) feasible.insert(feasible.end(), s.begin(), s.end());
    return feasible;
}

namespace {

double score_of(const StepMetrics& sm, Criterion criterion) {
    switch (criterion) {
        case Criterion::L2U1:
            return sm.l2_u1;
        case Criterion::Overshoot:
            return sm.overshoot_pct;
        case Criterion::Settling:
            return sm.settling_time;
    }
    return sm.l2_u1;
}

bool lexicographic_less(const MatrixXd& a, const MatrixXd& b) {
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            if (a(i, j) < b(i, j)) return true;
            if (a(i, j) > b(i, j)) return false;
        }
    return false;
}

}  // namespace

DesignResult select_by_performance(const std::vector<FeasibleCandidate>& candidates,
                                   const StateSpace& plant, const StateSpace& ctrl_bls,
                                   const InputFn& w, Criterion criterion, double T_end,
                                   double dt, double delta, double k2) {
    if (candidates.empty()) throw ConfigError("select_by_performance: empty feasible set");

    DesignResult dr;
    dr.criterion = criterion;
    dr.scored.resize(candidates.size());
    parallel_for(candidates.size(), [&](std::size_t i) {
        ScoredCandidate sc;
        sc.candidate = candidates[i];
        ResetSystem ctrl{ctrl_bls, candidates[i].R,
                         MStructure::build(ctrl_bls, candidates[i].k1, k2).M, delta};
        try {
            ClosedLoopTrace tr = simulate_closed_loop(plant, ctrl, w, T_end, dt);
            sc.metrics = step_metrics(tr);
            sc.score = score_of(sc.metrics, criterion);
        } catch (const SolverError&) {
            sc.diverged = true;
            sc.score = std::numeric_limits<double>::infinity();
        }
        dr.scored[i] = sc;
    });

    int best = -1;
    for (int i = 0; i < static_cast<int>(dr.scored.size()); ++i) {
        const auto& sc = dr.scored[i];
        if (sc.diverged) continue;
        if (best < 0) {
            best = i;
            continue;
        }
        const auto& cur = dr.scored[best];
        if (sc.score < cur.score ||
            (sc.score == cur.score &&
             (sc.candidate.k1 < cur.candidate.k1 ||
              (sc.candidate.k1 == cur.candidate.k1 &&
               lexicographic_less(sc.candidate.R, cur.candidate.R)))))
            best = i;
    }
    if (best < 0) throw SolverError("select_by_performance: all candidates diverged");
    dr.selected = best;
    return dr;
}

RegionApprox h1_inverse_region(const StateSpace& plant, const std::vector<double>& lambdas,
                               double epsilon) {
    if (epsilon <= 0.0) throw ConfigError("h1_inverse_region requires epsilon > 0");
    StateSpace shifted = shift_poles(plant, epsilon);
    if (!is_hurwitz(shifted.A))
        throw std::domain_error("plant is not Hurwitz after the epsilon shift");
    RegionApprox reg = patch_overapprox(negate(shifted), lambdas);
    RegionApprox inv = invert_region(reg);
    inv.provenance.eps_regularized = true;
    inv.provenance.epsilon = epsilon;
    return inv;
}

PipelineOutcome design_pipeline(const PipelineConfig& cfg) {
    cfg.plant.validate();
    cfg.bls.validate();
    if (cfg.k1_grid.empty()) throw ConfigError("design_pipeline: k1 grid is empty");
    if (cfg.lambdas_bls.empty() || cfg.lambdas_plant.empty())
        throw ConfigError("design_pipeline: lambda grids must be nonempty");
    if (!(cfg.delta > 0.0)) throw ConfigError("design_pipeline: delta must be positive");

    PipelineOutcome out;
    out.pset = collect_P_set(cfg.bls, cfg.lambdas_bls);

    RegionApprox h1 = h1_inverse_region(cfg.plant, cfg.lambdas_plant, cfg.epsilon);
    StabilityOptions sopts;
    sopts.mu_count = cfg.mu_count;
    sopts.mu_min = cfg.mu_min;
    sopts.tol_sep = cfg.tol_sep;
    sopts.samples_per_constraint = cfg.samples_per_constraint;
    out.step1 = check_stability_with_patch(h1, out.pset.region, StabilityMode::Soft, sopts);
    if (!out.step1.stable)
        throw StepOneError("base linear design fails the separation test (r_min = " +
                               std::to_string(out.step1.r_min) + ")",
                           out.step1.r_min);

    out.feasible = synthesize_reset(out.pset, cfg.k1_grid, cfg.k2, cfg.bls, cfg.structure,
                                    cfg.common_rho);

    // Independent re-verification of every candidate through the plain
    // admissibility path; synthesis output is not trusted.
    std::vector<FeasibleCandidate> verified;
    for (const auto& cand : out.feasible) {
        ResetSystem sys{cfg.bls, cand.R, MStructure::build(cfg.bls, cand.k1, cfg.k2).M,
                        cfg.delta};
        AdmissibilityReport rep = check_admissible(sys, out.pset.certs, /*use_shortcut=*/false);
        if (rep.admissible) verified.push_back(cand);
    }
    out.feasible = std::move(verified);
    if (out.feasible.empty())
        throw SolverError("design_pipeline: no candidate survived re-verification");

    out.result = select_by_performance(out.feasible, cfg.plant, cfg.bls,
                                       make_step_input(cfg.plant.size(), cfg.w_amplitude),
                                       cfg.criterion, cfg.T_end, cfg.dt, cfg.delta, cfg.k2);
    out.result.config_echo = cfg.config_echo;
    return out;
}

}  // namespace resetgraph
