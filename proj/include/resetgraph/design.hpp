#pragma once

#include <optional>
#include <string>
#include <vector>

#include "resetgraph/cert.hpp"
#include "resetgraph/resetsim.hpp"
#include "resetgraph/sgregions.hpp"

namespace resetgraph {

/// Conic jump-set structure for SISO controllers:
///   M = [C D; 0 1]' [-k1 1; 1 k2] [C D; 0 1],  k1 > k2.
struct MStructure {
    double k1 = 0.0, k2 = 0.0;
    Eigen::MatrixXd M;

    static MStructure build(const StateSpace& ctrl, double k1, double k2);
};

struct PCollection {
    std::vector<KypCertificate> certs;  // the collected P set (PSD witnesses)
    RegionApprox region;                // the patch over-approximation
};

/// Patch construction plus hypothesis checks (Hurwitz, controllable, normal);
/// failures are enumerated in the thrown ConfigError.
PCollection collect_P_set(const StateSpace& bls, const std::vector<double>& lambdas);

struct FeasibleCandidate {
    Eigen::MatrixXd R;
    double k1 = 0.0;
    Eigen::VectorXd rhos;  // per-P multipliers from the joint solve
    double residual = 0.0;
};

/// Step 3: for each k1, one stacked LMI over every collected P with a common
/// structured R. The R = 0 baseline (always admissible) is included alongside
/// the solver witness so the performance sweep can compare against it.
std::vector<FeasibleCandidate> synthesize_reset(const PCollection& pcol,
                                                const std::vector<double>& k1_grid, double k2,
                                                const StateSpace& bls,
                                                const ResetStructureSpec& structure,
                                                bool common_rho = false,
                                                bool include_zero_baseline = true);

enum class Criterion { L2U1, Overshoot, Settling };

struct ScoredCandidate {
    FeasibleCandidate candidate;
    StepMetrics metrics;
    double score = 0.0;
    bool diverged = false;
};

struct DesignResult {
    std::vector<ScoredCandidate> scored;  // one per feasible candidate
    int selected = -1;                    // index into scored
    Criterion criterion = Criterion::L2U1;
    std::string config_echo;
};

/// Closed-loop simulation of every candidate; deterministic tie-break
/// (score, then smaller k1, then lexicographic R entries).
DesignResult select_by_performance(const std::vector<FeasibleCandidate>& candidates,
                                   const StateSpace& plant, const StateSpace& ctrl_bls,
                                   const InputFn& w, Criterion criterion, double T_end,
                                   double dt, double delta, double k2);

/// Step-1 separation failed; carries the measured distance.
struct StepOneError : std::runtime_error {
    StepOneError(const std::string& msg, double distance_)
        : std::runtime_error(msg), distance(distance_) {}
    double distance;
};

struct PipelineConfig {
    StateSpace plant;
    StateSpace bls;
    std::vector<double> lambdas_bls;
    std::vector<double> lambdas_plant;  // centers for the inverse-graph region
    double epsilon = 1e-3;              // pole shift for marginally stable plants
    int mu_count = 20;
    double mu_min = 0.05;
    double tol_sep = kTolSep;
    std::vector<double> k1_grid;
    double k2 = 0.0;
    ResetStructureSpec structure = ResetStructureSpec::free_matrix();
    bool common_rho = false;
    double delta = 1e-2;
    double T_end = 100.0;
    double dt = 1e-3;
    double w_amplitude = 1.0;
    Criterion criterion = Criterion::L2U1;
    int samples_per_constraint = 2048;
    std::string config_echo;
};

/// Over-approximation of the inverse hard SG of -H1 via the eps-regularized
/// plant: PSD-certified region of -H1(. - eps), exactly inverted.
RegionApprox h1_inverse_region(const StateSpace& plant, const std::vector<double>& lambdas,
                               double epsilon);

struct PipelineOutcome {
    StabilityCertificate step1;
    PCollection pset;
    std::vector<FeasibleCandidate> feasible;
    DesignResult result;
};

/// Steps 1-3 plus performance selection. Aborts with StepOneError when the
/// base linear design fails the separation test.
PipelineOutcome design_pipeline(const PipelineConfig& cfg);

}  // namespace resetgraph
