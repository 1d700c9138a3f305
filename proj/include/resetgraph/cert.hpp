#pragma once

#include <optional>
#include <string>
#include <vector>

#include "resetgraph/resetsim.hpp"
#include "resetgraph/sgregions.hpp"

namespace resetgraph {

inline constexpr double kTolSep = 1e-3;  // minimum certified SG separation

struct AdmissibilityEntry {
    double lambda = 0.0;
    int sigma = 0;
    SolveStatus status = SolveStatus::Indeterminate;
    double rho = 0.0;
};

struct AdmissibilityReport {
    bool admissible = false;
    std::vector<AdmissibilityEntry> per_P;
    std::optional<double> shortcut_alpha;  // set when R = alpha*I, |alpha| <= 1 applied
    std::vector<std::string> hypothesis_failures;
};

/// Reset-map containment over the collected P set. R = alpha*I with
/// |alpha| <= 1 short-circuits without solving; otherwise one multiplier LMI
/// per certificate. Hypothesis failures (normality, Hurwitz, controllability)
/// are enumerated and force admissible = false.
AdmissibilityReport check_admissible(const ResetSystem& sys,
                                     const std::vector<KypCertificate>& P_set,
                                     bool use_shortcut = true);

enum class StabilityMode { Soft, Hard };

struct StabilityOptions {
    int mu_count = 20;
    double mu_min = 0.05;  // lower endpoint of the log-spaced homotopy grid
    double tol_sep = kTolSep;
    int samples_per_constraint = 2048;
    int chord_samples = 256;
};

struct StabilityCertificate {
    StabilityMode mode = StabilityMode::Soft;
    std::vector<double> mu_grid;
    std::vector<double> distances;  // aligned with mu_grid
    double r_min = 0.0;
    bool stable = false;
    std::optional<double> gain_bound;  // 1/r_min, only with a chord property
    bool chord_h1 = false, chord_patch = false;
    double sample_pitch = 0.0;
    std::vector<std::string> caveats;
};

/// Separation test between an inverse-graph region and the mu-scaled patch.
/// Soft mode sweeps the homotopy grid; hard mode checks mu = 1 only and
/// requires PSD-certified inputs. Indeterminate solver statuses in either
/// provenance force stable = false.
StabilityCertificate check_stability_with_patch(const RegionApprox& h1_region,
                                                const RegionApprox& patch, StabilityMode mode,
                                                const StabilityOptions& opts = {});

/// Convenience wrapper building the patch from the base linear system.
StabilityCertificate check_stability(const RegionApprox& h1_region, const StateSpace& bls,
                                     const std::vector<double>& lambdas, StabilityMode mode,
                                     const StabilityOptions& opts = {});

/// Point-cloud variant (e.g. sampled SG data for H1).
StabilityCertificate check_stability(const std::vector<Complex>& h1_points,
                                     const StateSpace& bls, const std::vector<double>& lambdas,
                                     StabilityMode mode, const StabilityOptions& opts = {});

}  // namespace resetgraph
