#include "resetgraph/cert.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "resetgraph/util.hpp"

namespace resetgraph {

namespace {

std::optional<double> scalar_reset_alpha(const Eigen::MatrixXd& R) {
    if (R.rows() == 0) return 0.0;
    double alpha = R(0, 0);
    Eigen::MatrixXd diff = R - alpha * Eigen::MatrixXd::Identity(R.rows(), R.cols());
    if (diff.cwiseAbs().maxCoeff() > 1e-12) return std::nullopt;
    return alpha;
}

}  // namespace

AdmissibilityReport check_admissible(const ResetSystem& sys,
                                     const std::vector<KypCertificate>& P_set,
                                     bool use_shortcut) {
    sys.validate();
    AdmissibilityReport rep;

    if (!is_hurwitz(sys.base.A)) rep.hypothesis_failures.push_back("A is not Hurwitz");
    if (!is_controllable(sys.base.A, sys.base.B))
        rep.hypothesis_failures.push_back("(A, B) is not controllable");
    if (!is_normal(sys.base, default_omega_grid()))
        rep.hypothesis_failures.push_back("base system is not normal");
    if (!rep.hypothesis_failures.empty()) {
        rep.admissible = false;
        return rep;
    }

    std::optional<double> alpha = scalar_reset_alpha(sys.R);
    if (use_shortcut && alpha && std::abs(*alpha) <= 1.0 + 1e-12) {
        // R = alpha*I, |alpha| <= 1: rho = 0 satisfies the LMI for every P >= 0.
        rep.shortcut_alpha = alpha;
        rep.admissible = true;
        rep.per_P.reserve(P_set.size());
        for (const auto& cert : P_set)
            rep.per_P.push_back({cert.lambda, cert.sigma, SolveStatus::Feasible, 0.0});
        return rep;
    }

    rep.per_P.resize(P_set.size());
    parallel_for(P_set.size(), [&](std::size_t i) {
        const auto& cert = P_set[i];
        AdmissibilityEntry entry;
        entry.lambda = cert.lambda;
        entry.sigma = cert.sigma;
        if (!cert.psd) {
            entry.status = SolveStatus::Infeasible;  // the containment LMI needs P >= 0
        } else {
            AdmissibilityResult res = admissibility_solve(
                cert.P, sys.M, ResetStructureSpec::fixed(sys.R), /*rho_free=*/true);
            entry.status = res.status;
            entry.rho = res.rho;
        }
        rep.per_P[i] = entry;
    });
    rep.admissible = true;
    for (const auto& e : rep.per_P)
        if (e.status != SolveStatus::Feasible) rep.admissible = false;
    return rep;
}

namespace {

// Radius bound of the scaled patch, used for the homotopy-grid Lipschitz slack.
double patch_extent(const RegionApprox& patch) {
    double ext = 0.0;
    for (const auto& cc : patch.constraints)
        if (!cc.is_line() && cc.a < 0.0) {
            double e = std::abs(cc.center()) + cc.radius();
            ext = ext == 0.0 ? e : std::min(ext, e);
        }
    return ext;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

StabilityCertificate check_stability_with_patch(const RegionApprox& h1_region,
                                                const RegionApprox& patch, StabilityMode mode,
                                                const StabilityOptions& opts) {
    StabilityCertificate cert;
    cert.mode = mode;

    if (region_empty(patch)) throw SolverError("patch region is empty");
    if (region_empty(h1_region)) throw SolverError("H1 inverse-graph region is empty");
    if (mode == StabilityMode::Hard) {
        if (!h1_region.provenance.all_psd || h1_region.provenance.nyquist_hull)
            throw ConfigError("hard mode requires a PSD-certified H1 region");
        if (!patch.provenance.all_psd)
            throw ConfigError("hard mode requires a PSD-certified patch");
        cert.mu_grid = {1.0};
    } else {
        if (opts.mu_count < 1) throw ConfigError("mu_count must be >= 1");
        cert.mu_grid = logspace(opts.mu_min, 1.0, opts.mu_count);
    }

    cert.distances.resize(cert.mu_grid.size());
    std::vector<double> pitches(cert.mu_grid.size());
    parallel_for(cert.mu_grid.size(), [&](std::size_t i) {
        RegionApprox scaled = scale_region(patch, cert.mu_grid[i]);
        DistanceReport rep = region_distance(h1_region, scaled, opts.samples_per_constraint);
        cert.distances[i] = rep.distance;
        pitches[i] = rep.sample_pitch;
    });
    cert.r_min = *std::min_element(cert.distances.begin(), cert.distances.end());
    cert.sample_pitch = *std::max_element(pitches.begin(), pitches.end());

    bool indeterminate =
        h1_region.provenance.indeterminate_seen || patch.provenance.indeterminate_seen;
    cert.stable = cert.r_min >= opts.tol_sep && !indeterminate;

    cert.chord_h1 = chord_property_check(h1_region, opts.chord_samples);
    cert.chord_patch = chord_property_check(patch, opts.chord_samples);
    if (cert.stable && (cert.chord_h1 || cert.chord_patch) && cert.r_min > 0.0)
        cert.gain_bound = 1.0 / cert.r_min;

    cert.caveats.push_back("well-posedness of the interconnection is assumed, not checked");
    cert.caveats.push_back("boundary sampling pitch: " + fmt(cert.sample_pitch));
    if (mode == StabilityMode::Soft && cert.mu_grid.size() > 1) {
        double step = 0.0;
        for (std::size_t i = 1; i < cert.mu_grid.size(); ++i)
            step = std::max(step, cert.mu_grid[i] - cert.mu_grid[i - 1]);
        cert.caveats.push_back("finite mu grid; Lipschitz slack <= " +
                               fmt(step * patch_extent(patch)) + " between grid points");
        cert.caveats.push_back("mu below " + fmt(cert.mu_grid.front()) + " not certified");
    }
    if (h1_region.provenance.eps_regularized)
        cert.caveats.push_back("H1 region built from the eps-regularized plant, eps = " +
                               fmt(h1_region.provenance.epsilon));
    if (indeterminate)
        cert.caveats.push_back("indeterminate solver status in provenance; stable forced false");
    return cert;
}

StabilityCertificate check_stability(const RegionApprox& h1_region, const StateSpace& bls,
                                     const std::vector<double>& lambdas, StabilityMode mode,
                                     const StabilityOptions& opts) {
    return check_stability_with_patch(h1_region, patch_overapprox(bls, lambdas), mode, opts);
}

StabilityCertificate check_stability(const std::vector<Complex>& h1_points,
                                     const StateSpace& bls, const std::vector<double>& lambdas,
                                     StabilityMode mode, const StabilityOptions& opts) {
    if (h1_points.empty()) throw SolverError("H1 point set is empty");
    RegionApprox patch = patch_overapprox(bls, lambdas);

    StabilityCertificate cert;
    cert.mode = mode;
    if (mode == StabilityMode::Hard) {
        cert.mu_grid = {1.0};
    } else {
        cert.mu_grid = logspace(opts.mu_min, 1.0, opts.mu_count);
    }
    cert.distances.resize(cert.mu_grid.size());
    std::vector<double> pitches(cert.mu_grid.size());
    parallel_for(cert.mu_grid.size(), [&](std::size_t i) {
        RegionApprox scaled = scale_region(patch, cert.mu_grid[i]);
        DistanceReport rep = region_distance(h1_points, scaled, opts.samples_per_constraint);
        cert.distances[i] = rep.distance;
        pitches[i] = rep.sample_pitch;
    });
    cert.r_min = *std::min_element(cert.distances.begin(), cert.distances.end());
    cert.sample_pitch = *std::max_element(pitches.begin(), pitches.end());
    cert.stable = cert.r_min >= opts.tol_sep && !patch.provenance.indeterminate_seen;
    cert.chord_patch = chord_property_check(patch, opts.chord_samples);
    if (cert.stable && cert.chord_patch && cert.r_min > 0.0) cert.gain_bound = 1.0 / cert.r_min;
    cert.caveats.push_back("well-posedness of the interconnection is assumed, not checked");
    cert.caveats.push_back("H1 side is a sampled point cloud (inner approximation only)");
    return cert;
}

}  // namespace resetgraph
