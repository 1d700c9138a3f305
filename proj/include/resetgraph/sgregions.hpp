#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "resetgraph/sdpcore.hpp"

namespace resetgraph {

inline constexpr double kTolMember = 1e-9;  // membership slack floor

using Complex = std::complex<double>;

/// Generalized circle {z : a|z|^2 + 2b Re z + c >= 0}. a < 0 is a disk
/// interior, a > 0 a disk exterior (infinity included), a = 0 a half-plane.
/// Non-degenerate when b^2 - a c > 0. Coefficients are always real, so every
/// region is symmetric about the real axis.
struct CircleConstraint {
    double a = 0.0, b = 0.0, c = 0.0;

    double eval(Complex z) const {
        return a * std::norm(z) + 2.0 * b * z.real() + c;
    }
    bool contains(Complex z, double tol = kTolMember) const { return eval(z) >= -tol; }

    bool is_line() const { return a == 0.0; }
    double center() const { return -b / a; }          // circle boundary center (a != 0)
    double radius() const;                            // circle boundary radius (a != 0)
    double line_x() const { return -c / (2.0 * b); }  // boundary Re z (a == 0)

    /// Disk interior/exterior from the (sigma, lambda, r) parametrization:
    /// (a, b, c) = (sigma, -sigma*lambda, sigma*(lambda^2 - r^2)).
    static CircleConstraint from_pi(int sigma, double lambda, double r);
    static CircleConstraint disk(double center, double r);      // |z-center| <= r
    static CircleConstraint exterior(double center, double r);  // |z-center| >= r
};

struct RegionProvenance {
    std::vector<KypCertificate> certificates;  // aligned with constraints when from LMIs
    bool nyquist_hull = false;
    bool transformed = false;      // inversion/negation/scaling applied after the solves
    bool eps_regularized = false;  // built from a pole-shifted plant
    double epsilon = 0.0;
    bool indeterminate_seen = false;
    bool all_psd = true;
};

/// Finite intersection of generalized-circle constraints.
struct RegionApprox {
    std::vector<CircleConstraint> constraints;
    RegionProvenance provenance;
    double mu = 1.0;  // accumulated output scaling
};

/// Pi(sigma, lambda, r) = sigma * [[1, -lambda], [-lambda, lambda^2 - r^2]].
Eigen::Matrix2d build_pi(int sigma, double lambda, double r);

/// Theta(Pi) = [C D; 0 I]' (Pi kron I_n) [C D; 0 I].
Eigen::MatrixXd build_theta(const StateSpace& sys, const Eigen::Matrix2d& Pi);

/// Default center grid: 401 uniform points over [-1.5, 1.5] * hinf_norm(H).
std::vector<double> default_lambda_grid(const StateSpace& H);

/// Intersection of all feasible disk/exterior certificates over the grid,
/// both sigma values per center. require_psd restricts to P >= 0 witnesses.
RegionApprox sg_overapprox(const StateSpace& H, const std::vector<double>& lambdas,
                           bool require_psd);

/// PSD-restricted over-approximation: the patched base-linear SG region; the
/// returned provenance carries the collected P set.
RegionApprox patch_overapprox(const StateSpace& H, const std::vector<double>& lambdas);

bool membership(const RegionApprox& rg, Complex z, double tol = kTolMember);

RegionApprox invert_region(const RegionApprox& rg);  // (a,b,c) -> (c,b,a)
RegionApprox negate_region(const RegionApprox& rg);  // (a,b,c) -> (a,-b,c)
RegionApprox scale_region(const RegionApprox& rg, double mu);

/// Geometric inflation: disks grow by eta, exclusions shrink by eta (dropped
/// once they vanish), half-planes shift outward by eta.
RegionApprox inflate_region(const RegionApprox& rg, double eta);

struct BoundarySamples {
    std::vector<Complex> points;
    std::vector<int> constraint_index;  // aligned with points
    double max_pitch = 0.0;             // coarsest sample spacing used
    bool empty_region = false;
};

/// Boundary points of the region: each constraint boundary sampled and
/// filtered against all other constraints.
BoundarySamples boundary_samples(const RegionApprox& rg, int per_constraint);

/// Nonemptiness probe: boundary filtering plus a 128x128 bounding-box grid
/// plus pairwise analytic disk checks.
bool region_empty(const RegionApprox& rg);

struct DistanceReport {
    double distance = 0.0;
    double sample_pitch = 0.0;
    bool overlap = false;
    bool empty_a = false, empty_b = false;  // distance is +inf when either set is empty
};

DistanceReport region_distance(const RegionApprox& a, const RegionApprox& b,
                               int samples_per_constraint = 2048);
DistanceReport region_distance(const std::vector<Complex>& points, const RegionApprox& b,
                               int samples_per_constraint = 2048);

struct HchordResult {
    RegionApprox cover;             // smallest real-centered covering disk
    std::vector<Complex> polyline;  // input curve plus conjugate-chord fill
};

/// Straight-chord fill of a conjugate-symmetric point set. Visualization aid
/// for Nyquist-based inverse graphs; never used for certification.
HchordResult hchord_hull(const std::vector<Complex>& points);

/// Sampled check that boundary-to-conjugate chords stay inside the region.
bool chord_property_check(const RegionApprox& rg, int n_boundary);

}  // namespace resetgraph
