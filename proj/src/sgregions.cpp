#include "resetgraph/sgregions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "resetgraph/util.hpp"

namespace resetgraph {

double CircleConstraint::radius() const {
    double disc = b * b - a * c;
    return std::sqrt(std::max(disc, 0.0)) / std::abs(a);
}

CircleConstraint CircleConstraint::from_pi(int sigma, double lambda, double r) {
    if (r <= 0.0) throw ConfigError("constraint radius must be positive");
    double s = static_cast<double>(sigma);
    return CircleConstraint{s, -s * lambda, s * (lambda * lambda - r * r)};
}

CircleConstraint CircleConstraint::disk(double center, double r) {
    return from_pi(-1, center, r);
}

CircleConstraint CircleConstraint::exterior(double center, double r) {
    return from_pi(+1, center, r);
}

Eigen::Matrix2d build_pi(int sigma, double lambda, double r) {
    if (sigma != -1 && sigma != 1) throw ConfigError("sigma must be -1 or +1");
    if (r <= 0.0) throw ConfigError("build_pi requires r > 0");
    Eigen::Matrix2d Pi;
    Pi << 1.0, -lambda, -lambda, lambda * lambda - r * r;
    return static_cast<double>(sigma) * Pi;
}

Eigen::MatrixXd build_theta(const StateSpace& sys, const Eigen::Matrix2d& Pi) {
    sys.validate();
    const int m = sys.states();
    const int n = sys.size();
    Eigen::MatrixXd W(2 * n, m + n);
    W.topLeftCorner(n, m) = sys.C;
    W.topRightCorner(n, n) = sys.D;
    W.bottomLeftCorner(n, m).setZero();
    W.bottomRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            K.block(i * n, j * n, n, n) = Pi(i, j) * Eigen::MatrixXd::Identity(n, n);
    return W.transpose() * K * W;
}

std::vector<double> default_lambda_grid(const StateSpace& H) {
    double g = hinf_norm(H);
    return linspace(-1.5 * g, 1.5 * g, 401);
}

RegionApprox sg_overapprox(const StateSpace& H, const std::vector<double>& lambdas,
                           bool require_psd) {
    H.validate();
    if (lambdas.empty()) throw ConfigError("lambda grid is empty");
    if (!is_hurwitz(H.A)) throw std::domain_error("sg_overapprox requires a Hurwitz A");
    const double hinf = hinf_norm(H);

    // One slot per (lambda, sigma); merged in grid order for determinism.
    std::vector<KypResult> results(2 * lambdas.size());
    parallel_for(lambdas.size(), [&](std::size_t i) {
        results[2 * i] = kyp_solve(H, -1, lambdas[i], require_psd, hinf);
        results[2 * i + 1] = kyp_solve(H, +1, lambdas[i], require_psd, hinf);
    });

    RegionApprox rg;
    for (const auto& res : results) {
        rg.provenance.indeterminate_seen |= res.indeterminate_seen;
        if (!res.cert) continue;
        const KypCertificate& cert = *res.cert;
        rg.constraints.push_back(CircleConstraint::from_pi(cert.sigma, cert.lambda, cert.r));
        rg.provenance.all_psd &= cert.psd;
        rg.provenance.certificates.push_back(cert);
    }
    return rg;
}

RegionApprox patch_overapprox(const StateSpace& H, const std::vector<double>& lambdas) {
    return sg_overapprox(H, lambdas, /*require_psd=*/true);
}

bool membership(const RegionApprox& rg, Complex z, double tol) {
    for (const auto& cc : rg.constraints)
        if (!cc.contains(z, tol)) return false;
    return true;
}

namespace {

RegionApprox transformed_copy(const RegionApprox& rg) {
    RegionApprox out = rg;
    out.provenance.transformed = true;
    return out;
}

}  // namespace

RegionApprox invert_region(const RegionApprox& rg) {
    RegionApprox out = transformed_copy(rg);
    for (auto& cc : out.constraints) std::swap(cc.a, cc.c);
    return out;
}

RegionApprox negate_region(const RegionApprox& rg) {
    RegionApprox out = transformed_copy(rg);
    for (auto& cc : out.constraints) cc.b = -cc.b;
    return out;
}

RegionApprox scale_region(const RegionApprox& rg, double mu) {
    if (mu <= 0.0) throw ConfigError("scale_region requires mu > 0");
    RegionApprox out = transformed_copy(rg);
    for (auto& cc : out.constraints) {
        cc.b *= mu;
        cc.c *= mu * mu;
    }
    out.mu = rg.mu * mu;
    return out;
}

RegionApprox inflate_region(const RegionApprox& rg, double eta) {
    if (eta < 0.0) throw ConfigError("inflate_region requires eta >= 0");
    RegionApprox out = transformed_copy(rg);
    out.constraints.clear();
    for (const auto& cc : rg.constraints) {
        if (cc.is_line()) {
            CircleConstraint grown = cc;
            grown.c += 2.0 * std::abs(cc.b) * eta;
            out.constraints.push_back(grown);
        } else if (cc.a < 0.0) {
            out.constraints.push_back(CircleConstraint::disk(cc.center(), cc.radius() + eta));
        } else {
            double r = cc.radius() - eta;
            if (r > kTolR) out.constraints.push_back(CircleConstraint::exterior(cc.center(), r));
            // an exclusion smaller than eta disappears entirely
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sampling, emptiness, distance
// ---------------------------------------------------------------------------
namespace {

struct BBox {
    double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;
    bool valid() const { return x0 <= x1 && y0 <= y1; }
};

// Bounding box from disk constraints (intersection of their boxes); falls back
// to a coefficient-scale box when the region has no disk constraint.
BBox region_bbox(const RegionApprox& rg) {
    BBox box;
    bool has_disk = false;
    for (const auto& cc : rg.constraints) {
        if (!cc.is_line() && cc.a < 0.0) {
            double x0 = cc.center() - cc.radius(), x1 = cc.center() + cc.radius();
            double r = cc.radius();
            if (!has_disk) {
                box = BBox{x0, x1, -r, r};
                has_disk = true;
            } else {
                box.x0 = std::max(box.x0, x0);
                box.x1 = std::min(box.x1, x1);
                box.y0 = std::max(box.y0, -r);
                box.y1 = std::min(box.y1, r);
            }
        }
    }
    if (!has_disk) {
        double L = 1.0;
        for (const auto& cc : rg.constraints) {
            if (cc.is_line())
                L = std::max(L, std::abs(cc.line_x()) + 1.0);
            else
                L = std::max(L, std::abs(cc.center()) + cc.radius());
        }
        L *= 4.0;
        box = BBox{-L, L, -L, L};
    }
    return box;
}

bool satisfies_others(const RegionApprox& rg, Complex z, int skip, double tol) {
    for (int k = 0; k < static_cast<int>(rg.constraints.size()); ++k) {
        if (k == skip) continue;
        if (!rg.constraints[k].contains(z, tol)) return false;
    }
    return true;
}

// Pairwise analytic contradictions between disk/exterior constraints.
bool analytic_empty(const RegionApprox& rg) {
    const auto& cs = rg.constraints;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (cs[i].is_line()) continue;
        for (std::size_t j = 0; j < cs.size(); ++j) {
            if (i == j || cs[j].is_line()) continue;
            double d = std::abs(cs[i].center() - cs[j].center());
            if (cs[i].a < 0.0 && cs[j].a < 0.0 && d > cs[i].radius() + cs[j].radius())
                return true;  // disjoint disks
            if (cs[i].a < 0.0 && cs[j].a > 0.0 && d + cs[i].radius() < cs[j].radius())
                return true;  // disk swallowed by an exclusion
        }
    }
    return false;
}

bool grid_probe_nonempty(const RegionApprox& rg, Complex* witness = nullptr) {
    BBox box = region_bbox(rg);
    if (!box.valid()) return false;
    const int N = 128;
    for (int i = 0; i <= N; ++i)
        for (int j = 0; j <= N; ++j) {
            Complex z(box.x0 + (box.x1 - box.x0) * i / N, box.y0 + (box.y1 - box.y0) * j / N);
            if (membership(rg, z, kTolMember)) {
                if (witness) *witness = z;
                return true;
            }
        }
    return false;
}

}  // namespace

BoundarySamples boundary_samples(const RegionApprox& rg, int per_constraint) {
    BoundarySamples out;
    if (rg.constraints.empty()) {
        out.empty_region = false;  // whole plane; no boundary to sample
        return out;
    }
    BBox box = region_bbox(rg);
    double diag = std::hypot(box.x1 - box.x0, box.y1 - box.y0);

    int n_per = std::max(per_constraint, 8);
    for (int pass = 0; pass < 3; ++pass) {
        out.points.clear();
        out.constraint_index.clear();
        out.max_pitch = 0.0;
        for (int k = 0; k < static_cast<int>(rg.constraints.size()); ++k) {
            const auto& cc = rg.constraints[k];
            if (cc.is_line()) {
                double x = cc.line_x();
                if (x < box.x0 - diag || x > box.x1 + diag) continue;
                double lo = box.y0 - 0.5 * diag, hi = box.y1 + 0.5 * diag;
                double pitch = (hi - lo) / n_per;
                for (int i = 0; i <= n_per; ++i) {
                    Complex z(x, lo + (hi - lo) * i / n_per);
                    if (satisfies_others(rg, z, k, kTolMember)) {
                        out.points.push_back(z);
                        out.constraint_index.push_back(k);
                    }
                }
                out.max_pitch = std::max(out.max_pitch, pitch);
            } else {
                double cx = cc.center(), r = cc.radius();
                // Skip circles that cannot touch the region's bounding box.
                double dx = std::max({box.x0 - cx, cx - box.x1, 0.0});
                double dy = std::max({box.y0 - 0.0, 0.0 - box.y1, 0.0});
                if (std::hypot(dx, dy) > r + diag) continue;
                double pitch = 2.0 * M_PI * r / n_per;
                bool contributed = false;
                for (int i = 0; i < n_per; ++i) {
                    double th = 2.0 * M_PI * i / n_per;
                    Complex z(cx + r * std::cos(th), r * std::sin(th));
                    if (satisfies_others(rg, z, k, kTolMember)) {
                        out.points.push_back(z);
                        out.constraint_index.push_back(k);
                        contributed = true;
                    }
                }
                if (contributed) out.max_pitch = std::max(out.max_pitch, pitch);
            }
        }
        if (static_cast<int>(out.points.size()) >= per_constraint || pass == 2) break;
        n_per *= 4;  // thin active boundary; refine
    }

    if (out.points.empty()) out.empty_region = !grid_probe_nonempty(rg);
    return out;
}

bool region_empty(const RegionApprox& rg) {
    if (rg.constraints.empty()) return false;
    if (analytic_empty(rg)) return true;
    BoundarySamples bs = boundary_samples(rg, 64);
    if (!bs.points.empty()) return false;
    return !grid_probe_nonempty(rg);
}

namespace {

// Minimum pairwise distance via a sweep over points sorted by real part.
double min_pairwise_distance(std::vector<Complex> a, std::vector<Complex> b) {
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    auto by_re = [](Complex u, Complex v) { return u.real() < v.real(); };
    std::sort(a.begin(), a.end(), by_re);
    std::sort(b.begin(), b.end(), by_re);

    double best = std::numeric_limits<double>::infinity();
    // Coarse pass to shrink the sweep window.
    std::size_t sa = std::max<std::size_t>(1, a.size() / 512);
    std::size_t sb = std::max<std::size_t>(1, b.size() / 512);
    for (std::size_t i = 0; i < a.size(); i += sa)
        for (std::size_t j = 0; j < b.size(); j += sb)
            best = std::min(best, std::abs(a[i] - b[j]));

    std::size_t lo = 0;
    for (const Complex& p : a) {
        while (lo < b.size() && b[lo].real() < p.real() - best) ++lo;
        for (std::size_t j = lo; j < b.size() && b[j].real() <= p.real() + best; ++j)
            best = std::min(best, std::abs(p - b[j]));
    }
    return best;
}

bool cross_overlap(const RegionApprox& ra, const RegionApprox& rb, const BoundarySamples& ba,
                   const BoundarySamples& bb) {
    for (const Complex& z : ba.points)
        if (membership(rb, z, kTolMember)) return true;
    for (const Complex& z : bb.points)
        if (membership(ra, z, kTolMember)) return true;
    // Interior grids catch strict containment with no boundary contact.
    BBox box = region_bbox(ra);
    const int N = 128;
    for (int i = 0; i <= N; ++i)
        for (int j = 0; j <= N; ++j) {
            Complex z(box.x0 + (box.x1 - box.x0) * i / N, box.y0 + (box.y1 - box.y0) * j / N);
            if (membership(ra, z, kTolMember) && membership(rb, z, kTolMember)) return true;
        }
    box = region_bbox(rb);
    for (int i = 0; i <= N; ++i)
        for (int j = 0; j <= N; ++j) {
            Complex z(box.x0 + (box.x1 - box.x0) * i / N, box.y0 + (box.y1 - box.y0) * j / N);
            if (membership(ra, z, kTolMember) && membership(rb, z, kTolMember)) return true;
        }
    return false;
}

}  // namespace

DistanceReport region_distance(const RegionApprox& a, const RegionApprox& b,
                               int samples_per_constraint) {
    DistanceReport rep;
    BoundarySamples ba = boundary_samples(a, samples_per_constraint);
    BoundarySamples bb = boundary_samples(b, samples_per_constraint);
    rep.empty_a = ba.points.empty() && region_empty(a);
    rep.empty_b = bb.points.empty() && region_empty(b);
    rep.sample_pitch = std::max(ba.max_pitch, bb.max_pitch);
    if (rep.empty_a || rep.empty_b) {
        rep.distance = std::numeric_limits<double>::infinity();
        return rep;
    }
    if (cross_overlap(a, b, ba, bb)) {
        rep.overlap = true;
        rep.distance = 0.0;
        return rep;
    }
    rep.distance = min_pairwise_distance(ba.points, bb.points);
    return rep;
}

DistanceReport region_distance(const std::vector<Complex>& points, const RegionApprox& b,
                               int samples_per_constraint) {
    DistanceReport rep;
    rep.empty_a = points.empty();
    BoundarySamples bb = boundary_samples(b, samples_per_constraint);
    rep.empty_b = bb.points.empty() && region_empty(b);
    rep.sample_pitch = bb.max_pitch;
    if (rep.empty_a || rep.empty_b) {
        rep.distance = std::numeric_limits<double>::infinity();
        return rep;
    }
    for (const Complex& z : points)
        if (membership(b, z, kTolMember)) {
            rep.overlap = true;
            rep.distance = 0.0;
            return rep;
        }
    rep.distance = min_pairwise_distance(points, bb.points);
    return rep;
}

HchordResult hchord_hull(const std::vector<Complex>& points) {
    if (points.empty()) throw ConfigError("hchord_hull needs a nonempty point set");
    // Verify closure under conjugation.
    for (const Complex& p : points) {
        if (std::abs(p.imag()) <= 1e-12) continue;
        bool found = false;
        for (const Complex& q : points)
            if (std::abs(q - std::conj(p)) <= 1e-9 * std::max(1.0, std::abs(p))) {
                found = true;
                break;
            }
        if (!found) throw ConfigError("hchord_hull input not closed under conjugation");
    }

    HchordResult out;
    out.polyline = points;
    for (const Complex& p : points) {
        if (p.imag() <= 1e-12) continue;
        Complex q = std::conj(p);
        for (int k = 1; k < 64; ++k) {
            double lam = static_cast<double>(k) / 64.0;
            out.polyline.push_back(lam * p + (1.0 - lam) * q);
        }
    }

    // Smallest covering disk centered on the real axis (f convex in the center).
    double lo = points.front().real(), hi = lo;
    for (const Complex& p : points) {
        lo = std::min(lo, p.real());
        hi = std::max(hi, p.real());
    }
    auto radius_at = [&](double x) {
        double r = 0.0;
        for (const Complex& p : points) r = std::max(r, std::abs(p - Complex(x, 0.0)));
        return r;
    };
    for (int it = 0; it < 200; ++it) {
        double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (radius_at(m1) <= radius_at(m2))
            hi = m2;
        else
            lo = m1;
    }
    double cx = 0.5 * (lo + hi);
    double r = radius_at(cx);
    out.cover.constraints.push_back(CircleConstraint::disk(cx, std::max(r, kTolR)));
    out.cover.provenance.nyquist_hull = true;
    out.cover.provenance.all_psd = false;
    return out;
}

bool chord_property_check(const RegionApprox& rg, int n_boundary) {
    int per = std::max(8, n_boundary / std::max<int>(1, static_cast<int>(rg.constraints.size())));
    BoundarySamples bs = boundary_samples(rg, per);
    int step = std::max<int>(1, static_cast<int>(bs.points.size()) / std::max(1, n_boundary));
    for (std::size_t idx = 0; idx < bs.points.size(); idx += step) {
        Complex z = bs.points[idx];
        Complex zb = std::conj(z);
        for (int k = 1; k < 32; ++k) {
            double lam = static_cast<double>(k) / 32.0;
            if (!membership(rg, lam * z + (1.0 - lam) * zb, 1e-7)) return false;
        }
    }
    return true;
}

}  // namespace resetgraph
