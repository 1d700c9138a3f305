#include <doctest.h>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "resetgraph/sgregions.hpp"
#include "resetgraph/util.hpp"

using namespace resetgraph;

namespace {

StateSpace first_order_lag() { return to_state_space(TransferFunction({1.0}, {1.0, 1.0})); }

RegionApprox single(CircleConstraint cc) {
    RegionApprox rg;
    rg.constraints.push_back(cc);
    return rg;
}

Complex random_point(Rng& rng, double span) {
    return Complex(rng.uniform(-span, span), rng.uniform(-span, span));
}

RegionApprox random_region(Rng& rng) {
    RegionApprox rg;
    int n = rng.uniform_int(1, 4);
    for (int i = 0; i < n; ++i) {
        double lam = rng.uniform(-2.0, 2.0);
        double r = rng.uniform(0.2, 3.0);
        rg.constraints.push_back(
            CircleConstraint::from_pi(rng.uniform() < 0.5 ? -1 : +1, lam, r));
    }
    return rg;
}

}  // namespace

TEST_SUITE_BEGIN("sgregions");

TEST_CASE("build_pi substitution and determinant") {
    Eigen::Matrix2d Pi = build_pi(-1, 0.0, 1.0);
    CHECK(Pi(0, 0) == doctest::Approx(-1.0));
    CHECK(Pi(0, 1) == doctest::Approx(0.0));
    CHECK(Pi(1, 1) == doctest::Approx(1.0));

    Eigen::Matrix2d Pi2 = build_pi(+1, 2.0, 1.0);
    CHECK(Pi2(0, 0) == doctest::Approx(1.0));
    CHECK(Pi2(0, 1) == doctest::Approx(-2.0));
    CHECK(Pi2(1, 1) == doctest::Approx(3.0));

    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        double lam = rng.uniform(-5.0, 5.0), r = rng.uniform(0.01, 4.0);
        int sigma = rng.uniform() < 0.5 ? -1 : 1;
        CHECK(build_pi(sigma, lam, r).determinant() == doctest::Approx(-r * r).epsilon(1e-12));
    }
    CHECK_THROWS_AS(build_pi(-1, 0.0, 0.0), ConfigError);
}

TEST_CASE("build_theta hand cases") {
    // C = 1, D = 0, n = 1: the multiplier passes through unchanged.
    StateSpace lag = first_order_lag();
    Eigen::Matrix2d Pi;
    Pi << -1.0, 0.5, 0.5, 0.0;
    Eigen::MatrixXd Theta = build_theta(lag, Pi);
    CHECK((Theta - Pi).norm() < 1e-14);

    // Linearity in Pi.
    Eigen::MatrixXd Theta2 = build_theta(lag, (3.0 * Pi).eval());
    CHECK((Theta2 - 3.0 * Theta).norm() < 1e-14);

    // C = 0, D = I (n = 1): the multiplier collapses onto the u-block,
    // Theta = diag(0, Pi11 + 2 Pi12 + Pi22) by direct substitution.
    StateSpace feedthrough(Eigen::MatrixXd::Constant(1, 1, -1.0),
                           Eigen::MatrixXd::Constant(1, 1, 1.0),
                           Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Identity(1, 1));
    Eigen::MatrixXd Tf = build_theta(feedthrough, Pi);
    CHECK(Tf(0, 0) == doctest::Approx(0.0));
    CHECK(Tf(0, 1) == doctest::Approx(0.0));
    CHECK(Tf(1, 1) == doctest::Approx(Pi(0, 0) + 2.0 * Pi(0, 1) + Pi(1, 1)));
}

TEST_CASE("constraint triple from the disk parametrization") {
    CircleConstraint disk = CircleConstraint::disk(3.0, 1.0);
    CHECK(disk.a == doctest::Approx(-1.0));
    CHECK(disk.b == doctest::Approx(3.0));
    CHECK(disk.c == doctest::Approx(-8.0));
    CHECK(disk.contains(Complex(3.0, 0.9)));
    CHECK_FALSE(disk.contains(Complex(3.0, 1.1)));
}

TEST_CASE("membership basics") {
    RegionApprox disk = single(CircleConstraint::disk(0.0, 1.0));
    CHECK(membership(disk, Complex(0.5, 0.0)));
    CHECK_FALSE(membership(disk, Complex(2.0, 0.0)));
    RegionApprox ext = single(CircleConstraint::exterior(2.0, 1.0));
    CHECK_FALSE(membership(ext, Complex(2.0, 0.0)));
}

TEST_CASE("sg_overapprox on the first-order lag") {
    StateSpace H = first_order_lag();
    RegionApprox rg0 = sg_overapprox(H, {0.0}, false);
    REQUIRE(rg0.constraints.size() == 1);  // no exclusion: 0 lies in [p0, p1]
    CHECK(rg0.constraints[0].a < 0.0);
    CHECK(rg0.constraints[0].center() == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(rg0.constraints[0].radius() == doctest::Approx(1.0).epsilon(1e-3));

    RegionApprox rg = sg_overapprox(H, {0.5}, false);
    bool found_disk = false;
    for (std::size_t i = 0; i < rg.constraints.size(); ++i) {
        const auto& cc = rg.constraints[i];
        if (cc.a < 0.0) {
            found_disk = true;
            CHECK(cc.center() == doctest::Approx(0.5).epsilon(1e-6));
            CHECK(cc.radius() == doctest::Approx(0.5).epsilon(1e-3));
        }
    }
    CHECK(found_disk);

    // Static gain: the covering disk collapses to a point.
    StateSpace gain = StateSpace::static_gain(Eigen::MatrixXd::Constant(1, 1, 2.0));
    RegionApprox rgp = sg_overapprox(gain, {2.0}, false);
    bool tiny = false;
    for (const auto& cc : rgp.constraints)
        if (cc.a < 0.0 && cc.radius() < 1e-6) tiny = true;
    CHECK(tiny);
}

TEST_CASE("patch equals the filled disk for a simply connected SG") {
    StateSpace H = first_order_lag();
    RegionApprox patch = patch_overapprox(H, linspace(-2.0, 3.0, 101));
    CHECK(patch.provenance.all_psd);
    // Interior points of |z - 0.5| <= 0.5 are kept (no inner exclusions).
    CHECK(membership(patch, Complex(0.5, 0.0), 1e-6));
    CHECK(membership(patch, Complex(0.9, 0.28), 1e-6));
    CHECK(membership(patch, Complex(0.05, 0.0), 1e-6));
    CHECK_FALSE(membership(patch, Complex(0.5, 0.52), 1e-6));
    CHECK_FALSE(membership(patch, Complex(1.1, 0.0), 1e-6));
    // Exclusion centers never fall inside the spectrum interval (0, 1).
    for (const auto& cert : patch.provenance.certificates)
        if (cert.sigma > 0) CHECK((cert.lambda <= 0.0 || cert.lambda >= 1.0));
}

TEST_CASE("patch contains the real spectrum segment of the worked-example controller") {
    StateSpace bls = to_state_space(TransferFunction({0.1, 0.1, 0.155}, {1.0, 1.0, 1.0}));
    RegionApprox patch = patch_overapprox(bls, linspace(-1.0, 1.0, 81));
    for (double x : {0.1, 0.12, 0.135, 0.155})
        CHECK(membership(patch, Complex(x, 0.0), 1e-6));
    CHECK(region_empty(patch) == false);
}

TEST_CASE("soft region is contained in the patch (property)") {
    StateSpace H = first_order_lag();
    auto lambdas = linspace(-1.5, 1.5, 31);
    RegionApprox soft = sg_overapprox(H, lambdas, false);
    RegionApprox patch = sg_overapprox(H, lambdas, true);
    Rng rng(41);
    for (int i = 0; i < 500; ++i) {
        Complex z = random_point(rng, 2.0);
        if (membership(soft, z)) CHECK(membership(patch, z, 1e-9));
    }
}

TEST_CASE("Nyquist samples stay inside the soft over-approximation") {
    StateSpace H = first_order_lag();
    RegionApprox rg = sg_overapprox(H, linspace(-1.5, 1.5, 41), false);
    for (const Complex& z : nyquist_curve(H, logspace(1e-3, 1e3, 200))) {
        bool ok = membership(rg, z, 1e-6);
        CHECK(ok);
        if (!ok) break;
    }
}

TEST_CASE("inversion maps the example disk exactly") {
    RegionApprox rg = single(CircleConstraint::disk(3.0, 1.0));  // (-1, 3, -8)
    RegionApprox inv = invert_region(rg);
    CHECK(inv.constraints[0].a == doctest::Approx(-8.0));
    CHECK(inv.constraints[0].b == doctest::Approx(3.0));
    CHECK(inv.constraints[0].c == doctest::Approx(-1.0));
    CHECK(inv.constraints[0].center() == doctest::Approx(3.0 / 8.0));
    CHECK(inv.constraints[0].radius() == doctest::Approx(1.0 / 8.0));

    // Pointwise 1/z sampling oracle.
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        double th = rng.uniform(0.0, 2.0 * M_PI), rr = rng.uniform(0.0, 0.999);
        Complex z = Complex(3.0, 0.0) + rr * std::polar(1.0, th);
        CHECK(membership(inv, 1.0 / z, 1e-9));
    }

    RegionApprox unit = single(CircleConstraint::disk(0.0, 1.0));
    RegionApprox unit_inv = invert_region(unit);
    CHECK(unit_inv.constraints[0].a == doctest::Approx(1.0));
    CHECK(unit_inv.constraints[0].c == doctest::Approx(-1.0));  // |z| >= 1
}

TEST_CASE("scale maps the half-gain disk exactly") {
    RegionApprox rg = single(CircleConstraint::disk(0.5, 0.5));
    RegionApprox scaled = scale_region(rg, 0.5);
    CHECK(scaled.constraints[0].center() == doctest::Approx(0.25));
    CHECK(scaled.constraints[0].radius() == doctest::Approx(0.25));
    CHECK(scaled.mu == doctest::Approx(0.5));
    CHECK_THROWS_AS(scale_region(rg, 0.0), ConfigError);
}

TEST_CASE("transform membership equivalences (property)") {
    Rng rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        RegionApprox rg = random_region(rng);
        RegionApprox inv = invert_region(rg);
        RegionApprox neg = negate_region(rg);
        double mu = rng.uniform(0.1, 4.0);
        RegionApprox sc = scale_region(rg, mu);
        for (int i = 0; i < 20; ++i) {
            Complex z = random_point(rng, 3.0);
            if (std::abs(z) < 1e-3) continue;
            CHECK(membership(inv, 1.0 / z, 1e-9) == membership(rg, z, 1e-9 * std::norm(1.0 / z)));
            CHECK(membership(neg, -z) == membership(rg, z));
            CHECK(membership(sc, mu * z, 1e-9 * mu * mu) == membership(rg, z, 1e-9));
        }
        // Double inversion restores the triple up to sign conventions.
        RegionApprox twice = invert_region(inv);
        for (std::size_t k = 0; k < rg.constraints.size(); ++k) {
            CHECK(twice.constraints[k].a == doctest::Approx(rg.constraints[k].a));
            CHECK(twice.constraints[k].b == doctest::Approx(rg.constraints[k].b));
            CHECK(twice.constraints[k].c == doctest::Approx(rg.constraints[k].c));
        }
    }
}

TEST_CASE("boundary_samples") {
    RegionApprox disk = single(CircleConstraint::disk(0.0, 1.0));
    BoundarySamples bs = boundary_samples(disk, 4);
    CHECK(bs.points.size() >= 4);
    for (const auto& z : bs.points) CHECK(std::abs(std::abs(z) - 1.0) < 1e-12);

    RegionApprox empty;
    empty.constraints.push_back(CircleConstraint::disk(0.0, 1.0));
    empty.constraints.push_back(CircleConstraint::disk(5.0, 1.0));
    BoundarySamples bse = boundary_samples(empty, 64);
    CHECK(bse.points.empty());
    CHECK(bse.empty_region);
    CHECK(region_empty(empty));

    RegionApprox half = single(CircleConstraint{0.0, 1.0, 0.0});  // Re z >= 0
    BoundarySamples bsh = boundary_samples(half, 32);
    CHECK(bsh.points.size() >= 16);
    for (const auto& z : bsh.points) CHECK(std::abs(z.real()) < 1e-12);
}

TEST_CASE("region_distance") {
    RegionApprox a = single(CircleConstraint::disk(0.0, 1.0));
    RegionApprox b = single(CircleConstraint::disk(3.0, 1.0));
    DistanceReport rep = region_distance(a, b, 4096);
    CHECK(rep.distance == doctest::Approx(1.0).epsilon(1e-4));
    CHECK_FALSE(rep.overlap);

    RegionApprox c = single(CircleConstraint::disk(1.0, 1.0));
    DistanceReport rep2 = region_distance(a, c, 512);
    CHECK(rep2.overlap);
    CHECK(rep2.distance == 0.0);

    std::vector<Complex> cloud{Complex(-5.0, 0.0), Complex(4.5, 0.0)};
    DistanceReport rep3 = region_distance(cloud, b, 4096);
    CHECK(rep3.distance == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("distance to a strictly contained region is zero") {
    RegionApprox outer = single(CircleConstraint::disk(0.0, 2.0));
    RegionApprox inner = single(CircleConstraint::disk(0.0, 0.5));
    DistanceReport rep = region_distance(inner, outer, 256);
    CHECK(rep.overlap);
    CHECK(rep.distance == 0.0);
}

TEST_CASE("hchord_hull") {
    std::vector<Complex> pair{Complex(1.0, 1.0), Complex(1.0, -1.0)};
    HchordResult hc = hchord_hull(pair);
    CHECK(hc.cover.constraints[0].center() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(hc.cover.constraints[0].radius() == doctest::Approx(1.0).epsilon(1e-6));
    bool has_mid = false;
    for (const auto& z : hc.polyline)
        if (std::abs(z - Complex(1.0, 0.0)) < 0.05) has_mid = true;
    CHECK(has_mid);  // chord fill reaches the real axis

    std::vector<Complex> reals{Complex(0.1, 0.0), Complex(0.155, 0.0)};
    HchordResult hr = hchord_hull(reals);
    CHECK(hr.cover.constraints[0].center() == doctest::Approx(0.1275).epsilon(1e-4));

    std::vector<Complex> circle;
    for (int i = 0; i < 64; ++i)
        circle.push_back(Complex(0.5, 0.0) + 0.5 * std::polar(1.0, 2.0 * M_PI * i / 64));
    HchordResult hcirc = hchord_hull(circle);
    CHECK(hcirc.cover.constraints[0].center() == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(hcirc.cover.constraints[0].radius() == doctest::Approx(0.5).epsilon(1e-3));

    CHECK_THROWS_AS(hchord_hull({Complex(1.0, 1.0)}), ConfigError);  // not conjugate-closed
}

TEST_CASE("chord_property_check") {
    CHECK(chord_property_check(single(CircleConstraint::disk(0.5, 0.5)), 64));
    RegionApprox annulus;
    annulus.constraints.push_back(CircleConstraint::exterior(0.0, 1.0));
    annulus.constraints.push_back(CircleConstraint::disk(0.0, 3.0));
    CHECK_FALSE(chord_property_check(annulus, 64));
    CHECK(chord_property_check(single(CircleConstraint{0.0, 1.0, 0.0}), 64));  // half-plane
}

TEST_CASE("inflate_region grows disks and shrinks exclusions") {
    RegionApprox rg;
    rg.constraints.push_back(CircleConstraint::disk(0.0, 1.0));
    rg.constraints.push_back(CircleConstraint::exterior(5.0, 0.5));
    RegionApprox big = inflate_region(rg, 0.1);
    CHECK(big.constraints[0].radius() == doctest::Approx(1.1));
    CHECK(big.constraints[1].radius() == doctest::Approx(0.4));
    // Inflating past an exclusion's radius removes it.
    RegionApprox gone = inflate_region(rg, 0.6);
    CHECK(gone.constraints.size() == 1);
    CHECK(membership(big, Complex(0.0, 1.05)));
    CHECK_FALSE(membership(rg, Complex(0.0, 1.05)));
}

TEST_SUITE_END();
