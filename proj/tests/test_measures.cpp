#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mahler/function_spec.hpp"
#include "mahler/measures.hpp"
#include "mahler/verify.hpp"
#include "test_util.hpp"

using namespace mahler;
using mahler_test::close;
using mahler_test::close_rel;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;
}  // namespace

TEST_CASE("grid masses of the reference functions") {
    auto pair_l1 = make_transform_pair(FunctionSpec::pnorm(2, 1.0), 513);
    CHECK(close_rel(grid_mass(pair_l1.primal, ConeRegion::whole(2)), 4.0, 2e-4));

    auto pair_g = make_transform_pair(FunctionSpec::gaussian(2, 1.0), 513);
    CHECK(close_rel(grid_mass(pair_g.primal, ConeRegion::whole(2)), kTwoPi, 1e-4));
    CHECK(close_rel(grid_entropy(pair_g.primal, ConeRegion::whole(2)), kTwoPi, 1e-3));

    // orthant masses of an even function agree pairwise and tile the total
    MassBreakdown mb = mass_breakdown_grid(pair_g.primal);
    CHECK(close_rel(mb.orthant_mass[0], mb.orthant_mass[3], 1e-12));
    double sum = 0.0;
    for (double m : mb.orthant_mass) sum += m;
    CHECK(close_rel(sum, mb.total_mass, 1e-12));
}

TEST_CASE("entropy integrand conventions") {
    // indicator: phi e^{-phi} is 0 on {0, +inf}
    auto ind = sample(FunctionSpec::pball_indicator(2, 1.0),
                      {AxisSpec(2.0, 129), AxisSpec(2.0, 129)});
    CHECK(grid_entropy(ind, ConeRegion::whole(2)) == 0.0);

    // 1D |t|: int |t| e^{-|t|} = 2
    auto abs1 = FunctionSpec::pnorm(1, 1.0);
    CHECK(close_rel(spec_entropy(abs1, ConeRegion::whole(1)).value, 2.0, 1e-9));
}

TEST_CASE("undersized boxes are rejected by the tail guard") {
    GridFunction small = sample(FunctionSpec::gaussian(2, 1.0),
                                {AxisSpec(2.0, 65), AxisSpec(2.0, 65)});
    CHECK_THROWS_AS(grid_mass(small, ConeRegion::whole(2)), IntegrabilityError);
}

TEST_CASE("spec-level masses: exact paths and wedges") {
    auto l1 = FunctionSpec::pnorm(2, 1.0);
    CHECK(close(spec_mass(l1, ConeRegion::whole(2)).value, 4.0, 1e-12));
    CHECK(close(spec_mass(l1, ConeRegion::positive_orthant(2)).value, 1.0, 1e-9));

    auto g = FunctionSpec::gaussian(2, 1.0);
    CHECK(close(spec_mass(g, ConeRegion::whole(2)).value, kTwoPi, 1e-11));
    // wedge of angle pi/3 of a radial function carries 1/6 of the mass
    auto wedge = ConeRegion::wedge(unit_at_angle(0.2), unit_at_angle(0.2 + kPi / 3.0));
    CHECK(close_rel(spec_mass(g, wedge).value, kTwoPi / 6.0, 1e-9));

    // skew map: mass scales by 1/|det|
    LinearMap t = LinearMap::mat2(1.2, 0.5, -0.1, 0.8);
    auto gt = g.composed(t);
    CHECK(close_rel(spec_mass(gt, ConeRegion::whole(2)).value, kTwoPi / std::abs(t.det()), 1e-11));

    // grid fallback agrees with the spec path on a generic function
    auto ma = FunctionSpec::max_affine(2, 21, 5, 0.02);
    auto pair = make_transform_pair(ma, 513);
    double grid_val = grid_mass(pair.primal, ConeRegion::whole(2));
    double polar_val = spec_mass(ma, ConeRegion::whole(2)).value;
    CHECK(close_rel(grid_val, polar_val, 5e-4));
}

TEST_CASE("axis half integrals") {
    auto g = FunctionSpec::gaussian(2, 1.0);
    CHECK(close(axis_half_integral(g, vec2(1, 0)).value, std::sqrt(kPi / 2.0), 1e-10));
    auto l1 = FunctionSpec::pnorm(2, 1.0);
    CHECK(close(axis_half_integral(l1, vec2(0, 1)).value, 1.0, 1e-10));
}

TEST_CASE("volume products on the reference functions") {
    CHECK(close(volume_product(FunctionSpec::gaussian(2, 1.0), 0, VpPath::Exact).value,
                kTwoPi * kTwoPi, 1e-10));
    CHECK(close(volume_product(FunctionSpec::pnorm(1, 1.0), 0, VpPath::Exact).value, 4.0, 1e-12));
    CHECK(close(
        volume_product(FunctionSpec::parallelogram_indicator(vec2(1, 0), vec2(0, 1)), 0,
                       VpPath::Exact)
            .value,
        16.0, 1e-12));

    // grid path reproduces the Santalo value within its error estimate
    VolumeProduct vp = volume_product(FunctionSpec::gaussian(2, 1.0), 513, VpPath::Grid);
    CHECK(close_rel(vp.value, kTwoPi * kTwoPi, 2e-3));
    CHECK(std::abs(vp.value - kTwoPi * kTwoPi) <= 20.0 * std::max(vp.abs_error, 1e-6));
}

TEST_CASE("P is invariant under linear maps and constant shifts") {
    Rng rng(19);
    auto g = FunctionSpec::gaussian(2, 1.0);
    for (int k = 0; k < 10; ++k) {
        LinearMap t = LinearMap::mat2(rng.uniform(0.5, 1.5), rng.uniform(-0.5, 0.5),
                                      rng.uniform(-0.5, 0.5), rng.uniform(0.5, 1.5));
        double p0 = volume_product(g, 0, VpPath::Exact).value;
        double p1 = volume_product(g.composed(t), 0, VpPath::Exact).value;
        CHECK(close_rel(p0, p1, 1e-11));
    }
    // P(phi + c) = P(phi) to 1e-12
    auto l1 = FunctionSpec::pnorm(2, 1.0);
    double p = volume_product(l1, 0, VpPath::Exact).value;
    double pshift = volume_product(l1.shifted(0.7), 0, VpPath::Exact).value;
    CHECK(close_rel(p, pshift, 1e-12));
}

TEST_CASE("scaled volume products") {
    // gaussian: P(t phi) = (2pi)^2 for all t
    auto pair = make_transform_pair(FunctionSpec::gaussian(2, 1.0), 513, 1e-10, 0.5);
    for (double t : {0.5, 1.0, 2.0})
        CHECK(close_rel(volume_product_scaled(pair, t), kTwoPi * kTwoPi, 2e-3));
    CHECK(close_rel(volume_product_scaled(pair, 1.0),
                    volume_product(FunctionSpec::gaussian(2, 1.0), 513, VpPath::Grid).value,
                    1e-12));

    // |t| in 1D: P(s phi) = 4 for all s (exact path through profile scaling)
    auto abs1 = FunctionSpec::pnorm(1, 1.0);
    for (double s : {0.25, 1.0, 3.0})
        CHECK(close(volume_product(abs1, 0, VpPath::Exact, s).value, 4.0, 1e-11));
}

TEST_CASE("closed-form derivative against the reference values") {
    CHECK(close(vp_derivative_closed(FunctionSpec::pnorm(2, 1.0), 0, VpPath::Exact), 32.0, 1e-10));
    CHECK(close(vp_derivative_closed(FunctionSpec::gaussian(2, 1.0), 0, VpPath::Exact),
                2.0 * kTwoPi * kTwoPi, 1e-9));
    CHECK(close(vp_derivative_closed(FunctionSpec::pball_indicator(2, kInf), 0, VpPath::Exact),
                32.0, 1e-10));  // I over the sup-norm ball: also a parallelogram
}

TEST_CASE("finite differences agree with the closed form") {
    for (auto spec : {FunctionSpec::gaussian(2, 1.0), FunctionSpec::pnorm(2, 1.5)}) {
        double closed = vp_derivative_closed(spec, 0, VpPath::Exact);
        double fd = vp_derivative_fd(spec, 0, 1e-3, VpPath::Exact);
        CHECK(close_rel(closed, fd, 1e-3));
    }
    // grid path: the closed form is the exact derivative of the discrete
    // masses, so the fd error shrinks quadratically in h
    auto pair = make_transform_pair(FunctionSpec::max_affine(2, 33, 5, 0.01), 257, 1e-10, 0.9);
    double closed = vp_derivative_closed_grid(pair);
    double e1 = std::abs(vp_derivative_fd_grid(pair, 0.04) - closed);
    double e2 = std::abs(vp_derivative_fd_grid(pair, 0.01) - closed);
    CHECK(close_rel(closed, vp_derivative_fd_grid(pair, 1e-3), 1e-6));
    CHECK(e2 < e1 / 6.0);  // ~16x with the half-step evaluation
}

TEST_CASE("bridge identity: P(I_P) = 2 |P| |P*| on random parallelograms") {
    Rng rng(29);
    for (int k = 0; k < 10; ++k) {
        auto ind = random_parallelogram_indicator(rng);
        // the spec text carries u1, u2; re-parse them for the oracle
        FunctionSpec back = FunctionSpec::parse(ind.describe(), 2);
        double p = volume_product(ind, 0, VpPath::Exact).value;
        // |P| = 2 |det[u1 u2]|, |P*| = 4 / |det[u1 u2]| => 2|P||P*| = 16
        CHECK(close_rel(p, 16.0, 1e-11));
        (void)back;
    }
}

TEST_CASE("mass breakdown per orthant sums to the total") {
    auto mb = mass_breakdown(FunctionSpec::max_affine(2, 13, 5, 0.02));
    double sum_m = 0.0, sum_e = 0.0;
    for (std::size_t i = 0; i < mb.orthant_mass.size(); ++i) {
        sum_m += mb.orthant_mass[i];
        sum_e += mb.orthant_entropy[i];
    }
    CHECK(close_rel(sum_m, mb.total_mass, 1e-8));
    CHECK(close_rel(sum_e, mb.total_entropy, 1e-8));
}

TEST_CASE("3D closed forms") {
    CHECK(close(volume_product(FunctionSpec::pnorm(3, 1.0), 0, VpPath::Exact).value, 64.0, 1e-11));
    CHECK(close(volume_product(FunctionSpec::gaussian(3, 1.0), 0, VpPath::Exact).value,
                std::pow(kTwoPi, 3), 1e-9));
    CHECK(close(vp_derivative_closed(FunctionSpec::pnorm(3, 1.0), 0, VpPath::Exact), 192.0,
                1e-9));
    CHECK(close(vp_derivative_closed(FunctionSpec::gaussian(3, 1.0), 0, VpPath::Exact),
                3.0 * std::pow(kTwoPi, 3), 1e-8));

    // unconditional 3D grid path agrees with the exact path for l1
    auto pair = make_transform_pair(FunctionSpec::pnorm(3, 1.0), 65);
    double p_grid = grid_mass(pair.primal, ConeRegion::whole(3)) *
                    grid_mass(pair.dual, ConeRegion::whole(3));
    CHECK(close_rel(p_grid, 64.0, 0.02));
}
