#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mahler/equipartition.hpp"
#include "mahler/function_spec.hpp"
#include "mahler/measures.hpp"
#include "test_util.hpp"

using namespace mahler;
using mahler_test::close;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("v_of_u on symmetric functions") {
    auto g = FunctionSpec::gaussian(2, 1.0);
    Vec v = v_of_u(g, vec2(1, 0));
    CHECK(close(v[0], 0.0, 1e-9));
    CHECK(close(v[1], 1.0, 1e-9));

    auto mixed = FunctionSpec::mixed(1.0, 1.0, LinearMap::identity(2));
    Vec v2 = v_of_u(mixed, vec2(1, 0));
    CHECK(close(v2[0], 0.0, 1e-9));
    CHECK(close(v2[1], 1.0, 1e-9));
}

TEST_CASE("v involution and g antisymmetry on random max_affine specs") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto spec = FunctionSpec::max_affine(2, 1000 + seed, 4 + static_cast<int>(seed % 4), 0.02);
        Rng rng(seed);
        Vec u = unit_at_angle(rng.uniform(0.0, 2.0 * kPi));
        Vec v = v_of_u(spec, u);
        Vec vv = v_of_u(spec, v);
        double angle_err = std::abs(angle_of(vv) - angle_of(negated(u)));
        if (angle_err > kPi) angle_err = 2.0 * kPi - angle_err;
        CHECK(angle_err < 1e-8);
        if (seed % 10 == 0) {  // the g evaluations are the expensive part
            double gu = entropy_gap_g(spec, u);
            double gv = entropy_gap_g(spec, v);
            CHECK(close(gu, -gv, 1e-7 * (1.0 + std::abs(gu))));
            ++checked;
        }
    }
    CHECK(checked == 5);
}

TEST_CASE("direction search: symmetric cases return e1") {
    CHECK(close(find_equipartition_direction(FunctionSpec::gaussian(2, 1.0))[0], 1.0, 1e-12));
    auto uncond = FunctionSpec::mixed(0.7, 1.3, LinearMap::identity(2));
    CHECK(close(find_equipartition_direction(uncond)[0], 1.0, 1e-12));
    // a rotated gaussian is still radial
    auto rot = FunctionSpec::gaussian(2, 1.0).composed(LinearMap::rotation2d(kPi / 6.0));
    Vec u = find_equipartition_direction(rot);
    CHECK(close(u[0], 1.0, 1e-9));
}

TEST_CASE("direction search zeroes g on a skewed quadratic") {
    // phi = <Ax,x>/2 with A = [[2,1],[1,1]]
    double s2 = std::sqrt(2.0);
    LinearMap m = LinearMap::mat2(s2, 1.0 / s2, 0.0, std::sqrt(0.5));
    auto skew = FunctionSpec::gaussian(2, 1.0).composed(m);
    Vec u = find_equipartition_direction(skew);
    double total_entropy = spec_entropy(skew, ConeRegion::whole(2)).value;
    CHECK(std::abs(entropy_gap_g(skew, u)) < 1e-8 * total_entropy);
}

TEST_CASE("strong equipartition maps of the reference functions") {
    // gaussian: T = sqrt(pi/2) I
    auto [tg, rg] = strong_equipartition_map(FunctionSpec::gaussian(2, 1.0));
    double alpha = std::sqrt(kPi / 2.0);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(close(tg.entry(i, j), i == j ? alpha : 0.0, 1e-6));
    CHECK(rg.strong(1e-6));

    // l1 is already strongly equipartitioned: T = identity
    auto [tl, rl] = strong_equipartition_map(FunctionSpec::pnorm(2, 1.0));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(close(tl.entry(i, j), i == j ? 1.0 : 0.0, 1e-8));
    CHECK(rl.strong(1e-8));

    // fixed point: mapping an already-equipartitioned function returns I
    auto fixed = FunctionSpec::gaussian(2, 1.0).composed(tg);
    auto [tf, rf] = strong_equipartition_map(fixed);
    (void)rf;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(close(tf.entry(i, j), i == j ? 1.0 : 0.0, 1e-6));
}

TEST_CASE("phi(0) != 0 inputs are shifted, not rejected") {
    auto shifted = FunctionSpec::gaussian(2, 1.0).shifted(0.37);
    auto [t, rep] = strong_equipartition_map(shifted);
    (void)t;
    CHECK(rep.strong(1e-6));
    CHECK(std::abs(rep.phi_at_zero) < 1e-12);
}

TEST_CASE("verify_equipartition reports and recursion") {
    // unconditional: residuals vanish up to quadrature
    auto rep = verify_equipartition(FunctionSpec::pnorm(2, 1.0));
    CHECK(rep.residual_mass < 1e-10);
    CHECK(rep.residual_entropy < 1e-10);
    CHECK(close(rep.residual_axis, 0.0, 1e-10));  // half-axis integrals are exactly 1

    // 3D unconditional with recursion into the sections
    auto rep3 = verify_equipartition(FunctionSpec::max_affine(3, 77, 4, 0.02, true), true);
    CHECK(rep3.residual_mass < 1e-8);
    REQUIRE(rep3.section_reports.size() == 3);
    for (const auto& s : rep3.section_reports) CHECK(s.residual_mass < 1e-8);

    // report serialization carries the residual fields
    std::string js = rep.to_json();
    CHECK(js.find("residual_mass") != std::string::npos);
    CHECK(js.find("\"T\":[") != std::string::npos);
}

TEST_CASE("strong maps drive residuals down on a skewed indicator") {
    auto ind = FunctionSpec::parallelogram_indicator(vec2(1.4, 0.3), vec2(-0.5, 1.1));
    auto [t, rep] = strong_equipartition_map(ind);
    (void)t;
    CHECK(rep.residual_mass < 1e-6);
    CHECK(rep.residual_entropy < 1e-6);
    CHECK(rep.residual_axis < 1e-6);
}
