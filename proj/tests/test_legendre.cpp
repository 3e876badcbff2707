#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mahler/function_spec.hpp"
#include "mahler/legendre.hpp"
#include "mahler/measures.hpp"
#include "mahler/verify.hpp"
#include "test_util.hpp"

using namespace mahler;
using mahler_test::close;

namespace {

GridFunction sample_1d(const FunctionSpec& spec, double box, int nodes) {
    return sample(spec, {AxisSpec(box, nodes)});
}

// random convex 1D data with a random finite window (shared with the
// acceptance oracle but regenerated independently here)
GridFunction random_convex_1d(Rng& rng) {
    int count = 33 + 2 * rng.uniform_int(0, 120);
    AxisSpec ax(rng.uniform(1.0, 6.0), count);
    std::vector<double> vals(static_cast<std::size_t>(count), kInf);
    int lo = rng.uniform_int(0, count / 3);
    int hi = count - 1 - rng.uniform_int(0, count / 3);
    double slope = rng.uniform(-3.0, -1.0);
    double v = rng.uniform(0.0, 1.0);
    for (int i = lo; i <= hi; ++i) {
        vals[static_cast<std::size_t>(i)] = v;
        slope += rng.uniform(0.0, 0.5);
        v += slope * ax.step();
    }
    return GridFunction({ax}, vals);
}

}  // namespace

TEST_CASE("conjugate_1d on the reference examples") {
    // |x| on [-4,4]: 0 for |y|<=1, then 4(|y|-1) from the box
    GridFunction f = sample_1d(FunctionSpec::pnorm(1, 1.0), 4.0, 257);
    AxisSpec dual(2.0, 129);
    GridFunction lf = conjugate_1d(f, dual);
    for (int j = 0; j < dual.count; ++j) {
        double y = dual.coord(j);
        double expect = std::abs(y) <= 1.0 ? 0.0 : 4.0 * (std::abs(y) - 1.0);
        CHECK(close(lf.values()[static_cast<std::size_t>(j)], expect, 1e-13));
    }

    // x^2/2 maps to y^2/2 within O(step^2) inside the covered slope range
    GridFunction q = sample_1d(FunctionSpec::gaussian(1, 1.0), 6.0, 513);
    AxisSpec dq(4.0, 257);
    GridFunction lq = conjugate_1d(q, dq);
    double h = q.axis(0).step();
    for (int j = 0; j < dq.count; ++j) {
        double y = dq.coord(j);
        CHECK(close(lq.values()[static_cast<std::size_t>(j)], 0.5 * y * y, h * h));
    }

    // I_{[-1,1]} maps to |y| (1 is a node of the 257-point grid on [-4,4])
    GridFunction ind = sample_1d(FunctionSpec::pball_indicator(1, 1.0), 4.0, 257);
    GridFunction li = conjugate_1d(ind, dq);
    for (int j = 0; j < dq.count; ++j)
        CHECK(li.values()[static_cast<std::size_t>(j)] ==
              doctest::Approx(std::abs(dq.coord(j))).epsilon(1e-14));

    std::vector<double> allinf(33, kInf);
    GridFunction empty({AxisSpec(1.0, 33)}, allinf);
    CHECK_THROWS_AS(conjugate_1d(empty, dual), GridError);
}

TEST_CASE("fast 1D transform equals the brute-force double loop") {
    Rng rng(71);
    double worst = 0.0;
    for (int trial = 0; trial < 60; ++trial) {
        GridFunction f = random_convex_1d(rng);
        AxisSpec dual(rng.uniform(0.5, 6.0), 33 + 2 * rng.uniform_int(0, 120));
        GridFunction fast = conjugate_1d(f, dual);
        GridFunction slow = brute_force_conjugate(f, {dual});
        for (std::size_t i = 0; i < fast.size(); ++i)
            worst = std::max(worst, std::abs(fast.values()[i] - slow.values()[i]));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("factorized nD transform equals the full-lattice supremum") {
    Rng rng(73);
    for (int trial = 0; trial < 6; ++trial) {
        auto spec = trial % 2 ? FunctionSpec::max_affine(2, 100 + static_cast<std::uint64_t>(trial), 5, 0.05)
                              : FunctionSpec::gaussian(2, rng.uniform(0.6, 1.4));
        GridFunction f = sample(spec, {AxisSpec(3.0, 33), AxisSpec(2.5, 33)});
        auto [dual, fast] = auto_conjugate(f, 33);
        GridFunction slow = brute_force_conjugate(f, dual);
        for (std::size_t i = 0; i < fast.size(); ++i)
            CHECK(close(fast.values()[i], slow.values()[i], 1e-12));
    }
    // one 3D case
    GridFunction f3 = sample(FunctionSpec::max_affine(3, 200, 4, 0.05),
                             {AxisSpec(2.0, 9), AxisSpec(2.0, 9), AxisSpec(2.0, 9)});
    auto [dual3, fast3] = auto_conjugate(f3, 9);
    GridFunction slow3 = brute_force_conjugate(f3, dual3);
    for (std::size_t i = 0; i < fast3.size(); ++i)
        CHECK(close(fast3.values()[i], slow3.values()[i], 1e-12));
}

TEST_CASE("mixed spec conjugate matches the lattice oracle and the closed form") {
    auto mixed = FunctionSpec::mixed(1.0, 1.0, LinearMap::identity(2));
    GridFunction f = sample(mixed, {AxisSpec(6.0, 49), AxisSpec(6.0, 49)});
    auto [dual, fast] = auto_conjugate(f, 49);
    GridFunction slow = brute_force_conjugate(f, dual);
    for (std::size_t i = 0; i < fast.size(); ++i)
        CHECK(close(fast.values()[i], slow.values()[i], 1e-12));
    // closed form: I_{[-1,1]}(y1) + |y2| inside the covered region
    auto conj = *mixed.conjugate();
    for (std::size_t i = 0; i < fast.size(); ++i) {
        Vec y = fast.coords(fast.multi_index(i));
        if (std::abs(y[0]) > 0.95 || std::abs(y[1]) > 4.0) continue;
        CHECK(close(fast.values()[i], conj(y), 0.2));  // box effects near the wall
    }
}

TEST_CASE("dual range clipping is an error with the required range attached") {
    GridFunction f = sample(FunctionSpec::gaussian(2, 1.0), {AxisSpec(6.0, 65), AxisSpec(6.0, 65)});
    DualGridSpec small{AxisSpec(2.0, 65), AxisSpec(2.0, 65)};
    CHECK_THROWS_AS(conjugate_nd(f, small), DualRangeError);
    try {
        conjugate_nd(f, small);
    } catch (const DualRangeError& e) {
        CHECK(e.required_range > 5.0);
    }
    CHECK_NOTHROW(conjugate_nd(f, small, /*allow_clipping=*/true));
}

TEST_CASE("convexify: identity on convex data, hull on kinks, idempotent") {
    GridFunction g = sample(FunctionSpec::gaussian(1, 1.0), {AxisSpec(4.0, 129)});
    GridFunction cg = convexify(g);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g.values()[i] == cg.values()[i]);

    // min(|x-1|, |x+1|) has hull max(|x|-1, 0)
    AxisSpec ax(4.0, 129);
    std::vector<double> w(static_cast<std::size_t>(ax.count));
    for (int i = 0; i < ax.count; ++i) {
        double x = ax.coord(i);
        w[static_cast<std::size_t>(i)] = std::min(std::abs(x - 1.0), std::abs(x + 1.0));
    }
    GridFunction kinky({ax}, w);
    GridFunction hull = convexify(kinky);
    for (int i = 0; i < ax.count; ++i) {
        double x = ax.coord(i);
        CHECK(close(hull.values()[static_cast<std::size_t>(i)], std::max(std::abs(x) - 1.0, 0.0),
                    1e-12));
    }
    GridFunction again = convexify(hull);
    for (std::size_t i = 0; i < hull.size(); ++i) CHECK(hull.values()[i] == again.values()[i]);

    Rng rng(83);
    AxisSpec ar(3.0, 65);
    std::vector<double> rv(65);
    for (auto& v : rv) v = rng.uniform(0.0, 3.0);
    GridFunction rnd({ar}, rv);
    GridFunction c1 = convexify(rnd);
    GridFunction c2 = convexify(c1);
    for (std::size_t i = 0; i < c1.size(); ++i) CHECK(c1.values()[i] == c2.values()[i]);
}

TEST_CASE("biconjugation recovers the convex hull") {
    // error bound: 2 * (grid step) * (slope range), taken across both grids
    // (the dual data's slopes reach the primal extent)
    auto bi_tol = [](const GridFunction& f, const DualGridSpec& dual) {
        auto ranges = slope_ranges(f);
        double tol = 1e-9;
        for (int a = 0; a < f.dim(); ++a) {
            tol = std::max(tol, 2.0 * f.axis(a).step() * ranges[static_cast<std::size_t>(a)]);
            tol = std::max(tol, 2.0 * dual[static_cast<std::size_t>(a)].step() * f.axis(a).max_abs);
        }
        return tol;
    };

    GridFunction f = sample(FunctionSpec::pnorm(1, 1.0), {AxisSpec(4.0, 257)});
    auto [dual, lf] = auto_conjugate(f, 257);
    GridFunction bi = conjugate_nd(lf, f.axes(), true);
    double tol = bi_tol(f, dual);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(close(bi.values()[i], f.values()[i], tol));
        CHECK(bi.values()[i] <= f.values()[i] + 1e-12);  // biconjugate is a minorant
    }

    GridFunction ind = sample(FunctionSpec::pball_indicator(1, 1.0), {AxisSpec(4.0, 257)});
    GridFunction bi2 = biconjugate(ind);
    for (std::size_t i = 0; i < ind.size(); ++i) {
        if (ind.values()[i] == kInf) continue;  // boxed biconjugate is finite outside
        CHECK(close(bi2.values()[i], 0.0, 1e-11));
    }

    // smooth data: the recovery is second order, far below the linear bound
    GridFunction q = sample(FunctionSpec::gaussian(1, 1.0), {AxisSpec(6.0, 513)});
    GridFunction biq = biconjugate(q);
    for (std::size_t i = 80; i < 433; ++i)
        CHECK(close(biq.values()[i], q.values()[i], 5e-4));

    AxisSpec ax(4.0, 257);
    std::vector<double> w(static_cast<std::size_t>(ax.count));
    for (int i = 0; i < ax.count; ++i) {
        double x = ax.coord(i);
        w[static_cast<std::size_t>(i)] = std::min(std::abs(x - 1.0), std::abs(x + 1.0));
    }
    GridFunction kinky({ax}, w);
    auto [dual3, lk] = auto_conjugate(kinky, 257);
    GridFunction bi3 = conjugate_nd(lk, kinky.axes(), true);
    GridFunction hull = convexify(kinky);
    double tol3 = bi_tol(kinky, dual3);
    for (std::size_t i = 0; i < hull.size(); ++i)
        CHECK(close(bi3.values()[i], hull.values()[i], tol3));
}

TEST_CASE("inf-convolution identities") {
    // I_{[-1,1]} [] I_{[-1,1]} = I_{[-2,2]}
    GridFunction ind = sample(FunctionSpec::pball_indicator(1, 1.0), {AxisSpec(6.0, 385)});
    GridFunction conv = inf_convolution(ind, ind);
    for (int i = 0; i < 385; ++i) {
        double x = conv.axis(0).coord(i);
        double v = conv.values()[static_cast<std::size_t>(i)];
        if (std::abs(x) <= 1.99) CHECK(close(v, 0.0, 1e-10));
        if (std::abs(x) >= 2.01) CHECK(v > 0.05);
    }

    // (x^2/2) [] (x^2/2) = x^2/4
    GridFunction q = sample(FunctionSpec::gaussian(1, 1.0), {AxisSpec(6.0, 513)});
    GridFunction qq = inf_convolution(q, q);
    for (int i = 128; i < 385; ++i) {
        double x = qq.axis(0).coord(i);
        CHECK(close(qq.values()[static_cast<std::size_t>(i)], 0.25 * x * x, 2e-4));
    }

    // f [] I_{0} = f
    AxisSpec ax(6.0, 513);
    std::vector<double> zero(static_cast<std::size_t>(ax.count), kInf);
    zero[static_cast<std::size_t>(ax.mid())] = 0.0;
    GridFunction point({ax}, zero);
    GridFunction back = inf_convolution(q, point);
    for (std::size_t i = 0; i < q.size(); ++i)
        CHECK(close(back.values()[i], q.values()[i], 1e-9));

    // small-grid cross-check against direct pairwise minimization; the
    // transform route loses O(dual step * |x|) where the summed conjugate
    // kinks (the huber elbow), so the band follows the dual resolution
    GridFunction a = sample(FunctionSpec::pnorm(1, 1.0), {AxisSpec(4.0, 257)});
    GridFunction b = sample(FunctionSpec::gaussian(1, 1.0), {AxisSpec(4.0, 257)});
    auto [da, la] = auto_conjugate(a, 257);
    (void)la;
    double dual_step = da[0].step();
    GridFunction ic = inf_convolution(a, b);
    for (int i = 32; i < 225; ++i) {
        double x = ic.axis(0).coord(i);
        double direct = kInf;
        for (int j = 0; j < 257; ++j) {
            double z = b.axis(0).coord(j);
            double az = std::abs(x - z);
            if (az <= 4.0) direct = std::min(direct, az + b.values()[static_cast<std::size_t>(j)]);
        }
        double tol = 1e-3 + dual_step * (std::abs(x) + 1.0);
        CHECK(close(ic.values()[static_cast<std::size_t>(i)], direct, tol));
        // huber closed form in the smooth region
        if (std::abs(x) < 0.9)
            CHECK(close(ic.values()[static_cast<std::size_t>(i)], 0.5 * x * x, 2e-3));
    }
}

TEST_CASE("sections and projections of grids") {
    GridFunction f = sample(FunctionSpec::pnorm(2, 1.0), {AxisSpec(4.0, 65), AxisSpec(4.0, 65)});
    GridFunction sec = section_grid(f, 0);
    GridFunction proj = project_grid(f, 0);
    for (int i = 0; i < 65; ++i) {
        double x = sec.axis(0).coord(i);
        CHECK(close(sec.values()[static_cast<std::size_t>(i)], std::abs(x), 1e-14));
        CHECK(close(proj.values()[static_cast<std::size_t>(i)], std::abs(x), 1e-14));
        CHECK(proj.values()[static_cast<std::size_t>(i)] <=
              sec.values()[static_cast<std::size_t>(i)] + 1e-14);
    }

    // shadow of a skew parallelogram indicator is a segment indicator
    Vec u1 = vec2(1.5, 0.4), u2 = vec2(-0.2, 1.1);
    auto ind = FunctionSpec::parallelogram_indicator(u1, u2);
    GridFunction fi = sample(ind, {AxisSpec(2.5, 129), AxisSpec(2.5, 129)});
    GridFunction shadow = project_grid(fi, 0);  // remaining axis: x2
    double w = std::max(std::abs(u1[1]), std::abs(u2[1]));  // vertex reach
    for (int i = 0; i < 129; ++i) {
        double x = shadow.axis(0).coord(i);
        double v = shadow.values()[static_cast<std::size_t>(i)];
        if (std::abs(x) <= w - 0.05) CHECK(v == 0.0);
        if (std::abs(x) >= w + 0.05) CHECK(v == kInf);
    }
}

TEST_CASE("gradient by central differences") {
    GridFunction q = sample(FunctionSpec::gaussian(2, 1.0), {AxisSpec(6.0, 513), AxisSpec(6.0, 513)});
    Vec g = gradient(q, vec2(1.0, 2.0));
    CHECK(close(g[0], 1.0, 1e-9));
    CHECK(close(g[1], 2.0, 1e-9));

    GridFunction l1 = sample(FunctionSpec::pnorm(2, 1.0), {AxisSpec(6.0, 513), AxisSpec(6.0, 513)});
    Vec gl = gradient(l1, vec2(2.0, 3.0));
    CHECK(close(gl[0], 1.0, 1e-12));
    CHECK(close(gl[1], 1.0, 1e-12));

    CHECK_THROWS_AS(gradient(q, vec2(5.999, 0.0)), GridError);

    // grad(L phi)(grad phi(x)) = x for smooth strictly convex samples
    auto pair = make_transform_pair(FunctionSpec::gaussian(2, 0.8), 513);
    for (double x1 : {-1.5, 0.3, 2.0}) {
        Vec x = vec2(x1, 0.7);
        Vec gp = gradient(pair.primal, x);
        Vec back = gradient(pair.dual, gp);
        CHECK(close(back[0], x[0], 2e-2));
        CHECK(close(back[1], x[1], 2e-2));
    }
}

TEST_CASE("gradient cone membership partitions the dual box") {
    auto pair = make_transform_pair(FunctionSpec::gaussian(2, 1.0), 257);
    CHECK(gradient_cone_membership(pair.dual, vec2(1.0, 1.0), {1, 1}, 1e-9));
    CHECK_FALSE(gradient_cone_membership(pair.dual, vec2(1.0, 1.0), {-1, -1}, 1e-9));

    double total = grid_mass(pair.dual, ConeRegion::whole(2));
    double sum = 0.0;
    for (const auto& orth : ConeRegion::all_orthants(2)) {
        std::vector<int> signs{orth.sign(0), orth.sign(1)};
        const GridFunction& dual = pair.dual;
        auto keep = [&dual, signs](const Vec& y) {
            for (int a = 0; a < 2; ++a)
                if (std::abs(y[a]) > dual.axis(a).max_abs - 2.0 * dual.axis(a).step())
                    return false;
            return gradient_cone_membership(dual, y, signs, 1e-9);
        };
        sum += grid_mass_masked(pair.dual, keep);
    }
    CHECK(close(sum, total, 3e-3 * total));
}

TEST_CASE("gradient charts: unconditional t vanishes, quadratic matches the Hessian") {
    auto pair = make_transform_pair(FunctionSpec::gaussian(2, 1.0), 257);
    std::vector<double> samples;
    for (int k = 0; k <= 32; ++k) samples.push_back(-2.0 + 4.0 * k / 32);
    GradientChart ch = gradient_chart(pair.primal, 0, samples);
    for (double t : ch.t_values) CHECK(close(t, 0.0, 1e-9));
    CHECK(ch.max_cert_residual < 1e-6);

    // f = x^2/2 + x1 x2/4: t_1(y) = (A12/A22) y with A = [[1,.25],[.25,1]]
    double l11 = 1.0, l12 = 0.25, l22 = std::sqrt(1.0 - 0.0625);
    auto q = FunctionSpec::gaussian(2, 1.0).composed(LinearMap::mat2(l11, l12, 0.0, l22));
    auto qp = make_transform_pair(q, 513);
    GradientChart ch2 = gradient_chart(qp.primal, 0, samples);
    for (std::size_t i = 0; i < samples.size(); ++i)
        CHECK(close(ch2.t_values[i], 0.25 * samples[i], 1e-8));
    CHECK(ch2.max_cert_residual < 1e-6);
}

TEST_CASE("conjugate at a point with quadratic refinement") {
    auto pair = make_transform_pair(FunctionSpec::gaussian(2, 1.0), 257);
    // L(gaussian) = gaussian: refined values are near-exact off the lattice
    for (double y1 : {0.37, 1.411, -2.03}) {
        Vec y = vec2(y1, 0.59);
        double v = conjugate_at_point(pair.primal, y, true);
        CHECK(close(v, 0.5 * dot(y, y, 2), 1e-9));
    }
}
