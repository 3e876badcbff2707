#include "mahler/quadrature.hpp"

#include <algorithm>
#include <limits>

#include "mahler/grid.hpp"

namespace mahler {

double pairwise_sum(const double* data, std::size_t n) {
    if (n <= 32) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
    if (!(b > a)) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

namespace {

using Pair = std::array<double, 2>;

Pair add(const Pair& a, const Pair& b) { return {a[0] + b[0], a[1] + b[1]}; }

Pair simpson2_rec(const std::function<Pair(double)>& f, double a, double b, const Pair& fa,
                  const Pair& fm, const Pair& fb, const Pair& whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    Pair flm = f(lm), frm = f(rm);
    Pair left, right, delta;
    for (int c = 0; c < 2; ++c) {
        left[c] = (m - a) / 6.0 * (fa[c] + 4.0 * flm[c] + fm[c]);
        right[c] = (b - m) / 6.0 * (fm[c] + 4.0 * frm[c] + fb[c]);
        delta[c] = left[c] + right[c] - whole[c];
    }
    double err = std::max(std::abs(delta[0]), std::abs(delta[1]));
    if (depth <= 0 || err <= 15.0 * tol) {
        return {left[0] + right[0] + delta[0] / 15.0, left[1] + right[1] + delta[1] / 15.0};
    }
    return add(simpson2_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1),
               simpson2_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1));
}

}  // namespace

Pair adaptive_simpson2(const std::function<Pair(double)>& f, double a, double b, double tol,
                       int max_depth) {
    if (!(b > a)) return {0.0, 0.0};
    double m = 0.5 * (a + b);
    Pair fa = f(a), fm = f(m), fb = f(b);
    Pair whole;
    for (int c = 0; c < 2; ++c) whole[c] = (b - a) / 6.0 * (fa[c] + 4.0 * fm[c] + fb[c]);
    return simpson2_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

double integrate_with_breakpoints(const std::function<double(double)>& f, double a, double b,
                                  std::vector<double> breaks, double tol) {
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    double total = 0.0;
    double prev = a;
    for (double x : breaks) {
        if (x <= prev || x > b) continue;
        if (x - prev > 1e-14) total += adaptive_simpson(f, prev, x, tol);
        prev = x;
    }
    return total;
}

std::array<double, 2> integrate2_with_breakpoints(
    const std::function<std::array<double, 2>(double)>& f, double a, double b,
    std::vector<double> breaks, double tol) {
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    Pair total{0.0, 0.0};
    double prev = a;
    for (double x : breaks) {
        if (x <= prev || x > b) continue;
        if (x - prev > 1e-14) total = add(total, adaptive_simpson2(f, prev, x, tol));
        prev = x;
    }
    return total;
}

namespace {

constexpr double kExponentCutoff = 46.0;  // e^-46 ~ 1e-20

// Largest radius worth integrating: either g exceeds the cutoff or the
// domain ends (+inf), located by bisection in the latter case.
double ray_extent(const std::function<double(double)>& g, bool* truncated_domain) {
    *truncated_domain = false;
    double r = 1.0;
    double last_finite = 0.0;
    for (int it = 0; it < 200; ++it) {
        double v = g(r);
        if (v == kInf) {
            // domain boundary in (last_finite, r]
            double lo = last_finite, hi = r;
            for (int b = 0; b < 100; ++b) {
                double m = 0.5 * (lo + hi);
                if (g(m) == kInf)
                    hi = m;
                else
                    lo = m;
            }
            *truncated_domain = true;
            return hi;
        }
        if (v >= kExponentCutoff) return r;
        last_finite = r;
        r *= 2.0;
        if (r > 1e12) break;
    }
    throw IntegrabilityError("ray integrand does not decay (slope <= 0 along a ray)");
}

}  // namespace

double ray_integral(const RayIntegrand& ri, double tol) {
    bool truncated = false;
    double rmax = ray_extent(ri.g, &truncated);
    auto f = [&](double r) {
        double gv = ri.g(r);
        if (gv >= kExponentCutoff || gv == kInf) return 0.0;
        double w = std::exp(-gv);
        for (int p = 0; p < ri.radial_power; ++p) w *= r;
        if (ri.entropy) w *= gv;
        return w;
    };
    return adaptive_simpson(f, 0.0, rmax, tol);
}

std::array<double, 2> ray_mass_entropy(const std::function<double(double)>& g, int radial_power,
                                       double tol) {
    bool truncated = false;
    double rmax = ray_extent(g, &truncated);
    auto f = [&](double r) -> Pair {
        double gv = g(r);
        if (gv >= kExponentCutoff || gv == kInf) return {0.0, 0.0};
        double w = std::exp(-gv);
        for (int p = 0; p < radial_power; ++p) w *= r;
        return {w, gv * w};
    };
    return adaptive_simpson2(f, 0.0, rmax, tol);
}

double piecewise_exp_integral(const std::vector<double>& xs, const std::vector<double>& fs) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        double f0 = fs[i], f1 = fs[i + 1];
        if (f0 == kInf || f1 == kInf) continue;
        double h = xs[i + 1] - xs[i];
        double s = (f1 - f0) / h;
        // int_0^h e^{-(f0 + s t)} dt
        if (std::abs(s) * h < 1e-9) {
            total += h * std::exp(-0.5 * (f0 + f1));
        } else {
            total += (std::exp(-f0) - std::exp(-f1)) / s;
        }
    }
    return total;
}

}  // namespace mahler
