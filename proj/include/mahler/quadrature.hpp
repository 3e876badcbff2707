#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace mahler {

// Pairwise (cascade) summation: deterministic and accurate regardless of how
// the terms were produced.
double pairwise_sum(const double* data, std::size_t n);

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(v.data(), v.size());
}

// Adaptive Simpson on [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 48);

// Same driver for a pair of integrands sharing evaluation points (mass and
// entropy densities along one angular sweep, say). Error control is on the
// max of the two components.
std::array<double, 2> adaptive_simpson2(const std::function<std::array<double, 2>(double)>& f,
                                        double a, double b, double tol, int max_depth = 48);

// Integral over [a, b] split at interior breakpoints (sorted or not).
double integrate_with_breakpoints(const std::function<double(double)>& f, double a, double b,
                                  std::vector<double> breaks, double tol);

std::array<double, 2> integrate2_with_breakpoints(
    const std::function<std::array<double, 2>(double)>& f, double a, double b,
    std::vector<double> breaks, double tol);

// Integral of exp(-g) over [0, inf) for a coercive g given by a callable;
// the range is grown by doubling until g exceeds a cutoff, +inf values end
// the domain (boundary located by bisection).
struct RayIntegrand {
    std::function<double(double)> g;  // exponent g(r), extended-real
    int radial_power = 0;             // integrand r^p e^{-g(r)}
    bool entropy = false;             // integrand g(r) r^p e^{-g(r)}
};

double ray_integral(const RayIntegrand& ri, double tol);

// Both mass (g e^{-g} weight off) and entropy in one adaptive pass.
std::array<double, 2> ray_mass_entropy(const std::function<double(double)>& g, int radial_power,
                                       double tol);

// Exact integral of exp(-L(x)) where L is the piecewise-linear interpolation
// of samples (x_i, f_i) on a uniform partition; +inf samples truncate the
// domain. Used for 1D masses of sampled conjugates.
double piecewise_exp_integral(const std::vector<double>& xs, const std::vector<double>& fs);

}  // namespace mahler
