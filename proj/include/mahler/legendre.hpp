#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mahler/function_spec.hpp"
#include "mahler/grid.hpp"

namespace mahler {

// Grid for the dual variable y; same symmetric-odd conventions as the primal.
using DualGridSpec = std::vector<AxisSpec>;

// Largest |divided difference| of the finite data along each axis.
std::vector<double> slope_ranges(const GridFunction& f);

// Discrete Legendre transform of 1D samples: out(y_j) = max over finite
// nodes of (x_k y_j - f(x_k)), computed by the monotone walk over the lower
// hull of the epigraph samples. Agrees with the brute-force double loop.
GridFunction conjugate_1d(const GridFunction& f, const AxisSpec& dual);

// Exact discrete conjugate over the full lattice via per-axis 1D transforms
// (partial transforms are negated between axes). Errors with DualRangeError
// when a dual axis cannot reach the primal slope range, unless
// allow_clipping is set (back-transforms onto an intended window).
GridFunction conjugate_nd(const GridFunction& f, const DualGridSpec& dual,
                          bool allow_clipping = false);

// Discrete conjugate evaluated at one arbitrary point. `refined` adds a
// local quadratic-fit correction recovering the continuous supremum for
// smooth data (exact on quadratics).
double conjugate_at_point(const GridFunction& f, const Vec& y, bool refined = false);

// Dual grid sized so no slope clipping occurs and e^{-Lf} is negligible at
// the dual box faces; returns the grid and the conjugate computed on it.
std::pair<DualGridSpec, GridFunction> auto_conjugate(const GridFunction& f, int nodes,
                                                     double face_exponent = 36.0);

// Greatest convex minorant along every axis line, iterated to a fixed point.
GridFunction convexify(const GridFunction& f);

// L(Lf) back on the primal grid; equals convexify(f) up to interpolation.
GridFunction biconjugate(const GridFunction& f, int dual_nodes = 0);

// (f [] g) on out_axes (defaults to f's axes) via L(Lf + Lg).
GridFunction inf_convolution(const GridFunction& f, const GridFunction& g,
                             const std::vector<AxisSpec>* out_axes = nullptr,
                             int dual_nodes = 0);

// phi_m = |x|^2/(2m) + (f [] m|.|^2/2), by exact per-axis envelopes of the
// piecewise-linear interpolant; finite on the whole box.
GridFunction moreau_regularize(const GridFunction& f, double m);

// Slice x_axis = 0 and per-line minimum over x_axis.
GridFunction section_grid(const GridFunction& f, int axis);
GridFunction project_grid(const GridFunction& f, int axis);

// Central differences (subgradient midpoint at kinks); x must sit at least
// one step inside the finite region.
Vec gradient(const GridFunction& f, const Vec& x);

// y in grad phi(R^n_eps) iff grad Lphi(y) lands in the orthant, within tol.
bool gradient_cone_membership(const GridFunction& Lf, const Vec& y,
                              const std::vector<int>& signs, double tol);

// Parametrization of grad phi(e_i^perp) from Lemma-style gradient geometry:
// t_i(y) = <grad phi((grad phi_i)^{-1}(y)), e_i> along with the certification
// |Lphi(y + t_i(y) e_i) - L(phi_i)(y)| for every sample. 2D only.
struct GradientChart {
    int axis = 0;                     // i: the axis being left out
    std::vector<double> samples;      // y values along e_i^perp
    std::vector<double> t_values;     // t_i(y)
    std::vector<double> inverse_pts;  // (grad phi_i)^{-1}(y), coordinate on e_i^perp
    double max_cert_residual = 0.0;
};

// cert_stride > 1 certifies every k-th sample only (the certification needs
// two full lattice suprema per sample).
GradientChart gradient_chart(const GridFunction& f, int axis, const std::vector<double>& samples,
                             int cert_stride = 1);

}  // namespace mahler
