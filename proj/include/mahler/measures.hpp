#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mahler/function_spec.hpp"
#include "mahler/geometry.hpp"
#include "mahler/grid.hpp"
#include "mahler/legendre.hpp"

namespace mahler {

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;
};

// ---- grid quadrature (tensor trapezoid, cut cells subsampled) ----

// integral of e^{-t f} over the region
double grid_mass(const GridFunction& f, const ConeRegion& region, double t = 1.0);
// integral of (t f) e^{-t f} over the region (phi e^{-phi} extends by 0 at +inf)
double grid_entropy(const GridFunction& f, const ConeRegion& region, double t = 1.0);
// integral of e^{-t f} over {x : keep(x)}, cut cells subsampled
double grid_mass_masked(const GridFunction& f, const std::function<bool(const Vec&)>& keep,
                        double t = 1.0);
double grid_entropy_masked(const GridFunction& f, const std::function<bool(const Vec&)>& keep);

// ---- spec-level integrals (closed forms / adaptive polar) ----

QuadratureResult spec_mass(const FunctionSpec& spec, const ConeRegion& region, double t = 1.0,
                           double tol = 1e-10);
QuadratureResult spec_entropy(const FunctionSpec& spec, const ConeRegion& region,
                              double tol = 1e-10);
// int_0^inf e^{-phi(r d)} dr
QuadratureResult axis_half_integral(const FunctionSpec& spec, const Vec& dir, double tol = 1e-11);

// mass and entropy over one 2D wedge [theta1, theta2] in one adaptive pass
std::array<double, 2> wedge_mass_entropy(const FunctionSpec& spec, double theta1, double theta2,
                                         double tol = 1e-10);

// radial mass/entropy densities along one direction (radial_power = dim-1);
// closed profiles use closed forms, interpolated grids walk their cells with
// a fixed Gauss rule, anything else integrates adaptively
std::array<double, 2> ray_densities(const FunctionSpec& spec, const Vec& omega, double tol,
                                    int radial_power);

bool has_exact_measures(const FunctionSpec& spec);

struct MassBreakdown {
    double total_mass = 0.0;
    double total_entropy = 0.0;
    std::vector<std::vector<int>> orthant_signs;
    std::vector<double> orthant_mass;
    std::vector<double> orthant_entropy;
};

MassBreakdown mass_breakdown(const FunctionSpec& spec);
MassBreakdown mass_breakdown_grid(const GridFunction& f);

// ---- sampled transform pair ----

struct TransformPair {
    FunctionSpec spec;
    GridFunction primal;
    GridFunction dual;
    DualGridSpec dual_axes;
};

TransformPair make_transform_pair(const FunctionSpec& spec, int nodes, double tail_tol = 1e-10,
                                  double t_min = 1.0);

// largest <x,y> - f(x) - Lf(y) over a lattice subsample (<= 0 up to rounding)
double fenchel_young_violation(const GridFunction& f, const GridFunction& lf, int stride = 7);

// ---- volume products ----

enum class VpPath { Auto, Grid, Exact };

struct VolumeProduct {
    double value = 0.0;
    double primal_mass = 0.0;
    double dual_mass = 0.0;
    double abs_error = 0.0;
    bool exact_path = false;
};

// P(t phi) = t^n int e^{-t phi} int e^{-t L phi}; one conjugation, scaling
// reuses the same grids.
VolumeProduct volume_product(const FunctionSpec& spec, int nodes, VpPath path = VpPath::Auto,
                             double t = 1.0);
double volume_product_scaled(const TransformPair& pair, double t);

// d/dt(t^n P(t phi))|_{t=1} = 2nP - int phi e^{-phi} int e^{-L phi}
//                                 - int e^{-phi} int L phi e^{-L phi}
double vp_derivative_closed(const FunctionSpec& spec, int nodes, VpPath path = VpPath::Auto);
double vp_derivative_closed_grid(const TransformPair& pair);
// central difference of t -> t^n P(t phi) at t = 1 (Richardson fallback)
double vp_derivative_fd(const FunctionSpec& spec, int nodes, double h = 1e-3,
                        VpPath path = VpPath::Auto);
double vp_derivative_fd_grid(const TransformPair& pair, double h = 1e-3);

// ---- boundary fluxes ----

struct FluxResult {
    Vec vector_flux{};
    double scalar_moment = 0.0;
    std::string surface;
};

// V over the boundary of an orthant, from (n-1)-dimensional section masses;
// Q vanishes for cones with apex at the origin (also computed by the slow
// path in tests).
FluxResult boundary_flux_orthant(const FunctionSpec& spec, const std::vector<int>& signs,
                                 double tol = 1e-10);
// Same from sampled data (sections integrated piecewise-exponentially in 2D).
FluxResult boundary_flux_orthant_grid(const GridFunction& f, const std::vector<int>& signs);

// int_0^inf e^{-L(phi_i)} for a 1D section spec, via a fine 1D conjugate.
double half_line_conjugate_mass(const FunctionSpec& section1d, int nodes = 32769);

// Fluxes of L phi over the charted pieces grad phi(R^n_eps cap e_i^perp),
// 2D: full vector contribution of the piece for axis i, plus its Q moment.
struct GradientImageFlux {
    Vec vector_flux{};
    double q_moment = 0.0;
    double ei_component = 0.0;  // <V, e_i>, the lemma's right-hand side
};

// Integrates over the chart's own samples (ordered with |y| ascending);
// L phi is read from the conjugate grid by interpolation.
GradientImageFlux flux_gradient_image_piece(const GridFunction& dual, const GradientChart& chart,
                                            const std::vector<int>& signs);

// Slow-path Q over an orthant boundary (integrand <y, n> e^{-phi} vanishes
// identically on rays through the origin; computed numerically for tests).
double cone_boundary_q_slow(const FunctionSpec& spec, const std::vector<int>& signs);

// F_{A,B}(t) with A an orthant and B = grad phi(A) realized through
// gradient-cone membership on the dual grid.
double partial_product_F(const TransformPair& pair, const std::vector<int>& signs, double t,
                         double membership_tol = 1e-9);

// Green identity helpers over orthants (test support):
// int_A grad f dmu_f and int_A <x, grad f> dmu_f by grid quadrature.
Vec green_gradient_integral(const GridFunction& f, const ConeRegion& region);
double green_position_integral(const GridFunction& f, const ConeRegion& region);

}  // namespace mahler
