#pragma once

#include <string>
#include <vector>

#include "mahler/function_spec.hpp"
#include "mahler/geometry.hpp"
#include "mahler/measures.hpp"

namespace mahler {

struct EquipartitionReport {
    LinearMap T;               // the map whose composition was verified
    double residual_mass = 0;  // max_eps |mu(orthant)/mu(total) - 2^-n|
    double residual_entropy = 0;
    double residual_axis = 0;  // max_i |int_0^inf e^{-phi(t e_i)} dt - 1|
    double phi_at_zero = 0;
    double est_quadrature_error = 0;
    std::vector<EquipartitionReport> section_reports;

    bool strong(double tol) const {
        return residual_mass <= tol && residual_entropy <= tol && residual_axis <= tol &&
               std::abs(phi_at_zero) <= tol;
    }
    std::string to_json() const;
};

// Unique v in the open half-circle after u with mu_phi(C_{u,v}) = total/4.
Vec v_of_u(const FunctionSpec& phi, const Vec& u);

// g(u) = entropy of C_{u, v(u)} minus a quarter of the total entropy.
double entropy_gap_g(const FunctionSpec& phi, const Vec& u);

// Direction u* with g(u*) = 0 found by the sign-scan + bisection; returns
// e_1 when g vanishes identically (radial or unconditional phi).
Vec find_equipartition_direction(const FunctionSpec& phi);

// T = S Delta with S = [u, v(u)] and Delta rescaling the half-axis
// integrals to 1, so that phi o T is strongly equipartitioned.
std::pair<LinearMap, EquipartitionReport> strong_equipartition_map(const FunctionSpec& phi);

// Residuals of the 2^n mass and entropy conditions plus the axis integrals;
// optionally recurses into every section.
EquipartitionReport verify_equipartition(const FunctionSpec& phi, bool recurse = false);

struct MoreauStage {
    double m = 0;
    LinearMap T;
    EquipartitionReport report;
    double volume_product = 0;
    double map_norm = 0;  // max column 2-norm of T
};

// Lemma-style pipeline: regularize, re-equipartition, track T_m and P(phi_m).
// norm_bound_out receives a/2 + 2/a for the measured growth slope a.
std::vector<MoreauStage> regularize_then_equipartition(const FunctionSpec& phi,
                                                       const std::vector<double>& schedule,
                                                       int nodes, double* norm_bound_out = nullptr);

}  // namespace mahler
