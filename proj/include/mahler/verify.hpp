#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mahler/equipartition.hpp"
#include "mahler/function_spec.hpp"
#include "mahler/measures.hpp"
#include "mahler/rng.hpp"

namespace mahler {

struct VerificationReport {
    std::string check;
    std::string spec;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // rhs - lhs; pass iff margin >= -tolerance
    double tolerance = 0.0;
    bool pass = false;
    std::string notes;

    std::string to_json() const;
    std::string to_csv_row() const;
    static std::string csv_header();
};

VerificationReport make_report(const std::string& check, const std::string& spec, double lhs,
                               double rhs, double tol, const std::string& notes = "");

// ---- single checks ----

// L phi(-V_{dA}/mu(A)) <= n - int_A phi dmu/mu(A) - Q_{dA}/mu(A), with L phi
// read off the conjugate grid; Q = 0 for orthants.
VerificationReport check_gradient_average_inequality(const TransformPair& pair,
                                                     const std::vector<int>& signs, double tol);

// The two-sided pairing inequality with A an orthant and B either the
// mirrored orthant of the dual or the gradient image grad phi(A).
VerificationReport check_pairing_inequality_cones(const TransformPair& pair,
                                                  const std::vector<int>& signsA,
                                                  const std::vector<int>& signsB, double tol);
VerificationReport check_pairing_inequality_gradient(const TransformPair& pair,
                                                     const std::vector<int>& signs, double tol);

// d/dt(t^2 P(t phi))|_1 >= 16 (int e^{-L phi_1} + int e^{-L phi_2}) >= 32
// for a strongly equipartitioned phi (2D).
std::vector<VerificationReport> check_derivative_lower_bound(const FunctionSpec& phi, int nodes,
                                                             double tol, VpPath path);

// 4^n - tol <= P(phi) <= (2pi)^n + tol.
std::vector<VerificationReport> check_mahler_and_santalo(const FunctionSpec& spec, int nodes,
                                                         VpPath path, double tol_low,
                                                         double tol_high);

// mixed spec: P = 16 and the norm+indicator splitting identity.
std::vector<VerificationReport> check_sum_lemma(double c, double b, const LinearMap& basis,
                                                std::uint64_t seed);

// conditional dimension-3 theorem on an unconditional spec.
std::vector<VerificationReport> check_dimension_n(const FunctionSpec& spec3, int nodes3,
                                                  int nodes2);

// ---- oracles and helpers shared with tests ----

// O(N M) double loop; the independent route the fast transform is checked
// against.
GridFunction brute_force_conjugate(const GridFunction& f, const DualGridSpec& dual);

// Hausdorff-style distance (over a direction net) of {phi <= 1} to the
// parallelogram spanned by its extremal boundary points, relative to the
// diameter. Small values flag parallelogram-like level sets.
double parallelogram_likeness(const FunctionSpec& spec);

FunctionSpec random_parallelogram_norm(Rng& rng);
FunctionSpec random_parallelogram_indicator(Rng& rng);
FunctionSpec random_mixed(Rng& rng);

// ---- suites ----

struct SuiteConfig {
    std::string name = "smoke";  // smoke | full | dimension3
    std::uint64_t seed = 1;
    int nodes2d = 513;
    int nodes3d = 129;
    double tol_scale = 1.0;
};

std::vector<VerificationReport> criterion_santalo_gaussian(const SuiteConfig&);
std::vector<VerificationReport> criterion_equality_families(const SuiteConfig&);
std::vector<VerificationReport> criterion_lower_bound_sweep(const SuiteConfig&);
std::vector<VerificationReport> criterion_derivative_bound(const SuiteConfig&);
std::vector<VerificationReport> criterion_derivative_consistency(const SuiteConfig&);
std::vector<VerificationReport> criterion_equipartition_residuals(const SuiteConfig&);
std::vector<VerificationReport> criterion_envelope_bounds(const SuiteConfig&);
std::vector<VerificationReport> criterion_conjugation_oracle(const SuiteConfig&);
std::vector<VerificationReport> criterion_duality_properties(const SuiteConfig&);
std::vector<VerificationReport> criterion_dimension3(const SuiteConfig&);
std::vector<VerificationReport> criterion_moreau_pipeline(const SuiteConfig&);

// Runs the named battery; reports come back sorted by check name.
std::vector<VerificationReport> run_suite(const SuiteConfig&);

}  // namespace mahler
