// Acceptance battery: the eleven headline criteria, one pass/fail line each.
// Each criterion runs at its stated tolerance; failures list the offending
// checks.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "mahler/verify.hpp"

using namespace mahler;

namespace {

struct Criterion {
    int number;
    std::string title;
    std::function<std::vector<VerificationReport>(const SuiteConfig&)> run;
};

}  // namespace

int main() {
    setvbuf(stdout, nullptr, _IONBF, 0);
    SuiteConfig cfg;
    cfg.name = "full";
    cfg.seed = 7;
    cfg.nodes2d = 513;
    cfg.nodes3d = 129;

    SuiteConfig cfg3 = cfg;
    cfg3.name = "dimension3";

    std::vector<Criterion> criteria{
        {1, "Santalo equality: P(gaussian) = (2 pi)^2 within 0.2% on 513^2, < 5 s",
         criterion_santalo_gaussian},
        {2, "Mahler equality families: P = 16 within 0.5% (indicator, norm, mixed x10)",
         criterion_equality_families},
        {3, "Lower bound sweep: 20 seeded max_affine specs inside [16 - 0.2, (2 pi)^2 + 0.2]",
         criterion_lower_bound_sweep},
        {4, "Derivative bound: d/dt(t^2 P(t phi))|_1 >= 32 - 0.3, equality on the l1 norm",
         criterion_derivative_bound},
        {5, "Closed-form vs finite-difference derivative: relative gap <= 1e-3",
         criterion_derivative_consistency},
        {6, "Equipartition residuals below 1e-6 / 3x quadrature error; gaussian map sqrt(pi/2) I",
         criterion_equipartition_residuals},
        {7, "Envelope bounds after equipartition (1D and 2D) with 1e-9 slack",
         criterion_envelope_bounds},
        {8, "Conjugation oracle: fast transforms equal brute force to 1e-12, < 60 s",
         criterion_conjugation_oracle},
        {9, "Duality property suite: biconjugacy, Fenchel-Young, order reversal, "
            "section/projection, linear image, scaling",
         criterion_duality_properties},
        {10, "Dimension-3 conditional theorem on 5 unconditional specs, < 10 min",
         [](const SuiteConfig& c) { return criterion_dimension3(c); }},
        {11, "Moreau pipeline: ||T_m|| <= a/2 + 2/a and P(phi_m) -> P(phi) to 0.5%",
         criterion_moreau_pipeline},
    };

    int failures = 0;
    auto wall0 = std::chrono::steady_clock::now();
    for (const auto& crit : criteria) {
        const SuiteConfig& use = crit.number == 10 ? cfg3 : cfg;
        auto t0 = std::chrono::steady_clock::now();
        std::vector<VerificationReport> reports;
        bool threw = false;
        std::string what;
        try {
            reports = crit.run(use);
        } catch (const std::exception& e) {
            threw = true;
            what = e.what();
        }
        bool pass = !threw;
        double worst_margin = 1e300;
        int worst_index = -1;
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto& r = reports[i];
            if (!r.pass) pass = false;
            double slack = r.margin + r.tolerance;
            if (slack < worst_margin) {
                worst_margin = slack;
                worst_index = static_cast<int>(i);
            }
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] criterion %2d: %s (%zu checks, %.1f s)\n", pass ? "PASS" : "FAIL",
                    crit.number, crit.title.c_str(), reports.size(), secs);
        if (threw) {
            std::printf("        threw: %s\n", what.c_str());
        } else if (worst_index >= 0) {
            const auto& w = reports[static_cast<std::size_t>(worst_index)];
            std::printf("        tightest: %s margin=%.3g tol=%.3g (%s)\n", w.check.c_str(),
                        w.margin, w.tolerance, w.spec.c_str());
        }
        if (!pass) {
            ++failures;
            for (const auto& r : reports)
                if (!r.pass)
                    std::printf("        FAILED %s: lhs=%.17g rhs=%.17g margin=%.3g tol=%.3g (%s)\n",
                                r.check.c_str(), r.lhs, r.rhs, r.margin, r.tolerance,
                                r.spec.c_str());
        }
    }
    double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    std::printf("%d/11 criteria passed in %.1f s\n", 11 - failures, total);
    return failures == 0 ? 0 : 1;
}
