#include "mahler/equipartition.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "mahler/errors.hpp"
#include "mahler/io_json.hpp"
#include "mahler/legendre.hpp"
#include "mahler/quadrature.hpp"

namespace mahler {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kAngleTol = 1e-10;

std::array<double, 2> profile_density(const FunctionSpec& spec, double theta, double tol) {
    return ray_densities(spec, unit_at_angle(theta), tol, 1);
}

// Uniform angular table of the densities with quadratic cumulative
// interpolation; the cheap integrator behind the direction scans and the
// whole pipeline for grid-backed functions.
class AngularTable {
  public:
    AngularTable(const FunctionSpec& spec, int n, double ray_tol)
        : n_(n), dens_m_(n + 1), dens_e_(n + 1) {
        for (int k = 0; k <= n_; ++k) {
            auto d = profile_density(spec, kTwoPi * k / n_, ray_tol);
            dens_m_[static_cast<std::size_t>(k)] = d[0];
            dens_e_[static_cast<std::size_t>(k)] = d[1];
        }
        cum_m_.assign(static_cast<std::size_t>(n_) + 1, 0.0);
        cum_e_.assign(static_cast<std::size_t>(n_) + 1, 0.0);
        double h = kTwoPi / n_;
        for (int k = 1; k <= n_; ++k) {
            auto K = static_cast<std::size_t>(k);
            cum_m_[K] = cum_m_[K - 1] + 0.5 * h * (dens_m_[K - 1] + dens_m_[K]);
            cum_e_[K] = cum_e_[K - 1] + 0.5 * h * (dens_e_[K - 1] + dens_e_[K]);
        }
        // refinement estimate against the half-resolution sums
        double half_m = 0.0, half_e = 0.0;
        for (int k = 2; k <= n_; k += 2) {
            auto K = static_cast<std::size_t>(k);
            half_m += h * (dens_m_[K - 2] + dens_m_[K]);
            half_e += h * (dens_e_[K - 2] + dens_e_[K]);
        }
        double scale = std::max({std::abs(cum_m_.back()), std::abs(cum_e_.back()), 1e-300});
        est_rel_ = (std::abs(half_m - cum_m_.back()) + std::abs(half_e - cum_e_.back())) /
                       (3.0 * scale) +
                   1e-11;
    }

    double mass_total() const { return cum_m_.back(); }
    double entropy_total() const { return cum_e_.back(); }
    double est_rel_error() const { return est_rel_; }

    double mass_between(double a, double b) const {
        return cum(cum_m_, dens_m_, b) - cum(cum_m_, dens_m_, a);
    }
    double entropy_between(double a, double b) const {
        return cum(cum_e_, dens_e_, b) - cum(cum_e_, dens_e_, a);
    }

  private:
    double cum(const std::vector<double>& c, const std::vector<double>& d, double th) const {
        double total = c.back();
        double winds = std::floor(th / kTwoPi);
        double r = th - winds * kTwoPi;
        double h = kTwoPi / n_;
        double u = r / h;
        int k = static_cast<int>(std::floor(u));
        if (k >= n_) k = n_ - 1;
        double s = u - k;
        double d0 = d[static_cast<std::size_t>(k)], d1 = d[static_cast<std::size_t>(k + 1)];
        double frac = h * (d0 * s + 0.5 * (d1 - d0) * s * s);
        return winds * total + c[static_cast<std::size_t>(k)] + frac;
    }

    int n_;
    std::vector<double> dens_m_, dens_e_;
    std::vector<double> cum_m_, cum_e_;
    double est_rel_ = 0.0;
};

// Wedge-integral provider for the searches: adaptive integrals where the
// profiles are cheap and trustworthy, one shared angular table otherwise.
struct SearchOps {
    std::function<std::array<double, 2>(double, double)> between;
    double total_mass = 0.0;
    double total_entropy = 0.0;
    double est_rel_error = 0.0;
};

SearchOps adaptive_ops(const FunctionSpec& spec, double tol) {
    SearchOps ops;
    ops.between = [spec, tol](double a, double b) { return wedge_mass_entropy(spec, a, b, tol); };
    auto whole = ops.between(0.0, kTwoPi);
    ops.total_mass = whole[0];
    ops.total_entropy = whole[1];
    ops.est_rel_error = 4.0 * tol / std::max(whole[0], 1e-300) + 1e-12;
    return ops;
}

SearchOps table_ops(const std::shared_ptr<AngularTable>& table) {
    SearchOps ops;
    ops.between = [table](double a, double b) {
        return std::array<double, 2>{table->mass_between(a, b), table->entropy_between(a, b)};
    };
    ops.total_mass = table->mass_total();
    ops.total_entropy = table->entropy_total();
    ops.est_rel_error = table->est_rel_error();
    return ops;
}

// grid-backed specs ride a table (their rays are expensive and kinked);
// closed profiles use tight adaptive integrals; other numeric specs
// (max-affine) adapt at a relaxed tolerance
SearchOps make_ops(const FunctionSpec& spec) {
    if (has_exact_measures(spec)) return adaptive_ops(spec, 1e-11);
    if (spec.backing_grid()) return table_ops(std::make_shared<AngularTable>(spec, 8192, 1e-11));
    return adaptive_ops(spec, 5e-10);
}

double v_angle_impl(const SearchOps& ops, double theta_u) {
    double lo = theta_u, hi = theta_u + kPi;
    double mass_lo = 0.0;
    double target = 0.25 * ops.total_mass;
    int guard = 0;
    while (hi - lo > kAngleTol && guard++ < 200) {
        double mid = 0.5 * (lo + hi);
        double dm = ops.between(lo, mid)[0];
        if (mass_lo + dm < target) {
            lo = mid;
            mass_lo += dm;
        } else {
            hi = mid;
        }
    }
    if (guard >= 200) throw ConvergenceError("v_of_u: bisection stalled");
    double v = 0.5 * (lo + hi);
    if (v <= theta_u + 1e-12 || v >= theta_u + kPi - 1e-12)
        throw ConvergenceError("v_of_u: bracket collapsed (mass concentration)");
    return v;
}

double g_impl(const SearchOps& ops, double theta_u) {
    double tv = v_angle_impl(ops, theta_u);
    return ops.between(theta_u, tv)[1] - 0.25 * ops.total_entropy;
}

double find_direction_impl(const FunctionSpec& phi, const SearchOps& ops) {
    if (phi.unconditional_hint()) return 0.0;

    if (!(ops.total_mass > 0.0) || !std::isfinite(ops.total_mass))
        throw IntegrabilityError("find_equipartition_direction: mass not in (0, inf)");
    double scale_e = std::max(std::abs(ops.total_entropy), ops.total_mass);

    // g(e_1) = 0 covers radial and coordinate-symmetric functions; the
    // smallest-angle tie-break lands there anyway.
    double g0 = g_impl(ops, 0.0);
    if (std::abs(g0) <= 1e-9 * scale_e) return 0.0;

    // sign scan over [0, pi), then a bracketed secant on the same integrals
    const int net = 720;
    double prev = g0;
    for (int k = 1; k <= net; ++k) {
        double th = kPi * k / net;
        double cur = k == net ? g0 : g_impl(ops, th);  // g has period pi
        if (prev == 0.0 || (prev < 0.0) != (cur < 0.0)) {
            double pa = kPi * (k - 1) / net, pb = th;
            double ga = prev, gb = cur;
            for (int it = 0; it < 90 && pb - pa > kAngleTol; ++it) {
                double mid = (it % 3 == 2) ? 0.5 * (pa + pb) : pa + ga * (pa - pb) / (gb - ga);
                if (!(mid > pa && mid < pb)) mid = 0.5 * (pa + pb);
                double gm = g_impl(ops, mid);
                if (std::abs(gm) <= 1e-12 * scale_e) return mid;
                if ((gm < 0.0) == (ga < 0.0)) {
                    pa = mid;
                    ga = gm;
                } else {
                    pb = mid;
                    gb = gm;
                }
            }
            return 0.5 * (pa + pb);
        }
        prev = cur;
    }
    throw ConvergenceError("find_equipartition_direction: no sign change found");
}

EquipartitionReport verify_with_ops(const FunctionSpec& phi, const SearchOps& ops) {
    EquipartitionReport rep;
    rep.T = LinearMap::identity(2);
    rep.phi_at_zero = phi(Vec{});
    const double arcs[5] = {0.0, 0.5 * kPi, kPi, 1.5 * kPi, kTwoPi};
    double quarter[4], quarter_e[4];
    for (int q = 0; q < 4; ++q) {
        auto me = ops.between(arcs[q], arcs[q + 1]);
        quarter[q] = me[0];
        quarter_e[q] = me[1];
    }
    double total_m = quarter[0] + quarter[1] + quarter[2] + quarter[3];
    double total_e = quarter_e[0] + quarter_e[1] + quarter_e[2] + quarter_e[3];
    for (int q = 0; q < 4; ++q) {
        rep.residual_mass = std::max(rep.residual_mass, std::abs(quarter[q] / total_m - 0.25));
        if (std::abs(total_e) > 1e-12 * total_m)
            rep.residual_entropy =
                std::max(rep.residual_entropy, std::abs(quarter_e[q] / total_e - 0.25));
        else
            rep.residual_entropy = std::max(
                rep.residual_entropy, std::abs(quarter_e[q]) / std::max(total_m, 1e-300));
    }
    double err = ops.est_rel_error;
    for (int i = 0; i < 2; ++i) {
        Vec e{};
        e[i] = 1.0;
        auto h = axis_half_integral(phi, e);
        rep.residual_axis = std::max(rep.residual_axis, std::abs(h.value - 1.0));
        err = std::max(err, h.abs_error);
    }
    rep.est_quadrature_error = std::max(err, 1e-9);
    return rep;
}

}  // namespace

Vec v_of_u(const FunctionSpec& phi, const Vec& u) {
    if (phi.dim() != 2) throw GridError("v_of_u: 2D only");
    SearchOps ops = make_ops(phi);
    return unit_at_angle(v_angle_impl(ops, angle_of(u)));
}

double entropy_gap_g(const FunctionSpec& phi, const Vec& u) {
    if (phi.dim() != 2) throw GridError("entropy_gap_g: 2D only");
    SearchOps ops = make_ops(phi);
    return g_impl(ops, angle_of(u));
}

Vec find_equipartition_direction(const FunctionSpec& phi) {
    if (phi.dim() != 2) throw GridError("find_equipartition_direction: 2D only");
    if (phi.unconditional_hint()) return vec2(1.0, 0.0);
    SearchOps ops = make_ops(phi);
    return unit_at_angle(find_direction_impl(phi, ops));
}

std::pair<LinearMap, EquipartitionReport> strong_equipartition_map(const FunctionSpec& phi_in) {
    if (phi_in.dim() != 2) throw GridError("strong_equipartition_map: 2D only");
    FunctionSpec phi = phi_in;
    double at0 = phi(Vec{});
    if (at0 != 0.0) phi = phi.shifted(-at0);  // P is shift invariant

    SearchOps ops = make_ops(phi);
    double theta_u = phi.unconditional_hint() ? 0.0 : find_direction_impl(phi, ops);
    double theta_v = v_angle_impl(ops, theta_u);
    Vec u = unit_at_angle(theta_u);
    Vec v = unit_at_angle(theta_v);
    LinearMap S = LinearMap::from_columns(2, {u, v});
    double a1 = axis_half_integral(phi, u).value;
    double a2 = axis_half_integral(phi, v).value;
    LinearMap T = S.compose(LinearMap::diagonal(2, {a1, a2, 0}));

    FunctionSpec composed = phi.composed(T);
    EquipartitionReport report = verify_with_ops(composed, make_ops(composed));
    report.T = T;
    return {T, report};
}

EquipartitionReport verify_equipartition(const FunctionSpec& phi, bool recurse) {
    const int n = phi.dim();
    EquipartitionReport rep;
    if (n == 2) {
        rep = verify_with_ops(phi, make_ops(phi));
    } else {
        rep.T = LinearMap::identity(n);
        rep.phi_at_zero = phi(Vec{});
        MassBreakdown mb = mass_breakdown(phi);
        double target = 1.0 / (1 << n);
        for (std::size_t k = 0; k < mb.orthant_mass.size(); ++k) {
            rep.residual_mass = std::max(rep.residual_mass,
                                         std::abs(mb.orthant_mass[k] / mb.total_mass - target));
            if (std::abs(mb.total_entropy) > 1e-12 * mb.total_mass)
                rep.residual_entropy =
                    std::max(rep.residual_entropy,
                             std::abs(mb.orthant_entropy[k] / mb.total_entropy - target));
            else
                rep.residual_entropy =
                    std::max(rep.residual_entropy,
                             std::abs(mb.orthant_entropy[k]) / std::max(mb.total_mass, 1e-300));
        }
        double err = 1e-9;
        for (int i = 0; i < n; ++i) {
            Vec e{};
            e[i] = 1.0;
            auto h = axis_half_integral(phi, e);
            rep.residual_axis = std::max(rep.residual_axis, std::abs(h.value - 1.0));
            err = std::max(err, h.abs_error);
        }
        rep.est_quadrature_error = err;
    }
    if (recurse && n >= 2) {
        for (int i = 0; i < n; ++i)
            rep.section_reports.push_back(verify_equipartition(phi.section(i), n - 1 >= 2));
    }
    return rep;
}

std::vector<MoreauStage> regularize_then_equipartition(const FunctionSpec& phi,
                                                       const std::vector<double>& schedule,
                                                       int nodes, double* norm_bound_out) {
    if (phi.dim() != 2) throw GridError("regularize_then_equipartition: 2D only");
    double a = growth_slope(phi);
    double r_bound = 0.5 * a + 2.0 / a;
    if (norm_bound_out) *norm_bound_out = r_bound;

    // box sized for the slowest-decaying regularization floor a|x| - a^2/2 - 1
    double r_floor = (37.0 + 0.5 * a * a) / a;
    double r_auto = truncation_radius(phi, 1e-10);
    double half_width = std::max(r_floor, r_auto);
    std::vector<AxisSpec> axes(2, AxisSpec(half_width, nodes));
    GridFunction base = sample(phi, axes);

    std::vector<MoreauStage> stages;
    for (double m : schedule) {
        MoreauStage st;
        st.m = m;
        GridFunction fm = moreau_regularize(base, m);
        FunctionSpec spec_m = FunctionSpec::from_grid(fm);
        auto [T, report] = strong_equipartition_map(spec_m);
        st.T = T;
        st.report = report;
        st.map_norm = T.max_column_norm();
        auto [dual_axes, dual] = auto_conjugate(fm, nodes);
        (void)dual_axes;
        st.volume_product =
            grid_mass(fm, ConeRegion::whole(2)) * grid_mass(dual, ConeRegion::whole(2));
        stages.push_back(std::move(st));
    }
    return stages;
}

std::string EquipartitionReport::to_json() const {
    JsonWriter w;
    std::vector<double> entries;
    for (int i = 0; i < T.dim(); ++i)
        for (int j = 0; j < T.dim(); ++j) entries.push_back(T.entry(i, j));
    w.field_array("T", entries)
        .field("residual_mass", residual_mass)
        .field("residual_entropy", residual_entropy)
        .field("residual_axis", residual_axis)
        .field("phi_at_zero", phi_at_zero)
        .field("est_quadrature_error", est_quadrature_error)
        .field("sections", static_cast<int>(section_reports.size()));
    return w.str();
}

}  // namespace mahler
