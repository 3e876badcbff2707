#include "mahler/measures.hpp"

#include <algorithm>
#include <cmath>

#include "mahler/errors.hpp"
#include "mahler/parallel.hpp"
#include "mahler/quadrature.hpp"

namespace mahler {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;

double exp_weight(double f, double t) { return f == kInf ? 0.0 : std::exp(-t * f); }

double entropy_weight(double f) { return f == kInf ? 0.0 : f * std::exp(-f); }

// Tensor-trapezoid via cells: full cells take the corner average, cells cut
// by the region boundary are subsampled (4x4 in 2D, 3x3x3 in 3D).
double grid_integral(const GridFunction& f, const std::function<bool(const Vec&)>* keep,
                     const std::function<double(double)>& weight) {
    const int dim = f.dim();
    std::array<int, 3> cells{1, 1, 1};
    std::size_t total_cells = 1;
    for (int a = 0; a < dim; ++a) {
        cells[a] = f.axis(a).count - 1;
        total_cells *= static_cast<std::size_t>(cells[a]);
    }
    double cell_vol = 1.0;
    for (int a = 0; a < dim; ++a) cell_vol *= f.axis(a).step();
    const int corners = 1 << dim;
    const int sub = dim == 3 ? 3 : 4;

    std::size_t rows = static_cast<std::size_t>(cells[0]);
    std::size_t cells_per_row = total_cells / rows;
    std::vector<double> row_sums(rows, 0.0);

    parallel_for(rows, [&](std::size_t row) {
        std::vector<double> terms;
        terms.reserve(cells_per_row);
        for (std::size_t rc = 0; rc < cells_per_row; ++rc) {
            std::size_t c = row * cells_per_row + rc;
            std::array<int, 3> base{0, 0, 0};
            std::size_t rem = c;
            for (int a = dim - 1; a >= 0; --a) {
                base[a] = static_cast<int>(rem % static_cast<std::size_t>(cells[a]));
                rem /= static_cast<std::size_t>(cells[a]);
            }
            int inside = 0;
            double corner_sum = 0.0;
            bool any_weight = false;
            for (int k = 0; k < corners; ++k) {
                std::array<int, 3> idx = base;
                for (int a = 0; a < dim; ++a) idx[a] += (k >> a) & 1;
                double v = f.at(idx);
                double w = weight(v);
                corner_sum += w;
                if (w != 0.0) any_weight = true;
                if (!keep || (*keep)(f.coords(idx))) ++inside;
            }
            if (!any_weight) continue;
            if (inside == corners) {
                terms.push_back(corner_sum / corners * cell_vol);
            } else if (inside > 0) {
                int pts = 1;
                for (int a = 0; a < dim; ++a) pts *= sub;
                double acc = 0.0;
                for (int s = 0; s < pts; ++s) {
                    int rem2 = s;
                    Vec p{};
                    for (int a = 0; a < dim; ++a) {
                        int q = rem2 % sub;
                        rem2 /= sub;
                        p[a] = f.axis(a).coord(base[a]) + (q + 0.5) / sub * f.axis(a).step();
                    }
                    if (keep && !(*keep)(p)) continue;
                    acc += weight(f.interpolate(p));
                }
                terms.push_back(acc / pts * cell_vol);
            }
        }
        row_sums[row] = pairwise_sum(terms);
    });
    return pairwise_sum(row_sums);
}

void check_box_tail(const GridFunction& f, double t) {
    double face_min = kInf;
    const std::size_t n = f.size();
    for (std::size_t flat = 0; flat < n; ++flat) {
        auto idx = f.multi_index(flat);
        bool outer = false;
        for (int a = 0; a < f.dim(); ++a)
            if (idx[a] == 0 || idx[a] == f.axis(a).count - 1) outer = true;
        if (!outer) continue;
        double v = f.values()[flat];
        if (v < kInf) face_min = std::min(face_min, t * v);
    }
    if (face_min < 13.8)
        throw IntegrabilityError(
            "grid mass: box too small, tail estimate exceeds quadrature tolerance");
}

std::function<bool(const Vec&)> region_predicate(const ConeRegion& region) {
    return [region](const Vec& p) { return region.contains(p, 0.0); };
}

}  // namespace

double grid_mass(const GridFunction& f, const ConeRegion& region, double t) {
    check_box_tail(f, t);
    auto weight = [t](double v) { return exp_weight(v, t); };
    if (region.kind() == ConeRegion::Kind::Whole) return grid_integral(f, nullptr, weight);
    auto keep = region_predicate(region);
    return grid_integral(f, &keep, weight);
}

double grid_entropy(const GridFunction& f, const ConeRegion& region, double t) {
    check_box_tail(f, t);
    auto weight = [t](double v) { return v == kInf ? 0.0 : entropy_weight(t * v); };
    if (region.kind() == ConeRegion::Kind::Whole) return grid_integral(f, nullptr, weight);
    auto keep = region_predicate(region);
    return grid_integral(f, &keep, weight);
}

double grid_mass_masked(const GridFunction& f, const std::function<bool(const Vec&)>& keep,
                        double t) {
    auto weight = [t](double v) { return exp_weight(v, t); };
    return grid_integral(f, &keep, weight);
}

double grid_entropy_masked(const GridFunction& f, const std::function<bool(const Vec&)>& keep) {
    auto weight = [](double v) { return entropy_weight(v); };
    return grid_integral(f, &keep, weight);
}

// ---- spec-level integrals ----

namespace {

// int_0^R r^p e^{-lam r - q r^2} dr for the closed-profile cases
// (lam >= 0 with q = 0, or lam = 0 with q > 0), p in {0, 1}.
double radial_mass_core(double lam, double q, double R, int p) {
    if (q == 0.0 && lam == 0.0) {
        if (R == kInf) throw IntegrabilityError("ray integral diverges (flat profile)");
        return p == 0 ? R : 0.5 * R * R;
    }
    if (q == 0.0) {
        if (p == 0) return R == kInf ? 1.0 / lam : (1.0 - std::exp(-lam * R)) / lam;
        if (R == kInf) return 1.0 / (lam * lam);
        double e = std::exp(-lam * R);
        return (1.0 - e * (1.0 + lam * R)) / (lam * lam);
    }
    if (lam == 0.0) {
        if (p == 0) {
            double half = 0.5 * std::sqrt(kPi / q);
            return R == kInf ? half : half * std::erf(std::sqrt(q) * R);
        }
        return R == kInf ? 0.5 / q : (1.0 - std::exp(-q * R * R)) / (2.0 * q);
    }
    throw GridError("radial_mass_core: mixed linear+quadratic profile has no closed form");
}

// int_0^R (lam r + q r^2) e^{-lam r - q r^2} r^p dr, p in {0, 1}.
double radial_entropy_core(double lam, double q, double R, int p) {
    if (q == 0.0 && lam == 0.0) return 0.0;
    if (q == 0.0) {
        if (p == 0) {
            if (R == kInf) return 1.0 / lam;
            double e = std::exp(-lam * R);
            return lam * (1.0 / (lam * lam) - e * (R / lam + 1.0 / (lam * lam)));
        }
        if (R == kInf) return 2.0 / (lam * lam);
        double e = std::exp(-lam * R);
        return 2.0 / (lam * lam) - e * (R * R + 2.0 * R / lam + 2.0 / (lam * lam));
    }
    if (lam == 0.0) {
        if (p == 1) {
            if (R == kInf) return 0.5 / q;
            double e = std::exp(-q * R * R);
            return (1.0 - e * (1.0 + q * R * R)) / (2.0 * q);
        }
        double sq = std::sqrt(q);
        if (R == kInf) return 0.25 * std::sqrt(kPi / q);
        return 0.25 * std::sqrt(kPi / q) * std::erf(sq * R) - 0.5 * R * std::exp(-q * R * R);
    }
    throw GridError("radial_entropy_core: mixed profile has no closed form");
}

// Per-cell Gauss-Legendre ray integration for interpolated grids: along a
// straight ray the interpolant is a per-cell quadratic, so a 7-point rule
// per cell crossing is effectively exact and never has to adapt through the
// derivative kinks at the cell walls.
std::array<double, 2> grid_ray_pair(const FunctionSpec& spec, const Vec& omega, double t, int p,
                                    bool want_entropy) {
    const GridFunction& grid = *spec.backing_grid();
    const int dim = grid.dim();
    Vec w = spec.pre_map().apply(omega);  // ray in grid coordinates
    double r_end = kInf;
    for (int a = 0; a < dim; ++a)
        if (w[a] != 0.0) r_end = std::min(r_end, grid.axis(a).max_abs / std::abs(w[a]));
    if (r_end == kInf)
        throw IntegrabilityError("grid ray integral: degenerate direction");

    static const double gl_x[7] = {-0.9491079123427585, -0.7415311855993944,
                                   -0.4058451513773972, 0.0,
                                   0.4058451513773972,  0.7415311855993944,
                                   0.9491079123427585};
    static const double gl_w[7] = {0.1294849661688697, 0.2797053914892767,
                                   0.3818300505051189, 0.4179591836734694,
                                   0.3818300505051189, 0.2797053914892767,
                                   0.1294849661688697};

    const double shift = spec.shift();
    double mass = 0.0, entropy = 0.0;
    double r0 = 0.0;
    int high_count = 0;
    while (r0 < r_end * (1.0 - 1e-14)) {
        // next cell wall along any axis
        double r1 = r_end;
        for (int a = 0; a < dim; ++a) {
            if (w[a] == 0.0) continue;
            double step = grid.axis(a).step() / std::abs(w[a]);
            double k = std::floor(r0 / step + 1e-12) + 1.0;
            r1 = std::min(r1, k * step);
        }
        if (r1 <= r0) r1 = std::min(r_end, r0 + 1e-12);
        double half = 0.5 * (r1 - r0), mid = 0.5 * (r0 + r1);
        double seg_mass = 0.0, seg_ent = 0.0;
        double seg_min = kInf;
        for (int q = 0; q < 7; ++q) {
            double r = mid + half * gl_x[q];
            Vec x{};
            for (int a = 0; a < dim; ++a) x[a] = r * w[a];
            double v = grid.interpolate(x);
            if (v == kInf) continue;
            v += shift;
            seg_min = std::min(seg_min, v);
            double weight = std::exp(-t * v);
            for (int pw = 0; pw < p; ++pw) weight *= r;
            seg_mass += gl_w[q] * weight;
            if (want_entropy) seg_ent += gl_w[q] * v * weight;
        }
        mass += half * seg_mass;
        entropy += half * seg_ent;
        if (seg_min > 50.0) {
            if (++high_count > 2) break;  // convex ray profiles only grow from here
        } else {
            high_count = 0;
        }
        r0 = r1;
    }
    return {mass, entropy};
}

// mass and entropy densities along direction omega (includes the shift).
std::array<double, 2> ray_density_pair(const FunctionSpec& spec, const Vec& omega, double tol,
                                       int p) {
    RayProfile pr = spec.profile(omega);
    double s = spec.shift();
    if (pr.closed) {
        double m = radial_mass_core(pr.lambda, pr.quad, pr.cutoff, p);
        double e = radial_entropy_core(pr.lambda, pr.quad, pr.cutoff, p);
        return {std::exp(-s) * m, std::exp(-s) * (e + s * m)};
    }
    if (spec.backing_grid()) return grid_ray_pair(spec, omega, 1.0, p, true);
    auto g = [&spec, &omega](double r) { return spec(scaled(omega, r)); };
    return ray_mass_entropy(g, p, tol);
}

double ray_density_mass(const FunctionSpec& spec, const Vec& omega, double t, double tol, int p) {
    RayProfile pr = spec.profile(omega);
    double s = spec.shift();
    if (pr.closed)
        return std::exp(-t * s) * radial_mass_core(t * pr.lambda, t * pr.quad, pr.cutoff, p);
    if (spec.backing_grid()) return grid_ray_pair(spec, omega, t, p, false)[0];
    RayIntegrand ri;
    ri.g = [&spec, &omega, t](double r) {
        double v = spec(scaled(omega, r));
        return v == kInf ? kInf : t * v;
    };
    ri.radial_power = p;
    return ray_integral(ri, tol);
}

std::vector<double> breaks_in_arc(const FunctionSpec& spec, double a, double b) {
    std::vector<double> out;
    for (double ang : spec.structure_angles())
        for (int k = -1; k <= 1; ++k) {
            double c = ang + kTwoPi * k;
            if (c > a + 1e-14 && c < b - 1e-14) out.push_back(c);
        }
    return out;
}

std::pair<double, double> orthant_arc(const std::vector<int>& signs) {
    if (signs[0] == 1 && signs[1] == 1) return {0.0, 0.5 * kPi};
    if (signs[0] == -1 && signs[1] == 1) return {0.5 * kPi, kPi};
    if (signs[0] == -1 && signs[1] == -1) return {kPi, 1.5 * kPi};
    return {1.5 * kPi, kTwoPi};
}

std::pair<double, double> region_arc(const ConeRegion& region) {
    switch (region.kind()) {
        case ConeRegion::Kind::Whole:
            return {0.0, kTwoPi};
        case ConeRegion::Kind::Orthant:
            return orthant_arc({region.sign(0), region.sign(1)});
        case ConeRegion::Kind::Wedge: {
            double a = angle_of(region.u());
            double b = angle_of(region.v());
            while (b <= a) b += kTwoPi;
            return {a, b};
        }
    }
    return {0.0, kTwoPi};
}

}  // namespace

std::array<double, 2> wedge_mass_entropy(const FunctionSpec& spec, double theta1, double theta2,
                                         double tol) {
    auto f = [&](double th) { return ray_density_pair(spec, unit_at_angle(th), tol * 1e-2, 1); };
    return integrate2_with_breakpoints(f, theta1, theta2, breaks_in_arc(spec, theta1, theta2),
                                       tol);
}

std::array<double, 2> ray_densities(const FunctionSpec& spec, const Vec& omega, double tol,
                                    int radial_power) {
    return ray_density_pair(spec, omega, tol, radial_power);
}

namespace {

double wedge_mass_scaled(const FunctionSpec& spec, double theta1, double theta2, double t,
                         double tol) {
    auto f = [&](double th) {
        return ray_density_mass(spec, unit_at_angle(th), t, tol * 1e-2, 1);
    };
    return integrate_with_breakpoints(f, theta1, theta2, breaks_in_arc(spec, theta1, theta2), tol);
}

}  // namespace

bool has_exact_measures(const FunctionSpec& spec) { return spec.has_closed_profile(); }

QuadratureResult spec_mass(const FunctionSpec& spec, const ConeRegion& region, double t,
                           double tol) {
    const int dim = spec.dim();
    if (region.dim() != dim) throw GridError("spec_mass: region dim mismatch");
    if (region.kind() == ConeRegion::Kind::Whole) {
        if (auto closed = spec.closed_whole_integrals(t)) return {(*closed)[0], 1e-14};
        if (spec.unconditional_hint() && dim >= 2) {
            // reflective symmetry: whole = 2^n times the positive orthant
            auto q = spec_mass(spec, ConeRegion::positive_orthant(dim), t, tol);
            return {q.value * (1 << dim), q.abs_error * (1 << dim)};
        }
    }
    if (dim == 1) {
        double v = 0.0;
        if (region.kind() == ConeRegion::Kind::Whole) {
            v = ray_density_mass(spec, vec1(1.0), t, tol, 0) +
                ray_density_mass(spec, vec1(-1.0), t, tol, 0);
        } else {
            v = ray_density_mass(spec, vec1(region.sign(0)), t, tol, 0);
        }
        return {v, tol * 4.0};
    }
    if (dim == 2) {
        auto [a, b] = region_arc(region);
        if (t == 1.0) {
            auto me = wedge_mass_entropy(spec, a, b, tol);
            return {me[0], tol * 4.0};
        }
        return {wedge_mass_scaled(spec, a, b, t, tol), tol * 4.0};
    }
    // dim == 3: orthants of unconditional specs only
    if (region.kind() == ConeRegion::Kind::Orthant && spec.unconditional_hint()) {
        auto whole = spec_mass(spec, ConeRegion::whole(3), t, tol);
        return {whole.value / 8.0, whole.abs_error / 8.0};
    }
    throw GridError("spec_mass: 3D region requires a closed profile or unconditional symmetry");
}

QuadratureResult spec_entropy(const FunctionSpec& spec, const ConeRegion& region, double tol) {
    const int dim = spec.dim();
    if (region.dim() != dim) throw GridError("spec_entropy: region dim mismatch");
    if (region.kind() == ConeRegion::Kind::Whole) {
        if (auto closed = spec.closed_whole_integrals(1.0)) return {(*closed)[1], 1e-14};
        if (spec.unconditional_hint() && dim >= 2) {
            auto q = spec_entropy(spec, ConeRegion::positive_orthant(dim), tol);
            return {q.value * (1 << dim), q.abs_error * (1 << dim)};
        }
    }
    if (dim == 1) {
        auto one = [&](int s) { return ray_density_pair(spec, vec1(s), tol, 0)[1]; };
        if (region.kind() == ConeRegion::Kind::Whole) return {one(1) + one(-1), tol * 4.0};
        return {one(region.sign(0)), tol * 4.0};
    }
    if (dim == 2) {
        auto [a, b] = region_arc(region);
        auto me = wedge_mass_entropy(spec, a, b, tol);
        return {me[1], tol * 4.0};
    }
    if (region.kind() == ConeRegion::Kind::Orthant && spec.unconditional_hint()) {
        auto whole = spec_entropy(spec, ConeRegion::whole(3), tol);
        return {whole.value / 8.0, whole.abs_error / 8.0};
    }
    throw GridError("spec_entropy: 3D region requires a closed profile or unconditional symmetry");
}

QuadratureResult axis_half_integral(const FunctionSpec& spec, const Vec& dir, double tol) {
    double n = norm2(dir, spec.dim());
    Vec omega = scaled(dir, 1.0 / n);
    return {ray_density_mass(spec, omega, 1.0, tol, 0), tol * 4.0};
}

MassBreakdown mass_breakdown(const FunctionSpec& spec) {
    MassBreakdown out;
    const int dim = spec.dim();
    out.total_mass = spec_mass(spec, ConeRegion::whole(dim)).value;
    out.total_entropy = spec_entropy(spec, ConeRegion::whole(dim)).value;
    for (const auto& orth : ConeRegion::all_orthants(dim)) {
        std::vector<int> signs;
        for (int a = 0; a < dim; ++a) signs.push_back(orth.sign(a));
        out.orthant_signs.push_back(signs);
        out.orthant_mass.push_back(spec_mass(spec, orth).value);
        out.orthant_entropy.push_back(spec_entropy(spec, orth).value);
    }
    return out;
}

MassBreakdown mass_breakdown_grid(const GridFunction& f) {
    MassBreakdown out;
    const int dim = f.dim();
    out.total_mass = grid_mass(f, ConeRegion::whole(dim));
    out.total_entropy = grid_entropy(f, ConeRegion::whole(dim));
    for (const auto& orth : ConeRegion::all_orthants(dim)) {
        std::vector<int> signs;
        for (int a = 0; a < dim; ++a) signs.push_back(orth.sign(a));
        out.orthant_signs.push_back(signs);
        out.orthant_mass.push_back(grid_mass(f, orth));
        out.orthant_entropy.push_back(grid_entropy(f, orth));
    }
    return out;
}

// ---- transform pairs and volume products ----

TransformPair make_transform_pair(const FunctionSpec& spec, int nodes, double tail_tol,
                                  double t_min) {
    auto axes = auto_axes(spec, nodes, tail_tol, t_min);
    GridFunction primal = sample(spec, axes);
    double face = 36.0 / std::min(1.0, t_min);
    auto [dual_axes, dual] = auto_conjugate(primal, nodes, face);
    return TransformPair{spec, std::move(primal), std::move(dual), std::move(dual_axes)};
}

double fenchel_young_violation(const GridFunction& f, const GridFunction& lf, int stride) {
    double worst = -kInf;
    const std::size_t nf = f.size(), ng = lf.size();
    for (std::size_t i = 0; i < nf; i += static_cast<std::size_t>(stride)) {
        double fv = f.values()[i];
        if (fv == kInf) continue;
        Vec x = f.coords(f.multi_index(i));
        for (std::size_t j = 0; j < ng; j += static_cast<std::size_t>(stride)) {
            double gv = lf.values()[j];
            if (gv == kInf) continue;
            Vec y = lf.coords(lf.multi_index(j));
            worst = std::max(worst, dot(x, y, f.dim()) - fv - gv);
        }
    }
    return worst;
}

namespace {

GridFunction decimate(const GridFunction& f) {
    std::vector<AxisSpec> axes;
    for (int a = 0; a < f.dim(); ++a)
        axes.emplace_back(f.axis(a).max_abs, (f.axis(a).count - 1) / 2 + 1);
    GridFunction out = GridFunction::filled(axes, 0.0);
    const std::size_t n = out.size();
    for (std::size_t flat = 0; flat < n; ++flat) {
        auto idx = out.multi_index(flat);
        std::array<int, 3> src{0, 0, 0};
        for (int a = 0; a < f.dim(); ++a) src[a] = idx[a] * 2;
        out.values()[flat] = f.at(src);
    }
    return out;
}

bool exact_vp_available(const FunctionSpec& spec) {
    if (!spec.has_closed_profile()) return false;
    auto conj = spec.conjugate();
    return conj.has_value() && conj->has_closed_profile();
}

double pow_int(double t, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= t;
    return r;
}

}  // namespace

VolumeProduct volume_product(const FunctionSpec& spec, int nodes, VpPath path, double t) {
    if (!(t > 0.0)) throw GridError("volume_product: t must be positive");
    const int n = spec.dim();
    bool exact = path == VpPath::Exact || (path == VpPath::Auto && exact_vp_available(spec));
    if (exact) {
        if (!exact_vp_available(spec))
            throw GridError("volume_product: exact path unavailable for this spec");
        auto conj = *spec.conjugate();
        auto m1 = spec_mass(spec, ConeRegion::whole(n), t);
        auto m2 = spec_mass(conj, ConeRegion::whole(n), t);
        double p = pow_int(t, n) * m1.value * m2.value;
        double err = pow_int(t, n) * (m1.abs_error * m2.value + m2.abs_error * m1.value);
        return {p, m1.value, m2.value, err, true};
    }
    TransformPair pair = make_transform_pair(spec, nodes, 1e-10, std::min(1.0, t));
    double m1 = grid_mass(pair.primal, ConeRegion::whole(n), t);
    double m2 = grid_mass(pair.dual, ConeRegion::whole(n), t);
    double p = pow_int(t, n) * m1 * m2;
    double m1c = grid_mass(decimate(pair.primal), ConeRegion::whole(n), t);
    double m2c = grid_mass(decimate(pair.dual), ConeRegion::whole(n), t);
    double pc = pow_int(t, n) * m1c * m2c;
    return {p, m1, m2, std::abs(p - pc) / 3.0, false};
}

double volume_product_scaled(const TransformPair& pair, double t) {
    if (!(t > 0.0)) throw GridError("volume_product_scaled: t must be positive");
    const int n = pair.primal.dim();
    return pow_int(t, n) * grid_mass(pair.primal, ConeRegion::whole(n), t) *
           grid_mass(pair.dual, ConeRegion::whole(n), t);
}

double vp_derivative_closed_grid(const TransformPair& pair) {
    const int n = pair.primal.dim();
    auto whole = ConeRegion::whole(n);
    double m1 = grid_mass(pair.primal, whole);
    double m2 = grid_mass(pair.dual, whole);
    double e1 = grid_entropy(pair.primal, whole);
    double e2 = grid_entropy(pair.dual, whole);
    return 2.0 * n * m1 * m2 - e1 * m2 - m1 * e2;
}

double vp_derivative_closed(const FunctionSpec& spec, int nodes, VpPath path) {
    const int n = spec.dim();
    bool exact = path == VpPath::Exact || (path == VpPath::Auto && exact_vp_available(spec));
    if (exact) {
        auto conj = *spec.conjugate();
        auto whole = ConeRegion::whole(n);
        double m1 = spec_mass(spec, whole).value;
        double m2 = spec_mass(conj, whole).value;
        double e1 = spec_entropy(spec, whole).value;
        double e2 = spec_entropy(conj, whole).value;
        return 2.0 * n * m1 * m2 - e1 * m2 - m1 * e2;
    }
    return vp_derivative_closed_grid(make_transform_pair(spec, nodes));
}

namespace {

double central_diff(const std::function<double(double)>& g, double h) {
    return (g(1.0 + h) - g(1.0 - h)) / (2.0 * h);
}

double derivative_with_richardson(const std::function<double(double)>& g, double h) {
    double d1 = central_diff(g, h);
    double d2 = central_diff(g, 0.5 * h);
    if (std::abs(d1 - d2) > 0.1 * std::max(std::abs(d2), 1e-12))
        return (4.0 * d2 - d1) / 3.0;
    return d2;
}

}  // namespace

double vp_derivative_fd_grid(const TransformPair& pair, double h) {
    if (!(h > 0.0 && h < 0.1)) throw GridError("vp_derivative_fd: h must be in (0, 0.1)");
    const int n = pair.primal.dim();
    auto g = [&](double t) { return pow_int(t, n) * volume_product_scaled(pair, t); };
    return derivative_with_richardson(g, h);
}

double vp_derivative_fd(const FunctionSpec& spec, int nodes, double h, VpPath path) {
    if (!(h > 0.0 && h < 0.1)) throw GridError("vp_derivative_fd: h must be in (0, 0.1)");
    const int n = spec.dim();
    bool exact = path == VpPath::Exact || (path == VpPath::Auto && exact_vp_available(spec));
    if (exact) {
        auto g = [&](double t) { return pow_int(t, n) * volume_product(spec, 0, VpPath::Exact, t).value; };
        return derivative_with_richardson(g, h);
    }
    TransformPair pair = make_transform_pair(spec, nodes, 1e-10, 1.0 - 2.0 * h);
    return vp_derivative_fd_grid(pair, h);
}

// ---- boundary fluxes ----

FluxResult boundary_flux_orthant(const FunctionSpec& spec, const std::vector<int>& signs,
                                 double tol) {
    const int n = spec.dim();
    if (static_cast<int>(signs.size()) != n) throw GridError("boundary_flux_orthant: signs dim");
    FluxResult out;
    out.surface = "boundary of " + ConeRegion::orthant(signs).describe();
    for (int i = 0; i < n; ++i) {
        double m;
        if (n == 1) {
            m = std::exp(-spec(Vec{}));  // 0-dimensional section is a point mass
        } else {
            FunctionSpec sec = spec.section(i);
            std::vector<int> sub;
            for (int a = 0; a < n; ++a)
                if (a != i) sub.push_back(signs[static_cast<std::size_t>(a)]);
            m = spec_mass(sec, ConeRegion::orthant(sub), 1.0, tol).value;
        }
        out.vector_flux[i] = -signs[static_cast<std::size_t>(i)] * m;
    }
    out.scalar_moment = 0.0;  // cone with apex at the origin
    return out;
}

namespace {

// Half-line integral of e^{-g} from the sampled 1D grid, signed direction.
double half_line_grid_mass(const GridFunction& g1, int sign) {
    const AxisSpec& ax = g1.axis(0);
    std::vector<double> xs, fs;
    for (int k = 0; k <= ax.mid(); ++k) {
        int i = ax.mid() + sign * k;
        xs.push_back(ax.coord(ax.mid() + k));  // use |x| as the parameter
        fs.push_back(g1.values()[static_cast<std::size_t>(i)]);
    }
    return piecewise_exp_integral(xs, fs);
}

}  // namespace

FluxResult boundary_flux_orthant_grid(const GridFunction& f, const std::vector<int>& signs) {
    const int n = f.dim();
    FluxResult out;
    out.surface = "boundary of " + ConeRegion::orthant(signs).describe();
    for (int i = 0; i < n; ++i) {
        double m;
        if (n == 1) {
            std::array<int, 3> mid{f.axis(0).mid(), 0, 0};
            m = std::exp(-f.at(mid));
        } else {
            GridFunction sec = section_grid(f, i);
            if (n == 2) {
                m = half_line_grid_mass(sec, signs[static_cast<std::size_t>(1 - i)]);
            } else {
                std::vector<int> sub;
                for (int a = 0; a < n; ++a)
                    if (a != i) sub.push_back(signs[static_cast<std::size_t>(a)]);
                m = grid_mass(sec, ConeRegion::orthant(sub));
            }
        }
        out.vector_flux[i] = -signs[static_cast<std::size_t>(i)] * m;
    }
    out.scalar_moment = 0.0;
    return out;
}

double half_line_conjugate_mass(const FunctionSpec& section1d, int nodes) {
    if (section1d.dim() != 1) throw GridError("half_line_conjugate_mass: needs a 1D spec");
    auto axes = auto_axes(section1d, nodes, 1e-12);
    GridFunction g = sample(section1d, axes);
    auto [dual_axes, lg] = auto_conjugate(g, nodes, 40.0);
    (void)dual_axes;
    return half_line_grid_mass(lg, 1);
}

double cone_boundary_q_slow(const FunctionSpec& spec, const std::vector<int>& signs) {
    if (spec.dim() != 2) throw GridError("cone_boundary_q_slow: 2D only");
    // Faces are rays {t eps_i e_i : t >= 0} with normals along the other axis;
    // <y, n> = 0 pointwise on each face.
    double q = 0.0;
    for (int i = 0; i < 2; ++i) {
        Vec dir{};
        dir[i] = signs[static_cast<std::size_t>(i)];
        Vec normal{};
        normal[1 - i] = -signs[static_cast<std::size_t>(1 - i)];
        auto integrand = [&](double r) {
            Vec y = scaled(dir, r);
            double v = spec(y);
            return v == kInf ? 0.0 : dot(y, normal, 2) * std::exp(-v);
        };
        q += adaptive_simpson(integrand, 0.0, 40.0, 1e-12);
    }
    return q;
}

GradientImageFlux flux_gradient_image_piece(const GridFunction& dual, const GradientChart& chart,
                                            const std::vector<int>& signs) {
    if (dual.dim() != 2) throw GridError("flux_gradient_image_piece: 2D only");
    const int i = chart.axis;
    const int j = 1 - i;
    const int ei = signs[static_cast<std::size_t>(i)];

    const std::vector<double>& ys = chart.samples;  // signed y along axis j
    const std::size_t m = ys.size();
    if (m < 3) throw GridError("flux_gradient_image_piece: need chart samples");

    std::vector<double> expo(m);
    for (std::size_t k = 0; k < m; ++k) {
        Vec p{};
        p[j] = ys[k];
        p[i] = chart.t_values[k];
        expo[k] = dual.interpolate(p);
    }
    // arc-length parameter s = |y|; samples must be ordered with |y| ascending
    std::vector<double> ss(m);
    for (std::size_t k = 0; k < m; ++k) ss[k] = std::abs(ys[k]);

    GradientImageFlux out;
    // <V, e_i> = -eps_i int e^{-L phi(y + t_i e_i)} ds  (piecewise-exponential)
    double vi = piecewise_exp_integral(ss, expo);
    out.vector_flux[i] = -ei * vi;
    out.ei_component = -ei * vi;

    // <V, e_j> = eps_i int t'(y) e^{-...} ds and the Q moment, by midpoint rule
    double vj = 0.0, q = 0.0;
    for (std::size_t k = 0; k + 1 < m; ++k) {
        double ds = ss[k + 1] - ss[k];
        double dtdy = (chart.t_values[k + 1] - chart.t_values[k]) / (ys[k + 1] - ys[k]);
        double w = 0.5 * (std::exp(-expo[k]) + std::exp(-expo[k + 1]));
        double ymid = 0.5 * (ys[k] + ys[k + 1]);
        double tmid = 0.5 * (chart.t_values[k] + chart.t_values[k + 1]);
        vj += ei * dtdy * w * ds;
        q += ei * (ymid * dtdy - tmid) * w * ds;
    }
    out.vector_flux[j] = vj;
    out.q_moment = q;
    return out;
}

double partial_product_F(const TransformPair& pair, const std::vector<int>& signs, double t,
                         double membership_tol) {
    const int n = pair.primal.dim();
    double mu1 = grid_mass(pair.primal, ConeRegion::orthant(signs), t);
    const GridFunction& dual = pair.dual;
    auto keep = [&dual, &signs, membership_tol](const Vec& y) {
        for (int a = 0; a < dual.dim(); ++a)
            if (std::abs(y[a]) > dual.axis(a).max_abs - 2.0 * dual.axis(a).step()) return false;
        return gradient_cone_membership(dual, y, signs, membership_tol);
    };
    double mu2 = pow_int(t, n) * grid_mass_masked(dual, keep, t);
    return mu1 * mu2;
}

// ---- Green identity helpers ----

namespace {

template <class Term>
double node_quadrature(const GridFunction& f, const ConeRegion& region, const Term& term) {
    const int dim = f.dim();
    double vol = 1.0;
    for (int a = 0; a < dim; ++a) vol *= f.axis(a).step();
    const std::size_t n = f.size();
    std::vector<double> terms;
    terms.reserve(n);
    for (std::size_t flat = 0; flat < n; ++flat) {
        auto idx = f.multi_index(flat);
        Vec x = f.coords(idx);
        if (!region.contains(x, 0.0)) continue;
        double w = 1.0;
        for (int a = 0; a < dim; ++a) {
            bool at_region_edge = region.kind() == ConeRegion::Kind::Orthant && x[a] == 0.0;
            bool at_box_edge = idx[a] == 0 || idx[a] == f.axis(a).count - 1;
            if (at_region_edge || at_box_edge) w *= 0.5;
        }
        double v = term(idx, x);
        if (v != 0.0) terms.push_back(w * v);
    }
    return pairwise_sum(terms) * vol;
}

Vec node_gradient(const GridFunction& f, const std::array<int, 3>& idx) {
    Vec g{};
    for (int a = 0; a < f.dim(); ++a) {
        auto up = idx, dn = idx;
        if (idx[a] + 1 < f.axis(a).count) up[a] += 1;
        if (idx[a] - 1 >= 0) dn[a] -= 1;
        double vu = f.at(up), vd = f.at(dn);
        if (vu == kInf || vd == kInf) return Vec{kInf, kInf, kInf};
        g[a] = (vu - vd) / ((up[a] - dn[a]) * f.axis(a).step());
    }
    return g;
}

}  // namespace

Vec green_gradient_integral(const GridFunction& f, const ConeRegion& region) {
    Vec out{};
    for (int comp = 0; comp < f.dim(); ++comp) {
        out[comp] = node_quadrature(f, region, [&](const std::array<int, 3>& idx, const Vec&) {
            double v = f.at(idx);
            if (v == kInf) return 0.0;
            Vec g = node_gradient(f, idx);
            if (g[0] == kInf) return 0.0;
            return g[comp] * std::exp(-v);
        });
    }
    return out;
}

double green_position_integral(const GridFunction& f, const ConeRegion& region) {
    return node_quadrature(f, region, [&](const std::array<int, 3>& idx, const Vec& x) {
        double v = f.at(idx);
        if (v == kInf) return 0.0;
        Vec g = node_gradient(f, idx);
        if (g[0] == kInf) return 0.0;
        return dot(x, g, f.dim()) * std::exp(-v);
    });
}

}  // namespace mahler
