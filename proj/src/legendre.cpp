#include "mahler/legendre.hpp"

#include <algorithm>
#include <cmath>

#include "mahler/errors.hpp"
#include "mahler/parallel.hpp"

namespace mahler {

namespace {

// Lower hull (keeping exactly-collinear points) of the finite samples, then
// the monotone slope walk. Values are computed with the same expression the
// brute-force loop uses, and ties plus one-neighbour guards are folded in
// with fmax, so the result matches the double loop.
void conjugate_line(const double* xs, const double* fs, int n, const double* ys, double* out,
                    int m, std::vector<int>& hull) {
    hull.clear();
    for (int k = 0; k < n; ++k) {
        if (fs[k] == kInf) continue;
        while (hull.size() >= 2) {
            int i = hull[hull.size() - 2];
            int j = hull[hull.size() - 1];
            // drop j when strictly above segment (i, k)
            if ((fs[j] - fs[i]) * (xs[k] - xs[i]) > (fs[k] - fs[i]) * (xs[j] - xs[i]))
                hull.pop_back();
            else
                break;
        }
        hull.push_back(k);
    }
    const int H = static_cast<int>(hull.size());
    if (H == 0) throw GridError("conjugate_1d: all-infinite input line");

    auto val = [&](int h, double y) { return xs[hull[h]] * y - fs[hull[h]]; };
    auto slope = [&](int h) {  // between hull vertex h and h+1
        return (fs[hull[h + 1]] - fs[hull[h]]) / (xs[hull[h + 1]] - xs[hull[h]]);
    };

    int p = 0;
    for (int j = 0; j < m; ++j) {
        double y = ys[j];
        while (p < H - 1 && slope(p) < y) ++p;
        double best = val(p, y);
        int k = p;
        while (k < H - 1 && slope(k) <= y) {
            ++k;
            best = std::fmax(best, val(k, y));
        }
        if (k < H - 1) best = std::fmax(best, val(k + 1, y));
        if (p > 0) best = std::fmax(best, val(p - 1, y));
        out[j] = best;
    }
}

std::vector<double> axis_coords(const AxisSpec& ax) {
    std::vector<double> xs(static_cast<std::size_t>(ax.count));
    for (int i = 0; i < ax.count; ++i) xs[static_cast<std::size_t>(i)] = ax.coord(i);
    return xs;
}

// Base offsets of all lines along `axis` for the given shape.
std::vector<std::size_t> line_offsets(const GridFunction& g, int axis) {
    std::vector<std::size_t> offs;
    const std::size_t n = g.size();
    for (std::size_t flat = 0; flat < n; ++flat)
        if (g.multi_index(flat)[axis] == 0) offs.push_back(flat);
    return offs;
}

}  // namespace

std::vector<double> slope_ranges(const GridFunction& f) {
    std::vector<double> out(static_cast<std::size_t>(f.dim()), 0.0);
    for (int a = 0; a < f.dim(); ++a) {
        const double step = f.axis(a).step();
        const std::size_t str = f.stride(a);
        double worst = 0.0;
        for (std::size_t base : line_offsets(f, a)) {
            for (int i = 0; i + 1 < f.axis(a).count; ++i) {
                double v0 = f.values()[base + static_cast<std::size_t>(i) * str];
                double v1 = f.values()[base + static_cast<std::size_t>(i + 1) * str];
                if (v0 < kInf && v1 < kInf) worst = std::max(worst, std::abs(v1 - v0) / step);
            }
        }
        out[static_cast<std::size_t>(a)] = worst;
    }
    return out;
}

GridFunction conjugate_1d(const GridFunction& f, const AxisSpec& dual) {
    if (f.dim() != 1) throw GridError("conjugate_1d: input must be 1D");
    if (f.finite_count() == 0) throw GridError("conjugate_1d: all-infinite input");
    auto xs = axis_coords(f.axis(0));
    auto ys = axis_coords(dual);
    std::vector<double> out(ys.size());
    std::vector<int> hull;
    conjugate_line(xs.data(), f.values().data(), f.axis(0).count, ys.data(), out.data(),
                   dual.count, hull);
    return GridFunction({dual}, std::move(out));
}

GridFunction conjugate_nd(const GridFunction& f, const DualGridSpec& dual, bool allow_clipping) {
    const int dim = f.dim();
    if (static_cast<int>(dual.size()) != dim) throw GridError("conjugate_nd: dual dim mismatch");
    if (f.finite_count() == 0) throw GridError("conjugate_nd: all-infinite input");
    if (!allow_clipping) {
        auto ranges = slope_ranges(f);
        for (int a = 0; a < dim; ++a) {
            double required = ranges[static_cast<std::size_t>(a)];
            if (dual[static_cast<std::size_t>(a)].max_abs < required * (1.0 - 1e-12))
                throw DualRangeError("conjugate_nd: dual axis " + std::to_string(a) +
                                         " clips dom(L phi); need half-width >= " +
                                         std::to_string(required),
                                     required);
        }
    }

    GridFunction cur = f;
    for (int a = 0; a < dim; ++a) {
        std::vector<AxisSpec> axes = cur.axes();
        axes[static_cast<std::size_t>(a)] = dual[static_cast<std::size_t>(a)];
        GridFunction next = GridFunction::filled(axes, 0.0);

        auto xs = axis_coords(cur.axis(a));
        auto ys = axis_coords(next.axis(a));
        const int n = cur.axis(a).count;
        const int m = next.axis(a).count;
        const std::size_t in_stride = cur.stride(a);
        const std::size_t out_stride = next.stride(a);
        auto offs = line_offsets(cur, a);
        // Line bases agree between input and output shapes for indices with
        // idx[a] = 0 only when strides match; recompute output bases.
        auto out_offs = line_offsets(next, a);
        const bool negate = a + 1 < dim;

        parallel_for(offs.size(), [&](std::size_t li) {
            thread_local std::vector<int> hull;
            thread_local std::vector<double> in_line, out_line;
            in_line.resize(static_cast<std::size_t>(n));
            out_line.resize(static_cast<std::size_t>(m));
            const double* src = cur.values().data() + offs[li];
            for (int i = 0; i < n; ++i) in_line[static_cast<std::size_t>(i)] = src[static_cast<std::size_t>(i) * in_stride];
            bool any_finite = false;
            for (double v : in_line)
                if (v < kInf) {
                    any_finite = true;
                    break;
                }
            double* dst = next.values().data() + out_offs[li];
            if (!any_finite) {
                // nothing to take a supremum over; mark absent for later sweeps
                for (int j = 0; j < m; ++j) dst[static_cast<std::size_t>(j) * out_stride] = kInf;
                return;
            }
            conjugate_line(xs.data(), in_line.data(), n, ys.data(), out_line.data(), m, hull);
            for (int j = 0; j < m; ++j) {
                double v = out_line[static_cast<std::size_t>(j)];
                dst[static_cast<std::size_t>(j) * out_stride] = negate ? -v : v;
            }
        });
        cur = std::move(next);
    }
    cur.refresh_even_flag();
    return cur;
}

double conjugate_at_point(const GridFunction& f, const Vec& y, bool refined) {
    const std::size_t n = f.size();
    double best = -kInf;
    std::size_t arg = 0;
    for (std::size_t flat = 0; flat < n; ++flat) {
        double v = f.values()[flat];
        if (v == kInf) continue;
        Vec x = f.coords(f.multi_index(flat));
        double cand = dot(x, y, f.dim()) - v;
        if (cand > best) {
            best = cand;
            arg = flat;
        }
    }
    if (best == -kInf) throw GridError("conjugate_at_point: all-infinite input");
    if (!refined) return best;

    // Quadratic-fit correction around the lattice argmax: with objective
    // values v on the 3^d neighbourhood, refined = v0 - g^T H^{-1} g / 2.
    const int d = f.dim();
    auto idx = f.multi_index(arg);
    auto value_at = [&](std::array<int, 3> q) -> double {
        for (int a = 0; a < d; ++a)
            if (q[a] < 0 || q[a] >= f.axis(a).count) return kInf;
        double fv = f.at(q);
        if (fv == kInf) return kInf;
        return dot(f.coords(q), y, d) - fv;
    };
    double g[3], h[3][3];
    for (int a = 0; a < d; ++a) {
        auto up = idx, dn = idx;
        up[a] += 1;
        dn[a] -= 1;
        double vu = value_at(up), vd = value_at(dn);
        if (vu == kInf || vd == kInf) return best;
        double step = f.axis(a).step();
        g[a] = (vu - vd) / (2.0 * step);
        h[a][a] = (vu + vd - 2.0 * best) / (step * step);
    }
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) {
            auto pp = idx, pm = idx, mp = idx, mm = idx;
            pp[a] += 1, pp[b] += 1;
            pm[a] += 1, pm[b] -= 1;
            mp[a] -= 1, mp[b] += 1;
            mm[a] -= 1, mm[b] -= 1;
            double vpp = value_at(pp), vpm = value_at(pm), vmp = value_at(mp), vmm = value_at(mm);
            if (vpp == kInf || vpm == kInf || vmp == kInf || vmm == kInf) return best;
            double sa = f.axis(a).step(), sb = f.axis(b).step();
            h[a][b] = h[b][a] = (vpp + vmm - vpm - vmp) / (4.0 * sa * sb);
        }
    // solve H s = g; require H negative definite (objective is concave there)
    std::array<double, 9> he{};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) he[static_cast<std::size_t>(i * d + j)] = h[i][j];
    double detv;
    if (d == 1) {
        detv = he[0];
        if (!(detv < 0.0)) return best;
    } else if (d == 2) {
        detv = he[0] * he[3] - he[1] * he[2];
        if (!(he[0] < 0.0 && detv > 0.0)) return best;
    } else {
        if (!(he[0] < 0.0)) return best;
        double m2 = he[0] * he[4] - he[1] * he[3];
        if (!(m2 > 0.0)) return best;
        LinearMap H3(3, he);
        if (!(H3.det() < 0.0)) return best;
    }
    LinearMap H(d, he);
    Vec gv{g[0], d > 1 ? g[1] : 0.0, d > 2 ? g[2] : 0.0};
    Vec s = H.apply_inverse(gv);
    double corr = -0.5 * dot(gv, s, d);
    double step_cap = 0.0;
    for (int a = 0; a < d; ++a) step_cap = std::max(step_cap, std::abs(s[a]) / f.axis(a).step());
    if (step_cap > 1.5) return best;  // fit extrapolates past the neighbourhood
    return best + corr;
}

std::pair<DualGridSpec, GridFunction> auto_conjugate(const GridFunction& f, int nodes,
                                                     double face_exponent) {
    if (nodes <= 0) nodes = f.axis(0).count;
    auto ranges = slope_ranges(f);
    DualGridSpec dual;
    for (int a = 0; a < f.dim(); ++a) {
        double r = ranges[static_cast<std::size_t>(a)];
        // Along the axis line through 0, Lf(Y e_a) >= x Y - f(x e_a); pick Y
        // already large enough to push the dual faces past face_exponent.
        double y_need = 0.0;
        std::array<int, 3> idx{0, 0, 0};
        for (int b = 0; b < f.dim(); ++b) idx[b] = f.axis(b).mid();
        double best = kInf;
        for (int i = f.axis(a).mid() + 1; i < f.axis(a).count; ++i) {
            idx[a] = i;
            double v = f.at(idx);
            if (v < kInf) best = std::min(best, (face_exponent + v) / f.axis(a).coord(i));
        }
        if (best < kInf) y_need = best;
        dual.emplace_back(std::max({r * 1.05, y_need, 1e-3}), nodes);
    }
    for (int round = 0;; ++round) {
        GridFunction lf = conjugate_nd(f, dual);
        bool ok = true;
        for (int a = 0; a < f.dim(); ++a) {
            // smallest Lf on the two faces of axis a
            double face_min = kInf;
            const std::size_t n = lf.size();
            for (std::size_t flat = 0; flat < n; ++flat) {
                auto idx = lf.multi_index(flat);
                if (idx[a] != 0 && idx[a] != lf.axis(a).count - 1) continue;
                face_min = std::min(face_min, lf.values()[flat]);
            }
            if (face_min < face_exponent) {
                dual[static_cast<std::size_t>(a)] =
                    AxisSpec(dual[static_cast<std::size_t>(a)].max_abs * 1.6, nodes);
                ok = false;
            }
        }
        if (ok || round >= 6) return {dual, std::move(lf)};
    }
}

GridFunction convexify(const GridFunction& f) {
    GridFunction cur = f;
    for (int pass = 0; pass < 16; ++pass) {
        bool changed = false;
        for (int a = 0; a < cur.dim(); ++a) {
            const int n = cur.axis(a).count;
            const std::size_t str = cur.stride(a);
            auto xs = axis_coords(cur.axis(a));
            std::vector<int> hull;
            for (std::size_t base : line_offsets(cur, a)) {
                double* line = cur.values().data() + base;
                hull.clear();
                for (int k = 0; k < n; ++k) {
                    double fk = line[static_cast<std::size_t>(k) * str];
                    if (fk == kInf) continue;
                    while (hull.size() >= 2) {
                        int i = hull[hull.size() - 2], j = hull[hull.size() - 1];
                        double fi = line[static_cast<std::size_t>(i) * str];
                        double fj = line[static_cast<std::size_t>(j) * str];
                        if ((fj - fi) * (xs[static_cast<std::size_t>(k)] - xs[static_cast<std::size_t>(i)]) >=
                            (fk - fi) * (xs[static_cast<std::size_t>(j)] - xs[static_cast<std::size_t>(i)]))
                            hull.pop_back();
                        else
                            break;
                    }
                    hull.push_back(k);
                }
                if (hull.size() < 2) continue;
                for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
                    int i = hull[h], j = hull[h + 1];
                    double fi = line[static_cast<std::size_t>(i) * str];
                    double fj = line[static_cast<std::size_t>(j) * str];
                    double slope = (fj - fi) / (xs[static_cast<std::size_t>(j)] - xs[static_cast<std::size_t>(i)]);
                    for (int k = i + 1; k < j; ++k) {
                        double v = fi + slope * (xs[static_cast<std::size_t>(k)] - xs[static_cast<std::size_t>(i)]);
                        double& slot = line[static_cast<std::size_t>(k) * str];
                        if (v < slot) {
                            slot = v;
                            changed = true;
                        }
                    }
                }
            }
        }
        if (!changed) break;
    }
    cur.refresh_even_flag();
    return cur;
}

GridFunction biconjugate(const GridFunction& f, int dual_nodes) {
    auto [dual, lf] = auto_conjugate(f, dual_nodes == 0 ? f.axis(0).count : dual_nodes);
    return conjugate_nd(lf, f.axes(), /*allow_clipping=*/true);
}

GridFunction inf_convolution(const GridFunction& f, const GridFunction& g,
                             const std::vector<AxisSpec>* out_axes, int dual_nodes) {
    if (f.dim() != g.dim()) throw GridError("inf_convolution: dim mismatch");
    int nodes = dual_nodes == 0 ? f.axis(0).count : dual_nodes;
    auto [df, lf_probe] = auto_conjugate(f, nodes);
    auto [dg, lg_probe] = auto_conjugate(g, nodes);
    (void)lf_probe;
    (void)lg_probe;
    DualGridSpec dual;
    for (int a = 0; a < f.dim(); ++a)
        dual.emplace_back(std::max(df[static_cast<std::size_t>(a)].max_abs,
                                   dg[static_cast<std::size_t>(a)].max_abs),
                          nodes);
    GridFunction lf = conjugate_nd(f, dual);
    GridFunction lg = conjugate_nd(g, dual);
    for (std::size_t i = 0; i < lf.size(); ++i) {
        double a = lf.values()[i], b = lg.values()[i];
        lf.values()[i] = (a == kInf || b == kInf) ? kInf : a + b;
    }
    const std::vector<AxisSpec>& out = out_axes ? *out_axes : f.axes();
    return conjugate_nd(lf, out, /*allow_clipping=*/true);
}

namespace {

// Moreau-type envelope of one sampled line:
// env(x_j) = min over z of (f(z) + alpha/2 (x_j - z)^2).
// The backbone is the lower envelope of the node-rooted parabolas (exact for
// arbitrary heights); when the line is discretely convex the minimum over
// the piecewise-linear interpolant is folded in as well, which removes the
// O(alpha h^2) lattice bias exactly where large alpha matters.
void envelope_line(const double* xs, const double* fs, int n, double alpha, double* out,
                   std::size_t stride_in, std::size_t stride_out) {
    thread_local std::vector<int> finite, hull;
    thread_local std::vector<double> cuts;
    finite.clear();
    for (int i = 0; i < n; ++i)
        if (fs[static_cast<std::size_t>(i) * stride_in] < kInf) finite.push_back(i);
    if (finite.empty()) {
        for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(j) * stride_out] = kInf;
        return;
    }
    auto F = [&](int i) { return fs[static_cast<std::size_t>(i) * stride_in]; };
    const double c = 0.5 * alpha;

    // lower envelope of parabolas F_k + c (x - x_k)^2 over the finite nodes
    hull.assign(finite.size(), 0);
    cuts.assign(finite.size() + 1, 0.0);
    int q = 0;
    hull[0] = finite[0];
    cuts[0] = -kInf;
    cuts[1] = kInf;
    auto cross = [&](int a, int b) {  // intersection of parabolas rooted at a < b
        return (F(b) - F(a)) / (2.0 * c * (xs[b] - xs[a])) + 0.5 * (xs[a] + xs[b]);
    };
    for (std::size_t t = 1; t < finite.size(); ++t) {
        int k = finite[t];
        double s = cross(hull[static_cast<std::size_t>(q)], k);
        while (q > 0 && s <= cuts[static_cast<std::size_t>(q)]) {
            --q;
            s = cross(hull[static_cast<std::size_t>(q)], k);
        }
        ++q;
        hull[static_cast<std::size_t>(q)] = k;
        cuts[static_cast<std::size_t>(q)] = s;
        cuts[static_cast<std::size_t>(q) + 1] = kInf;
    }

    const bool convex = [&] {
        for (std::size_t t = 2; t < finite.size(); ++t) {
            double s0 = (F(finite[t - 1]) - F(finite[t - 2])) /
                        (xs[finite[t - 1]] - xs[finite[t - 2]]);
            double s1 = (F(finite[t]) - F(finite[t - 1])) / (xs[finite[t]] - xs[finite[t - 1]]);
            if (s1 < s0 - 1e-9 * (1.0 + std::abs(s0))) return false;
        }
        return true;
    }();

    int p = 0;       // parabola-envelope pointer
    int seg = 0;     // segment pointer for the convex refinement
    const int lo = finite.front(), hi = finite.back();
    auto seg_slope = [&](int k) { return (F(k + 1) - F(k)) / (xs[k + 1] - xs[k]); };
    for (int j = 0; j < n; ++j) {
        double x = xs[j];
        while (cuts[static_cast<std::size_t>(p) + 1] < x) ++p;
        int k = hull[static_cast<std::size_t>(p)];
        double best = F(k) + c * (x - xs[k]) * (x - xs[k]);
        if (convex && lo < hi) {
            // interpolant minimum: walk the (nondecreasing) segment slopes
            while (seg < hi - lo - 1 && seg_slope(lo + seg) < alpha * (x - xs[lo + seg + 1]))
                ++seg;
            for (int d = -1; d <= 1; ++d) {
                int s = lo + seg + d;
                if (s < lo || s >= hi) continue;
                double sl = seg_slope(s);
                double z = x - sl / alpha;
                z = std::min(std::max(z, xs[s]), xs[s + 1]);
                double v = F(s) + sl * (z - xs[s]) + c * (x - z) * (x - z);
                best = std::min(best, v);
            }
        }
        out[static_cast<std::size_t>(j) * stride_out] = best;
    }
}

}  // namespace

GridFunction moreau_regularize(const GridFunction& f, double m) {
    if (!(m > 0.0)) throw GridError("moreau_regularize: m must be positive");
    if (f.finite_count() == 0)
        throw IntegrabilityError("moreau_regularize: empty domain");
    GridFunction cur = f;
    for (int a = 0; a < f.dim(); ++a) {
        GridFunction next = GridFunction::filled(cur.axes(), 0.0);
        auto xs = axis_coords(cur.axis(a));
        const std::size_t str = cur.stride(a);
        auto offs = line_offsets(cur, a);
        parallel_for(offs.size(), [&](std::size_t li) {
            envelope_line(xs.data(), cur.values().data() + offs[li], cur.axis(a).count, m,
                          next.values().data() + offs[li], str, str);
        });
        cur = std::move(next);
    }
    // Domains that are not lattice-aligned leave staircase ripples in the
    // envelope; the hull pass lowers them toward the true (convex) envelope
    // and never drops below it at the nodes.
    cur = convexify(cur);
    const std::size_t n = cur.size();
    // the target is even; pin the rounding asymmetry the sweeps leave behind
    for (std::size_t flat = 0; flat < n; ++flat) {
        auto idx = cur.multi_index(flat);
        std::array<int, 3> ridx{0, 0, 0};
        for (int a = 0; a < cur.dim(); ++a) ridx[a] = cur.axis(a).count - 1 - idx[a];
        std::size_t rflat = cur.index(ridx);
        if (rflat > flat) {
            double lo = std::min(cur.values()[flat], cur.values()[rflat]);
            cur.values()[flat] = lo;
            cur.values()[rflat] = lo;
        }
    }
    for (std::size_t flat = 0; flat < n; ++flat) {
        Vec x = cur.coords(cur.multi_index(flat));
        double q = 0.5 / m * dot(x, x, cur.dim());
        double& v = cur.values()[flat];
        if (v < kInf) v += q;
    }
    cur.refresh_even_flag();
    return cur;
}

GridFunction section_grid(const GridFunction& f, int axis) {
    if (f.dim() < 2) throw GridError("section_grid: dim must be >= 2");
    std::vector<AxisSpec> axes;
    for (int a = 0; a < f.dim(); ++a)
        if (a != axis) axes.push_back(f.axis(a));
    GridFunction out = GridFunction::filled(axes, 0.0);
    const std::size_t n = out.size();
    const int mid = f.axis(axis).mid();
    for (std::size_t flat = 0; flat < n; ++flat) {
        auto sub = out.multi_index(flat);
        std::array<int, 3> idx{0, 0, 0};
        int src = 0;
        for (int a = 0; a < f.dim(); ++a) idx[a] = (a == axis) ? mid : sub[src++];
        out.values()[flat] = f.at(idx);
    }
    out.refresh_even_flag();
    return out;
}

GridFunction project_grid(const GridFunction& f, int axis) {
    if (f.dim() < 2) throw GridError("project_grid: dim must be >= 2");
    std::vector<AxisSpec> axes;
    for (int a = 0; a < f.dim(); ++a)
        if (a != axis) axes.push_back(f.axis(a));
    GridFunction out = GridFunction::filled(axes, 0.0);
    const std::size_t n = out.size();
    const std::size_t str = f.stride(axis);
    for (std::size_t flat = 0; flat < n; ++flat) {
        auto sub = out.multi_index(flat);
        std::array<int, 3> idx{0, 0, 0};
        int src = 0;
        for (int a = 0; a < f.dim(); ++a) idx[a] = (a == axis) ? 0 : sub[src++];
        const double* line = f.values().data() + f.index(idx);
        double mn = kInf;
        for (int i = 0; i < f.axis(axis).count; ++i)
            mn = std::min(mn, line[static_cast<std::size_t>(i) * str]);
        out.values()[flat] = mn;
    }
    out.refresh_even_flag();
    return out;
}

Vec gradient(const GridFunction& f, const Vec& x) {
    Vec g{};
    for (int a = 0; a < f.dim(); ++a) {
        double h = f.axis(a).step();
        Vec xp = x, xm = x;
        xp[a] += h;
        xm[a] -= h;
        double vp = f.interpolate(xp), vm = f.interpolate(xm);
        if (vp == kInf || vm == kInf)
            throw GridError("gradient: point within one step of the domain boundary");
        g[a] = (vp - vm) / (2.0 * h);
    }
    return g;
}

bool gradient_cone_membership(const GridFunction& Lf, const Vec& y, const std::vector<int>& signs,
                              double tol) {
    Vec g = gradient(Lf, y);
    for (int a = 0; a < Lf.dim(); ++a)
        if (signs[static_cast<std::size_t>(a)] * g[a] < -tol) return false;
    return true;
}

GradientChart gradient_chart(const GridFunction& f, int axis, const std::vector<double>& samples,
                             int cert_stride) {
    if (f.dim() != 2) throw GridError("gradient_chart: 2D only");
    const int other = 1 - axis;
    GradientChart chart;
    chart.axis = axis;
    chart.samples = samples;
    std::size_t sample_index = 0;

    GridFunction sec = section_grid(f, axis);  // phi_i on e_i^perp (the other axis)
    const AxisSpec& ax = sec.axis(0);

    // derivative of the section at half-nodes: monotone for convex samples
    std::vector<double> mid(static_cast<std::size_t>(ax.count - 1)), dv(mid.size());
    std::vector<bool> ok(mid.size());
    for (int i = 0; i + 1 < ax.count; ++i) {
        double v0 = sec.values()[static_cast<std::size_t>(i)];
        double v1 = sec.values()[static_cast<std::size_t>(i + 1)];
        mid[static_cast<std::size_t>(i)] = 0.5 * (ax.coord(i) + ax.coord(i + 1));
        ok[static_cast<std::size_t>(i)] = v0 < kInf && v1 < kInf;
        dv[static_cast<std::size_t>(i)] = ok[static_cast<std::size_t>(i)] ? (v1 - v0) / ax.step() : 0.0;
    }

    for (double y : samples) {
        // invert the (piecewise-linear, monotone) derivative: find z with
        // d phi_i(z) = y by bisection over the finite range
        double lo = -ax.max_abs, hi = ax.max_abs;
        {
            // restrict to the finite block, two steps clear of its ends so
            // the full gradient below stays evaluable
            int first = -1, last = -1;
            for (std::size_t i = 0; i < ok.size(); ++i)
                if (ok[i]) {
                    if (first < 0) first = static_cast<int>(i);
                    last = static_cast<int>(i);
                }
            if (first < 0) throw GridError("gradient_chart: empty section");
            lo = mid[static_cast<std::size_t>(first)] + 2.0 * ax.step();
            hi = mid[static_cast<std::size_t>(last)] - 2.0 * ax.step();
            if (!(lo < hi)) throw GridError("gradient_chart: section domain too narrow");
        }
        auto deriv = [&](double z) {
            // linear interpolation of half-node slopes
            if (z <= mid.front()) return dv.front();
            if (z >= mid.back()) return dv.back();
            double t = (z - mid.front()) / ax.step();
            int i = static_cast<int>(std::floor(t));
            if (i >= static_cast<int>(mid.size()) - 1) i = static_cast<int>(mid.size()) - 2;
            double frac = t - i;
            return (1.0 - frac) * dv[static_cast<std::size_t>(i)] + frac * dv[static_cast<std::size_t>(i + 1)];
        };
        int iter = 0;
        double flo = deriv(lo) - y, fhi = deriv(hi) - y;
        double z;
        if (flo >= 0.0)
            z = lo;
        else if (fhi <= 0.0)
            z = hi;
        else {
            double a = lo, b = hi;
            z = 0.5 * (a + b);
            while (b - a > 1e-10 && iter++ < 200) {
                z = 0.5 * (a + b);
                if (deriv(z) - y > 0.0)
                    b = z;
                else
                    a = z;
            }
            if (iter >= 200) throw ConvergenceError("gradient_chart: bisection stalled");
        }
        chart.inverse_pts.push_back(z);

        Vec zpt{};
        zpt[other] = z;
        Vec grad = gradient(f, zpt);
        double t_i = grad[axis];
        chart.t_values.push_back(t_i);

        // certification: Lphi(y + t_i e_i) = L(phi_i)(y)
        if (sample_index++ % static_cast<std::size_t>(cert_stride) == 0) {
            Vec ypt{};
            ypt[other] = y;
            ypt[axis] = t_i;
            double full = conjugate_at_point(f, ypt, /*refined=*/true);
            Vec ysec{};
            ysec[0] = y;
            double secv = conjugate_at_point(sec, ysec, /*refined=*/true);
            chart.max_cert_residual = std::max(chart.max_cert_residual, std::abs(full - secv));
        }
    }
    return chart;
}

}  // namespace mahler
