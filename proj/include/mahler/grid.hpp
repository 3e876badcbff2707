#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mahler/errors.hpp"
#include "mahler/geometry.hpp"

namespace mahler {

// Extended reals: finite doubles plus +infinity. NaN and -infinity are
// rejected at every construction point. e^{-inf} = 0 and c + inf = inf come
// for free from IEEE arithmetic.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_extended(double v) { return !std::isnan(v) && v != -kInf; }

inline void require_extended(double v) {
    if (!is_extended(v)) throw GridError("value must be finite or +inf");
}

// Uniform symmetric axis: nodes (i - mid) * step for i in [0, count), so 0 is
// always the middle node and coord(-i) == -coord(i) exactly.
struct AxisSpec {
    double max_abs = 1.0;
    int count = 3;

    AxisSpec() = default;
    AxisSpec(double max_abs_, int count_) : max_abs(max_abs_), count(count_) {
        if (!(max_abs > 0.0) || !std::isfinite(max_abs))
            throw GridError("AxisSpec: max_abs must be positive finite");
        if (count < 3 || count % 2 == 0)
            throw GridError("AxisSpec: count must be odd and >= 3");
    }

    int mid() const { return (count - 1) / 2; }
    double step() const { return max_abs / mid(); }
    double coord(int i) const { return (i - mid()) * step(); }
    bool operator==(const AxisSpec& o) const {
        return max_abs == o.max_abs && count == o.count;
    }
};

// Extended-real samples of a function on a uniform, zero-centered box grid.
// Row-major: axis 0 is the slowest index.
class GridFunction {
  public:
    GridFunction(std::vector<AxisSpec> axes, std::vector<double> values)
        : axes_(std::move(axes)), values_(std::move(values)) {
        if (axes_.empty() || axes_.size() > 3) throw GridError("GridFunction: dim must be 1..3");
        std::size_t n = 1;
        for (const auto& a : axes_) n *= static_cast<std::size_t>(a.count);
        if (values_.size() != n) throw GridError("GridFunction: value count mismatch");
        for (double v : values_) require_extended(v);
        compute_strides();
        even_flag_ = check_even();
    }

    static GridFunction filled(std::vector<AxisSpec> axes, double v) {
        std::size_t n = 1;
        for (const auto& a : axes) n *= static_cast<std::size_t>(a.count);
        return GridFunction(std::move(axes), std::vector<double>(n, v));
    }

    int dim() const { return static_cast<int>(axes_.size()); }
    const AxisSpec& axis(int i) const { return axes_[static_cast<std::size_t>(i)]; }
    const std::vector<AxisSpec>& axes() const { return axes_; }
    std::size_t size() const { return values_.size(); }
    std::size_t stride(int i) const { return strides_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    bool even_flag() const { return even_flag_; }
    void refresh_even_flag() { even_flag_ = check_even(); }

    std::size_t index(const std::array<int, 3>& idx) const {
        std::size_t r = 0;
        for (int a = 0; a < dim(); ++a) r += static_cast<std::size_t>(idx[a]) * strides_[a];
        return r;
    }

    std::array<int, 3> multi_index(std::size_t flat) const {
        std::array<int, 3> idx{0, 0, 0};
        for (int a = 0; a < dim(); ++a) {
            idx[a] = static_cast<int>(flat / strides_[a]);
            flat %= strides_[a];
        }
        return idx;
    }

    double at(const std::array<int, 3>& idx) const { return values_[index(idx)]; }
    double& at(const std::array<int, 3>& idx) { return values_[index(idx)]; }

    Vec coords(const std::array<int, 3>& idx) const {
        Vec p{};
        for (int a = 0; a < dim(); ++a) p[a] = axes_[a].coord(idx[a]);
        return p;
    }

    std::size_t finite_count() const {
        std::size_t n = 0;
        for (double v : values_)
            if (v < kInf) ++n;
        return n;
    }

    // Along every axis line the finite nodes must form one contiguous block.
    bool domain_contiguous() const;

    // Multilinear interpolation over cells whose corners are all finite;
    // +inf outside the box or touching an infinite corner.
    double interpolate(const Vec& x) const;

    void save(const std::string& path) const;
    static GridFunction load(const std::string& path);

  private:
    void compute_strides() {
        strides_.assign(axes_.size(), 1);
        for (int a = dim() - 2; a >= 0; --a)
            strides_[a] = strides_[a + 1] * static_cast<std::size_t>(axes_[a + 1].count);
    }

    bool check_even() const {
        std::array<int, 3> idx{0, 0, 0};
        const std::size_t n = size();
        for (std::size_t flat = 0; flat < n; ++flat) {
            idx = multi_index(flat);
            std::array<int, 3> ridx{0, 0, 0};
            for (int a = 0; a < dim(); ++a) ridx[a] = axes_[a].count - 1 - idx[a];
            double v = values_[flat];
            double rv = values_[index(ridx)];
            if (v != rv && !(v == kInf && rv == kInf)) return false;
        }
        return true;
    }

    std::vector<AxisSpec> axes_;
    std::vector<double> values_;
    std::vector<std::size_t> strides_;
    bool even_flag_ = false;
};

}  // namespace mahler
