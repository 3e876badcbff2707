#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "mahler/errors.hpp"

namespace mahler {

// Points live in R^1..R^3; unused trailing components stay 0 so the same
// array type serves every dimension.
using Vec = std::array<double, 3>;

inline Vec vec1(double x) { return {x, 0.0, 0.0}; }
inline Vec vec2(double x, double y) { return {x, y, 0.0}; }
inline Vec vec3(double x, double y, double z) { return {x, y, z}; }

inline double dot(const Vec& a, const Vec& b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a, int dim) { return std::sqrt(dot(a, a, dim)); }

inline Vec scaled(const Vec& a, double t) { return {a[0] * t, a[1] * t, a[2] * t}; }

inline Vec negated(const Vec& a) { return {-a[0], -a[1], -a[2]}; }

inline double cross2(const Vec& a, const Vec& b) { return a[0] * b[1] - a[1] * b[0]; }

inline Vec unit_at_angle(double theta) { return {std::cos(theta), std::sin(theta), 0.0}; }

inline double angle_of(const Vec& v) { return std::atan2(v[1], v[0]); }

// Invertible n x n linear map with cached determinant and inverse.
class LinearMap {
  public:
    LinearMap() : dim_(2) { set_identity(); }

    LinearMap(int dim, const std::array<double, 9>& entries) : dim_(dim), m_(entries) {
        if (dim < 1 || dim > 3) throw GridError("LinearMap: dim must be 1..3");
        compute_inverse();
    }

    static LinearMap identity(int dim) {
        LinearMap t;
        t.dim_ = dim;
        t.set_identity();
        return t;
    }

    static LinearMap diagonal(int dim, const Vec& d) {
        std::array<double, 9> e{};
        for (int i = 0; i < dim; ++i) e[i * dim + i] = d[i];
        return LinearMap(dim, e);
    }

    static LinearMap scaling(int dim, double s) { return diagonal(dim, {s, s, s}); }

    static LinearMap rotation2d(double theta) {
        double c = std::cos(theta), s = std::sin(theta);
        return mat2(c, -s, s, c);
    }

    // row-major 2x2
    static LinearMap mat2(double a, double b, double c, double d) {
        return LinearMap(2, {a, b, c, d, 0, 0, 0, 0, 0});
    }

    // Columns are the images of e_1..e_n.
    static LinearMap from_columns(int dim, const std::vector<Vec>& cols) {
        std::array<double, 9> e{};
        for (int j = 0; j < dim; ++j)
            for (int i = 0; i < dim; ++i) e[i * dim + j] = cols[j][i];
        return LinearMap(dim, e);
    }

    int dim() const { return dim_; }
    double det() const { return det_; }
    double entry(int i, int j) const { return m_[i * dim_ + j]; }
    double inverse_entry(int i, int j) const { return inv_[i * dim_ + j]; }

    Vec apply(const Vec& x) const { return mat_apply(m_, x); }
    Vec apply_inverse(const Vec& x) const { return mat_apply(inv_, x); }

    // (T^{-1})^*, the adjoint of the inverse: used by L(phi o T) = L(phi) o (T^{-1})^*.
    Vec apply_inverse_transpose(const Vec& y) const {
        Vec r{};
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) r[i] += inv_[j * dim_ + i] * y[j];
        return r;
    }

    Vec column(int j) const {
        Vec c{};
        for (int i = 0; i < dim_; ++i) c[i] = m_[i * dim_ + j];
        return c;
    }

    LinearMap inverse() const {
        LinearMap t;
        t.dim_ = dim_;
        t.m_ = inv_;
        t.compute_inverse();
        return t;
    }

    LinearMap transpose() const {
        std::array<double, 9> e{};
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) e[i * dim_ + j] = m_[j * dim_ + i];
        return LinearMap(dim_, e);
    }

    LinearMap inverse_transpose() const { return inverse().transpose(); }

    // this * other (apply other first).
    LinearMap compose(const LinearMap& other) const {
        std::array<double, 9> e{};
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) {
                double s = 0.0;
                for (int k = 0; k < dim_; ++k) s += entry(i, k) * other.entry(k, j);
                e[i * dim_ + j] = s;
            }
        return LinearMap(dim_, e);
    }

    // Largest column 2-norm; the bound used for T_m(B_1^n) containment.
    double max_column_norm() const {
        double r = 0.0;
        for (int j = 0; j < dim_; ++j) r = std::max(r, norm2(column(j), dim_));
        return r;
    }

    double max_abs_entry_diff(const LinearMap& other) const {
        double r = 0.0;
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j)
                r = std::max(r, std::abs(entry(i, j) - other.entry(i, j)));
        return r;
    }

  private:
    Vec mat_apply(const std::array<double, 9>& a, const Vec& x) const {
        Vec r{};
        for (int i = 0; i < dim_; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim_; ++j) s += a[i * dim_ + j] * x[j];
            r[i] = s;
        }
        return r;
    }

    void set_identity() {
        m_.fill(0.0);
        inv_.fill(0.0);
        for (int i = 0; i < dim_; ++i) m_[i * dim_ + i] = inv_[i * dim_ + i] = 1.0;
        det_ = 1.0;
    }

    void compute_inverse() {
        if (dim_ == 1) {
            det_ = m_[0];
            if (det_ == 0.0) throw GridError("LinearMap: singular");
            inv_[0] = 1.0 / det_;
        } else if (dim_ == 2) {
            det_ = m_[0] * m_[3] - m_[1] * m_[2];
            if (det_ == 0.0) throw GridError("LinearMap: singular");
            double id = 1.0 / det_;
            inv_[0] = m_[3] * id;
            inv_[1] = -m_[1] * id;
            inv_[2] = -m_[2] * id;
            inv_[3] = m_[0] * id;
        } else {
            auto at = [&](int i, int j) { return m_[i * 3 + j]; };
            double c00 = at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1);
            double c01 = at(1, 2) * at(2, 0) - at(1, 0) * at(2, 2);
            double c02 = at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0);
            det_ = at(0, 0) * c00 + at(0, 1) * c01 + at(0, 2) * c02;
            if (det_ == 0.0) throw GridError("LinearMap: singular");
            double id = 1.0 / det_;
            inv_[0] = c00 * id;
            inv_[3] = c01 * id;
            inv_[6] = c02 * id;
            inv_[1] = (at(0, 2) * at(2, 1) - at(0, 1) * at(2, 2)) * id;
            inv_[4] = (at(0, 0) * at(2, 2) - at(0, 2) * at(2, 0)) * id;
            inv_[7] = (at(0, 1) * at(2, 0) - at(0, 0) * at(2, 1)) * id;
            inv_[2] = (at(0, 1) * at(1, 2) - at(0, 2) * at(1, 1)) * id;
            inv_[5] = (at(0, 2) * at(1, 0) - at(0, 0) * at(1, 2)) * id;
            inv_[8] = (at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0)) * id;
        }
    }

    int dim_;
    std::array<double, 9> m_{};
    std::array<double, 9> inv_{};
    double det_ = 1.0;
};

// Integration domain: the whole space, a coordinate orthant R^n_eps, or a
// 2D cone C_{u,v} = R_+ u + R_+ v with v in the open half-circle after u.
class ConeRegion {
  public:
    enum class Kind { Whole, Orthant, Wedge };

    static ConeRegion whole(int dim) {
        ConeRegion r;
        r.kind_ = Kind::Whole;
        r.dim_ = dim;
        return r;
    }

    static ConeRegion orthant(const std::vector<int>& signs) {
        ConeRegion r;
        r.kind_ = Kind::Orthant;
        r.dim_ = static_cast<int>(signs.size());
        for (int i = 0; i < r.dim_; ++i) {
            if (signs[i] != 1 && signs[i] != -1)
                throw GridError("ConeRegion: orthant signs must be +-1");
            r.signs_[i] = signs[i];
        }
        return r;
    }

    static ConeRegion positive_orthant(int dim) {
        return orthant(std::vector<int>(dim, 1));
    }

    static ConeRegion wedge(const Vec& u, const Vec& v) {
        ConeRegion r;
        r.kind_ = Kind::Wedge;
        r.dim_ = 2;
        if (cross2(u, v) <= 0.0)
            throw GridError("ConeRegion: wedge needs positively oriented (u,v)");
        r.u_ = u;
        r.v_ = v;
        return r;
    }

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    int sign(int i) const { return signs_[i]; }
    const Vec& u() const { return u_; }
    const Vec& v() const { return v_; }

    bool contains(const Vec& x, double tol = 0.0) const {
        switch (kind_) {
            case Kind::Whole:
                return true;
            case Kind::Orthant:
                for (int i = 0; i < dim_; ++i)
                    if (signs_[i] * x[i] < -tol) return false;
                return true;
            case Kind::Wedge:
                return cross2(u_, x) >= -tol && cross2(x, v_) >= -tol;
        }
        return false;
    }

    ConeRegion reflected() const {
        switch (kind_) {
            case Kind::Whole:
                return *this;
            case Kind::Orthant: {
                std::vector<int> s(dim_);
                for (int i = 0; i < dim_; ++i) s[i] = -signs_[i];
                return orthant(s);
            }
            case Kind::Wedge:
                return wedge(negated(u_), negated(v_));
        }
        return *this;
    }

    // All 2^n orthants, in lexicographic sign order (+ first).
    static std::vector<ConeRegion> all_orthants(int dim) {
        std::vector<ConeRegion> out;
        int count = 1 << dim;
        for (int mask = 0; mask < count; ++mask) {
            std::vector<int> s(dim);
            for (int i = 0; i < dim; ++i) s[i] = (mask >> i) & 1 ? -1 : 1;
            out.push_back(orthant(s));
        }
        return out;
    }

    std::string describe() const {
        switch (kind_) {
            case Kind::Whole:
                return "R^" + std::to_string(dim_);
            case Kind::Orthant: {
                std::string s = "orthant(";
                for (int i = 0; i < dim_; ++i) s += signs_[i] > 0 ? '+' : '-';
                return s + ")";
            }
            case Kind::Wedge:
                return "wedge(" + std::to_string(angle_of(u_)) + "," +
                       std::to_string(angle_of(v_)) + ")";
        }
        return "?";
    }

  private:
    Kind kind_ = Kind::Whole;
    int dim_ = 2;
    std::array<int, 3> signs_{1, 1, 1};
    Vec u_{1, 0, 0};
    Vec v_{0, 1, 0};
};

}  // namespace mahler
