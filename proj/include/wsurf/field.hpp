#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace wsurf {

/// Dense n0 x n1 array stored row-major in the first index.
template <class T>
class Array2D {
public:
    Array2D() = default;
    Array2D(int n0, int n1, const T& fill = T{}) : n0_(n0), n1_(n1), data_(std::size_t(n0) * std::size_t(n1), fill) {}

    int n0() const noexcept { return n0_; }
    int n1() const noexcept { return n1_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t size() const noexcept { return data_.size(); }

    T& operator()(int i, int j) { return data_[std::size_t(i) * std::size_t(n1_) + std::size_t(j)]; }
    const T& operator()(int i, int j) const { return data_[std::size_t(i) * std::size_t(n1_) + std::size_t(j)]; }

    std::vector<T>& data() noexcept { return data_; }
    const std::vector<T>& data() const noexcept { return data_; }

    template <class F>
    auto map(F&& fn) const {
        using R = decltype(fn(std::declval<const T&>()));
        Array2D<R> out(n0_, n1_);
        for (std::size_t k = 0; k < data_.size(); ++k) out.data()[k] = fn(data_[k]);
        return out;
    }

private:
    int n0_ = 0;
    int n1_ = 0;
    std::vector<T> data_;
};

using Scalar2D = Array2D<double>;

/// Uniform rectangular parameter grid. Index i runs along the first
/// parameter (u or x), index j along the second (v or y).
struct GridSpec {
    int n0 = 0;
    int n1 = 0;
    double x0 = 0.0;
    double y0 = 0.0;
    double h0 = 0.0;
    double h1 = 0.0;

    double x(int i) const noexcept { return x0 + i * h0; }
    double y(int j) const noexcept { return y0 + j * h1; }
    double x_max() const noexcept { return x(n0 - 1); }
    double y_max() const noexcept { return y(n1 - 1); }

    void validate(int min_nodes = 5) const {
        if (n0 < min_nodes || n1 < min_nodes)
            throw DomainError("grid needs at least " + std::to_string(min_nodes) + " nodes per direction, got " +
                              std::to_string(n0) + "x" + std::to_string(n1));
        if (!(h0 > 0.0) || !(h1 > 0.0) || !std::isfinite(h0) || !std::isfinite(h1))
            throw DomainError("grid spacings must be positive and finite");
    }

    bool operator==(const GridSpec&) const = default;
};

/// Grid with n nodes per side spanning [a0,b0] x [a1,b1].
inline GridSpec span_grid(int n0, int n1, double a0, double b0, double a1, double b1) {
    GridSpec g{n0, n1, a0, a1, (b0 - a0) / (n0 - 1), (b1 - a1) / (n1 - 1)};
    g.validate();
    return g;
}

/// Scalar field on a uniform grid (x along index i, y along index j).
struct ScalarField2D {
    GridSpec grid;
    Scalar2D values;

    ScalarField2D() = default;
    ScalarField2D(GridSpec g, Scalar2D v) : grid(g), values(std::move(v)) {
        grid.validate();
        if (values.n0() != grid.n0 || values.n1() != grid.n1) throw DomainError("field values do not match grid size");
    }
    explicit ScalarField2D(GridSpec g, double fill = 0.0) : ScalarField2D(g, Scalar2D(g.n0, g.n1, fill)) {}

    template <class F>
    static ScalarField2D sample(const GridSpec& g, F&& fn) {
        ScalarField2D out(g);
        for (int i = 0; i < g.n0; ++i)
            for (int j = 0; j < g.n1; ++j) out.values(i, j) = fn(g.x(i), g.y(j));
        return out;
    }

    double& operator()(int i, int j) { return values(i, j); }
    double operator()(int i, int j) const { return values(i, j); }
    bool on_boundary(int i, int j) const { return i == 0 || j == 0 || i == grid.n0 - 1 || j == grid.n1 - 1; }
};

/// Geometric function nu on a (u,v) grid.
using NuField = ScalarField2D;

struct ResidualField {
    Scalar2D values;
    double maxAbs = 0.0;
    double l2 = 0.0;
    int margin = 1;

    /// Summaries over nodes at least `margin` away from the boundary.
    /// l2 is the root mean square over the same nodes.
    static ResidualField from(Scalar2D v, int margin = 1) {
        ResidualField r;
        r.margin = margin;
        double sum = 0.0;
        long count = 0;
        for (int i = margin; i < v.n0() - margin; ++i)
            for (int j = margin; j < v.n1() - margin; ++j) {
                double a = std::abs(v(i, j));
                if (std::isnan(a)) a = INFINITY;
                r.maxAbs = std::max(r.maxAbs, a);
                sum += v(i, j) * v(i, j);
                ++count;
            }
        r.l2 = count ? std::sqrt(sum / double(count)) : 0.0;
        r.values = std::move(v);
        return r;
    }
};

namespace fd {

/// First derivative along axis 0 or 1: central in the interior,
/// second-order one-sided at the two ends.
template <class T>
Array2D<T> d1(const Array2D<T>& f, int axis, double h) {
    const int n0 = f.n0(), n1 = f.n1();
    Array2D<T> out(n0, n1);
    const int n = axis == 0 ? n0 : n1;
    auto at = [&](int i, int j, int k) -> const T& { return axis == 0 ? f(k, j) : f(i, k); };
    for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n1; ++j) {
            int k = axis == 0 ? i : j;
            T v;
            if (k == 0)
                v = (-3.0 * at(i, j, 0) + 4.0 * at(i, j, 1) - at(i, j, 2)) / (2.0 * h);
            else if (k == n - 1)
                v = (3.0 * at(i, j, n - 1) - 4.0 * at(i, j, n - 2) + at(i, j, n - 3)) / (2.0 * h);
            else
                v = (at(i, j, k + 1) - at(i, j, k - 1)) / (2.0 * h);
            out(i, j) = v;
        }
    return out;
}

/// Second derivative along one axis; one-sided (2,-5,4,-1) stencil at the ends.
template <class T>
Array2D<T> d2(const Array2D<T>& f, int axis, double h) {
    const int n0 = f.n0(), n1 = f.n1();
    Array2D<T> out(n0, n1);
    const int n = axis == 0 ? n0 : n1;
    const double h2 = h * h;
    auto at = [&](int i, int j, int k) -> const T& { return axis == 0 ? f(k, j) : f(i, k); };
    for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n1; ++j) {
            int k = axis == 0 ? i : j;
            T v;
            if (k == 0)
                v = (2.0 * at(i, j, 0) - 5.0 * at(i, j, 1) + 4.0 * at(i, j, 2) - at(i, j, 3)) / h2;
            else if (k == n - 1)
                v = (2.0 * at(i, j, n - 1) - 5.0 * at(i, j, n - 2) + 4.0 * at(i, j, n - 3) - at(i, j, n - 4)) / h2;
            else
                v = (at(i, j, k + 1) - 2.0 * at(i, j, k) + at(i, j, k - 1)) / h2;
            out(i, j) = v;
        }
    return out;
}

/// Mixed derivative as d1 along axis 1 of d1 along axis 0.
template <class T>
Array2D<T> d11(const Array2D<T>& f, double h0, double h1) {
    return d1(d1(f, 0, h0), 1, h1);
}

/// Central second-difference weights of accuracy order 2, 4 or 6.
inline std::vector<double> central_d2_weights(int order) {
    switch (order) {
    case 2: return {1.0, -2.0, 1.0};
    case 4: return {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12};
    case 6: return {1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90};
    default: throw UsageError("stencil order must be 2, 4 or 6");
    }
}

/// Central second difference of a given order at node (i,j). Caller
/// guarantees the stencil fits.
inline double central_d2_at(const Scalar2D& f, int axis, double h, int i, int j, const std::vector<double>& w) {
    const int half = int(w.size()) / 2;
    double s = 0.0;
    for (int k = -half; k <= half; ++k) s += w[std::size_t(k + half)] * (axis == 0 ? f(i + k, j) : f(i, j + k));
    return s / (h * h);
}

} // namespace fd

} // namespace wsurf
