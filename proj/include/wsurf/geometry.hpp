#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "field.hpp"

namespace wsurf {

using Vec3 = Eigen::Vector3d;

/// Discrete parametric surface z(u,v) sampled on a uniform grid.
/// Index i follows u, index j follows v.
class SurfaceGrid {
public:
    SurfaceGrid() = default;
    SurfaceGrid(GridSpec spec, Array2D<Vec3> points) : spec_(spec), points_(std::move(points)) {
        spec_.validate();
        if (points_.n0() != spec_.n0 || points_.n1() != spec_.n1)
            throw DomainError("point array does not match grid size");
    }

    const GridSpec& spec() const noexcept { return spec_; }
    int nu() const noexcept { return spec_.n0; }
    int nv() const noexcept { return spec_.n1; }
    double u(int i) const noexcept { return spec_.x(i); }
    double v(int j) const noexcept { return spec_.y(j); }
    const Array2D<Vec3>& points() const noexcept { return points_; }
    Array2D<Vec3>& points() noexcept { return points_; }
    const Vec3& operator()(int i, int j) const { return points_(i, j); }

    /// Grid sampled from a callable z(u,v).
    template <class F>
    static SurfaceGrid sample(const GridSpec& spec, F&& z) {
        spec.validate();
        Array2D<Vec3> pts(spec.n0, spec.n1);
        for (int i = 0; i < spec.n0; ++i)
            for (int j = 0; j < spec.n1; ++j) pts(i, j) = z(spec.x(i), spec.y(j));
        return SurfaceGrid(spec, std::move(pts));
    }

    /// Same surface with the roles of u and v exchanged.
    SurfaceGrid transposed() const {
        GridSpec t{spec_.n1, spec_.n0, spec_.y0, spec_.x0, spec_.h1, spec_.h0};
        Array2D<Vec3> pts(t.n0, t.n1);
        for (int i = 0; i < t.n0; ++i)
            for (int j = 0; j < t.n1; ++j) pts(i, j) = points_(j, i);
        return SurfaceGrid(t, std::move(pts));
    }

    /// Largest bounding-box side, used as the length scale of the grid.
    double extent() const {
        Vec3 lo = points_(0, 0), hi = lo;
        for (const auto& p : points_.data()) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        return (hi - lo).maxCoeff();
    }

private:
    GridSpec spec_;
    Array2D<Vec3> points_;
};

struct FormField {
    GridSpec spec;
    Scalar2D E, F, G;
    Scalar2D L, M, N;
    Array2D<Vec3> normal;
    bool flipped = false;
};

struct CurvatureField {
    GridSpec spec;
    Scalar2D nu1, nu2;
    Scalar2D gamma1, gamma2;
    Scalar2D K, H, Hprime;
    Scalar2D rho1, rho2;
};

struct GeometryOptions {
    double eps_regular = 1e-10;
    double tol_principal = 1e-6;
    double tol_umbilic = 1e-8;
    /// Skip umbilic and ordering checks (used for umbilic scans).
    bool allow_umbilics = false;
};

namespace detail {

struct Derivatives {
    Array2D<Vec3> zu, zv;
};

inline Derivatives tangents(const SurfaceGrid& grid) {
    return {fd::d1(grid.points(), 0, grid.spec().h0), fd::d1(grid.points(), 1, grid.spec().h1)};
}

inline void fill_first(FormField& ff, const Derivatives& d, double eps_regular) {
    const int n0 = ff.spec.n0, n1 = ff.spec.n1;
    ff.E = Scalar2D(n0, n1);
    ff.F = Scalar2D(n0, n1);
    ff.G = Scalar2D(n0, n1);
    for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n1; ++j) {
            const Vec3& a = d.zu(i, j);
            const Vec3& b = d.zv(i, j);
            ff.E(i, j) = a.dot(a);
            ff.F(i, j) = a.dot(b);
            ff.G(i, j) = b.dot(b);
            const double det = ff.E(i, j) * ff.G(i, j) - ff.F(i, j) * ff.F(i, j);
            if (!(det > 0.0) || a.cross(b).norm() <= eps_regular)
                throw RegularityError("z_u x z_v degenerate at node (" + std::to_string(i) + "," + std::to_string(j) + ")");
        }
}

} // namespace detail

/// E, F, G of a grid by second-order differences.
inline FormField first_fundamental_form(const SurfaceGrid& grid, const GeometryOptions& opt = {}) {
    FormField ff;
    ff.spec = grid.spec();
    detail::fill_first(ff, detail::tangents(grid), opt.eps_regular);
    return ff;
}

/// Both fundamental forms and the unit normal. The normal is flipped
/// globally when L/E - N/G is negative everywhere, so that the
/// u-direction curvature is the larger one.
inline FormField second_fundamental_form(const SurfaceGrid& grid, const GeometryOptions& opt = {}) {
    FormField ff;
    ff.spec = grid.spec();
    const auto d = detail::tangents(grid);
    detail::fill_first(ff, d, opt.eps_regular);

    const GridSpec& s = grid.spec();
    const auto zuu = fd::d2(grid.points(), 0, s.h0);
    const auto zvv = fd::d2(grid.points(), 1, s.h1);
    const auto zuv = fd::d1(d.zu, 1, s.h1);

    ff.L = Scalar2D(s.n0, s.n1);
    ff.M = Scalar2D(s.n0, s.n1);
    ff.N = Scalar2D(s.n0, s.n1);
    ff.normal = Array2D<Vec3>(s.n0, s.n1);
    int pos = 0, neg = 0;
    double scale = 0.0;
    for (int i = 0; i < s.n0; ++i)
        for (int j = 0; j < s.n1; ++j) {
            Vec3 l = d.zu(i, j).cross(d.zv(i, j)).normalized();
            ff.normal(i, j) = l;
            ff.L(i, j) = zuu(i, j).dot(l);
            ff.M(i, j) = zuv(i, j).dot(l);
            ff.N(i, j) = zvv(i, j).dot(l);
            const double k1 = ff.L(i, j) / ff.E(i, j), k2 = ff.N(i, j) / ff.G(i, j);
            scale = std::max({scale, std::abs(k1), std::abs(k2)});
        }
    const double zero = 1e-12 * std::max(scale, 1e-300);
    for (int i = 0; i < s.n0; ++i)
        for (int j = 0; j < s.n1; ++j) {
            const double diff = ff.L(i, j) / ff.E(i, j) - ff.N(i, j) / ff.G(i, j);
            if (diff > zero) ++pos;
            else if (diff < -zero) ++neg;
        }
    if (pos > 0 && neg > 0 && !opt.allow_umbilics)
        throw UmbilicError("curvature ordering changes sign across the grid");
    if (neg > pos) {
        ff.flipped = true;
        for (auto& x : ff.L.data()) x = -x;
        for (auto& x : ff.M.data()) x = -x;
        for (auto& x : ff.N.data()) x = -x;
        for (auto& x : ff.normal.data()) x = -x;
    }
    return ff;
}

/// Principal curvatures, principal geodesic curvatures and invariants.
inline CurvatureField curvature_field(FormField forms, const GeometryOptions& opt = {}) {
    const GridSpec& s = forms.spec;
    // Interior nodes only: one-sided boundary stencils leave O(h^2) in F, M.
    double maxEG = 0.0, maxF = 0.0, maxLN = 0.0, maxM = 0.0;
    for (int i = 1; i < s.n0 - 1; ++i)
        for (int j = 1; j < s.n1 - 1; ++j) {
            maxEG = std::max({maxEG, forms.E(i, j), forms.G(i, j)});
            maxF = std::max(maxF, std::abs(forms.F(i, j)));
            maxLN = std::max({maxLN, std::abs(forms.L(i, j)), std::abs(forms.N(i, j))});
            maxM = std::max(maxM, std::abs(forms.M(i, j)));
        }
    if (maxF > opt.tol_principal * maxEG)
        throw NotPrincipalError("max|F| = " + std::to_string(maxF) + " exceeds tolerance");
    if (maxM > opt.tol_principal * std::max(maxLN, 1e-300) && maxM > 1e-300)
        throw NotPrincipalError("max|M| = " + std::to_string(maxM) + " exceeds tolerance");

    CurvatureField cf;
    cf.spec = s;
    cf.nu1 = Scalar2D(s.n0, s.n1);
    cf.nu2 = Scalar2D(s.n0, s.n1);
    for (int i = 0; i < s.n0; ++i)
        for (int j = 0; j < s.n1; ++j) {
            cf.nu1(i, j) = forms.L(i, j) / forms.E(i, j);
            cf.nu2(i, j) = forms.N(i, j) / forms.G(i, j);
        }

    // Forms built by hand may still carry the unnormalized orientation.
    bool all_negative = true;
    for (std::size_t k = 0; k < cf.nu1.size(); ++k)
        if (cf.nu1.data()[k] - cf.nu2.data()[k] >= 0.0) all_negative = false;
    if (all_negative) {
        for (auto& x : cf.nu1.data()) x = -x;
        for (auto& x : cf.nu2.data()) x = -x;
    }

    if (!opt.allow_umbilics)
        for (int i = 0; i < s.n0; ++i)
            for (int j = 0; j < s.n1; ++j)
                if (!(cf.nu1(i, j) - cf.nu2(i, j) >= opt.tol_umbilic))
                    throw UmbilicError("nu1 - nu2 = " + std::to_string(cf.nu1(i, j) - cf.nu2(i, j)) + " at node (" +
                                       std::to_string(i) + "," + std::to_string(j) + ")");

    const auto Ev = fd::d1(forms.E, 1, s.h1);
    const auto Gu = fd::d1(forms.G, 0, s.h0);
    cf.gamma1 = Scalar2D(s.n0, s.n1);
    cf.gamma2 = Scalar2D(s.n0, s.n1);
    cf.K = Scalar2D(s.n0, s.n1);
    cf.H = Scalar2D(s.n0, s.n1);
    cf.Hprime = Scalar2D(s.n0, s.n1);
    cf.rho1 = Scalar2D(s.n0, s.n1);
    cf.rho2 = Scalar2D(s.n0, s.n1);
    for (int i = 0; i < s.n0; ++i)
        for (int j = 0; j < s.n1; ++j) {
            const double E = forms.E(i, j), G = forms.G(i, j);
            const double n1 = cf.nu1(i, j), n2 = cf.nu2(i, j);
            cf.gamma1(i, j) = -Ev(i, j) / (2.0 * E * std::sqrt(G));
            cf.gamma2(i, j) = Gu(i, j) / (2.0 * G * std::sqrt(E));
            cf.K(i, j) = n1 * n2;
            cf.H(i, j) = 0.5 * (n1 + n2);
            cf.Hprime(i, j) = 0.5 * (n1 - n2);
            const double tiny = 1e-9 * std::max(std::abs(n1), std::abs(n2));
            cf.rho1(i, j) = std::abs(n1) > tiny ? 1.0 / n1 : NAN;
            cf.rho2(i, j) = std::abs(n2) > tiny ? 1.0 / n2 : NAN;
        }
    return cf;
}

inline CurvatureField curvature_field(const SurfaceGrid& grid, const GeometryOptions& opt = {}) {
    return curvature_field(second_fundamental_form(grid, opt), opt);
}

/// Residuals of the Codazzi equations written through gamma1, gamma2.
/// Summaries skip two boundary rings: the residual differentiates curvatures
/// whose one-sided boundary errors are not smooth.
inline std::pair<ResidualField, ResidualField> codazzi_residual(const CurvatureField& cf, const FormField& forms) {
    const GridSpec& s = cf.spec;
    const auto n1v = fd::d1(cf.nu1, 1, s.h1);
    const auto n2u = fd::d1(cf.nu2, 0, s.h0);
    Scalar2D r1(s.n0, s.n1), r2(s.n0, s.n1);
    for (int i = 0; i < s.n0; ++i)
        for (int j = 0; j < s.n1; ++j) {
            const double diff = cf.nu1(i, j) - cf.nu2(i, j);
            if (diff == 0.0) throw UmbilicError("nu1 = nu2 at node (" + std::to_string(i) + "," + std::to_string(j) + ")");
            r1(i, j) = cf.gamma1(i, j) - n1v(i, j) / (std::sqrt(forms.G(i, j)) * diff);
            r2(i, j) = cf.gamma2(i, j) - n2u(i, j) / (std::sqrt(forms.E(i, j)) * diff);
        }
    return {ResidualField::from(std::move(r1), 2), ResidualField::from(std::move(r2), 2)};
}

/// Residual of Y(gamma1) - X(gamma2) - (gamma1^2 + gamma2^2) - K, summarized
/// over nodes three rings in from the boundary.
inline ResidualField gauss_residual(const CurvatureField& cf, const FormField& forms) {
    const GridSpec& s = cf.spec;
    const auto g1v = fd::d1(cf.gamma1, 1, s.h1);
    const auto g2u = fd::d1(cf.gamma2, 0, s.h0);
    Scalar2D r(s.n0, s.n1);
    for (int i = 0; i < s.n0; ++i)
        for (int j = 0; j < s.n1; ++j) {
            const double g1 = cf.gamma1(i, j), g2 = cf.gamma2(i, j);
            r(i, j) = g1v(i, j) / std::sqrt(forms.G(i, j)) - g2u(i, j) / std::sqrt(forms.E(i, j)) - (g1 * g1 + g2 * g2) -
                      cf.K(i, j);
        }
    return ResidualField::from(std::move(r), 3);
}

/// Nodes where nu1 - nu2 < tol.
inline std::vector<std::pair<int, int>> umbilic_scan(const CurvatureField& cf, double tol) {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < cf.spec.n0; ++i)
        for (int j = 0; j < cf.spec.n1; ++j)
            if (cf.nu1(i, j) - cf.nu2(i, j) < tol) out.emplace_back(i, j);
    return out;
}

} // namespace wsurf
