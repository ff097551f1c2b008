#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "geometry.hpp"
#include "newton.hpp"

namespace wsurf {

using Fn = std::function<double(double)>;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const noexcept { return hi - lo; }
    double mid() const noexcept { return 0.5 * (lo + hi); }
    bool contains(double x) const noexcept {
        const double slack = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
        return x >= lo - slack && x <= hi + slack;
    }
};

/// Principal curvatures as functions of a geometric function:
/// nu1 = f(nu), nu2 = g(nu) on the interval `domain`.
struct WeingartenPair {
    std::string kind = "custom";
    Fn f, df, d2f;
    Fn g, dg, d2g;
    Interval domain;
    /// Optional closed form of the integral of f'/(f-g) from nu0 to nu.
    std::function<double(double, double)> If_closed;
};

/// Natural cubic spline through sorted abscissae.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 3 || y_.size() != n) throw DomainError("spline needs at least 3 matching samples");
        for (std::size_t k = 1; k < n; ++k)
            if (!(x_[k] > x_[k - 1])) throw DomainError("spline abscissae must be strictly increasing");
        m_.assign(n, 0.0);
        std::vector<double> c(n, 0.0), d(n, 0.0);
        // Tridiagonal system for the second derivatives, natural ends.
        for (std::size_t k = 1; k + 1 < n; ++k) {
            const double h0 = x_[k] - x_[k - 1], h1 = x_[k + 1] - x_[k];
            const double a = h0 / 6.0, b = (h0 + h1) / 3.0, cc = h1 / 6.0;
            const double r = (y_[k + 1] - y_[k]) / h1 - (y_[k] - y_[k - 1]) / h0;
            const double denom = b - a * c[k - 1];
            c[k] = cc / denom;
            d[k] = (r - a * d[k - 1]) / denom;
        }
        for (std::size_t k = n - 2; k >= 1; --k) {
            m_[k] = d[k] - c[k] * m_[k + 1];
            if (k == 1) break;
        }
    }

    double operator()(double x) const { return eval(x, 0); }
    double d1(double x) const { return eval(x, 1); }
    double d2(double x) const { return eval(x, 2); }

private:
    double eval(double x, int der) const {
        std::size_t k = std::size_t(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
        k = std::clamp<std::size_t>(k, 1, x_.size() - 1) - 1;
        const double h = x_[k + 1] - x_[k];
        const double A = (x_[k + 1] - x) / h, B = (x - x_[k]) / h;
        const double m0 = m_[k], m1 = m_[k + 1];
        switch (der) {
        case 0: return A * y_[k] + B * y_[k + 1] + ((A * A * A - A) * m0 + (B * B * B - B) * m1) * h * h / 6.0;
        case 1: return (y_[k + 1] - y_[k]) / h + ((1.0 - 3.0 * A * A) * m0 + (3.0 * B * B - 1.0) * m1) * h / 6.0;
        default: return A * m0 + B * m1;
        }
    }

    std::vector<double> x_, y_, m_;
};

/// Pair whose derivatives are synthesized by central differences with
/// step 1e-5 times the interval width.
inline WeingartenPair make_pair(Fn f, Fn g, Interval domain, std::string kind = "custom") {
    if (!(domain.hi > domain.lo)) throw DomainError("pair interval must have positive width");
    const double h = 1e-5 * domain.width();
    WeingartenPair p;
    p.kind = std::move(kind);
    p.domain = domain;
    p.df = [f, h](double x) { return (f(x + h) - f(x - h)) / (2.0 * h); };
    p.d2f = [f, h](double x) { return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h); };
    p.dg = [g, h](double x) { return (g(x + h) - g(x - h)) / (2.0 * h); };
    p.d2g = [g, h](double x) { return (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h); };
    p.f = std::move(f);
    p.g = std::move(g);
    return p;
}

/// f = A nu + B, g = nu.
inline WeingartenPair linear_pair(double A, double B, Interval domain) {
    WeingartenPair p;
    p.kind = "linear";
    p.domain = domain;
    p.f = [A, B](double x) { return A * x + B; };
    p.df = [A](double) { return A; };
    p.d2f = [](double) { return 0.0; };
    p.g = [](double x) { return x; };
    p.dg = [](double) { return 1.0; };
    p.d2g = [](double) { return 0.0; };
    p.If_closed = [A, B](double n0, double n) {
        if (A == 1.0) return (n - n0) / B;
        return A / (A - 1.0) * std::log(std::abs(((A - 1.0) * n + B) / ((A - 1.0) * n0 + B)));
    };
    return p;
}

/// Minimal surfaces: f = nu, g = -nu.
inline WeingartenPair minimal_pair(Interval domain) {
    WeingartenPair p;
    p.kind = "minimal";
    p.domain = domain;
    p.f = [](double x) { return x; };
    p.df = [](double) { return 1.0; };
    p.d2f = [](double) { return 0.0; };
    p.g = [](double x) { return -x; };
    p.dg = [](double) { return -1.0; };
    p.d2g = [](double) { return 0.0; };
    p.If_closed = [](double n0, double n) { return 0.5 * std::log(n / n0); };
    return p;
}

/// Constant mean curvature 1/2: f = 1 - nu, g = nu.
inline WeingartenPair cmc_pair(Interval domain) {
    WeingartenPair p = linear_pair(-1.0, 1.0, domain);
    p.kind = "cmc";
    p.If_closed = [](double n0, double n) { return 0.5 * std::log(std::abs((1.0 - 2.0 * n) / (1.0 - 2.0 * n0))); };
    return p;
}

/// f = (A nu + B)/(C nu + D), g = nu.
inline WeingartenPair linear_fractional_pair(double A, double B, double C, double D, Interval domain) {
    WeingartenPair p;
    p.kind = "linear-fractional";
    p.domain = domain;
    const double det = A * D - B * C;
    p.f = [=](double x) { return (A * x + B) / (C * x + D); };
    p.df = [=](double x) { const double q = C * x + D; return det / (q * q); };
    p.d2f = [=](double x) { const double q = C * x + D; return -2.0 * C * det / (q * q * q); };
    p.g = [](double x) { return x; };
    p.dg = [](double) { return 1.0; };
    p.d2g = [](double) { return 0.0; };
    return p;
}

/// Cubic-spline interpolant of tabulated (nu, f, g) samples.
inline WeingartenPair table_pair(const std::vector<double>& nu, const std::vector<double>& fv, const std::vector<double>& gv) {
    auto sf = std::make_shared<CubicSpline>(nu, fv);
    auto sg = std::make_shared<CubicSpline>(nu, gv);
    WeingartenPair p;
    p.kind = "custom-table";
    p.domain = {nu.front(), nu.back()};
    p.f = [sf](double x) { return (*sf)(x); };
    p.df = [sf](double x) { return sf->d1(x); };
    p.d2f = [sf](double x) { return sf->d2(x); };
    p.g = [sg](double x) { return (*sg)(x); };
    p.dg = [sg](double x) { return sg->d1(x); };
    p.d2g = [sg](double x) { return sg->d2(x); };
    return p;
}

/// Checks f - g != 0 and f' g' != 0 at `samples` points of the interval;
/// a sign change between neighbouring samples also counts as a zero.
inline void validate_pair(const WeingartenPair& p, int samples = 1000) {
    if (!(p.domain.hi > p.domain.lo)) throw DomainError("pair interval must have positive width");
    double prev_gap = 0.0, prev_df = 0.0, prev_dg = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double x = p.domain.lo + p.domain.width() * k / (samples - 1);
        const double gap = p.f(x) - p.g(x), df = p.df(x), dg = p.dg(x);
        if (!(std::abs(gap) > 1e-10) || (k > 0 && gap * prev_gap < 0.0))
            throw DomainError("f - g vanishes near nu = " + std::to_string(x));
        if (!(std::abs(df * dg) > 1e-10) || (k > 0 && (df * prev_df < 0.0 || dg * prev_dg < 0.0)))
            throw DomainError("f' g' vanishes near nu = " + std::to_string(x));
        prev_gap = gap;
        prev_df = df;
        prev_dg = dg;
    }
}

namespace detail {
inline double simpson_step(const Fn& fn, double a, double b, double fa, double fm, double fb, double whole, double tol,
                           int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = fn(lm), frm = fn(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (std::abs(diff) <= std::max(15.0 * tol, 1e-15 * std::abs(left + right))) return left + right + diff / 15.0;
    if (depth <= 0) throw QuadratureError("tolerance not met within the bisection limit");
    return simpson_step(fn, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(fn, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
} // namespace detail

/// Adaptive Simpson quadrature to an absolute tolerance.
inline double adaptive_simpson(const Fn& fn, double a, double b, double tol = 1e-10, int max_depth = 40) {
    if (a == b) return 0.0;
    const double fa = fn(a), fb = fn(b), fm = fn(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(fn, a, b, fa, fm, fb, whole, tol, max_depth);
}

struct NaturalIntegrals {
    double If = 0.0;
    double Ig = 0.0;
};

/// If = int f'/(f-g), Ig = int g'/(g-f) from nu0 to nu.
inline NaturalIntegrals natural_integrals(const WeingartenPair& p, double nu0, double nu) {
    if (!p.domain.contains(nu0) || !p.domain.contains(nu))
        throw DomainError("integration limits outside the pair interval");
    if (nu == nu0) return {};
    auto gap = [&](double x) {
        const double d = p.f(x) - p.g(x);
        if (!(std::abs(d) > 1e-10)) throw DomainError("f - g vanishes at nu = " + std::to_string(x));
        return d;
    };
    if (p.If_closed) {
        gap(nu);
        const double If = p.If_closed(nu0, nu);
        const double total = std::log(std::abs(gap(nu) / gap(nu0)));
        return {If, total - If};
    }
    const double If = adaptive_simpson([&](double x) { return p.df(x) / gap(x); }, nu0, nu);
    const double Ig = adaptive_simpson([&](double x) { return -p.dg(x) / gap(x); }, nu0, nu);
    return {If, Ig};
}

struct NaturalGauge {
    double a = 1.0;
    double b = 1.0;
    double nu0 = 0.0;

    void validate(const WeingartenPair& p) const {
        if (!(a > 0.0) || !(b > 0.0)) throw DomainError("gauge constants must be positive");
        if (!p.domain.contains(nu0)) throw DomainError("gauge base value outside the pair interval");
    }
};

/// E = a^-2 exp(-2 If), G = b^-2 exp(-2 Ig).
inline std::pair<double, double> natural_metric(const WeingartenPair& p, const NaturalGauge& gauge, double nu) {
    const auto I = natural_integrals(p, gauge.nu0, nu);
    return {std::exp(-2.0 * I.If) / (gauge.a * gauge.a), std::exp(-2.0 * I.Ig) / (gauge.b * gauge.b)};
}

struct NaturalityReport {
    ResidualField residual;
    double mean = 0.0;
    /// maxAbs of the residual relative to |mean|.
    double defect = 0.0;
};

/// Deviation of sqrt(EG)(nu1 - nu2) from its interior mean.
inline NaturalityReport naturality_check(const Scalar2D& E, const Scalar2D& G, const Scalar2D& nu1, const Scalar2D& nu2) {
    const int n0 = E.n0(), n1 = E.n1();
    Scalar2D q(n0, n1);
    double sum = 0.0;
    long count = 0;
    for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n1; ++j) {
            q(i, j) = std::sqrt(E(i, j) * G(i, j)) * (nu1(i, j) - nu2(i, j));
            if (i > 0 && j > 0 && i < n0 - 1 && j < n1 - 1) {
                sum += q(i, j);
                ++count;
            }
        }
    NaturalityReport rep;
    rep.mean = count ? sum / double(count) : 0.0;
    for (auto& x : q.data()) x -= rep.mean;
    rep.residual = ResidualField::from(std::move(q));
    rep.defect = rep.residual.maxAbs / std::abs(rep.mean);
    return rep;
}

inline NaturalityReport naturality_check(const FormField& forms, const CurvatureField& cf) {
    return naturality_check(forms.E, forms.G, cf.nu1, cf.nu2);
}

/// Solves g(nu) = target on the pair interval by bisection.
inline double solve_nu_from_nu2(const WeingartenPair& p, double target) {
    double lo = p.domain.lo, hi = p.domain.hi;
    double glo = p.g(lo) - target, ghi = p.g(hi) - target;
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    if ((glo > 0.0) == (ghi > 0.0))
        throw FitError("nu2 = " + std::to_string(target) + " is outside the range of g on the pair interval");
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double m = 0.5 * (lo + hi);
        const double gm = p.g(m) - target;
        if ((gm > 0.0) == (glo > 0.0)) {
            lo = m;
            glo = gm;
        } else {
            hi = m;
        }
    }
    return 0.5 * (lo + hi);
}

namespace detail {

/// Cubic Lagrange interpolation on four (possibly non-uniform) nodes.
inline double lagrange4(const double* xs, const double* ys, double x) {
    double s = 0.0;
    for (int a = 0; a < 4; ++a) {
        double w = 1.0;
        for (int b = 0; b < 4; ++b)
            if (b != a) w *= (x - xs[b]) / (xs[a] - xs[b]);
        s += w * ys[a];
    }
    return s;
}

/// Index of the first node of a 4-point window around x in sorted xs.
inline int window4(const std::vector<double>& xs, double x) {
    const int n = int(xs.size());
    int k = int(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
    return std::clamp(k - 1, 0, n - 4);
}

/// Lagrange interpolation on n consecutive (possibly non-uniform) nodes.
inline double lagrange_n(const double* xs, const double* ys, int n, double x) {
    double s = 0.0;
    for (int a = 0; a < n; ++a) {
        double w = 1.0;
        for (int b = 0; b < n; ++b)
            if (b != a) w *= (x - xs[b]) / (xs[a] - xs[b]);
        s += w * ys[a];
    }
    return s;
}

/// First node of an n-point window around x in sorted xs.
inline int window_n(const std::vector<double>& xs, double x, int n) {
    const int m = int(xs.size());
    int k = int(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
    return std::clamp(k - (n / 2 - 1), 0, m - n);
}

/// Tensor-product Lagrange sample of a surface grid at parameter (u,v),
/// six points per direction (four on grids with fewer nodes).
inline Vec3 sample_surface(const SurfaceGrid& grid, double u, double v) {
    const GridSpec& s = grid.spec();
    const int nu = std::min(6, s.n0 - (s.n0 % 2)), nv = std::min(6, s.n1 - (s.n1 % 2));
    const double fu = (u - s.x0) / s.h0, fv = (v - s.y0) / s.h1;
    const int i0 = std::clamp(int(std::floor(fu)) - (nu / 2 - 1), 0, s.n0 - nu);
    const int j0 = std::clamp(int(std::floor(fv)) - (nv / 2 - 1), 0, s.n1 - nv);
    double wu[6], wv[6];
    for (int a = 0; a < nu; ++a) {
        wu[a] = 1.0;
        for (int b = 0; b < nu; ++b)
            if (b != a) wu[a] *= (fu - (i0 + b)) / double(a - b);
    }
    for (int a = 0; a < nv; ++a) {
        wv[a] = 1.0;
        for (int b = 0; b < nv; ++b)
            if (b != a) wv[a] *= (fv - (j0 + b)) / double(a - b);
    }
    Vec3 p = Vec3::Zero();
    for (int a = 0; a < nu; ++a)
        for (int b = 0; b < nv; ++b) p += wu[a] * wv[b] * grid(i0 + a, j0 + b);
    return p;
}

} // namespace detail

struct ReparameterizeOptions {
    /// Fit tolerance relative to max |nu1|, |nu2|.
    double tol_fit = 1e-3;
};

struct NaturalReparameterization {
    SurfaceGrid grid;
    NaturalGauge gauge;
    NuField nu;
};

/// Resamples a principal-parameterized W-surface onto natural principal
/// parameters ubar = a int sqrt(E) exp(If) du, vbar = b int sqrt(G) exp(Ig) dv.
/// The base node is the grid center.
inline NaturalReparameterization reparameterize_to_natural(const SurfaceGrid& grid, const CurvatureField& cf,
                                                           const WeingartenPair& pair, double a, double b,
                                                           const ReparameterizeOptions& opt = {}) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("scale constants must be positive");
    const GridSpec& s = grid.spec();
    const FormField ff = first_fundamental_form(grid);

    NuField nu(s);
    double scale = 0.0, worst = 0.0;
    for (int i = 0; i < s.n0; ++i)
        for (int j = 0; j < s.n1; ++j) {
            nu(i, j) = solve_nu_from_nu2(pair, cf.nu2(i, j));
            scale = std::max({scale, std::abs(cf.nu1(i, j)), std::abs(cf.nu2(i, j))});
            if (i > 0 && j > 0 && i < s.n0 - 1 && j < s.n1 - 1)
                worst = std::max(worst, std::abs(cf.nu1(i, j) - pair.f(nu(i, j))));
        }
    if (worst > opt.tol_fit * std::max(scale, 1e-300))
        throw FitError("nu1 deviates from f(nu) by " + std::to_string(worst));

    const int ic = s.n0 / 2, jc = s.n1 / 2;
    const double nu0 = nu(ic, jc);

    // Line densities averaged across the transverse direction.
    std::vector<double> lam(s.n0, 0.0), mu(s.n1, 0.0);
    for (int i = 0; i < s.n0; ++i)
        for (int j = 0; j < s.n1; ++j) {
            const auto I = natural_integrals(pair, nu0, nu(i, j));
            lam[i] += std::sqrt(ff.E(i, j)) * std::exp(I.If) / s.n1;
            mu[j] += std::sqrt(ff.G(i, j)) * std::exp(I.Ig) / s.n0;
        }
    auto cumulative = [](const std::vector<double>& d, double h, int base, double scale_c) {
        std::vector<double> out(d.size(), 0.0);
        for (std::size_t k = 1; k < d.size(); ++k) out[k] = out[k - 1] + 0.5 * h * (d[k] + d[k - 1]) * scale_c;
        const double shift = out[std::size_t(base)];
        for (auto& x : out) x -= shift;
        return out;
    };
    const auto ub = cumulative(lam, s.h0, ic, a);
    const auto vb = cumulative(mu, s.h1, jc, b);
    for (std::size_t k = 1; k < ub.size(); ++k)
        if (!(ub[k] > ub[k - 1])) throw MonotonicityError("ubar is not strictly increasing");
    for (std::size_t k = 1; k < vb.size(); ++k)
        if (!(vb[k] > vb[k - 1])) throw MonotonicityError("vbar is not strictly increasing");

    std::vector<double> us(s.n0), vs(s.n1);
    for (int i = 0; i < s.n0; ++i) us[i] = s.x(i);
    for (int j = 0; j < s.n1; ++j) vs[j] = s.y(j);

    GridSpec ns{s.n0, s.n1, ub.front(), vb.front(), (ub.back() - ub.front()) / (s.n0 - 1),
                (vb.back() - vb.front()) / (s.n1 - 1)};
    std::vector<double> u_of(s.n0), v_of(s.n1);
    const int wu = std::min(6, s.n0 - (s.n0 % 2)), wv = std::min(6, s.n1 - (s.n1 % 2));
    for (int k = 0; k < s.n0; ++k) {
        const double x = k == s.n0 - 1 ? ub.back() : ns.x(k);
        const int w = detail::window_n(ub, x, wu);
        u_of[k] = detail::lagrange_n(&ub[w], &us[w], wu, x);
    }
    for (int k = 0; k < s.n1; ++k) {
        const double y = k == s.n1 - 1 ? vb.back() : ns.y(k);
        const int w = detail::window_n(vb, y, wv);
        v_of[k] = detail::lagrange_n(&vb[w], &vs[w], wv, y);
    }

    Array2D<Vec3> pts(s.n0, s.n1);
    NuField nun(ns);
    for (int k = 0; k < s.n0; ++k)
        for (int l = 0; l < s.n1; ++l) {
            pts(k, l) = detail::sample_surface(grid, u_of[k], v_of[l]);
            const double fu = (u_of[k] - s.x0) / s.h0, fv = (v_of[l] - s.y0) / s.h1;
            const int i0 = std::clamp(int(std::floor(fu)), 0, s.n0 - 2), j0 = std::clamp(int(std::floor(fv)), 0, s.n1 - 2);
            const double tu = fu - i0, tv = fv - j0;
            nun(k, l) = (1 - tu) * (1 - tv) * nu(i0, j0) + tu * (1 - tv) * nu(i0 + 1, j0) +
                        (1 - tu) * tv * nu(i0, j0 + 1) + tu * tv * nu(i0 + 1, j0 + 1);
        }
    return {SurfaceGrid(ns, std::move(pts)), NaturalGauge{a, b, nu0}, std::move(nun)};
}

namespace detail {

struct NodeCoefficients {
    double f, df, d2f, g, dg, d2g, eIf2, eIg2;
};

inline NodeCoefficients node_coefficients(const WeingartenPair& p, const NaturalGauge& gauge, double nu) {
    if (!p.domain.contains(nu)) throw DomainError("nu = " + std::to_string(nu) + " outside the pair interval");
    const auto I = natural_integrals(p, gauge.nu0, nu);
    return {p.f(nu), p.df(nu), p.d2f(nu), p.g(nu), p.dg(nu), p.d2g(nu), std::exp(2.0 * I.If), std::exp(2.0 * I.Ig)};
}

inline double natural_pde_node(const NodeCoefficients& c, const NaturalGauge& gauge, double nu_u, double nu_v,
                               double nu_uu, double nu_vv) {
    const double fg = c.f - c.g;
    const double vpart = c.df * nu_vv + (c.d2f - 2.0 * c.df * c.df / fg) * nu_v * nu_v;
    const double upart = c.dg * nu_uu + (c.d2g + 2.0 * c.dg * c.dg / fg) * nu_u * nu_u;
    return gauge.b * gauge.b * c.eIg2 * vpart - gauge.a * gauge.a * c.eIf2 * upart - c.f * c.g * fg;
}

} // namespace detail

/// Residual of the natural PDE at interior nodes, central differences.
inline ResidualField natural_pde_residual(const WeingartenPair& p, const NaturalGauge& gauge, const NuField& nu) {
    const GridSpec& s = nu.grid;
    Scalar2D r(s.n0, s.n1, 0.0);
    for (int i = 1; i < s.n0 - 1; ++i)
        for (int j = 1; j < s.n1 - 1; ++j) {
            const auto c = detail::node_coefficients(p, gauge, nu(i, j));
            const double nu_u = (nu(i + 1, j) - nu(i - 1, j)) / (2.0 * s.h0);
            const double nu_v = (nu(i, j + 1) - nu(i, j - 1)) / (2.0 * s.h1);
            const double nu_uu = (nu(i + 1, j) - 2.0 * nu(i, j) + nu(i - 1, j)) / (s.h0 * s.h0);
            const double nu_vv = (nu(i, j + 1) - 2.0 * nu(i, j) + nu(i, j - 1)) / (s.h1 * s.h1);
            r(i, j) = detail::natural_pde_node(c, gauge, nu_u, nu_v, nu_uu, nu_vv);
        }
    return ResidualField::from(std::move(r));
}

/// Principal geodesic curvatures determined by a natural-PDE field.
inline std::pair<Scalar2D, Scalar2D> geodesic_curvatures_from_nu(const WeingartenPair& p, const NaturalGauge& gauge,
                                                                 const NuField& nu) {
    const GridSpec& s = nu.grid;
    const auto nu_u = fd::d1(nu.values, 0, s.h0);
    const auto nu_v = fd::d1(nu.values, 1, s.h1);
    Scalar2D g1(s.n0, s.n1), g2(s.n0, s.n1);
    for (int i = 0; i < s.n0; ++i)
        for (int j = 0; j < s.n1; ++j) {
            const double x = nu(i, j);
            if (!p.domain.contains(x)) throw DomainError("nu = " + std::to_string(x) + " outside the pair interval");
            const auto I = natural_integrals(p, gauge.nu0, x);
            const double fg = p.f(x) - p.g(x);
            g1(i, j) = std::exp(I.Ig) * gauge.b * p.df(x) * nu_v(i, j) / fg;
            g2(i, j) = std::exp(I.If) * gauge.a * p.dg(x) * nu_u(i, j) / fg;
        }
    return {std::move(g1), std::move(g2)};
}

/// Nodes where the discrete gradient of nu vanishes.
inline std::vector<std::pair<int, int>> flat_gradient_nodes(const NuField& nu, double tol = 1e-12) {
    const auto nu_u = fd::d1(nu.values, 0, nu.grid.h0);
    const auto nu_v = fd::d1(nu.values, 1, nu.grid.h1);
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < nu.grid.n0; ++i)
        for (int j = 0; j < nu.grid.n1; ++j)
            if (std::hypot(nu_u(i, j), nu_v(i, j)) < tol) out.emplace_back(i, j);
    return out;
}

struct NaturalSolveResult {
    NuField nu;
    NewtonReport report;
};

/// Newton solve of the natural PDE with Dirichlet data taken from the
/// boundary ring of `init`. The Jacobian is assembled by colored finite
/// differences.
inline NaturalSolveResult solve_natural_pde(const WeingartenPair& p, const NaturalGauge& gauge, const NuField& init,
                                            NewtonOptions opt = {}) {
    const GridSpec& s = init.grid;
    const int m0 = s.n0 - 2, m1 = s.n1 - 2;
    auto idx = [m1](int i, int j) { return (i - 1) * m1 + (j - 1); };
    NuField work = init;
    auto load = [&](const Eigen::VectorXd& x) {
        for (int i = 1; i <= m0; ++i)
            for (int j = 1; j <= m1; ++j) work(i, j) = x[idx(i, j)];
    };
    auto residual = [&](const Eigen::VectorXd& x) {
        load(x);
        const auto r = natural_pde_residual(p, gauge, work);
        Eigen::VectorXd F(m0 * m1);
        for (int i = 1; i <= m0; ++i)
            for (int j = 1; j <= m1; ++j) F[idx(i, j)] = r.values(i, j);
        return F;
    };
    NewtonSystem sys;
    sys.residual = residual;
    sys.admissible = [&](const Eigen::VectorXd& x) {
        for (int k = 0; k < x.size(); ++k)
            if (!p.domain.contains(x[k])) return false;
        return true;
    };
    sys.jacobian = [&](const Eigen::VectorXd& x) {
        const Eigen::VectorXd F0 = residual(x);
        std::vector<Eigen::Triplet<double>> trip;
        for (int color = 0; color < 5; ++color) {
            Eigen::VectorXd xp = x;
            std::vector<double> step(x.size(), 0.0);
            for (int i = 1; i <= m0; ++i)
                for (int j = 1; j <= m1; ++j)
                    if ((i + 2 * j) % 5 == color) {
                        const int k = idx(i, j);
                        double h = 1e-7 * std::max(1.0, std::abs(x[k]));
                        if (!p.domain.contains(x[k] + h)) h = -h;
                        step[k] = h;
                        xp[k] += h;
                    }
            const Eigen::VectorXd F1 = residual(xp);
            for (int i = 1; i <= m0; ++i)
                for (int j = 1; j <= m1; ++j) {
                    if ((i + 2 * j) % 5 != color) continue;
                    const int k = idx(i, j);
                    const int nb[5][2] = {{i, j}, {i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
                    for (const auto& q : nb) {
                        if (q[0] < 1 || q[0] > m0 || q[1] < 1 || q[1] > m1) continue;
                        const int row = idx(q[0], q[1]);
                        trip.emplace_back(row, k, (F1[row] - F0[row]) / step[k]);
                    }
                }
        }
        Eigen::SparseMatrix<double> J(m0 * m1, m0 * m1);
        J.setFromTriplets(trip.begin(), trip.end());
        return J;
    };
    Eigen::VectorXd x(m0 * m1);
    for (int i = 1; i <= m0; ++i)
        for (int j = 1; j <= m1; ++j) x[idx(i, j)] = init(i, j);
    NaturalSolveResult out;
    out.report = newton_solve(sys, x, opt);
    load(x);
    out.nu = work;
    return out;
}

} // namespace wsurf
