#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "weingarten.hpp"

namespace wsurf {

using SurfaceParams = std::map<std::string, double>;

namespace detail {
inline double param(const SurfaceParams& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}
} // namespace detail

/// Analytic test surfaces. Unknown parameters take their defaults.
///  plane                 (u, v, 0)
///  cylinder r            (r cos u, r sin u, v)
///  torus R r             ((R + r cos v) cos u, (R + r cos v) sin u, r sin v)
///  catenoid c            (c cosh(u/c) cos v, c cosh(u/c) sin v, u)
///  pseudosphere          (sech u cos v, sech u sin v, u - tanh u)
///  sphere r              (r cos v cos u, r cos v sin u, r sin v)
///  ellipsoid a b c       (a cos v cos u, b cos v sin u, c sin v)
inline SurfaceGrid named_surface(const std::string& name, const SurfaceParams& params, const GridSpec& spec) {
    using detail::param;
    if (name == "plane") return SurfaceGrid::sample(spec, [](double u, double v) { return Vec3(u, v, 0.0); });
    if (name == "cylinder") {
        const double r = param(params, "r", 1.0);
        if (!(r > 0.0)) throw DomainError("cylinder radius must be positive");
        return SurfaceGrid::sample(spec, [r](double u, double v) { return Vec3(r * std::cos(u), r * std::sin(u), v); });
    }
    if (name == "torus") {
        const double R = param(params, "R", 2.0), r = param(params, "r", 1.0);
        if (!(r > 0.0) || !(R > r)) throw DomainError("torus needs R > r > 0");
        return SurfaceGrid::sample(spec, [R, r](double u, double v) {
            const double rho = R + r * std::cos(v);
            return Vec3(rho * std::cos(u), rho * std::sin(u), r * std::sin(v));
        });
    }
    if (name == "catenoid") {
        const double c = param(params, "c", 1.0);
        if (!(c > 0.0)) throw DomainError("catenoid waist must be positive");
        return SurfaceGrid::sample(spec, [c](double u, double v) {
            const double rho = c * std::cosh(u / c);
            return Vec3(rho * std::cos(v), rho * std::sin(v), u);
        });
    }
    if (name == "pseudosphere")
        return SurfaceGrid::sample(spec, [](double u, double v) {
            const double s = 1.0 / std::cosh(u);
            return Vec3(s * std::cos(v), s * std::sin(v), u - std::tanh(u));
        });
    if (name == "sphere") {
        const double r = param(params, "r", 1.0);
        if (!(r > 0.0)) throw DomainError("sphere radius must be positive");
        return SurfaceGrid::sample(spec, [r](double u, double v) {
            return Vec3(r * std::cos(v) * std::cos(u), r * std::cos(v) * std::sin(u), r * std::sin(v));
        });
    }
    if (name == "ellipsoid") {
        const double a = param(params, "a", 1.0), b = param(params, "b", 1.0), c = param(params, "c", 1.5);
        if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0)) throw DomainError("ellipsoid semi-axes must be positive");
        return SurfaceGrid::sample(spec, [a, b, c](double u, double v) {
            return Vec3(a * std::cos(v) * std::cos(u), b * std::cos(v) * std::sin(u), c * std::sin(v));
        });
    }
    throw UnknownSurfaceError("unknown surface '" + name + "'");
}

inline const std::vector<std::string>& named_surface_kinds() {
    static const std::vector<std::string> kinds{"plane", "cylinder", "torus", "catenoid", "pseudosphere", "sphere", "ellipsoid"};
    return kinds;
}

/// Plane curve c1 given by its curvature; lambda(0)=mu(0)=0,
/// lambda'(0)=0, mu'(0)=1.
struct MeridianSpec {
    Fn kappa1;
};

struct MeridianSamples {
    std::vector<double> s, lambda, mu, theta, kappa1;
};

namespace detail {

/// Running trapezoid integration of theta = int kappa1, lambda = int sin theta,
/// mu = int cos theta.
class MeridianIntegrator {
public:
    explicit MeridianIntegrator(Fn kappa1) : k_(std::move(kappa1)), kap_(k_(0.0)) {}

    void advance(double ds) {
        const double s1 = s_ + ds, k1 = k_(s1);
        const double t1 = theta_ + 0.5 * ds * (kap_ + k1);
        lambda_ += 0.5 * ds * (std::sin(theta_) + std::sin(t1));
        mu_ += 0.5 * ds * (std::cos(theta_) + std::cos(t1));
        theta_ = t1;
        kap_ = k1;
        s_ = s1;
    }
    /// Advances to s in steps no longer than ds_max.
    void advance_to(double s, double ds_max) {
        const double len = s - s_;
        if (len <= 0.0) return;
        const int n = std::max(1, int(std::ceil(len / ds_max - 1e-9)));
        for (int k = 0; k < n; ++k) advance(len / n);
        s_ = s;
    }
    double s() const { return s_; }
    double lambda() const { return lambda_; }
    double mu() const { return mu_; }
    double theta() const { return theta_; }
    double kappa() const { return kap_; }

private:
    Fn k_;
    double s_ = 0.0, theta_ = 0.0, lambda_ = 0.0, mu_ = 0.0, kap_;
};

} // namespace detail

inline MeridianSamples meridian_from_curvature(const MeridianSpec& m, double s1Max, double ds) {
    if (!(ds > 0.0) || !(s1Max >= 0.0)) throw DomainError("meridian needs ds > 0 and s1Max >= 0");
    if (!m.kappa1) throw DomainError("meridian curvature function missing");
    const int n = int(std::ceil(s1Max / ds - 1e-9));
    MeridianSamples out;
    detail::MeridianIntegrator it(m.kappa1);
    auto push = [&] {
        out.s.push_back(it.s());
        out.lambda.push_back(it.lambda());
        out.mu.push_back(it.mu());
        out.theta.push_back(it.theta());
        out.kappa1.push_back(it.kappa());
    };
    push();
    for (int k = 0; k < n; ++k) {
        it.advance(std::min(ds, s1Max - it.s()));
        push();
    }
    return out;
}

/// Space curve c2 through its natural equations and initial Frenet frame.
struct SpaceCurveSpec {
    Fn kappa;
    Fn tau;
    Vec3 x0 = Vec3::Zero();
    Vec3 t0 = Vec3::UnitX();
    Vec3 n0 = Vec3::UnitY();
    Vec3 b0 = Vec3::UnitZ();

    void validate() const {
        if (!kappa || !tau) throw DomainError("curve needs curvature and torsion functions");
        const double d = std::max({std::abs(t0.norm() - 1.0), std::abs(n0.norm() - 1.0), std::abs(b0.norm() - 1.0),
                                   std::abs(t0.dot(n0)), std::abs(t0.dot(b0)), std::abs(n0.dot(b0)),
                                   (t0.cross(n0) - b0).norm()});
        if (d > 1e-12) throw DomainError("initial frame must be orthonormal and right-handed");
    }
};

/// Frame t, y1, y2 along c2 with the position x and the angle theta.
struct CurveFrame {
    Vec3 x, t, y1, y2;
    double theta = 0.0;
};

namespace detail {

inline CurveFrame frame_rate(const SpaceCurveSpec& c, double v, const CurveFrame& f) {
    const double k = c.kappa(v), ct = std::cos(f.theta), st = std::sin(f.theta);
    CurveFrame d;
    d.x = f.t;
    d.t = k * ct * f.y1 - k * st * f.y2;
    d.y1 = -k * ct * f.t;
    d.y2 = k * st * f.t;
    d.theta = -c.tau(v);
    return d;
}

inline CurveFrame frame_axpy(const CurveFrame& f, double h, const CurveFrame& d) {
    return {f.x + h * d.x, f.t + h * d.t, f.y1 + h * d.y1, f.y2 + h * d.y2, f.theta + h * d.theta};
}

inline CurveFrame frame_rk4(const SpaceCurveSpec& c, double v, const CurveFrame& f, double h) {
    const auto k1 = frame_rate(c, v, f);
    const auto k2 = frame_rate(c, v + 0.5 * h, frame_axpy(f, 0.5 * h, k1));
    const auto k3 = frame_rate(c, v + 0.5 * h, frame_axpy(f, 0.5 * h, k2));
    const auto k4 = frame_rate(c, v + h, frame_axpy(f, h, k3));
    CurveFrame out = f;
    out.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    out.t += h / 6.0 * (k1.t + 2.0 * k2.t + 2.0 * k3.t + k4.t);
    out.y1 += h / 6.0 * (k1.y1 + 2.0 * k2.y1 + 2.0 * k3.y1 + k4.y1);
    out.y2 += h / 6.0 * (k1.y2 + 2.0 * k2.y2 + 2.0 * k3.y2 + k4.y2);
    out.theta += h / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta);
    return out;
}

inline CurveFrame frame_march(const SpaceCurveSpec& c, CurveFrame f, double v0, double v1, double step) {
    const double len = v1 - v0;
    if (len == 0.0) return f;
    const int n = std::max(1, int(std::ceil(std::abs(len) / step - 1e-9)));
    for (int k = 0; k < n; ++k) f = frame_rk4(c, v0 + len * k / n, f, len / n);
    return f;
}

} // namespace detail

/// Frames of c2 at the v-nodes of the grid, integrated by RK4 from v = 0.
inline std::vector<CurveFrame> curve_frames(const SpaceCurveSpec& c, const GridSpec& spec, double step = 1e-3) {
    c.validate();
    CurveFrame f{c.x0, c.t0, c.n0, c.b0, 0.0};
    std::vector<CurveFrame> out(spec.n1);
    f = detail::frame_march(c, f, 0.0, spec.y(0), step);
    out[0] = f;
    for (int j = 1; j < spec.n1; ++j) {
        f = detail::frame_march(c, f, spec.y(j - 1), spec.y(j), step);
        out[j] = f;
    }
    return out;
}

struct GammaOptions {
    double step = 1e-3;
    /// Smallest admissible |1 - kappa (lambda cos theta - mu sin theta)|.
    double smooth_tol = 1e-8;
};

/// Class-Gamma surface Z(s1, v) = x(v) + lambda(s1) y1(v) + mu(s1) y2(v).
/// Index i follows s1 (x0 >= 0), index j follows v.
inline SurfaceGrid gamma_surface(const SpaceCurveSpec& c2, const MeridianSpec& m, const GridSpec& spec,
                                 const GammaOptions& opt = {}) {
    spec.validate();
    if (spec.x0 < 0.0) throw DomainError("meridian parameter must start at s1 >= 0");
    const auto frames = curve_frames(c2, spec, opt.step);
    detail::MeridianIntegrator mi(m.kappa1);
    std::vector<double> lam(spec.n0), mu(spec.n0);
    for (int i = 0; i < spec.n0; ++i) {
        mi.advance_to(spec.x(i), opt.step);
        lam[i] = mi.lambda();
        mu[i] = mi.mu();
    }
    Array2D<Vec3> pts(spec.n0, spec.n1);
    std::vector<std::string> bad;
    for (int j = 0; j < spec.n1; ++j) {
        const auto& f = frames[j];
        const double k = c2.kappa(spec.y(j)), ct = std::cos(f.theta), st = std::sin(f.theta);
        for (int i = 0; i < spec.n0; ++i) {
            if (std::abs(1.0 - k * (lam[i] * ct - mu[i] * st)) < opt.smooth_tol && bad.size() < 8)
                bad.push_back("(" + std::to_string(i) + "," + std::to_string(j) + ")");
            pts(i, j) = f.x + lam[i] * f.y1 + mu[i] * f.y2;
        }
    }
    if (!bad.empty()) {
        std::string msg = "surface singular at nodes";
        for (const auto& b : bad) msg += " " + b;
        throw SmoothnessError(msg);
    }
    return SurfaceGrid(spec, std::move(pts));
}

struct GammaInvariants {
    double nu1 = 0.0, nu2 = 0.0, gamma2 = 0.0;
};

/// Closed-form invariants of a class-Gamma surface at (s1, v), with
/// nu2, gamma2 taken from the curve data and nu1 = kappa1.
inline GammaInvariants gamma_invariants(const SpaceCurveSpec& c2, const MeridianSpec& m, double s1, double v,
                                        double step = 1e-3) {
    detail::MeridianIntegrator mi(m.kappa1);
    mi.advance_to(s1, step);
    CurveFrame f = detail::frame_march(c2, {c2.x0, c2.t0, c2.n0, c2.b0, 0.0}, 0.0, v, step);
    const double k = c2.kappa(v), ct = std::cos(f.theta), st = std::sin(f.theta);
    const double lp = std::sin(mi.theta()), mp = std::cos(mi.theta());
    const double den = 1.0 - k * (mi.lambda() * ct - mi.mu() * st);
    return {m.kappa1(s1), -k * (lp * st + mp * ct) / den, -k * (lp * ct - mp * st) / den};
}

struct RotationalODE {
    double beta = 0.0;
    double du = 0.0;
    std::vector<double> u, nu, w, wp;
    bool truncated = false;
    /// max |energy - energy(0)| relative to max(1, |energy(0)|).
    double energy_drift = 0.0;
};

inline double rotational_coefficient(double beta) {
    return -2.0 * beta * (beta + 1.0) / ((beta - 1.0) * (beta - 1.0));
}

/// First integral of w'' = c w^(1/beta).
inline double rotational_energy(double beta, double w, double wp) {
    const double c = rotational_coefficient(beta), p = 1.0 + 1.0 / beta;
    return 0.5 * wp * wp - c * std::pow(w, p) / p;
}

/// Natural ODE of rotational surfaces with nu1 = (beta+1)/(beta-1) nu2:
/// (nu^beta)'' = c nu integrated for w = nu^beta by RK4. Integration stops
/// when nu leaves (0, 1e12); `strict` turns that into a RangeError.
inline RotationalODE rotational_natural_ode(double beta, double nu0, double nuPrime0, double uMax, double du,
                                            bool strict = false) {
    if (beta == 0.0 || std::abs(beta) == 1.0 || !std::isfinite(beta)) throw DomainError("beta must differ from 0 and +-1");
    if (!(du > 0.0) || !(uMax > 0.0)) throw DomainError("integration needs du > 0 and uMax > 0");
    if (!(nu0 > 0.0)) throw RangeError("initial nu must be positive");
    const double c = rotational_coefficient(beta);
    auto rate = [&](double w, double wp, double& dw, double& dwp) {
        dw = wp;
        dwp = c * std::pow(w, 1.0 / beta);
        return w > 0.0 && std::isfinite(dwp);
    };
    RotationalODE out;
    out.beta = beta;
    out.du = du;
    double w = std::pow(nu0, beta), wp = beta * std::pow(nu0, beta - 1.0) * nuPrime0;
    const double e0 = rotational_energy(beta, w, wp);
    auto push = [&](double u) {
        out.u.push_back(u);
        out.w.push_back(w);
        out.wp.push_back(wp);
        out.nu.push_back(std::pow(w, 1.0 / beta));
        out.energy_drift = std::max(out.energy_drift, std::abs(rotational_energy(beta, w, wp) - e0) / std::max(1.0, std::abs(e0)));
    };
    push(0.0);
    const int n = int(std::ceil(uMax / du - 1e-9));
    for (int k = 0; k < n; ++k) {
        double a1, b1, a2, b2, a3, b3, a4, b4;
        bool ok = rate(w, wp, a1, b1);
        ok = ok && rate(w + 0.5 * du * a1, wp + 0.5 * du * b1, a2, b2);
        ok = ok && rate(w + 0.5 * du * a2, wp + 0.5 * du * b2, a3, b3);
        ok = ok && rate(w + du * a3, wp + du * b3, a4, b4);
        const double wn = w + du / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        const double wpn = wp + du / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        const double nun = wn > 0.0 ? std::pow(wn, 1.0 / beta) : 0.0;
        if (!ok || !(wn > 0.0) || !std::isfinite(wpn) || !(nun > 0.0) || !(nun < 1e12)) {
            out.truncated = true;
            if (strict)
                throw RangeError("nu left (0, 1e12) at u = " + std::to_string((k + 1) * du) + " before uMax = " +
                                 std::to_string(uMax));
            break;
        }
        w = wn;
        wp = wpn;
        push((k + 1) * du);
    }
    return out;
}

struct MeridianCurvature {
    double beta = 0.0;
    double ds = 0.0;
    std::vector<double> s, kappa, kappa_prime;
    /// max |I - I(0)| / max(1, |I(0)|) with I = kappa'^2 + kappa^4/(beta+1).
    double first_integral_drift = 0.0;

    /// Cubic interpolation of the samples.
    double operator()(double x) const {
        const int n = int(s.size());
        if (n < 4) throw DomainError("curvature samples too short for interpolation");
        const int k = std::clamp(int(std::floor(x / ds)) - 1, 0, n - 4);
        return detail::lagrange4(&s[k], &kappa[k], x);
    }
};

inline double meridian_first_integral(double beta, double k, double kp) { return kp * kp + k * k * k * k / (beta + 1.0); }

/// kappa1'' + 2/(beta+1) kappa1^3 = 0 by RK4.
inline MeridianCurvature meridian_curvature_ode(double beta, double kappa0, double kappaPrime0, double s1Max, double ds) {
    if (beta == -1.0) throw DomainError("beta = -1 is excluded");
    if (!(ds > 0.0) || !(s1Max > 0.0)) throw DomainError("integration needs ds > 0 and s1Max > 0");
    const double c = 2.0 / (beta + 1.0);
    MeridianCurvature out;
    out.beta = beta;
    out.ds = ds;
    double k = kappa0, kp = kappaPrime0;
    const double I0 = meridian_first_integral(beta, k, kp);
    const int n = int(std::ceil(s1Max / ds - 1e-9));
    out.s.reserve(n + 1);
    for (int m = 0;; ++m) {
        out.s.push_back(m * ds);
        out.kappa.push_back(k);
        out.kappa_prime.push_back(kp);
        out.first_integral_drift = std::max(out.first_integral_drift,
                                            std::abs(meridian_first_integral(beta, k, kp) - I0) / std::max(1.0, std::abs(I0)));
        if (m == n) break;
        auto acc = [c](double x) { return -c * x * x * x; };
        const double a1 = kp, b1 = acc(k);
        const double a2 = kp + 0.5 * ds * b1, b2 = acc(k + 0.5 * ds * a1);
        const double a3 = kp + 0.5 * ds * b2, b3 = acc(k + 0.5 * ds * a2);
        const double a4 = kp + ds * b3, b4 = acc(k + ds * a3);
        k += ds / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        kp += ds / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    }
    return out;
}

/// Rotational surface of the basic classes 4/5 from a natural-ODE solution.
/// The meridian x1 = 1 - lambda(u), x3 = mu(u) is rotated about Ox3; index
/// i follows u (nodes inside the ODE range), index j the rotation angle.
inline SurfaceGrid rotational_basic45(double beta, const RotationalODE& sol, const GridSpec& spec) {
    spec.validate();
    const int n = int(sol.u.size());
    if (n < 4) throw RangeError("natural ODE solution too short");
    if (spec.x0 < sol.u.front() - 1e-12 || spec.x_max() > sol.u.back() + 1e-12)
        throw RangeError("grid u-range leaves the natural ODE solution range [" + std::to_string(sol.u.front()) + ", " +
                         std::to_string(sol.u.back()) + "]");
    for (double x : sol.nu)
        if (!(x > 0.0)) throw RangeError("nu must stay positive");
    const double q = (beta + 1.0) / (beta - 1.0);
    std::vector<double> th(n, 0.0), lam(n, 0.0), mu(n, 0.0);
    auto a = [&](int k) { return std::pow(sol.nu[k], 0.5 * (1.0 - beta)); };
    auto sp = [&](int k) { return std::pow(sol.nu[k], -0.5 * (1.0 + beta)); };
    for (int k = 1; k < n; ++k) {
        const double h = sol.u[k] - sol.u[k - 1];
        th[k] = th[k - 1] + 0.5 * h * q * (a(k - 1) + a(k));
        lam[k] = lam[k - 1] + 0.5 * h * (sp(k - 1) * std::sin(th[k - 1]) + sp(k) * std::sin(th[k]));
        mu[k] = mu[k - 1] + 0.5 * h * (sp(k - 1) * std::cos(th[k - 1]) + sp(k) * std::cos(th[k]));
    }
    Array2D<Vec3> pts(spec.n0, spec.n1);
    for (int i = 0; i < spec.n0; ++i) {
        const double u = spec.x(i);
        const int k = detail::window4(sol.u, u);
        const double r = 1.0 - detail::lagrange4(&sol.u[k], &lam[k], u);
        const double z = detail::lagrange4(&sol.u[k], &mu[k], u);
        for (int j = 0; j < spec.n1; ++j) {
            const double phi = spec.y(j);
            pts(i, j) = Vec3(r * std::cos(phi), r * std::sin(phi), z);
        }
    }
    return SurfaceGrid(spec, std::move(pts));
}

struct ReconstructOptions {
    double tol_pde = 1e-6;
    /// CompatibilityError above this multiple of the grid extent.
    double tol_compat = 1e-3;
    bool check_pde = true;
};

struct Reconstruction {
    SurfaceGrid grid;
    double pde_residual = 0.0;
    /// max |z| difference between the v-first and u-first integration orders.
    double compatibility_defect = 0.0;
    /// max deviation from orthonormality before re-orthonormalization,
    /// per unit parameter length.
    double frame_drift = 0.0;
};

namespace detail {

/// Frame X, Y, l with the point z.
struct Frame {
    Vec3 z, X, Y, l;
};

struct LineCoefficients {
    std::vector<double> metric, nuk, gam;
};

/// Node coefficient interpolated at k + 1/2 by cubic Lagrange.
inline double half_node(const std::vector<double>& c, int k) {
    const int n = int(c.size());
    if (n < 4) return 0.5 * (c[k] + c[k + 1]);
    if (k == 0) return (5.0 * c[0] + 15.0 * c[1] - 5.0 * c[2] + c[3]) / 16.0;
    if (k == n - 2) return (c[n - 4] - 5.0 * c[n - 3] + 15.0 * c[n - 2] + 5.0 * c[n - 1]) / 16.0;
    return (-c[k - 1] + 9.0 * c[k] + 9.0 * c[k + 1] - c[k + 2]) / 16.0;
}

/// dir 0: derivative along u; dir 1: along v.
inline Frame frame_rate(int dir, double m, double nuk, double gam, const Frame& f) {
    if (dir == 0) return {m * f.X, m * (gam * f.Y + nuk * f.l), -m * gam * f.X, -m * nuk * f.X};
    return {m * f.Y, m * gam * f.Y, m * (-gam * f.X + nuk * f.l), -m * nuk * f.Y};
}

inline Frame frame_axpy(const Frame& f, double h, const Frame& d) {
    return {f.z + h * d.z, f.X + h * d.X, f.Y + h * d.Y, f.l + h * d.l};
}

inline double orthonormality_defect(const Frame& f) {
    return std::max({std::abs(f.X.norm() - 1.0), std::abs(f.Y.norm() - 1.0), std::abs(f.l.norm() - 1.0),
                     std::abs(f.X.dot(f.Y)), std::abs(f.X.dot(f.l)), std::abs(f.Y.dot(f.l))});
}

inline void reorthonormalize(Frame& f) {
    f.X.normalize();
    f.Y -= f.X.dot(f.Y) * f.X;
    f.Y.normalize();
    f.l = f.X.cross(f.Y);
}

/// Integrates the frame along one parameter line; out[0] = start.
inline std::vector<Frame> integrate_line(int dir, const LineCoefficients& c, double h, const Frame& start,
                                         double& drift) {
    const int n = int(c.metric.size());
    std::vector<Frame> out(n);
    out[0] = start;
    for (int k = 0; k + 1 < n; ++k) {
        const double mh = half_node(c.metric, k), nh = half_node(c.nuk, k), gh = half_node(c.gam, k);
        const Frame& f = out[k];
        const Frame k1 = frame_rate(dir, c.metric[k], c.nuk[k], c.gam[k], f);
        const Frame k2 = frame_rate(dir, mh, nh, gh, frame_axpy(f, 0.5 * h, k1));
        const Frame k3 = frame_rate(dir, mh, nh, gh, frame_axpy(f, 0.5 * h, k2));
        const Frame k4 = frame_rate(dir, c.metric[k + 1], c.nuk[k + 1], c.gam[k + 1], frame_axpy(f, h, k3));
        Frame g = f;
        g.z += h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z);
        g.X += h / 6.0 * (k1.X + 2.0 * k2.X + 2.0 * k3.X + k4.X);
        g.Y += h / 6.0 * (k1.Y + 2.0 * k2.Y + 2.0 * k3.Y + k4.Y);
        g.l += h / 6.0 * (k1.l + 2.0 * k2.l + 2.0 * k3.l + k4.l);
        drift = std::max(drift, orthonormality_defect(g) / h);
        reorthonormalize(g);
        out[k + 1] = g;
    }
    return out;
}

} // namespace detail

/// Surface determined by a natural-PDE solution: E, G from the natural
/// metric, nu1 = f(nu), nu2 = g(nu), gamma1, gamma2 from the field. The
/// frame starts at (e1, e2, e3) at node (0,0) with z = 0.
inline Reconstruction reconstruct_surface(const WeingartenPair& p, const NaturalGauge& gauge, const NuField& nu,
                                          const ReconstructOptions& opt = {}) {
    gauge.validate(p);
    const GridSpec& s = nu.grid;
    s.validate();
    Reconstruction rec;
    rec.pde_residual = natural_pde_residual(p, gauge, nu).maxAbs;
    if (opt.check_pde && !(rec.pde_residual < opt.tol_pde))
        throw PDEResidualError("natural PDE residual " + std::to_string(rec.pde_residual) + " exceeds " +
                               std::to_string(opt.tol_pde));
    const auto [g1, g2] = geodesic_curvatures_from_nu(p, gauge, nu);
    Scalar2D sE(s.n0, s.n1), sG(s.n0, s.n1), n1(s.n0, s.n1), n2(s.n0, s.n1);
    for (int i = 0; i < s.n0; ++i)
        for (int j = 0; j < s.n1; ++j) {
            const auto [E, G] = natural_metric(p, gauge, nu(i, j));
            sE(i, j) = std::sqrt(E);
            sG(i, j) = std::sqrt(G);
            n1(i, j) = p.f(nu(i, j));
            n2(i, j) = p.g(nu(i, j));
        }
    auto u_line = [&](int j) {
        detail::LineCoefficients c;
        for (int i = 0; i < s.n0; ++i) {
            c.metric.push_back(sE(i, j));
            c.nuk.push_back(n1(i, j));
            c.gam.push_back(g1(i, j));
        }
        return c;
    };
    auto v_line = [&](int i) {
        detail::LineCoefficients c;
        for (int j = 0; j < s.n1; ++j) {
            c.metric.push_back(sG(i, j));
            c.nuk.push_back(n2(i, j));
            c.gam.push_back(g2(i, j));
        }
        return c;
    };
    const detail::Frame origin{Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};

    // v-start line at i = 0, then u-lines.
    Array2D<Vec3> za(s.n0, s.n1), zb(s.n0, s.n1);
    const auto start_v = detail::integrate_line(1, v_line(0), s.h1, origin, rec.frame_drift);
    for (int j = 0; j < s.n1; ++j) {
        const auto line = detail::integrate_line(0, u_line(j), s.h0, start_v[j], rec.frame_drift);
        for (int i = 0; i < s.n0; ++i) za(i, j) = line[i].z;
    }
    // u-start line at j = 0, then v-lines.
    const auto start_u = detail::integrate_line(0, u_line(0), s.h0, origin, rec.frame_drift);
    for (int i = 0; i < s.n0; ++i) {
        const auto line = detail::integrate_line(1, v_line(i), s.h1, start_u[i], rec.frame_drift);
        for (int j = 0; j < s.n1; ++j) zb(i, j) = line[j].z;
    }
    for (int i = 0; i < s.n0; ++i)
        for (int j = 0; j < s.n1; ++j)
            rec.compatibility_defect = std::max(rec.compatibility_defect, (za(i, j) - zb(i, j)).norm());
    rec.grid = SurfaceGrid(s, std::move(za));
    const double scale = std::max(rec.grid.extent(), 1e-300);
    if (rec.compatibility_defect > opt.tol_compat * scale)
        throw CompatibilityError("integration orders disagree by " + std::to_string(rec.compatibility_defect) +
                                 " on a grid of extent " + std::to_string(scale));
    return rec;
}

} // namespace wsurf
