#pragma once

#include <cmath>
#include <string>

#include "weingarten.hpp"

namespace wsurf {

struct ParallelOffset {
    double a = 0.0;
    int epsilon = 1;
};

struct OffsetOptions {
    /// Lower bound on |1 - a nu| at every node.
    double guard = 1e-6;
};

struct OffsetResult {
    SurfaceGrid grid;
    ParallelOffset offset;
};

inline void require_offset(double a) {
    if (a == 0.0 || !std::isfinite(a)) throw DomainError("offset distance must be nonzero and finite");
}

/// Offset z + a l along the orientation-normalized unit normal. Works on
/// any regular grid; principal curvatures come from the shape operator.
inline OffsetResult offset_surface(const SurfaceGrid& grid, double a, const OffsetOptions& opt = {}) {
    require_offset(a);
    GeometryOptions gopt;
    gopt.allow_umbilics = true;
    const FormField ff = second_fundamental_form(grid, gopt);
    const GridSpec& s = grid.spec();
    Array2D<Vec3> pts(s.n0, s.n1);
    int eps = 0;
    for (int i = 0; i < s.n0; ++i)
        for (int j = 0; j < s.n1; ++j) {
            const double E = ff.E(i, j), F = ff.F(i, j), G = ff.G(i, j);
            const double L = ff.L(i, j), M = ff.M(i, j), N = ff.N(i, j);
            const double det = E * G - F * F;
            const double K = (L * N - M * M) / det;
            const double H = (E * N - 2.0 * F * M + G * L) / (2.0 * det);
            const double root = std::sqrt(std::max(0.0, H * H - K));
            const double p1 = 1.0 - a * (H + root), p2 = 1.0 - a * (H - root);
            if (std::abs(p1) <= opt.guard || std::abs(p2) <= opt.guard)
                throw SingularOffsetError("focal set crossed at node (" + std::to_string(i) + "," + std::to_string(j) + ")");
            const int e = p1 * p2 > 0.0 ? 1 : -1;
            if (eps != 0 && e != eps) throw SingularOffsetError("epsilon changes sign across the grid");
            eps = e;
            pts(i, j) = grid(i, j) + a * ff.normal(i, j);
        }
    return {SurfaceGrid(s, std::move(pts)), ParallelOffset{a, eps}};
}

struct ParallelCurvatures {
    double nu1 = 0.0;
    double nu2 = 0.0;
    int epsilon = 1;
};

inline int offset_sign(double nu1, double nu2, double a, double guard = 0.0) {
    const double p1 = 1.0 - a * nu1, p2 = 1.0 - a * nu2;
    if (!(std::abs(p1) > guard) || !(std::abs(p2) > guard)) throw SingularOffsetError("(1 - a nu1)(1 - a nu2) vanishes");
    return p1 * p2 > 0.0 ? 1 : -1;
}

/// Principal curvatures of the parallel surface at distance a.
inline ParallelCurvatures parallel_principal_curvatures(double nu1, double nu2, double a) {
    require_offset(a);
    const int eps = offset_sign(nu1, nu2, a);
    return {eps * nu1 / (1.0 - a * nu1), eps * nu2 / (1.0 - a * nu2), eps};
}

/// Inverse of parallel_principal_curvatures for a known epsilon.
inline ParallelCurvatures original_principal_curvatures(double nu1bar, double nu2bar, double a, int eps) {
    require_offset(a);
    const double q1 = 1.0 + a * eps * nu1bar, q2 = 1.0 + a * eps * nu2bar;
    if (q1 == 0.0 || q2 == 0.0) throw SingularOffsetError("1 + a eps nubar vanishes");
    return {eps * nu1bar / q1, eps * nu2bar / q2, eps};
}

struct Invariants {
    double K = 0.0;
    double H = 0.0;
    double Hprime = 0.0;
    int epsilon = 1;
};

/// Invariants of the parallel surface, computed through the principal
/// curvatures and cross-checked against the closed relations back to the
/// original invariants.
inline Invariants parallel_invariants(double K, double H, double Hprime, double a) {
    const auto pc = parallel_principal_curvatures(H + Hprime, H - Hprime, a);
    Invariants out{pc.nu1 * pc.nu2, 0.5 * (pc.nu1 + pc.nu2), 0.5 * (pc.nu1 - pc.nu2), pc.epsilon};
    const double D = 1.0 + 2.0 * a * out.epsilon * out.H + a * a * out.K;
    if (D == 0.0) throw SingularOffsetError("1 + 2 a eps Hbar + a^2 Kbar vanishes");
    const double scale = std::max({1.0, std::abs(K), std::abs(H), std::abs(Hprime)});
    const double dK = std::abs(out.K / D - K), dH = std::abs((out.epsilon * out.H + a * out.K) / D - H);
    const double dHp = std::abs(out.epsilon * out.Hprime / D - Hprime);
    if (std::max({dK, dH, dHp}) > 1e-12 * scale * std::max(1.0, 1.0 / std::abs(D)))
        throw SingularOffsetError("invariant relations inconsistent; offset too close to the focal set");
    return out;
}

/// Weingarten functions of the parallel family member at distance a.
inline WeingartenPair parallel_weingarten_pair(const WeingartenPair& p, double a, double guard = 1e-6) {
    require_offset(a);
    int eps = 0;
    const int samples = 1000;
    for (int k = 0; k < samples; ++k) {
        const double x = p.domain.lo + p.domain.width() * k / (samples - 1);
        const int e = offset_sign(p.f(x), p.g(x), a, guard);
        if (eps != 0 && e != eps) throw SingularOffsetError("epsilon changes sign on the pair interval");
        eps = e;
    }
    WeingartenPair q;
    q.kind = "parallel(" + p.kind + ")";
    q.domain = p.domain;
    const double e = eps;
    q.f = [p, a, e](double x) { return e * p.f(x) / (1.0 - a * p.f(x)); };
    q.df = [p, a, e](double x) { const double d = 1.0 - a * p.f(x); return e * p.df(x) / (d * d); };
    q.d2f = [p, a, e](double x) {
        const double d = 1.0 - a * p.f(x), fp = p.df(x);
        return e * (p.d2f(x) / (d * d) + 2.0 * a * fp * fp / (d * d * d));
    };
    q.g = [p, a, e](double x) { return e * p.g(x) / (1.0 - a * p.g(x)); };
    q.dg = [p, a, e](double x) { const double d = 1.0 - a * p.g(x); return e * p.dg(x) / (d * d); };
    q.d2g = [p, a, e](double x) {
        const double d = 1.0 - a * p.g(x), gp = p.dg(x);
        return e * (p.d2g(x) / (d * d) + 2.0 * a * gp * gp / (d * d * d));
    };
    if (p.If_closed)
        q.If_closed = [p, a](double n0, double n) {
            return p.If_closed(n0, n) - std::log(std::abs(1.0 - a * p.f(n))) + std::log(std::abs(1.0 - a * p.f(n0)));
        };
    const double mid = p.domain.mid();
    if ((q.f(mid) - q.g(mid) > 0.0) != (p.f(mid) - p.g(mid) > 0.0))
        throw SingularOffsetError("offset pair reverses the curvature ordering");
    return q;
}

inline int parallel_epsilon(const WeingartenPair& p, double a) {
    const double x = p.domain.mid();
    return offset_sign(p.f(x), p.g(x), a);
}

/// Gauge of the parallel surface: abar^-2 = a^-2 (1 - a f0)^2 and
/// bbar^-2 = b^-2 (1 - a g0)^2, same base value.
inline NaturalGauge parallel_gauge(const WeingartenPair& p, const NaturalGauge& gauge, double a) {
    const double f0 = p.f(gauge.nu0), g0 = p.g(gauge.nu0);
    return {gauge.a / std::abs(1.0 - a * f0), gauge.b / std::abs(1.0 - a * g0), gauge.nu0};
}

/// Max relative deviation of sqrt(Ebar Gbar)(fbar - gbar) from its mean
/// over `samples` values of nu in the given range.
inline double verify_parallel_naturality(const WeingartenPair& p, const NaturalGauge& gauge, double a, Interval range,
                                         int samples = 201) {
    const WeingartenPair q = parallel_weingarten_pair(p, a);
    std::vector<double> vals(samples);
    double mean = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double x = range.lo + range.width() * k / (samples - 1);
        const auto [E, G] = natural_metric(p, gauge, x);
        const double Eb = std::pow(1.0 - a * p.f(x), 2) * E, Gb = std::pow(1.0 - a * p.g(x), 2) * G;
        vals[k] = std::sqrt(Eb * Gb) * (q.f(x) - q.g(x));
        mean += vals[k] / samples;
    }
    double dev = 0.0;
    for (double v : vals) dev = std::max(dev, std::abs(v - mean));
    return dev / std::abs(mean);
}

struct PdeInvarianceReport {
    /// max |Rbar - R| over interior nodes.
    double raw_difference = 0.0;
    /// max |eps (1-af)^2 (1-ag)^2 Rbar - R| relative to max |R|.
    double rescaled_defect = 0.0;
    double residual_scale = 0.0;
    int epsilon = 1;
};

/// Compares the natural-PDE residual of a field for a pair and for its
/// parallel pair with the transported gauge.
inline PdeInvarianceReport verify_pde_invariance(const WeingartenPair& p, const NaturalGauge& gauge, double a,
                                                 const NuField& nu) {
    const WeingartenPair q = parallel_weingarten_pair(p, a);
    const NaturalGauge qg = parallel_gauge(p, gauge, a);
    const int eps = parallel_epsilon(p, a);
    const auto R = natural_pde_residual(p, gauge, nu);
    const auto Rb = natural_pde_residual(q, qg, nu);
    PdeInvarianceReport rep;
    rep.epsilon = eps;
    double worst = 0.0;
    for (int i = 1; i < nu.grid.n0 - 1; ++i)
        for (int j = 1; j < nu.grid.n1 - 1; ++j) {
            const double x = nu(i, j);
            const double w = std::pow((1.0 - a * p.f(x)) * (1.0 - a * p.g(x)), 2);
            rep.raw_difference = std::max(rep.raw_difference, std::abs(Rb.values(i, j) - R.values(i, j)));
            worst = std::max(worst, std::abs(eps * w * Rb.values(i, j) - R.values(i, j)));
            rep.residual_scale = std::max(rep.residual_scale, std::abs(R.values(i, j)));
        }
    rep.rescaled_defect = worst / std::max(rep.residual_scale, 1e-300);
    return rep;
}

} // namespace wsurf
