#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "weingarten.hpp"

namespace wsurf {

/// laplace: f_xx + f_yy, wave: f_xx - f_yy,
/// star: f_xx + (1/f)_yy, star_bar: f_xx - (1/f)_yy.
enum class OperatorKind { laplace, wave, star, star_bar };

inline const char* operator_symbol(OperatorKind k) {
    switch (k) {
    case OperatorKind::laplace: return "Δ";
    case OperatorKind::wave: return "Δ̄";
    case OperatorKind::star: return "Δ*";
    case OperatorKind::star_bar: return "Δ̄*";
    }
    return "?";
}

inline bool uses_reciprocal(OperatorKind k) { return k == OperatorKind::star || k == OperatorKind::star_bar; }
inline double y_sign(OperatorKind k) { return k == OperatorKind::laplace || k == OperatorKind::star ? 1.0 : -1.0; }

/// Operator applied to w(lambda) with right-hand side r(lambda).
struct NaturalPDEProblem {
    int row = 0;
    OperatorKind kind = OperatorKind::laplace;
    Fn w, dw, d2w;
    /// Optional inverse of w, used by the marching solver.
    Fn w_inverse;
    Fn rhs, drhs;
    /// Optional antiderivative of rhs vanishing at 0, used for energies.
    Fn potential;
    std::function<bool(double)> in_range;
    /// Geometric function nu in terms of the unknown, as printed.
    std::string substitution;
    std::string equation;

    bool admissible(double x) const { return std::isfinite(x) && (!in_range || in_range(x)); }
};

/// Identity transform.
inline void set_identity_transform(NaturalPDEProblem& p) {
    p.w = [](double x) { return x; };
    p.dw = [](double) { return 1.0; };
    p.d2w = [](double) { return 0.0; };
    p.w_inverse = [](double x) { return x; };
}

struct OperatorOptions {
    /// Central stencil accuracy: 2, 4 or 6.
    int order = 2;
    double eps_inv = 1e-8;
};

/// Discrete operator at nodes where the full stencil fits.
inline ResidualField apply_operator(OperatorKind kind, const ScalarField2D& field, const OperatorOptions& opt = {}) {
    const GridSpec& g = field.grid;
    const auto w = fd::central_d2_weights(opt.order);
    const int half = opt.order / 2;
    Scalar2D q = field.values;
    if (uses_reciprocal(kind)) {
        for (auto& x : q.data()) {
            if (!(std::abs(x) > opt.eps_inv)) throw ReciprocalSingularityError("field too close to zero for the reciprocal");
            x = 1.0 / x;
        }
    }
    const double s = y_sign(kind);
    Scalar2D out(g.n0, g.n1, 0.0);
    for (int i = half; i < g.n0 - half; ++i)
        for (int j = half; j < g.n1 - half; ++j)
            out(i, j) = fd::central_d2_at(field.values, 0, g.h0, i, j, w) + s * fd::central_d2_at(q, 1, g.h1, i, j, w);
    return ResidualField::from(std::move(out), half);
}

/// apply_operator(kind, w(field)) - r(field).
inline ResidualField pde_residual(const NaturalPDEProblem& p, const ScalarField2D& field, const OperatorOptions& opt = {}) {
    ScalarField2D W(field.grid);
    for (std::size_t k = 0; k < field.values.size(); ++k) {
        const double x = field.values.data()[k];
        if (!p.admissible(x)) throw RangeViolationError("field value " + std::to_string(x) + " outside the problem range");
        W.values.data()[k] = p.w(x);
    }
    auto r = apply_operator(p.kind, W, opt);
    const int m = r.margin;
    for (int i = m; i < field.grid.n0 - m; ++i)
        for (int j = m; j < field.grid.n1 - m; ++j) r.values(i, j) -= p.rhs(field(i, j));
    return ResidualField::from(std::move(r.values), m);
}

/// Solution of the Laplace equation with the boundary ring of `boundary`.
inline ScalarField2D harmonic_extension(const ScalarField2D& boundary) {
    const GridSpec& g = boundary.grid;
    const int m0 = g.n0 - 2, m1 = g.n1 - 2;
    auto idx = [m1](int i, int j) { return (i - 1) * m1 + (j - 1); };
    const double cx = 1.0 / (g.h0 * g.h0), cy = 1.0 / (g.h1 * g.h1);
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m0 * m1);
    for (int i = 1; i <= m0; ++i)
        for (int j = 1; j <= m1; ++j) {
            const int k = idx(i, j);
            trip.emplace_back(k, k, -2.0 * (cx + cy));
            const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
            const double c[4] = {cx, cx, cy, cy};
            for (int t = 0; t < 4; ++t) {
                const int a = nb[t][0], b = nb[t][1];
                if (a == 0 || b == 0 || a == g.n0 - 1 || b == g.n1 - 1) rhs[k] -= c[t] * boundary(a, b);
                else trip.emplace_back(k, idx(a, b), c[t]);
            }
        }
    Eigen::SparseMatrix<double> A(m0 * m1, m0 * m1);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
    const Eigen::VectorXd x = lu.solve(rhs);
    ScalarField2D out = boundary;
    for (int i = 1; i <= m0; ++i)
        for (int j = 1; j <= m1; ++j) out(i, j) = x[idx(i, j)];
    return out;
}

struct SolveResult {
    ScalarField2D field;
    NewtonReport report;
};

struct EllipticOptions {
    NewtonOptions newton;
    /// 2: five-point stencil. 4: compact nine-point stencil (laplace only,
    /// equal spacings), Δ_9 w = (8 r_C + r_E + r_W + r_N + r_S) / 12.
    int order = 2;
};

/// Damped Newton on the discretized equation with Dirichlet data from the
/// boundary ring of `boundary`. Accepts the elliptic operators laplace and
/// star_bar (for monotone w), and star, whose Dirichlet problem is not well
/// posed but is often solvable on small grids.
inline SolveResult solve_elliptic(const NaturalPDEProblem& p, const ScalarField2D& boundary, const ScalarField2D& init,
                                  const EllipticOptions& eopt) {
    if (p.kind == OperatorKind::wave) throw IllPosedError("the wave operator has no Dirichlet solver; use solve_hyperbolic");
    if (!(boundary.grid == init.grid)) throw DomainError("boundary and initial fields must share a grid");
    const GridSpec& g = init.grid;
    const NewtonOptions& opt = eopt.newton;
    if (eopt.order != 2 && eopt.order != 4) throw UsageError("elliptic order must be 2 or 4");
    const bool compact = eopt.order == 4;
    if (compact && p.kind != OperatorKind::laplace) throw UsageError("the compact stencil supports the laplace operator only");
    if (compact && std::abs(g.h0 - g.h1) > 1e-12 * g.h0) throw UsageError("the compact stencil needs equal spacings");
    const int m0 = g.n0 - 2, m1 = g.n1 - 2;
    auto idx = [m1](int i, int j) { return (i - 1) * m1 + (j - 1); };
    const double cx = 1.0 / (g.h0 * g.h0), cy = 1.0 / (g.h1 * g.h1);
    const double s = y_sign(p.kind);
    const bool recip = uses_reciprocal(p.kind);

    ScalarField2D work = init;
    for (int i = 0; i < g.n0; ++i)
        for (int j = 0; j < g.n1; ++j)
            if (work.on_boundary(i, j)) work(i, j) = boundary(i, j);
    for (double x : work.values.data())
        if (!p.admissible(x)) throw RangeViolationError("boundary or initial data outside the problem range");

    auto load = [&](const Eigen::VectorXd& x) {
        for (int i = 1; i <= m0; ++i)
            for (int j = 1; j <= m1; ++j) work(i, j) = x[idx(i, j)];
    };
    auto qf = [&](double x) { return recip ? 1.0 / p.w(x) : p.w(x); };
    auto dqf = [&](double x) {
        if (!recip) return p.dw(x);
        const double w = p.w(x);
        return -p.dw(x) / (w * w);
    };
    auto drhs = [&](double x) {
        if (p.drhs) return p.drhs(x);
        const double h = 1e-6 * std::max(1.0, std::abs(x));
        return (p.rhs(x + h) - p.rhs(x - h)) / (2.0 * h);
    };

    NewtonSystem sys;
    sys.admissible = [&](const Eigen::VectorXd& x) {
        for (int k = 0; k < x.size(); ++k)
            if (!p.admissible(x[k])) return false;
        if (recip)
            for (int k = 0; k < x.size(); ++k)
                if (!(std::abs(p.w(x[k])) > 1e-8)) return false;
        return true;
    };
    const int di[8] = {-1, 1, 0, 0, -1, -1, 1, 1}, dj[8] = {0, 0, -1, 1, -1, 1, -1, 1};
    const double c9 = 1.0 / (6.0 * g.h0 * g.h0);
    sys.residual = [&](const Eigen::VectorXd& x) {
        load(x);
        Eigen::VectorXd F(m0 * m1);
        for (int i = 1; i <= m0; ++i)
            for (int j = 1; j <= m1; ++j) {
                const double a = work(i, j);
                if (compact) {
                    double lap = -20.0 * p.w(a), r = 8.0 * p.rhs(a);
                    for (int t = 0; t < 8; ++t) {
                        const double b = work(i + di[t], j + dj[t]);
                        lap += (t < 4 ? 4.0 : 1.0) * p.w(b);
                        if (t < 4) r += p.rhs(b);
                    }
                    F[idx(i, j)] = c9 * lap - r / 12.0;
                    continue;
                }
                F[idx(i, j)] = cx * (p.w(work(i - 1, j)) - 2.0 * p.w(a) + p.w(work(i + 1, j))) +
                               s * cy * (qf(work(i, j - 1)) - 2.0 * qf(a) + qf(work(i, j + 1))) - p.rhs(a);
            }
        return F;
    };
    sys.jacobian = [&](const Eigen::VectorXd& x) {
        load(x);
        std::vector<Eigen::Triplet<double>> trip;
        if (compact) {
            trip.reserve(std::size_t(9 * m0 * m1));
            for (int i = 1; i <= m0; ++i)
                for (int j = 1; j <= m1; ++j) {
                    const int k = idx(i, j);
                    const double a = work(i, j);
                    trip.emplace_back(k, k, -20.0 * c9 * p.dw(a) - 8.0 * drhs(a) / 12.0);
                    for (int t = 0; t < 8; ++t) {
                        const int a0 = i + di[t], a1 = j + dj[t];
                        if (a0 < 1 || a0 > m0 || a1 < 1 || a1 > m1) continue;
                        const double b = work(a0, a1);
                        double d = (t < 4 ? 4.0 : 1.0) * c9 * p.dw(b);
                        if (t < 4) d -= drhs(b) / 12.0;
                        trip.emplace_back(k, idx(a0, a1), d);
                    }
                }
            Eigen::SparseMatrix<double> J(m0 * m1, m0 * m1);
            J.setFromTriplets(trip.begin(), trip.end());
            return J;
        }
        trip.reserve(std::size_t(5 * m0 * m1));
        for (int i = 1; i <= m0; ++i)
            for (int j = 1; j <= m1; ++j) {
                const int k = idx(i, j);
                const double a = work(i, j);
                trip.emplace_back(k, k, -2.0 * cx * p.dw(a) - 2.0 * s * cy * dqf(a) - drhs(a));
                if (i > 1) trip.emplace_back(k, idx(i - 1, j), cx * p.dw(work(i - 1, j)));
                if (i < m0) trip.emplace_back(k, idx(i + 1, j), cx * p.dw(work(i + 1, j)));
                if (j > 1) trip.emplace_back(k, idx(i, j - 1), s * cy * dqf(work(i, j - 1)));
                if (j < m1) trip.emplace_back(k, idx(i, j + 1), s * cy * dqf(work(i, j + 1)));
            }
        Eigen::SparseMatrix<double> J(m0 * m1, m0 * m1);
        J.setFromTriplets(trip.begin(), trip.end());
        return J;
    };

    Eigen::VectorXd x(m0 * m1);
    for (int i = 1; i <= m0; ++i)
        for (int j = 1; j <= m1; ++j) x[idx(i, j)] = work(i, j);
    SolveResult out;
    out.report = newton_solve(sys, x, opt);
    load(x);
    out.field = work;
    return out;
}

inline SolveResult solve_elliptic(const NaturalPDEProblem& p, const ScalarField2D& boundary, const ScalarField2D& init,
                                  const NewtonOptions& opt = {}) {
    return solve_elliptic(p, boundary, init, EllipticOptions{opt, 2});
}

enum class XBoundary { outflow, periodic };

struct HyperbolicOptions {
    XBoundary boundary = XBoundary::outflow;
    double eps_inv = 1e-8;
};

struct HyperbolicResult {
    ScalarField2D field;
    /// Discrete energy per interior level (wave operator only).
    std::vector<double> energy;
    double energy_drift = 0.0;
};

namespace detail {
inline double invert_transform(const NaturalPDEProblem& p, double target, double guess) {
    if (p.w_inverse) return p.w_inverse(target);
    double x = guess;
    for (int it = 0; it < 60; ++it) {
        const double step = (p.w(x) - target) / p.dw(x);
        x -= step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    return x;
}
} // namespace detail

/// Explicit leapfrog marching in y from lambda and lambda_y on y = y0.
/// The wave operator marches lambda itself; the star operator marches
/// q = 1/w(lambda) with local wave speed |w|.
inline HyperbolicResult solve_hyperbolic(const NaturalPDEProblem& p, const std::vector<double>& line,
                                         const std::vector<double>& line_dy, double x0, double dx, double dy, int steps,
                                         const HyperbolicOptions& opt = {}) {
    if (p.kind == OperatorKind::laplace || p.kind == OperatorKind::star_bar)
        throw IllPosedError(std::string("marching the elliptic operator ") + operator_symbol(p.kind) + " is ill posed");
    const int nx = int(line.size());
    if (nx < 5 || int(line_dy.size()) != nx) throw DomainError("initial line needs at least 5 matching samples");
    if (!(dx > 0.0) || !(dy > 0.0) || steps < 1) throw DomainError("spacings and step count must be positive");
    const bool recip = p.kind == OperatorKind::star;

    double cmax = 1.0;
    if (recip) {
        cmax = 0.0;
        for (double x : line) cmax = std::max(cmax, std::abs(p.w(x)));
    }
    if (dy * cmax > dx * (1.0 + 1e-12))
        throw CFLError("dy * c = " + std::to_string(dy * cmax) + " exceeds dx = " + std::to_string(dx));

    auto Q = [&](double x) {
        if (!recip) return x;
        const double w = p.w(x);
        if (!(std::abs(w) > opt.eps_inv)) throw ReciprocalSingularityError("w(lambda) too close to zero");
        return 1.0 / w;
    };
    auto dQ = [&](double x) {
        if (!recip) return 1.0;
        const double w = p.w(x);
        return -p.dw(x) / (w * w);
    };
    auto Qinv = [&](double q, double guess) {
        if (!recip) return q;
        if (!(std::abs(q) > opt.eps_inv)) throw ReciprocalSingularityError("marched reciprocal too close to zero");
        return detail::invert_transform(p, 1.0 / q, guess);
    };
    const bool periodic = opt.boundary == XBoundary::periodic;
    auto accel = [&](const std::vector<double>& lam, std::vector<double>& out) {
        out.assign(nx, 0.0);
        for (int i = 0; i < nx; ++i) {
            int im = i - 1, ip = i + 1;
            if (periodic) {
                im = (im + nx) % nx;
                ip = ip % nx;
            } else if (i == 0 || i == nx - 1) {
                continue;
            }
            const double wxx = recip ? (p.w(lam[im]) - 2.0 * p.w(lam[i]) + p.w(lam[ip])) / (dx * dx)
                                     : (lam[im] - 2.0 * lam[i] + lam[ip]) / (dx * dx);
            out[i] = recip ? p.rhs(lam[i]) - wxx : wxx - p.rhs(lam[i]);
        }
    };
    auto close_boundary = [&](std::vector<double>& lam, std::vector<double>& q) {
        if (periodic) return;
        lam[0] = lam[1];
        lam[nx - 1] = lam[nx - 2];
        q[0] = q[1];
        q[nx - 1] = q[nx - 2];
    };

    GridSpec grid{nx, steps + 1, x0, 0.0, dx, dy};
    HyperbolicResult res;
    res.field = ScalarField2D(grid);
    std::vector<double> lam0 = line, q0(nx), q1(nx), lam1(nx), acc;
    for (int i = 0; i < nx; ++i) {
        if (!p.admissible(lam0[i])) throw RangeViolationError("initial data outside the problem range");
        q0[i] = Q(lam0[i]);
    }
    accel(lam0, acc);
    for (int i = 0; i < nx; ++i) {
        q1[i] = q0[i] + dy * dQ(lam0[i]) * line_dy[i] + 0.5 * dy * dy * acc[i];
        lam1[i] = Qinv(q1[i], lam0[i]);
    }
    close_boundary(lam1, q1);
    for (int i = 0; i < nx; ++i) {
        res.field(i, 0) = lam0[i];
        if (steps >= 1) res.field(i, 1) = lam1[i];
    }
    std::vector<double> q2(nx), lam2(nx);
    for (int n = 1; n < steps; ++n) {
        accel(lam1, acc);
        for (int i = 0; i < nx; ++i) {
            q2[i] = 2.0 * q1[i] - q0[i] + dy * dy * acc[i];
            lam2[i] = Qinv(q2[i], lam1[i]);
            if (!p.admissible(lam2[i])) throw RangeViolationError("marched solution left the problem range");
        }
        close_boundary(lam2, q2);
        for (int i = 0; i < nx; ++i) res.field(i, n + 1) = lam2[i];
        std::swap(q0, q1);
        std::swap(q1, q2);
        std::swap(lam1, lam2);
    }

    if (!recip) {
        Fn V = p.potential;
        if (!V) V = [&p](double x) { return adaptive_simpson(p.rhs, 0.0, x, 1e-12); };
        for (int n = 1; n < steps; ++n) {
            double e = 0.0;
            for (int i = 0; i < nx; ++i) {
                const double ly = (res.field(i, n + 1) - res.field(i, n - 1)) / (2.0 * dy);
                e += dx * (0.5 * ly * ly + V(res.field(i, n)));
                if (i + 1 < nx) {
                    const double lx = (res.field(i + 1, n) - res.field(i, n)) / dx;
                    e += dx * 0.5 * lx * lx;
                }
            }
            res.energy.push_back(e);
        }
        if (!res.energy.empty()) {
            const double e0 = res.energy.front();
            for (double e : res.energy) res.energy_drift = std::max(res.energy_drift, std::abs(e - e0) / std::abs(e0));
        }
    }
    return res;
}

/// Closed-form solutions of the basic-class equations:
/// row 1 radial Liouville profile, row 8 static kink, row 9 logarithmic
/// parabola ln(c - x^2), and constant solutions for rows 2, 3, 6, 7, 10.
inline ScalarField2D exact_solution(int row, const std::vector<double>& params, const GridSpec& grid) {
    grid.validate();
    auto param = [&](std::size_t k, double dflt) { return k < params.size() ? params[k] : dflt; };
    switch (row) {
    case 1:
        return ScalarField2D::sample(grid, [](double x, double y) { return std::log(8.0) - 2.0 * std::log(1.0 + x * x + y * y); });
    case 2:
    case 3:
        return ScalarField2D(grid, 0.0);
    case 6:
    case 7: {
        const double b = param(0, row == 6 ? -3.0 : 0.5);
        for (double c : {-2.0 / (b - 1.0), -2.0 / (b + 1.0)})
            if (c > 0.0 && std::isfinite(c)) return ScalarField2D(grid, c);
        throw DomainError("no positive constant solution for beta = " + std::to_string(b));
    }
    case 8:
        return ScalarField2D::sample(grid, [](double x, double) { return 4.0 * std::atan(std::exp(x)); });
    case 9: {
        const double c = param(0, 4.0);
        const double xm = std::max(std::abs(grid.x0), std::abs(grid.x_max()));
        if (!(c - xm * xm > 0.0)) throw DomainError("c - x^2 must stay positive on the grid");
        return ScalarField2D::sample(grid, [c](double x, double) { return std::log(c - x * x); });
    }
    case 10:
        return ScalarField2D(grid, 0.0);
    case 4:
    case 5:
        throw DomainError("rows 4 and 5 have no closed-form field; integrate the rotational ODE instead");
    default:
        throw UsageError("row must be in 1..10");
    }
}

} // namespace wsurf
