#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "generators.hpp"
#include "linear_class.hpp"

namespace wsurf {

/// Basic class with the exemplar parameters filled in where the row needs
/// them: beta 3, 1/2, -3, 1/2 for rows 4..7 and (beta, gamma) = (1, -1) for row 10.
inline BasicClassId exemplar_class(int row, std::optional<double> beta = std::nullopt,
                                   std::optional<double> gamma = std::nullopt) {
    if (row < 1 || row > 10) throw UsageError("row must be in 1..10");
    if (!beta) {
        switch (row) {
        case 4: beta = 3.0; break;
        case 5: beta = 0.5; break;
        case 6: beta = -3.0; break;
        case 7: beta = 0.5; break;
        case 10: beta = 1.0; break;
        default: break;
        }
    }
    if (!gamma && row == 10) gamma = -1.0;
    return basic_class(row, beta, gamma);
}

/// Central stencil order for the residual of a row's exemplar.
inline int exemplar_order(int row) { return row == 1 ? 4 : row == 8 ? 6 : 2; }

/// Default exemplar patch: [0, 1/4]^2, shifted to x in [-1/2, -1/4] for row 8
/// where the recipe needs the kink below pi.
inline GridSpec exemplar_grid(int row, int n = 41) {
    const double x0 = row == 8 ? -0.5 : 0.0;
    return span_grid(n, n, x0, x0 + 0.25, 0.0, 0.25);
}

struct RowExemplar {
    BasicClassId id;
    NaturalPDEProblem pde;
    ScalarField2D field;
    int order = 2;
    ResidualField residual;
    std::string source;
};

/// Closed-form field of the row, or for rows 4 and 5 the rotational ODE
/// profile nu(x) (nu(0) = 1, nu'(0) = 0) extended constantly in y.
inline RowExemplar row_exemplar(const BasicClassId& id, const GridSpec& grid) {
    grid.validate();
    RowExemplar ex{id, basic_pde(id), ScalarField2D(grid), exemplar_order(id.row), {}, "closed form"};
    if (id.row == 4 || id.row == 5) {
        if (grid.x0 < 0.0) throw DomainError("rows 4 and 5 sample the rotational ODE on x >= 0");
        const auto sol = rotational_natural_ode(*id.beta, 1.0, 0.0, grid.x_max() + grid.h0, grid.h0 / 10.0, true);
        ex.field = ScalarField2D::sample(grid, [&](double x, double) {
            const int k = detail::window4(sol.u, x);
            return detail::lagrange4(&sol.u[k], &sol.nu[k], x);
        });
        ex.source = "rotational ODE profile";
    } else {
        std::vector<double> params;
        if (id.row == 6 || id.row == 7) params.push_back(*id.beta);
        ex.field = exact_solution(id.row, params, grid);
    }
    ex.residual = pde_residual(ex.pde, ex.field, OperatorOptions{ex.order});
    return ex;
}

struct RowSurface {
    SurfaceGrid grid;
    /// "rotational" (rows 4, 5) or "reconstruct".
    std::string method;
    WeingartenPair pair;
    NaturalGauge gauge;
    /// Natural PDE residual of nu = nu_of(exemplar) before the Newton polish.
    double natural_residual = 0.0;
    double compatibility_defect = 0.0;
    double frame_drift = 0.0;
    /// Interior max of |nu1 - f|, |nu2 - g| (reconstruct) or |nu1/nu2 - (beta+1)/(beta-1)| (rotational).
    double curvature_error = 0.0;
    /// Interior max of the row 4/5 relation on the rotational surface (zero for reconstructions).
    double relation_residual = 0.0;
};

namespace detail {

/// Gauge matched at the first usable point near lambda0.
inline GaugeMatch match_gauge_near(const NaturalPDEProblem& p, const RowRecipe& rc, double lambda0) {
    for (double d : {0.0, 0.1, -0.1, 0.25, -0.25, 0.5, -0.5}) {
        const double l1 = lambda0 + d;
        if (!rc.valid(l1) || !p.admissible(l1) || std::abs(p.rhs(l1)) <= 1e-12) continue;
        try {
            return match_gauge(p, rc, lambda0, l1);
        } catch (const DomainError&) {
        }
    }
    throw DomainError("no usable gauge matching point near lambda = " + std::to_string(lambda0));
}

inline GeometryOptions surface_check_options() {
    GeometryOptions go;
    go.tol_principal = 1e-3;
    return go;
}

} // namespace detail

/// Surface carrying the exemplar: the rotational surface for rows 4 and 5,
/// otherwise the reconstruction from nu = nu_of(field) after a Newton polish
/// of the natural PDE with the exemplar's boundary values.
inline RowSurface row_surface(const RowExemplar& ex, const ReconstructOptions& opt = {}) {
    RowSurface out;
    const GridSpec& g = ex.field.grid;
    const auto go = detail::surface_check_options();
    if (ex.id.row == 4 || ex.id.row == 5) {
        const double beta = *ex.id.beta;
        const auto sol = rotational_natural_ode(beta, 1.0, 0.0, g.x_max() + g.h0, g.h0 / 10.0, true);
        out.grid = rotational_basic45(beta, sol, g);
        out.method = "rotational";
        const auto cf = curvature_field(out.grid, go);
        const double q = (beta + 1.0) / (beta - 1.0);
        for (int i = 1; i < g.n0 - 1; ++i)
            for (int j = 1; j < g.n1 - 1; ++j)
                out.curvature_error = std::max(out.curvature_error, std::abs(cf.nu1(i, j) / cf.nu2(i, j) - q));
        out.relation_residual = check_relation(cf, LinearRelation{1.0, -beta, 0.0, 0.0}).maxAbs;
        return out;
    }
    const auto rc = row_recipe(ex.id);
    const auto gm = detail::match_gauge_near(ex.pde, rc, ex.field(g.n0 / 2, g.n1 / 2));
    NuField nu(g);
    for (int i = 0; i < g.n0; ++i)
        for (int j = 0; j < g.n1; ++j) nu(i, j) = rc.nu_of(ex.field(i, j));
    out.pair = rc.pair;
    out.gauge = gm.gauge;
    out.natural_residual = natural_pde_residual(rc.pair, gm.gauge, nu).maxAbs;
    if (out.natural_residual > 1e-12) nu = solve_natural_pde(rc.pair, gm.gauge, nu).nu;
    const auto rec = reconstruct_surface(rc.pair, gm.gauge, nu, opt);
    out.grid = rec.grid;
    out.method = "reconstruct";
    out.compatibility_defect = rec.compatibility_defect;
    out.frame_drift = rec.frame_drift;
    const auto cf = curvature_field(out.grid, go);
    for (int i = 1; i < g.n0 - 1; ++i)
        for (int j = 1; j < g.n1 - 1; ++j) {
            const double f = rc.pair.f(nu(i, j)), gg = rc.pair.g(nu(i, j));
            const double s = f >= gg ? 1.0 : -1.0;
            out.curvature_error =
                std::max({out.curvature_error, std::abs(cf.nu1(i, j) - s * f), std::abs(cf.nu2(i, j) - s * gg)});
        }
    return out;
}

} // namespace wsurf
