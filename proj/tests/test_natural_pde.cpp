#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wsurf/generators.hpp"
#include "wsurf/linear_class.hpp"

using namespace wsurf;

namespace {

double interior_max_error(const ScalarField2D& a, const ScalarField2D& b) {
    double worst = 0.0;
    for (int i = 1; i < a.grid.n0 - 1; ++i)
        for (int j = 1; j < a.grid.n1 - 1; ++j) worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
    return worst;
}

/// Profile of the rotational ODE sampled every `stride` steps.
std::vector<double> ode_profile(double beta, double xmax, double dx, int stride) {
    const auto sol = rotational_natural_ode(beta, 1.0, 0.0, xmax, dx / stride);
    std::vector<double> out;
    for (std::size_t k = 0; k < sol.nu.size(); k += stride) out.push_back(sol.nu[k]);
    return out;
}

} // namespace

TEST(Operators, QuadraticsAndConstants) {
    const auto g = span_grid(11, 13, -1.0, 1.0, -0.5, 1.5);
    auto sum = ScalarField2D::sample(g, [](double x, double y) { return x * x + y * y; });
    auto diff = ScalarField2D::sample(g, [](double x, double y) { return x * x - y * y; });
    const auto lap = apply_operator(OperatorKind::laplace, sum);
    const auto wave = apply_operator(OperatorKind::wave, diff);
    for (int i = 1; i < 10; ++i)
        for (int j = 1; j < 12; ++j) {
            EXPECT_NEAR(lap.values(i, j), 4.0, 1e-11);
            EXPECT_NEAR(wave.values(i, j), 4.0, 1e-11);
        }
    EXPECT_LT(apply_operator(OperatorKind::star, ScalarField2D(g, 2.5)).maxAbs, 1e-12);
    EXPECT_LT(apply_operator(OperatorKind::star_bar, ScalarField2D(g, -0.5)).maxAbs, 1e-12);
    EXPECT_THROW(apply_operator(OperatorKind::star, ScalarField2D(g, 0.0)), ReciprocalSingularityError);
    EXPECT_EQ(apply_operator(OperatorKind::laplace, sum, {4}).margin, 2);
}

TEST(Operators, LaplaceAndWaveAreLinear) {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const auto g = span_grid(17, 17, 0.0, 1.0, 0.0, 1.0);
    ScalarField2D a(g), b(g), c(g);
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        a.values.data()[k] = U(rng);
        b.values.data()[k] = U(rng);
        c.values.data()[k] = 2.0 * a.values.data()[k] - 3.0 * b.values.data()[k];
    }
    for (auto kind : {OperatorKind::laplace, OperatorKind::wave}) {
        const auto ra = apply_operator(kind, a), rb = apply_operator(kind, b), rc = apply_operator(kind, c);
        double worst = 0.0, scale = 0.0;
        for (std::size_t k = 0; k < ra.values.size(); ++k) {
            worst = std::max(worst, std::abs(rc.values.data()[k] - 2.0 * ra.values.data()[k] + 3.0 * rb.values.data()[k]));
            scale = std::max(scale, std::abs(rc.values.data()[k]));
        }
        EXPECT_LT(worst, 1e-12 * scale);
    }
}

TEST(Residual, Row8StaticKinkWithSixthOrderStencil) {
    const auto g = span_grid(2001, 7, -10.0, 10.0, 0.0, 0.06);
    const auto kink = exact_solution(8, {}, g);
    const auto p = basic_pde(basic_class(8));
    EXPECT_LT(pde_residual(p, kink, {6}).maxAbs, 1e-9);
    // The second-order stencil sees the truncation term.
    EXPECT_GT(pde_residual(p, kink, {2}).maxAbs, 1e-7);
}

TEST(Residual, Row1RadialLiouville) {
    const auto p = basic_pde(basic_class(1));
    const auto g = span_grid(201, 201, -1, 1, -1, 1);
    EXPECT_LT(pde_residual(p, exact_solution(1, {}, g), {4}).maxAbs, 1e-5);
    std::vector<double> err;
    for (int n : {101, 201}) err.push_back(pde_residual(p, exact_solution(1, {}, span_grid(n, n, -1, 1, -1, 1))).maxAbs);
    EXPECT_NEAR(std::log2(err[0] / err[1]), 2.0, 0.1);
}

TEST(Residual, Row2ZeroAndRow9LogParabola) {
    const auto g = span_grid(41, 41, -1, 1, -1, 1);
    EXPECT_EQ(pde_residual(basic_pde(basic_class(2)), exact_solution(2, {}, g)).maxAbs, 0.0);
    EXPECT_LT(pde_residual(basic_pde(basic_class(9)), exact_solution(9, {4.0}, g)).maxAbs, 1e-10);
    EXPECT_THROW(exact_solution(9, {1.0}, span_grid(11, 11, -2, 2, 0, 1)), DomainError);
    EXPECT_THROW(exact_solution(4, {}, g), DomainError);
}

TEST(Residual, ConstantSolutionsOfTheParametricRows) {
    const auto g = span_grid(9, 9, 0, 1, 0, 1);
    EXPECT_LT(pde_residual(basic_pde(basic_class(6, -3.0)), exact_solution(6, {-3.0}, g)).maxAbs, 1e-13);
    EXPECT_LT(pde_residual(basic_pde(basic_class(7, 0.5)), exact_solution(7, {0.5}, g)).maxAbs, 1e-13);
    EXPECT_LT(pde_residual(basic_pde(basic_class(3)), exact_solution(3, {}, g)).maxAbs, 1e-13);
    EXPECT_LT(pde_residual(basic_pde(basic_class(10, 1.0, -1.0)), exact_solution(10, {}, g)).maxAbs, 1e-13);
}

TEST(Residual, OutOfRangeFieldIsRejected) {
    const auto g = span_grid(9, 9, 0, 1, 0, 1);
    EXPECT_THROW(pde_residual(basic_pde(basic_class(4, 3.0)), ScalarField2D(g, -1.0)), RangeViolationError);
}

namespace {

/// Harmonic extension raised by a bump: the closed-form profile is the
/// upper of the two discrete solutions, and the plain harmonic start
/// converges to the lower one.
ScalarField2D upper_branch_start(const ScalarField2D& exact) {
    auto init = harmonic_extension(exact);
    for (int i = 1; i < init.grid.n0 - 1; ++i)
        for (int j = 1; j < init.grid.n1 - 1; ++j) {
            const double x = init.grid.x(i), y = init.grid.y(j);
            init(i, j) += 1.6 * (1.0 - x * x) * (1.0 - y * y);
        }
    return init;
}

} // namespace

TEST(Elliptic, LiouvilleHasTwoDiscreteSolutions) {
    const auto p = basic_pde(basic_class(1));
    const auto exact = exact_solution(1, {}, span_grid(33, 33, -1, 1, -1, 1));
    const auto lower = solve_elliptic(p, exact, harmonic_extension(exact));
    EXPECT_TRUE(lower.report.converged);
    EXPECT_GT(interior_max_error(lower.field, exact), 0.2);
    EXPECT_LT(lower.field(16, 16), exact(16, 16));
}

TEST(Elliptic, LiouvilleSecondOrderConverges) {
    const auto p = basic_pde(basic_class(1));
    std::vector<double> err;
    for (int n : {33, 65}) {
        const auto exact = exact_solution(1, {}, span_grid(n, n, -1, 1, -1, 1));
        const auto res = solve_elliptic(p, exact, upper_branch_start(exact));
        EXPECT_TRUE(res.report.converged);
        EXPECT_LT(pde_residual(p, res.field).maxAbs, 1e-9);
        err.push_back(interior_max_error(res.field, exact));
    }
    EXPECT_GT(std::log2(err[0] / err[1]), 1.8);
}

TEST(Elliptic, LiouvilleRecoveredWithCompactStencil) {
    const auto p = basic_pde(basic_class(1));
    std::vector<double> err;
    EllipticOptions opt;
    opt.order = 4;
    for (int n : {33, 65}) {
        const auto exact = exact_solution(1, {}, span_grid(n, n, -1, 1, -1, 1));
        const auto res = solve_elliptic(p, exact, upper_branch_start(exact), opt);
        EXPECT_TRUE(res.report.converged);
        err.push_back(interior_max_error(res.field, exact));
        if (n == 65) {
            const auto& h = res.report.residual_history;
            ASSERT_GE(h.size(), 3u);
            // Quadratic tail above the rounding floor (~1e-12 at this
            // spacing): r_{k+1} <= C r_k^2.
            int tail = 0;
            for (std::size_t k = 1; k + 1 < h.size(); ++k)
                if (h[k] < 1e-2 && h[k + 1] > 1e-10) {
                    EXPECT_LT(h[k + 1], 10.0 * h[k] * h[k]) << k;
                    ++tail;
                }
            EXPECT_GE(tail, 1);
        }
    }
    EXPECT_LT(err[1], 1e-3);
    EXPECT_GT(std::log2(err[0] / err[1]), 3.5);
}

TEST(Elliptic, CompactStencilContract) {
    const auto g = span_grid(9, 11, 0, 1, 0, 1);
    EllipticOptions opt;
    opt.order = 4;
    EXPECT_THROW(solve_elliptic(basic_pde(basic_class(1)), ScalarField2D(g, 0.0), ScalarField2D(g, 0.0), opt), UsageError);
    const auto sq = span_grid(9, 9, 0, 1, 0, 1);
    EXPECT_THROW(solve_elliptic(basic_pde(basic_class(9)), ScalarField2D(sq, 1.0), ScalarField2D(sq, 1.0), opt), UsageError);
    opt.order = 3;
    EXPECT_THROW(solve_elliptic(basic_pde(basic_class(1)), ScalarField2D(sq, 0.0), ScalarField2D(sq, 0.0), opt), UsageError);
}

TEST(Elliptic, Row2ZeroBoundaryGivesZero) {
    const auto g = span_grid(17, 17, 0, 1, 0, 1);
    ScalarField2D init = ScalarField2D::sample(g, [](double x, double y) { return 0.3 * std::sin(3 * x) * y; });
    for (int i = 0; i < 17; ++i)
        for (int j = 0; j < 17; ++j)
            if (init.on_boundary(i, j)) init(i, j) = 0.0;
    const auto res = solve_elliptic(basic_pde(basic_class(2)), ScalarField2D(g, 0.0), init);
    EXPECT_LT(interior_max_error(res.field, ScalarField2D(g, 0.0)), 1e-10);
}

TEST(Elliptic, Row9NearExactDiscreteSolution) {
    const auto exact = exact_solution(9, {4.0}, span_grid(33, 33, -1, 1, -1, 1));
    const auto res = solve_elliptic(basic_pde(basic_class(9)), exact, harmonic_extension(exact));
    EXPECT_LT(interior_max_error(res.field, exact), 1e-6);
}

TEST(Elliptic, Row5FromRotationalProfile) {
    // beta = 1/2: the ODE profile extended constantly in y solves the
    // elliptic row 5 equation.
    const double dx = 0.0125;
    const auto prof = ode_profile(0.5, 0.4, dx, 10);
    const int n = int(prof.size());
    const auto g = GridSpec{n, n, 0.0, 0.0, dx, dx};
    const auto exact = ScalarField2D::sample(g, [&](double x, double) { return prof[std::size_t(std::lround(x / dx))]; });
    const auto p = basic_pde(basic_class(5, 0.5));
    EXPECT_EQ(p.kind, OperatorKind::star_bar);
    EXPECT_LT(pde_residual(p, exact).maxAbs, 1e-3);
    const auto res = solve_elliptic(p, exact, harmonic_extension(exact));
    EXPECT_LT(interior_max_error(res.field, exact), 1e-3);
}

TEST(Elliptic, WaveOperatorIsIllPosed) {
    const auto g = span_grid(9, 9, 0, 1, 0, 1);
    EXPECT_THROW(solve_elliptic(basic_pde(basic_class(8)), ScalarField2D(g, 0.0), ScalarField2D(g, 0.0)), IllPosedError);
}

TEST(Hyperbolic, KinkStaysStatic) {
    const double dx = 0.01;
    const int nx = 2001;
    std::vector<double> line(nx), zero(nx, 0.0);
    for (int i = 0; i < nx; ++i) line[i] = 4.0 * std::atan(std::exp(-10.0 + i * dx));
    const auto res = solve_hyperbolic(basic_pde(basic_class(8)), line, zero, -10.0, dx, dx, 200);
    double worst = 0.0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j <= 200; ++j) worst = std::max(worst, std::abs(res.field(i, j) - line[i]));
    EXPECT_LT(worst, 1e-3);
    EXPECT_LT(res.energy_drift, 0.01);
}

TEST(Hyperbolic, ZeroDataStaysZero) {
    std::vector<double> zero(51, 0.0);
    const auto res = solve_hyperbolic(basic_pde(basic_class(8)), zero, zero, 0.0, 0.02, 0.02, 50,
                                      {XBoundary::periodic});
    for (double x : res.field.values.data()) EXPECT_EQ(x, 0.0);
}

TEST(Hyperbolic, CflAndEllipticOperatorsAreRejected) {
    std::vector<double> zero(51, 0.0);
    EXPECT_THROW(solve_hyperbolic(basic_pde(basic_class(8)), zero, zero, 0.0, 0.01, 0.02, 10), CFLError);
    EXPECT_THROW(solve_hyperbolic(basic_pde(basic_class(1)), zero, zero, 0.0, 0.01, 0.01, 10), IllPosedError);
    EXPECT_THROW(solve_hyperbolic(basic_pde(basic_class(5, 0.5)), zero, zero, 0.0, 0.01, 0.01, 10), IllPosedError);
}

TEST(Hyperbolic, Row4RotationalProfileMarchesUnchanged) {
    // Row 4 uses the hyperbolic star operator. Outflow edges disturb only
    // their domain of dependence, so compare away from them.
    const double dx = 0.005, dy = 0.0025;
    const auto prof = ode_profile(3.0, 0.3, dx, 10);
    const int nx = int(prof.size());
    const std::vector<double> zero(nx, 0.0);
    const auto p = basic_pde(basic_class(4, 3.0));
    const auto res = solve_hyperbolic(p, prof, zero, 0.0, dx, dy, 20);
    double worst = 0.0;
    for (int i = 15; i < nx - 15; ++i)
        for (int j = 0; j <= 20; ++j) worst = std::max(worst, std::abs(res.field(i, j) - prof[i]));
    EXPECT_LT(worst, 1e-3);
}
