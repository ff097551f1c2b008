#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "wsurf/field.hpp"
#include "wsurf/newton.hpp"

using namespace wsurf;

TEST(Grid, SpanGridHitsBothEnds) {
    auto g = span_grid(11, 21, -1.0, 1.0, 0.0, 2.0);
    EXPECT_DOUBLE_EQ(g.x(0), -1.0);
    EXPECT_NEAR(g.x_max(), 1.0, 1e-15);
    EXPECT_NEAR(g.y_max(), 2.0, 1e-15);
}

TEST(Grid, RejectsSmallOrDegenerateGrids) {
    EXPECT_THROW((GridSpec{4, 10, 0, 0, 0.1, 0.1}.validate()), DomainError);
    EXPECT_THROW((GridSpec{10, 10, 0, 0, 0.0, 0.1}.validate()), DomainError);
    EXPECT_THROW((GridSpec{10, 10, 0, 0, 0.1, NAN}.validate()), DomainError);
    EXPECT_NO_THROW((GridSpec{5, 5, 0, 0, 0.1, 0.1}.validate()));
}

TEST(Field, SampleAndBoundary) {
    auto f = ScalarField2D::sample(GridSpec{5, 6, 1.0, 2.0, 0.5, 0.25}, [](double x, double y) { return x * y; });
    EXPECT_DOUBLE_EQ(f(2, 4), 2.0 * 3.0);
    EXPECT_TRUE(f.on_boundary(0, 3));
    EXPECT_TRUE(f.on_boundary(2, 5));
    EXPECT_FALSE(f.on_boundary(2, 3));
    EXPECT_THROW(ScalarField2D(GridSpec{5, 5, 0, 0, 1, 1}, Scalar2D(5, 6)), DomainError);
}

TEST(Residual, SummariesSkipTheMargin) {
    Scalar2D v(6, 6, 0.0);
    v(0, 0) = 100.0;
    v(2, 3) = -3.0;
    v(3, 2) = 4.0;
    auto r = ResidualField::from(v);
    EXPECT_DOUBLE_EQ(r.maxAbs, 4.0);
    EXPECT_NEAR(r.l2, std::sqrt(25.0 / 16.0), 1e-15);
    auto r2 = ResidualField::from(v, 2);
    EXPECT_DOUBLE_EQ(r2.maxAbs, 4.0);
    v(3, 3) = NAN;
    EXPECT_TRUE(std::isinf(ResidualField::from(v).maxAbs));
}

TEST(Stencils, QuadraticsAreExactIncludingBoundaries) {
    const double h = 0.1;
    Scalar2D f(7, 6);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 6; ++j) {
            const double x = i * h, y = j * h;
            f(i, j) = 3.0 * x * x - 2.0 * x * y + y * y + x;
        }
    auto fx = fd::d1(f, 0, h), fy = fd::d1(f, 1, h), fxx = fd::d2(f, 0, h), fyy = fd::d2(f, 1, h);
    auto fxy = fd::d11(f, h, h);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 6; ++j) {
            const double x = i * h, y = j * h;
            EXPECT_NEAR(fx(i, j), 6.0 * x - 2.0 * y + 1.0, 1e-12);
            EXPECT_NEAR(fy(i, j), -2.0 * x + 2.0 * y, 1e-12);
            EXPECT_NEAR(fxx(i, j), 6.0, 1e-10);
            EXPECT_NEAR(fyy(i, j), 2.0, 1e-10);
            EXPECT_NEAR(fxy(i, j), -2.0, 1e-10);
        }
}

TEST(Stencils, SecondDerivativeBoundaryIsSecondOrder) {
    std::vector<double> err;
    for (double h : {0.1, 0.05, 0.025}) {
        Scalar2D f(9, 5);
        for (int i = 0; i < 9; ++i)
            for (int j = 0; j < 5; ++j) f(i, j) = std::exp(i * h);
        err.push_back(std::abs(fd::d2(f, 0, h)(0, 2) - 1.0));
    }
    EXPECT_NEAR(std::log2(err[0] / err[1]), 2.0, 0.15);
    EXPECT_NEAR(std::log2(err[1] / err[2]), 2.0, 0.15);
}

TEST(Stencils, HigherOrderWeightsHaveTheirOrder) {
    for (int order : {2, 4, 6}) {
        const auto w = fd::central_d2_weights(order);
        EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 0.0, 1e-14);
        std::vector<double> err;
        for (double h : {0.2, 0.1}) {
            Scalar2D f(9, 9);
            for (int i = 0; i < 9; ++i)
                for (int j = 0; j < 9; ++j) f(i, j) = std::sin(1.0 + i * h);
            err.push_back(std::abs(fd::central_d2_at(f, 0, h, 4, 4, w) + std::sin(1.0 + 4 * h)));
        }
        EXPECT_NEAR(std::log2(err[0] / err[1]), double(order), 0.2);
    }
    EXPECT_THROW(fd::central_d2_weights(3), UsageError);
}

TEST(Newton, SolvesSmallNonlinearSystemQuadratically) {
    // x^2 + y^2 = 4, x y = 1.
    NewtonSystem sys;
    sys.residual = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(2);
        r << x[0] * x[0] + x[1] * x[1] - 4.0, x[0] * x[1] - 1.0;
        return r;
    };
    sys.jacobian = [](const Eigen::VectorXd& x) {
        Eigen::SparseMatrix<double> J(2, 2);
        J.insert(0, 0) = 2 * x[0];
        J.insert(0, 1) = 2 * x[1];
        J.insert(1, 0) = x[1];
        J.insert(1, 1) = x[0];
        return J;
    };
    Eigen::VectorXd x(2);
    x << 2.0, 0.3;
    auto rep = newton_solve(sys, x, {});
    EXPECT_TRUE(rep.converged);
    EXPECT_NEAR(x[0] * x[1], 1.0, 1e-10);
    const auto& h = rep.residual_history;
    ASSERT_GE(h.size(), 4u);
    // Quadratic tail: r_{k+1} <= C r_k^2 on the last steps above rounding.
    const std::size_t k = h.size() - 2;
    if (h[k] > 1e-14) EXPECT_LT(h[k + 1], 10.0 * h[k - 1] * h[k - 1] + 1e-14);
}

TEST(Newton, ReportsRangeViolation) {
    NewtonSystem sys;
    sys.residual = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, std::log(x[0]) + 5.0); };
    sys.jacobian = [](const Eigen::VectorXd& x) {
        Eigen::SparseMatrix<double> J(1, 1);
        J.insert(0, 0) = 1.0 / x[0];
        return J;
    };
    sys.admissible = [](const Eigen::VectorXd& x) { return x[0] > 0.0; };
    Eigen::VectorXd x = Eigen::VectorXd::Constant(1, -1.0);
    EXPECT_THROW(newton_solve(sys, x), RangeViolationError);
}

TEST(Newton, IterationCapCarriesHistory) {
    NewtonSystem sys;
    sys.residual = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, std::atan(x[0]) - 1.5); };
    sys.jacobian = [](const Eigen::VectorXd& x) {
        Eigen::SparseMatrix<double> J(1, 1);
        J.insert(0, 0) = 1.0 / (1.0 + x[0] * x[0]);
        return J;
    };
    Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.0);
    NewtonOptions opt;
    opt.max_iter = 3;
    opt.tol_residual = 1e-300;
    try {
        newton_solve(sys, x, opt);
        FAIL() << "expected NonConvergenceError";
    } catch (const NonConvergenceError& e) {
        EXPECT_NE(std::string(e.what()).find("residual history"), std::string::npos);
    }
}

TEST(Errors, ExitCodesByKind) {
    EXPECT_EQ(UsageError("x").exit_code(), 2);
    EXPECT_EQ(DomainError("x").exit_code(), 2);
    EXPECT_EQ(UmbilicError("x").exit_code(), 3);
    EXPECT_EQ(CFLError("x").exit_code(), 3);
    EXPECT_EQ(ParseError("x").exit_code(), 4);
    EXPECT_EQ(IOError("x").exit_code(), 4);
    EXPECT_EQ(std::string(FitError("x").name()), "FitError");
}
