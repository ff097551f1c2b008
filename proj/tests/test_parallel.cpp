#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wsurf/generators.hpp"
#include "wsurf/parallel.hpp"

using namespace wsurf;

namespace {

double axis_radius(const Vec3& p) { return std::hypot(p.x(), p.y()); }

/// Smooth field mid + amp * (sum of a few random modes), normalized to [-1, 1].
NuField random_smooth_field(std::mt19937& rng, Interval range, int n = 21) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double k[4][2], ph[4];
    for (int m = 0; m < 4; ++m) {
        k[m][0] = 1.0 + 3.0 * U(rng);
        k[m][1] = 1.0 + 3.0 * U(rng);
        ph[m] = 6.0 * U(rng);
    }
    const double mid = range.mid(), amp = 0.4 * range.width();
    return ScalarField2D::sample(span_grid(n, n, 0.0, 1.0, 0.0, 1.0), [&](double x, double y) {
        double s = 0.0;
        for (int m = 0; m < 4; ++m) s += std::sin(k[m][0] * x + k[m][1] * y + ph[m]);
        return mid + amp * s / 4.0;
    });
}

struct NamedPair {
    WeingartenPair pair;
    Interval range;
};

std::vector<NamedPair> builtin_pairs() {
    std::vector<double> t, fv, gv;
    for (int k = 0; k <= 40; ++k) {
        const double x = 0.1 + 0.8 * k / 40.0;
        t.push_back(x);
        fv.push_back(1.0 + 0.5 * x * x);
        gv.push_back(x);
    }
    return {
        {minimal_pair({0.2, 0.8}), {0.2, 0.8}},
        {cmc_pair({-0.8, 0.4}), {-0.8, 0.4}},
        {linear_pair(2.0, 0.5, {0.1, 0.6}), {0.1, 0.6}},
        {linear_fractional_pair(1.0, 2.0, 0.5, 3.0, {0.1, 0.5}), {0.1, 0.5}},
        {table_pair(t, fv, gv), {0.2, 0.8}},
    };
}

} // namespace

TEST(ParallelCurvatures, TableExamples) {
    auto a = parallel_principal_curvatures(1.0, 0.0, 0.5);
    EXPECT_EQ(a.epsilon, 1);
    EXPECT_DOUBLE_EQ(a.nu1, 2.0);
    EXPECT_DOUBLE_EQ(a.nu2, 0.0);
    auto b = parallel_principal_curvatures(0.5, -0.5, 1.0);
    EXPECT_EQ(b.epsilon, 1);
    EXPECT_DOUBLE_EQ(b.nu1, 1.0);
    EXPECT_NEAR(b.nu2, -1.0 / 3.0, 1e-15);
    EXPECT_EQ(parallel_principal_curvatures(2.0, -1.0, 1.0).epsilon, -1);
}

TEST(ParallelCurvatures, FocalPointsAndZeroOffsetAreRejected) {
    EXPECT_THROW(parallel_principal_curvatures(2.0, 0.1, 0.5), SingularOffsetError);
    EXPECT_THROW(parallel_principal_curvatures(1.0, 0.1, 0.0), DomainError);
}

TEST(ParallelCurvatures, InverseRoundTripOnRandomSamples) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    int checked = 0;
    while (checked < 10000) {
        const double n1 = U(rng), n2 = U(rng), a = U(rng);
        if (std::abs(1.0 - a * n1) < 0.05 || std::abs(1.0 - a * n2) < 0.05 || a == 0.0) continue;
        const auto fwd = parallel_principal_curvatures(n1, n2, a);
        const auto back = original_principal_curvatures(fwd.nu1, fwd.nu2, a, fwd.epsilon);
        ASSERT_NEAR(back.nu1, n1, 1e-12 * std::max(1.0, std::abs(n1)));
        ASSERT_NEAR(back.nu2, n2, 1e-12 * std::max(1.0, std::abs(n2)));
        ++checked;
    }
}

TEST(ParallelInvariants, MinimalPoint) {
    const auto r = parallel_invariants(-0.25, 0.0, 0.5, 1.0);
    EXPECT_NEAR(r.K, -1.0 / 3.0, 1e-14);
    EXPECT_NEAR(r.H, 1.0 / 3.0, 1e-14);
    EXPECT_NEAR(r.Hprime, 2.0 / 3.0, 1e-14);
    // Minimal surfaces go to eps Hbar = -a Kbar.
    EXPECT_NEAR(r.epsilon * r.H, -1.0 * r.K, 1e-14);
}

TEST(ParallelInvariants, CylinderOfHalfRadius) {
    const auto r = parallel_invariants(0.0, 0.5, 0.5, 0.5);
    EXPECT_NEAR(r.K, 0.0, 1e-15);
    EXPECT_NEAR(r.H, 1.0, 1e-15);
    EXPECT_NEAR(r.Hprime, 1.0, 1e-15);
}

TEST(ParallelInvariants, FirstOrderVariationOfH) {
    // dHbar/da at a = 0 is 2H^2 - K.
    for (auto [K, H] : {std::pair{-0.3, 0.2}, std::pair{0.1, 0.7}, std::pair{-1.0, -0.4}}) {
        const double Hp = std::sqrt(H * H - K), d = 1e-5;
        const double slope = (parallel_invariants(K, H, Hp, d).H - parallel_invariants(K, H, Hp, -d).H) / (2.0 * d);
        EXPECT_NEAR(slope, 2.0 * H * H - K, 1e-6);
    }
}

TEST(ParallelPair, MinimalExample) {
    const auto q = parallel_weingarten_pair(minimal_pair({0.1, 0.9}), 1.0);
    for (double x : {0.1, 0.3, 0.77, 0.9}) {
        EXPECT_NEAR(q.f(x), x / (1.0 - x), 1e-14);
        EXPECT_NEAR(q.g(x), -x / (1.0 + x), 1e-14);
    }
    EXPECT_THROW(parallel_weingarten_pair(minimal_pair({0.1, 0.9}), 0.0), DomainError);
    EXPECT_THROW(parallel_weingarten_pair(minimal_pair({0.1, 1.2}), 1.0), SingularOffsetError);
}

TEST(ParallelPair, GapIdentityAndChainRule) {
    for (const auto& [p, range] : builtin_pairs())
        for (double a : {-0.4, 0.25}) {
            const auto q = parallel_weingarten_pair(p, a);
            const int eps = parallel_epsilon(p, a);
            for (int k = 0; k < 1000; ++k) {
                const double x = range.lo + range.width() * k / 999.0;
                const double lhs = q.f(x) - q.g(x);
                const double rhs = eps * (p.f(x) - p.g(x)) / ((1.0 - a * p.f(x)) * (1.0 - a * p.g(x)));
                ASSERT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(rhs))) << p.kind;
            }
            const double x = range.mid(), d = 1e-5;
            EXPECT_NEAR(q.df(x), (q.f(x + d) - q.f(x - d)) / (2 * d), 1e-7) << p.kind;
            EXPECT_NEAR(q.d2g(x), (q.dg(x + d) - q.dg(x - d)) / (2 * d), 1e-6) << p.kind;
        }
}

TEST(ParallelNaturality, MinimalAndCmcAcrossOffsets) {
    const auto minimal = minimal_pair({0.2, 0.8});
    const auto cmc = cmc_pair({-0.8, 0.4});
    for (double a : {0.1, 0.25, 0.5}) {
        EXPECT_LT(verify_parallel_naturality(minimal, {1.0, 1.0, 0.5}, a, {0.2, 0.8}), 1e-9) << a;
        EXPECT_LT(verify_parallel_naturality(cmc, {0.7, 1.3, 0.0}, a, {-0.8, 0.4}), 1e-9) << a;
    }
}

TEST(ParallelPde, RescaledResidualsAgreeForAllBuiltinPairs) {
    std::mt19937 rng(11);
    for (const auto& [p, range] : builtin_pairs())
        for (double a : {-0.3, 0.4}) {
            const NaturalGauge gauge{0.8, 1.2, range.mid()};
            const auto rep = verify_pde_invariance(p, gauge, a, random_smooth_field(rng, range));
            EXPECT_LT(rep.rescaled_defect, 1e-8) << p.kind << " a=" << a;
            EXPECT_GT(rep.residual_scale, 1e-3);
        }
}

TEST(ParallelPde, RawResidualsDifferAwayFromSolutions) {
    std::mt19937 rng(5);
    const auto rep = verify_pde_invariance(minimal_pair({0.2, 0.8}), {1.0, 1.0, 0.5}, 0.4,
                                           random_smooth_field(rng, {0.2, 0.8}));
    EXPECT_GT(rep.raw_difference, 1e-3 * rep.residual_scale);
}

TEST(ParallelPde, ConstantFieldIsExact) {
    const auto p = cmc_pair({-0.8, 0.4});
    const auto nu = ScalarField2D::sample(span_grid(9, 9, 0, 1, 0, 1), [](double, double) { return -0.3; });
    EXPECT_LT(verify_pde_invariance(p, {1.0, 1.0, 0.0}, 0.25, nu).rescaled_defect, 1e-14);
}

TEST(ParallelPde, FocalOffsetIsRejected) {
    std::mt19937 rng(1);
    EXPECT_THROW(verify_pde_invariance(minimal_pair({0.2, 0.8}), {1.0, 1.0, 0.5}, 2.0,
                                       random_smooth_field(rng, {0.2, 0.8})),
                 SingularOffsetError);
}

TEST(OffsetSurface, UnitCylinderToHalfRadius) {
    auto cyl = named_surface("cylinder", {{"r", 1.0}}, span_grid(41, 21, 0.0, 2.0, 0.0, 1.0));
    const auto out = offset_surface(cyl, 0.5);
    EXPECT_EQ(out.offset.epsilon, 1);
    for (int i = 0; i < 41; i += 4)
        for (int j = 0; j < 21; j += 4) {
            // Boundary rows take the normal from one-sided stencils.
            const bool edge = i == 0 || i == 40;
            EXPECT_NEAR(axis_radius(out.grid(i, j)), 0.5, edge ? 1e-8 : 1e-12);
            EXPECT_NEAR(out.grid(i, j).z(), cyl(i, j).z(), 1e-12);
        }
}

TEST(OffsetSurface, FocalDistanceIsRejected) {
    auto cyl = named_surface("cylinder", {{"r", 1.0}}, span_grid(21, 11, 0.0, 2.0, 0.0, 1.0));
    const auto cf = curvature_field(cyl);
    EXPECT_THROW(offset_surface(cyl, 1.0 / cf.nu1(10, 5)), SingularOffsetError);
    EXPECT_THROW(offset_surface(cyl, 0.0), DomainError);
}

TEST(OffsetSurface, CompositionForAffineNormals) {
    // Cylinder and sphere normals are affine in the point, so central
    // differences transport them exactly once clear of the tilted boundary
    // normals of the first offset.
    auto cyl = named_surface("cylinder", {{"r", 1.0}}, span_grid(31, 21, 0.0, 2.0, 0.0, 1.0));
    auto sph = named_surface("sphere", {{"r", 1.0}}, span_grid(31, 31, 0.6, 2.4, 0.0, 1.5));
    for (const auto* g : {&cyl, &sph}) {
        const auto once = offset_surface(*g, 0.5).grid;
        const auto twice = offset_surface(offset_surface(*g, 0.2).grid, 0.3).grid;
        double worst = 0.0;
        for (int i = 2; i < once.nu() - 2; ++i)
            for (int j = 2; j < once.nv() - 2; ++j) worst = std::max(worst, (once(i, j) - twice(i, j)).norm());
        EXPECT_LT(worst, 1e-10);
    }
}

TEST(OffsetSurface, CatenoidCurvaturesMatchTransportLaw) {
    std::vector<double> err;
    for (int n : {41, 81, 161}) {
        auto cat = named_surface("catenoid", {}, span_grid(n, n, -0.8, 0.8, 0.0, 1.6));
        const auto out = offset_surface(cat, 0.3);
        // The discrete offset is principal only up to O(h^2).
        GeometryOptions gopt;
        gopt.tol_principal = 1e-2;
        const auto cf = curvature_field(out.grid, gopt);
        double worst = 0.0;
        for (int i = 2; i < n - 2; ++i)
            for (int j = 2; j < n - 2; ++j) {
                const double s = 1.0 / std::pow(std::cosh(cat.u(i)), 2);
                const auto pc = parallel_principal_curvatures(s, -s, 0.3);
                worst = std::max({worst, std::abs(cf.nu1(i, j) - pc.nu1), std::abs(cf.nu2(i, j) - pc.nu2)});
            }
        err.push_back(worst);
    }
    EXPECT_LT(err[1], 1e-3);
    EXPECT_GT(std::log2(err[0] / err[1]), 1.8);
    EXPECT_GT(std::log2(err[1] / err[2]), 1.8);
}

TEST(OffsetSurface, CompositionOnCatenoidConvergesQuadratically) {
    std::vector<double> err;
    for (int n : {41, 81}) {
        auto cat = named_surface("catenoid", {}, span_grid(n, n, -0.5, 0.5, 0.0, 1.0));
        const auto once = offset_surface(cat, 0.4).grid;
        const auto twice = offset_surface(offset_surface(cat, 0.15).grid, 0.25).grid;
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) worst = std::max(worst, (once(i, j) - twice(i, j)).norm());
        err.push_back(worst);
    }
    EXPECT_GT(std::log2(err[0] / err[1]), 1.8);
}
