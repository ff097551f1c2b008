#include <gtest/gtest.h>

#include "wsurf/pipeline.hpp"

using namespace wsurf;

TEST(Pipeline, EveryRowProducesFieldAndSurface) {
    for (int row = 1; row <= 10; ++row) {
        const auto ex = row_exemplar(exemplar_class(row), exemplar_grid(row));
        EXPECT_LT(ex.residual.maxAbs, 1e-3) << row;
        const auto s = row_surface(ex);
        EXPECT_EQ(s.method, row == 4 || row == 5 ? "rotational" : "reconstruct") << row;
        EXPECT_LT(s.curvature_error, 1e-3) << row;
        EXPECT_LT(s.compatibility_defect, 1e-3 * s.grid.extent()) << row;
        if (row == 4 || row == 5) EXPECT_LT(s.relation_residual, 1e-3) << row;
    }
}

TEST(Pipeline, ExemplarParameters) {
    EXPECT_EQ(*exemplar_class(4).beta, 3.0);
    EXPECT_EQ(*exemplar_class(5).beta, 0.5);
    EXPECT_EQ(*exemplar_class(10).gamma, -1.0);
    EXPECT_EQ(*exemplar_class(6, 2.0).beta, 2.0);
    EXPECT_THROW(exemplar_class(11), UsageError);
    EXPECT_THROW(exemplar_class(0), UsageError);
    EXPECT_THROW(exemplar_class(5, 2.0), UsageError);
    // Row 6 with beta = 3 has no positive constant solution.
    EXPECT_THROW(row_exemplar(exemplar_class(6, 3.0), exemplar_grid(6)), DomainError);
    EXPECT_THROW(row_exemplar(exemplar_class(4), span_grid(11, 11, -0.1, 0.1, 0.0, 0.1)), DomainError);
}

TEST(Pipeline, ResidualOrdersMatchRows) {
    EXPECT_EQ(exemplar_order(1), 4);
    EXPECT_EQ(exemplar_order(8), 6);
    EXPECT_EQ(exemplar_order(9), 2);
    // The kink patch stays below pi where tan(lambda / 2) is finite.
    const auto ex = row_exemplar(exemplar_class(8), exemplar_grid(8));
    for (double v : ex.field.values.data()) EXPECT_LT(v, M_PI);
}
