#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "natural_pde.hpp"
#include "parallel.hpp"

namespace wsurf {

/// delta K = alpha H + beta H' + gamma.
struct LinearRelation {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double delta = 0.0;

    double discriminant() const { return alpha * alpha - beta * beta + 4.0 * gamma * delta; }
    double max_coefficient() const {
        return std::max({std::abs(alpha), std::abs(beta), std::abs(gamma), std::abs(delta)});
    }
    LinearRelation scaled(double k) const { return {k * alpha, k * beta, k * gamma, k * delta}; }

    void validate() const {
        const double m = max_coefficient();
        if (!(m > 0.0)) throw DegenerateRelationError("all coefficients vanish");
        if (!(std::abs(discriminant()) > 1e-12 * m * m))
            throw DegenerateRelationError("alpha^2 - beta^2 + 4 gamma delta vanishes");
    }
};

/// nu1 = (A nu2 + B)/(C nu2 + D).
struct MoebiusCoeffs {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double D = 0.0;
};

inline LinearRelation relation_from_moebius(const MoebiusCoeffs& m) {
    if (m.B * m.C - m.A * m.D == 0.0) throw DegenerateRelationError("BC - AD vanishes");
    return {m.A - m.D, -(m.A + m.D), m.B, m.C};
}

inline MoebiusCoeffs moebius_from_relation(const LinearRelation& r) {
    if (r.discriminant() == 0.0) throw DegenerateRelationError("alpha^2 - beta^2 + 4 gamma delta vanishes");
    return {(r.alpha - r.beta) / 2.0, r.gamma, r.delta, -(r.alpha + r.beta) / 2.0};
}

/// delta K - alpha H - beta H' - gamma per node.
inline ResidualField check_relation(const CurvatureField& cf, const LinearRelation& r) {
    Scalar2D v(cf.spec.n0, cf.spec.n1);
    for (int i = 0; i < cf.spec.n0; ++i)
        for (int j = 0; j < cf.spec.n1; ++j)
            v(i, j) = r.delta * cf.K(i, j) - r.alpha * cf.H(i, j) - r.beta * cf.Hprime(i, j) - r.gamma;
    return ResidualField::from(std::move(v));
}

struct RelationFit {
    LinearRelation relation;
    /// Root-mean-square of delta K - alpha H - beta H' - gamma over the nodes used.
    double residual = 0.0;
    /// Ratio of the two smallest singular values; near 1 means the fit is not unique.
    double gap = 0.0;
    int nodes = 0;
};

/// Least-squares relation over nodes at least `margin` rings from the
/// boundary: the right singular vector of [H H' 1 -K] with the smallest
/// singular value, scaled so the largest coefficient is +1 (near-ties go to the
/// first of delta, alpha, beta, gamma).
inline RelationFit fit_relation(const CurvatureField& cf, int margin = 2) {
    const GridSpec& s = cf.spec;
    const int n0 = s.n0 - 2 * margin, n1 = s.n1 - 2 * margin;
    if (n0 < 2 || n1 < 2) throw DomainError("grid too small for a relation fit");
    Eigen::MatrixXd A(n0 * n1, 4);
    int r = 0;
    for (int i = margin; i < s.n0 - margin; ++i)
        for (int j = margin; j < s.n1 - margin; ++j, ++r) A.row(r) << cf.H(i, j), cf.Hprime(i, j), 1.0, -cf.K(i, j);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinV);
    const Eigen::Vector4d sv = svd.singularValues();
    Eigen::Vector4d x = svd.matrixV().col(3);
    x /= x.cwiseAbs().maxCoeff();
    for (int k : {3, 0, 1, 2})
        if (std::abs(x[k]) > 1.0 - 1e-3) {
            if (x[k] < 0.0) x = -x;
            break;
        }
    RelationFit fit;
    fit.relation = {x[0], x[1], x[2], x[3]};
    fit.residual = (A * x).norm() / std::sqrt(double(A.rows()));
    fit.gap = sv[2] > 1e-12 * sv[0] ? sv[3] / sv[2] : 1.0;
    fit.nodes = int(A.rows());
    return fit;
}

/// Relation satisfied by the parallel surface at distance a with sign eps:
/// (delta - a alpha - a^2 gamma) K = eps (alpha + 2 a gamma) H + eps beta H' + gamma.
/// `linear_case` asserts delta = 0; otherwise delta must be normalized to 1.
inline LinearRelation parallel_relation(const LinearRelation& r, double a, int eps, bool linear_case) {
    require_offset(a);
    if (eps != 1 && eps != -1) throw UsageError("epsilon must be +1 or -1");
    if (linear_case && r.delta != 0.0) throw UsageError("linear relations have delta = 0");
    if (!linear_case && r.delta != 1.0) throw UsageError("fractional relations must be normalized to delta = 1");
    LinearRelation out{eps * (r.alpha + 2.0 * a * r.gamma), eps * r.beta, r.gamma, r.delta - a * r.alpha - a * a * r.gamma};
    if (!(std::abs(out.discriminant()) > 1e-12 * std::pow(out.max_coefficient(), 2)))
        throw DegenerateRelationError("parallel relation is degenerate");
    return out;
}

struct Reduction {
    /// Offset distance to the basic representative, when one is needed.
    std::optional<double> offset;
    /// Similarity factor s (z -> z / s) bringing the basic constant to its
    /// table value; negative values include the central reflection.
    std::optional<double> scale;
    int epsilon = 1;
};

struct BasicClassId {
    int row = 0;
    std::optional<double> beta;
    std::optional<double> gamma;
    Reduction reduction;
    /// Relation after the offset, before the similarity.
    LinearRelation reduced;

    void validate() const {
        if (row < 1 || row > 10) throw UsageError("row must be in 1..10");
        const double b = beta.value_or(0.0);
        switch (row) {
        case 4:
        case 6:
            if (!beta || !(b * b > 1.0)) throw UsageError("rows 4 and 6 need beta^2 > 1");
            break;
        case 5:
        case 7:
            if (!beta || !(b * b < 1.0) || b == 0.0) throw UsageError("rows 5 and 7 need beta^2 < 1, beta != 0");
            break;
        case 10:
            if (!beta || b == 0.0 || !gamma || !(*gamma < 0.0)) throw UsageError("row 10 needs beta != 0 and gamma < 0");
            break;
        default: break;
        }
    }
};

/// Basic class with table parameters and no reduction.
inline BasicClassId basic_class(int row, std::optional<double> beta = std::nullopt,
                                std::optional<double> gamma = std::nullopt) {
    BasicClassId id;
    id.row = row;
    id.beta = beta;
    id.gamma = gamma;
    id.validate();
    return id;
}

namespace detail {

inline BasicClassId classify_linear(LinearRelation r, double zero, Reduction red) {
    BasicClassId id;
    id.reduced = r;
    auto is0 = [zero](double x) { return std::abs(x) <= zero; };
    if (is0(r.alpha)) {
        if (is0(r.beta) || is0(r.gamma)) throw DegenerateRelationError("relation forces H' = 0 or is inconsistent");
        double hp = -r.gamma / r.beta;
        if (hp <= 0.0) {
            if (!red.offset) throw DegenerateRelationError("relation requires H' <= 0");
            red.epsilon = -red.epsilon;
            id.reduced.beta = -id.reduced.beta;
            hp = -hp;
        }
        id.row = 3;
        red.scale = hp;
        id.reduction = red;
        return id;
    }
    const double b = r.beta / r.alpha, g = r.gamma / r.alpha;
    const double p = -b;
    if (is0(r.gamma)) {
        if (is0(r.beta)) {
            id.row = 1;
        } else {
            id.row = p * p > 1.0 ? 4 : 5;
            id.beta = p;
        }
    } else if (is0(r.beta)) {
        id.row = 2;
        red.scale = -2.0 * g;
    } else {
        id.row = p * p > 1.0 ? 6 : 7;
        id.beta = p;
        red.scale = -g;
    }
    id.reduction = red;
    return id;
}

} // namespace detail

/// Basic class of a linear relation with its reduction recipe.
inline BasicClassId classify(const LinearRelation& rel) {
    rel.validate();
    const double m = rel.max_coefficient();
    const double zero = 1e-12;
    const LinearRelation r = rel.scaled(1.0 / m);
    auto is0 = [zero](double x) { return std::abs(x) <= zero; };

    if (is0(r.delta)) return detail::classify_linear({r.alpha, r.beta, r.gamma, 0.0}, zero, Reduction{});

    const double al = r.alpha / r.delta, be = r.beta / r.delta, ga = r.gamma / r.delta;
    const double z = zero * std::max({1.0, std::abs(al), std::abs(be), std::abs(ga)});
    auto small = [z](double x) { return std::abs(x) <= z; };

    if (small(al) && small(ga)) {
        BasicClassId id;
        id.row = 9;
        id.reduction.scale = be / 2.0;
        id.reduced = {0.0, be, 0.0, 1.0};
        return id;
    }
    const double disc = al * al + 4.0 * ga;
    if (disc >= -z) {
        double a;
        if (small(ga)) {
            a = 1.0 / al;
        } else {
            const double sq = std::sqrt(std::max(0.0, disc));
            const double r1 = (-al + sq) / (2.0 * ga), r2 = (-al - sq) / (2.0 * ga);
            if (std::abs(std::abs(r1) - std::abs(r2)) <= 1e-14 * std::abs(r1)) a = std::max(r1, r2);
            else a = std::abs(r1) < std::abs(r2) ? r1 : r2;
        }
        LinearRelation lin{al + 2.0 * a * ga, be, ga, 0.0};
        if (small(disc)) lin.alpha = 0.0;
        Reduction red;
        red.offset = a;
        red.epsilon = 1;
        const double zl = zero * std::max({1.0, std::abs(lin.alpha), std::abs(lin.beta), std::abs(lin.gamma)});
        return detail::classify_linear(lin, zl, red);
    }

    BasicClassId id;
    const double a = -al / (2.0 * ga);
    const double dp = (4.0 * ga + al * al) / (4.0 * ga);
    id.reduction.offset = a;
    id.reduction.epsilon = 1;
    const double b2 = be / dp, g2 = ga / dp;
    id.reduced = {0.0, b2, g2, 1.0};
    if (small(be)) {
        id.row = 8;
        id.reduction.scale = std::sqrt(-g2);
    } else {
        id.row = 10;
        id.beta = b2;
        id.gamma = g2;
    }
    return id;
}

namespace detail {
inline std::string num(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}
} // namespace detail

/// Natural PDE of a basic class in the unknown lambda.
inline NaturalPDEProblem basic_pde(const BasicClassId& id) {
    id.validate();
    NaturalPDEProblem p;
    p.row = id.row;
    const double b = id.beta.value_or(0.0), g = id.gamma.value_or(0.0);
    auto power_transform = [&p](double beta) {
        p.w = [beta](double x) { return std::pow(x, beta); };
        p.dw = [beta](double x) { return beta * std::pow(x, beta - 1.0); };
        p.d2w = [beta](double x) { return beta * (beta - 1.0) * std::pow(x, beta - 2.0); };
        p.w_inverse = [beta](double y) { return std::pow(y, 1.0 / beta); };
        p.in_range = [](double x) { return x > 0.0; };
    };
    auto exp_transform = [&p]() {
        p.w = [](double x) { return std::exp(x); };
        p.dw = p.w;
        p.d2w = p.w;
        p.w_inverse = [](double y) { return std::log(y); };
    };
    switch (id.row) {
    case 1:
        p.kind = OperatorKind::laplace;
        set_identity_transform(p);
        p.rhs = [](double x) { return -std::exp(x); };
        p.drhs = p.rhs;
        p.substitution = "nu = -e^lambda";
        p.equation = "Δλ = -e^λ";
        break;
    case 2:
        p.kind = OperatorKind::laplace;
        set_identity_transform(p);
        p.rhs = [](double x) { return -std::sinh(x); };
        p.drhs = [](double x) { return -std::cosh(x); };
        p.potential = [](double x) { return 1.0 - std::cosh(x); };
        p.substitution = "nu = (1 - e^lambda)/2";
        p.equation = "Δλ = -sinh λ";
        break;
    case 3:
        p.kind = OperatorKind::star;
        exp_transform();
        p.rhs = [](double x) { return -2.0 * x * (x + 2.0); };
        p.drhs = [](double x) { return -4.0 * x - 4.0; };
        p.substitution = "nu = lambda";
        p.equation = "Δ*(e^λ) = -2λ(λ+2)";
        break;
    case 4:
    case 5: {
        p.kind = id.row == 4 ? OperatorKind::star : OperatorKind::star_bar;
        power_transform(b);
        const double c = -2.0 * b * (b + 1.0) / ((b - 1.0) * (b - 1.0));
        p.rhs = [c](double x) { return c * x; };
        p.drhs = [c](double) { return c; };
        p.substitution = "nu = lambda";
        p.equation = std::string(operator_symbol(p.kind)) + "(λ^" + detail::num(b) + ") = " + detail::num(c) + "·λ";
        break;
    }
    case 6:
    case 7:
        p.kind = id.row == 6 ? OperatorKind::star : OperatorKind::star_bar;
        power_transform(b);
        p.rhs = [b](double x) { return -b * ((b - 1.0) * x + 2.0) * ((b + 1.0) * x + 2.0) / (2.0 * (b - 1.0) * x); };
        p.drhs = [b](double x) {
            return -b / (2.0 * (b - 1.0)) * ((b * b - 1.0) - 4.0 / (x * x));
        };
        p.substitution = "nu = ((beta - 1) lambda + 2)/2";
        p.equation = std::string(operator_symbol(p.kind)) + "(λ^" + detail::num(b) + ") = -" + detail::num(b) +
                     "((" + detail::num(b - 1.0) + ")λ+2)((" + detail::num(b + 1.0) + ")λ+2)/(2·" +
                     detail::num(b - 1.0) + "·λ)";
        break;
    case 8:
        p.kind = OperatorKind::wave;
        set_identity_transform(p);
        p.rhs = [](double x) { return std::sin(x); };
        p.drhs = [](double x) { return std::cos(x); };
        p.potential = [](double x) { return 1.0 - std::cos(x); };
        p.substitution = "nu = tan(lambda/2)";
        p.equation = "Δ̄λ = sin λ";
        break;
    case 9:
        p.kind = OperatorKind::star;
        exp_transform();
        p.rhs = [](double) { return -2.0; };
        p.drhs = [](double) { return 0.0; };
        p.substitution = "nu = (lambda - 4)/(lambda - 2)";
        p.equation = "Δ*(e^λ) = -2";
        break;
    case 10: {
        p.kind = OperatorKind::star;
        const double sg = std::sqrt(-g);
        p.w = [b, g, sg](double x) { return std::exp(b / sg * std::atan(x / sg)); };
        p.dw = [b, g, sg](double x) { return std::exp(b / sg * std::atan(x / sg)) * b / (x * x - g); };
        p.d2w = [b, g, sg](double x) {
            const double q = x * x - g;
            return std::exp(b / sg * std::atan(x / sg)) * (b * b / (q * q) - 2.0 * b * x / (q * q));
        };
        p.w_inverse = [b, sg](double y) { return sg * std::tan(sg * std::log(y) / b); };
        p.rhs = [b, g](double x) { return 0.5 * b * g * x * (b * x + 2.0 * g) / (x * x - g); };
        p.drhs = [b, g](double x) {
            const double q = x * x - g;
            return 0.5 * b * g * ((2.0 * b * x + 2.0 * g) * q - 2.0 * x * x * (b * x + 2.0 * g)) / (q * q);
        };
        p.substitution = "nu = lambda + beta/2";
        p.equation = "Δ*(e^{" + detail::num(b) + "·I}) = (" + detail::num(0.5 * b * g) + ")·λ(" + detail::num(b) +
                     "λ+" + detail::num(2.0 * g) + ")/(λ²-(" + detail::num(g) + ")), I = arctan(λ/" +
                     detail::num(sg) + ")/" + detail::num(sg);
        break;
    }
    default: throw UsageError("row must be in 1..10");
    }
    return p;
}

/// Realization of a basic class as a Weingarten pair: with t = nu_of(lambda)
/// and the pair (f, g) in t, the natural PDE for t with x = u, y = v is a
/// pointwise multiple of the row equation.
struct RowRecipe {
    WeingartenPair pair;
    Fn nu_of;
    Fn dnu_of;
    Fn d2nu_of;
    /// Unknown values where the recipe is regular.
    std::function<bool(double)> valid;
};

inline RowRecipe row_recipe(const BasicClassId& id) {
    id.validate();
    RowRecipe rc;
    const double b = id.beta.value_or(0.0), g = id.gamma.value_or(0.0);
    auto set_sub = [&rc](Fn s, Fn ds, Fn d2s) {
        rc.nu_of = std::move(s);
        rc.dnu_of = std::move(ds);
        rc.d2nu_of = std::move(d2s);
    };
    const double big = 1e6;
    switch (id.row) {
    case 1:
        rc.pair = linear_pair(-1.0, 0.0, {-big, -1e-300});
        rc.pair.kind = "minimal";
        set_sub([](double x) { return -std::exp(x); }, [](double x) { return -std::exp(x); },
                [](double x) { return -std::exp(x); });
        rc.valid = [](double) { return true; };
        break;
    case 2:
        rc.pair = cmc_pair({-big, 0.5 - 1e-12});
        set_sub([](double x) { return 0.5 * (1.0 - std::exp(x)); }, [](double x) { return -0.5 * std::exp(x); },
                [](double x) { return -0.5 * std::exp(x); });
        rc.valid = [](double) { return true; };
        break;
    case 3:
        rc.pair = linear_pair(1.0, 2.0, {-big, big});
        set_sub([](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; });
        rc.valid = [](double) { return true; };
        break;
    case 4:
    case 5:
        rc.pair = linear_pair((b + 1.0) / (b - 1.0), 0.0, {1e-300, big});
        set_sub([](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; });
        rc.valid = [](double x) { return x > 0.0; };
        break;
    case 6:
    case 7:
        rc.pair = linear_pair((b + 1.0) / (b - 1.0), -2.0 / (b - 1.0), {-big, big});
        set_sub([b](double x) { return ((b - 1.0) * x + 2.0) / 2.0; }, [b](double) { return (b - 1.0) / 2.0; },
                [](double) { return 0.0; });
        rc.valid = [](double x) { return x > 0.0; };
        break;
    case 8:
        rc.pair = linear_fractional_pair(1.0, 0.0, 0.0, 1.0, {1e-300, big});
        rc.pair.g = [](double x) { return -1.0 / x; };
        rc.pair.dg = [](double x) { return 1.0 / (x * x); };
        rc.pair.d2g = [](double x) { return -2.0 / (x * x * x); };
        rc.pair.kind = "row8";
        set_sub([](double x) { return std::tan(0.5 * x); },
                [](double x) { const double c = std::cos(0.5 * x); return 0.5 / (c * c); },
                [](double x) { const double c = std::cos(0.5 * x); return 0.5 * std::tan(0.5 * x) / (c * c); });
        rc.valid = [](double x) { return x > 0.0 && x < M_PI; };
        break;
    case 9:
        rc.pair = linear_fractional_pair(1.0, -1.0, -1.0, 2.0, {-big, big});
        rc.pair.g = [](double x) { return x - 1.0; };
        rc.pair.kind = "row9";
        set_sub([](double x) { return (x - 4.0) / (x - 2.0); }, [](double x) { return 2.0 / ((x - 2.0) * (x - 2.0)); },
                [](double x) { return -4.0 / std::pow(x - 2.0, 3); });
        rc.valid = [](double x) { return std::abs(x - 2.0) > 1e-9 && std::abs(x) > 1e-9; };
        break;
    case 10: {
        const double c0 = g - b * b / 4.0, h = b / 2.0;
        rc.pair = linear_pair(1.0, 0.0, {-big, big});
        rc.pair.If_closed = nullptr;
        rc.pair.kind = "row10";
        rc.pair.g = [h, c0](double x) { return h + c0 / (x + h); };
        rc.pair.dg = [h, c0](double x) { return -c0 / ((x + h) * (x + h)); };
        rc.pair.d2g = [h, c0](double x) { return 2.0 * c0 / std::pow(x + h, 3); };
        set_sub([](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; });
        rc.valid = [h](double x) { return std::abs(x + h) > 1e-9; };
        break;
    }
    default: throw UsageError("row must be in 1..10");
    }
    return rc;
}

struct GaugeMatch {
    NaturalGauge gauge;
    /// Multiplier c with natural residual = c times row residual at lambda1.
    double multiplier = 0.0;
};

/// Gauge constants making the natural PDE of the recipe pair a multiple of
/// the row equation. The base value is nu_of(lambda0); the coefficients are
/// matched at lambda1 (defaults to lambda0).
inline GaugeMatch match_gauge(const NaturalPDEProblem& p, const RowRecipe& rc, double lambda0,
                              std::optional<double> lambda1 = std::nullopt) {
    const double l1 = lambda1.value_or(lambda0);
    const double t0 = rc.nu_of(lambda0), t1 = rc.nu_of(l1);
    const auto& pr = rc.pair;
    const double r = p.rhs(l1);
    const double fg = pr.f(t1) - pr.g(t1);
    if (!(std::abs(r) > 1e-12)) throw DomainError("right-hand side vanishes at the matching point");
    const double c = pr.f(t1) * pr.g(t1) * fg / r;
    const auto I = natural_integrals(pr, t0, t1);
    const double s1 = rc.dnu_of(l1);
    const double wp = p.dw(l1);
    double qp = wp;
    if (uses_reciprocal(p.kind)) qp = -wp / (p.w(l1) * p.w(l1));
    const double A2 = -c * wp / (std::exp(2.0 * I.If) * pr.dg(t1) * s1);
    const double B2 = c * y_sign(p.kind) * qp / (std::exp(2.0 * I.Ig) * pr.df(t1) * s1);
    if (!(A2 > 0.0) || !(B2 > 0.0))
        throw DomainError("no positive gauge on this branch (a^2 = " + detail::num(A2) + ", b^2 = " + detail::num(B2) + ")");
    return {NaturalGauge{std::sqrt(A2), std::sqrt(B2), t0}, c};
}

} // namespace wsurf
