#pragma once

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "errors.hpp"

namespace wsurf {

struct NewtonOptions {
    double tol_residual = 1e-10;
    double tol_step = 1e-12;
    int max_iter = 200;
    int max_halvings = 30;
};

struct NewtonReport {
    int iterations = 0;
    bool converged = false;
    std::string reason;
    /// Max-norm of the residual before each iteration and at exit.
    std::vector<double> residual_history;
};

struct NewtonSystem {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residual;
    std::function<Eigen::SparseMatrix<double>(const Eigen::VectorXd&)> jacobian;
    /// Returns false when x leaves the admissible range of the problem.
    std::function<bool(const Eigen::VectorXd&)> admissible;
};

namespace detail {
inline std::string history_text(const std::vector<double>& h) {
    std::string s;
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (k) s += ", ";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3e", h[k]);
        s += buf;
    }
    return s;
}
} // namespace detail

/// Damped Newton with backtracking on the max-norm of the residual.
inline NewtonReport newton_solve(const NewtonSystem& sys, Eigen::VectorXd& x, const NewtonOptions& opt = {}) {
    NewtonReport rep;
    auto admissible = [&](const Eigen::VectorXd& y) { return !sys.admissible || sys.admissible(y); };
    if (!admissible(x)) throw RangeViolationError("initial iterate outside the admissible range");

    Eigen::VectorXd F = sys.residual(x);
    double r = F.size() ? F.cwiseAbs().maxCoeff() : 0.0;
    rep.residual_history.push_back(r);
    if (!std::isfinite(r)) throw RangeViolationError("residual not finite at the initial iterate");

    for (int it = 0; it < opt.max_iter; ++it) {
        if (r < opt.tol_residual) {
            rep.converged = true;
            rep.reason = "residual";
            rep.iterations = it;
            return rep;
        }
        Eigen::SparseMatrix<double> J = sys.jacobian(x);
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.analyzePattern(J);
        lu.factorize(J);
        if (lu.info() != Eigen::Success)
            throw NonConvergenceError("singular Jacobian at iteration " + std::to_string(it) +
                                      "; residual history: " + detail::history_text(rep.residual_history));
        Eigen::VectorXd dx = lu.solve(-F);

        double t = 1.0;
        bool accepted = false, range_failures_only = true;
        Eigen::VectorXd xn, Fn;
        double rn = 0.0;
        for (int k = 0; k <= opt.max_halvings; ++k, t *= 0.5) {
            xn = x + t * dx;
            if (!admissible(xn)) continue;
            Fn = sys.residual(xn);
            rn = Fn.cwiseAbs().maxCoeff();
            range_failures_only = false;
            if (std::isfinite(rn) && rn <= (1.0 - 1e-4 * t) * r) {
                accepted = true;
                break;
            }
        }
        const double step = t * dx.cwiseAbs().maxCoeff() / std::max(1.0, x.cwiseAbs().maxCoeff());
        if (!accepted) {
            // At the rounding floor a full step may not decrease the residual.
            if (dx.cwiseAbs().maxCoeff() / std::max(1.0, x.cwiseAbs().maxCoeff()) < opt.tol_step) {
                rep.converged = true;
                rep.reason = "step";
                rep.iterations = it;
                return rep;
            }
            if (range_failures_only)
                throw RangeViolationError("every damped step left the admissible range; residual history: " +
                                          detail::history_text(rep.residual_history));
            throw NonConvergenceError("line search failed; residual history: " +
                                      detail::history_text(rep.residual_history));
        }
        x = std::move(xn);
        F = std::move(Fn);
        r = rn;
        rep.residual_history.push_back(r);
        if (step < opt.tol_step) {
            rep.converged = true;
            rep.reason = "step";
            rep.iterations = it + 1;
            return rep;
        }
    }
    if (r < opt.tol_residual) {
        rep.converged = true;
        rep.reason = "residual";
        rep.iterations = opt.max_iter;
        return rep;
    }
    throw NonConvergenceError("iteration cap " + std::to_string(opt.max_iter) +
                              " reached; residual history: " + detail::history_text(rep.residual_history));
}

} // namespace wsurf
