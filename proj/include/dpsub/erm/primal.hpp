#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "dpsub/erm/problem.hpp"
#include "dpsub/errors.hpp"
#include "dpsub/polytope.hpp"

namespace dpsub {

enum class SolveStatus { Converged, MaxIterations, Diverged };

inline std::string to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::Diverged: return "diverged";
    }
    return "unknown";
}

/// Outcome of an iterative solve. `x` is theta for primal solvers and s for
/// dual ones; for dual solvers `objective_trace` holds the dual objective.
struct SolveReport {
    Vector x;
    double objective = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> objective_trace;
    std::vector<double> gap_trace;
    std::vector<Vector> iterates; ///< only when requested
    std::size_t iterations = 0;
    bool converged = false;
    SolveStatus status = SolveStatus::MaxIterations;
};

struct SubgradientOptions {
    std::size_t max_iter = 20000;
    double eta0 = std::numeric_limits<double>::quiet_NaN(); ///< NaN: 1 / L
    std::size_t window = 50;
    double rel_tol = 1e-9;
    double divergence = 1e12;
    bool record_trace = true;
};

/// Subgradient of Omega at theta: sign(theta) * greedy vertex of |theta|, with
/// the + sign at zero coordinates.
inline Vector omega_subgradient(const SubmodularFn& F, const Vector& theta)
{
    return polytope_linmax(F, theta).s;
}

/// Subgradient descent with step eta0 / sqrt(t), returning the best iterate.
/// Converged once the best objective changed by less than rel_tol (relative)
/// over the last `window` iterations.
inline SolveReport solve_primal_subgradient(const ErmProblem& prob, const SubgradientOptions& opt = {})
{
    detail::require(opt.max_iter >= 1, "max_iter must be at least 1");
    detail::require(opt.window >= 1, "convergence window must be at least 1");
    const double eta0 = std::isnan(opt.eta0) ? 1.0 / prob.loss_model().lipschitz : opt.eta0;
    detail::require(eta0 > 0.0 && std::isfinite(eta0), "step size must be positive");

    const auto p = static_cast<Eigen::Index>(prob.p());
    Vector theta = Vector::Zero(p);
    SolveReport rep;
    rep.x = theta;
    rep.objective = primal_objective(prob, theta).total;
    std::vector<double> best_history;
    best_history.reserve(opt.max_iter + 1);
    best_history.push_back(rep.objective);

    for (std::size_t t = 1; t <= opt.max_iter; ++t) {
        const Vector g = prob.empirical().gradient(theta) + prob.penalty_scale() * omega_subgradient(prob.F(), theta);
        theta -= eta0 / std::sqrt(static_cast<double>(t)) * g;
        const double obj = theta.allFinite() ? primal_objective(prob, theta).total
                                             : std::numeric_limits<double>::infinity();
        if (opt.record_trace) rep.objective_trace.push_back(obj);
        rep.iterations = t;
        if (!(obj <= opt.divergence)) {
            rep.status = SolveStatus::Diverged;
            rep.converged = false;
            return rep;
        }
        if (obj < rep.objective) {
            rep.objective = obj;
            rep.x = theta;
        }
        best_history.push_back(rep.objective);
        if (t >= opt.window) {
            const double before = best_history[t - opt.window];
            const double scale = std::max(std::abs(rep.objective), 1e-12);
            if (std::abs(before - rep.objective) / scale < opt.rel_tol) {
                rep.status = SolveStatus::Converged;
                rep.converged = true;
                return rep;
            }
        }
    }
    rep.status = SolveStatus::MaxIterations;
    return rep;
}

/// Largest p handled by solve_primal_exact.
inline constexpr std::size_t kMaxExactP = 5;

/// Exact minimizer for the squared loss on small p.
///
/// Omega is linear on every cell of its normal fan: a cell fixes a sign per
/// support coordinate and an ordered partition of the support into blocks of
/// equal magnitude. On such a cell theta = sum_i m_i (sign . 1_{B_i}) and the
/// objective is a strictly convex quadratic in the block magnitudes m. The
/// global minimizer lies in the relative interior of one cell, where it is the
/// unconstrained minimizer of that restricted quadratic; so evaluating the
/// true objective at every cell's restricted minimizer and keeping the best
/// finds it.
inline SolveReport solve_primal_exact(const ErmProblem& prob)
{
    const auto& emp = prob.empirical();
    detail::require_capability(emp.kind() == LossKind::Squared, "solve_primal_exact handles the squared loss only");
    detail::require_capability(prob.p() <= kMaxExactP,
                               "solve_primal_exact enumerates fan cells and is capped at p <= " +
                                   std::to_string(kMaxExactP));
    detail::require_capability(emp.strong_convexity() > 0.0,
                               "solve_primal_exact needs a positive definite design (add a ridge)");

    const std::size_t p = prob.p();
    const double n = prob.n();
    const Matrix Q = (emp.gram() + emp.ridge() * Matrix::Identity(static_cast<Eigen::Index>(p),
                                                                   static_cast<Eigen::Index>(p))) / n;
    const Vector q = emp.xty() / n - 0.5 * emp.tilt();
    const double scale = prob.penalty_scale();

    SolveReport rep;
    rep.x = Vector::Zero(static_cast<Eigen::Index>(p));
    rep.objective = primal_objective(prob, rep.x).total;

    std::vector<std::uint32_t> blocks;
    auto try_cell = [&](std::uint32_t support) {
        const auto k = static_cast<Eigen::Index>(blocks.size());
        std::vector<double> gains(blocks.size());
        std::uint32_t cum = 0;
        double prev = 0.0;
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            cum |= blocks[i];
            const double cur = prob.F().eval_mask(cum);
            gains[i] = cur - prev;
            prev = cur;
        }
        // iterate sign patterns over the support
        for (std::uint32_t neg = support;; neg = (neg - 1) & support) {
            Matrix M = Matrix::Zero(static_cast<Eigen::Index>(p), k);
            for (Eigen::Index i = 0; i < k; ++i)
                for (std::size_t j = 0; j < p; ++j)
                    if (blocks[static_cast<std::size_t>(i)] >> j & 1U)
                        M(static_cast<Eigen::Index>(j), i) = (neg >> j & 1U) ? -1.0 : 1.0;
            Vector rhs = M.transpose() * q;
            for (Eigen::Index i = 0; i < k; ++i) rhs[i] -= 0.5 * scale * gains[static_cast<std::size_t>(i)];
            const Vector m = (M.transpose() * Q * M).ldlt().solve(rhs);
            const Vector theta = M * m;
            if (theta.allFinite()) {
                const double obj = primal_objective(prob, theta).total;
                if (obj < rep.objective) {
                    rep.objective = obj;
                    rep.x = theta;
                }
            }
            ++rep.iterations;
            if (neg == 0) break;
        }
    };
    auto extend = [&](auto&& self, std::uint32_t remaining, std::uint32_t support) -> void {
        if (!blocks.empty()) try_cell(support);
        for (std::uint32_t sub = remaining; sub; sub = (sub - 1) & remaining) {
            blocks.push_back(sub);
            self(self, remaining & ~sub, support | sub);
            blocks.pop_back();
        }
    };
    extend(extend, (std::uint32_t{1} << p) - 1U, 0U);

    rep.converged = true;
    rep.status = SolveStatus::Converged;
    return rep;
}

struct BarrierOptions {
    double gap_tol = 1e-10;   ///< stop once the barrier gap bound m / tau is below gap_tol * max(1, |objective|)
    double tau0 = 1.0;
    double tau_growth = 20.0;
    std::size_t max_newton = 500; ///< per centering step
};

/// Largest p for which minimize_primal uses the barrier method by default.
inline constexpr std::size_t kMaxBarrierP = 6;

/// Log-barrier interior point method on the epigraph form
///
///     min Lhat(theta) + (lambda/n) t   s.t.  v^T theta <= t  for every vertex v,
///
/// which is equivalent because Omega(theta) = max_v v^T theta. Needs a twice
/// differentiable loss. `vertices` defaults to enumerate_vertices(F).
/// On return `gap_trace` holds the gap bound m / tau after each centering.
inline SolveReport solve_primal_barrier(const ErmProblem& prob, const BarrierOptions& opt = {},
                                        const std::vector<Vector>* vertices = nullptr)
{
    const auto& emp = prob.empirical();
    detail::require_capability(emp.smooth(), "solve_primal_barrier needs a twice differentiable loss");
    std::vector<Vector> own;
    if (!vertices) {
        own = enumerate_vertices(prob.F());
        vertices = &own;
    }
    const auto& S = *vertices;
    const auto p = static_cast<Eigen::Index>(prob.p());
    const double c = prob.penalty_scale();
    const double m = static_cast<double>(S.size());

    Matrix V(static_cast<Eigen::Index>(S.size()), p);
    for (std::size_t i = 0; i < S.size(); ++i) V.row(static_cast<Eigen::Index>(i)) = S[i].transpose();

    Vector theta = Vector::Zero(p);
    double t = 1.0;
    auto slack = [&](const Vector& th, double tt) -> Vector { return (tt - (V * th).array()).matrix(); };
    auto barrier_obj = [&](double tau, const Vector& th, double tt, const Vector& d) {
        return tau * (emp.value(th) + c * tt) - d.array().log().sum();
    };

    SolveReport rep;
    double tau = opt.tau0;
    for (int outer = 0; outer < 200; ++outer) {
        for (std::size_t it = 0; it < opt.max_newton; ++it) {
            const Vector d = slack(theta, t);
            const Vector inv = d.cwiseInverse();
            const Vector inv2 = inv.cwiseProduct(inv);
            // gradient and Hessian in z = (theta, t)
            Vector g(p + 1);
            g.head(p) = tau * emp.gradient(theta) + V.transpose() * inv;
            g[p] = tau * c - inv.sum();
            Matrix H = Matrix::Zero(p + 1, p + 1);
            H.topLeftCorner(p, p) = tau * emp.hessian(theta) + V.transpose() * inv2.asDiagonal() * V;
            const Vector Vt_inv2 = V.transpose() * inv2;
            H.block(0, p, p, 1) = -Vt_inv2;
            H.block(p, 0, 1, p) = -Vt_inv2.transpose();
            H(p, p) = inv2.sum();
            const Vector step = -H.ldlt().solve(g);
            const double decrement = -g.dot(step);
            ++rep.iterations;
            const double f0 = barrier_obj(tau, theta, t, d);
            // Below this the Armijo test is decided by round-off in f0.
            if (!(decrement > 1e-9 + 1e-12 * std::abs(f0))) break;

            bool accepted = false;
            double a = 1.0;
            for (int ls = 0; ls < 60 && !accepted; ++ls, a *= 0.5) {
                const Vector th = theta + a * step.head(p);
                const double tt = t + a * step[p];
                const Vector dn = slack(th, tt);
                if ((dn.array() <= 0.0).any()) continue;
                if (barrier_obj(tau, th, tt, dn) <= f0 - 0.25 * a * decrement) {
                    theta = th;
                    t = tt;
                    accepted = true;
                }
            }
            // No sufficient decrease: the centre is resolved to round-off.
            if (!accepted) break;
        }
        const double gap = m / tau;
        const double obj = primal_objective(prob, theta).total;
        rep.gap_trace.push_back(gap);
        rep.objective_trace.push_back(obj);
        if (!std::isfinite(obj)) {
            rep.status = SolveStatus::Diverged;
            break;
        }
        if (gap <= opt.gap_tol * std::max(1.0, std::abs(obj))) {
            rep.status = SolveStatus::Converged;
            rep.converged = true;
            break;
        }
        tau *= opt.tau_growth;
    }
    rep.x = theta;
    rep.objective = primal_objective(prob, theta).total;
    return rep;
}

/// Best available minimizer: exact cell enumeration for small squared-loss
/// problems, the barrier method for other smooth losses with p <= 6, and
/// subgradient descent otherwise.
inline SolveReport minimize_primal(const ErmProblem& prob, const SubgradientOptions& opt = {})
{
    const auto& emp = prob.empirical();
    if (emp.kind() == LossKind::Squared && prob.p() <= 4 && emp.strong_convexity() > 0.0)
        return solve_primal_exact(prob);
    if (emp.smooth() && prob.p() <= kMaxBarrierP) return solve_primal_barrier(prob);
    return solve_primal_subgradient(prob, opt);
}

} // namespace dpsub
