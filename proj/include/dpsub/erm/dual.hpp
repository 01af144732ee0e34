#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dpsub/erm/primal.hpp"
#include "dpsub/erm/problem.hpp"
#include "dpsub/errors.hpp"
#include "dpsub/polytope.hpp"
#include "dpsub/width.hpp"

namespace dpsub {

struct ConjugateResult {
    double value = 0.0;
    Vector argmax; ///< theta attaining the supremum; equals grad Lhat*(z)
};

/// Lhat*(z) = sup_theta z^T theta - Lhat(theta), with its maximizer.
inline ConjugateResult fenchel_conjugate(const EmpiricalLoss& loss, const Vector& z)
{
    ConjugateResult r;
    r.argmax = loss.conjugate_argmax(z);
    r.value = loss.conjugate_value(z, r.argmax);
    return r;
}

struct DualOptions {
    std::size_t width_samples = 10000;
    std::uint64_t width_seed = 0;
};

/// The dual  sup_{s in K} -Lhat*(-s)  with K = (lambda/n) |P|(F).
///
/// Every stored vector (vertices, iterates) lives in K, i.e. already carries
/// the lambda/n scale.
class DualProblem {
public:
    DualProblem(ErmProblem prob, const std::vector<Vector>& unit_vertices, WidthEstimate unit_width)
        : prob_(std::move(prob)), unit_width_(unit_width)
    {
        detail::require(!unit_vertices.empty(), "dual problem needs a nonempty vertex set");
        const double scale = prob_.penalty_scale();
        vertices_.reserve(unit_vertices.size());
        for (const auto& v : unit_vertices) {
            detail::require(static_cast<std::size_t>(v.size()) == prob_.p(), "vertex has the wrong dimension");
            vertices_.push_back(scale * v);
        }
        gamma_K_ = diameter(vertices_);
        origin_ = vertices_.size();
        for (std::size_t i = 0; i < vertices_.size(); ++i)
            if (vertices_[i].isZero(0.0)) origin_ = i;
    }

    /// Enumerates the vertices of |P|(F) (p <= 8) and estimates its width.
    static DualProblem build(ErmProblem prob, const DualOptions& opt = {})
    {
        auto verts = enumerate_vertices(prob.F());
        auto width = gaussian_width_mc(prob.F(), opt.width_samples, opt.width_seed);
        return DualProblem(std::move(prob), verts, width);
    }

    const ErmProblem& problem() const noexcept { return prob_; }
    const EmpiricalLoss& loss() const noexcept { return prob_.empirical(); }
    double k_scale() const noexcept { return prob_.penalty_scale(); }
    const std::vector<Vector>& vertices() const noexcept { return vertices_; }
    double gamma_K() const noexcept { return gamma_K_; }
    /// G_K = (lambda/n) G_{|P|(F)} by positive homogeneity of the width.
    double G_K() const noexcept { return k_scale() * unit_width_.mean; }
    const WidthEstimate& unit_width() const noexcept { return unit_width_; }
    /// Index of the origin in vertices(), or vertices().size() when absent.
    std::size_t origin_index() const noexcept { return origin_; }

private:
    ErmProblem prob_;
    std::vector<Vector> vertices_;
    WidthEstimate unit_width_;
    double gamma_K_ = 0.0;
    std::size_t origin_ = 0;
};

/// theta(s) = argmin_theta Lhat(theta) + s^T theta, for s given in K coordinates.
/// Also the gradient of Lhat* at -s.
inline Vector primal_from_dual(const DualProblem& dp, const Vector& s)
{
    detail::require(s.size() == static_cast<Eigen::Index>(dp.problem().p()) && s.allFinite(),
                    "dual point must be a finite vector of length p");
    return dp.loss().conjugate_argmax(-s);
}

namespace detail {

inline double dual_value_at(const DualProblem& dp, const Vector& s, const Vector& theta)
{
    return -dp.loss().conjugate_value(-s, theta);
}

/// Linear scores (s_prev - v)^T grad for every vertex; shared by the vertex
/// oracle and the private variant so the two use identical arithmetic.
inline double vertex_score(const Vector& s_prev, const Vector& v, const Vector& grad)
{
    return (s_prev - v).dot(grad);
}

/// FW gap at s with gradient theta = grad Lhat*(-s): max_{v in K} (v - s)^T theta.
/// Equals the primal-dual gap at (theta, s).
inline double fw_gap(const DualProblem& dp, const Vector& s, const Vector& theta)
{
    return dp.k_scale() * omega_inf(dp.problem().F(), theta) - theta.dot(s);
}

} // namespace detail

/// -Lhat*(-s) for s in K. Throws std::invalid_argument naming the largest
/// violated constraint when s/(lambda/n) is outside |P|(F) by more than 1e-9.
inline double dual_objective(const DualProblem& dp, const Vector& s)
{
    detail::require(s.size() == static_cast<Eigen::Index>(dp.problem().p()) && s.allFinite(),
                    "dual point must be a finite vector of length p");
    const double violation = polytope_max_violation(dp.problem().F(), s / dp.k_scale());
    if (violation > kMembershipTol)
        throw std::invalid_argument("dual point is outside K: max constraint violation " +
                                    std::to_string(violation) + " (in |P|(F) units)");
    return detail::dual_value_at(dp, s, primal_from_dual(dp, s));
}

enum class LinearOracle { Greedy, VertexArgmin };

struct FrankWolfeOptions {
    LinearOracle oracle = LinearOracle::Greedy;
    bool record_iterates = false;
};

/// Frank-Wolfe on the dual with step 1/(t+2) from s_0 = 0.
///
/// The linear step maximizes theta_t^T s over K, where theta_t = grad Lhat*(-s_{t-1});
/// Greedy solves it with the submodular greedy algorithm, VertexArgmin by
/// scanning the enumerated vertices (lowest index wins ties).
/// Traces hold the dual objective and FW gap at each s_t, t = 1..T.
inline SolveReport frank_wolfe_dual(const DualProblem& dp, std::size_t T, const FrankWolfeOptions& opt = {})
{
    detail::require_capability(dp.loss().strong_convexity() > 0.0,
                               "frank_wolfe_dual needs a strongly convex loss (smooth conjugate)");
    const auto p = static_cast<Eigen::Index>(dp.problem().p());
    SolveReport rep;
    Vector s = Vector::Zero(p);
    if (opt.record_iterates) rep.iterates.push_back(s);
    Vector theta = primal_from_dual(dp, s);

    for (std::size_t t = 1; t <= T; ++t) {
        Vector target;
        if (opt.oracle == LinearOracle::Greedy) {
            target = dp.k_scale() * polytope_linmax(dp.problem().F(), theta).s;
        } else {
            const auto& S = dp.vertices();
            std::size_t best = 0;
            double best_score = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < S.size(); ++i) {
                const double a = detail::vertex_score(s, S[i], theta);
                if (a < best_score) {
                    best_score = a;
                    best = i;
                }
            }
            target = S[best];
        }
        const double rho = 1.0 / (static_cast<double>(t) + 2.0);
        s = (1.0 - rho) * s + rho * target;
        theta = primal_from_dual(dp, s);
        rep.objective_trace.push_back(detail::dual_value_at(dp, s, theta));
        rep.gap_trace.push_back(detail::fw_gap(dp, s, theta));
        if (opt.record_iterates) rep.iterates.push_back(s);
    }
    rep.x = s;
    rep.iterations = T;
    rep.objective = detail::dual_value_at(dp, s, theta);
    rep.status = SolveStatus::MaxIterations;
    return rep;
}

struct PreciseDualOptions {
    std::size_t max_iter = 200000;
    double gap_tol = 1e-13; ///< relative to max(1, |dual objective|)
};

/// High-accuracy dual solve: away-step Frank-Wolfe over the enumerated vertex
/// set with exact line search. Converges linearly on polytopes, which makes it
/// the reference optimum for rate measurements and duality checks.
inline SolveReport solve_dual_precise(const DualProblem& dp, const PreciseDualOptions& opt = {})
{
    const auto& emp = dp.loss();
    detail::require_capability(emp.strong_convexity() > 0.0,
                               "solve_dual_precise needs a strongly convex loss (smooth conjugate)");
    const auto& S = dp.vertices();
    const auto p = static_cast<Eigen::Index>(dp.problem().p());
    std::vector<double> weight(S.size(), 0.0);
    const std::size_t start = dp.origin_index() < S.size() ? dp.origin_index() : 0;
    weight[start] = 1.0;
    Vector s = S[start];

    // h(gamma) = Lhat*(-(s + gamma d)) is convex; minimize it on [0, gmax].
    auto line_search = [&](const Vector& theta, const Vector& d, double gmax) {
        const double slope0 = -theta.dot(d);
        if (slope0 >= 0.0) return 0.0;
        if (emp.kind() == LossKind::Squared) {
            const double curv = 0.5 * emp.n() * d.dot(emp.normal_solve(d));
            if (curv <= 0.0) return gmax;
            return std::clamp(-slope0 / curv, 0.0, gmax);
        }
        auto slope = [&](double g) { return -emp.conjugate_argmax(-(s + g * d), &theta).dot(d); };
        if (slope(gmax) <= 0.0) return gmax;
        double lo = 0.0, hi = gmax;
        for (int i = 0; i < 100 && hi - lo > 1e-16 * gmax; ++i) {
            const double mid = 0.5 * (lo + hi);
            (slope(mid) < 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };

    SolveReport rep;
    Vector theta = primal_from_dual(dp, s);
    for (std::size_t it = 1; it <= opt.max_iter; ++it) {
        std::size_t fw = 0, away = start;
        double fw_val = -std::numeric_limits<double>::infinity();
        double away_val = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < S.size(); ++i) {
            const double v = theta.dot(S[i]);
            if (v > fw_val) {
                fw_val = v;
                fw = i;
            }
            if (weight[i] > 0.0 && v < away_val) {
                away_val = v;
                away = i;
            }
        }
        const double ts = theta.dot(s);
        const double gap = fw_val - ts;
        const double obj = detail::dual_value_at(dp, s, theta);
        rep.gap_trace.push_back(gap);
        rep.objective_trace.push_back(obj);
        rep.iterations = it - 1;
        if (gap <= opt.gap_tol * std::max(1.0, std::abs(obj))) {
            rep.converged = true;
            rep.status = SolveStatus::Converged;
            break;
        }

        const bool toward = gap >= ts - away_val || weight[away] >= 1.0;
        Vector d;
        double gmax;
        if (toward) {
            d = S[fw] - s;
            gmax = 1.0;
        } else {
            d = s - S[away];
            gmax = weight[away] / (1.0 - weight[away]);
        }
        const double gamma = line_search(theta, d, gmax);
        if (gamma <= 0.0) {
            // No descent along the chosen direction at round-off level.
            rep.converged = gap <= 1e-10 * std::max(1.0, std::abs(obj));
            rep.status = rep.converged ? SolveStatus::Converged : SolveStatus::MaxIterations;
            break;
        }
        if (toward) {
            for (auto& w : weight) w *= 1.0 - gamma;
            weight[fw] += gamma;
        } else {
            for (auto& w : weight) w *= 1.0 + gamma;
            weight[away] -= gamma;
            if (gamma >= gmax) weight[away] = 0.0;
        }
        if (it % 64 == 0) {
            s = Vector::Zero(p);
            for (std::size_t i = 0; i < S.size(); ++i)
                if (weight[i] > 0.0) s += weight[i] * S[i];
        } else {
            s += gamma * d;
        }
        theta = primal_from_dual(dp, s);
    }
    rep.x = s;
    rep.objective = detail::dual_value_at(dp, s, primal_from_dual(dp, s));
    return rep;
}

/// L1-Lipschitz constant of Lhat* over -K: sup_{s in K} ||grad Lhat*(-s)||_inf.
/// For the squared loss the gradient is affine in s, so the sup is attained at
/// a vertex and the result is exact.
inline double dual_l1_lipschitz(const DualProblem& dp)
{
    detail::require_capability(dp.loss().kind() == LossKind::Squared,
                               "the dual Lipschitz constant is computed for the squared loss only; "
                               "pass it explicitly for other losses");
    double best = 0.0;
    for (const auto& v : dp.vertices()) best = std::max(best, primal_from_dual(dp, v).lpNorm<Eigen::Infinity>());
    return best;
}

} // namespace dpsub
