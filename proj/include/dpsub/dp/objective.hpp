#pragma once

#include <cmath>
#include <string>

#include "dpsub/dp/privacy.hpp"
#include "dpsub/erm/dual.hpp"
#include "dpsub/erm/primal.hpp"

namespace dpsub {

/// argmin Lhat(theta) + (lambda/n) Omega(theta) + b^T theta / n for a given b.
inline PrivateResult objective_perturb_with_noise(const ErmProblem& prob, const Vector& b,
                                                  const SubgradientOptions& solver = {})
{
    detail::require(b.size() == static_cast<Eigen::Index>(prob.p()) && b.allFinite(),
                    "noise vector must be finite with length p");
    PrivateResult r;
    r.noise = b;
    r.lambda = prob.lambda();
    r.solve = minimize_primal(prob.with_tilt(b / prob.n()), solver);
    if (r.solve.status == SolveStatus::Diverged) throw NumericError("objective-perturbed solve diverged");
    if (!r.solve.converged) r.warnings.push_back("objective-perturbed solve stopped at max_iter");
    r.theta = r.solve.x;
    return r;
}

/// Objective perturbation with b ~ N(0, sigma^2 I), sigma^2 = L^2 2 log(1/delta) / (n eps)^2.
inline PrivateResult objective_perturb(const ErmProblem& prob, const PrivacyParams& params, std::uint64_t seed,
                                       const SubgradientOptions& solver = {})
{
    params.validate(false);
    Provenance pv;
    pv.formula = ScaleFormula::ObjectiveGaussian;
    pv.L = prob.loss_model().lipschitz;
    pv.R2 = prob.loss_model().r2;
    pv.lambda = prob.lambda();
    pv.n = prob.n();
    pv.epsilon = params.epsilon;
    pv.delta = params.delta;
    pv.p = prob.p();
    const double sigma = recompute_scale(pv);
    CounterRng rng(seed, "objective_perturbation");
    auto r = objective_perturb_with_noise(prob, sample_gaussian(prob.p(), sigma, rng), solver);
    r.params = params;
    r.provenance = pv;
    r.noise_spec = {NoiseKind::Gaussian, sigma, seed};
    return r;
}

enum class EquivalenceStatus { Agree, Disagree, Inconclusive };

inline std::string to_string(EquivalenceStatus s)
{
    switch (s) {
    case EquivalenceStatus::Agree: return "agree";
    case EquivalenceStatus::Disagree: return "disagree";
    case EquivalenceStatus::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

struct EquivalenceReport {
    EquivalenceStatus status = EquivalenceStatus::Inconclusive;
    Vector theta_primal; ///< objective-perturbed primal minimizer
    Vector theta_dual;   ///< recovered from the perturbed dual optimum
    Vector s_priv;       ///< argmax_{s in K} -Lhat*(-(s + b/n))
    double theta_distance = 0.0;
    double objective_primal = 0.0;
    double objective_dual_recovery = 0.0;
    double dual_value = 0.0;
    std::string detail;
};

/// Solves the objective-perturbed problem two ways and compares:
///  (a) the primal argmin of Lhat + (lambda/n) Omega + b^T theta / n by exact
///      cell enumeration;
///  (b) s_priv = argmax_{s in K} -Lhat*(-(s + b/n)) by away-step Frank-Wolfe
///      over the vertices of K, then theta = argmin Lhat + s_priv^T theta + b^T theta / n.
/// Squared loss and p <= 4 only.
inline EquivalenceReport verify_primal_dual_equivalence(const ErmProblem& prob, const Vector& b, double tol)
{
    detail::require_capability(prob.empirical().kind() == LossKind::Squared,
                               "the equivalence check uses closed-form conjugates and needs the squared loss");
    detail::require_capability(prob.p() <= 4, "the equivalence check enumerates fan cells and is capped at p <= 4");
    detail::require(b.size() == static_cast<Eigen::Index>(prob.p()) && b.allFinite(),
                    "noise vector must be finite with length p");
    detail::require(tol > 0.0, "tolerance must be positive");

    EquivalenceReport rep;
    const Vector shift = b / prob.n();
    const ErmProblem tilted = prob.with_tilt(shift);

    const auto primal = solve_primal_exact(tilted);
    rep.theta_primal = primal.x;
    rep.objective_primal = primal.objective;

    // -Lhat_tilted*(-s) = -Lhat*(-(s + b/n)) for the tilt b/n, so the perturbed
    // dual is the dual of the tilted problem over the same K.
    const DualProblem dp(tilted, enumerate_vertices(prob.F()), WidthEstimate{});
    const auto dual = solve_dual_precise(dp);
    rep.s_priv = dual.x;
    rep.dual_value = dual.objective;
    rep.theta_dual = tilted.empirical().conjugate_argmax(-dual.x);
    rep.objective_dual_recovery = primal_objective(tilted, rep.theta_dual).total;
    rep.theta_distance = (rep.theta_primal - rep.theta_dual).norm();

    if (!dual.converged) {
        rep.status = EquivalenceStatus::Inconclusive;
        rep.detail = "dual solver did not reach its gap tolerance";
        return rep;
    }
    const double obj_gap = std::abs(rep.objective_primal - rep.objective_dual_recovery);
    rep.status = rep.theta_distance <= tol && obj_gap <= tol ? EquivalenceStatus::Agree : EquivalenceStatus::Disagree;
    rep.detail = "theta distance " + std::to_string(rep.theta_distance) + ", objective gap " + std::to_string(obj_gap);
    return rep;
}

} // namespace dpsub
