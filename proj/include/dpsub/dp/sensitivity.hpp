#pragma once

#include <algorithm>
#include <functional>
#include <utility>

#include "dpsub/erm/primal.hpp"
#include "dpsub/rng.hpp"

namespace dpsub {

/// Draws a replacement point (x, y) for neighbouring datasets.
using PointSampler = std::function<std::pair<Vector, double>(CounterRng&)>;

struct SensitivityReport {
    double max_distance = 0.0;  ///< max sampled ||theta_hat(D) - theta_hat(D')||_2, a lower bound on GS
    double assumed_scale = 0.0; ///< 4 L R2 / lambda
    bool exceeds_assumed = false;
    std::size_t pairs = 0;
};

/// ||theta_hat(D) - theta_hat(D')|| with point i of D replaced by (x, y).
inline double neighbor_distance(const ErmProblem& prob, std::size_t i, const Vector& x, double y,
                                const SubgradientOptions& solver = {})
{
    const ErmProblem other(prob.data().with_point_replaced(i, x, y), prob.loss_model(), prob.F(), prob.lambda(),
                           prob.empirical().ridge(), prob.empirical().tilt());
    return (minimize_primal(prob, solver).x - minimize_primal(other, solver).x).norm();
}

/// Replaces a uniformly chosen point by a fresh draw, num_pairs times.
inline SensitivityReport empirical_sensitivity(const ErmProblem& prob, const PointSampler& sampler,
                                               std::size_t num_pairs, std::uint64_t seed,
                                               const SubgradientOptions& solver = {})
{
    detail::require(num_pairs >= 1, "need at least one neighbouring pair");
    SensitivityReport rep;
    rep.pairs = num_pairs;
    rep.assumed_scale = 4.0 * prob.loss_model().lipschitz * prob.loss_model().r2 / prob.lambda();
    const Vector base = minimize_primal(prob, solver).x;
    for (std::size_t k = 0; k < num_pairs; ++k) {
        CounterRng rng(seed, "sensitivity", {k});
        const auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(prob.data().n()));
        const auto [x, y] = sampler(rng);
        const ErmProblem other(prob.data().with_point_replaced(std::min(i, prob.data().n() - 1), x, y),
                               prob.loss_model(), prob.F(), prob.lambda(), prob.empirical().ridge(),
                               prob.empirical().tilt());
        rep.max_distance = std::max(rep.max_distance, (base - minimize_primal(other, solver).x).norm());
    }
    rep.exceeds_assumed = rep.max_distance > rep.assumed_scale;
    return rep;
}

} // namespace dpsub
