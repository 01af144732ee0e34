#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "dpsub/dp/privacy.hpp"
#include "dpsub/erm/dual.hpp"

namespace dpsub {

struct PrivateFwOptions {
    std::optional<std::size_t> T;          ///< nullopt: the iteration-count formula
    std::optional<double> scale_override;  ///< force the Laplace scale (0 disables noise)
    bool record_iterates = false;
    bool record_trace = true;              ///< dual objective per iteration (non-private diagnostic)
};

/// Frank-Wolfe on the dual where every vertex score is perturbed by a fresh
/// Laplace draw each iteration. The draw for vertex i at iteration t comes
/// from stream (seed, "pfw_laplace", {t, i}). `L` is the L1-Lipschitz
/// constant of Lhat* over -K.
inline PrivateResult private_frank_wolfe(const DualProblem& dp, double L, const PrivacyParams& params,
                                         std::uint64_t seed, const PrivateFwOptions& opt = {})
{
    params.validate(false);
    detail::require(params.delta < 1.0, "private Frank-Wolfe needs delta < 1");
    detail::require(L > 0.0 && std::isfinite(L), "dual Lipschitz constant must be positive and finite");
    detail::require_capability(dp.loss().strong_convexity() > 0.0,
                               "private Frank-Wolfe needs a strongly convex loss (smooth conjugate)");
    const auto& S = dp.vertices();
    const double n = dp.problem().n();

    PrivateResult r;
    r.params = params;
    r.lambda = dp.problem().lambda();
    r.vertex_count = S.size();

    std::size_t T = 0;
    if (opt.T) {
        T = *opt.T;
    } else {
        const double raw = frank_wolfe_iterations(dp.gamma_K(), dp.G_K(), L, n, params.epsilon);
        T = raw >= 1.0 ? static_cast<std::size_t>(std::llround(raw)) : 0;
        if (T < 1) {
            r.warnings.push_back("iteration formula gave T = " + std::to_string(raw) + " < 1; clamped to 1");
            T = 1;
        }
    }

    r.provenance.formula = ScaleFormula::FrankWolfeLaplace;
    r.provenance.L = L;
    r.provenance.gamma_K = dp.gamma_K();
    r.provenance.G = dp.G_K();
    r.provenance.T = T;
    r.provenance.n = n;
    r.provenance.lambda = r.lambda;
    r.provenance.epsilon = params.epsilon;
    r.provenance.delta = params.delta;
    r.provenance.p = dp.problem().p();
    const double scale = opt.scale_override ? *opt.scale_override : recompute_scale(r.provenance);
    detail::require(scale >= 0.0 && std::isfinite(scale), "Laplace scale must be finite and nonnegative");
    r.noise_spec = {NoiseKind::LaplacePerScore, scale, seed};

    auto& rep = r.solve;
    Vector s = Vector::Zero(static_cast<Eigen::Index>(dp.problem().p()));
    if (opt.record_iterates) rep.iterates.push_back(s);
    Vector theta = primal_from_dual(dp, s);
    for (std::size_t t = 1; t <= T; ++t) {
        std::size_t best = 0;
        double best_score = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < S.size(); ++i) {
            double a = detail::vertex_score(s, S[i], theta);
            if (scale > 0.0) a += CounterRng(seed, "pfw_laplace", {t, i}).laplace(scale);
            if (a < best_score) {
                best_score = a;
                best = i;
            }
        }
        const double rho = 1.0 / (static_cast<double>(t) + 2.0);
        s = (1.0 - rho) * s + rho * S[best];
        theta = primal_from_dual(dp, s);
        if (opt.record_trace) {
            rep.objective_trace.push_back(detail::dual_value_at(dp, s, theta));
            rep.gap_trace.push_back(detail::fw_gap(dp, s, theta));
        }
        if (opt.record_iterates) rep.iterates.push_back(s);
    }
    rep.x = s;
    rep.iterations = T;
    rep.objective = detail::dual_value_at(dp, s, theta);
    rep.status = SolveStatus::MaxIterations;
    r.s = s;
    r.theta = theta;
    return r;
}

} // namespace dpsub
