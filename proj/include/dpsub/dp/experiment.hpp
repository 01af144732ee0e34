#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpsub/dp/frank_wolfe.hpp"
#include "dpsub/dp/objective.hpp"
#include "dpsub/dp/output.hpp"
#include "dpsub/dp/privacy.hpp"
#include "dpsub/erm/dual.hpp"
#include "dpsub/width.hpp"

namespace dpsub {

enum class Mechanism { None, OutputGauss, OutputGamma, ObjPerturb, PrivateFw };

inline constexpr std::string_view kMechanismNames = "output_gauss, output_gamma, obj_perturb, private_fw, none";

inline std::string to_string(Mechanism m)
{
    switch (m) {
    case Mechanism::None: return "none";
    case Mechanism::OutputGauss: return "output_gauss";
    case Mechanism::OutputGamma: return "output_gamma";
    case Mechanism::ObjPerturb: return "obj_perturb";
    case Mechanism::PrivateFw: return "private_fw";
    }
    return "unknown";
}

inline Mechanism parse_mechanism(std::string_view s)
{
    if (s == "none") return Mechanism::None;
    if (s == "output_gauss") return Mechanism::OutputGauss;
    if (s == "output_gamma") return Mechanism::OutputGamma;
    if (s == "obj_perturb") return Mechanism::ObjPerturb;
    if (s == "private_fw") return Mechanism::PrivateFw;
    throw std::invalid_argument("unknown mechanism '" + std::string(s) + "' (valid: " + std::string(kMechanismNames) +
                                ")");
}

/// How lambda is chosen per sample size n.
struct LambdaRule {
    enum class Kind { Auto, Explicit, PerN };
    Kind kind = Kind::Auto;
    double value = 0.0; ///< lambda for Explicit, kappa in lambda = kappa n for PerN

    double lambda(double L, double R2, double n, double G) const
    {
        switch (kind) {
        case Kind::Auto: return width_calibrated_lambda(L, R2, n, G);
        case Kind::Explicit: return value;
        case Kind::PerN: return value * n;
        }
        return std::nan("");
    }
};

/// Draws n i.i.d. labelled points.
using DatasetSampler = std::function<Dataset(std::size_t n, CounterRng& rng)>;

struct ExperimentSpec {
    DatasetSampler sampler;
    LossKind loss = LossKind::Squared;
    double r2_bound = 1.0;   ///< a-priori bound on ||x||_2 used by every calibration
    double y_bound = 1.0;    ///< a-priori bound on |y|
    double domain_bound = 1.0;
    SubmodularFn F = SubmodularFn::cardinality(1);
    LambdaRule lambda_rule;
    PrivacyParams privacy;
    Mechanism mechanism = Mechanism::OutputGauss;
    std::vector<std::size_t> n_grid;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    std::size_t holdout = 100000; ///< 0 skips the population estimate
    std::size_t width_samples = 10000;
    bool timing = false;
    SubgradientOptions solver;
};

struct ExperimentRow {
    std::size_t n = 0;
    std::size_t trial = 0;
    Mechanism mechanism = Mechanism::None;
    double excess_empirical_risk = 0.0;
    double excess_population_risk = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> runtime_ms;
    double noise_scale = 0.0;
    double lambda = 0.0;
    double G_width = 0.0;
    std::optional<std::size_t> T;
    std::uint64_t seed = 0;
    // diagnostics outside the CSV schema
    double dual_suboptimality = std::numeric_limits<double>::quiet_NaN();
    double noise_term = std::numeric_limits<double>::quiet_NaN(); ///< L R2 sigma
    double width_term = std::numeric_limits<double>::quiet_NaN(); ///< (lambda/n) G
};

/// Seed of trial `trial` at sample size n; every random draw of the trial
/// derives from it, so rows do not depend on evaluation order.
inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t n, std::size_t trial)
{
    return stream_key(seed, "trial", {n, trial});
}

namespace detail {

inline SolveReport converged_minimizer(const ErmProblem& prob, const SubgradientOptions& solver)
{
    auto rep = minimize_primal(prob, solver);
    if (!rep.converged)
        throw NumericError("non-private minimizer did not converge (status " + to_string(rep.status) + ", " +
                           std::to_string(rep.iterations) + " iterations)");
    return rep;
}

} // namespace detail

/// Runs the configured mechanism over every (n, trial) and reports the excess
/// empirical risk L(theta_priv; D) - L(theta_hat; D) and, with a holdout, the
/// excess population risk J(theta_priv) - J(theta*), where J is the penalized
/// objective on the holdout and theta* its minimizer.
inline std::vector<ExperimentRow> excess_risk_experiment(const ExperimentSpec& spec)
{
    detail::require(static_cast<bool>(spec.sampler), "experiment needs a data sampler");
    detail::require(!spec.n_grid.empty(), "n grid must be nonempty");
    detail::require(spec.trials >= 1, "trials must be at least 1");
    for (auto n : spec.n_grid) detail::require(n >= 1, "every n must be positive");

    const LossModel lm = LossModel::make(spec.loss, spec.r2_bound, spec.y_bound, spec.domain_bound);
    const WidthEstimate width = gaussian_width_mc(spec.F, spec.width_samples, spec.seed);
    const bool dual_mechanism = spec.mechanism == Mechanism::PrivateFw;
    const std::vector<Vector> unit_vertices = dual_mechanism ? enumerate_vertices(spec.F) : std::vector<Vector>{};

    std::optional<Dataset> holdout;
    if (spec.holdout > 0) {
        CounterRng rng(spec.seed, "holdout");
        holdout.emplace(spec.sampler(spec.holdout, rng));
    }

    std::vector<ExperimentRow> rows;
    for (const std::size_t n : spec.n_grid) {
        const double nd = static_cast<double>(n);
        const double lambda = spec.lambda_rule.lambda(lm.lipschitz, lm.r2, nd, width.mean);
        detail::require(lambda > 0.0 && std::isfinite(lambda), "lambda rule produced a non-positive lambda");

        std::optional<ErmProblem> population;
        Vector theta_star;
        double J_star = 0.0;
        if (holdout) {
            // J has the penalty (lambda/n) Omega; on N holdout points that is lambda' = lambda N / n.
            population.emplace(*holdout, lm, spec.F, lambda * static_cast<double>(holdout->n()) / nd);
            const auto rep = detail::converged_minimizer(*population, spec.solver);
            theta_star = rep.x;
            J_star = rep.objective;
        }

        for (std::size_t trial = 0; trial < spec.trials; ++trial) {
            ExperimentRow row;
            row.n = n;
            row.trial = trial;
            row.mechanism = spec.mechanism;
            row.lambda = lambda;
            row.G_width = width.mean;
            row.seed = trial_seed(spec.seed, n, trial);
            CounterRng data_rng(row.seed, "data");
            const ErmProblem prob(spec.sampler(n, data_rng), lm, spec.F, lambda);

            const auto start = std::chrono::steady_clock::now();
            Vector theta_hat, theta_priv;
            double sigma = std::nan("");
            switch (spec.mechanism) {
            case Mechanism::None: {
                theta_hat = detail::converged_minimizer(prob, spec.solver).x;
                theta_priv = theta_hat;
                break;
            }
            case Mechanism::OutputGauss:
            case Mechanism::OutputGamma: {
                const auto solved = detail::converged_minimizer(prob, spec.solver);
                theta_hat = solved.x;
                const auto variant =
                    spec.mechanism == Mechanism::OutputGauss ? OutputVariant::Gaussian : OutputVariant::GammaL2;
                const auto res = output_perturb_from(prob, solved, spec.privacy, variant, row.seed, width.mean);
                theta_priv = res.theta;
                row.noise_scale = res.noise_spec.scale;
                sigma = variant == OutputVariant::Gaussian ? row.noise_scale : std::nan("");
                break;
            }
            case Mechanism::ObjPerturb: {
                theta_hat = detail::converged_minimizer(prob, spec.solver).x;
                const auto res = objective_perturb(prob, spec.privacy, row.seed, spec.solver);
                theta_priv = res.theta;
                row.noise_scale = res.noise_spec.scale;
                break;
            }
            case Mechanism::PrivateFw: {
                const DualProblem dp(prob, unit_vertices, width);
                const double L = dual_l1_lipschitz(dp);
                PrivateFwOptions fo;
                fo.record_trace = false;
                const auto res = private_frank_wolfe(dp, L, spec.privacy, row.seed, fo);
                const auto best = solve_dual_precise(dp);
                if (!best.converged) throw NumericError("reference dual solve did not converge");
                theta_hat = primal_from_dual(dp, best.x);
                theta_priv = res.theta;
                row.noise_scale = res.noise_spec.scale;
                row.T = res.provenance.T;
                row.dual_suboptimality = best.objective - res.solve.objective;
                break;
            }
            }
            const auto stop = std::chrono::steady_clock::now();
            if (spec.timing) row.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();

            row.excess_empirical_risk = primal_objective(prob, theta_priv).total - primal_objective(prob, theta_hat).total;
            if (population) row.excess_population_risk = primal_objective(*population, theta_priv).total - J_star;
            row.noise_term = lm.lipschitz * lm.r2 * sigma;
            row.width_term = lambda / nd * width.mean;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

} // namespace dpsub
