#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "dpsub/dp/privacy.hpp"
#include "dpsub/erm/primal.hpp"
#include "dpsub/erm/problem.hpp"

namespace dpsub {

enum class OutputVariant { Gaussian, GammaL2 };

struct OutputOptions {
    SubgradientOptions solver;
    /// Width of |P|(F) used to choose lambda, recorded in the provenance only.
    double width = std::numeric_limits<double>::quiet_NaN();
};

/// Adds calibrated noise to an already computed minimizer. Exposed so that
/// experiments can reuse one solve for several noise draws.
inline PrivateResult output_perturb_from(const ErmProblem& prob, const SolveReport& solved, const PrivacyParams& params,
                                         OutputVariant variant, std::uint64_t seed, double width = std::nan(""))
{
    params.validate(variant == OutputVariant::GammaL2);
    if (!solved.converged)
        throw NumericError("refusing to release an output-perturbed minimizer: the solver stopped with status '" +
                           to_string(solved.status) + "' after " + std::to_string(solved.iterations) +
                           " iterations; the privacy calibration assumes the exact minimizer");

    const auto& lm = prob.loss_model();
    PrivateResult r;
    r.params = params;
    r.lambda = prob.lambda();
    r.solve = solved;
    r.provenance.L = lm.lipschitz;
    r.provenance.R2 = lm.r2;
    r.provenance.lambda = prob.lambda();
    r.provenance.n = prob.n();
    r.provenance.epsilon = params.epsilon;
    r.provenance.delta = params.delta;
    r.provenance.p = prob.p();
    r.provenance.G = width;
    r.noise_spec.seed = seed;

    CounterRng rng(seed, "output_perturbation");
    if (variant == OutputVariant::Gaussian) {
        r.provenance.formula = ScaleFormula::OutputGaussian;
        r.noise_spec.kind = NoiseKind::Gaussian;
        r.noise_spec.scale = recompute_scale(r.provenance);
        r.noise = sample_gaussian(prob.p(), r.noise_spec.scale, rng);
    } else {
        r.provenance.formula = ScaleFormula::OutputGamma;
        r.noise_spec.kind = NoiseKind::GammaL2;
        r.noise_spec.scale = recompute_scale(r.provenance);
        r.noise = sample_gamma_l2(prob.p(), r.noise_spec.scale, rng);
        r.warnings.push_back("the Gamma mechanism's epsilon-DP proof assumes a differentiable regularizer; "
                             "Omega is not differentiable");
    }
    r.theta = solved.x + r.noise;
    return r;
}

/// theta_priv = theta_hat + b, with b calibrated to the problem's own lambda.
inline PrivateResult output_perturb(const ErmProblem& prob, const PrivacyParams& params, OutputVariant variant,
                                    std::uint64_t seed, const OutputOptions& opt = {})
{
    params.validate(variant == OutputVariant::GammaL2);
    return output_perturb_from(prob, minimize_primal(prob, opt.solver), params, variant, seed, opt.width);
}

} // namespace dpsub
