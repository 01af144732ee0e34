#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dpsub/erm/primal.hpp"
#include "dpsub/errors.hpp"
#include "dpsub/polytope.hpp"
#include "dpsub/rng.hpp"

namespace dpsub {

struct PrivacyParams {
    double epsilon = 1.0;
    double delta = 1e-6;

    /// epsilon > 0 and delta in [0, 1]; delta = 0 only when allowed.
    void validate(bool allow_zero_delta) const
    {
        detail::require(epsilon > 0.0 && std::isfinite(epsilon), "epsilon must be positive and finite");
        detail::require(delta >= 0.0 && delta <= 1.0, "delta must lie in [0, 1]");
        if (!allow_zero_delta)
            detail::require(delta > 0.0, "delta = 0 is only valid for the Gamma output mechanism");
    }
};

enum class NoiseKind { GammaL2, Gaussian, LaplacePerScore };

inline std::string to_string(NoiseKind k)
{
    switch (k) {
    case NoiseKind::GammaL2: return "gamma_l2";
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::LaplacePerScore: return "laplace_per_score";
    }
    return "unknown";
}

/// `scale` is sigma for Gaussian noise, the radial scale 1/rate for GammaL2,
/// and the Laplace scale for LaplacePerScore.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::Gaussian;
    double scale = 0.0;
    std::uint64_t seed = 0;
};

// Noise scales.

/// sigma with sigma^2 = 16 (L R2)^2 (log(1/delta) + eps) / (lambda^2 eps^2).
inline double output_gaussian_sigma(double L, double R2, double lambda, double epsilon, double delta)
{
    return std::sqrt(16.0 * (L * R2) * (L * R2) * (std::log(1.0 / delta) + epsilon) / (lambda * lambda * epsilon * epsilon));
}

/// 4 L R2 / (eps lambda): density of b proportional to exp(-||b|| / scale).
inline double output_gamma_scale(double L, double R2, double lambda, double epsilon)
{
    return 4.0 * L * R2 / (epsilon * lambda);
}

/// sigma with sigma^2 = L^2 2 log(1/delta) / (n eps)^2.
inline double objective_sigma(double L, double n, double epsilon, double delta)
{
    return std::sqrt(L * L * 2.0 * std::log(1.0 / delta) / ((n * epsilon) * (n * epsilon)));
}

/// L Gamma_K sqrt(8 T log(1/delta)) / (n eps).
inline double frank_wolfe_laplace_scale(double L, double gamma_K, double T, double n, double epsilon, double delta)
{
    return L * gamma_K * std::sqrt(8.0 * T * std::log(1.0 / delta)) / (n * epsilon);
}

/// Gamma_K^{4/3} (n eps)^{2/3} / (L G_K)^{2/3}, before rounding.
inline double frank_wolfe_iterations(double gamma_K, double G_K, double L, double n, double epsilon)
{
    return std::pow(gamma_K, 4.0 / 3.0) * std::pow(n * epsilon, 2.0 / 3.0) / std::pow(L * G_K, 2.0 / 3.0);
}

/// lambda = L R2 sqrt(n) / G.
inline double width_calibrated_lambda(double L, double R2, double n, double G)
{
    detail::require(L > 0 && R2 > 0 && n > 0 && G > 0, "lambda rule needs positive L, R2, n and width");
    return L * R2 * std::sqrt(n) / G;
}

enum class ScaleFormula { OutputGaussian, OutputGamma, ObjectiveGaussian, FrankWolfeLaplace };

/// Every constant a noise scale was computed from.
struct Provenance {
    ScaleFormula formula = ScaleFormula::OutputGaussian;
    double L = 0.0;
    double R2 = 0.0;
    double gamma_K = 0.0;
    double G = 0.0; ///< width of |P|(F) (output) or of K (Frank-Wolfe); NaN when unused
    double lambda = 0.0;
    double n = 0.0;
    double epsilon = 0.0;
    double delta = 0.0;
    std::size_t T = 0;
    std::size_t p = 0;
};

inline double recompute_scale(const Provenance& pv)
{
    switch (pv.formula) {
    case ScaleFormula::OutputGaussian: return output_gaussian_sigma(pv.L, pv.R2, pv.lambda, pv.epsilon, pv.delta);
    case ScaleFormula::OutputGamma: return output_gamma_scale(pv.L, pv.R2, pv.lambda, pv.epsilon);
    case ScaleFormula::ObjectiveGaussian: return objective_sigma(pv.L, pv.n, pv.epsilon, pv.delta);
    case ScaleFormula::FrankWolfeLaplace:
        return frank_wolfe_laplace_scale(pv.L, pv.gamma_K, static_cast<double>(pv.T), pv.n, pv.epsilon, pv.delta);
    }
    return std::nan("");
}

struct PrivateResult {
    Vector theta;    ///< released primal vector (mapped from s for dual mechanisms)
    Vector s;        ///< dual point, for dual mechanisms
    Vector noise;    ///< b for output and objective perturbation
    NoiseSpec noise_spec;
    PrivacyParams params;
    double lambda = 0.0;
    Provenance provenance;
    std::size_t vertex_count = 0;
    std::vector<std::string> warnings;
    SolveReport solve; ///< the underlying solve (non-private minimizer, perturbed solve, or FW trace)
};

// Samplers.

inline Vector sample_gaussian(std::size_t p, double sigma, CounterRng& rng)
{
    Vector b(static_cast<Eigen::Index>(p));
    for (Eigen::Index j = 0; j < b.size(); ++j) b[j] = sigma * rng.normal();
    return b;
}

/// Density proportional to exp(-||b||_2 / scale): uniform direction, radius
/// Gamma(shape p, rate 1/scale).
inline Vector sample_gamma_l2(std::size_t p, double scale, CounterRng& rng)
{
    Vector dir = sample_gaussian(p, 1.0, rng);
    double norm = dir.norm();
    while (norm == 0.0) {
        dir = sample_gaussian(p, 1.0, rng);
        norm = dir.norm();
    }
    const double radius = scale == 0.0 ? 0.0 : rng.gamma_int(static_cast<unsigned>(p), 1.0 / scale);
    return radius / norm * dir;
}

} // namespace dpsub
