#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dpsub/errors.hpp"
#include "dpsub/polytope.hpp"
#include "dpsub/rng.hpp"

namespace dpsub {

/// Monte-Carlo estimate of a Gaussian width.
struct WidthEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t num_samples = 0;
    std::uint64_t seed = 0;
};

/// Standard normal vector for sample `index` of the width stream under `seed`.
inline Vector width_sample(std::size_t p, std::uint64_t seed, std::size_t index)
{
    CounterRng rng(seed, "gaussian_width", {index});
    Vector b(static_cast<Eigen::Index>(p));
    for (Eigen::Index j = 0; j < b.size(); ++j) b[j] = rng.normal();
    return b;
}

/// Estimate G_{|P|(F)} = E_b sup_{s in |P|(F)} b^T s = E_b f(|b|), b ~ N(0, I_p).
///
/// Sample i draws from its own stream (seed, "gaussian_width", i), so the
/// result does not depend on how the loop is partitioned.
inline WidthEstimate gaussian_width_mc(const SubmodularFn& F, std::size_t num_samples, std::uint64_t seed)
{
    detail::require(num_samples >= 2, "gaussian_width_mc needs at least two samples");
    std::vector<double> values(num_samples);
    for (std::size_t i = 0; i < num_samples; ++i) values[i] = omega_inf(F, width_sample(F.p(), seed, i));

    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(num_samples);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sample_std = std::sqrt(ss / static_cast<double>(num_samples - 1));
    return {mean, sample_std / std::sqrt(static_cast<double>(num_samples)), num_samples, seed};
}

} // namespace dpsub
