#pragma once

// Brute-force reference implementations for tests. Nothing here calls the
// greedy algorithm, the solvers, or the loss helpers it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "dpsub/erm/dataset.hpp"
#include "dpsub/erm/loss.hpp"
#include "dpsub/errors.hpp"
#include "dpsub/polytope.hpp"
#include "dpsub/rng.hpp"
#include "dpsub/width.hpp"

namespace dpsub::oracles {

/// max_{v in enumerate_vertices(F)} w^T v, i.e. the LP over |P|(F) solved by
/// listing its vertices. p <= 8.
inline double lp_over_vertices(const std::vector<Vector>& vertices, const Vector& w)
{
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : vertices) {
        detail::require(v.size() == w.size(), "weight vector length does not match ground set");
        best = std::max(best, w.dot(v));
    }
    return best;
}

inline double lp_over_vertices(const SubmodularFn& F, const Vector& w)
{
    detail::require(static_cast<std::size_t>(w.size()) == F.p(), "weight vector length does not match ground set");
    return lp_over_vertices(enumerate_vertices(F), w);
}

inline constexpr std::uint64_t kMaxGridPoints = 10'000'000;

struct GridSpec {
    Vector lo;
    Vector hi;
    std::size_t steps_per_dim = 3;
};

struct GridResult {
    Vector x;
    double value = 0.0;
};

/// Exhaustive grid argmin (first index wins ties) followed by three rounds of
/// local refinement, each halving the spacing around the incumbent.
inline GridResult grid_minimize(const std::function<double(const Vector&)>& objective, const GridSpec& spec)
{
    const auto d = spec.lo.size();
    detail::require(d >= 1 && spec.hi.size() == d, "grid bounds must be nonempty vectors of equal length");
    detail::require(spec.steps_per_dim >= 3, "grid needs at least 3 steps per dimension");
    double total = 1.0;
    for (Eigen::Index i = 0; i < d; ++i) total *= static_cast<double>(spec.steps_per_dim);
    detail::require_capability(total <= static_cast<double>(kMaxGridPoints),
                               "grid exceeds the 1e7 point guard");

    Vector step = (spec.hi - spec.lo) / static_cast<double>(spec.steps_per_dim - 1);
    GridResult best{spec.lo, std::numeric_limits<double>::infinity()};
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    Vector x(d);
    for (;;) {
        for (Eigen::Index i = 0; i < d; ++i) x[i] = spec.lo[i] + step[i] * static_cast<double>(idx[static_cast<std::size_t>(i)]);
        const double v = objective(x);
        if (v < best.value) best = {x, v};
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == spec.steps_per_dim) idx[k++] = 0;
        if (k == idx.size()) break;
    }

    for (int round = 0; round < 3; ++round) {
        step /= 2.0;
        const Vector centre = best.x;
        std::vector<int> off(static_cast<std::size_t>(d), -2);
        for (;;) {
            for (Eigen::Index i = 0; i < d; ++i)
                x[i] = std::clamp(centre[i] + step[i] * off[static_cast<std::size_t>(i)], spec.lo[i], spec.hi[i]);
            const double v = objective(x);
            if (v < best.value) best = {x, v};
            std::size_t k = 0;
            while (k < off.size() && ++off[k] > 2) off[k++] = -2;
            if (k == off.size()) break;
        }
    }
    return best;
}

/// ||theta||_1 accumulated over coordinates in descending |theta_j| order,
/// ties by ascending index. The summation order is the one omega_inf uses,
/// so under F = |A| the two agree bit for bit.
inline double l1_norm_sorted(const Vector& theta)
{
    std::vector<std::size_t> idx(static_cast<std::size_t>(theta.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(theta[static_cast<Eigen::Index>(a)]) > std::abs(theta[static_cast<Eigen::Index>(b)]);
    });
    double acc = 0.0;
    for (auto j : idx) acc += std::abs(theta[static_cast<Eigen::Index>(j)]);
    return acc;
}

inline double linf_norm(const Vector& theta)
{
    double m = 0.0;
    for (Eigen::Index j = 0; j < theta.size(); ++j) m = std::max(m, std::abs(theta[j]));
    return m;
}

enum class NamedBall { L1, Linf };

/// Direct Monte-Carlo width of the unit L1 or L-infinity ball, using the
/// closed-form supports ||b||_inf and ||b||_1.
inline WidthEstimate mc_width_named(NamedBall ball, std::size_t p, std::size_t samples, std::uint64_t seed)
{
    detail::require(p >= 1, "dimension must be positive");
    detail::require(samples >= 1000, "mc_width_named needs at least 1000 samples");
    CounterRng rng(seed, "mc_width_named");
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        double l1 = 0.0, linf = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double a = std::abs(rng.normal());
            l1 += a;
            linf = std::max(linf, a);
        }
        const double v = ball == NamedBall::Linf ? l1 : linf;
        sum += v;
        sumsq += v * v;
    }
    const double ns = static_cast<double>(samples);
    const double mean = sum / ns;
    const double var = std::max(0.0, (sumsq - ns * mean * mean) / (ns - 1.0));
    return {mean, std::sqrt(var / ns), samples, seed};
}

/// (1/n) sum l + (ridge/n)||theta||^2 + tilt^T theta with a plain loop.
inline double naive_fit(const Dataset& data, LossKind kind, const Vector& theta, double ridge = 0.0,
                        const Vector& tilt = Vector())
{
    double acc = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
        double u = 0.0;
        for (std::size_t j = 0; j < data.p(); ++j)
            u += data.X()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * theta[static_cast<Eigen::Index>(j)];
        const double y = data.y()[static_cast<Eigen::Index>(i)];
        switch (kind) {
        case LossKind::Squared: acc += (u - y) * (u - y); break;
        case LossKind::Logistic: acc += std::log(1.0 + std::exp(-y * u)); break;
        case LossKind::Hinge: acc += (1.0 - y * u > 0.0) ? 1.0 - y * u : 0.0; break;
        }
    }
    double out = acc / static_cast<double>(data.n());
    double sq = 0.0;
    for (Eigen::Index j = 0; j < theta.size(); ++j) sq += theta[j] * theta[j];
    out += ridge / static_cast<double>(data.n()) * sq;
    if (tilt.size() == theta.size())
        for (Eigen::Index j = 0; j < theta.size(); ++j) out += tilt[j] * theta[j];
    return out;
}

/// Penalized objective with Omega evaluated as the LP over enumerated vertices.
inline double naive_primal_objective(const Dataset& data, LossKind kind, const SubmodularFn& F, double lambda,
                                     const Vector& theta, double ridge = 0.0, const Vector& tilt = Vector())
{
    return naive_fit(data, kind, theta, ridge, tilt) +
           lambda / static_cast<double>(data.n()) * lp_over_vertices(F, theta);
}

} // namespace dpsub::oracles
