#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "dpsub/erm/dataset.hpp"
#include "dpsub/errors.hpp"
#include "dpsub/polytope.hpp"
#include "dpsub/rng.hpp"

namespace dpsub::bench {

enum class TaskKind { LassoSynthetic, LinfSynthetic, CustomCsv };

inline std::string to_string(TaskKind k)
{
    switch (k) {
    case TaskKind::LassoSynthetic: return "lasso_synthetic";
    case TaskKind::LinfSynthetic: return "linf_synthetic";
    case TaskKind::CustomCsv: return "custom_csv";
    }
    return "unknown";
}

inline TaskKind parse_task_kind(std::string_view s)
{
    if (s == "lasso_synthetic") return TaskKind::LassoSynthetic;
    if (s == "linf_synthetic") return TaskKind::LinfSynthetic;
    if (s == "custom_csv") return TaskKind::CustomCsv;
    throw std::invalid_argument("unknown task '" + std::string(s) +
                                "' (valid: lasso_synthetic, linf_synthetic, custom_csv)");
}

/// Linear model y = clip(theta0^T x + N(0, noise_sd^2), [-1, 1]) with
/// x uniform on [-1, 1]^p.
///
/// lasso_synthetic plants ceil(p/4) nonzeros of magnitude 1/k on a random
/// support; linf_synthetic uses a dense theta0 with entries +-1/p. Both keep
/// |theta0^T x| <= 1. theta0 depends only on the task seed.
struct SyntheticTask {
    TaskKind kind = TaskKind::LassoSynthetic;
    std::size_t p = 1;
    Vector theta0;
    double noise_sd = 0.1;

    /// sqrt(p), the bound on ||x||_2 over the box.
    double r2_bound() const { return std::sqrt(static_cast<double>(p)); }
    double y_bound() const { return 1.0; }

    Dataset sample(std::size_t n, CounterRng& rng) const
    {
        dpsub::detail::require(n >= 1, "n must be positive");
        const auto rows = static_cast<Eigen::Index>(n);
        const auto cols = static_cast<Eigen::Index>(p);
        Matrix X(rows, cols);
        Vector y(rows);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) X(i, j) = 2.0 * rng.uniform() - 1.0;
            const double clean = X.row(i).dot(theta0);
            y[i] = std::clamp(clean + noise_sd * rng.normal(), -1.0, 1.0);
        }
        return Dataset(std::move(X), std::move(y));
    }
};

inline SyntheticTask make_task(TaskKind kind, std::size_t p, std::uint64_t seed)
{
    dpsub::detail::require(p >= 1, "p must be positive");
    dpsub::detail::require(kind != TaskKind::CustomCsv, "custom_csv data is read from a file, not generated");
    SyntheticTask task;
    task.kind = kind;
    task.p = p;
    task.theta0 = Vector::Zero(static_cast<Eigen::Index>(p));
    CounterRng rng(seed, "theta0");
    if (kind == TaskKind::LassoSynthetic) {
        const std::size_t k = (p + 3) / 4;
        std::vector<std::size_t> idx(p);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        // Fisher-Yates on the counter stream.
        for (std::size_t i = p - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1));
            std::swap(idx[i], idx[std::min(j, i)]);
        }
        for (std::size_t i = 0; i < k; ++i)
            task.theta0[static_cast<Eigen::Index>(idx[i])] = (rng.uniform() < 0.5 ? -1.0 : 1.0) / static_cast<double>(k);
    } else {
        for (Eigen::Index j = 0; j < task.theta0.size(); ++j)
            task.theta0[j] = (rng.uniform() < 0.5 ? -1.0 : 1.0) / static_cast<double>(p);
    }
    return task;
}

/// n points of a synthetic task; the sample stream is (seed, "gen").
inline Dataset gen_synthetic(TaskKind kind, std::size_t p, std::size_t n, std::uint64_t seed)
{
    CounterRng rng(seed, "gen");
    return make_task(kind, p, seed).sample(n, rng);
}

} // namespace dpsub::bench
