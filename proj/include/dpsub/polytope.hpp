#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dpsub/errors.hpp"
#include "dpsub/submodular.hpp"

namespace dpsub {

using Vector = Eigen::VectorXd;

/// Largest p for which the signed greedy vertices are enumerated (p! 2^p work).
inline constexpr std::size_t kMaxEnumerateP = 8;
/// Membership slack used by polytope checks.
inline constexpr double kMembershipTol = 1e-9;
/// Two enumerated vertices closer than this (coordinate-wise) are merged.
inline constexpr double kDedupTol = 1e-12;

/// A maximizer of w's linear form over |P|(F), produced by the greedy algorithm.
struct GreedyVertex {
    Vector s;
    std::vector<std::size_t> ordering; ///< coordinates by |w| descending
    std::vector<int> signs;            ///< sign of w per coordinate, +1 at zero
    double value = 0.0;                ///< w^T s = f(|w|)
};

namespace detail {

inline void check_weights(const SubmodularFn& F, const Vector& w)
{
    require(static_cast<std::size_t>(w.size()) == F.p(), "weight vector length does not match ground set");
    require(w.allFinite(), "weight vector must be finite");
}

/// Indices sorted by key descending; ties keep ascending index order.
template <class Key>
std::vector<std::size_t> descending_order(std::size_t p, Key key)
{
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return key(a) > key(b); });
    return order;
}

inline void require_exhaustive(const SubmodularFn& F, const char* what)
{
    require_capability(F.p() <= kMaxExhaustiveP,
                       std::string(what) + " enumerates all 2^p subsets and is capped at p <= " +
                           std::to_string(kMaxExhaustiveP) + " (got p = " + std::to_string(F.p()) +
                           "); use gaussian_width_mc or sampled checks for larger ground sets");
}

/// max over nonempty A of (|s|(A) - F(A)), or of |s|(A) / F(A) when `ratio`.
inline double subset_scan(const SubmodularFn& F, const Vector& s, bool ratio)
{
    const std::size_t p = F.p();
    const std::uint64_t count = std::uint64_t{1} << p;
    double best = -std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 1; mask < count; ++mask) {
        double mass = 0.0;
        for (std::uint64_t bits = mask; bits; bits &= bits - 1)
            mass += std::abs(s[std::countr_zero(bits)]);
        const double f = F.eval_mask(mask);
        best = std::max(best, ratio ? mass / f : mass - f);
    }
    return best;
}

} // namespace detail

/// Lovasz extension f(w) = sum_k w_{j_k} (F({j_1..j_k}) - F({j_1..j_{k-1}})),
/// with j sorting w in descending order (ties by ascending index).
inline double lovasz_extension(const SubmodularFn& F, const Vector& w)
{
    detail::check_weights(F, w);
    const auto order = detail::descending_order(F.p(), [&](std::size_t j) { return w[j]; });
    const auto gains = F.chain_gains(order);
    double acc = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) acc += w[order[k]] * gains[k];
    return acc;
}

/// The sparsity-inducing norm f(|theta|).
inline double omega_inf(const SubmodularFn& F, const Vector& theta)
{
    detail::check_weights(F, theta);
    return lovasz_extension(F, theta.cwiseAbs());
}

/// Greedy linear maximization over the symmetric submodular polyhedron.
/// The returned value is computed in the same order as omega_inf, so the two
/// agree bit for bit.
inline GreedyVertex polytope_linmax(const SubmodularFn& F, const Vector& w)
{
    detail::check_weights(F, w);
    const std::size_t p = F.p();
    GreedyVertex out;
    out.ordering = detail::descending_order(p, [&](std::size_t j) { return std::abs(w[j]); });
    const auto gains = F.chain_gains(out.ordering);
    out.s = Vector::Zero(static_cast<Eigen::Index>(p));
    out.signs.assign(p, 1);
    double acc = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
        const std::size_t j = out.ordering[k];
        const int sign = w[j] < 0 ? -1 : 1;
        out.signs[j] = sign;
        out.s[j] = sign * gains[k];
        acc += std::abs(w[j]) * gains[k];
    }
    out.value = acc;
    return out;
}

/// Dual norm max_{A nonempty} |s|(A) / F(A), by exhaustive search (p <= 24).
inline double dual_norm_bruteforce(const SubmodularFn& F, const Vector& s)
{
    detail::check_weights(F, s);
    detail::require_exhaustive(F, "dual_norm_bruteforce");
    return detail::subset_scan(F, s, true);
}

/// Largest constraint violation max_A (|s|(A) - F(A)); <= 0 inside |P|(F).
inline double polytope_max_violation(const SubmodularFn& F, const Vector& s)
{
    detail::check_weights(F, s);
    detail::require_exhaustive(F, "polytope_membership");
    return detail::subset_scan(F, s, false);
}

inline bool polytope_membership(const SubmodularFn& F, const Vector& s, double tol = kMembershipTol)
{
    return polytope_max_violation(F, s) <= tol;
}

/// All signed greedy prefix vertices of |P|(F) (deduplicated, lexicographically
/// sorted). Includes the origin (prefix length 0). Their convex hull is |P|(F).
inline std::vector<Vector> enumerate_vertices(const SubmodularFn& F)
{
    const std::size_t p = F.p();
    detail::require_capability(p <= kMaxEnumerateP,
                               "enumerate_vertices costs p! 2^p and is capped at p <= " +
                                   std::to_string(kMaxEnumerateP) + " (got p = " + std::to_string(p) + ")");

    // Deduplicate on a 1e-12 lattice; values are bounded by F(V), far below
    // the int64 range at that resolution for any sensible F.
    using Key = std::vector<std::int64_t>;
    std::map<Key, Vector> found;
    auto key_of = [](const Vector& v) {
        Key k(static_cast<std::size_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) k[static_cast<std::size_t>(i)] = std::llround(v[i] / kDedupTol);
        return k;
    };

    std::vector<bool> used(p, false);
    SubmodularFn::Members members(p, false);
    Vector current = Vector::Zero(static_cast<Eigen::Index>(p));

    // Depth-first over ordered signed prefixes. The gain of appending j only
    // depends on the set already placed, so each node emits one vertex.
    auto visit = [&](auto&& self, double f_prefix) -> void {
        found.try_emplace(key_of(current), current);
        for (std::size_t j = 0; j < p; ++j) {
            if (used[j]) continue;
            used[j] = true;
            members[j] = true;
            const double f_next = F(members);
            const double gain = f_next - f_prefix;
            for (int sign : {1, -1}) {
                if (sign < 0 && gain == 0.0) break;
                current[static_cast<Eigen::Index>(j)] = sign * gain;
                self(self, f_next);
            }
            current[static_cast<Eigen::Index>(j)] = 0.0;
            members[j] = false;
            used[j] = false;
        }
    };
    visit(visit, 0.0);

    std::vector<Vector> out;
    out.reserve(found.size());
    for (auto& [key, v] : found) out.push_back(std::move(v));
    return out;
}

/// Euclidean diameter of a finite point set.
inline double diameter(const std::vector<Vector>& points)
{
    double best = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            best = std::max(best, (points[i] - points[j]).squaredNorm());
    return std::sqrt(best);
}

} // namespace dpsub
