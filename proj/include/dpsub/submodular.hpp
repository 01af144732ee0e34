#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpsub/errors.hpp"
#include "dpsub/rng.hpp"

namespace dpsub {

/// Largest ground set accepted by the exhaustive (2^p) subset loops.
inline constexpr std::size_t kMaxExhaustiveP = 24;
/// Largest ground set for which a custom function is validated exhaustively.
inline constexpr std::size_t kMaxValidatedP = 12;
/// Random (A, B) pairs drawn to validate a custom function above kMaxValidatedP.
inline constexpr std::size_t kValidationSamples = 1000;

/// Ground set V = {0, ..., p-1}. Indices are zero-based throughout the code;
/// reports that talk about coordinates "1..p" add one when printing.
struct GroundSet {
    std::size_t p = 0;

    explicit GroundSet(std::size_t size) : p(size)
    {
        detail::require(size >= 1, "ground set must contain at least one element");
    }

    bool exhaustive_ok() const noexcept { return p <= kMaxExhaustiveP; }
};

enum class FnKind { Cardinality, TruncatedCardinality, ConcaveCardinality, Custom };

/// Nondecreasing submodular set function with F(empty) = 0 and strictly
/// positive singletons. The invariants are checked when the function is built;
/// construction throws std::invalid_argument when one fails.
///
/// Cardinality-based kinds store the table g(0..p) and evaluate F(A) = g(|A|).
/// Custom functions are black-box evaluators over membership masks.
class SubmodularFn {
public:
    using Members = std::vector<bool>;
    using Evaluator = std::function<double(const Members&)>;

    /// F(A) = |A|; its norm is the L1 norm.
    static SubmodularFn cardinality(std::size_t p)
    {
        return from_table(p, FnKind::Cardinality, "cardinality",
                          [](std::size_t k) { return static_cast<double>(k); });
    }

    /// F(A) = min(|A|, k); k = 1 gives the L-infinity norm.
    static SubmodularFn truncated_cardinality(std::size_t p, std::size_t k)
    {
        detail::require(k >= 1, "truncation level must be at least 1");
        auto fn = from_table(p, FnKind::TruncatedCardinality, "truncated:" + std::to_string(k),
                             [k](std::size_t m) { return static_cast<double>(std::min(m, k)); });
        fn.truncation_ = k;
        return fn;
    }

    /// F(A) = g(|A|) for a concave nondecreasing g with g(0) = 0.
    static SubmodularFn concave_cardinality(std::size_t p, const std::function<double(std::size_t)>& g,
                                            std::string name)
    {
        return from_table(p, FnKind::ConcaveCardinality, std::move(name), g);
    }

    static SubmodularFn sqrt_cardinality(std::size_t p)
    {
        return concave_cardinality(p, [](std::size_t k) { return std::sqrt(static_cast<double>(k)); },
                                   "sqrt");
    }

    /// Black-box function. Validated exhaustively for p <= 12 and on
    /// kValidationSamples random pairs (drawn from `validation_seed`) above that.
    static SubmodularFn custom(std::size_t p, Evaluator eval, std::string name = "custom",
                               std::uint64_t validation_seed = 0)
    {
        GroundSet ground(p);
        detail::require(static_cast<bool>(eval), "custom submodular function needs an evaluator");
        SubmodularFn fn(ground, FnKind::Custom, std::move(name));
        fn.eval_ = std::make_shared<const Evaluator>(std::move(eval));
        fn.validate_custom(validation_seed);
        return fn;
    }

    std::size_t p() const noexcept { return ground_.p; }
    const GroundSet& ground() const noexcept { return ground_; }
    FnKind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }
    std::size_t truncation() const noexcept { return truncation_; }
    bool cardinality_based() const noexcept { return kind_ != FnKind::Custom; }

    double operator()(const Members& members) const
    {
        detail::require(members.size() == p(), "membership mask has the wrong length");
        if (cardinality_based())
            return table_[static_cast<std::size_t>(std::count(members.begin(), members.end(), true))];
        return (*eval_)(members);
    }

    /// Evaluate on a bit mask (bit j set <=> j in A). Requires p <= 64.
    double eval_mask(std::uint64_t mask) const
    {
        if (cardinality_based()) return table_[static_cast<std::size_t>(std::popcount(mask))];
        Members m(p());
        for (std::size_t j = 0; j < p(); ++j) m[j] = (mask >> j) & 1U;
        return (*eval_)(m);
    }

    double singleton(std::size_t j) const { return eval_mask_any(j); }

    /// Marginal gains F({j1..jk}) - F({j1..j(k-1)}) along `order`, one per entry.
    std::vector<double> chain_gains(std::span<const std::size_t> order) const
    {
        std::vector<double> gains(order.size());
        if (cardinality_based()) {
            for (std::size_t k = 0; k < order.size(); ++k) gains[k] = table_[k + 1] - table_[k];
            return gains;
        }
        Members m(p(), false);
        double prev = 0.0;
        for (std::size_t k = 0; k < order.size(); ++k) {
            m[order[k]] = true;
            const double cur = (*eval_)(m);
            gains[k] = cur - prev;
            prev = cur;
        }
        return gains;
    }

private:
    SubmodularFn(GroundSet ground, FnKind kind, std::string name)
        : ground_(ground), kind_(kind), name_(std::move(name)) {}

    template <class G>
    static SubmodularFn from_table(std::size_t p, FnKind kind, std::string name, const G& g)
    {
        GroundSet ground(p);
        SubmodularFn fn(ground, kind, std::move(name));
        fn.table_.resize(p + 1);
        for (std::size_t k = 0; k <= p; ++k) fn.table_[k] = g(k);
        fn.validate_table();
        return fn;
    }

    double eval_mask_any(std::size_t j) const
    {
        if (cardinality_based()) return table_[1];
        Members m(p(), false);
        m[j] = true;
        return (*eval_)(m);
    }

    // For F(A) = g(|A|) the four properties reduce to conditions on g, which
    // are exact for every p.
    void validate_table() const
    {
        constexpr double tol = 1e-12;
        for (double v : table_)
            detail::require(std::isfinite(v), "set function " + name_ + " is not finite");
        detail::require(std::abs(table_[0]) <= tol, "set function " + name_ + " has F(empty) != 0");
        detail::require(table_[1] > 0.0, "set function " + name_ + " has a non-positive singleton");
        for (std::size_t k = 1; k <= p(); ++k)
            detail::require(table_[k] + tol >= table_[k - 1], "set function " + name_ + " is not nondecreasing");
        for (std::size_t k = 1; k < p(); ++k)
            detail::require(table_[k + 1] - table_[k] <= table_[k] - table_[k - 1] + tol,
                            "set function " + name_ + " is not submodular");
    }

    void validate_custom(std::uint64_t seed) const
    {
        constexpr double tol = 1e-10;
        const std::size_t n = p();
        detail::require(std::abs((*eval_)(Members(n, false))) <= tol,
                        "set function " + name_ + " has F(empty) != 0");
        for (std::size_t j = 0; j < n; ++j)
            detail::require(eval_mask_any(j) > 0.0, "set function " + name_ + " has a non-positive singleton");

        if (n <= kMaxValidatedP) {
            // Local conditions over the whole lattice: F(A+i) >= F(A) and
            // F(A+i) - F(A) >= F(A+i+j) - F(A+j), which together are equivalent
            // to monotone submodularity.
            const std::uint64_t count = std::uint64_t{1} << n;
            std::vector<double> values(count);
            for (std::uint64_t mask = 0; mask < count; ++mask) {
                values[mask] = eval_mask(mask);
                detail::require(std::isfinite(values[mask]), "set function " + name_ + " is not finite");
            }
            for (std::uint64_t mask = 0; mask < count; ++mask) {
                for (std::size_t i = 0; i < n; ++i) {
                    const std::uint64_t bi = std::uint64_t{1} << i;
                    if (mask & bi) continue;
                    const double gain_i = values[mask | bi] - values[mask];
                    detail::require(gain_i >= -tol, "set function " + name_ + " is not nondecreasing");
                    for (std::size_t j = i + 1; j < n; ++j) {
                        const std::uint64_t bj = std::uint64_t{1} << j;
                        if (mask & bj) continue;
                        const double gain_i_after_j = values[mask | bi | bj] - values[mask | bj];
                        detail::require(gain_i + tol >= gain_i_after_j,
                                        "set function " + name_ + " is not submodular");
                    }
                }
            }
            return;
        }

        CounterRng rng(seed, "submodular_validation");
        for (std::size_t trial = 0; trial < kValidationSamples; ++trial) {
            Members a(n), b(n), cup(n), cap(n);
            for (std::size_t j = 0; j < n; ++j) {
                a[j] = rng.uniform() < 0.5;
                b[j] = rng.uniform() < 0.5;
                cup[j] = a[j] || b[j];
                cap[j] = a[j] && b[j];
            }
            const double fa = (*eval_)(a), fb = (*eval_)(b), fcup = (*eval_)(cup), fcap = (*eval_)(cap);
            detail::require(fa + fb + tol >= fcup + fcap, "set function " + name_ + " is not submodular");
            detail::require(fcap <= fa + tol && fa <= fcup + tol,
                            "set function " + name_ + " is not nondecreasing");
        }
    }

    GroundSet ground_;
    FnKind kind_;
    std::string name_;
    std::size_t truncation_ = 0;
    std::vector<double> table_;
    std::shared_ptr<const Evaluator> eval_;
};

} // namespace dpsub
