#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dpsub/erm/dataset.hpp"
#include "dpsub/errors.hpp"

namespace dpsub {

enum class LossKind { Squared, Logistic, Hinge };

inline std::string to_string(LossKind k)
{
    switch (k) {
    case LossKind::Squared: return "squared";
    case LossKind::Logistic: return "logistic";
    case LossKind::Hinge: return "hinge";
    }
    return "unknown";
}

inline LossKind parse_loss_kind(std::string_view s)
{
    if (s == "squared") return LossKind::Squared;
    if (s == "logistic") return LossKind::Logistic;
    if (s == "hinge") return LossKind::Hinge;
    throw std::invalid_argument("unknown loss '" + std::string(s) + "' (valid: squared, logistic, hinge)");
}

// Per-point losses as functions of the prediction u = theta^T x.
//   squared   (u - y)^2
//   logistic  log(1 + exp(-y u))
//   hinge     max(0, 1 - y u)

inline double point_loss(LossKind k, double u, double y)
{
    switch (k) {
    case LossKind::Squared: return (u - y) * (u - y);
    case LossKind::Logistic: {
        const double m = -y * u;
        return m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    }
    case LossKind::Hinge: return std::max(0.0, 1.0 - y * u);
    }
    return 0.0;
}

/// d/du of the loss; for the hinge the subgradient 0 is used at the kink.
inline double point_dloss(LossKind k, double u, double y)
{
    switch (k) {
    case LossKind::Squared: return 2.0 * (u - y);
    case LossKind::Logistic: {
        const double m = y * u;
        // -y * sigmoid(-m), written to avoid overflow
        return m >= 0 ? -y * std::exp(-m) / (1.0 + std::exp(-m)) : -y / (1.0 + std::exp(m));
    }
    case LossKind::Hinge: return 1.0 - y * u > 0 ? -y : 0.0;
    }
    return 0.0;
}

inline double point_d2loss(LossKind k, double u, double y)
{
    switch (k) {
    case LossKind::Squared: return 2.0;
    case LossKind::Logistic: {
        const double e = std::exp(-std::abs(y * u));
        return y * y * e / ((1.0 + e) * (1.0 + e));
    }
    case LossKind::Hinge: return 0.0;
    }
    return 0.0;
}

/// A GLM loss with the constants the privacy calibrations consume.
///
/// The squared loss is only Lipschitz on a bounded domain; its constant is
/// taken over ||theta||_2 <= domain_bound: L = 2 R2 (B R2 + max|y|).
struct LossModel {
    LossKind kind = LossKind::Squared;
    double lipschitz = 0.0;        ///< L, w.r.t. theta in the L2 norm
    double strong_convexity = 0.0; ///< per-point; 0 for all three GLM losses
    double smoothness = std::numeric_limits<double>::infinity(); ///< c2
    double domain_bound = 1.0;     ///< B
    double r2 = 0.0;               ///< R2 the constants were derived from

    static LossModel make(LossKind kind, double r2, double y_abs_max, double domain_bound = 1.0)
    {
        detail::require(r2 > 0.0 && std::isfinite(r2), "loss constants need a positive finite R2");
        detail::require(domain_bound > 0.0, "domain bound must be positive");
        LossModel m;
        m.kind = kind;
        m.domain_bound = domain_bound;
        m.r2 = r2;
        switch (kind) {
        case LossKind::Squared:
            m.lipschitz = 2.0 * r2 * (domain_bound * r2 + y_abs_max);
            m.smoothness = 2.0 * r2 * r2;
            break;
        case LossKind::Logistic:
            m.lipschitz = y_abs_max * r2;
            m.smoothness = y_abs_max * y_abs_max * r2 * r2 / 4.0;
            break;
        case LossKind::Hinge:
            m.lipschitz = y_abs_max * r2;
            break;
        }
        detail::require(m.lipschitz > 0.0, "loss has a zero Lipschitz constant on this data");
        return m;
    }

    static LossModel for_data(LossKind kind, const Dataset& data, double domain_bound = 1.0)
    {
        return make(kind, data.R2(), data.y_abs_max(), domain_bound);
    }
};

} // namespace dpsub
