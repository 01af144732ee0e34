#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpsub/bench/config.hpp"
#include "dpsub/oracles.hpp"
#include "dpsub/polytope.hpp"
#include "dpsub/width.hpp"

namespace dpsub::bench {

inline constexpr std::size_t kIdentityVectors = 1000;
inline constexpr std::size_t kDualExamples = 3;

struct NormReport {
    std::string f;
    std::size_t p = 0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    double l1_max_diff = 0.0; ///< max |Omega(theta) - ||theta||_1| over the identity vectors
    double linf_max_diff = 0.0;
    std::vector<std::pair<Vector, double>> dual_examples; ///< (s, dual norm of s)
    WidthEstimate width;
    std::optional<std::size_t> vertex_count; ///< p <= kMaxEnumerateP only
    std::optional<double> diameter;

    /// "L1", "Linf" or empty when neither identity holds exactly.
    std::string identity() const
    {
        if (l1_max_diff == 0.0) return "L1";
        if (linf_max_diff == 0.0) return "Linf";
        return {};
    }
};

/// Norm catalog entry for F: identity checks against L1 and L-infinity,
/// a few dual norms, the Gaussian width with a 95% interval and, for small
/// p, the vertex count and diameter of |P|(F). Dual norms are exhaustive
/// and need p <= 24.
inline NormReport inspect_norm(const std::string& f_kind, std::size_t p, std::size_t samples, std::uint64_t seed)
{
    dpsub::detail::require(p >= 1, "p must be at least 1");
    const SubmodularFn F = make_fn(f_kind, p);
    dpsub::detail::require_capability(p <= kMaxExhaustiveP, "inspect-norm computes exact dual norms, capped at p <= " +
                                                         std::to_string(kMaxExhaustiveP) + " (got p = " +
                                                         std::to_string(p) + ")");
    NormReport r;
    r.f = f_kind;
    r.p = p;
    r.samples = samples;
    r.seed = seed;

    for (std::size_t k = 0; k < kIdentityVectors; ++k) {
        CounterRng rng(seed, "inspect_identity", {k});
        Vector theta(static_cast<Eigen::Index>(p));
        for (Eigen::Index j = 0; j < theta.size(); ++j) theta[j] = rng.normal();
        const double om = omega_inf(F, theta);
        r.l1_max_diff = std::max(r.l1_max_diff, std::abs(om - oracles::l1_norm_sorted(theta)));
        r.linf_max_diff = std::max(r.linf_max_diff, std::abs(om - oracles::linf_norm(theta)));
    }

    for (std::size_t k = 0; k < kDualExamples; ++k) {
        Vector s(static_cast<Eigen::Index>(p));
        if (k == 0) {
            s.setZero();
            s[0] = 1.0;
        } else if (k == 1) {
            s.setOnes();
        } else {
            CounterRng rng(seed, "inspect_dual", {k});
            for (Eigen::Index j = 0; j < s.size(); ++j) s[j] = rng.normal();
        }
        r.dual_examples.emplace_back(s, dual_norm_bruteforce(F, s));
    }

    r.width = gaussian_width_mc(F, samples, seed);
    if (p <= kMaxEnumerateP) {
        const auto verts = enumerate_vertices(F);
        r.vertex_count = verts.size();
        r.diameter = diameter(verts);
    }
    return r;
}

inline std::string format_vector(const Vector& v)
{
    std::string out = "(";
    for (Eigen::Index j = 0; j < v.size(); ++j) out += (j ? ", " : "") + format_double(v[j]);
    return out + ")";
}

inline std::string to_text(const NormReport& r)
{
    std::ostringstream os;
    const double half = 1.959963984540054 * r.width.std_error;
    os << "F = " << r.f << ", p = " << r.p << '\n';
    const auto id = r.identity();
    if (id == "L1") os << "  Omega_inf = L1 (exact on " << kIdentityVectors << " random vectors)\n";
    else if (id == "Linf") os << "  Omega_inf = Linf (exact on " << kIdentityVectors << " random vectors)\n";
    else
        os << "  Omega_inf is neither L1 nor Linf (max |diff| " << format_double(r.l1_max_diff) << " and "
           << format_double(r.linf_max_diff) << ")\n";
    os << "  dual norm examples:\n";
    for (const auto& [s, d] : r.dual_examples) os << "    s = " << format_vector(s) << "  ->  " << format_double(d) << '\n';
    os << "  Gaussian width = " << format_double(r.width.mean) << " +- " << format_double(half) << " (95%, "
       << r.width.num_samples << " samples, seed " << r.seed << ")\n";
    if (r.vertex_count)
        os << "  vertices = " << *r.vertex_count << " (origin included), diameter = " << format_double(*r.diameter)
           << '\n';
    else
        os << "  vertices: skipped, enumeration is capped at p <= " << kMaxEnumerateP << '\n';
    return os.str();
}

inline nlohmann::ordered_json to_json(const NormReport& r)
{
    nlohmann::ordered_json j;
    j["f"] = r.f;
    j["p"] = r.p;
    j["seed"] = r.seed;
    const auto id = r.identity();
    j["identity"] = id.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(id);
    j["l1_max_abs_diff"] = r.l1_max_diff;
    j["linf_max_abs_diff"] = r.linf_max_diff;
    auto ex = nlohmann::ordered_json::array();
    for (const auto& [s, d] : r.dual_examples)
        ex.push_back({{"s", std::vector<double>(s.data(), s.data() + s.size())}, {"dual_norm", d}});
    j["dual_norm_examples"] = std::move(ex);
    const double half = 1.959963984540054 * r.width.std_error;
    j["width"] = {{"mean", r.width.mean},
                  {"std_error", r.width.std_error},
                  {"ci_low", r.width.mean - half},
                  {"ci_high", r.width.mean + half},
                  {"samples", r.width.num_samples}};
    j["vertex_count"] = r.vertex_count ? nlohmann::ordered_json(*r.vertex_count) : nlohmann::ordered_json(nullptr);
    j["diameter"] = r.diameter ? nlohmann::ordered_json(*r.diameter) : nlohmann::ordered_json(nullptr);
    return j;
}

} // namespace dpsub::bench
