#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dpsub/bench/csv.hpp"
#include "dpsub/bench/synthetic.hpp"
#include "dpsub/dp/experiment.hpp"

namespace dpsub::bench {

/// Bad or inconsistent configuration; the CLI maps it to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// "cardinality", "truncated:k" or "sqrt".
inline SubmodularFn make_fn(std::string_view kind, std::size_t p)
{
    if (kind == "cardinality") return SubmodularFn::cardinality(p);
    if (kind == "sqrt") return SubmodularFn::sqrt_cardinality(p);
    if (kind.starts_with("truncated:")) {
        const auto k = parse_double(kind.substr(10));
        if (!k || *k < 1 || *k != std::floor(*k)) throw ConfigError("truncated:k needs an integer k >= 1");
        return SubmodularFn::truncated_cardinality(p, static_cast<std::size_t>(*k));
    }
    throw ConfigError("unknown F '" + std::string(kind) + "' (valid: cardinality, truncated:k, sqrt)");
}

inline std::string to_string(const LambdaRule& r)
{
    switch (r.kind) {
    case LambdaRule::Kind::Auto: return "auto_theorem1";
    case LambdaRule::Kind::Explicit: return "explicit:" + format_double(r.value);
    case LambdaRule::Kind::PerN: return "per_n:" + format_double(r.value);
    }
    return "unknown";
}

/// auto_theorem1 | explicit:<lambda> | per_n:<kappa> (lambda = kappa n).
inline LambdaRule parse_lambda_rule(std::string_view s)
{
    if (s == "auto_theorem1") return {};
    auto valued = [&](std::string_view prefix, LambdaRule::Kind kind) -> std::optional<LambdaRule> {
        if (!s.starts_with(prefix)) return std::nullopt;
        const auto v = parse_double(s.substr(prefix.size()));
        if (!v || !(*v > 0.0) || !std::isfinite(*v))
            throw ConfigError("lambda '" + std::string(s) + "' needs a positive finite value");
        return LambdaRule{kind, *v};
    };
    if (auto r = valued("explicit:", LambdaRule::Kind::Explicit)) return *r;
    if (auto r = valued("per_n:", LambdaRule::Kind::PerN)) return *r;
    throw ConfigError("unknown lambda '" + std::string(s) + "' (valid: auto_theorem1, explicit:<value>, per_n:<kappa>)");
}

struct ExperimentConfig {
    // [task]
    TaskKind task = TaskKind::LassoSynthetic;
    std::size_t p = 1;      ///< for custom_csv, taken from the file when 0
    std::string path;       ///< custom_csv only
    // [model]
    LossKind loss = LossKind::Squared;
    std::string F = "cardinality";
    LambdaRule lambda;
    double B = 1.0;
    // [privacy]
    double epsilon = 1.0;
    double delta = 1e-6;
    Mechanism mechanism = Mechanism::OutputGauss;
    // [run]
    std::vector<std::size_t> n_grid;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    std::size_t holdout = 100000;
    std::size_t width_samples = 10000;
    bool timing = false;

    bool operator==(const ExperimentConfig& o) const
    {
        return task == o.task && p == o.p && path == o.path && loss == o.loss && F == o.F &&
               lambda.kind == o.lambda.kind && lambda.value == o.lambda.value && B == o.B && epsilon == o.epsilon &&
               delta == o.delta && mechanism == o.mechanism && n_grid == o.n_grid && trials == o.trials &&
               seed == o.seed && alpha == o.alpha && holdout == o.holdout && width_samples == o.width_samples &&
               timing == o.timing;
    }

    void validate() const
    {
        auto need = [](bool c, const std::string& m) {
            if (!c) throw ConfigError(m);
        };
        need(task == TaskKind::CustomCsv || p >= 1, "task.p must be at least 1");
        need(task != TaskKind::CustomCsv || !path.empty(), "custom_csv needs task.path");
        need(!n_grid.empty(), "run.n_grid must be nonempty");
        for (auto n : n_grid) need(n >= 1, "every entry of run.n_grid must be positive");
        need(trials >= 1, "run.trials must be at least 1");
        need(alpha > 0.0 && alpha < 1.0, "run.alpha must lie in (0, 1)");
        need(B > 0.0 && std::isfinite(B), "model.B must be positive");
        need(width_samples >= 2, "run.width_samples must be at least 2");
        try {
            if (mechanism != Mechanism::None)
                PrivacyParams{epsilon, delta}.validate(mechanism == Mechanism::OutputGamma);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("privacy: ") + e.what());
        }
        // F is checked against a dummy p so a typo fails before any data is read.
        make_fn(F, std::max<std::size_t>(p, 1));
    }
};

namespace detail {

inline std::string join_sizes(const std::vector<std::size_t>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

inline std::uint64_t parse_unsigned(const std::string& key, std::string_view s)
{
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError(key + ": expected a non-negative integer, got '" + std::string(s) + "'");
    return v;
}

inline double parse_real(const std::string& key, std::string_view s)
{
    const auto v = parse_double(s);
    if (!v || std::isnan(*v)) throw ConfigError(key + ": expected a number, got '" + std::string(s) + "'");
    return *v;
}

inline bool parse_bool(const std::string& key, std::string_view s)
{
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + std::string(s) + "'");
}

} // namespace detail

/// Canonical INI text; parse_config(to_ini(c)) == c.
inline std::string to_ini(const ExperimentConfig& c)
{
    std::ostringstream os;
    os << "[task]\n";
    os << "kind = " << to_string(c.task) << '\n';
    os << "p = " << c.p << '\n';
    if (!c.path.empty()) os << "path = " << c.path << '\n';
    os << "\n[model]\n";
    os << "loss = " << to_string(c.loss) << '\n';
    os << "F = " << c.F << '\n';
    os << "lambda = " << to_string(c.lambda) << '\n';
    os << "B = " << format_double(c.B) << '\n';
    os << "\n[privacy]\n";
    os << "epsilon = " << format_double(c.epsilon) << '\n';
    os << "delta = " << format_double(c.delta) << '\n';
    os << "mechanism = " << to_string(c.mechanism) << '\n';
    os << "\n[run]\n";
    os << "n_grid = " << detail::join_sizes(c.n_grid) << '\n';
    os << "trials = " << c.trials << '\n';
    os << "seed = " << c.seed << '\n';
    os << "alpha = " << format_double(c.alpha) << '\n';
    os << "holdout = " << c.holdout << '\n';
    os << "width_samples = " << c.width_samples << '\n';
    os << "timing = " << (c.timing ? "true" : "false") << '\n';
    return os.str();
}

/// Parses INI text with sections [task], [model], [privacy], [run]. Unknown
/// sections or keys are errors, as are missing task.kind and run.n_grid.
inline ExperimentConfig parse_config(std::istream& is)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    static const std::map<std::string, std::set<std::string>> allowed = {
        {"task", {"kind", "p", "path"}},
        {"model", {"loss", "F", "lambda", "B"}},
        {"privacy", {"epsilon", "delta", "mechanism"}},
        {"run", {"n_grid", "trials", "seed", "alpha", "holdout", "width_samples", "timing"}},
    };
    for (const auto& [section, body] : tree) {
        const auto it = allowed.find(section);
        if (it == allowed.end())
            throw ConfigError("config: unknown section [" + section + "] (valid: task, model, privacy, run)");
        if (!body.data().empty()) throw ConfigError("config: key '" + section + "' outside any section");
        for (const auto& [key, _] : body)
            if (!it->second.contains(key)) throw ConfigError("config: unknown key " + section + "." + key);
    }

    auto get = [&](const std::string& key) { return tree.get_optional<std::string>(pt::ptree::path_type(key, '.')); };

    ExperimentConfig c;
    const auto kind = get("task.kind");
    if (!kind) throw ConfigError("config: task.kind is required");
    try {
        c.task = parse_task_kind(*kind);
        if (auto v = get("model.loss")) c.loss = parse_loss_kind(*v);
        if (auto v = get("privacy.mechanism")) c.mechanism = parse_mechanism(*v);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (auto v = get("task.p")) c.p = static_cast<std::size_t>(detail::parse_unsigned("task.p", *v));
    else if (c.task != TaskKind::CustomCsv) throw ConfigError("config: task.p is required");
    else c.p = 0;
    if (auto v = get("task.path")) c.path = *v;
    if (auto v = get("model.F")) c.F = *v;
    if (auto v = get("model.lambda")) c.lambda = parse_lambda_rule(*v);
    if (auto v = get("model.B")) c.B = detail::parse_real("model.B", *v);
    if (auto v = get("privacy.epsilon")) c.epsilon = detail::parse_real("privacy.epsilon", *v);
    if (auto v = get("privacy.delta")) c.delta = detail::parse_real("privacy.delta", *v);

    const auto grid = get("run.n_grid");
    if (!grid) throw ConfigError("config: run.n_grid is required");
    for (auto cell : split(*grid, ',')) {
        while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
        while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
        c.n_grid.push_back(static_cast<std::size_t>(detail::parse_unsigned("run.n_grid", cell)));
    }
    if (auto v = get("run.trials")) c.trials = static_cast<std::size_t>(detail::parse_unsigned("run.trials", *v));
    if (auto v = get("run.seed")) c.seed = detail::parse_unsigned("run.seed", *v);
    if (auto v = get("run.alpha")) c.alpha = detail::parse_real("run.alpha", *v);
    if (auto v = get("run.holdout")) c.holdout = static_cast<std::size_t>(detail::parse_unsigned("run.holdout", *v));
    if (auto v = get("run.width_samples"))
        c.width_samples = static_cast<std::size_t>(detail::parse_unsigned("run.width_samples", *v));
    if (auto v = get("run.timing")) c.timing = detail::parse_bool("run.timing", *v);

    c.validate();
    return c;
}

inline ExperimentConfig parse_config(const std::string& text_or_path, bool is_path)
{
    if (!is_path) {
        std::istringstream is(text_or_path);
        return parse_config(is);
    }
    std::ifstream is(text_or_path, std::ios::binary);
    if (!is) throw ConfigError("cannot open config '" + text_or_path + "'");
    return parse_config(is);
}

inline ExperimentConfig load_config(const std::string& path) { return parse_config(path, true); }

} // namespace dpsub::bench
