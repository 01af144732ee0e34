#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpsub/bench/config.hpp"
#include "dpsub/bench/csv.hpp"
#include "dpsub/bench/synthetic.hpp"
#include "dpsub/dp/experiment.hpp"
#include "dpsub/stats.hpp"

namespace dpsub::bench {

inline constexpr int kSchemaVersion = 1;

inline constexpr std::string_view kResultsHeader =
    "n,trial,mechanism,excess_empirical_risk,excess_population_risk,runtime_ms,noise_scale,lambda,G_width,T,seed";

/// Experiment inputs resolved from a config: the sampler, the bounds used for
/// calibration and the norm.
struct ResolvedTask {
    ExperimentSpec spec;
    std::size_t p = 0;
    std::optional<Vector> theta0; ///< planted parameter of synthetic tasks
};

inline ResolvedTask resolve(const ExperimentConfig& cfg)
{
    cfg.validate();
    ResolvedTask out;
    ExperimentSpec& spec = out.spec;
    if (cfg.task == TaskKind::CustomCsv) {
        // Points are drawn with replacement from the file.
        auto data = std::make_shared<const Dataset>(read_dataset_csv(cfg.path));
        if (cfg.p != 0 && cfg.p != data->p())
            throw ConfigError("task.p = " + std::to_string(cfg.p) + " but '" + cfg.path + "' has " +
                              std::to_string(data->p()) + " features");
        out.p = data->p();
        spec.r2_bound = data->R2();
        spec.y_bound = data->y_abs_max();
        spec.sampler = [data](std::size_t n, CounterRng& rng) {
            const auto N = data->n();
            Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(data->p()));
            Eigen::VectorXd y(static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < n; ++i) {
                const auto k = std::min(static_cast<std::size_t>(rng.uniform() * static_cast<double>(N)), N - 1);
                X.row(static_cast<Eigen::Index>(i)) = data->X().row(static_cast<Eigen::Index>(k));
                y[static_cast<Eigen::Index>(i)] = data->y()[static_cast<Eigen::Index>(k)];
            }
            return Dataset(std::move(X), std::move(y));
        };
    } else {
        const SyntheticTask task = make_task(cfg.task, cfg.p, cfg.seed);
        out.p = cfg.p;
        out.theta0 = task.theta0;
        spec.r2_bound = task.r2_bound();
        spec.y_bound = task.y_bound();
        spec.sampler = [task](std::size_t n, CounterRng& rng) { return task.sample(n, rng); };
    }
    spec.loss = cfg.loss;
    spec.domain_bound = cfg.B;
    spec.F = make_fn(cfg.F, out.p);
    spec.lambda_rule = cfg.lambda;
    spec.privacy = {cfg.epsilon, cfg.delta};
    spec.mechanism = cfg.mechanism;
    spec.n_grid = cfg.n_grid;
    spec.trials = cfg.trials;
    spec.seed = cfg.seed;
    spec.holdout = cfg.holdout;
    spec.width_samples = cfg.width_samples;
    spec.timing = cfg.timing;
    return out;
}

inline void write_results_csv(std::ostream& os, const std::vector<ExperimentRow>& rows)
{
    os << kResultsHeader << '\n';
    for (const auto& r : rows) {
        os << r.n << ',' << r.trial << ',' << to_string(r.mechanism) << ',' << format_double(r.excess_empirical_risk)
           << ',' << format_double(r.excess_population_risk) << ','
           << (r.runtime_ms ? format_double(*r.runtime_ms) : "NA") << ',' << format_double(r.noise_scale) << ','
           << format_double(r.lambda) << ',' << format_double(r.G_width) << ','
           << (r.T ? std::to_string(*r.T) : "NA") << ',' << r.seed << '\n';
    }
}

inline nlohmann::ordered_json config_json(const ExperimentConfig& c)
{
    nlohmann::ordered_json j;
    j["task"] = {{"kind", to_string(c.task)}, {"p", c.p}, {"path", c.path}};
    j["model"] = {{"loss", to_string(c.loss)}, {"F", c.F}, {"lambda", to_string(c.lambda)}, {"B", c.B}};
    j["privacy"] = {{"epsilon", c.epsilon}, {"delta", c.delta}, {"mechanism", to_string(c.mechanism)}};
    j["run"] = {{"n_grid", c.n_grid},   {"trials", c.trials},   {"seed", c.seed},
                {"alpha", c.alpha},     {"holdout", c.holdout}, {"width_samples", c.width_samples},
                {"timing", c.timing}};
    return j;
}

/// Inverse of config_json.
inline ExperimentConfig config_from_json(const nlohmann::ordered_json& j)
{
    try {
        ExperimentConfig c;
        c.task = parse_task_kind(j.at("task").at("kind").get<std::string>());
        c.p = j.at("task").at("p").get<std::size_t>();
        c.path = j.at("task").at("path").get<std::string>();
        c.loss = parse_loss_kind(j.at("model").at("loss").get<std::string>());
        c.F = j.at("model").at("F").get<std::string>();
        c.lambda = parse_lambda_rule(j.at("model").at("lambda").get<std::string>());
        c.B = j.at("model").at("B").get<double>();
        c.epsilon = j.at("privacy").at("epsilon").get<double>();
        c.delta = j.at("privacy").at("delta").get<double>();
        c.mechanism = parse_mechanism(j.at("privacy").at("mechanism").get<std::string>());
        c.n_grid = j.at("run").at("n_grid").get<std::vector<std::size_t>>();
        c.trials = j.at("run").at("trials").get<std::size_t>();
        c.seed = j.at("run").at("seed").get<std::uint64_t>();
        c.alpha = j.at("run").at("alpha").get<double>();
        c.holdout = j.at("run").at("holdout").get<std::size_t>();
        c.width_samples = j.at("run").at("width_samples").get<std::size_t>();
        c.timing = j.at("run").at("timing").get<bool>();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config echo: ") + e.what());
    }
}

namespace detail {

inline nlohmann::ordered_json summary_json(const SampleSummary& s)
{
    return {{"mean", s.mean}, {"std_error", s.std_error}, {"count", s.count}};
}

inline nlohmann::ordered_json fit_json(const LogLogFit& f)
{
    return {{"slope", f.slope},           {"intercept", f.intercept}, {"slope_std_error", f.slope_std_error},
            {"ci_low", f.ci_low},         {"ci_high", f.ci_high},     {"confidence", f.confidence},
            {"points", f.points}};
}

} // namespace detail

/// Per-n means and standard errors plus log-log slope fits of every risk
/// column against n, with intervals at confidence 1 - alpha.
inline nlohmann::ordered_json make_summary(const ExperimentConfig& cfg, const ResolvedTask& task,
                                           const std::vector<ExperimentRow>& rows)
{
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["config"] = config_json(cfg);
    j["p"] = task.p;
    if (!rows.empty()) j["G_width"] = rows.front().G_width;

    const bool fw = cfg.mechanism == Mechanism::PrivateFw;
    std::vector<double> ns, emp, pop, dual;
    nlohmann::ordered_json per_n = nlohmann::ordered_json::array();
    for (const auto n : cfg.n_grid) {
        std::vector<double> e, q, d;
        const ExperimentRow* first = nullptr;
        for (const auto& r : rows)
            if (r.n == n) {
                if (!first) first = &r;
                e.push_back(r.excess_empirical_risk);
                q.push_back(r.excess_population_risk);
                d.push_back(r.dual_suboptimality);
            }
        if (!first) continue;
        nlohmann::ordered_json entry;
        entry["n"] = n;
        entry["lambda"] = first->lambda;
        entry["noise_scale"] = first->noise_scale;
        if (first->T) entry["T"] = *first->T;
        const auto se = summarize(e), sq = summarize(q);
        entry["excess_empirical_risk"] = detail::summary_json(se);
        entry["excess_population_risk"] = detail::summary_json(sq);
        ns.push_back(static_cast<double>(n));
        emp.push_back(se.mean);
        pop.push_back(sq.mean);
        if (fw) {
            const auto sd = summarize(d);
            entry["dual_suboptimality"] = detail::summary_json(sd);
            dual.push_back(sd.mean);
        }
        per_n.push_back(std::move(entry));
    }
    j["per_n"] = std::move(per_n);

    const double conf = 1.0 - cfg.alpha;
    nlohmann::ordered_json fits;
    fits["excess_empirical_risk"] = detail::fit_json(fit_loglog(ns, emp, conf));
    fits["excess_population_risk"] = detail::fit_json(fit_loglog(ns, pop, conf));
    if (fw) fits["dual_suboptimality"] = detail::fit_json(fit_loglog(ns, dual, conf));
    j["fits"] = std::move(fits);
    return j;
}

struct RunOutput {
    std::vector<ExperimentRow> rows;
    nlohmann::ordered_json summary;
};

inline RunOutput run_experiment(const ExperimentConfig& cfg)
{
    const ResolvedTask task = resolve(cfg);
    RunOutput out;
    out.rows = excess_risk_experiment(task.spec);
    out.summary = make_summary(cfg, task, out.rows);
    return out;
}

/// Writes <dir>/results.csv and <dir>/summary.json, creating dir if needed.
inline RunOutput run_to_dir(const ExperimentConfig& cfg, const std::filesystem::path& dir)
{
    auto out = run_experiment(cfg);
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "results.csv", std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + (dir / "results.csv").string());
        write_results_csv(os, out.rows);
    }
    {
        std::ofstream os(dir / "summary.json", std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + (dir / "summary.json").string());
        os << out.summary.dump(2) << '\n';
    }
    return out;
}

} // namespace dpsub::bench
