// dpsub: experiment runner, norm inspector and synthetic data generator.
//
// Exit codes: 0 ok, 2 bad config or arguments, 3 numeric failure.

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dpsub/bench/config.hpp"
#include "dpsub/bench/csv.hpp"
#include "dpsub/bench/inspect.hpp"
#include "dpsub/bench/runner.hpp"
#include "dpsub/bench/synthetic.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

int cmd_run(const std::string& config_path, const std::string& out_dir)
{
    const auto cfg = dpsub::bench::load_config(config_path);
    const auto out = dpsub::bench::run_to_dir(cfg, out_dir);
    std::cout << "wrote " << out.rows.size() << " rows to " << out_dir << "/results.csv\n";
    const auto& fit = out.summary["fits"]["excess_empirical_risk"];
    if (fit["slope"].is_number() && std::isfinite(fit["slope"].get<double>()))
        std::cout << "excess empirical risk slope " << fit["slope"].get<double>() << '\n';
    return kExitOk;
}

int cmd_inspect(const std::string& f, std::size_t p, std::size_t samples, std::uint64_t seed,
                const std::string& json_path)
{
    const auto r = dpsub::bench::inspect_norm(f, p, samples, seed);
    std::cout << dpsub::bench::to_text(r);
    if (!json_path.empty()) {
        const auto text = dpsub::bench::to_json(r).dump(2) + "\n";
        if (json_path == "-") {
            std::cout << text;
        } else {
            std::ofstream os(json_path, std::ios::binary);
            if (!os) throw std::runtime_error("cannot write " + json_path);
            os << text;
        }
    }
    return kExitOk;
}

int cmd_gen(const std::string& task, std::size_t p, std::size_t n, std::uint64_t seed, const std::string& out)
{
    const auto kind = dpsub::bench::parse_task_kind(task);
    dpsub::bench::write_dataset_csv(out, dpsub::bench::gen_synthetic(kind, p, n, seed));
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Private empirical risk minimization with submodular norms"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    auto* run = app.add_subcommand("run", "run an experiment config, writing results.csv and summary.json");
    run->add_option("--config", config_path, "INI config file")->required();
    run->add_option("--out", out_dir, "output directory")->required();

    std::string f_kind, json_path;
    std::size_t p = 0, samples = 10000;
    std::uint64_t seed = 0;
    auto* inspect = app.add_subcommand("inspect-norm", "report identities, dual norms and width of a norm");
    inspect->add_option("--f", f_kind, "cardinality | truncated:k | sqrt")->required();
    inspect->add_option("--p", p, "dimension")->required();
    inspect->add_option("--samples", samples, "Monte-Carlo samples for the width");
    inspect->add_option("--seed", seed, "seed");
    inspect->add_option("--json", json_path, "also write the report as JSON ('-' for stdout)");

    std::string task, gen_out;
    std::size_t gen_p = 0, gen_n = 0;
    std::uint64_t gen_seed = 0;
    auto* gen = app.add_subcommand("gen", "write a synthetic dataset as CSV");
    gen->add_option("--task", task, "lasso_synthetic | linf_synthetic")->required();
    gen->add_option("--p", gen_p, "dimension")->required();
    gen->add_option("--n", gen_n, "number of points")->required();
    gen->add_option("--seed", gen_seed, "seed")->required();
    gen->add_option("--out", gen_out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*run) return cmd_run(config_path, out_dir);
        if (*inspect) return cmd_inspect(f_kind, p, samples, seed, json_path);
        if (*gen) return cmd_gen(task, gen_p, gen_n, gen_seed, gen_out);
    } catch (const dpsub::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const dpsub::CapabilityError& e) {
        std::cerr << "capability error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitConfig;
}
