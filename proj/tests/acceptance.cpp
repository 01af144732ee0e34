// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "dpsub/bench/csv.hpp"
#include "dpsub/bench/synthetic.hpp"
#include "dpsub/dp/experiment.hpp"
#include "dpsub/dp/frank_wolfe.hpp"
#include "dpsub/dp/objective.hpp"
#include "dpsub/oracles.hpp"
#include "dpsub/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

using namespace dpsub;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Clock {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double a)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

Vector normal_vector(CounterRng& rng, std::size_t p)
{
    Vector v(static_cast<Eigen::Index>(p));
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = rng.normal();
    return v;
}

Dataset random_data(CounterRng& rng, std::size_t n, std::size_t p)
{
    Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = 2.0 * rng.uniform() - 1.0;
    const Vector theta0 = 0.7 * normal_vector(rng, p);
    Vector y = X * theta0;
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += 0.1 * rng.normal();
    return Dataset(std::move(X), std::move(y));
}

ErmProblem squared(const Dataset& d, const SubmodularFn& F, double lambda)
{
    return ErmProblem(d, LossModel::for_data(LossKind::Squared, d), F, lambda);
}

/// Weighted coverage: ground element j covers a random nonempty subset of
/// eight weighted items; F(A) is the weight covered by A.
SubmodularFn random_coverage(std::size_t p, std::uint64_t seed)
{
    CounterRng rng(seed, "coverage");
    std::vector<double> weight(8);
    for (auto& w : weight) w = 0.1 + 0.9 * rng.uniform();
    std::vector<std::uint32_t> covers(p);
    for (auto& c : covers) {
        while (c == 0)
            for (std::uint32_t u = 0; u < 8; ++u)
                if (rng.uniform() < 0.4) c |= 1u << u;
    }
    return SubmodularFn::custom(
        p,
        [weight, covers](const SubmodularFn::Members& m) {
            std::uint32_t all = 0;
            for (std::size_t j = 0; j < m.size(); ++j)
                if (m[j]) all |= covers[j];
            double v = 0.0;
            for (std::uint32_t u = 0; u < 8; ++u)
                if (all & (1u << u)) v += weight[u];
            return v;
        },
        "coverage");
}

std::vector<SubmodularFn> catalog(std::size_t p, std::uint64_t seed)
{
    return {SubmodularFn::cardinality(p), SubmodularFn::truncated_cardinality(p, 1),
            SubmodularFn::truncated_cardinality(p, 2), SubmodularFn::sqrt_cardinality(p), random_coverage(p, seed)};
}

// 1. Greedy and LP over enumerated vertices agree.
Outcome greedy_lp()
{
    Clock clock;
    double worst = 0.0;
    std::size_t checks = 0;
    for (std::size_t p = 2; p <= 6; ++p) {
        for (const auto& F : catalog(p, p)) {
            const auto vertices = enumerate_vertices(F);
            CounterRng rng(p, "acc_greedy_lp");
            for (int k = 0; k < 200; ++k) {
                const Vector w = normal_vector(rng, p).cwiseAbs();
                worst = std::max(worst, std::abs(lovasz_extension(F, w) - oracles::lp_over_vertices(vertices, w)));
                const Vector signed_w = normal_vector(rng, p);
                worst = std::max(worst, std::abs(omega_inf(F, signed_w) - oracles::lp_over_vertices(vertices, signed_w)));
                checks += 2;
            }
        }
    }
    const double t = clock.seconds();
    return {worst <= 1e-9 && t < 30.0, std::to_string(checks) + " checks, max |diff| " + fmt("%.3g", worst) +
                                           " (tol 1e-9), " + fmt("%.2f", t) + " s (limit 30)"};
}

// 2. Omega under |A| is L1 and under min(|A|,1) is Linf, bit for bit.
Outcome norm_identities()
{
    std::size_t mismatches = 0;
    for (std::size_t k = 0; k < 10000; ++k) {
        CounterRng rng(k, "acc_identity");
        const std::size_t p = 1 + k % 8;
        const Vector theta = normal_vector(rng, p);
        if (omega_inf(SubmodularFn::cardinality(p), theta) != oracles::l1_norm_sorted(theta)) ++mismatches;
        if (omega_inf(SubmodularFn::truncated_cardinality(p, 1), theta) != oracles::linf_norm(theta)) ++mismatches;
    }
    return {mismatches == 0, "10000 vectors, p = 1..8, " + std::to_string(mismatches) + " bitwise mismatches"};
}

// 3. theta^T s <= Omega(theta) Omega*(s), with equality at greedy maximizers.
Outcome dual_norm_duality()
{
    double worst_violation = -std::numeric_limits<double>::infinity();
    double worst_equality = 0.0;
    for (std::size_t k = 0; k < 10000; ++k) {
        CounterRng rng(k, "acc_duality");
        const std::size_t p = 2 + k % 5;
        const auto fns = catalog(p, 100 + p);
        const auto& F = fns[k % fns.size()];
        const Vector theta = normal_vector(rng, p), s = normal_vector(rng, p);
        worst_violation =
            std::max(worst_violation, theta.dot(s) - omega_inf(F, theta) * dual_norm_bruteforce(F, s));
        const Vector star = polytope_linmax(F, theta).s;
        worst_equality = std::max(
            worst_equality, std::abs(theta.dot(star) - omega_inf(F, theta) * dual_norm_bruteforce(F, star)));
    }
    return {worst_violation <= 1e-9 && worst_equality <= 1e-9,
            "10000 pairs, max theta^T s - Omega Omega* = " + fmt("%.3g", worst_violation) +
                ", max equality gap " + fmt("%.3g", worst_equality) + " (tol 1e-9)"};
}

// 4. Gaussian width against closed form and an independent estimator.
Outcome gaussian_width()
{
    Clock clock;
    const auto l1 = gaussian_width_mc(SubmodularFn::cardinality(4), 100000, 1);
    const double exact = 4.0 * std::sqrt(2.0 / std::numbers::pi);
    const double rel = std::abs(l1.mean - exact) / exact;
    const auto linf = gaussian_width_mc(SubmodularFn::truncated_cardinality(16, 1), 100000, 2);
    const auto named = oracles::mc_width_named(oracles::NamedBall::L1, 16, 100000, 3);
    const double combined = std::sqrt(linf.std_error * linf.std_error + named.std_error * named.std_error);
    const double z = std::abs(linf.mean - named.mean) / combined;
    const double t = clock.seconds();
    return {rel <= 0.02 && z <= 2.0 && t < 60.0,
            "|A|, p=4: rel err " + fmt("%.4f", rel) + " (tol 0.02); min(|A|,1), p=16: " + fmt("%.2f", z) +
                " combined SE (tol 2); " + fmt("%.2f", t) + " s (limit 60)"};
}

// 5. Primal minimum equals dual maximum.
Outcome strong_duality()
{
    double worst = 0.0;
    for (std::uint64_t k = 0; k < 20; ++k) {
        CounterRng rng(k, "acc_strong_duality");
        const std::size_t p = 1 + k % 3, n = 3 + k % 8;
        const auto fns = catalog(p, 200 + k);
        const auto prob = squared(random_data(rng, n, p), fns[k % fns.size()], 0.2 + 2.0 * rng.uniform());
        const double primal = solve_primal_exact(prob).objective;
        const auto dual = solve_dual_precise(DualProblem::build(prob, {2000, k}));
        worst = std::max(worst, std::abs(primal - dual.objective));
    }
    return {worst <= 1e-6, "20 instances, p <= 3, n <= 10, max |primal - dual| " + fmt("%.3g", worst) + " (tol 1e-6)"};
}

// 6. Frank-Wolfe dual suboptimality decays at least like 1/T.
Outcome fw_rate()
{
    Clock clock;
    CounterRng rng(0, "acc_fw_rate");
    const auto dp = DualProblem::build(squared(random_data(rng, 10, 3), SubmodularFn::cardinality(3), 1.0), {100, 0});
    const double best = solve_dual_precise(dp).objective;
    const auto rep = frank_wolfe_dual(dp, 1024);
    std::vector<double> Ts, gaps;
    for (std::size_t T = 8; T <= 1024; T *= 2) {
        Ts.push_back(static_cast<double>(T));
        gaps.push_back(best - rep.objective_trace[T - 1]);
    }
    const auto fit = fit_loglog(Ts, gaps);
    const double t = clock.seconds();
    return {fit.slope <= -0.9 && fit.points == Ts.size() && t < 60.0,
            "slope " + fmt("%.3f", fit.slope) + " over T = 8..1024 (need <= -0.9), " + fmt("%.2f", t) +
                " s (limit 60)"};
}

// 7. Private Frank-Wolfe with zero noise retraces the vertex-argmin iterates.
Outcome zero_noise_fw()
{
    CounterRng rng(0, "acc_zero_noise");
    const auto dp = DualProblem::build(squared(random_data(rng, 30, 4), SubmodularFn::sqrt_cardinality(4), 2.0));
    PrivateFwOptions o;
    o.T = 100;
    o.scale_override = 0.0;
    o.record_iterates = true;
    const auto priv = private_frank_wolfe(dp, 1.0, {1.0, 1e-6}, 7, o);
    FrankWolfeOptions fo;
    fo.oracle = LinearOracle::VertexArgmin;
    fo.record_iterates = true;
    const auto plain = frank_wolfe_dual(dp, 100, fo);
    std::size_t differ = priv.solve.iterates.size() == plain.iterates.size() ? 0 : 1;
    for (std::size_t t = 0; !differ && t < plain.iterates.size(); ++t)
        if (priv.solve.iterates[t] != plain.iterates[t]) ++differ;
    return {differ == 0 && plain.iterates.size() == 101,
            "100 iterations, " + std::to_string(differ) + " iterates differ (exact comparison)"};
}

ExperimentSpec lasso_experiment(std::size_t p, std::uint64_t seed)
{
    const auto task = bench::make_task(bench::TaskKind::LassoSynthetic, p, seed);
    ExperimentSpec spec;
    spec.sampler = [task](std::size_t n, CounterRng& r) { return task.sample(n, r); };
    spec.r2_bound = task.r2_bound();
    spec.y_bound = task.y_bound();
    spec.F = SubmodularFn::cardinality(p);
    spec.seed = seed;
    spec.holdout = 0;
    for (std::size_t n = 128; n <= 8192; n *= 2) spec.n_grid.push_back(n);
    return spec;
}

LogLogFit slope_of(const ExperimentSpec& spec, const std::vector<ExperimentRow>& rows,
                   const std::function<double(const ExperimentRow&)>& metric)
{
    std::vector<double> ns, ms;
    for (auto n : spec.n_grid) {
        std::vector<double> v;
        for (const auto& r : rows)
            if (r.n == n) v.push_back(metric(r));
        ns.push_back(static_cast<double>(n));
        ms.push_back(summarize(v).mean);
    }
    return fit_loglog(ns, ms);
}

// 8. Private Frank-Wolfe utility slope in n.
Outcome private_fw_slope()
{
    Clock clock;
    auto spec = lasso_experiment(4, 0);
    spec.loss = LossKind::Squared;
    spec.mechanism = Mechanism::PrivateFw;
    spec.privacy = {1.0, 1e-6};
    spec.trials = 20;
    // lambda = kappa n keeps K = kappa |P|(F) fixed across n.
    spec.lambda_rule = {LambdaRule::Kind::PerN, 0.01};
    const auto rows = excess_risk_experiment(spec);
    const auto fit = slope_of(spec, rows, [](const ExperimentRow& r) { return r.dual_suboptimality; });
    const double t = clock.seconds();
    const bool ok = std::abs(fit.slope + 2.0 / 3.0) <= 0.15 && fit.points == spec.n_grid.size() && t < 600.0;
    return {ok, "dual suboptimality slope " + fmt("%.3f", fit.slope) + " [" + fmt("%.3f", fit.ci_low) + ", " +
                    fmt("%.3f", fit.ci_high) + "] (need -2/3 +- 0.15), n = 2^7..2^13, 20 trials, " +
                    fmt("%.1f", t) + " s (limit 600)"};
}

// 9. Output perturbation excess empirical risk slope in n.
Outcome output_perturbation_slope()
{
    Clock clock;
    auto spec = lasso_experiment(2, 0);
    spec.loss = LossKind::Logistic;
    spec.mechanism = Mechanism::OutputGauss;
    spec.privacy = {0.01, 1e-6};
    spec.trials = 50;
    const auto rows = excess_risk_experiment(spec);
    const auto fit = slope_of(spec, rows, [](const ExperimentRow& r) { return r.excess_empirical_risk; });
    const double t = clock.seconds();
    const bool ok = fit.slope >= -0.75 && fit.slope <= -0.25 && fit.points == spec.n_grid.size() && t < 600.0;
    return {ok, "excess empirical risk slope " + fmt("%.3f", fit.slope) + " [" + fmt("%.3f", fit.ci_low) + ", " +
                    fmt("%.3f", fit.ci_high) + "] (need -0.5 +- 0.25), logistic loss, eps 0.01, n = 2^7..2^13, " +
                    "50 trials, " + fmt("%.1f", t) + " s (limit 600)"};
}

// 10. Objective perturbation equals output perturbation of the dual.
Outcome equivalence()
{
    std::size_t agree = 0;
    double worst_theta = 0.0, worst_obj = 0.0;
    for (std::uint64_t k = 0; k < 50; ++k) {
        CounterRng rng(k, "acc_equivalence");
        const std::size_t p = 1 + k % 3;
        const auto fns = catalog(p, 300 + k);
        const auto prob = squared(random_data(rng, 6 + k % 10, p), fns[k % fns.size()], 0.3 + 2.0 * rng.uniform());
        const Vector b = 3.0 * normal_vector(rng, p);
        const auto rep = verify_primal_dual_equivalence(prob, b, 1e-5);
        if (rep.status == EquivalenceStatus::Agree) ++agree;
        worst_theta = std::max(worst_theta, rep.theta_distance);
        worst_obj = std::max(worst_obj, std::abs(rep.objective_primal - rep.objective_dual_recovery));
    }
    return {agree == 50, std::to_string(agree) + "/50 agree, max theta distance " + fmt("%.3g", worst_theta) +
                             ", max objective gap " + fmt("%.3g", worst_obj) + " (tol 1e-5)"};
}

// 11. Noise sampler statistics.
Outcome samplers()
{
    // Gaussian: per-coordinate mean and variance within 3 standard errors.
    bool gauss_ok = true;
    {
        const double sigma = 1.3;
        CounterRng rng(1, "acc_gauss");
        std::vector<std::vector<double>> xs(3), sq(3);
        for (int k = 0; k < 100000; ++k) {
            const Vector b = sample_gaussian(3, sigma, rng);
            for (int j = 0; j < 3; ++j) {
                xs[j].push_back(b[j]);
                sq[j].push_back(b[j] * b[j]);
            }
        }
        for (int j = 0; j < 3; ++j) {
            const auto m = summarize(xs[j]), v = summarize(sq[j]);
            gauss_ok = gauss_ok && std::abs(m.mean) <= 3.0 * m.std_error &&
                       std::abs(v.mean - sigma * sigma) <= 3.0 * v.std_error;
        }
    }
    // Gamma radial: two-sample Kolmogorov-Smirnov against std::gamma_distribution.
    double ks = 0.0, ks_crit = 0.0;
    {
        const std::size_t m = 10000, p = 5;
        const double scale = 0.6;
        CounterRng rng(2, "acc_gamma");
        std::mt19937_64 ref_rng(2);
        std::gamma_distribution<double> ref(static_cast<double>(p), scale);
        std::vector<double> a, b;
        for (std::size_t k = 0; k < m; ++k) {
            a.push_back(sample_gamma_l2(p, scale, rng).norm());
            b.push_back(ref(ref_rng));
        }
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        std::size_t i = 0, j = 0;
        while (i < m && j < m) {
            if (a[i] <= b[j]) ++i;
            else ++j;
            ks = std::max(ks, std::abs(static_cast<double>(i) - static_cast<double>(j)) / static_cast<double>(m));
        }
        ks_crit = std::sqrt(-std::log(0.01 / 2.0) / 2.0) * std::sqrt(2.0 / static_cast<double>(m));
    }
    // Laplace: mean |X| equals the scale within 3 standard errors.
    double lap_z = 0.0;
    {
        const double scale = 0.7;
        CounterRng rng(3, "acc_laplace");
        std::vector<double> xs;
        for (int k = 0; k < 100000; ++k) xs.push_back(std::abs(rng.laplace(scale)));
        const auto s = summarize(xs);
        lap_z = std::abs(s.mean - scale) / s.std_error;
    }
    const bool ok = gauss_ok && ks < ks_crit && lap_z <= 3.0;
    return {ok, std::string("gaussian moments ") + (gauss_ok ? "ok" : "off") + "; gamma KS D " + fmt("%.4f", ks) +
                    " (crit " + fmt("%.4f", ks_crit) + " at 0.01); laplace |z| " + fmt("%.2f", lap_z) + " (tol 3)"};
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

int run_cli(const std::string& args)
{
    const int status = std::system((std::string(DPSUB_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 12. CLI outputs are byte-identical across invocations; CSV schema is exact.
Outcome determinism()
{
    const auto dir = fs::temp_directory_path() / ("dpsub_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string header =
        "n,trial,mechanism,excess_empirical_risk,excess_population_risk,runtime_ms,noise_scale,lambda,G_width,T,seed";
    std::size_t runs = 0, mismatches = 0, failures = 0, bad_schema = 0;

    for (const char* mech : {"none", "output_gauss", "output_gamma", "obj_perturb", "private_fw"}) {
        const auto cfg = dir / (std::string(mech) + ".ini");
        {
            std::ofstream os(cfg);
            os << "[task]\nkind = lasso_synthetic\np = 3\n\n[model]\nloss = squared\nF = sqrt\nlambda = "
               << (std::string(mech) == "private_fw" ? "per_n:0.05" : "explicit:5") << "\n\n[privacy]\nepsilon = 1\n"
               << "delta = 1e-6\nmechanism = " << mech << "\n\n[run]\nn_grid = 32,64,128\ntrials = 3\nseed = 42\n"
               << "holdout = 2000\nwidth_samples = 1000\n";
        }
        const auto a = dir / (std::string(mech) + "_a"), b = dir / (std::string(mech) + "_b");
        failures += run_cli("run --config " + cfg.string() + " --out " + a.string()) != 0;
        failures += run_cli("run --config " + cfg.string() + " --out " + b.string()) != 0;
        runs += 2;
        for (const char* file : {"results.csv", "summary.json"})
            if (slurp(a / file).empty() || slurp(a / file) != slurp(b / file)) ++mismatches;
        const auto csv = slurp(a / "results.csv");
        if (csv.substr(0, csv.find('\n')) != header) ++bad_schema;
    }
    for (const char* task : {"lasso_synthetic", "linf_synthetic"}) {
        const std::string args = std::string("gen --task ") + task + " --p 4 --n 50 --seed 3 --out ";
        failures += run_cli(args + (dir / "g_a.csv").string()) != 0;
        failures += run_cli(args + (dir / "g_b.csv").string()) != 0;
        runs += 2;
        const auto g = slurp(dir / "g_a.csv");
        if (g.empty() || g != slurp(dir / "g_b.csv")) ++mismatches;
        if (g.substr(0, g.find('\n')) != "x1,x2,x3,x4,y") ++bad_schema;
    }
    {
        const std::string args = "inspect-norm --f truncated:2 --p 5 --samples 2000 --seed 4 --json ";
        failures += run_cli(args + (dir / "i_a.json").string()) != 0;
        failures += run_cli(args + (dir / "i_b.json").string()) != 0;
        runs += 2;
        if (slurp(dir / "i_a.json").empty() || slurp(dir / "i_a.json") != slurp(dir / "i_b.json")) ++mismatches;
    }
    fs::remove_all(dir);
    return {failures == 0 && mismatches == 0 && bad_schema == 0,
            std::to_string(runs) + " invocations, " + std::to_string(failures) + " failed, " +
                std::to_string(mismatches) + " output mismatches, " + std::to_string(bad_schema) +
                " schema mismatches"};
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"greedy-LP equivalence", greedy_lp},
        {"norm identities", norm_identities},
        {"dual-norm duality", dual_norm_duality},
        {"Gaussian width", gaussian_width},
        {"strong duality", strong_duality},
        {"Frank-Wolfe rate", fw_rate},
        {"zero-noise private Frank-Wolfe", zero_noise_fw},
        {"private Frank-Wolfe utility slope", private_fw_slope},
        {"output perturbation rate", output_perturbation_slope},
        {"objective/dual output equivalence", equivalence},
        {"noise sampler statistics", samplers},
        {"CLI determinism and schema", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
