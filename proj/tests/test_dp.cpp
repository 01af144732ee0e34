#include "dpsub/dp/experiment.hpp"
#include "dpsub/dp/frank_wolfe.hpp"
#include "dpsub/dp/objective.hpp"
#include "dpsub/dp/output.hpp"
#include "dpsub/dp/sensitivity.hpp"
#include "dpsub/oracles.hpp"
#include "dpsub/stats.hpp"

#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace dpsub {
namespace {

using testing::random_dataset;
using testing::squared_problem;
using testing::vec;

ErmProblem small_problem(std::uint64_t seed, std::size_t n = 40, std::size_t p = 3, double lambda = 2.0)
{
    CounterRng rng(seed, "test_dp");
    return squared_problem(random_dataset(rng, n, p), SubmodularFn::cardinality(p), lambda);
}

// Formulas.

TEST(NoiseFormulas, GaussianSigmaExample)
{
    const double s = output_gaussian_sigma(1.0, 1.0, 10.0, 1.0, 1e-6);
    EXPECT_NEAR(s * s, 16.0 * (std::log(1e6) + 1.0) / 100.0, 1e-12);
}

TEST(NoiseFormulas, OtherScales)
{
    EXPECT_DOUBLE_EQ(output_gamma_scale(2.0, 3.0, 4.0, 0.5), 4.0 * 2.0 * 3.0 / (0.5 * 4.0));
    const double so = objective_sigma(2.0, 100.0, 0.5, 1e-5);
    EXPECT_NEAR(so * so, 4.0 * 2.0 * std::log(1e5) / (50.0 * 50.0), 1e-15);
    EXPECT_NEAR(frank_wolfe_laplace_scale(1.5, 2.0, 9.0, 100.0, 1.0, 1e-6),
                1.5 * 2.0 * std::sqrt(72.0 * std::log(1e6)) / 100.0, 1e-14);
    EXPECT_NEAR(frank_wolfe_iterations(2.0, 3.0, 1.0, 1000.0, 1.0),
                std::pow(2.0, 4.0 / 3.0) * std::pow(1000.0, 2.0 / 3.0) / std::pow(3.0, 2.0 / 3.0), 1e-9);
    EXPECT_DOUBLE_EQ(width_calibrated_lambda(2.0, 3.0, 16.0, 4.0), 6.0);
}

TEST(PrivacyParams, Validation)
{
    EXPECT_THROW((PrivacyParams{0.0, 1e-6}.validate(false)), std::invalid_argument);
    EXPECT_THROW((PrivacyParams{1.0, 0.0}.validate(false)), std::invalid_argument);
    EXPECT_NO_THROW((PrivacyParams{1.0, 0.0}.validate(true)));
    EXPECT_THROW((PrivacyParams{1.0, 1.5}.validate(true)), std::invalid_argument);
}

// Provenance audit: every stored scale is recomputable from its provenance.

TEST(Provenance, RecomputesStoredScales)
{
    const auto prob = small_problem(1);
    const PrivacyParams pp{0.7, 1e-5};
    for (auto variant : {OutputVariant::Gaussian, OutputVariant::GammaL2}) {
        const auto r = output_perturb(prob, pp, variant, 3);
        EXPECT_NEAR(recompute_scale(r.provenance), r.noise_spec.scale, 1e-12 * r.noise_spec.scale);
    }
    const auto o = objective_perturb(prob, pp, 3);
    EXPECT_NEAR(recompute_scale(o.provenance), o.noise_spec.scale, 1e-12 * o.noise_spec.scale);

    const auto dp = DualProblem::build(prob);
    const auto f = private_frank_wolfe(dp, dual_l1_lipschitz(dp), pp, 3);
    EXPECT_NEAR(recompute_scale(f.provenance), f.noise_spec.scale, 1e-12 * f.noise_spec.scale);
    EXPECT_EQ(f.provenance.T, f.solve.iterations);
}

// Samplers.

TEST(Samplers, GaussianMoments)
{
    const std::size_t draws = 100000, p = 3;
    const double sigma = 1.7;
    CounterRng rng(11, "gauss_moments");
    std::vector<std::vector<double>> cols(p);
    for (std::size_t k = 0; k < draws; ++k) {
        const Vector b = sample_gaussian(p, sigma, rng);
        for (std::size_t j = 0; j < p; ++j) cols[j].push_back(b[static_cast<Eigen::Index>(j)]);
    }
    for (const auto& c : cols) {
        const auto s = summarize(c);
        EXPECT_LT(std::abs(s.mean), 3.0 * s.std_error);
        std::vector<double> sq;
        for (double x : c) sq.push_back(x * x);
        const auto v = summarize(sq);
        EXPECT_LT(std::abs(v.mean - sigma * sigma), 3.0 * v.std_error);
    }
}

TEST(Samplers, GammaRadiusMatchesReferenceGamma)
{
    // Two-sample Kolmogorov-Smirnov against std::gamma_distribution at 0.01.
    const std::size_t draws = 10000, p = 4;
    const double scale = 0.8;
    CounterRng rng(12, "gamma_ks");
    std::mt19937_64 ref_rng(12);
    std::gamma_distribution<double> ref(static_cast<double>(p), scale);
    std::vector<double> a, b;
    for (std::size_t k = 0; k < draws; ++k) {
        a.push_back(sample_gamma_l2(p, scale, rng).norm());
        b.push_back(ref(ref_rng));
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) ++i;
        else ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / draws - static_cast<double>(j) / draws));
    }
    const double crit = std::sqrt(-std::log(0.005) / 2.0) * std::sqrt(2.0 / draws);
    EXPECT_LT(d, crit);
}

TEST(Samplers, GammaDirectionIsIsotropic)
{
    CounterRng rng(13, "gamma_dir");
    Vector mean = Vector::Zero(3);
    const std::size_t draws = 20000;
    for (std::size_t k = 0; k < draws; ++k) {
        const Vector b = sample_gamma_l2(3, 1.0, rng);
        mean += b / b.norm();
    }
    mean /= static_cast<double>(draws);
    // Each coordinate of a uniform unit vector in R^3 has variance 1/3.
    EXPECT_LT(mean.lpNorm<Eigen::Infinity>(), 4.0 * std::sqrt(1.0 / 3.0 / draws));
}

TEST(Samplers, LaplaceMeanAbsolute)
{
    const double scale = 2.5;
    CounterRng rng(14, "laplace_abs");
    std::vector<double> xs;
    for (std::size_t k = 0; k < 100000; ++k) xs.push_back(std::abs(rng.laplace(scale)));
    const auto s = summarize(xs);
    EXPECT_LT(std::abs(s.mean - scale), 3.0 * s.std_error);
}

// Output perturbation.

TEST(OutputPerturbation, SquaredNoiseNormMatchesPSigmaSquared)
{
    const auto prob = small_problem(2);
    const auto solved = minimize_primal(prob);
    ASSERT_TRUE(solved.converged);
    const PrivacyParams pp{1.0, 1e-6};
    double acc = 0.0, sigma = 0.0;
    const std::size_t draws = 100000;
    for (std::size_t k = 0; k < draws; ++k) {
        const auto r = output_perturb_from(prob, solved, pp, OutputVariant::Gaussian, k);
        acc += (r.theta - solved.x).squaredNorm();
        sigma = r.noise_spec.scale;
    }
    const double expect = static_cast<double>(prob.p()) * sigma * sigma;
    EXPECT_NEAR(acc / draws, expect, 0.03 * expect);
}

TEST(OutputPerturbation, DeterministicInSeed)
{
    const auto prob = small_problem(3);
    const PrivacyParams pp{1.0, 1e-6};
    const auto a = output_perturb(prob, pp, OutputVariant::Gaussian, 99);
    const auto b = output_perturb(prob, pp, OutputVariant::Gaussian, 99);
    const auto c = output_perturb(prob, pp, OutputVariant::Gaussian, 100);
    EXPECT_EQ(a.theta, b.theta);
    EXPECT_NE(a.theta, c.theta);
}

TEST(OutputPerturbation, RejectsZeroDeltaAndUnconvergedMinimizer)
{
    const auto prob = small_problem(4);
    EXPECT_THROW(output_perturb(prob, {1.0, 0.0}, OutputVariant::Gaussian, 1), std::invalid_argument);
    EXPECT_NO_THROW(output_perturb(prob, {1.0, 0.0}, OutputVariant::GammaL2, 1));
    SolveReport fake;
    fake.x = Vector::Zero(3);
    fake.converged = false;
    EXPECT_THROW(output_perturb_from(prob, fake, {1.0, 1e-6}, OutputVariant::Gaussian, 1), NumericError);
}

TEST(OutputPerturbation, GammaVariantCarriesWarning)
{
    const auto r = output_perturb(small_problem(5), {1.0, 0.0}, OutputVariant::GammaL2, 1);
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_EQ(r.noise_spec.kind, NoiseKind::GammaL2);
}

// Objective perturbation.

TEST(ObjectivePerturbation, ZeroNoiseGivesNonPrivateMinimizer)
{
    const auto prob = small_problem(6);
    const auto r = objective_perturb_with_noise(prob, Vector::Zero(3));
    EXPECT_LT((r.theta - minimize_primal(prob).x).norm(), 1e-9);
}

TEST(ObjectivePerturbation, OneDimensionalGridOracle)
{
    CounterRng rng(7, "obj_1d");
    const auto data = random_dataset(rng, 15, 1);
    const auto F = SubmodularFn::cardinality(1);
    const auto prob = squared_problem(data, F, 1.5);
    const Vector b = vec({3.0});
    const auto r = objective_perturb_with_noise(prob, b);
    const Vector tilt = b / 15.0;
    const auto g = oracles::grid_minimize(
        [&](const Vector& t) {
            return oracles::naive_primal_objective(data, LossKind::Squared, F, 1.5, t, prob.empirical().ridge(), tilt);
        },
        {vec({-3.0}), vec({3.0}), 60001});
    EXPECT_NEAR(r.theta[0], g.x[0], 1e-4);
}

TEST(ObjectivePerturbation, DeterministicInSeed)
{
    const auto prob = small_problem(8);
    const auto a = objective_perturb(prob, {1.0, 1e-6}, 5);
    const auto b = objective_perturb(prob, {1.0, 1e-6}, 5);
    EXPECT_EQ(a.theta, b.theta);
    EXPECT_EQ(a.noise, b.noise);
}

TEST(Equivalence, ZeroNoiseBothEqualNonPrivate)
{
    const auto prob = small_problem(9, 10, 2);
    const auto rep = verify_primal_dual_equivalence(prob, Vector::Zero(2), 1e-6);
    EXPECT_EQ(rep.status, EquivalenceStatus::Agree) << rep.detail;
    EXPECT_LT((rep.theta_primal - solve_primal_exact(prob).x).norm(), 1e-9);
}

TEST(Equivalence, RandomNoiseAgrees)
{
    for (std::uint64_t k = 0; k < 5; ++k) {
        const auto prob = small_problem(20 + k, 10, 3);
        CounterRng rng(k, "equiv_b");
        const auto rep = verify_primal_dual_equivalence(prob, testing::gaussian_vector(rng, 3, 2.0), 1e-5);
        EXPECT_EQ(rep.status, EquivalenceStatus::Agree) << rep.detail;
    }
    CounterRng rng(1, "equiv_1d");
    const auto prob1 = squared_problem(random_dataset(rng, 8, 1), SubmodularFn::cardinality(1), 1.0);
    const auto rep = verify_primal_dual_equivalence(prob1, vec({-1.3}), 1e-6);
    EXPECT_EQ(rep.status, EquivalenceStatus::Agree) << rep.detail;
}

TEST(Equivalence, CapabilityGuards)
{
    CounterRng rng(2, "equiv_cap");
    const auto data = random_dataset(rng, 10, 5);
    EXPECT_THROW(verify_primal_dual_equivalence(squared_problem(data, SubmodularFn::cardinality(5), 1.0),
                                                Vector::Zero(5), 1e-6),
                 CapabilityError);
}

// Private Frank-Wolfe.

TEST(PrivateFrankWolfe, ZeroNoiseMatchesVertexArgminFrankWolfe)
{
    const auto dp = DualProblem::build(small_problem(30));
    PrivateFwOptions o;
    o.T = 100;
    o.scale_override = 0.0;
    o.record_iterates = true;
    const auto priv = private_frank_wolfe(dp, 1.0, {1.0, 1e-6}, 4, o);
    FrankWolfeOptions fo;
    fo.oracle = LinearOracle::VertexArgmin;
    fo.record_iterates = true;
    const auto plain = frank_wolfe_dual(dp, 100, fo);
    ASSERT_EQ(priv.solve.iterates.size(), plain.iterates.size());
    for (std::size_t t = 0; t < plain.iterates.size(); ++t) EXPECT_EQ(priv.solve.iterates[t], plain.iterates[t]) << t;
}

TEST(PrivateFrankWolfe, DeterministicAndStaysInK)
{
    const auto prob = small_problem(31);
    const auto dp = DualProblem::build(prob);
    const double L = dual_l1_lipschitz(dp);
    const auto a = private_frank_wolfe(dp, L, {1.0, 1e-6}, 8);
    const auto b = private_frank_wolfe(dp, L, {1.0, 1e-6}, 8);
    EXPECT_EQ(a.s, b.s);
    EXPECT_GT(a.noise_spec.scale, 0.0);
    EXPECT_LE(polytope_max_violation(prob.F(), a.s / dp.k_scale()), 1e-9);
}

TEST(PrivateFrankWolfe, ClampsIterationCountWithWarning)
{
    const auto dp = DualProblem::build(small_problem(32, 5));
    const auto r = private_frank_wolfe(dp, 1e6, {1e-6, 1e-6}, 1);
    EXPECT_EQ(r.provenance.T, 1u);
    ASSERT_EQ(r.warnings.size(), 1u);
}

TEST(PrivateFrankWolfe, RejectsEmptyVertexSetAndZeroDelta)
{
    const auto prob = small_problem(33);
    EXPECT_THROW(DualProblem(prob, {}, WidthEstimate{}), std::invalid_argument);
    const auto dp = DualProblem::build(prob);
    EXPECT_THROW(private_frank_wolfe(dp, 1.0, {1.0, 0.0}, 1), std::invalid_argument);
}

// Sensitivity diagnostics.

TEST(Sensitivity, IdenticalNeighbourIsZero)
{
    const auto prob = small_problem(40);
    const Vector x = prob.data().X().row(3).transpose();
    EXPECT_EQ(neighbor_distance(prob, 3, x, prob.data().y()[3]), 0.0);
}

TEST(Sensitivity, BelowAssumedScaleAndZeroForHugeLambda)
{
    // Not monotone in lambda in general: between lambda = 0.5 and 2 this pair
    // grid grows slightly before shrinking. Past lambda_max both minimizers
    // are 0.
    CounterRng rng(41, "sens");
    const auto data = random_dataset(rng, 30, 2);
    const PointSampler sampler = [](CounterRng& r) {
        Vector x(2);
        x << 2.0 * r.uniform() - 1.0, 2.0 * r.uniform() - 1.0;
        return std::make_pair(x, 2.0 * r.uniform() - 1.0);
    };
    for (double lambda : {0.5, 2.0, 8.0}) {
        const auto rep = empirical_sensitivity(squared_problem(data, SubmodularFn::cardinality(2), lambda), sampler, 20, 7);
        EXPECT_GT(rep.max_distance, 0.0);
        EXPECT_FALSE(rep.exceeds_assumed) << rep.max_distance << " vs " << rep.assumed_scale;
    }
    const auto big = empirical_sensitivity(squared_problem(data, SubmodularFn::cardinality(2), 1e4), sampler, 20, 7);
    EXPECT_EQ(big.max_distance, 0.0);
}

// Experiment driver.

ExperimentSpec lasso_spec(Mechanism m, double epsilon)
{
    ExperimentSpec spec;
    const std::size_t p = 2;
    spec.sampler = [p](std::size_t n, CounterRng& r) {
        Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
        Vector y(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = 2.0 * r.uniform() - 1.0;
            y[i] = std::clamp(0.5 * X(i, 0) + 0.1 * r.normal(), -1.0, 1.0);
        }
        return Dataset(std::move(X), std::move(y));
    };
    spec.r2_bound = std::sqrt(2.0);
    spec.F = SubmodularFn::cardinality(p);
    spec.privacy = {epsilon, 1e-6};
    spec.mechanism = m;
    spec.n_grid = {64, 128};
    spec.trials = 20;
    spec.seed = 3;
    spec.holdout = 2000;
    spec.width_samples = 2000;
    return spec;
}

double mean_excess(const std::vector<ExperimentRow>& rows, std::size_t n)
{
    std::vector<double> v;
    for (const auto& r : rows)
        if (r.n == n) v.push_back(r.excess_empirical_risk);
    return summarize(v).mean;
}

TEST(Experiment, NonPrivateBaselineHasZeroEmpiricalExcess)
{
    const auto rows = excess_risk_experiment(lasso_spec(Mechanism::None, 1.0));
    ASSERT_EQ(rows.size(), 40u);
    for (const auto& r : rows) {
        EXPECT_EQ(r.excess_empirical_risk, 0.0);
        EXPECT_TRUE(std::isfinite(r.excess_population_risk));
        EXPECT_FALSE(r.runtime_ms.has_value());
    }
}

TEST(Experiment, LargeEpsilonApproachesNonPrivate)
{
    // sigma falls like 1 / sqrt(epsilon), hence the extreme value.
    auto spec = lasso_spec(Mechanism::OutputGauss, 1e20);
    spec.lambda_rule = {LambdaRule::Kind::Explicit, 2.0};
    const auto priv = excess_risk_experiment(spec);
    spec.mechanism = Mechanism::None;
    const auto base = excess_risk_experiment(spec);
    std::vector<double> dp, dn;
    for (std::size_t i = 0; i < priv.size(); ++i) {
        dp.push_back(priv[i].excess_population_risk);
        dn.push_back(base[i].excess_population_risk);
    }
    const auto sp = summarize(dp), sn = summarize(dn);
    EXPECT_LT(std::abs(sp.mean - sn.mean), 2.0 * std::max(sp.std_error, sn.std_error) + 1e-9);
}

TEST(Experiment, DoublingEpsilonRoughlyHalvesNoiseTerm)
{
    // Lipschitz regime: the excess is linear in the noise scale.
    auto spec = lasso_spec(Mechanism::OutputGauss, 0.01);
    spec.loss = LossKind::Logistic;
    spec.holdout = 0;
    spec.trials = 50;
    const double a = mean_excess(excess_risk_experiment(spec), 64);
    spec.privacy.epsilon = 0.02;
    const double b = mean_excess(excess_risk_experiment(spec), 64);
    EXPECT_GE(a / b, 1.5);
    EXPECT_LE(a / b, 2.5);
}

TEST(Experiment, RowsAreIndependentOfGridOrder)
{
    auto spec = lasso_spec(Mechanism::OutputGauss, 1.0);
    spec.holdout = 0;
    const auto fwd = excess_risk_experiment(spec);
    spec.n_grid = {128, 64};
    const auto rev = excess_risk_experiment(spec);
    for (const auto& r : fwd) {
        const auto it = std::find_if(rev.begin(), rev.end(),
                                     [&](const ExperimentRow& q) { return q.n == r.n && q.trial == r.trial; });
        ASSERT_NE(it, rev.end());
        EXPECT_EQ(it->excess_empirical_risk, r.excess_empirical_risk);
        EXPECT_EQ(it->seed, r.seed);
    }
}

TEST(Experiment, PrivateFrankWolfeRecordsIterationsAndDualGap)
{
    auto spec = lasso_spec(Mechanism::PrivateFw, 1.0);
    spec.holdout = 0;
    spec.trials = 3;
    spec.lambda_rule = {LambdaRule::Kind::PerN, 0.01};
    for (const auto& r : excess_risk_experiment(spec)) {
        ASSERT_TRUE(r.T.has_value());
        EXPECT_GE(*r.T, 1u);
        EXPECT_GE(r.dual_suboptimality, -1e-12);
        EXPECT_DOUBLE_EQ(r.lambda, 0.01 * static_cast<double>(r.n));
    }
}

} // namespace
} // namespace dpsub
