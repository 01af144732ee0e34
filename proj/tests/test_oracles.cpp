#include "dpsub/oracles.hpp"

#include "fixtures.hpp"

#include <cmath>

#include <gtest/gtest.h>

namespace dpsub {
namespace {

using testing::vec;

TEST(LpOverVertices, Examples)
{
    EXPECT_DOUBLE_EQ(oracles::lp_over_vertices(SubmodularFn::cardinality(2), vec({0.5, -0.2})), 0.7);
    EXPECT_DOUBLE_EQ(oracles::lp_over_vertices(SubmodularFn::truncated_cardinality(2, 1), vec({0.5, -0.2})), 0.5);
    EXPECT_EQ(oracles::lp_over_vertices(SubmodularFn::sqrt_cardinality(3), Vector::Zero(3)), 0.0);
    EXPECT_THROW(oracles::lp_over_vertices(SubmodularFn::cardinality(9), Vector::Zero(9)), CapabilityError);
}

TEST(GridMinimize, Examples)
{
    const auto quad = oracles::grid_minimize([](const Vector& x) { return (x[0] - 1) * (x[0] - 1); },
                                             {vec({-2}), vec({2}), 401});
    EXPECT_NEAR(quad.x[0], 1.0, 0.01);

    const auto lasso = oracles::grid_minimize(
        [](const Vector& x) { return (x[0] - 1) * (x[0] - 1) + 0.5 * std::abs(x[0]); }, {vec({-2}), vec({2}), 401});
    EXPECT_NEAR(lasso.x[0], 0.75, 5e-3);

    const auto flat = oracles::grid_minimize([](const Vector&) { return 3.0; }, {vec({-1, 2}), vec({1, 5}), 11});
    EXPECT_EQ(flat.x, vec({-1, 2}));
    EXPECT_EQ(flat.value, 3.0);
}

TEST(GridMinimize, Guards)
{
    auto f = [](const Vector& x) { return x.squaredNorm(); };
    EXPECT_THROW(oracles::grid_minimize(f, {vec({0}), vec({1}), 2}), std::invalid_argument);
    EXPECT_THROW(oracles::grid_minimize(f, {vec({0}), vec({1, 2}), 5}), std::invalid_argument);
    EXPECT_THROW(oracles::grid_minimize(f, {Vector::Zero(4), Vector::Ones(4), 100}), CapabilityError);
}

TEST(NaiveFit, HandComputedValues)
{
    Matrix X(2, 2);
    X << 1, 0, 0, 2;
    const Dataset d(X, vec({1, -1}));
    const Vector theta = vec({0.5, 0.5});
    // predictions 0.5 and 1
    EXPECT_DOUBLE_EQ(oracles::naive_fit(d, LossKind::Squared, theta), (0.25 + 4.0) / 2.0);
    EXPECT_DOUBLE_EQ(oracles::naive_fit(d, LossKind::Hinge, theta), (0.5 + 2.0) / 2.0);
    EXPECT_NEAR(oracles::naive_fit(d, LossKind::Logistic, theta),
                (std::log(1 + std::exp(-0.5)) + std::log(1 + std::exp(1.0))) / 2.0, 1e-15);
    EXPECT_DOUBLE_EQ(oracles::naive_fit(d, LossKind::Squared, theta, 2.0, vec({1, 0})),
                     (0.25 + 4.0) / 2.0 + 0.5 + 0.5);
}

} // namespace
} // namespace dpsub
