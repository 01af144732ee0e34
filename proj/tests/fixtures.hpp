#pragma once

#include <initializer_list>

#include "dpsub/erm/problem.hpp"
#include "dpsub/rng.hpp"

namespace dpsub::testing {

inline Vector vec(std::initializer_list<double> xs)
{
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

inline Vector gaussian_vector(CounterRng& rng, std::size_t p, double scale = 1.0)
{
    Vector v(static_cast<Eigen::Index>(p));
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = scale * rng.normal();
    return v;
}

/// n points with x ~ U[-1,1]^p and y = theta0^T x + 0.1 noise (or +-1 labels).
inline Dataset random_dataset(CounterRng& rng, std::size_t n, std::size_t p, bool binary = false)
{
    Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = 2.0 * rng.uniform() - 1.0;
    const Vector theta0 = gaussian_vector(rng, p, 0.7);
    Vector y = X * theta0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        y[i] += 0.1 * rng.normal();
        if (binary) y[i] = y[i] >= 0 ? 1.0 : -1.0;
    }
    return Dataset(std::move(X), std::move(y));
}

inline ErmProblem squared_problem(const Dataset& data, const SubmodularFn& F, double lambda)
{
    return ErmProblem(data, LossModel::for_data(LossKind::Squared, data), F, lambda);
}

} // namespace dpsub::testing
