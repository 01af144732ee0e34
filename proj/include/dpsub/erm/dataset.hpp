#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <Eigen/Core>

#include "dpsub/errors.hpp"

namespace dpsub {

using Matrix = Eigen::MatrixXd;

/// n labelled points, one row of X per point.
class Dataset {
public:
    Dataset(Matrix X, Eigen::VectorXd y) : X_(std::move(X)), y_(std::move(y))
    {
        detail::require(X_.rows() >= 1, "dataset needs at least one point");
        detail::require(X_.cols() >= 1, "dataset needs at least one feature");
        detail::require(X_.rows() == y_.size(), "feature rows and labels differ in count");
        detail::require(X_.allFinite() && y_.allFinite(), "dataset contains non-finite values");
        r2_ = X_.rowwise().norm().maxCoeff();
        y_min_ = y_.minCoeff();
        y_max_ = y_.maxCoeff();
    }

    std::size_t n() const noexcept { return static_cast<std::size_t>(X_.rows()); }
    std::size_t p() const noexcept { return static_cast<std::size_t>(X_.cols()); }
    const Matrix& X() const noexcept { return X_; }
    const Eigen::VectorXd& y() const noexcept { return y_; }

    /// max_i ||x_i||_2
    double R2() const noexcept { return r2_; }
    double y_min() const noexcept { return y_min_; }
    double y_max() const noexcept { return y_max_; }
    double y_abs_max() const noexcept { return std::max(std::abs(y_min_), std::abs(y_max_)); }

    /// Neighbouring dataset: point i replaced by (x, y).
    Dataset with_point_replaced(std::size_t i, const Eigen::VectorXd& x, double y) const
    {
        detail::require(i < n(), "replacement index out of range");
        Matrix X = X_;
        Eigen::VectorXd labels = y_;
        X.row(static_cast<Eigen::Index>(i)) = x.transpose();
        labels[static_cast<Eigen::Index>(i)] = y;
        return Dataset(std::move(X), std::move(labels));
    }

private:
    Matrix X_;
    Eigen::VectorXd y_;
    double r2_ = 0.0;
    double y_min_ = 0.0;
    double y_max_ = 0.0;
};

} // namespace dpsub
