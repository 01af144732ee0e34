#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "dpsub/erm/dataset.hpp"
#include "dpsub/erm/loss.hpp"
#include "dpsub/errors.hpp"
#include "dpsub/polytope.hpp"
#include "dpsub/submodular.hpp"

namespace dpsub {

/// Ridge added to rank-deficient squared-loss designs: 1e-8 trace(X^T X) / p.
inline double auto_ridge(const Dataset& data)
{
    const Matrix gram = data.X().transpose() * data.X();
    const double trace = gram.trace();
    const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly).eigenvalues()[0];
    if (min_eig > 1e-12 * std::max(trace, 1.0)) return 0.0;
    return 1e-8 * std::max(trace, 1.0) / static_cast<double>(data.p());
}

/// The smooth data-fit term of the objective,
///
///     Lhat(theta) = (1/n) sum_i l(theta; d_i) + (ridge/n) ||theta||^2 + tilt^T theta.
///
/// The tilt carries linear perturbations (objective perturbation uses b/n).
/// For the squared loss the Gram matrix is cached and all evaluations use it.
class EmpiricalLoss {
public:
    EmpiricalLoss(std::shared_ptr<const Dataset> data, LossKind kind, double ridge, Vector tilt)
        : data_(std::move(data)), kind_(kind), ridge_(ridge), tilt_(std::move(tilt))
    {
        detail::require(data_ != nullptr, "empirical loss needs a dataset");
        detail::require(ridge_ >= 0.0 && std::isfinite(ridge_), "ridge must be finite and nonnegative");
        const auto p = static_cast<Eigen::Index>(data_->p());
        if (tilt_.size() == 0) tilt_ = Vector::Zero(p);
        detail::require(tilt_.size() == p && tilt_.allFinite(), "tilt must be a finite vector of length p");

        if (kind_ == LossKind::Squared) {
            gram_ = data_->X().transpose() * data_->X();
            xty_ = data_->X().transpose() * data_->y();
            yty_ = data_->y().squaredNorm();
            const Matrix m = gram_ + ridge_ * Matrix::Identity(p, p);
            const auto eig = Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues();
            min_curv_ = eig[0];
            max_curv_ = eig[p - 1];
            if (min_curv_ > 1e-12 * std::max(m.trace(), 1.0)) normal_llt_.compute(m);
        } else {
            const Matrix gram = data_->X().transpose() * data_->X();
            max_curv_ = Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly).eigenvalues()[p - 1];
        }
    }

    const Dataset& data() const noexcept { return *data_; }
    LossKind kind() const noexcept { return kind_; }
    double ridge() const noexcept { return ridge_; }
    const Vector& tilt() const noexcept { return tilt_; }
    std::size_t p() const noexcept { return data_->p(); }
    double n() const noexcept { return static_cast<double>(data_->n()); }
    bool smooth() const noexcept { return kind_ != LossKind::Hinge; }

    double value(const Vector& theta) const
    {
        double fit = 0.0;
        if (kind_ == LossKind::Squared) {
            fit = (theta.dot(gram_ * theta) - 2.0 * xty_.dot(theta) + yty_) / n();
        } else {
            const Vector u = data_->X() * theta;
            for (Eigen::Index i = 0; i < u.size(); ++i) fit += point_loss(kind_, u[i], data_->y()[i]);
            fit /= n();
        }
        return fit + ridge_ / n() * theta.squaredNorm() + tilt_.dot(theta);
    }

    /// Gradient (a subgradient for the hinge loss).
    Vector gradient(const Vector& theta) const
    {
        Vector g;
        if (kind_ == LossKind::Squared) {
            g = 2.0 / n() * (gram_ * theta - xty_);
        } else {
            const Vector u = data_->X() * theta;
            Vector d(u.size());
            for (Eigen::Index i = 0; i < u.size(); ++i) d[i] = point_dloss(kind_, u[i], data_->y()[i]);
            g = data_->X().transpose() * d / n();
        }
        return g + 2.0 * ridge_ / n() * theta + tilt_;
    }

    Matrix hessian(const Vector& theta) const
    {
        detail::require_capability(smooth(), "the hinge loss has no Hessian");
        const auto p = static_cast<Eigen::Index>(this->p());
        if (kind_ == LossKind::Squared) return 2.0 / n() * (gram_ + ridge_ * Matrix::Identity(p, p));
        const Vector u = data_->X() * theta;
        Vector w(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) w[i] = point_d2loss(kind_, u[i], data_->y()[i]);
        Matrix h = data_->X().transpose() * w.asDiagonal() * data_->X() / n();
        h.diagonal().array() += 2.0 * ridge_ / n();
        return h;
    }

    /// A lower bound on the modulus of strong convexity of Lhat.
    double strong_convexity() const noexcept
    {
        if (kind_ == LossKind::Squared) return 2.0 * std::max(min_curv_, 0.0) / n();
        return 2.0 * ridge_ / n();
    }

    /// An upper bound on the Lipschitz constant of the gradient of Lhat.
    double smoothness() const noexcept
    {
        switch (kind_) {
        case LossKind::Squared: return 2.0 * max_curv_ / n();
        case LossKind::Logistic:
            return (data_->y_abs_max() * data_->y_abs_max() * max_curv_ / 4.0 + 2.0 * ridge_) / n();
        case LossKind::Hinge: return std::numeric_limits<double>::infinity();
        }
        return std::numeric_limits<double>::infinity();
    }

    /// Minimizer of Lhat(theta) - z^T theta, i.e. the maximizer in the conjugate.
    /// Closed form for the squared loss; Newton's method otherwise.
    Vector conjugate_argmax(const Vector& z, const Vector* warm_start = nullptr) const
    {
        require_conjugate();
        detail::require(z.size() == static_cast<Eigen::Index>(p()) && z.allFinite(),
                        "conjugate argument must be a finite vector of length p");
        if (kind_ == LossKind::Squared) return normal_llt_.solve(xty_ + 0.5 * n() * (z - tilt_));
        return newton_conjugate(z, warm_start);
    }

    /// Lhat*(z) = sup_theta z^T theta - Lhat(theta).
    double conjugate_value(const Vector& z, const Vector& argmax) const { return z.dot(argmax) - value(argmax); }

    // Quadratic pieces for the squared loss: Lhat = theta^T Q theta - 2 q^T theta + c.
    const Matrix& gram() const noexcept { return gram_; }
    const Vector& xty() const noexcept { return xty_; }
    double yty() const noexcept { return yty_; }

    /// Solve (X^T X + ridge I) v = rhs for the squared loss.
    Vector normal_solve(const Vector& rhs) const
    {
        require_conjugate();
        detail::require_capability(kind_ == LossKind::Squared, "normal_solve is defined for the squared loss");
        return normal_llt_.solve(rhs);
    }

private:
    void require_conjugate() const
    {
        detail::require_capability(kind_ != LossKind::Hinge,
                                   "the Fenchel conjugate is only supported for smooth losses (squared, logistic)");
        detail::require_capability(strong_convexity() > 0.0,
                                   "the Fenchel conjugate needs a strongly convex loss; the design is rank-deficient "
                                   "or no ridge was given (set a positive ridge)");
    }

    Vector newton_conjugate(const Vector& z, const Vector* warm_start) const
    {
        const auto p = static_cast<Eigen::Index>(this->p());
        Vector theta = warm_start ? *warm_start : Vector::Zero(p);
        auto objective = [&](const Vector& t) { return value(t) - z.dot(t); };
        double f = objective(theta);
        for (int iter = 0; iter < 200; ++iter) {
            const Vector g = gradient(theta) - z;
            if (g.norm() <= 1e-10) return theta;
            const Vector step = hessian(theta).llt().solve(g);
            double t = 1.0;
            Vector next = theta - step;
            double f_next = objective(next);
            while (!(f_next <= f - 1e-4 * t * g.dot(step)) && t > 1e-12) {
                t *= 0.5;
                next = theta - t * step;
                f_next = objective(next);
            }
            if (t <= 1e-12) {
                // Armijo cannot make progress at round-off; accept the full step
                // if it reduced the gradient, otherwise stop.
                if ((gradient(theta - step) - z).norm() < g.norm()) {
                    theta -= step;
                    f = objective(theta);
                    continue;
                }
                break;
            }
            theta = next;
            f = f_next;
        }
        if ((gradient(theta) - z).norm() <= 1e-9) return theta;
        throw NumericError("Newton iteration for the conjugate did not reach gradient norm 1e-10");
    }

    std::shared_ptr<const Dataset> data_;
    LossKind kind_;
    double ridge_;
    Vector tilt_;
    Matrix gram_;
    Vector xty_;
    double yty_ = 0.0;
    double min_curv_ = 0.0;
    double max_curv_ = 0.0;
    Eigen::LLT<Matrix> normal_llt_;
};

/// Penalized ERM  min_theta Lhat(theta) + (lambda/n) Omega(theta).
class ErmProblem {
public:
    /// `ridge` defaults to auto_ridge() for the squared loss and 0 otherwise.
    ErmProblem(Dataset data, LossModel loss, SubmodularFn F, double lambda,
               std::optional<double> ridge = std::nullopt, Vector tilt = Vector())
        : ErmProblem(std::make_shared<const Dataset>(std::move(data)), loss, std::move(F), lambda, ridge,
                     std::move(tilt)) {}

    ErmProblem(std::shared_ptr<const Dataset> data, LossModel loss, SubmodularFn F, double lambda,
               std::optional<double> ridge = std::nullopt, Vector tilt = Vector())
        : loss_model_(loss),
          F_(std::move(F)),
          lambda_(lambda),
          emp_(std::make_shared<const EmpiricalLoss>(
              data, loss.kind,
              ridge ? *ridge : (loss.kind == LossKind::Squared ? auto_ridge(*data) : 0.0), std::move(tilt)))
    {
        detail::require(lambda_ > 0.0 && std::isfinite(lambda_), "lambda must be positive and finite");
        detail::require(F_.p() == data->p(), "submodular function and data disagree on p");
    }

    const Dataset& data() const noexcept { return emp_->data(); }
    const LossModel& loss_model() const noexcept { return loss_model_; }
    const SubmodularFn& F() const noexcept { return F_; }
    double lambda() const noexcept { return lambda_; }
    double n() const noexcept { return emp_->n(); }
    std::size_t p() const noexcept { return emp_->p(); }
    /// lambda / n, the scale of both the penalty and the dual polytope K.
    double penalty_scale() const noexcept { return lambda_ / n(); }
    const EmpiricalLoss& empirical() const noexcept { return *emp_; }

    ErmProblem with_lambda(double lambda) const
    {
        return ErmProblem(share_data(), loss_model_, F_, lambda, emp_->ridge(), emp_->tilt());
    }

    /// Same problem with `extra` added to the linear tilt.
    ErmProblem with_tilt(const Vector& extra) const
    {
        return ErmProblem(share_data(), loss_model_, F_, lambda_, emp_->ridge(), emp_->tilt() + extra);
    }

private:
    std::shared_ptr<const Dataset> share_data() const
    {
        return std::shared_ptr<const Dataset>(emp_, &emp_->data());
    }

    LossModel loss_model_;
    SubmodularFn F_;
    double lambda_;
    std::shared_ptr<const EmpiricalLoss> emp_;
};

struct PrimalValue {
    double loss = 0.0;    ///< (1/n) sum l + ridge term
    double linear = 0.0;  ///< tilt^T theta
    double penalty = 0.0; ///< (lambda/n) Omega(theta)
    double total = 0.0;
};

inline PrimalValue primal_objective(const ErmProblem& prob, const Vector& theta)
{
    detail::require(theta.size() == static_cast<Eigen::Index>(prob.p()) && theta.allFinite(),
                    "theta must be a finite vector of length p");
    PrimalValue v;
    v.linear = prob.empirical().tilt().dot(theta);
    v.loss = prob.empirical().value(theta) - v.linear;
    v.penalty = prob.penalty_scale() * omega_inf(prob.F(), theta);
    v.total = v.loss + v.linear + v.penalty;
    return v;
}

} // namespace dpsub
