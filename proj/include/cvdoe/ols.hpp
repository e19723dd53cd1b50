#pragma once

#include "cvdoe/term.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>

namespace cvdoe {

struct Design;

/// Relative pivot threshold used to decide numerical rank.
inline constexpr double kRankTolerance = 1e-10;

struct FittedModel {
    TermSet terms;
    Eigen::VectorXd beta;
    double rss = 0.0;
    int n = 0;
    /// rss / (n - p) when n > p.
    std::optional<double> sigma2_hat;

    Eigen::VectorXd fitted(const Eigen::MatrixXd& X) const { return X * beta; }
};

/// Least-squares fit via column-pivoted QR. Throws RankDeficientError when the
/// numerical rank is below the column count. If `terms` is non-empty it must
/// have one term per column of X.
FittedModel fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, TermSet terms = {});

/// Convenience: builds the model matrix for `terms` from the design.
FittedModel fit_ols(const Design& design, const Eigen::VectorXd& y, const TermSet& terms);

/// Numerical rank of X under kRankTolerance.
int numerical_rank(const Eigen::MatrixXd& X);

Eigen::VectorXd predict(const FittedModel& fm, const Design& design_new);
Eigen::VectorXd predict(const FittedModel& fm, const Eigen::MatrixXd& settings_new);

/// sqrt(mean((y_true - y_hat)^2)).
double rmspe(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_hat);

/// Mean of per-fold RMSPE values (mean of roots).
double rmspe_cv_aggregate(std::span<const double> per_fold);

/// Leave-one-out prediction errors e_i / (1 - h_ii) for a fixed model.
Eigen::VectorXd loo_residuals(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

} // namespace cvdoe
