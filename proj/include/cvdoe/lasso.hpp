#pragma once

#include "cvdoe/cv_select.hpp"
#include "cvdoe/term.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace cvdoe {

/// Centered and scaled predictors (sd with the 1/n denominator) and centered y.
struct Standardized {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Eigen::VectorXd x_centers;
    Eigen::VectorXd x_scales;
    double y_center = 0.0;
};

/// X must not contain the intercept column. Throws InvalidArgument on a
/// constant column unless allow_constant is set, in which case that column is
/// left at zero with scale 1 so its coefficient can never move.
Standardized standardize(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         bool allow_constant = false);

/// max_j |x_j'y| / n for standardized inputs.
double lambda_max(const Eigen::MatrixXd& X_cs, const Eigen::VectorXd& y_c);

/// n_lambda log-spaced values from lambda_max down to min_ratio * lambda_max.
Eigen::VectorXd make_lambda_grid(const Eigen::MatrixXd& X_cs, const Eigen::VectorXd& y_c,
                                 int n_lambda = 100, double min_ratio = 1e-4);

struct LassoOptions {
    int n_lambda = 100;
    double min_ratio = 1e-4;
    /// Converged when no coefficient moves more than this in a sweep.
    double tolerance = 1e-8;
    int max_sweeps = 100000;
};

struct LassoPath {
    Eigen::VectorXd lambdas;
    /// p x |lambdas|, on the standardized scale.
    Eigen::MatrixXd betas;
    Eigen::VectorXd x_centers;
    Eigen::VectorXd x_scales;
    double y_center = 0.0;

    int size() const { return static_cast<int>(lambdas.size()); }
    /// Coefficients in the original units of X at grid point j.
    Eigen::VectorXd coefficients(int j) const;
    double intercept(int j) const;
    /// Predictions at grid point j for rows of an (unstandardized) X.
    Eigen::VectorXd predict(const Eigen::MatrixXd& X, int j) const;

    /// Columns lambda, then one per coefficient (standardized scale).
    void write_csv(std::ostream& out, const std::vector<std::string>& labels) const;
};

/// Cyclic coordinate descent for (1/2n)||y_c - X_cs b||^2 + lambda ||b||_1 along a
/// descending grid with warm starts. Throws ConvergenceError after max_sweeps.
LassoPath lasso_path(const Eigen::MatrixXd& X_cs, const Eigen::VectorXd& y_c,
                     const Eigen::VectorXd& grid, const LassoOptions& opts = {});

/// Standardizes X (no intercept column) and y, builds the grid, runs the path.
LassoPath lasso_path_raw(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const LassoOptions& opts = {}, bool allow_constant = false);

/// Largest violation of the lasso optimality conditions at beta: for zero
/// coefficients |g_j| - lambda, for nonzero ones |g_j - lambda sign(b_j)|, with
/// g = X_cs'(y_c - X_cs b)/n. Nonpositive means optimal.
double kkt_violation(const Eigen::MatrixXd& X_cs, const Eigen::VectorXd& y_c,
                     const Eigen::VectorXd& beta, double lambda);

struct GaussLassoOptions {
    LassoOptions lasso;
    double gamma_factor = 0.1;
    /// Threshold at each grid point from that point's max |b| instead of the
    /// whole path's.
    bool gamma_per_lambda = false;
};

struct GaussLassoResult {
    int lambda_index = 0;
    double lambda_star = 0.0;
    /// Intercept followed by the surviving candidates.
    TermSet active_terms;
    /// Per grid point; +inf where the refit is saturated or rank deficient.
    Eigen::VectorXd bic_by_lambda;
    Eigen::VectorXd lambdas;
    /// Threshold on the standardized scale (the path-wide one unless per-lambda).
    double gamma = 0.0;
    /// Surviving candidate count per grid point.
    std::vector<int> survivors_count;
    /// OLS refit at lambda_star.
    FittedModel model;

    /// Columns lambda, survivors, bic.
    void write_csv(std::ostream& out) const;
};

/// Lasso path, threshold |b| < gamma to zero, OLS refit of the survivors with
/// intercept, BIC = n log(RSS/n) + (survivors + 1) log n, argmin over the grid
/// (smallest index on ties). X holds one column per candidate, intercept included.
GaussLassoResult gauss_lasso_select(const Eigen::MatrixXd& X, const TermSet& candidates,
                                    const Eigen::VectorXd& y, const GaussLassoOptions& opts = {});

struct LassoCvResult {
    int lambda_index = 0;
    double lambda_star = 0.0;
    Eigen::VectorXd lambdas;
    /// Mean over folds of the fold's mean squared prediction error.
    Eigen::VectorXd cv_error;
    /// Intercept followed by the candidates with nonzero coefficients at lambda_star.
    TermSet active_terms;
    /// Full-data coefficients at lambda_star in original units (no intercept).
    Eigen::VectorXd coefficients;
    double intercept = 0.0;

    /// Columns lambda, cv_error.
    void write_csv(std::ostream& out) const;
};

/// Lasso with lambda tuned by cross-validation on the full-data grid.
LassoCvResult lasso_cv_select(const Eigen::MatrixXd& X, const TermSet& candidates,
                              const Eigen::VectorXd& y, const FoldAssignment& folds,
                              const LassoOptions& opts = {});

} // namespace cvdoe
