#pragma once

#include "cvdoe/ols.hpp"
#include "cvdoe/rng.hpp"
#include "cvdoe/term.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace cvdoe {

/// RSS of the full model over (n - p). Throws InvalidArgument when n <= p and
/// RankDeficientError when X is not of full column rank.
double estimate_sigma2(const Eigen::MatrixXd& X_full, const Eigen::VectorXd& y);

struct RidgeVariance {
    double sigma2 = 0.0;
    double lambda = 0.0;
    /// Effective degrees of freedom, intercept included.
    double df = 0.0;
    double gcv = 0.0;
};

/// Ridge fit with an unpenalized intercept: X and y are centered, constant
/// columns drop out. sigma2 = RSS / (n - df) with df = 1 + sum d^2 / (d^2 + lambda)
/// over the singular values d of the centered X.
RidgeVariance ridge_variance_at(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda);

/// ridge_variance_at with lambda chosen by generalized cross-validation over
/// n_grid log-spaced values in [1e-4, 1e4] times the mean diagonal of X'X/n
/// (centered X). Works for any n and p.
RidgeVariance ridge_variance_estimate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      int n_grid = 50);

struct LbOptions {
    double t = 0.6;
    int n_bootstrap = 25;
    /// Negative: min(p, n - 2).
    int s_max = -1;
    /// Perturb with variance t * sigma2 instead of (t * sigma)^2.
    bool variance_literal = false;
};

struct LbTrace {
    std::vector<int> sizes;
    /// NaN entries mark degenerate sizes.
    Eigen::VectorXd rss_by_size;
    Eigen::VectorXd bbar_by_size;
    Eigen::VectorXd pe_by_size;
    int s_star = 0;
    double t = 0.0;
    int n_bootstrap = 0;
    double sigma2_used = 0.0;

    void write_csv(std::ostream& out) const;
};

/// Standard deviation of the perturbation for the given options.
double perturbation_sd(double sigma2, const LbOptions& opts);

/// Bias terms (1/t^2) e'H(y + e) for n_bootstrap perturbations e, with H the
/// projection onto the columns of `basis`.
Eigen::VectorXd fixed_projection_bias(const Eigen::MatrixXd& basis, const Eigen::VectorXd& y,
                                      double sigma2, const LbOptions& opts, Rng& rng);

/// Little bootstrap size selection. Subsets come from best subsets on the
/// original y and stay fixed while y is perturbed. PE_s = RSS_s + 2 Bbar_s;
/// s_star is its argmin (smallest s on ties). Throws SelectionFailure when
/// every size is degenerate.
LbTrace lb_select(const Eigen::MatrixXd& X, const TermSet& candidates, const Eigen::VectorXd& y,
                  double sigma2, const LbOptions& opts, Rng& rng);

struct LbSelection {
    FittedModel model;
    LbTrace trace;
};

LbSelection lb_select_and_refit(const Eigen::MatrixXd& X, const TermSet& candidates,
                                const Eigen::VectorXd& y, double sigma2, const LbOptions& opts,
                                Rng& rng);

} // namespace cvdoe
