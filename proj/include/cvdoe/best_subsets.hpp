#pragma once

#include "cvdoe/ols.hpp"
#include "cvdoe/term.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace cvdoe {

/// Best subset of one size.
struct SubsetEntry {
    /// Positions of the selected terms in the candidate set, ascending; the
    /// intercept is never listed.
    std::vector<int> columns;
    /// Intercept followed by the selected terms in candidate order.
    TermSet terms;
    double rss = 0.0;
    /// The winning subset has aliased columns; rss is from the rank-r fit.
    bool degenerate = false;
};

struct SubsetPath {
    /// per_size[s - 1] is the best subset with s non-intercept terms.
    std::vector<SubsetEntry> per_size;
    /// Every subset tied because the response is constant.
    bool constant_response = false;
    /// Position of the intercept in the candidate set.
    int intercept_column = 0;
    /// Search nodes expanded (diagnostic).
    std::int64_t nodes = 0;

    int s_max() const { return static_cast<int>(per_size.size()); }
    const SubsetEntry& at(int s) const;
};

/// Largest size estimable with one residual degree of freedom: min(p, n - 2).
int default_s_max(int p, int n);

/// Exact best-subsets search for sizes 1..s_max.
///
/// `X` holds one column per candidate term and the candidate set must contain
/// the intercept, which is forced into every model. The search is a depth-first
/// branch and bound over the subset lattice: a node fixes a set I and may add
/// any of the remaining free columns F; RSS(I u F) bounds every model in that
/// subtree from below, so a subtree is cut when that bound beats the incumbent
/// of every size it could still produce. Candidates are pre-ordered by greedy
/// forward selection so strong columns are branched on first.
///
/// Equal-RSS subsets (within 1e-12 of the total sum of squares) resolve to a
/// full-rank subset when one exists, then to the lexicographically smallest
/// sorted list of terms.
SubsetPath best_subsets_path(const Eigen::MatrixXd& X, const TermSet& candidates,
                             const Eigen::VectorXd& y, int s_max);

/// OLS fit of the path's size-s subset.
FittedModel refit(const SubsetPath& path, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  int s);

/// Best-subsets search on all runs followed by the OLS fit at size s_star.
FittedModel refit_full_data(const Eigen::MatrixXd& X, const TermSet& candidates,
                            const Eigen::VectorXd& y, int s_star);

/// Columns of X for a path entry: intercept first, then entry.columns.
std::vector<int> model_columns(const SubsetPath& path, const SubsetEntry& entry);

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, const std::vector<int>& cols);

} // namespace cvdoe
