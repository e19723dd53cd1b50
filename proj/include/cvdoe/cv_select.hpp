#pragma once

#include "cvdoe/best_subsets.hpp"
#include "cvdoe/ols.hpp"
#include "cvdoe/rng.hpp"
#include "cvdoe/term.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace cvdoe {

struct Design;

struct FoldAssignment {
    std::vector<int> fold_of;
    int k = 0;

    int n() const { return static_cast<int>(fold_of.size()); }
    /// Rows in fold f, ascending.
    std::vector<int> members(int f) const;
    /// Rows outside fold f, ascending.
    std::vector<int> complement(int f) const;
    /// Size of the smallest training set (n minus the largest fold).
    int min_training_size() const;
};

/// Balanced random partition of n runs into k folds; sizes differ by at most 1.
FoldAssignment make_folds(int n, int k, Rng& rng);

/// Cross-validation trace for best-subsets size selection.
struct CvTrace {
    /// Subset size of each column; normally 1..s_max. An intercept-only
    /// candidate set has the single size 0.
    std::vector<int> sizes;
    /// rmspe(f, j): RMSPE on fold f of the best subset of size sizes[j] fitted
    /// on the other folds. NaN marks a degenerate cell.
    Eigen::MatrixXd rmspe;
    /// Column means over non-degenerate cells; NaN when the whole column is.
    Eigen::VectorXd mean_by_size;
    int s_star = 0;

    int k() const { return static_cast<int>(rmspe.rows()); }
    /// Rows are folds, columns are sizes.
    void write_csv(std::ostream& out) const;
};

/// Largest size every training set can estimate with a residual degree of
/// freedom: min(p, smallest training size - 2).
int cv_default_s_max(const FoldAssignment& folds, int p);

/// Per fold and size, fits the best subset of that size on the training
/// folds and scores it on the held-out fold. A negative s_max means
/// cv_default_s_max. Throws SelectionFailure when every size is degenerate.
CvTrace cv_select_size(const Eigen::MatrixXd& X, const TermSet& candidates,
                       const Eigen::VectorXd& y, const FoldAssignment& folds, int s_max = -1);

CvTrace cv_select_size(const Design& design, const Eigen::VectorXd& y, const TermSet& candidates,
                       int k, Rng& rng, int s_max = -1);

struct CvSelection {
    FittedModel model;
    CvTrace trace;
};

/// cv_select_size followed by the best-subsets refit on all runs at s_star.
CvSelection cv_select_and_refit(const Eigen::MatrixXd& X, const TermSet& candidates,
                                const Eigen::VectorXd& y, const FoldAssignment& folds,
                                int s_max = -1);

CvSelection cv_select_and_refit(const Design& design, const Eigen::VectorXd& y,
                                const TermSet& candidates, int k, Rng& rng, int s_max = -1);

} // namespace cvdoe
