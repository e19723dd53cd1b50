#include "cvdoe/cv_select.hpp"

#include "cvdoe/design.hpp"
#include "cvdoe/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace cvdoe {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
    }
    return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<int>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = v(rows[i]);
    }
    return out;
}

// Held-out RMSPE of an OLS fit on the given columns; NaN when not estimable.
double score(const Eigen::MatrixXd& Xtr, const Eigen::VectorXd& ytr, const Eigen::MatrixXd& Xte,
             const Eigen::VectorXd& yte, const std::vector<int>& cols) {
    try {
        const FittedModel fm = fit_ols(select_columns(Xtr, cols), ytr);
        return rmspe(yte, select_columns(Xte, cols) * fm.beta);
    } catch (const RankDeficientError&) {
        return kNaN;
    }
}

} // namespace

std::vector<int> FoldAssignment::members(int f) const {
    std::vector<int> out;
    for (int i = 0; i < n(); ++i) {
        if (fold_of[static_cast<std::size_t>(i)] == f) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<int> FoldAssignment::complement(int f) const {
    std::vector<int> out;
    for (int i = 0; i < n(); ++i) {
        if (fold_of[static_cast<std::size_t>(i)] != f) {
            out.push_back(i);
        }
    }
    return out;
}

int FoldAssignment::min_training_size() const {
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int f : fold_of) {
        ++counts[static_cast<std::size_t>(f)];
    }
    return n() - *std::max_element(counts.begin(), counts.end());
}

FoldAssignment make_folds(int n, int k, Rng& rng) {
    if (k < 2 || k > n) {
        throw InvalidArgument("fold count " + std::to_string(k) + " outside [2, " +
                              std::to_string(n) + "]");
    }
    FoldAssignment fa;
    fa.k = k;
    fa.fold_of.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        fa.fold_of[static_cast<std::size_t>(i)] = i % k;
    }
    for (int i = n - 1; i > 0; --i) {
        std::uniform_int_distribution<int> pick(0, i);
        std::swap(fa.fold_of[static_cast<std::size_t>(i)],
                  fa.fold_of[static_cast<std::size_t>(pick(rng))]);
    }
    return fa;
}

void CvTrace::write_csv(std::ostream& out) const {
    out << "fold";
    for (int s : sizes) {
        out << ",s" << s;
    }
    out << '\n';
    for (Eigen::Index f = 0; f < rmspe.rows(); ++f) {
        out << f;
        for (Eigen::Index j = 0; j < rmspe.cols(); ++j) {
            out << ',';
            if (!std::isnan(rmspe(f, j))) {
                out << rmspe(f, j);
            }
        }
        out << '\n';
    }
    out << "mean";
    for (Eigen::Index j = 0; j < mean_by_size.size(); ++j) {
        out << ',';
        if (!std::isnan(mean_by_size(j))) {
            out << mean_by_size(j);
        }
    }
    out << '\n';
}

int cv_default_s_max(const FoldAssignment& folds, int p) {
    return std::max(0, std::min(p, folds.min_training_size() - 2));
}

CvTrace cv_select_size(const Eigen::MatrixXd& X, const TermSet& candidates,
                       const Eigen::VectorXd& y, const FoldAssignment& folds, int s_max) {
    if (X.rows() != y.size() || folds.n() != y.size()) {
        throw InvalidArgument("cv_select_size: row counts of X, y and folds differ");
    }
    const int p = candidates.size();
    const int limit = cv_default_s_max(folds, p);
    if (s_max < 0) {
        s_max = limit;
    }
    if (s_max > limit) {
        throw InvalidArgument("s_max " + std::to_string(s_max) +
                              " leaves a training fold without residual degrees of freedom");
    }

    CvTrace tr;
    if (p == 0 || s_max == 0) {
        tr.sizes = {0};
    } else {
        tr.sizes.resize(static_cast<std::size_t>(s_max));
        std::iota(tr.sizes.begin(), tr.sizes.end(), 1);
    }
    const auto n_sizes = static_cast<Eigen::Index>(tr.sizes.size());
    tr.rmspe.resize(folds.k, n_sizes);

    for (int f = 0; f < folds.k; ++f) {
        const std::vector<int> train = folds.complement(f);
        const std::vector<int> test = folds.members(f);
        const Eigen::MatrixXd Xtr = take_rows(X, train);
        const Eigen::MatrixXd Xte = take_rows(X, test);
        const Eigen::VectorXd ytr = take(y, train);
        const Eigen::VectorXd yte = take(y, test);
        if (tr.sizes.front() == 0) {
            tr.rmspe(f, 0) = score(Xtr, ytr, Xte, yte, {candidates.intercept_index()});
            continue;
        }
        const SubsetPath path = best_subsets_path(Xtr, candidates, ytr, s_max);
        for (int s = 1; s <= s_max; ++s) {
            const SubsetEntry& e = path.at(s);
            tr.rmspe(f, s - 1) = e.degenerate ? kNaN : score(Xtr, ytr, Xte, yte, model_columns(path, e));
        }
    }

    tr.mean_by_size.resize(n_sizes);
    // Differences below this are roundoff; the smaller size wins.
    const double tie = 1e-10 * std::sqrt((y.array() - y.mean()).square().mean());
    int best = -1;
    for (Eigen::Index j = 0; j < n_sizes; ++j) {
        double sum = 0.0;
        int count = 0;
        for (Eigen::Index f = 0; f < tr.rmspe.rows(); ++f) {
            if (!std::isnan(tr.rmspe(f, j))) {
                sum += tr.rmspe(f, j);
                ++count;
            }
        }
        tr.mean_by_size(j) = count > 0 ? sum / count : kNaN;
        if (count > 0 && (best < 0 || tr.mean_by_size(j) < tr.mean_by_size(best) - tie)) {
            best = static_cast<int>(j);
        }
    }
    if (best < 0) {
        throw SelectionFailure("cross-validation: every subset size was degenerate");
    }
    tr.s_star = tr.sizes[static_cast<std::size_t>(best)];
    return tr;
}

CvTrace cv_select_size(const Design& design, const Eigen::VectorXd& y, const TermSet& candidates,
                       int k, Rng& rng, int s_max) {
    const FoldAssignment folds = make_folds(design.n(), k, rng);
    return cv_select_size(build_model_matrix(design, candidates), candidates, y, folds, s_max);
}

CvSelection cv_select_and_refit(const Eigen::MatrixXd& X, const TermSet& candidates,
                                const Eigen::VectorXd& y, const FoldAssignment& folds, int s_max) {
    CvSelection out;
    out.trace = cv_select_size(X, candidates, y, folds, s_max);
    if (out.trace.s_star == 0) {
        const int icpt = candidates.intercept_index();
        out.model = fit_ols(select_columns(X, {icpt}), y, candidates.subset({icpt}));
    } else {
        out.model = refit_full_data(X, candidates, y, out.trace.s_star);
    }
    return out;
}

CvSelection cv_select_and_refit(const Design& design, const Eigen::VectorXd& y,
                                const TermSet& candidates, int k, Rng& rng, int s_max) {
    const FoldAssignment folds = make_folds(design.n(), k, rng);
    return cv_select_and_refit(build_model_matrix(design, candidates), candidates, y, folds, s_max);
}

} // namespace cvdoe
