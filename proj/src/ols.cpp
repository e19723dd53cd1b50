#include "cvdoe/ols.hpp"

#include "cvdoe/design.hpp"
#include "cvdoe/error.hpp"

#include <cmath>
#include <numeric>

namespace cvdoe {

namespace {

Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pivoted_qr(const Eigen::MatrixXd& X) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(kRankTolerance);
    return qr;
}

} // namespace

int numerical_rank(const Eigen::MatrixXd& X) {
    if (X.size() == 0) {
        return 0;
    }
    return static_cast<int>(pivoted_qr(X).rank());
}

FittedModel fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, TermSet terms) {
    if (X.rows() != y.size()) {
        throw InvalidArgument("model matrix has " + std::to_string(X.rows()) +
                              " rows but the response has " + std::to_string(y.size()));
    }
    if (!terms.empty() && terms.columns() != X.cols()) {
        throw InvalidArgument("term count does not match model-matrix columns");
    }
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());

    FittedModel fm;
    fm.terms = std::move(terms);
    fm.n = n;
    if (p == 0) {
        fm.beta.resize(0);
        fm.rss = y.squaredNorm();
    } else {
        auto qr = pivoted_qr(X);
        if (qr.rank() < p) {
            throw RankDeficientError(static_cast<int>(qr.rank()), p);
        }
        fm.beta = qr.solve(y);
        fm.rss = (y - X * fm.beta).squaredNorm();
    }
    if (n > p) {
        fm.sigma2_hat = fm.rss / (n - p);
    }
    return fm;
}

FittedModel fit_ols(const Design& design, const Eigen::VectorXd& y, const TermSet& terms) {
    return fit_ols(build_model_matrix(design, terms), y, terms);
}

Eigen::VectorXd predict(const FittedModel& fm, const Eigen::MatrixXd& settings_new) {
    if (settings_new.cols() != fm.terms.m()) {
        throw InvalidArgument("model uses " + std::to_string(fm.terms.m()) +
                              " factors but the new design has " +
                              std::to_string(settings_new.cols()));
    }
    return build_model_matrix(settings_new, fm.terms) * fm.beta;
}

Eigen::VectorXd predict(const FittedModel& fm, const Design& design_new) {
    return predict(fm, design_new.settings);
}

double rmspe(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_hat) {
    if (y_true.size() != y_hat.size()) {
        throw InvalidArgument("rmspe: length mismatch");
    }
    if (y_true.size() == 0) {
        throw InvalidArgument("rmspe: empty input");
    }
    return std::sqrt((y_true - y_hat).squaredNorm() / static_cast<double>(y_true.size()));
}

double rmspe_cv_aggregate(std::span<const double> per_fold) {
    if (per_fold.empty()) {
        throw InvalidArgument("rmspe_cv_aggregate: no folds");
    }
    return std::accumulate(per_fold.begin(), per_fold.end(), 0.0) /
           static_cast<double>(per_fold.size());
}

Eigen::VectorXd loo_residuals(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n != y.size()) {
        throw InvalidArgument("loo_residuals: row mismatch");
    }
    if (n <= p) {
        throw InvalidArgument("loo_residuals needs more runs than columns");
    }
    auto qr = pivoted_qr(X);
    if (qr.rank() < p) {
        throw RankDeficientError(static_cast<int>(qr.rank()), static_cast<int>(p));
    }
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
    const Eigen::VectorXd leverage = Q.rowwise().squaredNorm();
    const Eigen::VectorXd resid = y - Q * (Q.transpose() * y);
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double denom = 1.0 - leverage(i);
        if (denom <= 1e-10) {
            throw LeverageError(static_cast<int>(i));
        }
        out(i) = resid(i) / denom;
    }
    return out;
}

} // namespace cvdoe
