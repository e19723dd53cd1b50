#include "cvdoe/lasso.hpp"

#include "cvdoe/best_subsets.hpp"
#include "cvdoe/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

namespace cvdoe {

namespace {

double soft_threshold(double z, double lambda) {
    if (z > lambda) {
        return z - lambda;
    }
    if (z < -lambda) {
        return z + lambda;
    }
    return 0.0;
}

// Candidate positions other than the intercept, in candidate order.
std::vector<int> predictor_positions(const TermSet& candidates) {
    std::vector<int> out;
    for (int j = 0; j < candidates.columns(); ++j) {
        if (!candidates[j].is_intercept()) {
            out.push_back(j);
        }
    }
    return out;
}

void check_inputs(const Eigen::MatrixXd& X, const TermSet& candidates, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) {
        throw InvalidArgument("lasso: row counts of X and y differ");
    }
    if (X.cols() != candidates.columns()) {
        throw InvalidArgument("lasso: one term per column required");
    }
    if (!candidates.has_intercept()) {
        throw InvalidArgument("lasso: candidate set must contain the intercept");
    }
}

TermSet with_positions(const TermSet& candidates, const std::vector<int>& positions,
                       const std::vector<int>& chosen) {
    std::vector<int> idx{candidates.intercept_index()};
    for (int k : chosen) {
        idx.push_back(positions[static_cast<std::size_t>(k)]);
    }
    return candidates.subset(idx);
}

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

} // namespace

Standardized standardize(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool allow_constant) {
    if (X.rows() != y.size()) {
        throw InvalidArgument("standardize: row counts of X and y differ");
    }
    if (X.rows() == 0) {
        throw InvalidArgument("standardize: no runs");
    }
    const double n = static_cast<double>(X.rows());
    Standardized s;
    s.x_centers = X.colwise().mean().transpose();
    s.X = X.rowwise() - s.x_centers.transpose();
    s.x_scales.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double sd = std::sqrt(s.X.col(j).squaredNorm() / n);
        const double ref = std::max(1.0, X.col(j).cwiseAbs().maxCoeff());
        if (sd <= 1e-12 * ref) {
            if (!allow_constant) {
                throw InvalidArgument("standardize: column " + std::to_string(j) + " is constant");
            }
            s.X.col(j).setZero();
            s.x_scales(j) = 1.0;
        } else {
            s.X.col(j) /= sd;
            s.x_scales(j) = sd;
        }
    }
    s.y_center = y.mean();
    s.y = y.array() - s.y_center;
    return s;
}

double lambda_max(const Eigen::MatrixXd& X_cs, const Eigen::VectorXd& y_c) {
    if (X_cs.cols() == 0) {
        return 0.0;
    }
    return (X_cs.transpose() * y_c).cwiseAbs().maxCoeff() / static_cast<double>(X_cs.rows());
}

Eigen::VectorXd make_lambda_grid(const Eigen::MatrixXd& X_cs, const Eigen::VectorXd& y_c,
                                 int n_lambda, double min_ratio) {
    if (n_lambda < 2) {
        throw InvalidArgument("lambda grid needs at least two points");
    }
    if (!(min_ratio > 0.0 && min_ratio < 1.0)) {
        throw InvalidArgument("lambda grid ratio must lie in (0, 1)");
    }
    const double top = lambda_max(X_cs, y_c);
    Eigen::VectorXd grid(n_lambda);
    for (int i = 0; i < n_lambda; ++i) {
        grid(i) = top * std::pow(min_ratio, static_cast<double>(i) / (n_lambda - 1));
    }
    return grid;
}

Eigen::VectorXd LassoPath::coefficients(int j) const {
    return betas.col(j).cwiseQuotient(x_scales);
}

double LassoPath::intercept(int j) const { return y_center - x_centers.dot(coefficients(j)); }

Eigen::VectorXd LassoPath::predict(const Eigen::MatrixXd& X, int j) const {
    if (X.cols() != x_centers.size()) {
        throw InvalidArgument("lasso predict: column count mismatch");
    }
    return (X * coefficients(j)).array() + intercept(j);
}

void LassoPath::write_csv(std::ostream& out, const std::vector<std::string>& labels) const {
    out << "lambda";
    for (Eigen::Index k = 0; k < betas.rows(); ++k) {
        out << ',' << (static_cast<std::size_t>(k) < labels.size() ? labels[static_cast<std::size_t>(k)]
                                                                   : "b" + std::to_string(k));
    }
    out << '\n';
    for (Eigen::Index j = 0; j < lambdas.size(); ++j) {
        out << lambdas(j);
        for (Eigen::Index k = 0; k < betas.rows(); ++k) {
            out << ',' << betas(k, j);
        }
        out << '\n';
    }
}

LassoPath lasso_path(const Eigen::MatrixXd& X_cs, const Eigen::VectorXd& y_c,
                     const Eigen::VectorXd& grid, const LassoOptions& opts) {
    if (X_cs.rows() != y_c.size()) {
        throw InvalidArgument("lasso_path: row counts of X and y differ");
    }
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        if (!(grid(i) >= 0.0) || (i > 0 && grid(i) > grid(i - 1))) {
            throw InvalidArgument("lasso_path: grid must be nonnegative and descending");
        }
    }
    const Eigen::Index n = X_cs.rows();
    const Eigen::Index p = X_cs.cols();
    const double inv_n = 1.0 / static_cast<double>(n);

    LassoPath path;
    path.lambdas = grid;
    path.betas.resize(p, grid.size());
    path.x_centers = Eigen::VectorXd::Zero(p);
    path.x_scales = Eigen::VectorXd::Ones(p);

    const Eigen::VectorXd col_ss = X_cs.colwise().squaredNorm().transpose() * inv_n;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd r = y_c;
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        const double lambda = grid(g);
        int sweep = 0;
        for (;; ++sweep) {
            if (sweep >= opts.max_sweeps) {
                throw ConvergenceError(static_cast<int>(g), sweep);
            }
            double max_delta = 0.0;
            for (Eigen::Index j = 0; j < p; ++j) {
                const double c = col_ss(j);
                if (c <= 0.0) {
                    continue;
                }
                const double old = beta(j);
                const double z = X_cs.col(j).dot(r) * inv_n + c * old;
                const double updated = soft_threshold(z, lambda) / c;
                const double delta = updated - old;
                if (delta != 0.0) {
                    r.noalias() -= delta * X_cs.col(j);
                    beta(j) = updated;
                    max_delta = std::max(max_delta, std::abs(delta));
                }
            }
            if (max_delta < opts.tolerance) {
                break;
            }
        }
        path.betas.col(g) = beta;
    }
    return path;
}

LassoPath lasso_path_raw(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const LassoOptions& opts, bool allow_constant) {
    const Standardized s = standardize(X, y, allow_constant);
    LassoPath path = lasso_path(s.X, s.y, make_lambda_grid(s.X, s.y, opts.n_lambda, opts.min_ratio), opts);
    path.x_centers = s.x_centers;
    path.x_scales = s.x_scales;
    path.y_center = s.y_center;
    return path;
}

double kkt_violation(const Eigen::MatrixXd& X_cs, const Eigen::VectorXd& y_c,
                     const Eigen::VectorXd& beta, double lambda) {
    const Eigen::VectorXd g =
        X_cs.transpose() * (y_c - X_cs * beta) / static_cast<double>(X_cs.rows());
    double worst = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double v = beta(j) == 0.0 ? std::abs(g(j)) - lambda
                                        : std::abs(g(j) - lambda * (beta(j) > 0.0 ? 1.0 : -1.0));
        worst = std::max(worst, v);
    }
    return worst;
}

void GaussLassoResult::write_csv(std::ostream& out) const {
    out << "lambda,survivors,bic\n";
    for (Eigen::Index j = 0; j < lambdas.size(); ++j) {
        out << lambdas(j) << ',' << survivors_count[static_cast<std::size_t>(j)] << ',';
        if (std::isfinite(bic_by_lambda(j))) {
            out << bic_by_lambda(j);
        } else {
            out << (bic_by_lambda(j) > 0 ? "inf" : "-inf");
        }
        out << '\n';
    }
}

GaussLassoResult gauss_lasso_select(const Eigen::MatrixXd& X, const TermSet& candidates,
                                    const Eigen::VectorXd& y, const GaussLassoOptions& opts) {
    check_inputs(X, candidates, y);
    if (!(opts.gamma_factor >= 0.0)) {
        throw InvalidArgument("gamma factor must be nonnegative");
    }
    const std::vector<int> positions = predictor_positions(candidates);
    const Eigen::MatrixXd Xp = select_columns(X, positions);
    const LassoPath path = lasso_path_raw(Xp, y, opts.lasso);
    const int n = static_cast<int>(X.rows());
    const int icpt = candidates.intercept_index();

    GaussLassoResult res;
    res.lambdas = path.lambdas;
    res.bic_by_lambda.resize(path.size());
    res.survivors_count.resize(static_cast<std::size_t>(path.size()));
    res.gamma = path.betas.size() > 0 ? opts.gamma_factor * path.betas.cwiseAbs().maxCoeff() : 0.0;

    std::map<std::vector<int>, double> cache;
    std::vector<std::vector<int>> chosen(static_cast<std::size_t>(path.size()));
    for (int j = 0; j < path.size(); ++j) {
        const auto b = path.betas.col(j);
        const double gamma =
            opts.gamma_per_lambda ? opts.gamma_factor * (b.size() > 0 ? b.cwiseAbs().maxCoeff() : 0.0)
                                  : res.gamma;
        std::vector<int>& keep = chosen[static_cast<std::size_t>(j)];
        for (Eigen::Index k = 0; k < b.size(); ++k) {
            if (b(k) != 0.0 && std::abs(b(k)) >= gamma) {
                keep.push_back(static_cast<int>(k));
            }
        }
        res.survivors_count[static_cast<std::size_t>(j)] = static_cast<int>(keep.size());
        auto it = cache.find(keep);
        if (it == cache.end()) {
            double bic = std::numeric_limits<double>::infinity();
            const int cols = static_cast<int>(keep.size()) + 1;
            if (cols < n) {
                std::vector<int> xcols{icpt};
                for (int k : keep) {
                    xcols.push_back(positions[static_cast<std::size_t>(k)]);
                }
                try {
                    const FittedModel fm = fit_ols(select_columns(X, xcols), y);
                    bic = n * std::log(fm.rss / n) + cols * std::log(static_cast<double>(n));
                } catch (const RankDeficientError&) {
                }
            }
            it = cache.emplace(keep, bic).first;
        }
        res.bic_by_lambda(j) = it->second;
    }

    int best = 0;
    for (int j = 1; j < path.size(); ++j) {
        if (res.bic_by_lambda(j) < res.bic_by_lambda(best)) {
            best = j;
        }
    }
    res.lambda_index = best;
    res.lambda_star = path.lambdas(best);
    const std::vector<int>& keep = chosen[static_cast<std::size_t>(best)];
    res.active_terms = with_positions(candidates, positions, keep);
    std::vector<int> xcols{icpt};
    for (int k : keep) {
        xcols.push_back(positions[static_cast<std::size_t>(k)]);
    }
    if (res.bic_by_lambda(best) == std::numeric_limits<double>::infinity()) {
        throw SelectionFailure("Gauss-Lasso: no grid point gives an estimable refit");
    }
    res.model = fit_ols(select_columns(X, xcols), y, res.active_terms);
    return res;
}

void LassoCvResult::write_csv(std::ostream& out) const {
    out << "lambda,cv_error\n";
    for (Eigen::Index j = 0; j < lambdas.size(); ++j) {
        out << lambdas(j) << ',' << cv_error(j) << '\n';
    }
}

LassoCvResult lasso_cv_select(const Eigen::MatrixXd& X, const TermSet& candidates,
                              const Eigen::VectorXd& y, const FoldAssignment& folds,
                              const LassoOptions& opts) {
    check_inputs(X, candidates, y);
    if (folds.n() != y.size()) {
        throw InvalidArgument("lasso_cv_select: fold assignment does not match the run count");
    }
    const std::vector<int> positions = predictor_positions(candidates);
    const Eigen::MatrixXd Xp = select_columns(X, positions);
    const Standardized full = standardize(Xp, y);
    const Eigen::VectorXd grid = make_lambda_grid(full.X, full.y, opts.n_lambda, opts.min_ratio);

    LassoCvResult res;
    res.lambdas = grid;
    res.cv_error = Eigen::VectorXd::Zero(grid.size());
    for (int f = 0; f < folds.k; ++f) {
        const std::vector<int> train = folds.complement(f);
        const std::vector<int> test = folds.members(f);
        const Standardized s = standardize(take_rows(Xp, train), take(y, train), true);
        LassoPath path = lasso_path(s.X, s.y, grid, opts);
        path.x_centers = s.x_centers;
        path.x_scales = s.x_scales;
        path.y_center = s.y_center;
        const Eigen::MatrixXd Xte = take_rows(Xp, test);
        const Eigen::VectorXd yte = take(y, test);
        for (int j = 0; j < path.size(); ++j) {
            res.cv_error(j) += (yte - path.predict(Xte, j)).squaredNorm() / static_cast<double>(test.size());
        }
    }
    res.cv_error /= folds.k;

    int best = 0;
    for (Eigen::Index j = 1; j < grid.size(); ++j) {
        if (res.cv_error(j) < res.cv_error(best)) {
            best = static_cast<int>(j);
        }
    }
    res.lambda_index = best;
    res.lambda_star = grid(best);

    LassoPath path = lasso_path(full.X, full.y, grid.head(best + 1), opts);
    path.x_centers = full.x_centers;
    path.x_scales = full.x_scales;
    path.y_center = full.y_center;
    res.coefficients = path.coefficients(best);
    res.intercept = path.intercept(best);
    std::vector<int> keep;
    for (Eigen::Index k = 0; k < res.coefficients.size(); ++k) {
        if (res.coefficients(k) != 0.0) {
            keep.push_back(static_cast<int>(k));
        }
    }
    res.active_terms = with_positions(candidates, positions, keep);
    return res;
}

} // namespace cvdoe
