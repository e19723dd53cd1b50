#include "cvdoe/little_bootstrap.hpp"

#include "cvdoe/best_subsets.hpp"
#include "cvdoe/error.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace cvdoe {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct CenteredSvd {
    Eigen::VectorXd d;    // singular values
    Eigen::VectorXd uty;  // U' y_c
    double tss = 0.0;
    double mean_diag = 0.0;
    int n = 0;
};

CenteredSvd centered_svd(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) {
        throw InvalidArgument("ridge: row counts of X and y differ");
    }
    if (y.size() < 2) {
        throw InvalidArgument("ridge: need at least two runs");
    }
    const Eigen::MatrixXd Xc = X.rowwise() - X.colwise().mean();
    const Eigen::VectorXd yc = y.array() - y.mean();
    CenteredSvd out;
    out.n = static_cast<int>(y.size());
    out.tss = yc.squaredNorm();
    out.mean_diag = X.cols() > 0 ? Xc.colwise().squaredNorm().mean() / out.n : 0.0;
    if (X.cols() > 0) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(Xc, Eigen::ComputeThinU);
        out.d = svd.singularValues();
        out.uty = svd.matrixU().transpose() * yc;
    }
    return out;
}

RidgeVariance ridge_from_svd(const CenteredSvd& c, double lambda) {
    RidgeVariance r;
    r.lambda = lambda;
    double df = 1.0;
    double rss_reduction = 0.0;
    for (Eigen::Index i = 0; i < c.d.size(); ++i) {
        const double d2 = c.d(i) * c.d(i);
        const double shrink = d2 / (d2 + lambda);
        df += shrink;
        const double u = c.uty(i);
        // Residual of y_c along u_i is (1 - shrink) u.
        rss_reduction += u * u * (1.0 - (1.0 - shrink) * (1.0 - shrink));
    }
    const double rss = std::max(0.0, c.tss - rss_reduction);
    r.df = df;
    const double resid_df = c.n - df;
    if (resid_df <= 1e-8) {
        r.sigma2 = kNaN;
        r.gcv = std::numeric_limits<double>::infinity();
        return r;
    }
    r.sigma2 = rss / resid_df;
    r.gcv = c.n * rss / (resid_df * resid_df);
    return r;
}

} // namespace

double estimate_sigma2(const Eigen::MatrixXd& X_full, const Eigen::VectorXd& y) {
    if (X_full.rows() <= X_full.cols()) {
        throw InvalidArgument("estimate_sigma2 needs more runs than columns; use the ridge estimate");
    }
    return *fit_ols(X_full, y).sigma2_hat;
}

RidgeVariance ridge_variance_at(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
    if (!(lambda > 0.0)) {
        throw InvalidArgument("ridge penalty must be positive");
    }
    const RidgeVariance r = ridge_from_svd(centered_svd(X, y), lambda);
    if (std::isnan(r.sigma2)) {
        throw Error("ridge fit leaves no residual degrees of freedom");
    }
    return r;
}

RidgeVariance ridge_variance_estimate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      int n_grid) {
    if (n_grid < 2) {
        throw InvalidArgument("ridge grid needs at least two points");
    }
    const CenteredSvd c = centered_svd(X, y);
    const double scale = c.mean_diag > 0.0 ? c.mean_diag : 1.0;
    RidgeVariance best;
    best.gcv = std::numeric_limits<double>::infinity();
    bool found = false;
    for (int i = 0; i < n_grid; ++i) {
        const double expo = -4.0 + 8.0 * i / (n_grid - 1);
        const RidgeVariance r = ridge_from_svd(c, scale * std::pow(10.0, expo));
        if (!std::isnan(r.sigma2) && r.gcv < best.gcv) {
            best = r;
            found = true;
        }
    }
    if (!found) {
        throw Error("ridge variance estimate: every grid penalty leaves no residual degrees of freedom");
    }
    return best;
}

void LbTrace::write_csv(std::ostream& out) const {
    out << "size,rss,bbar,pe\n";
    auto cell = [&](double v) {
        if (!std::isnan(v)) {
            out << v;
        }
    };
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        const auto i = static_cast<Eigen::Index>(j);
        out << sizes[j] << ',';
        cell(rss_by_size(i));
        out << ',';
        cell(bbar_by_size(i));
        out << ',';
        cell(pe_by_size(i));
        out << '\n';
    }
}

double perturbation_sd(double sigma2, const LbOptions& opts) {
    if (!(sigma2 >= 0.0)) {
        throw InvalidArgument("sigma2 must be nonnegative");
    }
    if (!(opts.t > 0.0 && opts.t <= 1.0)) {
        throw InvalidArgument("little bootstrap t must lie in (0, 1]");
    }
    if (opts.n_bootstrap < 1) {
        throw InvalidArgument("n_bootstrap must be at least 1");
    }
    return opts.variance_literal ? std::sqrt(opts.t * sigma2) : opts.t * std::sqrt(sigma2);
}

Eigen::VectorXd fixed_projection_bias(const Eigen::MatrixXd& basis, const Eigen::VectorXd& y,
                                      double sigma2, const LbOptions& opts, Rng& rng) {
    const double sd = perturbation_sd(sigma2, opts);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(basis.rows(), basis.cols());
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd out(opts.n_bootstrap);
    Eigen::VectorXd e(y.size());
    for (int b = 0; b < opts.n_bootstrap; ++b) {
        for (Eigen::Index i = 0; i < e.size(); ++i) {
            e(i) = sd * normal(rng);
        }
        const Eigen::VectorXd yt = y + e;
        out(b) = e.dot(Q * (Q.transpose() * yt)) / (opts.t * opts.t);
    }
    return out;
}

namespace {

SubsetPath lb_path(const Eigen::MatrixXd& X, const TermSet& candidates, const Eigen::VectorXd& y,
                   const LbOptions& opts) {
    const int s_max = opts.s_max < 0 ? default_s_max(candidates.size(), static_cast<int>(X.rows()))
                                     : opts.s_max;
    return best_subsets_path(X, candidates, y, s_max);
}

LbTrace lb_on_path(const SubsetPath& path, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   double sigma2, const LbOptions& opts, Rng& rng) {
    const double sd = perturbation_sd(sigma2, opts);
    const int n = static_cast<int>(X.rows());
    const int s_max = path.s_max();

    LbTrace tr;
    tr.t = opts.t;
    tr.n_bootstrap = opts.n_bootstrap;
    tr.sigma2_used = sigma2;
    const int n_sizes = s_max;
    tr.sizes.resize(static_cast<std::size_t>(n_sizes));
    tr.rss_by_size = Eigen::VectorXd::Constant(n_sizes, kNaN);
    tr.bbar_by_size = Eigen::VectorXd::Constant(n_sizes, kNaN);
    tr.pe_by_size = Eigen::VectorXd::Constant(n_sizes, kNaN);

    // Orthonormal bases of the frozen per-size models.
    std::vector<Eigen::MatrixXd> bases(static_cast<std::size_t>(n_sizes));
    for (int s = 1; s <= n_sizes; ++s) {
        tr.sizes[static_cast<std::size_t>(s - 1)] = s;
        const SubsetEntry& e = path.at(s);
        if (e.degenerate) {
            continue;
        }
        const Eigen::MatrixXd Xs = select_columns(X, model_columns(path, e));
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(Xs);
        bases[static_cast<std::size_t>(s - 1)] =
            qr.householderQ() * Eigen::MatrixXd::Identity(n, Xs.cols());
        tr.rss_by_size(s - 1) = e.rss;
        tr.bbar_by_size(s - 1) = 0.0;
    }

    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd eps(n);
    for (int b = 0; b < opts.n_bootstrap; ++b) {
        for (int i = 0; i < n; ++i) {
            eps(i) = sd * normal(rng);
        }
        const Eigen::VectorXd yt = y + eps;
        for (int j = 0; j < n_sizes; ++j) {
            const auto& Q = bases[static_cast<std::size_t>(j)];
            if (Q.size() == 0) {
                continue;
            }
            tr.bbar_by_size(j) += eps.dot(Q * (Q.transpose() * yt)) / (opts.t * opts.t);
        }
    }
    const double tie = 1e-10 * (y.array() - y.mean()).square().sum();
    int best = -1;
    for (int j = 0; j < n_sizes; ++j) {
        if (std::isnan(tr.rss_by_size(j))) {
            continue;
        }
        tr.bbar_by_size(j) /= opts.n_bootstrap;
        tr.pe_by_size(j) = tr.rss_by_size(j) + 2.0 * tr.bbar_by_size(j);
        if (best < 0 || tr.pe_by_size(j) < tr.pe_by_size(best) - tie) {
            best = j;
        }
    }
    if (best < 0) {
        throw SelectionFailure("little bootstrap: every subset size was degenerate");
    }
    tr.s_star = tr.sizes[static_cast<std::size_t>(best)];
    return tr;
}

} // namespace

LbTrace lb_select(const Eigen::MatrixXd& X, const TermSet& candidates, const Eigen::VectorXd& y,
                  double sigma2, const LbOptions& opts, Rng& rng) {
    perturbation_sd(sigma2, opts);
    return lb_on_path(lb_path(X, candidates, y, opts), X, y, sigma2, opts, rng);
}

LbSelection lb_select_and_refit(const Eigen::MatrixXd& X, const TermSet& candidates,
                                const Eigen::VectorXd& y, double sigma2, const LbOptions& opts,
                                Rng& rng) {
    LbSelection out;
    perturbation_sd(sigma2, opts);
    const SubsetPath path = lb_path(X, candidates, y, opts);
    out.trace = lb_on_path(path, X, y, sigma2, opts, rng);
    out.model = refit(path, X, y, out.trace.s_star);
    return out;
}

} // namespace cvdoe
