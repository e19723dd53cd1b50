#include "cvdoe/error.hpp"
#include "cvdoe/lasso.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace cvdoe;

namespace {

Eigen::MatrixXd gaussian(int n, int p, std::mt19937_64& gen) {
    std::normal_distribution<double> N(0.0, 1.0);
    Eigen::MatrixXd X(n, p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) {
            X(i, j) = N(gen);
        }
    }
    return X;
}

// +-1 columns of a 2^k factorial: centered, unit 1/n variance, orthogonal.
Eigen::MatrixXd factorial_columns(int k) {
    const int n = 1 << k;
    Eigen::MatrixXd X(n, k);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) {
            X(i, j) = (i >> j) & 1 ? 1.0 : -1.0;
        }
    }
    return X;
}

} // namespace

TEST_CASE("standardize") {
    std::mt19937_64 gen(1);
    const Eigen::MatrixXd X = gaussian(12, 3, gen) * 4.0 + Eigen::MatrixXd::Constant(12, 3, 7.0);
    const Eigen::VectorXd y = gaussian(12, 1, gen);
    const Standardized s = standardize(X, y);
    for (int j = 0; j < 3; ++j) {
        CHECK(std::abs(s.X.col(j).mean()) < 1e-12);
        CHECK(s.X.col(j).squaredNorm() / 12 == doctest::Approx(1.0));
    }
    CHECK(std::abs(s.y.mean()) < 1e-12);
    Eigen::MatrixXd C = X;
    C.col(1).setConstant(2.0);
    CHECK_THROWS_AS(standardize(C, y), InvalidArgument);
    const Standardized sc = standardize(C, y, true);
    CHECK(sc.X.col(1).norm() == 0.0);
}

TEST_CASE("lambda grid") {
    std::mt19937_64 gen(2);
    const Standardized s = standardize(gaussian(20, 5, gen), gaussian(20, 1, gen));
    const Eigen::VectorXd g = make_lambda_grid(s.X, s.y, 100, 1e-4);
    CHECK(g.size() == 100);
    CHECK(g(0) == doctest::Approx(lambda_max(s.X, s.y)));
    CHECK(g(99) == doctest::Approx(1e-4 * g(0)));
    for (int j = 1; j < 100; ++j) {
        CHECK(g(j) < g(j - 1));
    }
    // At lambda_max every coefficient is zero.
    const LassoPath path = lasso_path(s.X, s.y, g);
    CHECK(path.betas.col(0).norm() < 1e-12);
}

TEST_CASE("orthogonal design reduces to soft thresholding") {
    const Eigen::MatrixXd X = factorial_columns(4);
    std::mt19937_64 gen(3);
    Eigen::VectorXd y = X * Eigen::Vector4d(2.0, -1.0, 0.3, 0.0) + 0.5 * gaussian(16, 1, gen);
    y.array() -= y.mean();
    Eigen::VectorXd grid(5);
    grid << 2.5, 1.0, 0.6, 0.2, 0.01;
    const LassoPath path = lasso_path(X, y, grid);
    for (int j = 0; j < 5; ++j) {
        const Eigen::VectorXd ref = oracle::soft_threshold_solution(X, y, grid(j));
        CHECK((path.betas.col(j) - ref).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("path satisfies the optimality conditions") {
    std::mt19937_64 gen(4);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXd X = gaussian(15 + 5 * trial, 8 + trial, gen);
        const Eigen::VectorXd y = X.col(0) * 2 - X.col(3) + gaussian(X.rows(), 1, gen);
        const LassoPath path = lasso_path_raw(X, y);
        const Standardized s = standardize(X, y);
        CHECK(path.size() == 100);
        for (int j = 0; j < path.size(); ++j) {
            CHECK(kkt_violation(s.X, s.y, path.betas.col(j), path.lambdas(j)) < 1e-6);
        }
    }
}

TEST_CASE("small lambda approaches least squares") {
    std::mt19937_64 gen(5);
    const Eigen::MatrixXd X = gaussian(30, 4, gen);
    const Eigen::VectorXd y = X * Eigen::Vector4d(1, -2, 0.5, 0) + gaussian(30, 1, gen);
    LassoOptions o;
    o.n_lambda = 60;
    o.min_ratio = 1e-10;
    o.tolerance = 1e-12;
    const LassoPath path = lasso_path_raw(X, y, o);
    Eigen::MatrixXd X1(30, 5);
    X1 << Eigen::VectorXd::Ones(30), X;
    const Eigen::VectorXd b = oracle::ols_beta(X1, y);
    const int last = path.size() - 1;
    CHECK((path.coefficients(last) - b.tail(4)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(std::abs(path.intercept(last) - b(0)) < 1e-6);
    CHECK((path.predict(X, last) - X1 * b).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("kkt_violation detects a wrong solution") {
    const Eigen::MatrixXd X = factorial_columns(3);
    const Eigen::VectorXd y = X * Eigen::Vector3d(1, 0, 0);
    CHECK(kkt_violation(X, y, Eigen::Vector3d(0.5, 0, 0), 0.5) < 1e-12);
    CHECK(kkt_violation(X, y, Eigen::Vector3d(0.2, 0, 0), 0.5) > 0.1);
    CHECK(kkt_violation(X, y, Eigen::Vector3d(0.5, 0.1, 0), 0.5) > 0.1);
}

TEST_CASE("gauss-lasso threshold and refit") {
    std::mt19937_64 gen(6);
    const int n = 40;
    Eigen::MatrixXd X(n, 9);
    X.col(0).setOnes();
    X.rightCols(8) = gaussian(n, 8, gen);
    std::vector<Term> terms{Term::intercept()};
    for (int j = 0; j < 8; ++j) {
        terms.push_back(Term::main_effect(j));
    }
    const TermSet cand(terms, 8);
    const Eigen::VectorXd y = 3 * X.col(2) - 2 * X.col(5) + 0.3 * gaussian(n, 1, gen);
    const GaussLassoResult r = gauss_lasso_select(X, cand, y);

    const LassoPath path = lasso_path_raw(X.rightCols(8), y);
    CHECK(r.gamma == doctest::Approx(0.1 * path.betas.cwiseAbs().maxCoeff()));
    CHECK(r.lambdas.size() == 100);
    CHECK(r.active_terms.has_intercept());
    CHECK(r.active_terms.contains(Term::main_effect(1)));
    CHECK(r.active_terms.contains(Term::main_effect(4)));
    CHECK(r.model.terms == r.active_terms);
    CHECK(r.survivors_count[static_cast<std::size_t>(r.lambda_index)] == r.active_terms.size());

    // BIC of the chosen refit by hand.
    const int k = r.active_terms.size();
    const double bic = n * std::log(r.model.rss / n) + (k + 1) * std::log(static_cast<double>(n));
    CHECK(r.bic_by_lambda(r.lambda_index) == doctest::Approx(bic));
    for (int j = 0; j < r.bic_by_lambda.size(); ++j) {
        CHECK(r.bic_by_lambda(r.lambda_index) <= r.bic_by_lambda(j));
    }

    // Rescaling y rescales the path and leaves the selection unchanged.
    const GaussLassoResult r10 = gauss_lasso_select(X, cand, 10.0 * y);
    CHECK(r10.lambda_index == r.lambda_index);
    CHECK(r10.active_terms == r.active_terms);
}

TEST_CASE("lasso cross-validation") {
    std::mt19937_64 gen(7);
    const int n = 24;
    Eigen::MatrixXd X(n, 7);
    X.col(0).setOnes();
    X.rightCols(6) = gaussian(n, 6, gen);
    std::vector<Term> terms{Term::intercept()};
    for (int j = 0; j < 6; ++j) {
        terms.push_back(Term::main_effect(j));
    }
    const TermSet cand(terms, 6);
    const Eigen::VectorXd y = 2 * X.col(1) + 0.5 * gaussian(n, 1, gen);
    Rng rng(8);
    const FoldAssignment folds = make_folds(n, 4, rng);
    const LassoCvResult r = lasso_cv_select(X, cand, y, folds);
    CHECK(r.cv_error.size() == 100);
    for (int j = 0; j < r.cv_error.size(); ++j) {
        CHECK(r.cv_error(r.lambda_index) <= r.cv_error(j));
    }
    CHECK(r.active_terms.contains(Term::main_effect(0)));
    CHECK(r.coefficients.size() == 6);
    CHECK(r.coefficients(0) > 1.0);

    // Fold 0 error at the chosen lambda, recomputed by hand.
    const Eigen::VectorXd grid = r.lambdas;
    double total = 0.0;
    for (int f = 0; f < folds.k; ++f) {
        const auto tr = folds.complement(f);
        const auto te = folds.members(f);
        Eigen::MatrixXd Xt(tr.size(), 6);
        Eigen::VectorXd yt(tr.size());
        for (std::size_t i = 0; i < tr.size(); ++i) {
            Xt.row(static_cast<Eigen::Index>(i)) = X.row(tr[i]).tail(6);
            yt(static_cast<Eigen::Index>(i)) = y(tr[i]);
        }
        const Standardized s = standardize(Xt, yt, true);
        LassoPath p = lasso_path(s.X, s.y, grid);
        p.x_centers = s.x_centers;
        p.x_scales = s.x_scales;
        p.y_center = s.y_center;
        double se = 0.0;
        for (int i : te) {
            const double pred = p.predict(X.row(i).tail(6), r.lambda_index)(0);
            se += (y(i) - pred) * (y(i) - pred);
        }
        total += se / static_cast<double>(te.size());
    }
    CHECK(r.cv_error(r.lambda_index) == doctest::Approx(total / folds.k).epsilon(1e-6));
}
