#include "cvdoe/design.hpp"
#include "cvdoe/error.hpp"
#include "cvdoe/ols.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace cvdoe;

namespace {

Eigen::MatrixXd random_matrix(int n, int p, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    Eigen::MatrixXd X(n, p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) {
            X(i, j) = N(rng);
        }
    }
    return X;
}

} // namespace

TEST_CASE("fit_ols exact and intercept-only fits") {
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd X = random_matrix(10, 3, rng);
    const Eigen::Vector3d b(1.0, -2.0, 0.5);
    const FittedModel fm = fit_ols(X, X * b);
    CHECK((fm.beta - b).norm() < 1e-12);
    CHECK(fm.rss < 1e-20);
    REQUIRE(fm.sigma2_hat.has_value());

    const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(5, 1.0, 5.0);
    const FittedModel mean_fit = fit_ols(Eigen::MatrixXd::Ones(5, 1), y);
    CHECK(mean_fit.beta(0) == doctest::Approx(3.0));

    const FittedModel saturated = fit_ols(Eigen::MatrixXd::Identity(3, 3), Eigen::Vector3d(1, 2, 3));
    CHECK_FALSE(saturated.sigma2_hat.has_value());
}

TEST_CASE("fit_ols on an orthogonal two-level design") {
    Eigen::MatrixXd X(8, 4);
    for (int i = 0; i < 8; ++i) {
        X(i, 0) = 1.0;
        for (int j = 0; j < 3; ++j) {
            X(i, j + 1) = (i >> j) & 1 ? 1.0 : -1.0;
        }
    }
    const Eigen::VectorXd y = (Eigen::VectorXd(8) << 3, 1, 4, 1, 5, 9, 2, 6).finished();
    const FittedModel fm = fit_ols(X, y);
    for (int j = 0; j < 4; ++j) {
        CHECK(fm.beta(j) == doctest::Approx(X.col(j).dot(y) / 8.0));
    }
    // Normal equations hold.
    CHECK((X.transpose() * (y - X * fm.beta)).norm() < 1e-10);
}

TEST_CASE("fit_ols errors") {
    Eigen::MatrixXd X(4, 2);
    X << 1, 2, 1, 2, 1, 2, 1, 2;
    CHECK_THROWS_AS(fit_ols(X, Eigen::VectorXd::Ones(4)), RankDeficientError);
    CHECK_THROWS_AS(fit_ols(X, Eigen::VectorXd::Ones(3)), InvalidArgument);
}

TEST_CASE("fit_ols scale consistency") {
    std::mt19937_64 rng(2);
    const Eigen::MatrixXd X = random_matrix(12, 4, rng);
    const Eigen::VectorXd y = random_matrix(12, 1, rng);
    const FittedModel a = fit_ols(X, y);
    const FittedModel b = fit_ols(X, 3.0 * y);
    CHECK((b.beta - 3.0 * a.beta).norm() < 1e-12);
    CHECK(std::sqrt(b.rss) == doctest::Approx(3.0 * std::sqrt(a.rss)));
}

TEST_CASE("predict") {
    Design d;
    d.settings.resize(2, 1);
    d.settings << -1, 1;
    const TermSet ts({Term::intercept(), Term::main_effect(0)}, 1);
    const FittedModel fm = fit_ols(d, Eigen::Vector2d(1.0, 3.0), ts);
    Design nd;
    nd.settings.resize(2, 1);
    nd.settings << 0.0, 0.5;
    const Eigen::VectorXd yhat = predict(fm, nd);
    CHECK(yhat(0) == doctest::Approx(2.0));
    CHECK(yhat(1) == doctest::Approx(2.5));

    const TermSet io({Term::intercept()}, 1);
    const FittedModel mean_fit = fit_ols(d, Eigen::Vector2d(1.0, 3.0), io);
    CHECK(predict(mean_fit, nd).isApproxToConstant(2.0));

    Design wrong;
    wrong.settings = Eigen::MatrixXd::Zero(2, 2);
    CHECK_THROWS_AS(predict(fm, wrong), InvalidArgument);
}

TEST_CASE("rmspe and aggregation") {
    const Eigen::Vector3d y(1, 2, 3);
    CHECK(rmspe(y, y) == 0.0);
    CHECK(rmspe(y, y.array() + 0.7) == doctest::Approx(0.7));
    CHECK(rmspe(y, Eigen::Vector3d(1, 1, 5)) == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(rmspe(Eigen::Vector3d(3, 1, 2), Eigen::Vector3d(5, 1, 1)) ==
          doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK_THROWS_AS(rmspe(y, Eigen::Vector2d(1, 2)), InvalidArgument);
    CHECK_THROWS_AS(rmspe(Eigen::VectorXd(0), Eigen::VectorXd(0)), InvalidArgument);

    const std::vector<double> same{2.5, 2.5};
    CHECK(rmspe_cv_aggregate(same) == 2.5);
    const std::vector<double> v{1, 2, 3};
    CHECK(rmspe_cv_aggregate(v) == 2.0);
    CHECK_THROWS_AS(rmspe_cv_aggregate({}), InvalidArgument);
}

TEST_CASE("loo_residuals") {
    const Eigen::VectorXd loo = loo_residuals(Eigen::MatrixXd::Ones(3, 1), Eigen::Vector3d(0, 0, 3));
    CHECK(loo(2) == doctest::Approx(3.0));
    CHECK(loo(0) == doctest::Approx(-1.5));

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd X = random_matrix(10, 3, rng);
        const Eigen::VectorXd y = random_matrix(10, 1, rng);
        const Eigen::VectorXd a = loo_residuals(X, y);
        const Eigen::VectorXd b = oracle::loo_by_refit(X, y);
        CHECK((a - b).norm() <= 1e-8 * b.norm());
    }

    // Duplicate rows with identical responses.
    Eigen::MatrixXd X(4, 2);
    X << 1, 0, 1, 0, 1, 1, 1, 1;
    const Eigen::VectorXd d = loo_residuals(X, Eigen::Vector4d(5, 5, 1, 2));
    CHECK(std::abs(d(0)) < 1e-12);
    CHECK(std::abs(d(1)) < 1e-12);

    Eigen::MatrixXd lev(3, 2);
    lev << 1, 0, 1, 0, 1, 1;
    CHECK_THROWS_AS(loo_residuals(lev, Eigen::Vector3d(1, 2, 3)), LeverageError);
}

TEST_CASE("numerical_rank") {
    Eigen::MatrixXd X(3, 3);
    X << 1, 2, 3, 1, 2, 3, 0, 1, 1;
    CHECK(numerical_rank(X) == 2);
}
