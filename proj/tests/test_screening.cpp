#include "cvdoe/design.hpp"
#include "cvdoe/error.hpp"
#include "cvdoe/screening.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

using namespace cvdoe;

TEST_CASE("screening truth structure") {
    Rng rng(1);
    for (int d = 0; d < 500; ++d) {
        const ScreeningTruth t = gen_screening_truth(7, 2, 2, rng);
        CHECK(t.terms[0].is_intercept());
        CHECK(t.beta(0) == 0.0);
        const TermSet act = t.active_terms();
        REQUIRE(act.columns() == 4);
        std::set<int> mes;
        for (const Term& term : act) {
            if (term.is_main_effect()) {
                mes.insert(term.factors()[0]);
            }
        }
        CHECK(mes.size() == 2);
        for (int j = 1; j < t.terms.columns(); ++j) {
            const Term& term = t.terms[j];
            const double mag = std::abs(t.beta(j));
            CHECK(std::find(kScreeningMagnitudes.begin(), kScreeningMagnitudes.end(), mag) !=
                  kScreeningMagnitudes.end());
            if (term.kind() == Term::Kind::Interaction) {
                CHECK((mes.count(term.factors()[0]) + mes.count(term.factors()[1])) >= 1);
            }
        }
    }
}

TEST_CASE("screening truth edge cases") {
    Rng rng(2);
    // n_me = m: every pair is eligible.
    const ScreeningTruth t = gen_screening_truth(4, 4, 6, rng);
    CHECK(t.active_terms().columns() == 10);
    // One active main effect in 3 factors leaves 2 eligible pairs.
    CHECK_THROWS_AS(gen_screening_truth(3, 1, 3, rng), InvalidArgument);
    CHECK_THROWS_AS(gen_screening_truth(3, 4, 0, rng), InvalidArgument);
    const ScreeningTruth none = gen_screening_truth(5, 0, 0, rng);
    CHECK(none.active_terms().columns() == 0);
}

TEST_CASE("magnitudes and signs are uniform") {
    Rng rng(3);
    std::map<double, int> count;
    int positive = 0;
    int total = 0;
    for (int d = 0; d < 10000; ++d) {
        const ScreeningTruth t = gen_screening_truth(7, 1, 0, rng);
        count[std::abs(t.beta(1))]++;
        positive += t.beta(1) > 0;
        ++total;
    }
    const double se = std::sqrt(0.25 * 0.75 / total);
    double chi2 = 0.0;
    for (double mag : kScreeningMagnitudes) {
        const double f = count[mag] / static_cast<double>(total);
        CHECK(std::abs(f - 0.25) < 3 * se);
        chi2 += std::pow(count[mag] - 0.25 * total, 2) / (0.25 * total);
    }
    CHECK(chi2 < 16.27);  // chi-square(3) upper 0.001 point
    CHECK(std::abs(positive / static_cast<double>(total) - 0.5) < 3 * std::sqrt(0.25 / total));
}

TEST_CASE("ssd scenarios") {
    CHECK(ssd_scenario_magnitudes(1) == std::vector<double>(3, 3.0));
    CHECK(ssd_scenario_magnitudes(2) == std::vector<double>(4, 4.0));
    CHECK(ssd_scenario_magnitudes(3) == std::vector<double>(6, 6.0));
    CHECK(ssd_scenario_magnitudes(4) == std::vector<double>{10, 8, 5, 3, 2, 2, 2, 2, 2});
    CHECK_THROWS_AS(ssd_scenario_magnitudes(5), InvalidArgument);

    Rng rng(4);
    const SsdTruth t = gen_ssd_truth(24, 4, rng);
    CHECK(t.active_mes.size() == 9);
    CHECK(std::set<int>(t.active_mes.begin(), t.active_mes.end()).size() == 9);
    std::vector<double> mags;
    for (int k = 0; k < 9; ++k) {
        mags.push_back(std::abs(t.mu(k)));
    }
    CHECK(mags == ssd_scenario_magnitudes(4));
    for (const Term& term : t.terms()) {
        CHECK((term.is_intercept() || term.is_main_effect()));
    }
    CHECK(t.as_screening_truth().active_terms().columns() == 9);

    Rng a(5), b(5);
    const SsdTruth x = gen_ssd_truth(14, 1, a);
    const SsdTruth y = gen_ssd_truth(14, 1, b);
    CHECK(x.active_mes == y.active_mes);
    CHECK(x.mu == y.mu);

    Rng c(6);
    const SsdTruth pos = gen_ssd_truth(14, 2, c, false);
    CHECK(pos.mu.minCoeff() == 4.0);
    CHECK_THROWS_AS(gen_ssd_truth(5, 3, c), InvalidArgument);
}

TEST_CASE("realized responses") {
    Design d;
    d.settings = Eigen::MatrixXd::Zero(1, 4);
    d.settings.row(0) << 1, -1, 1, 1;
    Rng rng(7);
    const ScreeningTruth t = gen_screening_truth(4, 2, 1, rng);
    double mean = 0.0;
    for (int j = 0; j < t.terms.columns(); ++j) {
        mean += t.beta(j) * t.terms[j].evaluate_row(d.settings.row(0));
    }
    Design many;
    many.settings = d.settings.replicate(100000, 1);
    const Eigen::VectorXd y = realize_response(t, many, rng);
    const double mu = y.mean();
    const double var = (y.array() - mu).square().sum() / (y.size() - 1);
    CHECK(mu == doctest::Approx(mean).epsilon(0.01));
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));

    Rng a(8), b(8);
    CHECK(realize_response(t, d, a) == realize_response(t, d, b));

    Design small;
    small.settings = Eigen::MatrixXd::Zero(3, 2);
    const SsdTruth s = gen_ssd_truth(14, 1, rng);
    CHECK_THROWS_AS(realize_response(s, small, rng), InvalidArgument);

    std::ostringstream os;
    write_truth(os, t);
    CHECK(os.str().find("term 1 0") != std::string::npos);
}
