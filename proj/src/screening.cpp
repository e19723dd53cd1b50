#include "cvdoe/screening.hpp"

#include "cvdoe/design.hpp"
#include "cvdoe/error.hpp"

#include <algorithm>
#include <ostream>

namespace cvdoe {

namespace {

// k distinct indices from [0, n), uniformly, in draw order.
std::vector<int> sample_without_replacement(int n, int k, Rng& rng) {
    std::vector<int> pool(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        pool[static_cast<std::size_t>(i)] = i;
    }
    for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    pool.resize(static_cast<std::size_t>(k));
    return pool;
}

double random_sign(Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    return coin(rng) ? 1.0 : -1.0;
}

} // namespace

ScreeningTruth gen_screening_truth(int m, int n_me, int n_2fi, Rng& rng,
                                   const std::vector<double>& magnitudes) {
    if (m < 2 || n_me < 0 || n_me > m || n_2fi < 0) {
        throw InvalidArgument("gen_screening_truth: need 0 <= n_me <= m, n_2fi >= 0, m >= 2");
    }
    if (magnitudes.empty()) {
        throw InvalidArgument("gen_screening_truth: empty magnitude set");
    }
    std::vector<int> mes = sample_without_replacement(m, n_me, rng);
    std::sort(mes.begin(), mes.end());
    std::vector<char> active(static_cast<std::size_t>(m), 0);
    for (int i : mes) {
        active[static_cast<std::size_t>(i)] = 1;
    }
    std::vector<std::pair<int, int>> eligible;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            if (active[static_cast<std::size_t>(i)] || active[static_cast<std::size_t>(j)]) {
                eligible.emplace_back(i, j);
            }
        }
    }
    if (n_2fi > static_cast<int>(eligible.size())) {
        throw InvalidArgument("gen_screening_truth: " + std::to_string(n_2fi) +
                              " interactions requested but only " +
                              std::to_string(eligible.size()) + " satisfy weak heredity");
    }
    std::vector<int> picks = sample_without_replacement(static_cast<int>(eligible.size()), n_2fi, rng);
    std::sort(picks.begin(), picks.end());

    std::vector<Term> terms{Term::intercept()};
    for (int i : mes) {
        terms.push_back(Term::main_effect(i));
    }
    for (int k : picks) {
        const auto& pr = eligible[static_cast<std::size_t>(k)];
        terms.push_back(Term::interaction({pr.first, pr.second}));
    }
    ScreeningTruth truth;
    truth.beta.resize(static_cast<Eigen::Index>(terms.size()));
    truth.beta(0) = 0.0;
    std::uniform_int_distribution<std::size_t> mag(0, magnitudes.size() - 1);
    for (std::size_t j = 1; j < terms.size(); ++j) {
        const double v = magnitudes[mag(rng)];
        truth.beta(static_cast<Eigen::Index>(j)) = random_sign(rng) * v;
    }
    truth.terms = TermSet(std::move(terms), m);
    return truth;
}

TermSet SsdTruth::terms() const {
    std::vector<Term> t{Term::intercept()};
    for (int i : active_mes) {
        t.push_back(Term::main_effect(i));
    }
    return TermSet(std::move(t), m);
}

ScreeningTruth SsdTruth::as_screening_truth() const {
    ScreeningTruth out;
    out.terms = terms();
    out.beta.resize(mu.size() + 1);
    out.beta(0) = 0.0;
    out.beta.tail(mu.size()) = mu;
    return out;
}

std::vector<double> ssd_scenario_magnitudes(int scenario_id) {
    switch (scenario_id) {
    case 1:
        return std::vector<double>(3, 3.0);
    case 2:
        return std::vector<double>(4, 4.0);
    case 3:
        return std::vector<double>(6, 6.0);
    case 4:
        return {10.0, 8.0, 5.0, 3.0, 2.0, 2.0, 2.0, 2.0, 2.0};
    default:
        throw InvalidArgument("SSD scenario must be 1..4, got " + std::to_string(scenario_id));
    }
}

SsdTruth gen_ssd_truth(int m, int scenario_id, Rng& rng, bool random_signs) {
    const std::vector<double> mags = ssd_scenario_magnitudes(scenario_id);
    const int a = static_cast<int>(mags.size());
    if (a > m) {
        throw InvalidArgument("SSD scenario " + std::to_string(scenario_id) + " needs " +
                              std::to_string(a) + " factors but m = " + std::to_string(m));
    }
    SsdTruth truth;
    truth.m = m;
    truth.active_mes = sample_without_replacement(m, a, rng);
    truth.mu.resize(a);
    for (int k = 0; k < a; ++k) {
        const double sign = random_signs ? random_sign(rng) : 1.0;
        truth.mu(k) = sign * mags[static_cast<std::size_t>(k)];
    }
    return truth;
}

Eigen::VectorXd realize_response(const ScreeningTruth& truth, const Design& design, Rng& rng) {
    if (truth.terms.m() > design.m()) {
        throw InvalidArgument("truth refers to " + std::to_string(truth.terms.m()) +
                              " factors but the design has " + std::to_string(design.m()));
    }
    const TermSet ts(truth.terms.terms(), design.m());
    Eigen::VectorXd y = build_model_matrix(design, ts) * truth.beta;
    std::normal_distribution<double> noise(0.0, 1.0);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        y(i) += noise(rng);
    }
    return y;
}

Eigen::VectorXd realize_response(const SsdTruth& truth, const Design& design, Rng& rng) {
    return realize_response(truth.as_screening_truth(), design, rng);
}

void write_truth(std::ostream& out, const ScreeningTruth& truth) {
    for (int j = 0; j < truth.terms.columns(); ++j) {
        out << "term " << truth.terms[j].label() << ' ' << truth.beta(j) << '\n';
    }
}

} // namespace cvdoe
