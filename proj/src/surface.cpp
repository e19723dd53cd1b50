#include "cvdoe/surface.hpp"

#include "cvdoe/error.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace cvdoe {

namespace {

double draw_magnitude(Rng& rng, const TestbedConstants& c) {
    std::uniform_real_distribution<double> mag(c.magnitude_lo, c.magnitude_hi);
    std::bernoulli_distribution sign(0.5);
    const double v = mag(rng);
    return sign(rng) ? v : -v;
}

double damping(const Term& t, const TestbedConstants& c) {
    if (t.kind() == Term::Kind::Power && t.degree() >= 3) {
        return std::pow(c.power_damping, -(t.degree() - 2));
    }
    if (t.kind() == Term::Kind::Interaction && t.factors().size() == 3) {
        return c.threefi_damping;
    }
    return 1.0;
}

SurfaceSpec all_active(TermSet terms, Rng& rng, double steepness, const TestbedConstants& c) {
    SurfaceSpec spec;
    spec.steepness = steepness;
    spec.noise_sd = c.noise_sd;
    spec.coefficients.resize(terms.columns());
    for (int j = 0; j < terms.columns(); ++j) {
        const Term& t = terms[j];
        spec.coefficients(j) =
            t.is_intercept() ? c.intercept : steepness * damping(t, c) * draw_magnitude(rng, c);
    }
    spec.terms = std::move(terms);
    return spec;
}

} // namespace

int SurfaceSpec::active_count() const {
    int count = 0;
    for (int j = 0; j < terms.columns(); ++j) {
        if (!terms[j].is_intercept() && coefficients(j) != 0.0) {
            ++count;
        }
    }
    return count;
}

SurfaceSpec gen_full_second_order(int m, Rng& rng, double steepness, const TestbedConstants& c) {
    if (m < 2) {
        throw InvalidArgument("full second-order surface needs m >= 2");
    }
    return all_active(full_second_order(m), rng, steepness, c);
}

SurfaceSpec gen_sixth_order(int m, Rng& rng, double steepness, const TestbedConstants& c) {
    if (m < 3) {
        throw InvalidArgument("sixth-order surface needs m >= 3");
    }
    return all_active(sixth_order_full(m), rng, steepness, c);
}

SurfaceSpec gen_reduced_second_order(int m, Rng& rng, double steepness, const TestbedConstants& c) {
    if (m < 2) {
        throw InvalidArgument("reduced second-order surface needs m >= 2");
    }
    for (double prob : {c.p_main, c.p_2fi, c.p_quad}) {
        if (!(prob >= 0.0 && prob <= 1.0)) {
            throw InvalidArgument("activity probabilities must lie in [0, 1]");
        }
    }
    if (c.p_main == 0.0) {
        throw InvalidArgument("p_main = 0 can never activate a main effect");
    }
    const TermSet full = full_second_order(m);
    std::bernoulli_distribution main_on(c.p_main);
    std::bernoulli_distribution fi_on(c.p_2fi);
    std::bernoulli_distribution quad_on(c.p_quad);

    int resamples = 0;
    std::vector<char> me(static_cast<std::size_t>(m));
    for (;;) {
        bool any = false;
        for (int i = 0; i < m; ++i) {
            me[static_cast<std::size_t>(i)] = main_on(rng) ? 1 : 0;
            any = any || me[static_cast<std::size_t>(i)];
        }
        if (any) {
            break;
        }
        ++resamples;
    }

    std::vector<Term> terms{Term::intercept()};
    std::vector<double> coef{c.intercept};
    auto add = [&](Term t) {
        coef.push_back(steepness * draw_magnitude(rng, c));
        terms.push_back(std::move(t));
    };
    for (int i = 0; i < m; ++i) {
        if (me[static_cast<std::size_t>(i)]) {
            add(Term::main_effect(i));
        }
    }
    for (int i = 0; i < m; ++i) {
        const bool eligible = !c.quad_strong_heredity || me[static_cast<std::size_t>(i)];
        if (eligible && quad_on(rng)) {
            add(Term::power(i, 2));
        }
    }
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            if ((me[static_cast<std::size_t>(i)] || me[static_cast<std::size_t>(j)]) && fi_on(rng)) {
                add(Term::interaction({i, j}));
            }
        }
    }
    // Keep the canonical full second-order column order.
    std::vector<int> order;
    for (const Term& t : terms) {
        order.push_back(full.index_of(t));
    }
    std::vector<int> idx(order.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        idx[k] = static_cast<int>(k);
    }
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        return order[static_cast<std::size_t>(a)] < order[static_cast<std::size_t>(b)];
    });
    std::vector<Term> sorted_terms;
    SurfaceSpec spec;
    spec.coefficients.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
        sorted_terms.push_back(terms[static_cast<std::size_t>(idx[k])]);
        spec.coefficients(static_cast<Eigen::Index>(k)) = coef[static_cast<std::size_t>(idx[k])];
    }
    spec.terms = TermSet(std::move(sorted_terms), m);
    spec.steepness = steepness;
    spec.noise_sd = c.noise_sd;
    spec.resamples = resamples;
    return spec;
}

Eigen::VectorXd evaluate_noiseless(const SurfaceSpec& spec, const Eigen::MatrixXd& points) {
    if (points.cols() != spec.terms.m()) {
        throw InvalidArgument("surface has " + std::to_string(spec.terms.m()) +
                              " factors but the points have " + std::to_string(points.cols()));
    }
    return build_model_matrix(points, spec.terms) * spec.coefficients;
}

Eigen::VectorXd evaluate_truth(const SurfaceSpec& spec, const Eigen::MatrixXd& points, Rng& rng) {
    Eigen::VectorXd y = evaluate_noiseless(spec, points);
    if (spec.noise_sd > 0.0) {
        std::normal_distribution<double> noise(0.0, spec.noise_sd);
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            y(i) += noise(rng);
        }
    }
    return y;
}

void write_surface(std::ostream& out, const SurfaceSpec& spec) {
    const auto old = out.precision(17);
    out << "m " << spec.terms.m() << '\n';
    out << "steepness " << spec.steepness << '\n';
    out << "noise_sd " << spec.noise_sd << '\n';
    for (int j = 0; j < spec.terms.columns(); ++j) {
        out << "term " << spec.terms[j].label() << ' ' << spec.coefficients(j) << '\n';
    }
    out.precision(old);
}

SurfaceSpec read_surface(std::istream& in) {
    SurfaceSpec spec;
    int m = -1;
    std::vector<Term> terms;
    std::vector<double> coef;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        bool ok = true;
        if (key == "m") {
            ok = static_cast<bool>(ss >> m);
        } else if (key == "steepness") {
            ok = static_cast<bool>(ss >> spec.steepness);
        } else if (key == "noise_sd") {
            ok = static_cast<bool>(ss >> spec.noise_sd);
        } else if (key == "term") {
            std::string label;
            double v = 0.0;
            ok = static_cast<bool>(ss >> label >> v);
            if (ok) {
                terms.push_back(Term::parse(label));
                coef.push_back(v);
            }
        } else {
            ok = false;
        }
        if (!ok) {
            throw InvalidArgument("surface file line " + std::to_string(line_no) + ": cannot parse '" +
                                  line + "'");
        }
    }
    if (m < 1) {
        throw InvalidArgument("surface file lacks a factor count");
    }
    if (!(spec.noise_sd >= 0.0)) {
        throw InvalidArgument("surface noise_sd must be nonnegative");
    }
    spec.terms = TermSet(std::move(terms), m);
    spec.coefficients = Eigen::Map<Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
    return spec;
}

} // namespace cvdoe
