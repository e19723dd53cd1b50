#include "cvdoe/term.hpp"

#include "cvdoe/design.hpp"
#include "cvdoe/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace cvdoe {

namespace {

int parse_factor(std::string_view s) {
    if (s.size() < 2 || s[0] != 'x') {
        throw InvalidArgument("bad term label component '" + std::string(s) + "'");
    }
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || value < 1) {
        throw InvalidArgument("bad factor name '" + std::string(s) + "'");
    }
    return value - 1;
}

} // namespace

Term Term::intercept() { return Term(Kind::Intercept, {}, 0); }

Term Term::power(int factor, int degree) {
    if (factor < 0) {
        throw InvalidArgument("factor index must be nonnegative");
    }
    if (degree < 1 || degree > kMaxDegree) {
        throw InvalidArgument("power degree must be in [1, 6], got " + std::to_string(degree));
    }
    return Term(Kind::Power, {factor}, degree);
}

Term Term::interaction(std::vector<int> factors) {
    std::sort(factors.begin(), factors.end());
    if (factors.size() < 2 || factors.size() > 3) {
        throw InvalidArgument("interactions involve 2 or 3 factors");
    }
    if (factors.front() < 0) {
        throw InvalidArgument("factor index must be nonnegative");
    }
    if (std::adjacent_find(factors.begin(), factors.end()) != factors.end()) {
        throw InvalidArgument("interaction factors must be distinct");
    }
    return Term(Kind::Interaction, std::move(factors), 1);
}

Term Term::parse(std::string_view label) {
    if (label == "1") {
        return intercept();
    }
    if (label.find('*') != std::string_view::npos) {
        std::vector<int> f;
        std::size_t start = 0;
        while (true) {
            const auto star = label.find('*', start);
            f.push_back(parse_factor(label.substr(start, star - start)));
            if (star == std::string_view::npos) {
                break;
            }
            start = star + 1;
        }
        return interaction(std::move(f));
    }
    const auto caret = label.find('^');
    if (caret == std::string_view::npos) {
        return main_effect(parse_factor(label));
    }
    int degree = 0;
    const auto tail = label.substr(caret + 1);
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), degree);
    if (ec != std::errc{} || ptr != tail.data() + tail.size()) {
        throw InvalidArgument("bad degree in term label '" + std::string(label) + "'");
    }
    return power(parse_factor(label.substr(0, caret)), degree);
}

int Term::order() const {
    switch (kind_) {
    case Kind::Intercept:
        return 0;
    case Kind::Power:
        return degree_;
    case Kind::Interaction:
        return static_cast<int>(factors_.size());
    }
    return 0;
}

int Term::max_factor() const { return factors_.empty() ? -1 : factors_.back(); }

bool Term::involves(int factor) const {
    return std::find(factors_.begin(), factors_.end(), factor) != factors_.end();
}

std::string Term::label() const {
    switch (kind_) {
    case Kind::Intercept:
        return "1";
    case Kind::Power: {
        std::string s = "x" + std::to_string(factors_[0] + 1);
        if (degree_ > 1) {
            s += "^" + std::to_string(degree_);
        }
        return s;
    }
    case Kind::Interaction: {
        std::string s;
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            if (i > 0) {
                s += '*';
            }
            s += "x" + std::to_string(factors_[i] + 1);
        }
        return s;
    }
    }
    return {};
}

Eigen::VectorXd Term::evaluate(const Eigen::MatrixXd& settings) const {
    const Eigen::Index n = settings.rows();
    if (max_factor() >= settings.cols()) {
        throw InvalidArgument("term " + label() + " refers to a factor beyond the design's " +
                              std::to_string(settings.cols()));
    }
    Eigen::VectorXd col = Eigen::VectorXd::Ones(n);
    for (int f : factors_) {
        for (int d = 0; d < (kind_ == Kind::Power ? degree_ : 1); ++d) {
            col.array() *= settings.col(f).array();
        }
    }
    return col;
}

double Term::evaluate_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    double v = 1.0;
    for (int f : factors_) {
        if (kind_ == Kind::Power) {
            for (int d = 0; d < degree_; ++d) {
                v *= row(f);
            }
        } else {
            v *= row(f);
        }
    }
    return v;
}

std::strong_ordering operator<=>(const Term& a, const Term& b) {
    if (auto c = static_cast<int>(a.kind_) <=> static_cast<int>(b.kind_); c != 0) {
        return c;
    }
    if (auto c = a.factors_ <=> b.factors_; c != 0) {
        return c;
    }
    return a.degree_ <=> b.degree_;
}

// ---------------------------------------------------------------------------

TermSet::TermSet(std::vector<Term> terms, int m) : terms_(std::move(terms)), m_(m) {
    if (m < 0) {
        throw InvalidArgument("factor count must be nonnegative");
    }
    std::vector<Term> sorted = terms_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InvalidArgument("term set contains duplicate terms");
    }
    for (const auto& t : terms_) {
        if (t.max_factor() >= m) {
            throw InvalidArgument("term " + t.label() + " exceeds factor count " +
                                  std::to_string(m));
        }
    }
}

int TermSet::size() const { return columns() - (has_intercept() ? 1 : 0); }

bool TermSet::has_intercept() const { return intercept_index() >= 0; }

int TermSet::intercept_index() const { return index_of(Term::intercept()); }

bool TermSet::contains(const Term& t) const { return index_of(t) >= 0; }

int TermSet::index_of(const Term& t) const {
    auto it = std::find(terms_.begin(), terms_.end(), t);
    return it == terms_.end() ? -1 : static_cast<int>(it - terms_.begin());
}

TermSet TermSet::subset(const std::vector<int>& positions) const {
    std::vector<Term> out;
    out.reserve(positions.size());
    for (int p : positions) {
        if (p < 0 || p >= columns()) {
            throw InvalidArgument("term position out of range");
        }
        out.push_back(terms_[static_cast<std::size_t>(p)]);
    }
    return TermSet(std::move(out), m_);
}

TermSet TermSet::without_intercept() const {
    std::vector<Term> out;
    for (const auto& t : terms_) {
        if (!t.is_intercept()) {
            out.push_back(t);
        }
    }
    return TermSet(std::move(out), m_);
}

TermSet TermSet::with_intercept() const {
    if (has_intercept()) {
        return *this;
    }
    std::vector<Term> out;
    out.reserve(terms_.size() + 1);
    out.push_back(Term::intercept());
    out.insert(out.end(), terms_.begin(), terms_.end());
    return TermSet(std::move(out), m_);
}

std::vector<std::string> TermSet::labels() const {
    std::vector<std::string> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) {
        out.push_back(t.label());
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

void append_two_factor_interactions(std::vector<Term>& out, int m) {
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            out.push_back(Term::interaction({i, j}));
        }
    }
}

} // namespace

TermSet full_second_order(int m) {
    if (m < 1) {
        throw InvalidArgument("full_second_order needs m >= 1");
    }
    std::vector<Term> t{Term::intercept()};
    for (int i = 0; i < m; ++i) {
        t.push_back(Term::main_effect(i));
    }
    for (int i = 0; i < m; ++i) {
        t.push_back(Term::power(i, 2));
    }
    append_two_factor_interactions(t, m);
    return TermSet(std::move(t), m);
}

TermSet sixth_order_full(int m) {
    if (m < 3) {
        throw InvalidArgument("sixth_order_full needs m >= 3 (three-factor interactions)");
    }
    std::vector<Term> t{Term::intercept()};
    for (int d = 1; d <= Term::kMaxDegree; ++d) {
        for (int i = 0; i < m; ++i) {
            t.push_back(Term::power(i, d));
        }
    }
    append_two_factor_interactions(t, m);
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            for (int k = j + 1; k < m; ++k) {
                t.push_back(Term::interaction({i, j, k}));
            }
        }
    }
    return TermSet(std::move(t), m);
}

TermSet main_effects_and_2fi(int m) {
    if (m < 2) {
        throw InvalidArgument("main_effects_and_2fi needs m >= 2");
    }
    std::vector<Term> t{Term::intercept()};
    for (int i = 0; i < m; ++i) {
        t.push_back(Term::main_effect(i));
    }
    append_two_factor_interactions(t, m);
    return TermSet(std::move(t), m);
}

TermSet main_effects(int m) {
    if (m < 1) {
        throw InvalidArgument("main_effects needs m >= 1");
    }
    std::vector<Term> t{Term::intercept()};
    for (int i = 0; i < m; ++i) {
        t.push_back(Term::main_effect(i));
    }
    return TermSet(std::move(t), m);
}

Eigen::MatrixXd build_model_matrix(const Eigen::MatrixXd& settings, const TermSet& ts) {
    if (ts.m() > settings.cols()) {
        throw InvalidArgument("term set refers to " + std::to_string(ts.m()) +
                              " factors but the design has " + std::to_string(settings.cols()));
    }
    Eigen::MatrixXd X(settings.rows(), ts.columns());
    for (int j = 0; j < ts.columns(); ++j) {
        X.col(j) = ts[j].evaluate(settings);
    }
    return X;
}

Eigen::MatrixXd build_model_matrix(const Design& design, const TermSet& ts) {
    return build_model_matrix(design.settings, ts);
}

} // namespace cvdoe
