#pragma once

#include <Eigen/Dense>

#include <compare>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace cvdoe {

struct Design;

/// A single polynomial model term in coded factors.
///
/// Terms are kept in canonical form so that equality is structural:
///   - Intercept: no factors.
///   - Power(i, d): one factor with degree d in [1, 6]; d == 1 is the main effect.
///   - Interaction: 2 or 3 distinct factors, sorted ascending, each of degree 1.
class Term {
  public:
    enum class Kind { Intercept = 0, Power = 1, Interaction = 2 };

    static constexpr int kMaxDegree = 6;

    static Term intercept();
    static Term power(int factor, int degree);
    static Term main_effect(int factor) { return power(factor, 1); }
    /// Accepts any order; the stored list is sorted.
    static Term interaction(std::vector<int> factors);
    static Term interaction(std::initializer_list<int> factors) {
        return interaction(std::vector<int>(factors));
    }

    /// Inverse of label(): "1", "x3", "x3^2", "x1*x4".
    static Term parse(std::string_view label);

    Kind kind() const { return kind_; }
    const std::vector<int>& factors() const { return factors_; }
    int degree() const { return degree_; }
    /// Total polynomial order (0 for the intercept).
    int order() const;
    int max_factor() const;

    bool is_intercept() const { return kind_ == Kind::Intercept; }
    bool is_main_effect() const { return kind_ == Kind::Power && degree_ == 1; }
    bool involves(int factor) const;

    /// Canonical text form with 1-based factor names.
    std::string label() const;

    /// Column of the model matrix for this term.
    Eigen::VectorXd evaluate(const Eigen::MatrixXd& settings) const;
    double evaluate_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;

    friend bool operator==(const Term&, const Term&) = default;
    friend std::strong_ordering operator<=>(const Term& a, const Term& b);

  private:
    Term(Kind kind, std::vector<int> factors, int degree)
        : kind_(kind), factors_(std::move(factors)), degree_(degree) {}

    Kind kind_ = Kind::Intercept;
    std::vector<int> factors_;
    int degree_ = 0;
};

/// Ordered list of distinct terms over m factors.
class TermSet {
  public:
    TermSet() = default;
    TermSet(std::vector<Term> terms, int m);

    const std::vector<Term>& terms() const { return terms_; }
    int m() const { return m_; }

    /// Number of model-matrix columns (intercept included).
    int columns() const { return static_cast<int>(terms_.size()); }
    /// Submodel size: non-intercept terms only.
    int size() const;
    bool empty() const { return terms_.empty(); }

    bool has_intercept() const;
    /// Position of the intercept, or -1.
    int intercept_index() const;
    bool contains(const Term& t) const;
    /// Position of t, or -1.
    int index_of(const Term& t) const;

    const Term& operator[](int i) const { return terms_[static_cast<std::size_t>(i)]; }
    auto begin() const { return terms_.begin(); }
    auto end() const { return terms_.end(); }

    /// Terms at the given positions, in the given order.
    TermSet subset(const std::vector<int>& positions) const;
    /// Non-intercept terms.
    TermSet without_intercept() const;
    /// Adds the intercept at the front when missing.
    TermSet with_intercept() const;

    std::vector<std::string> labels() const;

    friend bool operator==(const TermSet&, const TermSet&) = default;

  private:
    std::vector<Term> terms_;
    int m_ = 0;
};

/// Intercept, m main effects, m quadratics, C(m,2) two-factor interactions.
TermSet full_second_order(int m);

/// Intercept, pure powers 1..6 of every factor, all 2FIs and 3FIs.
TermSet sixth_order_full(int m);

/// Intercept, m main effects, C(m,2) two-factor interactions.
TermSet main_effects_and_2fi(int m);

/// Intercept and m main effects.
TermSet main_effects(int m);

Eigen::MatrixXd build_model_matrix(const Eigen::MatrixXd& settings, const TermSet& ts);
Eigen::MatrixXd build_model_matrix(const Design& design, const TermSet& ts);

} // namespace cvdoe
