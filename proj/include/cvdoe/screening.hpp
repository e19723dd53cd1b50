#pragma once

#include "cvdoe/rng.hpp"
#include "cvdoe/term.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace cvdoe {

struct Design;

/// Active main effects and two-factor interactions with signed coefficients.
/// terms starts with the intercept (coefficient 0).
struct ScreeningTruth {
    TermSet terms;
    Eigen::VectorXd beta;

    /// Non-intercept terms.
    TermSet active_terms() const { return terms.without_intercept(); }
};

/// Magnitudes are drawn with replacement from this set.
inline const std::vector<double> kScreeningMagnitudes{2.0, 2.5, 3.0, 3.5};

/// n_me main effects uniformly without replacement, then n_2fi interactions
/// uniformly among pairs with at least one active parent; magnitudes from
/// `magnitudes`, signs +/- with probability 1/2.
ScreeningTruth gen_screening_truth(int m, int n_me, int n_2fi, Rng& rng,
                                   const std::vector<double>& magnitudes = kScreeningMagnitudes);

/// Active main effects of a supersaturated-design study.
struct SsdTruth {
    int m = 0;
    /// In sample order; mu[k] belongs to active_mes[k].
    std::vector<int> active_mes;
    /// Signed coefficients.
    Eigen::VectorXd mu;

    /// Intercept followed by the active main effects in sample order.
    TermSet terms() const;
    ScreeningTruth as_screening_truth() const;
};

/// Magnitudes of scenario 1..4.
std::vector<double> ssd_scenario_magnitudes(int scenario_id);

SsdTruth gen_ssd_truth(int m, int scenario_id, Rng& rng, bool random_signs = true);

/// Intercept plus active terms times beta, plus N(0, 1) noise.
Eigen::VectorXd realize_response(const ScreeningTruth& truth, const Design& design, Rng& rng);
Eigen::VectorXd realize_response(const SsdTruth& truth, const Design& design, Rng& rng);

/// "term <label> <coefficient>" lines.
void write_truth(std::ostream& out, const ScreeningTruth& truth);

} // namespace cvdoe
