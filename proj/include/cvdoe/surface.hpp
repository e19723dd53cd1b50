#pragma once

#include "cvdoe/rng.hpp"
#include "cvdoe/term.hpp"

#include <Eigen/Dense>

#include <iosfwd>

namespace cvdoe {

/// A true response surface: y = X(terms) * coefficients + N(0, noise_sd^2).
struct SurfaceSpec {
    TermSet terms;
    Eigen::VectorXd coefficients;
    double steepness = 1.0;
    double noise_sd = 1.0;
    /// Draws rejected because no main effect was active (reduced surfaces).
    int resamples = 0;

    /// Non-intercept terms with a nonzero coefficient.
    int active_count() const;
};

/// Constants of the coefficient and activity scheme.
struct TestbedConstants {
    /// |beta| ~ U[magnitude_lo, magnitude_hi] with a random sign.
    double magnitude_lo = 0.5;
    double magnitude_hi = 3.0;
    /// Pure power coefficients of degree d >= 3 are multiplied by
    /// power_damping^-(d - 2).
    double power_damping = 2.0;
    /// Multiplier for three-factor interaction coefficients.
    double threefi_damping = 0.5;
    double intercept = 0.0;

    double p_main = 0.41;
    /// P(2FI active | at least one parent active).
    double p_2fi = 0.11;
    /// P(quadratic active | linear parent active).
    double p_quad = 0.10;
    /// Quadratics require an active linear parent; otherwise they are drawn
    /// independently with p_quad.
    bool quad_strong_heredity = true;

    double flat_steepness = 1.0;
    double steep_steepness = 2.0;
    double noise_sd = 1.0;
};

SurfaceSpec gen_full_second_order(int m, Rng& rng, double steepness,
                                  const TestbedConstants& c = {});

/// Weak heredity for 2FIs; quadratics per c.quad_strong_heredity. Redraws until
/// at least one main effect is active.
SurfaceSpec gen_reduced_second_order(int m, Rng& rng, double steepness,
                                     const TestbedConstants& c = {});

SurfaceSpec gen_sixth_order(int m, Rng& rng, double steepness, const TestbedConstants& c = {});

/// X * coefficients without noise.
Eigen::VectorXd evaluate_noiseless(const SurfaceSpec& spec, const Eigen::MatrixXd& points);

/// X * coefficients plus i.i.d. N(0, noise_sd^2).
Eigen::VectorXd evaluate_truth(const SurfaceSpec& spec, const Eigen::MatrixXd& points, Rng& rng);

/// Text form: "m", "steepness" and "noise_sd" lines, then "term <label> <coefficient>".
void write_surface(std::ostream& out, const SurfaceSpec& spec);
SurfaceSpec read_surface(std::istream& in);

} // namespace cvdoe
