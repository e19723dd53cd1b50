#pragma once

#include "cvdoe/design.hpp"
#include "cvdoe/lasso.hpp"
#include "cvdoe/little_bootstrap.hpp"
#include "cvdoe/surface.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace cvdoe {

enum class Study { Rsm, Screening, Ssd };

std::string to_string(Study s);
Study parse_study(const std::string& text);

enum class MethodKind {
    FullModel,
    RegressionCv,
    RegressionLoocv,
    RegressionLb,
    LassoCv,
    LassoLoocv,
    GaussLasso,
};

struct Method {
    MethodKind kind = MethodKind::FullModel;
    /// Fold count for the k-fold kinds.
    int k = 5;

    /// full_model, regression_cv5, regression_loocv, regression_lb, lasso_cv5,
    /// lasso_loocv, gauss_lasso.
    std::string label() const;
    static Method parse(const std::string& label);
    bool compatible_with(Study s) const;

    friend bool operator==(const Method&, const Method&) = default;
};

enum class SurfaceKind { FullSecondOrder, ReducedSecondOrder, SixthOrder };

std::string to_string(SurfaceKind s);
SurfaceKind parse_surface(const std::string& text);

/// Method tuning shared by every method of a scenario.
struct MethodParams {
    /// Largest best-subsets size; negative means the largest estimable one.
    int s_max = -1;
    double lb_t = 0.6;
    int lb_n_bootstrap = 25;
    bool lb_variance_literal = false;
    int ridge_grid = 50;
    LassoOptions lasso;
    double gamma_factor = 0.1;
    bool gamma_per_lambda = false;
};

struct ScenarioSpec {
    std::string name;
    Study study = Study::Rsm;
    Design design;
    /// How the design was obtained (constructor string or file path).
    std::string design_ref;
    std::vector<Method> methods;
    int n_reps = 1;
    std::uint64_t master_seed = 0;
    MethodParams params;

    // Response-surface study.
    SurfaceKind surface = SurfaceKind::FullSecondOrder;
    /// Negative: the testbed's flat (second-order) or steep (sixth-order) default.
    double steepness = -1.0;
    TestbedConstants testbed;
    int n_oos = 1000;
    bool oos_noise = false;
    bool fixed_surface = false;

    // Screening study.
    int n_me = 2;
    int n_2fi = 2;

    // Supersaturated study.
    int ssd_scenario = 1;
    bool random_signs = true;

    /// Power and type-1 error over factors instead of terms.
    bool factor_level = false;

    /// Throws InvalidArgument when the spec cannot run.
    void validate() const;
    double effective_steepness() const;
};

/// One replication of one method. RSM: metric1 = RMSPE. Screening and SSD:
/// metric1 = power, metric2 = type-1 error. NaN marks a missing metric.
struct MetricsRecord {
    std::string scenario;
    std::string method;
    std::string design;
    int rep = 0;
    double metric1 = 0.0;
    double metric2 = 0.0;
    /// Non-intercept terms in the selected model; -1 when missing.
    int model_size = -1;
    /// Semicolon-separated markers; "fail_*" markers denote failed replications.
    std::string flags;

    // Counts behind power and type1 (not serialized).
    int n_active = 0;
    int n_inactive = 0;
    int n_true_positive = 0;
    int n_false_positive = 0;

    bool failed() const;
};

struct RunOptions {
    int threads = 1;
    /// Called after each finished work item with (done, total); may be empty.
    std::function<void(std::size_t, std::size_t)> progress;
};

/// Declared-active set to power and type-1 error over the candidate terms.
struct ScreeningScore {
    double power = 0.0;
    double type1 = 0.0;
    int n_active = 0;
    int n_inactive = 0;
    int n_true_positive = 0;
    int n_false_positive = 0;
};

ScreeningScore score_screening(const TermSet& truth_active, const TermSet& declared,
                               const TermSet& candidates, bool factor_level = false);

std::vector<MetricsRecord> run_rsm_scenario(const ScenarioSpec& spec, const RunOptions& opts = {});
std::vector<MetricsRecord> run_screening_scenario(const ScenarioSpec& spec,
                                                  const RunOptions& opts = {});
std::vector<MetricsRecord> run_ssd_scenario(const ScenarioSpec& spec, const RunOptions& opts = {});
/// Dispatches on spec.study.
std::vector<MetricsRecord> run_scenario(const ScenarioSpec& spec, const RunOptions& opts = {});

/// Replications [rep_begin, rep_end) only; records do not depend on the range.
std::vector<MetricsRecord> run_scenario_reps(const ScenarioSpec& spec, int rep_begin, int rep_end,
                                             const RunOptions& opts = {});

struct SummaryRow {
    std::string scenario;
    std::string method;
    std::string design;
    int n = 0;
    int failures = 0;
    double metric1_mean = 0.0;
    double metric1_sd = 0.0;
    double metric2_mean = 0.0;
    double metric2_sd = 0.0;
    double model_size_mean = 0.0;
};

/// Per scenario and method in order of first appearance. Failed records are
/// counted but excluded from the means.
std::vector<SummaryRow> summarize(const std::vector<MetricsRecord>& records);

void write_records_csv(std::ostream& out, const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> read_records_csv(std::istream& in);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Shortest decimal that round-trips; empty for NaN.
std::string format_number(double v);

} // namespace cvdoe
