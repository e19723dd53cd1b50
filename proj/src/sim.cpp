#include "cvdoe/sim.hpp"

#include "cvdoe/best_subsets.hpp"
#include "cvdoe/cv_select.hpp"
#include "cvdoe/error.hpp"
#include "cvdoe/rng.hpp"
#include "cvdoe/screening.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace cvdoe {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kDataKey = 0x64617461ULL;
constexpr std::uint64_t kSurfaceKey = 0x73757266ULL;

bool has_nan(const Eigen::MatrixXd& m) { return m.array().isNaN().any(); }

void add_flag(std::string& flags, const std::string& f) {
    if (!flags.empty()) {
        flags += ';';
    }
    flags += f;
}

std::string failure_flag(const Error& e) {
    if (dynamic_cast<const SelectionFailure*>(&e) != nullptr) {
        return "fail_selection";
    }
    if (dynamic_cast<const RankDeficientError*>(&e) != nullptr) {
        return "fail_rank";
    }
    if (dynamic_cast<const LeverageError*>(&e) != nullptr) {
        return "fail_leverage";
    }
    if (dynamic_cast<const ConvergenceError*>(&e) != nullptr) {
        return "fail_convergence";
    }
    return "fail_error";
}

int clamp_s_max(int requested, int limit) {
    return requested < 0 ? limit : std::min(requested, limit);
}

// Error variance for the little bootstrap: the full model when it leaves
// residual degrees of freedom, otherwise the ridge estimate.
double lb_sigma2(const Eigen::MatrixXd& X, const TermSet& candidates, const Eigen::VectorXd& y,
                 const MethodParams& mp) {
    if (X.rows() > X.cols()) {
        try {
            return estimate_sigma2(X, y);
        } catch (const RankDeficientError&) {
        }
    }
    std::vector<int> cols;
    for (int j = 0; j < candidates.columns(); ++j) {
        if (!candidates[j].is_intercept()) {
            cols.push_back(j);
        }
    }
    return ridge_variance_estimate(select_columns(X, cols), y, mp.ridge_grid).sigma2;
}

struct Selected {
    TermSet terms;  // intercept plus selected terms
    Eigen::VectorXd beta;
    bool has_beta = false;
    bool degenerate_cells = false;
};

Selected run_regression(const Method& method, const Eigen::MatrixXd& X, const TermSet& candidates,
                        const Eigen::VectorXd& y, const MethodParams& mp, Rng& rng) {
    const int n = static_cast<int>(X.rows());
    Selected out;
    out.has_beta = true;
    switch (method.kind) {
    case MethodKind::FullModel: {
        const FittedModel fm = fit_ols(X, y, candidates);
        out.terms = fm.terms;
        out.beta = fm.beta;
        return out;
    }
    case MethodKind::RegressionCv:
    case MethodKind::RegressionLoocv: {
        const int k = method.kind == MethodKind::RegressionLoocv ? n : method.k;
        const FoldAssignment folds = make_folds(n, k, rng);
        const int s_max = clamp_s_max(mp.s_max, cv_default_s_max(folds, candidates.size()));
        const CvSelection sel = cv_select_and_refit(X, candidates, y, folds, s_max);
        out.terms = sel.model.terms;
        out.beta = sel.model.beta;
        out.degenerate_cells = has_nan(sel.trace.rmspe);
        return out;
    }
    case MethodKind::RegressionLb: {
        LbOptions lo;
        lo.t = mp.lb_t;
        lo.n_bootstrap = mp.lb_n_bootstrap;
        lo.variance_literal = mp.lb_variance_literal;
        lo.s_max = clamp_s_max(mp.s_max, default_s_max(candidates.size(), n));
        const double sigma2 = lb_sigma2(X, candidates, y, mp);
        const LbSelection sel = lb_select_and_refit(X, candidates, y, sigma2, lo, rng);
        out.terms = sel.model.terms;
        out.beta = sel.model.beta;
        out.degenerate_cells = has_nan(sel.trace.pe_by_size);
        return out;
    }
    case MethodKind::LassoCv:
    case MethodKind::LassoLoocv: {
        const int k = method.kind == MethodKind::LassoLoocv ? n : method.k;
        const FoldAssignment folds = make_folds(n, k, rng);
        const LassoCvResult res = lasso_cv_select(X, candidates, y, folds, mp.lasso);
        out.terms = res.active_terms;
        out.has_beta = false;
        return out;
    }
    case MethodKind::GaussLasso: {
        GaussLassoOptions go;
        go.lasso = mp.lasso;
        go.gamma_factor = mp.gamma_factor;
        go.gamma_per_lambda = mp.gamma_per_lambda;
        const GaussLassoResult res = gauss_lasso_select(X, candidates, y, go);
        out.terms = res.active_terms;
        out.beta = res.model.beta;
        return out;
    }
    }
    throw InvalidArgument("unknown method");
}

struct RsmData {
    SurfaceSpec surface;
    Eigen::VectorXd y;
    Eigen::MatrixXd oos;
    Eigen::VectorXd targets;
};

SurfaceSpec make_surface(const ScenarioSpec& spec, Rng& rng) {
    const int m = spec.design.m();
    const double steep = spec.effective_steepness();
    switch (spec.surface) {
    case SurfaceKind::FullSecondOrder:
        return gen_full_second_order(m, rng, steep, spec.testbed);
    case SurfaceKind::ReducedSecondOrder:
        return gen_reduced_second_order(m, rng, steep, spec.testbed);
    case SurfaceKind::SixthOrder:
        return gen_sixth_order(m, rng, steep, spec.testbed);
    }
    throw InvalidArgument("unknown surface kind");
}

RsmData make_rsm_data(const ScenarioSpec& spec, int rep) {
    const std::uint64_t tag = fnv1a(spec.name);
    Rng rng = derive_stream(spec.master_seed, {tag, static_cast<std::uint64_t>(rep), kDataKey});
    RsmData d;
    if (spec.fixed_surface) {
        Rng srng = derive_stream(spec.master_seed, {tag, kSurfaceKey});
        d.surface = make_surface(spec, srng);
    } else {
        d.surface = make_surface(spec, rng);
    }
    d.y = evaluate_truth(d.surface, spec.design.settings, rng);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    d.oos.resize(spec.n_oos, spec.design.m());
    for (Eigen::Index i = 0; i < d.oos.rows(); ++i) {
        for (Eigen::Index j = 0; j < d.oos.cols(); ++j) {
            d.oos(i, j) = unif(rng);
        }
    }
    d.targets = spec.oos_noise ? evaluate_truth(d.surface, d.oos, rng)
                               : evaluate_noiseless(d.surface, d.oos);
    return d;
}

struct ScreenData {
    ScreeningTruth truth;
    Eigen::VectorXd y;
};

ScreenData make_screen_data(const ScenarioSpec& spec, int rep) {
    Rng rng = derive_stream(spec.master_seed,
                            {fnv1a(spec.name), static_cast<std::uint64_t>(rep), kDataKey});
    ScreenData d;
    if (spec.study == Study::Screening) {
        d.truth = gen_screening_truth(spec.design.m(), spec.n_me, spec.n_2fi, rng);
    } else {
        d.truth = gen_ssd_truth(spec.design.m(), spec.ssd_scenario, rng, spec.random_signs)
                      .as_screening_truth();
    }
    d.y = realize_response(d.truth, spec.design, rng);
    return d;
}

TermSet candidates_for(const ScenarioSpec& spec) {
    const int m = spec.design.m();
    switch (spec.study) {
    case Study::Rsm:
        return full_second_order(m);
    case Study::Screening:
        return main_effects_and_2fi(m);
    case Study::Ssd:
        return main_effects(m);
    }
    throw InvalidArgument("unknown study");
}

MetricsRecord run_one(const ScenarioSpec& spec, const TermSet& candidates, const Eigen::MatrixXd& X,
                      int rep, const Method& method) {
    MetricsRecord rec;
    rec.scenario = spec.name;
    rec.method = method.label();
    rec.design = spec.design.name;
    rec.rep = rep;
    Rng mrng = derive_stream(spec.master_seed, {fnv1a(spec.name), static_cast<std::uint64_t>(rep),
                                                fnv1a(rec.method)});
    if (spec.study == Study::Rsm) {
        const RsmData d = make_rsm_data(spec, rep);
        rec.metric2 = kNaN;
        try {
            const Selected sel = run_regression(method, X, candidates, d.y, spec.params, mrng);
            const Eigen::VectorXd pred = build_model_matrix(d.oos, sel.terms) * sel.beta;
            rec.metric1 = rmspe(d.targets, pred);
            rec.model_size = sel.terms.size();
            if (sel.degenerate_cells) {
                add_flag(rec.flags, "degenerate_cells");
            }
        } catch (const Error& e) {
            rec.metric1 = kNaN;
            add_flag(rec.flags, failure_flag(e));
        }
        return rec;
    }

    const ScreenData d = make_screen_data(spec, rep);
    const TermSet truth_active = d.truth.active_terms();
    try {
        const Selected sel = run_regression(method, X, candidates, d.y, spec.params, mrng);
        const ScreeningScore sc =
            score_screening(truth_active, sel.terms.without_intercept(), candidates, spec.factor_level);
        rec.metric1 = sc.power;
        rec.metric2 = sc.type1;
        rec.model_size = sel.terms.size();
        rec.n_active = sc.n_active;
        rec.n_inactive = sc.n_inactive;
        rec.n_true_positive = sc.n_true_positive;
        rec.n_false_positive = sc.n_false_positive;
        if (sel.degenerate_cells) {
            add_flag(rec.flags, "degenerate_cells");
        }
    } catch (const Error& e) {
        rec.metric1 = kNaN;
        rec.metric2 = kNaN;
        add_flag(rec.flags, failure_flag(e));
    }
    return rec;
}

std::vector<MetricsRecord> run_checked(const ScenarioSpec& spec, Study expected, const RunOptions& opts) {
    if (spec.study != expected) {
        throw InvalidArgument("scenario '" + spec.name + "' is a " + to_string(spec.study) +
                              " study, not " + to_string(expected));
    }
    return run_scenario_reps(spec, 0, spec.n_reps, opts);
}

} // namespace

std::string to_string(Study s) {
    switch (s) {
    case Study::Rsm:
        return "rsm";
    case Study::Screening:
        return "screening";
    case Study::Ssd:
        return "ssd";
    }
    return "?";
}

Study parse_study(const std::string& text) {
    if (text == "rsm") {
        return Study::Rsm;
    }
    if (text == "screening") {
        return Study::Screening;
    }
    if (text == "ssd") {
        return Study::Ssd;
    }
    throw InvalidArgument("unknown study '" + text + "' (expected rsm, screening or ssd)");
}

std::string to_string(SurfaceKind s) {
    switch (s) {
    case SurfaceKind::FullSecondOrder:
        return "full_second_order";
    case SurfaceKind::ReducedSecondOrder:
        return "reduced_second_order";
    case SurfaceKind::SixthOrder:
        return "sixth_order";
    }
    return "?";
}

SurfaceKind parse_surface(const std::string& text) {
    if (text == "full_second_order") {
        return SurfaceKind::FullSecondOrder;
    }
    if (text == "reduced_second_order") {
        return SurfaceKind::ReducedSecondOrder;
    }
    if (text == "sixth_order") {
        return SurfaceKind::SixthOrder;
    }
    throw InvalidArgument("unknown surface '" + text +
                          "' (expected full_second_order, reduced_second_order or sixth_order)");
}

std::string Method::label() const {
    switch (kind) {
    case MethodKind::FullModel:
        return "full_model";
    case MethodKind::RegressionCv:
        return "regression_cv" + std::to_string(k);
    case MethodKind::RegressionLoocv:
        return "regression_loocv";
    case MethodKind::RegressionLb:
        return "regression_lb";
    case MethodKind::LassoCv:
        return "lasso_cv" + std::to_string(k);
    case MethodKind::LassoLoocv:
        return "lasso_loocv";
    case MethodKind::GaussLasso:
        return "gauss_lasso";
    }
    return "?";
}

Method Method::parse(const std::string& label) {
    auto with_k = [&](const std::string& prefix, MethodKind kind) -> std::optional<Method> {
        if (label.rfind(prefix, 0) != 0 || label.size() == prefix.size()) {
            return std::nullopt;
        }
        const std::string digits = label.substr(prefix.size());
        int k = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
        if (ec != std::errc() || ptr != digits.data() + digits.size() || k < 2) {
            throw InvalidArgument("bad fold count in method '" + label + "'");
        }
        return Method{kind, k};
    };
    if (label == "full_model") {
        return {MethodKind::FullModel, 5};
    }
    if (label == "regression_loocv") {
        return {MethodKind::RegressionLoocv, 5};
    }
    if (label == "regression_lb") {
        return {MethodKind::RegressionLb, 5};
    }
    if (label == "lasso_loocv") {
        return {MethodKind::LassoLoocv, 5};
    }
    if (label == "gauss_lasso") {
        return {MethodKind::GaussLasso, 5};
    }
    if (auto m = with_k("regression_cv", MethodKind::RegressionCv)) {
        return *m;
    }
    if (auto m = with_k("lasso_cv", MethodKind::LassoCv)) {
        return *m;
    }
    throw InvalidArgument("unknown method '" + label + "'");
}

bool Method::compatible_with(Study s) const {
    switch (kind) {
    case MethodKind::FullModel:
        return s == Study::Rsm;
    case MethodKind::LassoCv:
    case MethodKind::LassoLoocv:
    case MethodKind::GaussLasso:
        return s != Study::Rsm;
    default:
        return true;
    }
}

double ScenarioSpec::effective_steepness() const {
    if (steepness >= 0.0) {
        return steepness;
    }
    return surface == SurfaceKind::SixthOrder ? testbed.steep_steepness : testbed.flat_steepness;
}

void ScenarioSpec::validate() const {
    auto fail = [&](const std::string& msg) {
        throw InvalidArgument("scenario '" + name + "': " + msg);
    };
    if (name.empty()) {
        throw InvalidArgument("scenario without a name");
    }
    if (n_reps < 1) {
        fail("reps must be at least 1");
    }
    if (methods.empty()) {
        fail("no methods");
    }
    if (design.n() < 3 || design.m() < 1) {
        fail("design is empty or too small");
    }
    std::set<std::string> seen;
    for (const Method& mth : methods) {
        if (!mth.compatible_with(study)) {
            fail("method " + mth.label() + " cannot be used in a " + to_string(study) + " study");
        }
        if (!seen.insert(mth.label()).second) {
            fail("method " + mth.label() + " listed twice");
        }
        const bool kfold = mth.kind == MethodKind::RegressionCv || mth.kind == MethodKind::LassoCv;
        if (kfold && mth.k > design.n()) {
            fail("fold count exceeds the run count");
        }
    }
    if (!(params.lb_t > 0.0 && params.lb_t <= 1.0)) {
        fail("t must lie in (0, 1]");
    }
    if (params.lb_n_bootstrap < 1) {
        fail("n_bootstrap must be at least 1");
    }
    if (params.lasso.n_lambda < 2) {
        fail("n_lambda must be at least 2");
    }
    if (!(params.lasso.min_ratio > 0.0 && params.lasso.min_ratio < 1.0)) {
        fail("lambda_min_ratio must lie in (0, 1)");
    }
    if (!(params.gamma_factor >= 0.0)) {
        fail("gamma_factor must be nonnegative");
    }
    switch (study) {
    case Study::Rsm:
        if (n_oos < 1) {
            fail("n_oos must be at least 1");
        }
        if (surface == SurfaceKind::SixthOrder && design.m() < 3) {
            fail("sixth-order surfaces need at least 3 factors");
        }
        if (design.m() < 2) {
            fail("response-surface studies need at least 2 factors");
        }
        if (!(testbed.noise_sd >= 0.0)) {
            fail("noise_sd must be nonnegative");
        }
        break;
    case Study::Screening: {
        const int m = design.m();
        if (m < 2 || n_me < 0 || n_me > m || n_2fi < 0) {
            fail("need 0 <= n_me <= m");
        }
        const int eligible = m * (m - 1) / 2 - (m - n_me) * (m - n_me - 1) / 2;
        if (n_2fi > eligible) {
            fail("too many interactions for weak heredity");
        }
        break;
    }
    case Study::Ssd:
        if (ssd_scenario < 1 || ssd_scenario > 4) {
            fail("ssd_scenario must be 1..4");
        }
        if (static_cast<int>(ssd_scenario_magnitudes(ssd_scenario).size()) > design.m()) {
            fail("scenario has more active factors than the design");
        }
        break;
    }
}

bool MetricsRecord::failed() const { return flags.find("fail_") != std::string::npos; }

ScreeningScore score_screening(const TermSet& truth_active, const TermSet& declared,
                               const TermSet& candidates, bool factor_level) {
    ScreeningScore s;
    if (factor_level) {
        const int m = candidates.m();
        std::vector<char> act(static_cast<std::size_t>(m), 0);
        std::vector<char> dec(static_cast<std::size_t>(m), 0);
        for (const Term& t : truth_active) {
            for (int f : t.factors()) {
                act[static_cast<std::size_t>(f)] = 1;
            }
        }
        for (const Term& t : declared) {
            for (int f : t.factors()) {
                dec[static_cast<std::size_t>(f)] = 1;
            }
        }
        for (int f = 0; f < m; ++f) {
            const bool a = act[static_cast<std::size_t>(f)] != 0;
            const bool d = dec[static_cast<std::size_t>(f)] != 0;
            s.n_active += a;
            s.n_inactive += !a;
            s.n_true_positive += a && d;
            s.n_false_positive += !a && d;
        }
    } else {
        for (const Term& t : candidates) {
            if (t.is_intercept()) {
                continue;
            }
            const bool a = truth_active.contains(t);
            const bool d = declared.contains(t);
            s.n_active += a;
            s.n_inactive += !a;
            s.n_true_positive += a && d;
            s.n_false_positive += !a && d;
        }
    }
    s.power = s.n_active > 0 ? static_cast<double>(s.n_true_positive) / s.n_active : kNaN;
    s.type1 = s.n_inactive > 0 ? static_cast<double>(s.n_false_positive) / s.n_inactive : kNaN;
    return s;
}

std::vector<MetricsRecord> run_scenario_reps(const ScenarioSpec& spec, int rep_begin, int rep_end,
                                             const RunOptions& opts) {
    spec.validate();
    if (rep_begin < 0 || rep_end < rep_begin) {
        throw InvalidArgument("bad replication range");
    }
    const TermSet candidates = candidates_for(spec);
    const Eigen::MatrixXd X = build_model_matrix(spec.design, candidates);
    const std::size_t n_methods = spec.methods.size();
    const std::size_t total = static_cast<std::size_t>(rep_end - rep_begin) * n_methods;
    std::vector<MetricsRecord> out(total);

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total) {
                return;
            }
            try {
                const int rep = rep_begin + static_cast<int>(i / n_methods);
                out[i] = run_one(spec, candidates, X, rep, spec.methods[i % n_methods]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next.store(total);
                return;
            }
            const std::size_t d = done.fetch_add(1) + 1;
            if (opts.progress) {
                std::lock_guard<std::mutex> lock(progress_mutex);
                opts.progress(d, total);
            }
        }
    };
    const int threads = std::max(1, opts.threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return out;
}

std::vector<MetricsRecord> run_rsm_scenario(const ScenarioSpec& spec, const RunOptions& opts) {
    return run_checked(spec, Study::Rsm, opts);
}

std::vector<MetricsRecord> run_screening_scenario(const ScenarioSpec& spec, const RunOptions& opts) {
    return run_checked(spec, Study::Screening, opts);
}

std::vector<MetricsRecord> run_ssd_scenario(const ScenarioSpec& spec, const RunOptions& opts) {
    return run_checked(spec, Study::Ssd, opts);
}

std::vector<MetricsRecord> run_scenario(const ScenarioSpec& spec, const RunOptions& opts) {
    return run_scenario_reps(spec, 0, spec.n_reps, opts);
}

std::vector<SummaryRow> summarize(const std::vector<MetricsRecord>& records) {
    std::vector<SummaryRow> rows;
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    struct Acc {
        std::vector<double> m1, m2, size;
    };
    std::vector<Acc> acc;
    for (const MetricsRecord& r : records) {
        const auto key = std::make_pair(r.scenario, r.method);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, rows.size()).first;
            SummaryRow row;
            row.scenario = r.scenario;
            row.method = r.method;
            row.design = r.design;
            rows.push_back(row);
            acc.emplace_back();
        }
        SummaryRow& row = rows[it->second];
        Acc& a = acc[it->second];
        ++row.n;
        if (r.failed()) {
            ++row.failures;
            continue;
        }
        if (!std::isnan(r.metric1)) {
            a.m1.push_back(r.metric1);
        }
        if (!std::isnan(r.metric2)) {
            a.m2.push_back(r.metric2);
        }
        if (r.model_size >= 0) {
            a.size.push_back(r.model_size);
        }
    }
    auto mean = [](const std::vector<double>& v) {
        if (v.empty()) {
            return kNaN;
        }
        double s = 0.0;
        for (double x : v) {
            s += x;
        }
        return s / static_cast<double>(v.size());
    };
    auto sd = [&](const std::vector<double>& v) {
        if (v.empty()) {
            return kNaN;
        }
        if (v.size() == 1) {
            return 0.0;
        }
        const double mu = mean(v);
        double s = 0.0;
        for (double x : v) {
            s += (x - mu) * (x - mu);
        }
        return std::sqrt(s / static_cast<double>(v.size() - 1));
    };
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].metric1_mean = mean(acc[i].m1);
        rows[i].metric1_sd = sd(acc[i].m1);
        rows[i].metric2_mean = mean(acc[i].m2);
        rows[i].metric2_sd = sd(acc[i].m2);
        rows[i].model_size_mean = mean(acc[i].size);
    }
    return rows;
}

std::string format_number(double v) {
    if (std::isnan(v)) {
        return "";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_records_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
    out << "scenario,method,design,rep,metric1,metric2,model_size,flags\n";
    for (const MetricsRecord& r : records) {
        out << r.scenario << ',' << r.method << ',' << r.design << ',' << r.rep << ','
            << format_number(r.metric1) << ',' << format_number(r.metric2) << ',';
        if (r.model_size >= 0) {
            out << r.model_size;
        }
        out << ',' << r.flags << '\n';
    }
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double parse_number(const std::string& s, int line_no) {
    if (s.empty()) {
        return kNaN;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw InvalidArgument("records line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
    return v;
}

} // namespace

std::vector<MetricsRecord> read_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw InvalidArgument("records file is empty");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != "scenario,method,design,rep,metric1,metric2,model_size,flags") {
        throw InvalidArgument("records file has an unexpected header");
    }
    std::vector<MetricsRecord> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != 8) {
            throw InvalidArgument("records line " + std::to_string(line_no) + ": expected 8 fields");
        }
        MetricsRecord r;
        r.scenario = cells[0];
        r.method = cells[1];
        r.design = cells[2];
        r.rep = static_cast<int>(parse_number(cells[3], line_no));
        r.metric1 = parse_number(cells[4], line_no);
        r.metric2 = parse_number(cells[5], line_no);
        r.model_size = cells[6].empty() ? -1 : static_cast<int>(parse_number(cells[6], line_no));
        r.flags = cells[7];
        out.push_back(std::move(r));
    }
    return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "scenario,method,design,n,failures,metric1_mean,metric1_sd,metric2_mean,metric2_sd,"
           "model_size_mean\n";
    for (const SummaryRow& r : rows) {
        out << r.scenario << ',' << r.method << ',' << r.design << ',' << r.n << ',' << r.failures
            << ',' << format_number(r.metric1_mean) << ',' << format_number(r.metric1_sd) << ','
            << format_number(r.metric2_mean) << ',' << format_number(r.metric2_sd) << ','
            << format_number(r.model_size_mean) << '\n';
    }
}

} // namespace cvdoe
