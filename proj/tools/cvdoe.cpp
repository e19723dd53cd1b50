// cvdoe: design generation, simulation runs and one-shot analyses.

#include "cvdoe/best_subsets.hpp"
#include "cvdoe/config.hpp"
#include "cvdoe/cv_select.hpp"
#include "cvdoe/design.hpp"
#include "cvdoe/error.hpp"
#include "cvdoe/lasso.hpp"
#include "cvdoe/little_bootstrap.hpp"
#include "cvdoe/rng.hpp"
#include "cvdoe/sim.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace cvdoe;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int default_threads() {
    if (const char* env = std::getenv("CVDOE_THREADS")) {
        try {
            return std::max(1, std::stoi(env));
        } catch (const std::exception&) {
            throw InvalidArgument("CVDOE_THREADS must be a positive integer");
        }
    }
    return 0;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << text;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream ss;
    ss << std::hex;
    ss.width(16);
    ss.fill('0');
    ss << v;
    return ss.str();
}

// --- gen-design -----------------------------------------------------------

struct GenDesignArgs {
    std::string kind;
    int m = 3;
    std::string alpha = "1";
    int centers = 0;
    std::string fraction = "full";
    std::string out;
};

int cmd_gen_design(const GenDesignArgs& a) {
    if (a.kind != "ccd" && a.kind != "bbd") {
        std::cerr << "error: unknown design '" << a.kind << "' (expected ccd or bbd)\n";
        return kExitUsage;
    }
    std::string ref = a.kind + " m=" + std::to_string(a.m) + " centers=" + std::to_string(a.centers);
    if (a.kind == "ccd") {
        ref += " alpha=" + a.alpha + " fraction=" + a.fraction;
    }
    const Design d = make_design(ref, ".");
    std::ostream* report = &std::cout;
    if (a.out.empty() || a.out == "-") {
        write_design_csv(std::cout, d);
        report = &std::cerr;
    } else {
        save_design_csv(a.out, d);
        std::cout << "wrote " << a.out << " (" << d.n() << " runs, " << d.m() << " factors)\n";
    }
    validate_design(d).print(*report);
    return 0;
}

// --- run ------------------------------------------------------------------

struct RunArgs {
    std::string config;
    std::string output;
    int threads = 0;
    bool quiet = false;
};

int cmd_run(const RunArgs& a) {
    const RunConfig cfg = load_config(a.config);
    int threads = a.threads;
    if (threads <= 0) {
        threads = default_threads();
    }
    if (threads <= 0) {
        threads = cfg.threads > 0 ? cfg.threads : 1;
    }
    const fs::path outdir = a.output.empty() ? fs::path(cfg.output) : fs::path(a.output);
    fs::create_directories(outdir);

    const std::string eff = effective_config(cfg);
    const std::uint64_t hash = fnv1a(eff);
    std::cout << "seed " << cfg.seed << "\n";
    std::cout << "config_hash " << hex64(hash) << "\n";
    std::cout << "threads " << threads << "\n";
    write_file(outdir / "effective_config.ini", eff);

    std::vector<MetricsRecord> all;
    for (const ScenarioSpec& s : cfg.scenarios) {
        RunOptions ro;
        ro.threads = threads;
        if (!a.quiet) {
            ro.progress = [&](std::size_t done, std::size_t total) {
                if (done == total || done % 50 == 0) {
                    std::cerr << "\r" << s.name << ": " << done << "/" << total << std::flush;
                }
            };
        }
        auto recs = run_scenario(s, ro);
        if (!a.quiet) {
            std::cerr << "\n";
        }
        all.insert(all.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
    }
    std::ostringstream records;
    write_records_csv(records, all);
    write_file(outdir / "records.csv", records.str());
    const auto summary = summarize(all);
    std::ostringstream sum;
    write_summary_csv(sum, summary);
    write_file(outdir / "summary.csv", sum.str());
    std::cout << sum.str();
    std::cout << "wrote " << (outdir / "records.csv").string() << " and "
              << (outdir / "summary.csv").string() << "\n";
    return 0;
}

// --- analyze --------------------------------------------------------------

struct AnalyzeArgs {
    std::string design;
    std::string response;
    std::string method;
    std::string model = "auto";
    std::uint64_t seed = 1;
    int s_max = -1;
    double t = 0.6;
    int n_bootstrap = 25;
};

Eigen::VectorXd read_response(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open response file " + path.string());
    }
    std::vector<double> v;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        try {
            std::size_t pos = 0;
            const double d = std::stod(line, &pos);
            if (pos != line.size()) {
                throw std::invalid_argument(line);
            }
            v.push_back(d);
        } catch (const std::exception&) {
            if (!first) {
                throw InvalidArgument("response file: '" + line + "' is not a number");
            }
        }
        first = false;
    }
    if (v.empty()) {
        throw InvalidArgument("response file " + path.string() + " has no values");
    }
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

TermSet analysis_candidates(const std::string& model, const Design& d) {
    if (model == "second_order") {
        return full_second_order(d.m());
    }
    if (model == "me2fi") {
        return main_effects_and_2fi(d.m());
    }
    if (model == "main_effects") {
        return main_effects(d.m());
    }
    if (model != "auto") {
        throw InvalidArgument("unknown model '" + model +
                              "' (expected auto, second_order, me2fi or main_effects)");
    }
    if (d.m() + 1 >= d.n() || d.m() < 2) {
        return main_effects(d.m());
    }
    // Two-level designs cannot estimate quadratics.
    const bool two_level = (d.settings.array().abs() == 1.0).all();
    if (two_level) {
        return main_effects_and_2fi(d.m());
    }
    return full_second_order(d.m());
}

void print_model(const TermSet& terms, const Eigen::VectorXd* beta) {
    std::cout << "selected terms (" << terms.size() << "):\n";
    for (int j = 0; j < terms.columns(); ++j) {
        std::cout << "  " << terms[j].label();
        if (beta != nullptr) {
            std::cout << "  " << (*beta)(j);
        }
        std::cout << '\n';
    }
}

int cmd_analyze(const AnalyzeArgs& a) {
    const Design d = load_design_csv(a.design);
    const Eigen::VectorXd y = read_response(a.response);
    if (y.size() != d.n()) {
        throw InvalidArgument("design has " + std::to_string(d.n()) + " runs but the response has " +
                              std::to_string(y.size()) + " values");
    }
    const Method method = Method::parse(a.method);
    const TermSet cand = analysis_candidates(a.model, d);
    const Eigen::MatrixXd X = build_model_matrix(d, cand);
    Rng rng = derive_stream(a.seed, {fnv1a(method.label())});
    const int n = d.n();
    std::cout << "method " << method.label() << ", " << cand.size() << " candidate terms, " << n
              << " runs\n";

    switch (method.kind) {
    case MethodKind::FullModel: {
        const FittedModel fm = fit_ols(X, y, cand);
        print_model(fm.terms, &fm.beta);
        std::cout << "rss " << fm.rss << '\n';
        return 0;
    }
    case MethodKind::RegressionCv:
    case MethodKind::RegressionLoocv: {
        const int k = method.kind == MethodKind::RegressionLoocv ? n : method.k;
        const FoldAssignment folds = make_folds(n, k, rng);
        const int limit = cv_default_s_max(folds, cand.size());
        const CvSelection sel =
            cv_select_and_refit(X, cand, y, folds, a.s_max < 0 ? limit : std::min(a.s_max, limit));
        print_model(sel.model.terms, &sel.model.beta);
        std::cout << "s_star " << sel.trace.s_star << "\ntrace\n";
        sel.trace.write_csv(std::cout);
        return 0;
    }
    case MethodKind::RegressionLb: {
        LbOptions lo;
        lo.t = a.t;
        lo.n_bootstrap = a.n_bootstrap;
        const int limit = default_s_max(cand.size(), n);
        lo.s_max = a.s_max < 0 ? limit : std::min(a.s_max, limit);
        double sigma2 = 0.0;
        if (n > X.cols()) {
            sigma2 = estimate_sigma2(X, y);
            std::cout << "sigma2 (full model) " << sigma2 << '\n';
        } else {
            const RidgeVariance rv = ridge_variance_estimate(build_model_matrix(d, cand.without_intercept()), y);
            sigma2 = rv.sigma2;
            std::cout << "sigma2 (ridge, lambda " << rv.lambda << ", df " << rv.df << ") " << sigma2 << '\n';
        }
        const LbSelection sel = lb_select_and_refit(X, cand, y, sigma2, lo, rng);
        print_model(sel.model.terms, &sel.model.beta);
        std::cout << "s_star " << sel.trace.s_star << "\ntrace\n";
        sel.trace.write_csv(std::cout);
        return 0;
    }
    case MethodKind::LassoCv:
    case MethodKind::LassoLoocv: {
        const int k = method.kind == MethodKind::LassoLoocv ? n : method.k;
        const FoldAssignment folds = make_folds(n, k, rng);
        const LassoCvResult res = lasso_cv_select(X, cand, y, folds);
        std::cout << "lambda_star " << res.lambda_star << " (index " << res.lambda_index << ")\n";
        std::cout << "selected terms (" << res.active_terms.size() << "):\n";
        std::cout << "  1  " << res.intercept << '\n';
        int pos = 0;
        for (const Term& t : cand) {
            if (t.is_intercept()) {
                continue;
            }
            if (res.coefficients(pos) != 0.0) {
                std::cout << "  " << t.label() << "  " << res.coefficients(pos) << '\n';
            }
            ++pos;
        }
        std::cout << "trace\n";
        res.write_csv(std::cout);
        return 0;
    }
    case MethodKind::GaussLasso: {
        const GaussLassoResult res = gauss_lasso_select(X, cand, y);
        std::cout << "lambda_star " << res.lambda_star << " (index " << res.lambda_index << ")\n";
        std::cout << "gamma " << res.gamma << '\n';
        print_model(res.model.terms, &res.model.beta);
        std::cout << "trace\n";
        res.write_csv(std::cout);
        return 0;
    }
    }
    return kExitUsage;
}

// --- summarize ------------------------------------------------------------

int cmd_summarize(const std::string& records, const std::string& out) {
    std::ifstream in(records);
    if (!in) {
        throw InvalidArgument("cannot open " + records);
    }
    const auto rows = summarize(read_records_csv(in));
    if (out.empty() || out == "-") {
        write_summary_csv(std::cout, rows);
    } else {
        std::ostringstream ss;
        write_summary_csv(ss, rows);
        write_file(out, ss.str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model selection for small designed experiments"};
    app.require_subcommand(1);

    GenDesignArgs gd;
    auto* gen = app.add_subcommand("gen-design", "Write a CCD or BBD as CSV and print diagnostics");
    gen->add_option("kind", gd.kind, "ccd or bbd")->required();
    gen->add_option("--m", gd.m, "Number of factors")->required();
    gen->add_option("--alpha", gd.alpha, "Axial distance (number or 'sqrt')");
    gen->add_option("--centers", gd.centers, "Center runs");
    gen->add_option("--fraction", gd.fraction, "CCD factorial part: full or half");
    gen->add_option("-o,--out", gd.out, "Output CSV (default stdout)");

    RunArgs ra;
    auto* run = app.add_subcommand("run", "Run every scenario of a config file");
    run->add_option("config", ra.config, "Config file")->required();
    run->add_option("-o,--output", ra.output, "Output directory (overrides the config)");
    run->add_option("--threads", ra.threads, "Worker threads (default: CVDOE_THREADS, then config)");
    run->add_flag("-q,--quiet", ra.quiet, "No progress counter");

    AnalyzeArgs aa;
    auto* analyze = app.add_subcommand("analyze", "Select a model for one design and response");
    analyze->add_option("--design", aa.design, "Design CSV")->required();
    analyze->add_option("--response", aa.response, "Response file, one value per line")->required();
    analyze->add_option("--method", aa.method, "Selection method label")->required();
    analyze->add_option("--model", aa.model, "auto, second_order, me2fi or main_effects");
    analyze->add_option("--seed", aa.seed, "Seed for folds and bootstrap draws");
    analyze->add_option("--s-max", aa.s_max, "Largest subset size");
    analyze->add_option("--t", aa.t, "Little bootstrap perturbation scale");
    analyze->add_option("--n-bootstrap", aa.n_bootstrap, "Little bootstrap replicates");

    std::string sum_in;
    std::string sum_out;
    auto* summ = app.add_subcommand("summarize", "Summarize a records.csv file");
    summ->add_option("records", sum_in, "records.csv")->required();
    summ->add_option("-o,--out", sum_out, "Output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            return cmd_gen_design(gd);
        }
        if (run->parsed()) {
            return cmd_run(ra);
        }
        if (analyze->parsed()) {
            return cmd_analyze(aa);
        }
        if (summ->parsed()) {
            return cmd_summarize(sum_in, sum_out);
        }
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
