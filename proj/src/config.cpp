#include "cvdoe/config.hpp"

#include "cvdoe/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace cvdoe {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

// Looks a key up in the scenario section, then in [run].
class Lookup {
  public:
    Lookup(const pt::ptree& section, const pt::ptree* run, std::string name)
        : section_(section), run_(run), name_(std::move(name)) {}

    std::optional<std::string> raw(const std::string& key) {
        used_.insert(key);
        if (auto v = section_.get_optional<std::string>(key)) {
            return trim(*v);
        }
        if (run_ != nullptr) {
            if (auto v = run_->get_optional<std::string>(key)) {
                return trim(*v);
            }
        }
        return std::nullopt;
    }

    std::string str(const std::string& key, const std::string& fallback) {
        return raw(key).value_or(fallback);
    }

    std::string required(const std::string& key) {
        auto v = raw(key);
        if (!v || v->empty()) {
            throw InvalidArgument("scenario '" + name_ + "': missing key '" + key + "'");
        }
        return *v;
    }

    double number(const std::string& key, double fallback) {
        auto v = raw(key);
        if (!v) {
            return fallback;
        }
        try {
            std::size_t pos = 0;
            const double d = std::stod(*v, &pos);
            if (pos != v->size()) {
                throw std::invalid_argument(*v);
            }
            return d;
        } catch (const std::exception&) {
            throw InvalidArgument("scenario '" + name_ + "': key '" + key + "' is not a number: '" +
                                  *v + "'");
        }
    }

    int integer(const std::string& key, int fallback) {
        const double d = number(key, fallback);
        if (d != std::floor(d) || std::abs(d) > 1e9) {
            throw InvalidArgument("scenario '" + name_ + "': key '" + key + "' must be an integer");
        }
        return static_cast<int>(d);
    }

    bool boolean(const std::string& key, bool fallback) {
        auto v = raw(key);
        if (!v) {
            return fallback;
        }
        if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") {
            return true;
        }
        if (*v == "false" || *v == "0" || *v == "no" || *v == "off") {
            return false;
        }
        throw InvalidArgument("scenario '" + name_ + "': key '" + key + "' must be true or false");
    }

    void reject_unknown() const {
        for (const auto& kv : section_) {
            if (used_.count(kv.first) == 0) {
                throw InvalidArgument("scenario '" + name_ + "': unknown key '" + kv.first + "'");
            }
        }
    }

  private:
    const pt::ptree& section_;
    const pt::ptree* run_;
    std::string name_;
    std::set<std::string> used_;
};

ScenarioSpec parse_scenario(const std::string& name, const pt::ptree& section, const pt::ptree* run,
                            const std::filesystem::path& base_dir, std::uint64_t seed) {
    Lookup L(section, run, name);
    ScenarioSpec s;
    s.name = name;
    s.master_seed = seed;
    s.study = parse_study(L.required("study"));
    s.design_ref = L.required("design");
    s.design = make_design(s.design_ref, base_dir);
    if (s.design_ref.rfind("ccd", 0) != 0 && s.design_ref.rfind("bbd", 0) != 0) {
        std::filesystem::path p(s.design_ref);
        if (p.is_relative()) {
            p = base_dir / p;
        }
        s.design_ref = std::filesystem::absolute(p).lexically_normal().string();
    }
    if (auto dn = L.raw("design_name")) {
        s.design.name = *dn;
    }
    for (const std::string& m : split_list(L.required("methods"), ',')) {
        s.methods.push_back(Method::parse(m));
    }
    s.n_reps = L.integer("reps", 1);

    MethodParams& p = s.params;
    p.s_max = L.integer("s_max", p.s_max);
    p.lb_t = L.number("t", p.lb_t);
    p.lb_n_bootstrap = L.integer("n_bootstrap", p.lb_n_bootstrap);
    p.lb_variance_literal = L.boolean("lb_variance_literal", p.lb_variance_literal);
    p.ridge_grid = L.integer("ridge_grid", p.ridge_grid);
    p.lasso.n_lambda = L.integer("n_lambda", p.lasso.n_lambda);
    p.lasso.min_ratio = L.number("lambda_min_ratio", p.lasso.min_ratio);
    p.gamma_factor = L.number("gamma_factor", p.gamma_factor);
    p.gamma_per_lambda = L.boolean("gamma_per_lambda", p.gamma_per_lambda);

    s.surface = parse_surface(L.str("surface", to_string(s.surface)));
    s.steepness = L.number("steepness", s.steepness);
    TestbedConstants& c = s.testbed;
    c.magnitude_lo = L.number("magnitude_lo", c.magnitude_lo);
    c.magnitude_hi = L.number("magnitude_hi", c.magnitude_hi);
    c.power_damping = L.number("power_damping", c.power_damping);
    c.threefi_damping = L.number("threefi_damping", c.threefi_damping);
    c.intercept = L.number("intercept", c.intercept);
    c.p_main = L.number("p_main", c.p_main);
    c.p_2fi = L.number("p_2fi", c.p_2fi);
    c.p_quad = L.number("p_quad", c.p_quad);
    c.quad_strong_heredity = L.boolean("quad_strong_heredity", c.quad_strong_heredity);
    c.flat_steepness = L.number("flat_steepness", c.flat_steepness);
    c.steep_steepness = L.number("steep_steepness", c.steep_steepness);
    c.noise_sd = L.number("noise_sd", c.noise_sd);
    s.n_oos = L.integer("n_oos", s.n_oos);
    s.oos_noise = L.boolean("oos_noise", s.oos_noise);
    s.fixed_surface = L.boolean("fixed_surface", s.fixed_surface);

    s.n_me = L.integer("n_me", s.n_me);
    s.n_2fi = L.integer("n_2fi", s.n_2fi);
    s.ssd_scenario = L.integer("ssd_scenario", s.ssd_scenario);
    s.random_signs = L.boolean("random_signs", s.random_signs);
    s.factor_level = L.boolean("factor_level", s.factor_level);

    L.reject_unknown();
    s.validate();
    return s;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

} // namespace

Design make_design(const std::string& ref, const std::filesystem::path& base_dir) {
    const std::vector<std::string> parts = split_list(ref, ' ');
    if (parts.empty()) {
        throw InvalidArgument("empty design reference");
    }
    const std::string& kind = parts[0];
    if (kind != "ccd" && kind != "bbd") {
        std::filesystem::path p(ref);
        if (p.is_relative()) {
            p = base_dir / p;
        }
        Design d = load_design_csv(p);
        d.name = p.stem().string();
        return d;
    }
    int m = 0;
    int centers = -1;
    std::string alpha_text = "1";
    Fraction fraction = Fraction::Full;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto eq = parts[i].find('=');
        if (eq == std::string::npos) {
            throw InvalidArgument("design option '" + parts[i] + "' is not key=value");
        }
        const std::string key = parts[i].substr(0, eq);
        const std::string val = parts[i].substr(eq + 1);
        try {
            if (key == "m") {
                m = std::stoi(val);
            } else if (key == "centers") {
                centers = std::stoi(val);
            } else if (key == "alpha" && kind == "ccd") {
                alpha_text = val;
            } else if (key == "fraction" && kind == "ccd") {
                if (val == "full") {
                    fraction = Fraction::Full;
                } else if (val == "half") {
                    fraction = Fraction::Half;
                } else {
                    throw InvalidArgument("fraction must be full or half");
                }
            } else {
                throw InvalidArgument("unknown design option '" + key + "'");
            }
        } catch (const std::logic_error&) {
            throw InvalidArgument("bad value in design option '" + parts[i] + "'");
        }
    }
    if (m < 1 || centers < 0) {
        throw InvalidArgument("design '" + ref + "' needs m and centers");
    }
    if (kind == "bbd") {
        Design d = bbd(m, centers);
        d.name = "bbd" + std::to_string(m);
        return d;
    }
    double alpha = 0.0;
    if (alpha_text == "sqrt") {
        alpha = std::sqrt(static_cast<double>(m));
    } else {
        try {
            alpha = std::stod(alpha_text);
        } catch (const std::logic_error&) {
            throw InvalidArgument("alpha must be a number or 'sqrt'");
        }
    }
    Design d = ccd(m, alpha, centers, fraction);
    d.name = "ccd" + std::to_string(m) + (alpha_text == "1" ? "_fc" : "_a" + alpha_text);
    return d;
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    RunConfig cfg;
    const pt::ptree* run = nullptr;
    if (auto r = tree.get_child_optional("run")) {
        run = &*r;
        if (auto v = run->get_optional<std::string>("seed")) {
            try {
                std::size_t pos = 0;
                cfg.seed = std::stoull(trim(*v), &pos);
                if (pos != trim(*v).size()) {
                    throw std::invalid_argument(*v);
                }
            } catch (const std::logic_error&) {
                throw InvalidArgument("config: seed must be a nonnegative integer");
            }
        }
        cfg.output = trim(run->get<std::string>("output", cfg.output));
        cfg.threads = run->get<int>("threads", 0);
    }
    std::set<std::string> names;
    for (const auto& kv : tree) {
        if (kv.first == "run") {
            continue;
        }
        if (kv.first.rfind("scenario ", 0) != 0) {
            throw InvalidArgument("config: unknown section [" + kv.first + "]");
        }
        const std::string name = trim(kv.first.substr(9));
        if (name.empty() || name.find_first_of(", ") != std::string::npos) {
            throw InvalidArgument("config: scenario names must be nonempty without spaces or commas");
        }
        if (!names.insert(name).second) {
            throw InvalidArgument("config: duplicate scenario '" + name + "'");
        }
        cfg.scenarios.push_back(parse_scenario(name, kv.second, run, base_dir, cfg.seed));
    }
    if (cfg.scenarios.empty()) {
        throw InvalidArgument("config: no [scenario NAME] sections");
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open config " + path.string());
    }
    return parse_config(in, path.parent_path().empty() ? "." : path.parent_path());
}

std::string effective_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "[run]\nseed = " << cfg.seed << "\n";
    for (const ScenarioSpec& s : cfg.scenarios) {
        const std::string& ref = s.design_ref;
        out << "\n[scenario " << s.name << "]\n";
        out << "study = " << to_string(s.study) << '\n';
        out << "design = " << ref << '\n';
        out << "design_name = " << s.design.name << '\n';
        out << "methods = ";
        for (std::size_t i = 0; i < s.methods.size(); ++i) {
            out << (i ? ", " : "") << s.methods[i].label();
        }
        out << '\n';
        out << "reps = " << s.n_reps << '\n';
        const MethodParams& p = s.params;
        out << "s_max = " << p.s_max << '\n';
        out << "t = " << format_number(p.lb_t) << '\n';
        out << "n_bootstrap = " << p.lb_n_bootstrap << '\n';
        out << "lb_variance_literal = " << bool_text(p.lb_variance_literal) << '\n';
        out << "ridge_grid = " << p.ridge_grid << '\n';
        out << "n_lambda = " << p.lasso.n_lambda << '\n';
        out << "lambda_min_ratio = " << format_number(p.lasso.min_ratio) << '\n';
        out << "gamma_factor = " << format_number(p.gamma_factor) << '\n';
        out << "gamma_per_lambda = " << bool_text(p.gamma_per_lambda) << '\n';
        if (s.study == Study::Rsm) {
            const TestbedConstants& c = s.testbed;
            out << "surface = " << to_string(s.surface) << '\n';
            out << "steepness = " << format_number(s.steepness) << '\n';
            out << "magnitude_lo = " << format_number(c.magnitude_lo) << '\n';
            out << "magnitude_hi = " << format_number(c.magnitude_hi) << '\n';
            out << "power_damping = " << format_number(c.power_damping) << '\n';
            out << "threefi_damping = " << format_number(c.threefi_damping) << '\n';
            out << "intercept = " << format_number(c.intercept) << '\n';
            out << "p_main = " << format_number(c.p_main) << '\n';
            out << "p_2fi = " << format_number(c.p_2fi) << '\n';
            out << "p_quad = " << format_number(c.p_quad) << '\n';
            out << "quad_strong_heredity = " << bool_text(c.quad_strong_heredity) << '\n';
            out << "flat_steepness = " << format_number(c.flat_steepness) << '\n';
            out << "steep_steepness = " << format_number(c.steep_steepness) << '\n';
            out << "noise_sd = " << format_number(c.noise_sd) << '\n';
            out << "n_oos = " << s.n_oos << '\n';
            out << "oos_noise = " << bool_text(s.oos_noise) << '\n';
            out << "fixed_surface = " << bool_text(s.fixed_surface) << '\n';
        } else if (s.study == Study::Screening) {
            out << "n_me = " << s.n_me << '\n';
            out << "n_2fi = " << s.n_2fi << '\n';
            out << "factor_level = " << bool_text(s.factor_level) << '\n';
        } else {
            out << "ssd_scenario = " << s.ssd_scenario << '\n';
            out << "random_signs = " << bool_text(s.random_signs) << '\n';
            out << "factor_level = " << bool_text(s.factor_level) << '\n';
        }
    }
    return out.str();
}

} // namespace cvdoe
