#include "cvdoe/design.hpp"

#include "cvdoe/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace cvdoe {

namespace {

bool is_center_row(const Eigen::MatrixXd& s, Eigen::Index i) {
    return (s.row(i).array() == 0.0).all();
}

int count_center_rows(const Eigen::MatrixXd& s) {
    int c = 0;
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        c += is_center_row(s, i) ? 1 : 0;
    }
    return c;
}

// Two-level full factorial in standard order (first factor alternates fastest).
Eigen::MatrixXd full_factorial(int m) {
    const int n = 1 << m;
    Eigen::MatrixXd f(n, m);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < m; ++c) {
            f(r, c) = ((r >> c) & 1) ? 1.0 : -1.0;
        }
    }
    return f;
}

std::string trim(std::string s) {
    const auto ws = " \t\r\n";
    s.erase(0, s.find_first_not_of(ws));
    const auto last = s.find_last_not_of(ws);
    s.erase(last == std::string::npos ? 0 : last + 1);
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double parse_number(const std::string& cell, int line_no) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (first != last && *first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (cell.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        throw InvalidArgument("non-numeric cell '" + cell + "' on line " +
                              std::to_string(line_no));
    }
    return v;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

// Box-Behnken incidence blocks: each block varies its factors over a 2^k
// factorial while the rest stay at 0.
std::vector<std::vector<int>> bbd_blocks(int m) {
    switch (m) {
    case 3:
        return {{0, 1}, {0, 2}, {1, 2}};
    case 4:
        return {{0, 1}, {2, 3}, {0, 3}, {1, 2}, {0, 2}, {1, 3}};
    case 5:
        return {{0, 1}, {2, 3}, {1, 4}, {0, 2}, {3, 4},
                {1, 2}, {0, 3}, {2, 4}, {0, 4}, {1, 3}};
    case 6:
        return {{0, 1, 3}, {1, 2, 4}, {2, 3, 5}, {0, 3, 4}, {1, 4, 5}, {0, 2, 5}};
    case 7:
        return {{3, 4, 5}, {0, 5, 6}, {1, 4, 6}, {0, 1, 3},
                {2, 3, 6}, {0, 2, 4}, {1, 2, 5}};
    default:
        throw InvalidArgument("Box-Behnken designs are tabled for m in 3..7, got " +
                              std::to_string(m));
    }
}

} // namespace

double Design::max_abs() const { return settings.size() == 0 ? 0.0 : settings.cwiseAbs().maxCoeff(); }

Design Design::rows(const std::vector<int>& idx) const {
    Design out;
    out.name = name;
    out.settings.resize(static_cast<Eigen::Index>(idx.size()), settings.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.settings.row(static_cast<Eigen::Index>(i)) = settings.row(idx[i]);
    }
    out.n_center = count_center_rows(out.settings);
    return out;
}

Design ccd(int m, double alpha, int n_center, Fraction fraction) {
    if (m < 2) {
        throw InvalidArgument("central composite designs need m >= 2");
    }
    if (!(alpha > 0.0)) {
        throw InvalidArgument("axial distance must be positive");
    }
    if (n_center < 0) {
        throw InvalidArgument("center-point count must be nonnegative");
    }
    Eigen::MatrixXd factorial;
    if (fraction == Fraction::Full) {
        factorial = full_factorial(m);
    } else {
        if (m < 5 || m > 7) {
            throw InvalidArgument("half-fraction CCD is tabled for m in 5..7, got " +
                                  std::to_string(m));
        }
        // Defining relation I = x1 x2 ... xm.
        Eigen::MatrixXd base = full_factorial(m - 1);
        factorial.resize(base.rows(), m);
        factorial.leftCols(m - 1) = base;
        factorial.col(m - 1) = base.rowwise().prod();
    }
    const Eigen::Index nf = factorial.rows();
    Design d;
    d.settings = Eigen::MatrixXd::Zero(nf + 2 * m + n_center, m);
    d.settings.topRows(nf) = factorial;
    for (int i = 0; i < m; ++i) {
        d.settings(nf + 2 * i, i) = -alpha;
        d.settings(nf + 2 * i + 1, i) = alpha;
    }
    d.n_center = n_center;
    std::ostringstream name;
    name << "ccd_m" << m << (fraction == Fraction::Half ? "_half" : "") << "_a"
         << format_double(alpha) << "_c" << n_center;
    d.name = name.str();
    return d;
}

Design bbd(int m, int n_center) {
    if (n_center < 0) {
        throw InvalidArgument("center-point count must be nonnegative");
    }
    const auto blocks = bbd_blocks(m);
    std::vector<Eigen::RowVectorXd> rows;
    for (const auto& block : blocks) {
        const int k = static_cast<int>(block.size());
        const Eigen::MatrixXd f = full_factorial(k);
        for (Eigen::Index r = 0; r < f.rows(); ++r) {
            Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(m);
            for (int c = 0; c < k; ++c) {
                row(block[static_cast<std::size_t>(c)]) = f(r, c);
            }
            rows.push_back(row);
        }
    }
    Design d;
    d.settings = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()) + n_center, m);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        d.settings.row(static_cast<Eigen::Index>(i)) = rows[i];
    }
    d.n_center = n_center;
    d.name = "bbd_m" + std::to_string(m) + "_c" + std::to_string(n_center);
    return d;
}

Design read_design_csv(std::istream& in, std::string name) {
    std::string line;
    int line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split_csv_line(trim(line));
            break;
        }
    }
    if (header.empty()) {
        throw InvalidArgument("design file is empty");
    }
    const std::size_t m = header.size();
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        auto cells = split_csv_line(line);
        if (cells.size() != m) {
            throw InvalidArgument("ragged row on line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(m) + " cells, got " +
                                  std::to_string(cells.size()));
        }
        std::vector<double> row(m);
        for (std::size_t j = 0; j < m; ++j) {
            row[j] = parse_number(cells[j], line_no);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw InvalidArgument("design file has a header but no runs");
    }
    Design d;
    d.name = std::move(name);
    d.settings.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            d.settings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    d.n_center = count_center_rows(d.settings);
    return d;
}

Design load_design_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open design file " + path.string());
    }
    return read_design_csv(in, path.stem().string());
}

void write_design_csv(std::ostream& out, const Design& design) {
    for (int j = 0; j < design.m(); ++j) {
        out << (j ? "," : "") << 'x' << (j + 1);
    }
    out << '\n';
    for (int i = 0; i < design.n(); ++i) {
        for (int j = 0; j < design.m(); ++j) {
            out << (j ? "," : "") << format_double(design.settings(i, j));
        }
        out << '\n';
    }
}

void save_design_csv(const std::filesystem::path& path, const Design& design) {
    std::ofstream out(path);
    if (!out) {
        throw InvalidArgument("cannot write design file " + path.string());
    }
    write_design_csv(out, design);
}

double es2(const Design& design, Es2Normalization norm) {
    const int m = design.m();
    if (m < 2) {
        throw InvalidArgument("E(s^2) needs at least two factors");
    }
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < design.settings.rows(); ++i) {
        if (is_center_row(design.settings, i)) {
            continue;
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            const double v = design.settings(i, j);
            if (v != 1.0 && v != -1.0) {
                throw InvalidArgument("E(s^2) requires a two-level +/-1 design");
            }
        }
        keep.push_back(i);
    }
    Eigen::MatrixXd X(static_cast<Eigen::Index>(keep.size()), m);
    for (std::size_t r = 0; r < keep.size(); ++r) {
        X.row(static_cast<Eigen::Index>(r)) = design.settings.row(keep[r]);
    }
    const Eigen::MatrixXd S = X.transpose() * X;
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            total += S(i, j) * S(i, j);
        }
    }
    double pairs = m * (m - 1) / 2.0;
    if (norm == Es2Normalization::TwicePairs) {
        pairs *= 2.0;
    }
    return total / pairs;
}

DesignReport validate_design(const Design& design) {
    DesignReport r;
    r.n = design.n();
    r.m = design.m();
    r.n_center = count_center_rows(design.settings);
    r.max_abs = design.max_abs();
    r.balanced = true;
    for (int j = 0; j < r.m; ++j) {
        const double sum = design.settings.col(j).sum();
        r.column_sums.push_back(sum);
        if (std::abs(sum) > 1e-9 * std::max(1.0, r.max_abs) * r.n) {
            r.balanced = false;
        }
        std::set<double> levels(design.settings.col(j).data(),
                                design.settings.col(j).data() + r.n);
        r.level_counts.push_back(static_cast<int>(levels.size()));
    }
    if (r.n > 0 && r.m > 0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.settings);
        qr.setThreshold(1e-10);
        r.main_effect_rank = static_cast<int>(qr.rank());
    }
    std::map<std::vector<double>, int> seen;
    for (int i = 0; i < r.n; ++i) {
        std::vector<double> row(static_cast<std::size_t>(r.m));
        for (int j = 0; j < r.m; ++j) {
            row[static_cast<std::size_t>(j)] = design.settings(i, j);
        }
        if (seen[row]++ > 0) {
            ++r.duplicate_rows;
        }
    }
    r.supersaturated = r.n <= r.m;
    return r;
}

void DesignReport::print(std::ostream& out) const {
    out << "runs: " << n << "\nfactors: " << m << "\ncenter runs: " << n_center
        << "\nmax |level|: " << format_double(max_abs) << "\nbalanced: " << (balanced ? "yes" : "no")
        << "\nlevels per factor:";
    for (int c : level_counts) {
        out << ' ' << c;
    }
    out << "\nmain-effect rank: " << main_effect_rank << "\nduplicate runs: " << duplicate_rows
        << "\nsupersaturated: " << (supersaturated ? "yes" : "no") << '\n';
}

} // namespace cvdoe
