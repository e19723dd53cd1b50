#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace cvdoe {

/// Coded n x m factor settings.
struct Design {
    Eigen::MatrixXd settings;
    std::string name;
    int n_center = 0;

    int n() const { return static_cast<int>(settings.rows()); }
    int m() const { return static_cast<int>(settings.cols()); }
    double max_abs() const;

    /// Rows restricted to the given indices (in order).
    Design rows(const std::vector<int>& idx) const;
};

enum class Fraction { Full, Half };

/// Central composite design: 2^m (or 2^(m-1) with I = product of all factors)
/// factorial runs, 2m axial runs at +/-alpha, then n_center center runs.
Design ccd(int m, double alpha, int n_center, Fraction fraction = Fraction::Full);

/// Box-Behnken design from the tabulated incidence blocks (m in 3..7).
Design bbd(int m, int n_center);

/// Reads a design CSV: header of factor names, one run per row.
Design load_design_csv(const std::filesystem::path& path);
Design read_design_csv(std::istream& in, std::string name = "design");

/// Shortest round-trip decimal representation of every level.
void write_design_csv(std::ostream& out, const Design& design);
void save_design_csv(const std::filesystem::path& path, const Design& design);

enum class Es2Normalization {
    Pairs,      ///< divide by C(m,2)
    TwicePairs  ///< divide by 2 C(m,2)
};

/// E(s^2) over the main-effect columns of a two-level design. Center runs are
/// skipped; any other level outside {-1, +1} is an error.
double es2(const Design& design, Es2Normalization norm = Es2Normalization::Pairs);

struct DesignReport {
    int n = 0;
    int m = 0;
    int n_center = 0;
    std::vector<double> column_sums;
    std::vector<int> level_counts;
    bool balanced = false;     ///< every column sums to zero
    double max_abs = 0.0;
    int main_effect_rank = 0;  ///< rank of the n x m settings matrix
    int duplicate_rows = 0;
    bool supersaturated = false;

    void print(std::ostream& out) const;
};

DesignReport validate_design(const Design& design);

} // namespace cvdoe
