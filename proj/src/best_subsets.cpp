#include "cvdoe/best_subsets.hpp"

#include "cvdoe/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cvdoe {

namespace {

// A column is aliased when its residual sum of squares falls below this
// fraction of its raw sum of squares.
constexpr double kAliasTolerance = 1e-10;
constexpr double kTieTolerance = 1e-12;

struct Incumbent {
    bool set = false;
    double rss = std::numeric_limits<double>::infinity();
    bool degenerate = false;
    std::vector<int> ranks;  // sorted canonical ranks of the chosen candidates
    std::vector<int> order_ids;
};

// Depth-first branch and bound on the augmented cross-product matrix
// A = [G g; g' rss] of the free columns residualized on the chosen ones.
// Choosing a column is one sweep of A, so child RSS values cost O(1) and a
// node costs O(f^2) regardless of the number of runs.
class Search {
  public:
    Search(Eigen::MatrixXd cross, std::vector<double> alias2, std::vector<int> canonical_rank,
           int s_max, double tol)
        : p_(static_cast<int>(cross.rows()) - 1), s_max_(s_max), tol_(tol),
          alias2_(std::move(alias2)), rank_(std::move(canonical_rank)),
          best_(static_cast<std::size_t>(s_max) + 1) {
        const auto depths = static_cast<std::size_t>(s_max) + 1;
        A_.reserve(depths);
        for (std::size_t d = 0; d < depths; ++d) {
            A_.emplace_back(p_ + 1, p_ + 1);
        }
        A_[0] = std::move(cross);
        bound_.resize(depths);
        child_rss_.resize(depths);
        child_alias_.resize(depths);
        free_.resize(depths);
        L_.resize(p_, p_);
        z_.resize(p_);
        w_.resize(p_);
        cols_.reserve(static_cast<std::size_t>(p_));
    }

    void run() {
        std::vector<int> free(static_cast<std::size_t>(p_));
        std::iota(free.begin(), free.end(), 0);
        current_.clear();
        expand(0, A_[0](p_, p_), false, free);
    }

    const std::vector<Incumbent>& best() const { return best_; }
    std::int64_t nodes() const { return nodes_; }

  private:
    bool all_cut(double bound, int lo, int hi) const {
        for (int s = lo; s <= hi; ++s) {
            const auto& b = best_[static_cast<std::size_t>(s)];
            if (!b.set || !(bound > b.rss + tol_)) {
                return false;
            }
        }
        return true;
    }

    bool worth(int s, double rss) const {
        const auto& b = best_[static_cast<std::size_t>(s)];
        return !b.set || rss <= b.rss + tol_;
    }

    void consider(int s, double rss, bool degenerate) {
        auto& b = best_[static_cast<std::size_t>(s)];
        bool take = false;
        std::vector<int> ranks;
        if (!b.set || rss < b.rss - tol_) {
            take = true;
        } else if (rss <= b.rss + tol_) {
            if (degenerate != b.degenerate) {
                take = !degenerate;
            } else {
                ranks.reserve(current_.size());
                for (int id : current_) {
                    ranks.push_back(rank_[static_cast<std::size_t>(id)]);
                }
                std::sort(ranks.begin(), ranks.end());
                take = ranks < b.ranks;
            }
        }
        if (!take) {
            return;
        }
        if (ranks.empty()) {
            for (int id : current_) {
                ranks.push_back(rank_[static_cast<std::size_t>(id)]);
            }
            std::sort(ranks.begin(), ranks.end());
        }
        b.set = true;
        b.rss = rss;
        b.degenerate = degenerate;
        b.ranks = std::move(ranks);
        b.order_ids = current_;
    }

    bool aliased(double resid2, int id) const {
        return resid2 <= alias2_[static_cast<std::size_t>(id)];
    }

    // Fills bound[c] = RSS(I u free[c..f)) by growing a Cholesky factor of the
    // tail's cross-product block from the last column backwards. Stops once the
    // tail reproduces the response; earlier bounds stay zero.
    void tail_bounds(const Eigen::MatrixXd& A, int f, double rss, const std::vector<int>& free,
                     std::vector<double>& bound) {
        bound.assign(static_cast<std::size_t>(f), 0.0);
        cols_.clear();
        double brss = rss;
        int k = 0;
        for (int c = f - 1; c >= 0 && brss > tol_; --c) {
            // Solve L z = G[T, c] for the current tail T.
            for (int i = 0; i < k; ++i) {
                double v = A(cols_[static_cast<std::size_t>(i)], c);
                for (int j = 0; j < i; ++j) {
                    v -= L_(i, j) * z_(j);
                }
                z_(i) = v / L_(i, i);
            }
            const double d2 = A(c, c) - z_.head(k).squaredNorm();
            if (!aliased(d2, free[static_cast<std::size_t>(c)]) && d2 > 0.0) {
                const double d = std::sqrt(d2);
                L_.row(k).head(k) = z_.head(k).transpose();
                L_(k, k) = d;
                const double wk = (A(c, f) - z_.head(k).dot(w_.head(k))) / d;
                w_(k) = wk;
                brss = std::max(0.0, brss - wk * wk);
                cols_.push_back(c);
                ++k;
            }
            bound[static_cast<std::size_t>(c)] = brss;
        }
    }

    void expand(int q, double rss, bool degenerate, const std::vector<int>& free) {
        ++nodes_;
        const int f = static_cast<int>(free.size());
        const auto& A = A_[static_cast<std::size_t>(q)];
        if (q + 2 == s_max_ && f >= 2) {
            expand_last_two(A, q, rss, degenerate, free);
            return;
        }
        auto& child_rss = child_rss_[static_cast<std::size_t>(q)];
        auto& child_alias = child_alias_[static_cast<std::size_t>(q)];
        child_rss.resize(static_cast<std::size_t>(f));
        child_alias.resize(static_cast<std::size_t>(f));
        for (int c = 0; c < f; ++c) {
            const auto fc = static_cast<std::size_t>(c);
            const bool al = aliased(A(c, c), free[fc]);
            const double rc = al ? rss : std::max(0.0, rss - A(c, f) * A(c, f) / A(c, c));
            child_rss[fc] = rc;
            child_alias[fc] = al ? 1 : 0;
            if (worth(q + 1, rc)) {
                current_.push_back(free[fc]);
                consider(q + 1, rc, degenerate || al);
                current_.pop_back();
            }
        }
        if (q + 1 >= s_max_ || f < 2) {
            return;
        }

        auto& bound = bound_[static_cast<std::size_t>(q)];
        tail_bounds(A, f, rss, free, bound);

        auto& An = A_[static_cast<std::size_t>(q) + 1];
        auto& child_free = free_[static_cast<std::size_t>(q) + 1];
        for (int c = 0; c + 1 < f; ++c) {
            const auto fc = static_cast<std::size_t>(c);
            const int hi = std::min(s_max_, q + 1 + (f - c - 1));
            if (all_cut(bound[fc], q + 2, hi)) {
                continue;
            }
            const bool al = child_alias[fc] != 0;
            const int nf = f - c - 1;
            // Tail columns c+1..f-1 and the response (index f) are contiguous.
            const auto tail = A.block(c + 1, c + 1, nf + 1, nf + 1);
            if (al) {
                An.topLeftCorner(nf + 1, nf + 1) = tail;
            } else {
                const auto v = A.col(c).segment(c + 1, nf + 1);
                An.topLeftCorner(nf + 1, nf + 1).noalias() = tail - (v * v.transpose()) / A(c, c);
            }
            child_free.assign(free.begin() + c + 1, free.end());
            current_.push_back(free[fc]);
            expand(q + 1, child_rss[fc], degenerate || al, child_free);
            current_.pop_back();
        }
    }

    // Sizes q+1 and q+2 straight from A: every pair costs O(1).
    void expand_last_two(const Eigen::MatrixXd& A, int q, double rss, bool degenerate,
                         const std::vector<int>& free) {
        const int f = static_cast<int>(free.size());
        auto& child_rss = child_rss_[static_cast<std::size_t>(q)];
        auto& child_alias = child_alias_[static_cast<std::size_t>(q)];
        child_rss.resize(static_cast<std::size_t>(f));
        child_alias.resize(static_cast<std::size_t>(f));
        for (int c = 0; c < f; ++c) {
            const auto fc = static_cast<std::size_t>(c);
            const bool al = aliased(A(c, c), free[fc]);
            child_alias[fc] = al ? 1 : 0;
            child_rss[fc] = al ? rss : std::max(0.0, rss - A(c, f) * A(c, f) / A(c, c));
            if (worth(q + 1, child_rss[fc])) {
                current_.push_back(free[fc]);
                consider(q + 1, child_rss[fc], degenerate || al);
                current_.pop_back();
            }
        }
        for (int c = 0; c + 1 < f; ++c) {
            const auto fc = static_cast<std::size_t>(c);
            const bool alias_c = child_alias[fc] != 0;
            current_.push_back(free[fc]);
            const double gcc = A(c, c);
            const double gc = A(c, f);
            for (int d = c + 1; d < f; ++d) {
                const auto fd = static_cast<std::size_t>(d);
                double rd = 0.0;
                bool alias_d = false;
                if (alias_c) {
                    alias_d = child_alias[fd] != 0;
                    rd = child_rss[fd];
                } else {
                    const double ratio = A(c, d) / gcc;
                    const double resid2 = A(d, d) - ratio * A(c, d);
                    alias_d = aliased(resid2, free[fd]);
                    if (alias_d) {
                        rd = child_rss[fc];
                    } else {
                        const double gd = A(d, f) - ratio * gc;
                        rd = std::max(0.0, child_rss[fc] - gd * gd / resid2);
                    }
                }
                if (worth(q + 2, rd)) {
                    current_.push_back(free[fd]);
                    consider(q + 2, rd, degenerate || alias_c || alias_d);
                    current_.pop_back();
                }
            }
            current_.pop_back();
        }
    }

    int p_;
    int s_max_;
    double tol_;
    std::vector<double> alias2_;
    std::vector<int> rank_;
    std::vector<Incumbent> best_;
    std::vector<Eigen::MatrixXd> A_;
    std::vector<std::vector<double>> bound_;
    std::vector<std::vector<double>> child_rss_;
    std::vector<std::vector<char>> child_alias_;
    std::vector<std::vector<int>> free_;
    Eigen::MatrixXd L_;
    Eigen::VectorXd z_;
    Eigen::VectorXd w_;
    std::vector<int> cols_;
    std::vector<int> current_;
    std::int64_t nodes_ = 0;
};

// Greedy forward-selection order over centered columns; aliased columns last.
std::vector<int> forward_order(const Eigen::MatrixXd& Xc, const Eigen::VectorXd& yc,
                               const std::vector<double>& alias2) {
    const int p = static_cast<int>(Xc.cols());
    Eigen::MatrixXd W = Xc;
    Eigen::VectorXd r = yc;
    std::vector<int> order;
    std::vector<char> used(static_cast<std::size_t>(p), 0);
    while (static_cast<int>(order.size()) < p) {
        int pick = -1;
        double gain = -1.0;
        for (int j = 0; j < p; ++j) {
            if (used[static_cast<std::size_t>(j)]) {
                continue;
            }
            const double wn2 = W.col(j).squaredNorm();
            if (wn2 <= alias2[static_cast<std::size_t>(j)]) {
                continue;
            }
            const double dot = W.col(j).dot(r);
            const double g = dot * dot / wn2;
            if (g > gain) {
                gain = g;
                pick = j;
            }
        }
        if (pick < 0) {
            break;
        }
        used[static_cast<std::size_t>(pick)] = 1;
        order.push_back(pick);
        const Eigen::VectorXd u = W.col(pick) / W.col(pick).norm();
        r -= u.dot(r) * u;
        const Eigen::RowVectorXd proj = u.transpose() * W;
        W -= u * proj;
    }
    for (int j = 0; j < p; ++j) {
        if (!used[static_cast<std::size_t>(j)]) {
            order.push_back(j);
        }
    }
    return order;
}

} // namespace

const SubsetEntry& SubsetPath::at(int s) const {
    if (s < 1 || s > s_max()) {
        throw InvalidArgument("subset size " + std::to_string(s) + " outside path range 1.." +
                              std::to_string(s_max()));
    }
    return per_size[static_cast<std::size_t>(s - 1)];
}

int default_s_max(int p, int n) { return std::max(0, std::min(p, n - 2)); }

std::vector<int> model_columns(const SubsetPath& path, const SubsetEntry& entry) {
    std::vector<int> cols{path.intercept_column};
    cols.insert(cols.end(), entry.columns.begin(), entry.columns.end());
    return cols;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, const std::vector<int>& cols) {
    Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        out.col(static_cast<Eigen::Index>(j)) = X.col(cols[j]);
    }
    return out;
}

SubsetPath best_subsets_path(const Eigen::MatrixXd& X, const TermSet& candidates,
                             const Eigen::VectorXd& y, int s_max) {
    const int n = static_cast<int>(X.rows());
    if (y.size() != n) {
        throw InvalidArgument("best_subsets_path: response length does not match rows");
    }
    if (candidates.columns() != X.cols()) {
        throw InvalidArgument("best_subsets_path: one term per column required");
    }
    const int icpt = candidates.intercept_index();
    if (icpt < 0) {
        throw InvalidArgument("best_subsets_path: candidate set must contain the intercept");
    }
    std::vector<int> positions;  // candidate positions of the free columns
    for (int j = 0; j < candidates.columns(); ++j) {
        if (j != icpt) {
            positions.push_back(j);
        }
    }
    const int p = static_cast<int>(positions.size());
    if (s_max < 0 || s_max > default_s_max(p, n)) {
        throw InvalidArgument("s_max " + std::to_string(s_max) + " outside [0, min(p, n-2)] = [0, " +
                              std::to_string(default_s_max(p, n)) + "]");
    }

    SubsetPath path;
    path.intercept_column = icpt;
    if (s_max == 0) {
        return path;
    }

    // Canonical tie-break rank of each free column.
    std::vector<int> by_term(static_cast<std::size_t>(p));
    std::iota(by_term.begin(), by_term.end(), 0);
    std::sort(by_term.begin(), by_term.end(), [&](int a, int b) {
        return candidates[positions[static_cast<std::size_t>(a)]] <
               candidates[positions[static_cast<std::size_t>(b)]];
    });
    std::vector<int> canon(static_cast<std::size_t>(p));
    for (int r = 0; r < p; ++r) {
        canon[static_cast<std::size_t>(by_term[static_cast<std::size_t>(r)])] = r;
    }

    // Residualize on the intercept by centering.
    Eigen::MatrixXd Xc(n, p);
    std::vector<double> alias2(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) {
        const auto col = X.col(positions[static_cast<std::size_t>(j)]);
        Xc.col(j) = col.array() - col.mean();
        alias2[static_cast<std::size_t>(j)] = kAliasTolerance * std::max(col.squaredNorm(), 1e-300);
    }
    const Eigen::VectorXd yc = y.array() - y.mean();
    const double tss = yc.squaredNorm();
    const double tol = kTieTolerance * std::max(tss, 1e-300);

    auto finish_entry = [&](std::vector<int> free_ids, double rss, bool degenerate) {
        SubsetEntry e;
        for (int id : free_ids) {
            e.columns.push_back(positions[static_cast<std::size_t>(id)]);
        }
        std::sort(e.columns.begin(), e.columns.end());
        std::vector<int> term_pos{icpt};
        term_pos.insert(term_pos.end(), e.columns.begin(), e.columns.end());
        e.terms = candidates.subset(term_pos);
        e.rss = rss;
        e.degenerate = degenerate;
        return e;
    };

    if (tss <= 1e-28 * std::max(1.0, y.squaredNorm())) {
        // Every subset fits exactly; report the canonically first ones.
        path.constant_response = true;
        for (int s = 1; s <= s_max; ++s) {
            std::vector<int> ids(by_term.begin(), by_term.begin() + s);
            std::vector<int> cols{icpt};
            for (int id : ids) {
                cols.push_back(positions[static_cast<std::size_t>(id)]);
            }
            const bool degen = numerical_rank(select_columns(X, cols)) < s + 1;
            path.per_size.push_back(finish_entry(ids, 0.0, degen));
        }
        return path;
    }

    const std::vector<int> order = forward_order(Xc, yc, alias2);
    Eigen::MatrixXd Xa(n, p + 1);
    std::vector<double> alias_o(static_cast<std::size_t>(p));
    std::vector<int> canon_o(static_cast<std::size_t>(p));
    for (int k = 0; k < p; ++k) {
        const auto j = static_cast<std::size_t>(order[static_cast<std::size_t>(k)]);
        Xa.col(k) = Xc.col(static_cast<Eigen::Index>(j));
        alias_o[static_cast<std::size_t>(k)] = alias2[j];
        canon_o[static_cast<std::size_t>(k)] = canon[j];
    }
    Xa.col(p) = yc;
    Eigen::MatrixXd cross(p + 1, p + 1);
    cross.setZero();
    cross.selfadjointView<Eigen::Lower>().rankUpdate(Xa.transpose());
    cross.triangularView<Eigen::StrictlyUpper>() = cross.transpose();

    Search search(std::move(cross), std::move(alias_o), std::move(canon_o), s_max, tol);
    search.run();
    path.nodes = search.nodes();
    for (int s = 1; s <= s_max; ++s) {
        const auto& b = search.best()[static_cast<std::size_t>(s)];
        std::vector<int> ids;
        for (int k : b.order_ids) {
            ids.push_back(order[static_cast<std::size_t>(k)]);
        }
        SubsetEntry e = finish_entry(std::move(ids), b.rss, b.degenerate);
        // Report the winner's RSS and rank from an orthogonal factorization.
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(select_columns(X, model_columns(path, e)));
        qr.setThreshold(kRankTolerance);
        e.degenerate = e.degenerate || qr.rank() < s + 1;
        const Eigen::VectorXd beta = qr.solve(y);
        e.rss = (y - select_columns(X, model_columns(path, e)) * beta).squaredNorm();
        path.per_size.push_back(std::move(e));
    }
    return path;
}

FittedModel refit(const SubsetPath& path, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  int s) {
    const auto& e = path.at(s);
    return fit_ols(select_columns(X, model_columns(path, e)), y, e.terms);
}

FittedModel refit_full_data(const Eigen::MatrixXd& X, const TermSet& candidates,
                            const Eigen::VectorXd& y, int s_star) {
    return refit(best_subsets_path(X, candidates, y, s_star), X, y, s_star);
}

} // namespace cvdoe
