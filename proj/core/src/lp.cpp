#include "ctrg/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ctrg/analytic.hpp"

namespace ctrg {

namespace {

constexpr double kPivotEps = 1e-9;

// Dense tableau simplex over the standardized system. Rows are equalities
// after slack introduction; the basis starts from slacks and artificials.
class Tableau {
public:
    Tableau(const LPProblem& p) {
        n_ = p.num_vars;
        m_eq_ = static_cast<int>(p.eq_rows.size());
        m_ub_ = static_cast<int>(p.ub_rows.size());
        m_ = m_eq_ + m_ub_;
        row_sign_.assign(m_, 1.0);

        // Column layout: structural | slack (one per ub row) | artificial.
        n_slack_ = m_ub_;
        cols_ = n_ + n_slack_; // artificials appended below
        std::vector<std::vector<double>> rows(m_, std::vector<double>(cols_, 0.0));
        rhs_.assign(m_, 0.0);
        for (int i = 0; i < m_eq_; ++i) {
            if (static_cast<int>(p.eq_rows[i].size()) != n_)
                throw std::invalid_argument("simplex: equality row width mismatch");
            for (int j = 0; j < n_; ++j) rows[i][j] = p.eq_rows[i][j];
            rhs_[i] = p.eq_rhs[i];
        }
        for (int i = 0; i < m_ub_; ++i) {
            if (static_cast<int>(p.ub_rows[i].size()) != n_)
                throw std::invalid_argument("simplex: inequality row width mismatch");
            const int r = m_eq_ + i;
            for (int j = 0; j < n_; ++j) rows[r][j] = p.ub_rows[i][j];
            rows[r][n_ + i] = 1.0;
            rhs_[r] = p.ub_rhs[i];
        }
        // Flip rows to make the right-hand side nonnegative.
        for (int i = 0; i < m_; ++i) {
            if (rhs_[i] < 0.0) {
                row_sign_[i] = -1.0;
                rhs_[i] = -rhs_[i];
                for (auto& v : rows[i]) v = -v;
            }
        }
        // A slack column with +1 can seed the basis; anything else gets an
        // artificial variable.
        basis_.assign(m_, -1);
        for (int i = 0; i < m_ub_; ++i) {
            const int r = m_eq_ + i;
            if (rows[r][n_ + i] > 0.5) basis_[r] = n_ + i;
        }
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < 0) {
                for (auto& row : rows) row.push_back(0.0);
                rows[i].back() = 1.0;
                basis_[i] = cols_;
                artificial_from_ = std::min(artificial_from_, cols_);
                ++cols_;
            }
        }
        t_ = std::move(rows);
        if (artificial_from_ == std::numeric_limits<int>::max()) artificial_from_ = cols_;
    }

    // Phase 1: maximize -(sum of artificials). Returns false if infeasible.
    bool phase1(int& iters, bool& used_bland) {
        if (artificial_from_ >= cols_) return true;
        std::vector<double> c(cols_, 0.0);
        for (int j = artificial_from_; j < cols_; ++j) c[j] = -1.0;
        const double v = optimize(c, iters, used_bland);
        if (v < -1e-8) return false;
        // Pivot any artificial still basic (at zero) out of the basis.
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] >= artificial_from_) {
                int enter = -1;
                for (int j = 0; j < artificial_from_; ++j)
                    if (std::abs(t_[i][j]) > kPivotEps) {
                        enter = j;
                        break;
                    }
                if (enter >= 0) pivot(i, enter);
                // Otherwise the row is redundant; the artificial stays at 0.
            }
        }
        return true;
    }

    double phase2(const std::vector<double>& obj, int& iters, bool& used_bland) {
        std::vector<double> c(cols_, 0.0);
        for (int j = 0; j < n_; ++j) c[j] = obj[j];
        // Artificials must not re-enter.
        blocked_from_ = artificial_from_;
        return optimize(c, iters, used_bland);
    }

    bool unbounded() const { return unbounded_; }

    std::vector<double> primal() const {
        std::vector<double> x(n_, 0.0);
        for (int i = 0; i < m_; ++i)
            if (basis_[i] < n_) x[basis_[i]] = rhs_[i];
        return x;
    }

    // Multipliers from B^T y = c_B over the standardized rows, mapped back
    // through the row sign flips.
    std::vector<double> duals(const LPProblem& p) const {
        std::vector<double> cb(m_, 0.0);
        for (int i = 0; i < m_; ++i)
            if (basis_[i] < n_) cb[i] = p.objective[basis_[i]];
        // Assemble B (columns of the standardized matrix for the basis).
        std::vector<double> B(static_cast<size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i)
            for (int k = 0; k < m_; ++k) B[static_cast<size_t>(i) * m_ + k] = col0_(i, basis_[k]);
        // Solve B^T y = cb by Gaussian elimination with partial pivoting.
        std::vector<double> M(static_cast<size_t>(m_) * (m_ + 1), 0.0);
        for (int i = 0; i < m_; ++i) {
            for (int j = 0; j < m_; ++j)
                M[static_cast<size_t>(i) * (m_ + 1) + j] = B[static_cast<size_t>(j) * m_ + i];
            M[static_cast<size_t>(i) * (m_ + 1) + m_] = cb[i];
        }
        for (int c = 0; c < m_; ++c) {
            int piv = c;
            for (int r = c + 1; r < m_; ++r)
                if (std::abs(M[static_cast<size_t>(r) * (m_ + 1) + c]) >
                    std::abs(M[static_cast<size_t>(piv) * (m_ + 1) + c]))
                    piv = r;
            if (std::abs(M[static_cast<size_t>(piv) * (m_ + 1) + c]) < 1e-13) continue;
            if (piv != c)
                for (int j = 0; j <= m_; ++j)
                    std::swap(M[static_cast<size_t>(c) * (m_ + 1) + j],
                              M[static_cast<size_t>(piv) * (m_ + 1) + j]);
            const double d = M[static_cast<size_t>(c) * (m_ + 1) + c];
            for (int r = 0; r < m_; ++r) {
                if (r == c) continue;
                const double f = M[static_cast<size_t>(r) * (m_ + 1) + c] / d;
                if (f == 0.0) continue;
                for (int j = c; j <= m_; ++j)
                    M[static_cast<size_t>(r) * (m_ + 1) + j] -=
                        f * M[static_cast<size_t>(c) * (m_ + 1) + j];
            }
        }
        std::vector<double> y(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            const double d = M[static_cast<size_t>(i) * (m_ + 1) + i];
            y[i] = (std::abs(d) < 1e-13) ? 0.0 : M[static_cast<size_t>(i) * (m_ + 1) + m_] / d;
        }
        for (int i = 0; i < m_; ++i) y[i] *= row_sign_[i];
        return y;
    }

private:
    // Original (unpivoted) standardized column entry for row i, column j.
    double col0_(int i, int j) const {
        // Reconstructing the original matrix is unnecessary: we stash it at
        // construction time.
        return a0_[static_cast<size_t>(i) * cols0_ + j];
    }

public:
    void snapshot_original() {
        cols0_ = cols_;
        a0_.assign(static_cast<size_t>(m_) * cols_, 0.0);
        for (int i = 0; i < m_; ++i)
            for (int j = 0; j < cols_; ++j) a0_[static_cast<size_t>(i) * cols_ + j] = t_[i][j];
    }

private:
    void pivot(int row, int col) {
        const double d = t_[row][col];
        for (int j = 0; j < cols_; ++j) t_[row][j] /= d;
        rhs_[row] /= d;
        for (int i = 0; i < m_; ++i) {
            if (i == row) continue;
            const double f = t_[i][col];
            if (f == 0.0) continue;
            for (int j = 0; j < cols_; ++j) t_[i][j] -= f * t_[row][j];
            rhs_[i] -= f * rhs_[row];
        }
        basis_[row] = col;
    }

    double optimize(const std::vector<double>& c, int& iters, bool& used_bland) {
        unbounded_ = false;
        const int bland_after = 50 * (m_ + cols_);
        const int hard_cap = 400 * (m_ + cols_ + 10);
        int local_iter = 0;
        while (true) {
            // Reduced costs r_j = c_j - y^T A_j via the current tableau.
            std::vector<double> red(cols_, 0.0);
            for (int j = 0; j < cols_; ++j) {
                if (j >= blocked_from_) continue;
                double zj = 0.0;
                for (int i = 0; i < m_; ++i) {
                    const int bi = basis_[i];
                    const double cb = (bi < static_cast<int>(c.size())) ? c[bi] : 0.0;
                    if (cb != 0.0) zj += cb * t_[i][j];
                }
                const double cj = (j < static_cast<int>(c.size())) ? c[j] : 0.0;
                red[j] = cj - zj;
            }
            const bool bland = local_iter >= bland_after;
            used_bland = used_bland || bland;
            int enter = -1;
            if (bland) {
                for (int j = 0; j < cols_; ++j)
                    if (red[j] > kPivotEps && j < blocked_from_) {
                        enter = j;
                        break;
                    }
            } else {
                double best = kPivotEps;
                for (int j = 0; j < cols_; ++j)
                    if (j < blocked_from_ && red[j] > best) {
                        best = red[j];
                        enter = j;
                    }
            }
            if (enter < 0) break; // optimal
            int leave = -1;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m_; ++i) {
                if (t_[i][enter] > kPivotEps) {
                    const double ratio = rhs_[i] / t_[i][enter];
                    if (ratio < best_ratio - 1e-12 ||
                        (ratio < best_ratio + 1e-12 && leave >= 0 && basis_[i] < basis_[leave])) {
                        best_ratio = ratio;
                        leave = i;
                    }
                }
            }
            if (leave < 0) {
                unbounded_ = true;
                break;
            }
            pivot(leave, enter);
            ++local_iter;
            ++iters;
            if (local_iter > hard_cap)
                throw std::runtime_error("simplex: iteration cap hit (cycling?)");
        }
        double v = 0.0;
        for (int i = 0; i < m_; ++i) {
            const int bi = basis_[i];
            if (bi < static_cast<int>(c.size()) && c[bi] != 0.0) v += c[bi] * rhs_[i];
        }
        return v;
    }

    int n_ = 0, m_eq_ = 0, m_ub_ = 0, m_ = 0, n_slack_ = 0, cols_ = 0, cols0_ = 0;
    int artificial_from_ = std::numeric_limits<int>::max();
    int blocked_from_ = std::numeric_limits<int>::max();
    bool unbounded_ = false;
    std::vector<std::vector<double>> t_;
    std::vector<double> rhs_, row_sign_, a0_;
    std::vector<int> basis_;
};

} // namespace

LPSolution simplex_solve(const LPProblem& p) {
    if (static_cast<int>(p.objective.size()) != p.num_vars)
        throw std::invalid_argument("simplex: objective width mismatch");
    Tableau tab(p);
    tab.snapshot_original();

    LPSolution sol;
    if (!tab.phase1(sol.iterations, sol.used_bland)) {
        sol.status = LPStatus::Infeasible;
        return sol;
    }
    sol.objective = tab.phase2(p.objective, sol.iterations, sol.used_bland);
    if (tab.unbounded()) {
        sol.status = LPStatus::Unbounded;
        return sol;
    }
    sol.status = LPStatus::Optimal;
    sol.x = tab.primal();

    const auto y = tab.duals(p);
    const int m_eq = static_cast<int>(p.eq_rows.size());
    sol.dual_eq.assign(y.begin(), y.begin() + m_eq);
    sol.dual_ub.assign(y.begin() + m_eq, y.end());

    // Certificate quality: dual feasibility, gap, complementary slackness.
    double dual_obj = 0.0;
    for (int i = 0; i < m_eq; ++i) dual_obj += sol.dual_eq[i] * p.eq_rhs[i];
    for (size_t i = 0; i < sol.dual_ub.size(); ++i) dual_obj += sol.dual_ub[i] * p.ub_rhs[i];
    sol.duality_gap = std::abs(sol.objective - dual_obj);

    double dfeas = 0.0;
    for (const double yi : sol.dual_ub) dfeas = std::max(dfeas, -yi);
    for (int j = 0; j < p.num_vars; ++j) {
        double yTa = 0.0;
        for (int i = 0; i < m_eq; ++i) yTa += sol.dual_eq[i] * p.eq_rows[i][j];
        for (size_t i = 0; i < sol.dual_ub.size(); ++i) yTa += sol.dual_ub[i] * p.ub_rows[i][j];
        dfeas = std::max(dfeas, p.objective[j] - yTa); // must be <= 0 at optimum
    }
    sol.dual_feasibility_residual = std::max(0.0, dfeas);

    double cs = 0.0;
    for (int j = 0; j < p.num_vars; ++j) {
        double yTa = 0.0;
        for (int i = 0; i < m_eq; ++i) yTa += sol.dual_eq[i] * p.eq_rows[i][j];
        for (size_t i = 0; i < sol.dual_ub.size(); ++i) yTa += sol.dual_ub[i] * p.ub_rows[i][j];
        cs += std::abs(sol.x[j] * (yTa - p.objective[j]));
    }
    for (size_t i = 0; i < p.ub_rows.size(); ++i) {
        double ax = 0.0;
        for (int j = 0; j < p.num_vars; ++j) ax += p.ub_rows[i][j] * sol.x[j];
        cs += std::abs(sol.dual_ub[i] * (p.ub_rhs[i] - ax));
    }
    sol.comp_slack_residual = cs;
    return sol;
}

namespace {
inline int pidx(int a, int b, int x, int y) { return ((a * 2 + b) * 2 + x) * 2 + y; }
} // namespace

LPProblem build_p_star_lp(double I, double delta, int a, int b, int x, int y,
                          const PStarLPOptions& opt) {
    LPProblem p;
    p.num_vars = 16;
    p.objective.assign(16, 0.0);
    p.objective[pidx(a, b, x, y)] = 1.0;

    // Normalization per setting pair.
    for (int xx = 0; xx < 2; ++xx)
        for (int yy = 0; yy < 2; ++yy) {
            std::vector<double> row(16, 0.0);
            for (int aa = 0; aa < 2; ++aa)
                for (int bb = 0; bb < 2; ++bb) row[pidx(aa, bb, xx, yy)] = 1.0;
            p.eq_rows.push_back(std::move(row));
            p.eq_rhs.push_back(1.0);
        }
    // Bell value.
    const auto chsh = BellExpression::chsh();
    std::vector<double> bell(16, 0.0);
    for (int aa = 0; aa < 2; ++aa)
        for (int bb = 0; bb < 2; ++bb)
            for (int xx = 0; xx < 2; ++xx)
                for (int yy = 0; yy < 2; ++yy)
                    bell[pidx(aa, bb, xx, yy)] = chsh.coeff(aa, bb, xx, yy);
    if (opt.bell_value_as_lower_bound) {
        std::vector<double> neg(16);
        for (int j = 0; j < 16; ++j) neg[j] = -bell[j];
        p.ub_rows.push_back(std::move(neg));
        p.ub_rhs.push_back(-I);
    } else {
        p.eq_rows.push_back(std::move(bell));
        p.eq_rhs.push_back(I);
    }
    // Signaling bands, |marginal difference| <= delta, both parties. The
    // absolute values are split into one-sided rows.
    for (int aa = 0; aa < 2; ++aa)
        for (int xx = 0; xx < 2; ++xx)
            for (double sgn : {1.0, -1.0}) {
                std::vector<double> row(16, 0.0);
                for (int bb = 0; bb < 2; ++bb) {
                    row[pidx(aa, bb, xx, 0)] += sgn;
                    row[pidx(aa, bb, xx, 1)] -= sgn;
                }
                p.ub_rows.push_back(std::move(row));
                p.ub_rhs.push_back(delta);
            }
    for (int bb = 0; bb < 2; ++bb)
        for (int yy = 0; yy < 2; ++yy)
            for (double sgn : {1.0, -1.0}) {
                std::vector<double> row(16, 0.0);
                for (int aa = 0; aa < 2; ++aa) {
                    row[pidx(aa, bb, 0, yy)] += sgn;
                    row[pidx(aa, bb, 1, yy)] -= sgn;
                }
                p.ub_rows.push_back(std::move(row));
                p.ub_rhs.push_back(delta);
            }
    return p;
}

PStarLPResult p_star_lp(double I, double delta, const PStarLPOptions& opt) {
    if (std::abs(I) > kChshAlgebraic + 1e-12)
        throw std::domain_error("p_star_lp: |I| > 4 is infeasible");
    if (delta < 0.0) throw std::invalid_argument("p_star_lp: delta must be >= 0");

    PStarLPResult res;
    res.value = -1.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y) {
                    const auto prob = build_p_star_lp(I, delta, a, b, x, y, opt);
                    const auto sol = simplex_solve(prob);
                    if (sol.status == LPStatus::Infeasible)
                        throw std::domain_error("p_star_lp: infeasible instance");
                    if (sol.status == LPStatus::Unbounded)
                        throw std::runtime_error("p_star_lp: unbounded (internal bug)");
                    if (sol.comp_slack_residual > 1e-8 || sol.duality_gap > 1e-8)
                        throw std::runtime_error("p_star_lp: certificate residual too large");
                    res.per_target[pidx(a, b, x, y)] = sol.objective;
                    res.max_cert_residual =
                        std::max({res.max_cert_residual, sol.comp_slack_residual,
                                  sol.duality_gap, sol.dual_feasibility_residual});
                    if (sol.objective > res.value) {
                        res.value = sol.objective;
                        res.best_a = a;
                        res.best_b = b;
                        res.best_x = x;
                        res.best_y = y;
                        Behavior beh;
                        for (int aa = 0; aa < 2; ++aa)
                            for (int bb = 0; bb < 2; ++bb)
                                for (int xx = 0; xx < 2; ++xx)
                                    for (int yy = 0; yy < 2; ++yy)
                                        beh.p(aa, bb, xx, yy) = sol.x[pidx(aa, bb, xx, yy)];
                        res.argmax = beh;
                    }
                }
    return res;
}

} // namespace ctrg
