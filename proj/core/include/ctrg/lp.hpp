#pragma once

#include <array>
#include <vector>

#include "ctrg/bell.hpp"

namespace ctrg {

/// A dense LP in the form
///   max c^T x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0.
struct LPProblem {
    int num_vars = 0;
    std::vector<double> objective;
    std::vector<std::vector<double>> eq_rows;
    std::vector<double> eq_rhs;
    std::vector<std::vector<double>> ub_rows;
    std::vector<double> ub_rhs;
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

struct LPSolution {
    LPStatus status = LPStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
    std::vector<double> dual_eq; // free multipliers, one per equality row
    std::vector<double> dual_ub; // nonnegative multipliers, one per <= row
    double duality_gap = 0.0;
    double dual_feasibility_residual = 0.0;
    double comp_slack_residual = 0.0;
    int iterations = 0;
    bool used_bland = false;
};

/// Two-phase dense simplex. Dantzig pricing with a Bland fallback once the
/// iteration count suggests degeneracy. The returned multipliers certify
/// optimality: duality gap and complementary slackness are reported.
LPSolution simplex_solve(const LPProblem& p);

/// The signaling-bounded guessing program: maximize P(a,b|x,y) over
/// behaviors with Bell value I and per-marginal signaling at most delta,
/// maximized over all 16 targets.
struct PStarLPResult {
    double value = 0.0;
    int best_a = 0, best_b = 0, best_x = 0, best_y = 0;
    std::array<double, 16> per_target{}; // index ((a*2+b)*2+x)*2+y
    Behavior argmax;
    double max_cert_residual = 0.0; // worst certificate residual across targets
};

struct PStarLPOptions {
    bool bell_value_as_lower_bound = false; // constraint >= I instead of == I
};

PStarLPResult p_star_lp(double I, double delta, const PStarLPOptions& opt = {});

/// The LP for a single target (a,b,x,y); exposed for tests.
LPProblem build_p_star_lp(double I, double delta, int a, int b, int x, int y,
                          const PStarLPOptions& opt = {});

} // namespace ctrg
