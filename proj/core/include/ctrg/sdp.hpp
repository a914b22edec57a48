#pragma once

#include <string>
#include <vector>

#include "ctrg/linalg.hpp"

namespace ctrg {

/// One symmetric coefficient matrix stored sparsely. Entries carry r >= c;
/// an off-diagonal entry (r,c,v) stands for v at (r,c) and at (c,r).
struct SymEntry {
    int r = 0, c = 0;
    double v = 0.0;
};

struct PsdBlock {
    int dim = 0;
    std::string label;
    std::vector<SymEntry> constant;                          // F_0
    std::vector<std::pair<int, std::vector<SymEntry>>> terms; // (var, F_k)
};

/// Sparse affine row: constant + sum coeff*y.
struct AffineRow {
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;
};

/// Linear conic problem over free scalars:
///   optimize  sum g_k y_k
///   s.t.      equalities:  sum terms = rhs
///             lp rows:     constant + sum terms >= 0
///             psd blocks:  F_0 + sum y_k F_k is PSD
struct ConicProblem {
    int num_vars = 0;
    bool maximize = true;
    std::vector<std::pair<int, double>> objective;
    std::vector<AffineRow> equalities; // terms . y = constant
    std::vector<AffineRow> lp_rows;    // constant + terms . y >= 0
    std::vector<PsdBlock> psd_blocks;
    /// Per-variable a-priori bound |y_k| <= bound, used to turn small dual
    /// residuals into rigorous bound corrections. Defaults to 1.
    std::vector<double> var_abs_bound;

    int total_psd_dim() const;
};

enum class SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
    NumericalFailure,
};

const char* to_string(SolveStatus s);

struct SolveReport {
    SolveStatus status = SolveStatus::NumericalFailure;
    // Objectives in the user's sense (maximize or minimize as requested).
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double duality_gap = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
    double wall_time_ms = 0.0;

    /// Rigorous bound implied by the dual iterate after PSD and residual
    /// corrections: an upper bound for maximization problems, lower for
    /// minimization. Only meaningful when has_certificate is true.
    double certified_bound = 0.0;
    bool has_certificate = false;

    /// For status PrimalInfeasible: the validated Farkas margin (> 0 means
    /// infeasibility is proven).
    double infeasibility_margin = 0.0;

    std::vector<double> y; // primal point (scaled back by tau)
    std::vector<double> eq_duals;
    std::vector<double> lp_duals;
    std::vector<RealSymMatrix> psd_duals;

    std::string to_json() const;
};

struct SolveOptions {
    double tol = 1e-7;
    int max_iter = 200;
    int max_psd_dim_total = 2000;
    bool override_size_limit = false;
    bool collect_trace = false;
};

/// Per-iteration trace used by tests to audit weak duality.
struct IterationTrace {
    std::vector<double> gap;   // s.z / tau^2, nonnegative by construction
    std::vector<double> pcost; // user-sense primal objective
    std::vector<double> dcost; // user-sense dual objective
};

SolveReport solve(const ConicProblem& p, const SolveOptions& opt = {},
                  IterationTrace* trace = nullptr);

struct CertificateValidation {
    bool valid = false;
    double bound = 0.0;           // rigorous bound after corrections
    double psd_correction = 0.0;  // total eigenvalue shift applied to duals
    double residual_term = 0.0;   // sum |rho_k| * |y_k|-bound
    double min_dual_eig = 0.0;
    std::string message;
};

/// Recomputes, in plain arithmetic independent of solver internals, what the
/// report's dual multipliers actually certify. Throws nothing; a corrupted
/// certificate comes back with valid == false.
CertificateValidation validate_certificate(const ConicProblem& p, const SolveReport& r);

/// Checks a Farkas-type infeasibility certificate. valid == true proves that
/// no feasible point exists.
CertificateValidation validate_infeasibility(const ConicProblem& p, const SolveReport& r);

} // namespace ctrg
