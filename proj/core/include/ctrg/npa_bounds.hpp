#pragma once

#include <array>

#include "ctrg/analytic.hpp"
#include "ctrg/bell.hpp"
#include "ctrg/npa.hpp"
#include "ctrg/sdp.hpp"

namespace ctrg {

struct SdpBoundOptions {
    MonomialSet level = MonomialSet::level("l1xy");
    SolveOptions solve{};
    NpaOptions npa{};
};

/// Certified upper bound on the pair-guessing probability P*_{xy}(I, chi):
/// the maximum over the outcome pair (a,b) of the relaxation's certified
/// dual bound.
struct PStarSdpResult {
    double value = 1.0;         // certified bound clipped to [1/4, 1]
    double raw_certified = 1.0; // unclipped certified bound of the max target
    std::array<double, 4> per_ab{};
    int best_a = 0, best_b = 0;
    SolveReport report; // report of the maximizing target
};

PStarSdpResult p_star_sdp(double I, double chi, int x, int y, const SdpBoundOptions& opt);

/// Certified upper bound on the CHSH value under cross-talk budget chi.
struct MaxBellResult {
    double value = 0.0; // certified, clipped to [-4, 4]
    SolveReport report;
};
MaxBellResult max_bell_sdp(double chi, const SdpBoundOptions& opt);

/// Tabulated chi = 0 curve I -> P*_{xy}(I, 0) as a certified upper envelope;
/// nodes are solved once and reused.
UpperEnvelope sdp_zero_curve(int x, int y, int num_nodes, const SdpBoundOptions& opt);

/// Feasibility transform: maximize a margin t with every PSD block shifted
/// to S(y) - t*I and t capped; the sign of the certified optimum decides
/// feasibility rigorously.
ConicProblem with_feasibility_margin(const ConicProblem& base);

enum class FeasibilityVerdict { Feasible, Infeasible, Unknown };

struct FeasibilityResult {
    FeasibilityVerdict verdict = FeasibilityVerdict::Unknown;
    double margin = 0.0; // primal margin when feasible, certified gap when not
    SolveReport report;
};
FeasibilityResult probe_feasibility(const ConicProblem& base, const SolveOptions& opt);

/// Bisection on the smallest cross-talk compatible with a pinned behavior.
/// certified_lower is a rigorous lower bound on the relaxation's minimum
/// (the device-independent estimate); feasible_upper is the smallest chi at
/// which a feasible point was exhibited.
struct MinChiResult {
    double certified_lower = 0.0;
    double feasible_upper = 1.0;
    bool lower_is_certified = false; // false when 0 (nothing was infeasible)
    int solves = 0;
};
MinChiResult min_chi_sdp(const Behavior& p, const SdpBoundOptions& opt, double tol_chi = 2e-5);

} // namespace ctrg
