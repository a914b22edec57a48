#pragma once

#include <functional>
#include <vector>

namespace ctrg {

inline constexpr double kChshLocal = 2.0;
inline constexpr double kChshTsirelson = 2.8284271247461903; // 2*sqrt(2)
inline constexpr double kChshAlgebraic = 4.0;

/// Query parameters shared by the bound programs: Bell value, cross-talk
/// budget, signaling budget, and the target input pair.
struct BoundQuery {
    double I = kChshLocal;
    double chi = 0.0;
    double delta = 0.0;
    int x = 0;
    int y = 0;
};

/// Guessing probabilities for the 2x2 scenario live in [1/4, 1].
double clip_guess_probability(double v);

/// Certified ceiling for the zero-cross-talk CHSH curve:
/// 1/2 + (1/2) sqrt(2 - I^2/4) on I in [2, 2*sqrt(2)].
/// Values above the Tsirelson bound are rejected.
double closed_form_chsh_zero(double I);

/// P*(I, chi) <= zero_curve(max(I - gamma*chi, 2)) + chi, clipped to <= 1.
double bound_shifted(double I, double chi, double gamma,
                     const std::function<double(double)>& zero_curve);

/// Signaling-only bound: 1 for I <= 2, otherwise
/// min(1, max(2 - I/2, 3/2 - I/4 + 2*delta)). Valid in any theory with
/// signaling capped by delta.
double bound_signaling(double I, double delta);

/// Conservative evaluator for a nonincreasing concave function known only
/// through certified upper bounds at grid nodes. Between nodes it takes the
/// smallest of the left-node value (monotonicity) and the extensions of the
/// neighbouring chords (concavity), so the result stays a true upper bound.
class UpperEnvelope {
public:
    UpperEnvelope(std::vector<double> nodes, std::vector<double> bounds);

    double operator()(double I) const;
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& bounds() const { return bounds_; }

private:
    std::vector<double> nodes_;  // ascending
    std::vector<double> bounds_; // upper bound at each node
};

} // namespace ctrg
