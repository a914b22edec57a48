#include "ctrg/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctrg {

double clip_guess_probability(double v) { return std::clamp(v, 0.25, 1.0); }

double closed_form_chsh_zero(double I) {
    if (I > kChshTsirelson + 1e-12)
        throw std::domain_error("closed_form_chsh_zero: I beyond the Tsirelson bound");
    if (I < kChshLocal - 1e-12)
        throw std::domain_error("closed_form_chsh_zero: I below the local bound");
    I = std::clamp(I, kChshLocal, kChshTsirelson);
    const double v = 0.5 + 0.5 * std::sqrt(std::max(0.0, 2.0 - I * I / 4.0));
    return clip_guess_probability(v);
}

double bound_shifted(double I, double chi, double gamma,
                     const std::function<double(double)>& zero_curve) {
    if (gamma <= 0.0) throw std::invalid_argument("bound_shifted: gamma must be positive");
    if (chi < 0.0 || chi > 1.0) throw std::invalid_argument("bound_shifted: chi outside [0,1]");
    const double shifted = std::max(I - gamma * chi, kChshLocal);
    return clip_guess_probability(zero_curve(shifted) + chi);
}

double bound_signaling(double I, double delta) {
    if (I < -kChshAlgebraic - 1e-12 || I > kChshAlgebraic + 1e-12)
        throw std::invalid_argument("bound_signaling: I outside [-4,4]");
    if (delta < 0.0 || delta > 1.0)
        throw std::invalid_argument("bound_signaling: delta outside [0,1]");
    if (I <= kChshLocal) return 1.0;
    const double v = std::max(2.0 - 0.5 * I, 1.5 - 0.25 * I + 2.0 * delta);
    return clip_guess_probability(v);
}

UpperEnvelope::UpperEnvelope(std::vector<double> nodes, std::vector<double> bounds)
    : nodes_(std::move(nodes)), bounds_(std::move(bounds)) {
    if (nodes_.size() != bounds_.size() || nodes_.size() < 2)
        throw std::invalid_argument("UpperEnvelope: need >= 2 matching nodes");
    for (size_t i = 1; i < nodes_.size(); ++i)
        if (nodes_[i] <= nodes_[i - 1])
            throw std::invalid_argument("UpperEnvelope: nodes must be strictly ascending");
}

double UpperEnvelope::operator()(double I) const {
    const size_t n = nodes_.size();
    if (I < nodes_.front() - 1e-12 || I > nodes_.back() + 1e-9)
        throw std::domain_error("UpperEnvelope: query outside the tabulated range");
    I = std::clamp(I, nodes_.front(), nodes_.back());

    // Locate the segment [nodes_[i], nodes_[i+1]] containing I.
    size_t i = std::upper_bound(nodes_.begin(), nodes_.end(), I) - nodes_.begin();
    if (i > 0) --i;
    if (i >= n - 1) i = n - 2;

    // Monotone bound: the function cannot exceed its value at the left node.
    double best = bounds_[i];

    auto chord_at = [&](size_t p, size_t q) {
        const double slope = (bounds_[q] - bounds_[p]) / (nodes_[q] - nodes_[p]);
        return bounds_[p] + slope * (I - nodes_[p]);
    };
    // A concave function lies below the extension of any of its chords, so
    // chords of neighbouring segments bound the value inside this one.
    if (i + 2 < n) best = std::min(best, chord_at(i + 1, i + 2));
    if (i >= 1) best = std::min(best, chord_at(i - 1, i));

    return clip_guess_probability(best);
}

} // namespace ctrg
