#include "ctrg/npa_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctrg {

PStarSdpResult p_star_sdp(double I, double chi, int x, int y, const SdpBoundOptions& opt) {
    PStarSdpResult res;
    res.value = 0.0;
    res.raw_certified = 0.0;
    // Relabelling both outcomes (a,b) -> (1-a,1-b) leaves the CHSH
    // coefficients and the constraint structure invariant, so only two of
    // the four targets are distinct for a given (x,y).
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const int mirror_a = 1 - a, mirror_b = 1 - b;
            const int idx = a * 2 + b, mirror_idx = mirror_a * 2 + mirror_b;
            if (mirror_idx < idx) {
                res.per_ab[idx] = res.per_ab[mirror_idx];
                if (res.per_ab[idx] > res.raw_certified) {
                    // value already recorded from the mirrored solve
                }
                continue;
            }
            auto rp = randomness_program(I, chi, {a, b, x, y}, opt.level, opt.npa);
            auto rep = solve(rp.to_conic(), opt.solve);
            if (!rep.has_certificate)
                throw std::runtime_error("p_star_sdp: no usable certificate (" +
                                         std::string(to_string(rep.status)) + ")");
            res.per_ab[idx] = rep.certified_bound;
            if (rep.certified_bound > res.raw_certified) {
                res.raw_certified = rep.certified_bound;
                res.best_a = a;
                res.best_b = b;
                res.report = rep;
            }
        }
    res.value = clip_guess_probability(res.raw_certified);
    return res;
}

MaxBellResult max_bell_sdp(double chi, const SdpBoundOptions& opt) {
    auto rp = max_bell_given_chi(chi, opt.level, opt.npa);
    auto rep = solve(rp.to_conic(), opt.solve);
    if (!rep.has_certificate)
        throw std::runtime_error("max_bell_sdp: no usable certificate (" +
                                 std::string(to_string(rep.status)) + ")");
    MaxBellResult res;
    res.value = std::clamp(rep.certified_bound, -kChshAlgebraic, kChshAlgebraic);
    res.report = rep;
    return res;
}

UpperEnvelope sdp_zero_curve(int x, int y, int num_nodes, const SdpBoundOptions& opt) {
    if (num_nodes < 3) throw std::invalid_argument("sdp_zero_curve: need >= 3 nodes");
    std::vector<double> nodes(num_nodes), bounds(num_nodes);
    for (int i = 0; i < num_nodes; ++i) {
        const double I =
            kChshLocal + (kChshTsirelson - kChshLocal) * i / (num_nodes - 1);
        nodes[i] = I;
        bounds[i] = p_star_sdp(I, 0.0, x, y, opt).value;
    }
    // Enforce monotone nonincreasing node values (each node bound is valid,
    // and P* is nonincreasing, so the running minimum stays valid).
    for (int i = 1; i < num_nodes; ++i) bounds[i] = std::min(bounds[i], bounds[i - 1]);
    return UpperEnvelope(std::move(nodes), std::move(bounds));
}

ConicProblem with_feasibility_margin(const ConicProblem& base) {
    ConicProblem p = base;
    const int t = p.num_vars++;
    p.objective = {{t, 1.0}};
    p.maximize = true;
    int max_dim = 1;
    for (auto& blk : p.psd_blocks) {
        max_dim = std::max(max_dim, blk.dim);
        std::vector<SymEntry> ent;
        ent.reserve(blk.dim);
        for (int i = 0; i < blk.dim; ++i) ent.push_back(SymEntry{i, i, -1.0});
        blk.terms.emplace_back(t, std::move(ent));
    }
    const double cap = 8.0 * max_dim;
    // 1 - t >= 0 and t + cap >= 0 keep the margin problem bounded.
    AffineRow hi;
    hi.constant = 1.0;
    hi.terms = {{t, -1.0}};
    p.lp_rows.push_back(std::move(hi));
    AffineRow lo;
    lo.constant = cap;
    lo.terms = {{t, 1.0}};
    p.lp_rows.push_back(std::move(lo));
    p.var_abs_bound.resize(p.num_vars, 1.0);
    p.var_abs_bound[t] = cap;
    return p;
}

FeasibilityResult probe_feasibility(const ConicProblem& base, const SolveOptions& opt) {
    FeasibilityResult out;
    const auto marginized = with_feasibility_margin(base);
    const int t = marginized.num_vars - 1;
    out.report = solve(marginized, opt);
    const auto& rep = out.report;

    if (rep.status == SolveStatus::PrimalInfeasible && rep.has_certificate) {
        // Even the margined problem is empty, which is stronger.
        out.verdict = FeasibilityVerdict::Infeasible;
        out.margin = rep.infeasibility_margin;
        return out;
    }
    if (rep.has_certificate && rep.certified_bound < 0.0) {
        out.verdict = FeasibilityVerdict::Infeasible;
        out.margin = -rep.certified_bound;
        return out;
    }
    if ((rep.status == SolveStatus::Optimal || rep.status == SolveStatus::MaxIterations) &&
        !rep.y.empty()) {
        const double t_val = rep.y[t];
        if (t_val >= -1e-7 && rep.primal_residual <= 1e-6) {
            out.verdict = FeasibilityVerdict::Feasible;
            out.margin = t_val;
            return out;
        }
    }
    out.verdict = FeasibilityVerdict::Unknown;
    return out;
}

MinChiResult min_chi_sdp(const Behavior& p, const SdpBoundOptions& opt, double tol_chi) {
    MinChiResult res;
    auto rp = min_chi_program(p, opt.level, opt.npa);

    auto probe = [&](double chi) {
        ++res.solves;
        return probe_feasibility(rp.to_conic(chi), opt.solve);
    };

    // Feasible at chi = 0 means the relaxation cannot certify any cross-talk.
    auto at0 = probe(0.0);
    if (at0.verdict == FeasibilityVerdict::Feasible) {
        res.certified_lower = 0.0;
        res.feasible_upper = 0.0;
        res.lower_is_certified = false;
        return res;
    }
    double lo = 0.0;
    bool lo_certified = (at0.verdict == FeasibilityVerdict::Infeasible);
    // Grow an upper bracket.
    double hi = 1e-3;
    while (hi < 1.0) {
        const auto r = probe(hi);
        if (r.verdict == FeasibilityVerdict::Feasible) break;
        if (r.verdict == FeasibilityVerdict::Infeasible) {
            lo = hi;
            lo_certified = true;
        }
        hi = std::min(1.0, hi * 4.0);
    }
    if (hi >= 1.0) {
        const auto r = probe(1.0);
        if (r.verdict != FeasibilityVerdict::Feasible)
            throw std::runtime_error("min_chi_sdp: infeasible even at chi = 1 "
                                     "(inconsistent pinned behavior)");
        hi = 1.0;
    }
    while (hi - lo > tol_chi) {
        const double mid = 0.5 * (lo + hi);
        const auto r = probe(mid);
        if (r.verdict == FeasibilityVerdict::Infeasible) {
            lo = mid;
            lo_certified = true;
        } else {
            // Ambiguous solves are treated as feasible, which can only make
            // the certified lower bound more conservative.
            hi = mid;
        }
    }
    res.certified_lower = lo;
    res.feasible_upper = hi;
    res.lower_is_certified = lo_certified && lo > 0.0;
    return res;
}

} // namespace ctrg
