#include "ctrg/sdp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace ctrg {

int ConicProblem::total_psd_dim() const {
    int t = 0;
    for (const auto& b : psd_blocks) t += b.dim;
    return t;
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::PrimalInfeasible: return "primal-infeasible";
        case SolveStatus::DualInfeasible: return "dual-infeasible";
        case SolveStatus::MaxIterations: return "max-iterations";
        case SolveStatus::NumericalFailure: return "numerical-failure";
    }
    return "unknown";
}

namespace {

using Vec = std::vector<double>;

void mat_mul(const Vec& a, const Vec& b, Vec& c, int n) {
    c.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double* ai = &a[static_cast<size_t>(i) * n];
        double* ci = &c[static_cast<size_t>(i) * n];
        for (int k = 0; k < n; ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = &b[static_cast<size_t>(k) * n];
            for (int j = 0; j < n; ++j) ci[j] += aik * bk[j];
        }
    }
}

void symmetrize(Vec& a, int n) {
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v =
                0.5 * (a[static_cast<size_t>(i) * n + j] + a[static_cast<size_t>(j) * n + i]);
            a[static_cast<size_t>(i) * n + j] = v;
            a[static_cast<size_t>(j) * n + i] = v;
        }
}

void transpose(const Vec& a, Vec& t, int n) {
    t.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            t[static_cast<size_t>(i) * n + j] = a[static_cast<size_t>(j) * n + i];
}

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double min_eig_buf(const Vec& a, int n) {
    RealSymMatrix m(n);
    m.a = a;
    return sym_eig_values(m).front();
}

void add_entries(Vec& dense, int n, const std::vector<SymEntry>& entries, double scale) {
    for (const auto& e : entries) {
        dense[static_cast<size_t>(e.r) * n + e.c] += scale * e.v;
        if (e.r != e.c) dense[static_cast<size_t>(e.c) * n + e.r] += scale * e.v;
    }
}

double inner_entries(const std::vector<SymEntry>& entries, const Vec& dense, int n) {
    double s = 0.0;
    for (const auto& e : entries) {
        s += e.v * dense[static_cast<size_t>(e.r) * n + e.c];
        if (e.r != e.c) s += e.v * dense[static_cast<size_t>(e.c) * n + e.r];
    }
    return s;
}

struct PsdState {
    int n = 0;
    Vec S, Z;     // current primal/dual blocks
    Vec Tinv;     // (W^T W)^{-1} V = Tinv V Tinv
    Vec T;        // (W^T W) V = T V T
    Vec R, Rinv;  // S = R Lam R^T, Z = R^{-T} Lam R^{-1}
    Vec lambda;   // scaled point (diagonal)
};

struct Work {
    int m = 0, p = 0, l = 0;
    Vec c, b;
    const ConicProblem* prob = nullptr;

    Vec s_lp, z_lp, w_lp;
    std::vector<PsdState> psd;
    double tau = 1.0, kappa = 1.0;
    Vec x, y;

    Vec M; // Schur complement
};

void eval_Gx(const Work& w, const Vec& x, Vec& out_lp, std::vector<Vec>& out_psd) {
    const auto& P = *w.prob;
    out_lp.assign(w.l, 0.0);
    for (int r = 0; r < w.l; ++r) {
        double v = 0.0;
        for (const auto& [k, cf] : P.lp_rows[r].terms) v += cf * x[k];
        out_lp[r] = -v;
    }
    out_psd.resize(P.psd_blocks.size());
    for (size_t j = 0; j < P.psd_blocks.size(); ++j) {
        const auto& blk = P.psd_blocks[j];
        out_psd[j].assign(static_cast<size_t>(blk.dim) * blk.dim, 0.0);
        for (const auto& [k, F] : blk.terms) add_entries(out_psd[j], blk.dim, F, -x[k]);
    }
}

template <typename PsdAccess>
void eval_GTz_impl(const Work& w, const Vec& z_lp, PsdAccess z_psd, Vec& out) {
    const auto& P = *w.prob;
    out.assign(w.m, 0.0);
    for (int r = 0; r < w.l; ++r) {
        const double zr = z_lp[r];
        if (zr == 0.0) continue;
        for (const auto& [k, cf] : P.lp_rows[r].terms) out[k] -= cf * zr;
    }
    for (size_t j = 0; j < P.psd_blocks.size(); ++j) {
        const auto& blk = P.psd_blocks[j];
        const Vec& Z = z_psd(j);
        for (const auto& [k, F] : blk.terms) out[k] -= inner_entries(F, Z, blk.dim);
    }
}

void eval_Ax(const Work& w, const Vec& x, Vec& out) {
    const auto& P = *w.prob;
    out.assign(w.p, 0.0);
    for (int i = 0; i < w.p; ++i) {
        double v = 0.0;
        for (const auto& [k, cf] : P.equalities[i].terms) v += cf * x[k];
        out[i] = v;
    }
}

void eval_ATy(const Work& w, const Vec& y, Vec& out) {
    const auto& P = *w.prob;
    out.assign(w.m, 0.0);
    for (int i = 0; i < w.p; ++i) {
        const double yi = y[i];
        if (yi == 0.0) continue;
        for (const auto& [k, cf] : P.equalities[i].terms) out[k] += cf * yi;
    }
}

void eval_h(const Work& w, Vec& h_lp, std::vector<Vec>& h_psd) {
    const auto& P = *w.prob;
    h_lp.assign(w.l, 0.0);
    for (int r = 0; r < w.l; ++r) h_lp[r] = P.lp_rows[r].constant;
    h_psd.resize(P.psd_blocks.size());
    for (size_t j = 0; j < P.psd_blocks.size(); ++j) {
        const auto& blk = P.psd_blocks[j];
        h_psd[j].assign(static_cast<size_t>(blk.dim) * blk.dim, 0.0);
        add_entries(h_psd[j], blk.dim, blk.constant, 1.0);
    }
}

double cone_norm(const Vec& a_lp, const std::vector<Vec>& a_psd) {
    double s = dot(a_lp, a_lp);
    for (const auto& m : a_psd) s += dot(m, m);
    return std::sqrt(std::max(0.0, s));
}

bool update_scaling(Work& w) {
    for (int r = 0; r < w.l; ++r) {
        if (!(w.s_lp[r] > 0.0) || !(w.z_lp[r] > 0.0)) return false;
        w.w_lp[r] = std::sqrt(w.s_lp[r] / w.z_lp[r]);
    }
    Vec shalf, sinvhalf, tmp, H;
    for (auto& ps : w.psd) {
        const int n = ps.n;
        RealSymMatrix Sm(n);
        Sm.a = ps.S;
        for (const double v : Sm.a)
            if (!std::isfinite(v)) return false;
        const auto eigS = sym_eig(Sm);
        if (!(eigS.values.front() > 0.0) || !std::isfinite(eigS.values.back())) return false;
        shalf.assign(static_cast<size_t>(n) * n, 0.0);
        sinvhalf.assign(static_cast<size_t>(n) * n, 0.0);
        for (int k = 0; k < n; ++k) {
            const double sq = std::sqrt(eigS.values[k]);
            for (int i = 0; i < n; ++i) {
                const double vik = eigS.vectors[static_cast<size_t>(i) * n + k];
                if (vik == 0.0) continue;
                for (int j = 0; j < n; ++j) {
                    const double vv = vik * eigS.vectors[static_cast<size_t>(j) * n + k];
                    shalf[static_cast<size_t>(i) * n + j] += sq * vv;
                    sinvhalf[static_cast<size_t>(i) * n + j] += vv / sq;
                }
            }
        }
        for (const double v : ps.Z)
            if (!std::isfinite(v)) return false;
        mat_mul(shalf, ps.Z, tmp, n);
        mat_mul(tmp, shalf, H, n);
        symmetrize(H, n);
        RealSymMatrix Hm(n);
        Hm.a = H;
        const auto eigH = sym_eig(Hm);
        if (!(eigH.values.front() > 0.0) || !std::isfinite(eigH.values.back())) return false;

        ps.lambda.assign(n, 0.0);
        for (int k = 0; k < n; ++k) ps.lambda[k] = std::sqrt(eigH.values[k]);

        Vec Ud(static_cast<size_t>(n) * n, 0.0), dUt(static_cast<size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                const double d4 = std::pow(eigH.values[k], 0.25);
                Ud[static_cast<size_t>(i) * n + k] =
                    eigH.vectors[static_cast<size_t>(i) * n + k] / d4;
                dUt[static_cast<size_t>(k) * n + i] =
                    eigH.vectors[static_cast<size_t>(i) * n + k] * d4;
            }
        mat_mul(shalf, Ud, ps.R, n);
        mat_mul(dUt, sinvhalf, ps.Rinv, n);
        Vec RinvT;
        transpose(ps.Rinv, RinvT, n);
        mat_mul(RinvT, ps.Rinv, ps.Tinv, n);
        symmetrize(ps.Tinv, n);
        Vec Rt;
        transpose(ps.R, Rt, n);
        mat_mul(ps.R, Rt, ps.T, n);
        symmetrize(ps.T, n);
    }
    return true;
}

void assemble_schur(Work& w) {
    const auto& P = *w.prob;
    const int m = w.m;
    std::fill(w.M.begin(), w.M.end(), 0.0);
    for (int r = 0; r < w.l; ++r) {
        const double scale = w.z_lp[r] / w.s_lp[r];
        const auto& terms = P.lp_rows[r].terms;
        for (size_t a = 0; a < terms.size(); ++a)
            for (size_t b2 = 0; b2 <= a; ++b2) {
                const int ka = terms[a].first, kb = terms[b2].first;
                const double v = scale * terms[a].second * terms[b2].second;
                if (ka >= kb)
                    w.M[static_cast<size_t>(ka) * m + kb] += v;
                else
                    w.M[static_cast<size_t>(kb) * m + ka] += v;
            }
    }
    Vec Uk;
    for (size_t j = 0; j < P.psd_blocks.size(); ++j) {
        const auto& blk = P.psd_blocks[j];
        const auto& Ti = w.psd[j].Tinv;
        const int n = blk.dim;
        for (size_t a = 0; a < blk.terms.size(); ++a) {
            const int ka = blk.terms[a].first;
            Uk.assign(static_cast<size_t>(n) * n, 0.0);
            for (const auto& e : blk.terms[a].second) {
                const double* tr = &Ti[static_cast<size_t>(e.r) * n];
                const double* tc = &Ti[static_cast<size_t>(e.c) * n];
                for (int i = 0; i < n; ++i) {
                    const double tri = tr[i] * e.v;
                    double* urow = &Uk[static_cast<size_t>(i) * n];
                    if (e.r == e.c) {
                        for (int q = 0; q < n; ++q) urow[q] += tri * tc[q];
                    } else {
                        const double tci = tc[i] * e.v;
                        for (int q = 0; q < n; ++q) urow[q] += tri * tc[q] + tci * tr[q];
                    }
                }
            }
            for (size_t b2 = 0; b2 <= a; ++b2) {
                const int kb = blk.terms[b2].first;
                const double v = inner_entries(blk.terms[b2].second, Uk, n);
                if (ka >= kb)
                    w.M[static_cast<size_t>(ka) * m + kb] += v;
                else
                    w.M[static_cast<size_t>(kb) * m + ka] += v;
            }
        }
    }
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            w.M[static_cast<size_t>(i) * m + j] = w.M[static_cast<size_t>(j) * m + i];
}

struct KktFactor {
    Vec Lm;
    Vec Ls;
    int m = 0, p = 0;
};

void chol_solve(const Vec& L, int n, Vec& rhs) {
    for (int i = 0; i < n; ++i) {
        double v = rhs[i];
        const double* li = &L[static_cast<size_t>(i) * n];
        for (int k = 0; k < i; ++k) v -= li[k] * rhs[k];
        rhs[i] = v / li[i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double v = rhs[i];
        for (int k = i + 1; k < n; ++k) v -= L[static_cast<size_t>(k) * n + i] * rhs[k];
        rhs[i] = v / L[static_cast<size_t>(i) * n + i];
    }
}

bool chol_with_jitter(Vec& L, const Vec& base, int n) {
    double jitter = 0.0;
    for (int attempt = 0; attempt < 7; ++attempt) {
        L = base;
        if (attempt > 0) {
            jitter = (jitter == 0.0) ? 1e-12 : jitter * 100.0;
            for (int i = 0; i < n; ++i)
                L[static_cast<size_t>(i) * n + i] +=
                    jitter * std::max(1.0, base[static_cast<size_t>(i) * n + i]);
        }
        if (cholesky_in_place(L, n)) return true;
    }
    return false;
}

bool factor_kkt(Work& w, KktFactor& f) {
    const auto& P = *w.prob;
    const int m = w.m, p = w.p;
    f.m = m;
    f.p = p;
    if (!chol_with_jitter(f.Lm, w.M, m)) return false;
    if (p == 0) return true;

    Vec AMinv(static_cast<size_t>(p) * m, 0.0);
    Vec col(m);
    for (int i = 0; i < p; ++i) {
        std::fill(col.begin(), col.end(), 0.0);
        for (const auto& [k, cf] : P.equalities[i].terms) col[k] = cf;
        chol_solve(f.Lm, m, col);
        std::copy(col.begin(), col.end(), AMinv.begin() + static_cast<size_t>(i) * m);
    }
    Vec S(static_cast<size_t>(p) * p, 0.0);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j <= i; ++j) {
            double v = 0.0;
            for (const auto& [k, cf] : P.equalities[j].terms)
                v += cf * AMinv[static_cast<size_t>(i) * m + k];
            S[static_cast<size_t>(i) * p + j] = v;
            S[static_cast<size_t>(j) * p + i] = v;
        }
    return chol_with_jitter(f.Ls, S, p);
}

void kkt_solve_direct(Work& w, const KktFactor& f, const Vec& bx, const Vec& by,
                      const Vec& bz_lp, const std::vector<Vec>& bz_psd, Vec& ux, Vec& uy,
                      Vec& uz_lp, std::vector<Vec>& uz_psd) {
    const auto& P = *w.prob;
    const int m = w.m, p = w.p;

    Vec tz_lp(w.l);
    for (int r = 0; r < w.l; ++r) tz_lp[r] = bz_lp[r] * w.z_lp[r] / w.s_lp[r];
    std::vector<Vec> tz_psd(P.psd_blocks.size());
    Vec tmp;
    for (size_t j = 0; j < P.psd_blocks.size(); ++j) {
        const int n = P.psd_blocks[j].dim;
        mat_mul(w.psd[j].Tinv, bz_psd[j], tmp, n);
        mat_mul(tmp, w.psd[j].Tinv, tz_psd[j], n);
        symmetrize(tz_psd[j], n);
    }
    Vec rhs(m);
    eval_GTz_impl(w, tz_lp, [&](size_t j) -> const Vec& { return tz_psd[j]; }, rhs);
    for (int k = 0; k < m; ++k) rhs[k] += bx[k];

    ux = rhs;
    chol_solve(f.Lm, m, ux);
    uy.assign(p, 0.0);
    if (p > 0) {
        Vec r2(p, 0.0);
        for (int i = 0; i < p; ++i) {
            double v = 0.0;
            for (const auto& [k, cf] : P.equalities[i].terms) v += cf * ux[k];
            r2[i] = v - by[i];
        }
        chol_solve(f.Ls, p, r2);
        uy = r2;
        Vec aty(m);
        eval_ATy(w, uy, aty);
        for (int k = 0; k < m; ++k) ux[k] = rhs[k] - aty[k];
        chol_solve(f.Lm, m, ux);
    }
    Vec gx_lp;
    std::vector<Vec> gx_psd;
    eval_Gx(w, ux, gx_lp, gx_psd);
    uz_lp.assign(w.l, 0.0);
    for (int r = 0; r < w.l; ++r) uz_lp[r] = (gx_lp[r] - bz_lp[r]) * w.z_lp[r] / w.s_lp[r];
    uz_psd.resize(P.psd_blocks.size());
    for (size_t j = 0; j < P.psd_blocks.size(); ++j) {
        const int n = P.psd_blocks[j].dim;
        Vec diff = gx_psd[j];
        for (size_t q = 0; q < diff.size(); ++q) diff[q] -= bz_psd[j][q];
        mat_mul(w.psd[j].Tinv, diff, tmp, n);
        mat_mul(tmp, w.psd[j].Tinv, uz_psd[j], n);
        symmetrize(uz_psd[j], n);
    }
}

// Direct solve plus iterative refinement: near the boundary the Schur
// complement is badly conditioned and the raw directions lose several
// digits, which otherwise stalls the last iterations.
void kkt_solve(Work& w, const KktFactor& f, const Vec& bx, const Vec& by, const Vec& bz_lp,
               const std::vector<Vec>& bz_psd, Vec& ux, Vec& uy, Vec& uz_lp,
               std::vector<Vec>& uz_psd) {
    kkt_solve_direct(w, f, bx, by, bz_lp, bz_psd, ux, uy, uz_lp, uz_psd);
    Vec rx(w.m), ry(w.p), rz_lp(w.l), tmp;
    std::vector<Vec> rz_psd;
    Vec cx, cy, cz_lp;
    std::vector<Vec> cz_psd;
    for (int round = 0; round < 2; ++round) {
        // Residuals of the unscaled 3x3 system.
        Vec aty(w.m), gtz(w.m);
        eval_ATy(w, uy, aty);
        eval_GTz_impl(w, uz_lp, [&](size_t j) -> const Vec& { return uz_psd[j]; }, gtz);
        for (int k = 0; k < w.m; ++k) rx[k] = bx[k] - (aty[k] + gtz[k]);
        Vec ax;
        eval_Ax(w, ux, ax);
        for (int i = 0; i < w.p; ++i) ry[i] = by[i] - ax[i];
        Vec gx_lp;
        std::vector<Vec> gx_psd;
        eval_Gx(w, ux, gx_lp, gx_psd);
        for (int r = 0; r < w.l; ++r)
            rz_lp[r] = bz_lp[r] - (gx_lp[r] - (w.s_lp[r] / w.z_lp[r]) * uz_lp[r]);
        rz_psd.resize(w.psd.size());
        for (size_t j = 0; j < w.psd.size(); ++j) {
            const int n = w.psd[j].n;
            Vec tvt;
            mat_mul(w.psd[j].T, uz_psd[j], tmp, n);
            mat_mul(tmp, w.psd[j].T, tvt, n);
            rz_psd[j].assign(tvt.size(), 0.0);
            for (size_t q = 0; q < tvt.size(); ++q)
                rz_psd[j][q] = bz_psd[j][q] - (gx_psd[j][q] - tvt[q]);
        }
        kkt_solve_direct(w, f, rx, ry, rz_lp, rz_psd, cx, cy, cz_lp, cz_psd);
        for (int k = 0; k < w.m; ++k) ux[k] += cx[k];
        for (int i = 0; i < w.p; ++i) uy[i] += cy[i];
        for (int r = 0; r < w.l; ++r) uz_lp[r] += cz_lp[r];
        for (size_t j = 0; j < w.psd.size(); ++j)
            for (size_t q = 0; q < uz_psd[j].size(); ++q) uz_psd[j][q] += cz_psd[j][q];
    }
}

double max_step_lp(const Vec& v, const Vec& dv) {
    double a = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
    return a;
}

// Step limit 1/max(0, -lambda_min(V^{-1/2} dV V^{-1/2})).
double max_step_psd(int n, const Vec& V, const Vec& dV) {
    RealSymMatrix Vm(n);
    Vm.a = V;
    const auto eig = sym_eig(Vm);
    Vec invh(static_cast<size_t>(n) * n, 0.0);
    for (int k = 0; k < n; ++k) {
        const double iv = 1.0 / std::sqrt(std::max(eig.values[k], 1e-300));
        for (int i = 0; i < n; ++i) {
            const double vik = eig.vectors[static_cast<size_t>(i) * n + k] * iv;
            if (vik == 0.0) continue;
            for (int j = 0; j < n; ++j)
                invh[static_cast<size_t>(i) * n + j] +=
                    vik * eig.vectors[static_cast<size_t>(j) * n + k];
        }
    }
    Vec t1, t2;
    mat_mul(invh, dV, t1, n);
    mat_mul(t1, invh, t2, n);
    symmetrize(t2, n);
    const double lmin = min_eig_buf(t2, n);
    if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
    return -1.0 / lmin;
}

} // namespace

SolveReport solve(const ConicProblem& prob, const SolveOptions& opt, IterationTrace* trace) {
    const auto t_start = std::chrono::steady_clock::now();
    if (prob.total_psd_dim() > opt.max_psd_dim_total && !opt.override_size_limit)
        throw std::invalid_argument("sdp solve: total PSD dimension exceeds the size budget");
    if (prob.psd_blocks.empty() && prob.lp_rows.empty())
        throw std::invalid_argument("sdp solve: need at least one cone constraint");
    for (const auto& blk : prob.psd_blocks)
        if (blk.dim <= 0) throw std::invalid_argument("sdp solve: empty PSD block");

    Work w;
    w.prob = &prob;
    w.m = prob.num_vars;
    w.p = static_cast<int>(prob.equalities.size());
    w.l = static_cast<int>(prob.lp_rows.size());
    const double sense = prob.maximize ? 1.0 : -1.0;
    // Internally minimize c^T x with c chosen so the user problem is
    // max (sense*g)^T y.
    w.c.assign(w.m, 0.0);
    for (const auto& [k, v] : prob.objective) w.c[k] -= sense * v;
    w.b.assign(w.p, 0.0);
    for (int i = 0; i < w.p; ++i) w.b[i] = prob.equalities[i].constant;

    Vec h_lp;
    std::vector<Vec> h_psd;
    eval_h(w, h_lp, h_psd);

    int nu = w.l;
    for (const auto& blk : prob.psd_blocks) nu += blk.dim;

    w.s_lp.assign(w.l, 1.0);
    w.z_lp.assign(w.l, 1.0);
    w.w_lp.assign(w.l, 1.0);
    w.psd.resize(prob.psd_blocks.size());
    for (size_t j = 0; j < prob.psd_blocks.size(); ++j) {
        const int n = prob.psd_blocks[j].dim;
        auto& ps = w.psd[j];
        ps.n = n;
        ps.S.assign(static_cast<size_t>(n) * n, 0.0);
        ps.Z.assign(static_cast<size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) {
            ps.S[static_cast<size_t>(i) * n + i] = 1.0;
            ps.Z[static_cast<size_t>(i) * n + i] = 1.0;
        }
    }
    if (!update_scaling(w)) throw std::runtime_error("sdp solve: initial scaling failed");
    w.M.assign(static_cast<size_t>(w.m) * w.m, 0.0);
    assemble_schur(w);
    KktFactor f0;
    if (!factor_kkt(w, f0)) throw std::runtime_error("sdp solve: singular initial KKT system");

    Vec zero_m(w.m, 0.0), zero_p(w.p, 0.0), zero_lp(w.l, 0.0);
    std::vector<Vec> zero_psd(prob.psd_blocks.size());
    for (size_t j = 0; j < prob.psd_blocks.size(); ++j) zero_psd[j].assign(h_psd[j].size(), 0.0);

    Vec ux, uy, uz_lp;
    std::vector<Vec> uz_psd;
    // Primal start.
    kkt_solve(w, f0, zero_m, w.b, h_lp, h_psd, ux, uy, uz_lp, uz_psd);
    w.x = ux;
    {
        double shift = 0.0;
        for (int r = 0; r < w.l; ++r) {
            w.s_lp[r] = -uz_lp[r];
            shift = std::max(shift, -w.s_lp[r]);
        }
        for (size_t j = 0; j < w.psd.size(); ++j) {
            auto& ps = w.psd[j];
            ps.S = uz_psd[j];
            for (auto& v : ps.S) v = -v;
            shift = std::max(shift, -min_eig_buf(ps.S, ps.n));
        }
        if (shift > 0.0) {
            const double t = 1.0 + shift;
            for (int r = 0; r < w.l; ++r) w.s_lp[r] += t;
            for (auto& ps : w.psd)
                for (int i = 0; i < ps.n; ++i) ps.S[static_cast<size_t>(i) * ps.n + i] += t;
        }
    }
    // Dual start.
    {
        Vec negc(w.m);
        for (int k = 0; k < w.m; ++k) negc[k] = -w.c[k];
        kkt_solve(w, f0, negc, zero_p, zero_lp, zero_psd, ux, uy, uz_lp, uz_psd);
        w.y = uy;
        double shift = 0.0;
        for (int r = 0; r < w.l; ++r) {
            w.z_lp[r] = uz_lp[r];
            shift = std::max(shift, -w.z_lp[r]);
        }
        for (size_t j = 0; j < w.psd.size(); ++j) {
            auto& ps = w.psd[j];
            ps.Z = uz_psd[j];
            shift = std::max(shift, -min_eig_buf(ps.Z, ps.n));
        }
        if (shift > 0.0) {
            const double t = 1.0 + shift;
            for (int r = 0; r < w.l; ++r) w.z_lp[r] += t;
            for (auto& ps : w.psd)
                for (int i = 0; i < ps.n; ++i) ps.Z[static_cast<size_t>(i) * ps.n + i] += t;
        }
    }
    w.tau = 1.0;
    w.kappa = 1.0;

    const double resx0 = std::max(1.0, std::sqrt(dot(w.c, w.c)));
    const double resy0 = std::max(1.0, std::sqrt(dot(w.b, w.b)));
    const double resz0 = std::max(1.0, cone_norm(h_lp, h_psd));

    SolveReport rep;

    // Map the internal iterate to user-sense report fields. `scale` divides
    // the duals: tau at optimality, the Farkas normalizer for infeasibility.
    auto finalize_point = [&](SolveStatus st, double pres, double dres, double scale) {
        rep.status = st;
        rep.primal_residual = pres;
        rep.dual_residual = dres;
        rep.y.assign(w.m, 0.0);
        for (int k = 0; k < w.m; ++k) rep.y[k] = w.x[k] / w.tau;
        rep.eq_duals.assign(w.p, 0.0);
        for (int i = 0; i < w.p; ++i) rep.eq_duals[i] = w.y[i] / scale;
        rep.lp_duals.assign(w.l, 0.0);
        for (int r = 0; r < w.l; ++r) rep.lp_duals[r] = w.z_lp[r] / scale;
        rep.psd_duals.clear();
        for (const auto& ps : w.psd) {
            RealSymMatrix Z(ps.n);
            Z.a = ps.Z;
            for (auto& v : Z.a) v /= scale;
            rep.psd_duals.push_back(std::move(Z));
        }
    };

    double last_pres = std::numeric_limits<double>::infinity();
    double last_dres = std::numeric_limits<double>::infinity();
    bool finished = false;

    // Best iterate so far (by worst-of residuals and gap); the solver falls
    // back to it when the iteration stalls near the boundary.
    struct Snapshot {
        Vec x, y, s_lp, z_lp;
        std::vector<Vec> S, Z;
        double tau = 1.0, kappa = 1.0;
        double pres = 0.0, dres = 0.0;
        bool set = false;
    } best;
    double best_err = std::numeric_limits<double>::infinity();
    int no_improve = 0;

    auto save_best = [&](double pres, double dres) {
        best.x = w.x;
        best.y = w.y;
        best.s_lp = w.s_lp;
        best.z_lp = w.z_lp;
        best.S.resize(w.psd.size());
        best.Z.resize(w.psd.size());
        for (size_t j = 0; j < w.psd.size(); ++j) {
            best.S[j] = w.psd[j].S;
            best.Z[j] = w.psd[j].Z;
        }
        best.tau = w.tau;
        best.kappa = w.kappa;
        best.pres = pres;
        best.dres = dres;
        best.set = true;
    };
    auto restore_best = [&] {
        if (!best.set) return;
        w.x = best.x;
        w.y = best.y;
        w.s_lp = best.s_lp;
        w.z_lp = best.z_lp;
        for (size_t j = 0; j < w.psd.size(); ++j) {
            w.psd[j].S = best.S[j];
            w.psd[j].Z = best.Z[j];
        }
        w.tau = best.tau;
        w.kappa = best.kappa;
    };

    Vec dx, dy, dz_lp, ds_lp;
    std::vector<Vec> dz_psd, ds_psd;

    int iter = 0;
    for (; iter < opt.max_iter && !finished; ++iter) {
        Vec hx(w.m), gtz(w.m), ax(w.p);
        eval_ATy(w, w.y, hx);
        eval_GTz_impl(w, w.z_lp, [&](size_t j) -> const Vec& { return w.psd[j].Z; }, gtz);
        Vec gz_lp;
        std::vector<Vec> gz_psd;
        eval_Gx(w, w.x, gz_lp, gz_psd);
        eval_Ax(w, w.x, ax);

        Vec r1(w.m);
        for (int k = 0; k < w.m; ++k) r1[k] = hx[k] + gtz[k] + w.c[k] * w.tau;
        Vec r2(w.p);
        for (int i = 0; i < w.p; ++i) r2[i] = ax[i] - w.b[i] * w.tau;
        Vec r3_lp(w.l);
        for (int r = 0; r < w.l; ++r) r3_lp[r] = gz_lp[r] + w.s_lp[r] - h_lp[r] * w.tau;
        std::vector<Vec> r3_psd(w.psd.size());
        for (size_t j = 0; j < w.psd.size(); ++j) {
            r3_psd[j] = gz_psd[j];
            for (size_t q = 0; q < r3_psd[j].size(); ++q)
                r3_psd[j][q] += w.psd[j].S[q] - h_psd[j][q] * w.tau;
        }
        double hz = dot(h_lp, w.z_lp);
        for (size_t j = 0; j < w.psd.size(); ++j) hz += dot(h_psd[j], w.psd[j].Z);
        const double by = dot(w.b, w.y);
        const double cx = dot(w.c, w.x);
        const double r4 = w.kappa + cx + by + hz;

        double sz = dot(w.s_lp, w.z_lp);
        for (size_t j = 0; j < w.psd.size(); ++j) sz += dot(w.psd[j].S, w.psd[j].Z);
        const double gap_abs = sz / (w.tau * w.tau);
        const double pcost_int = cx / w.tau;
        const double dcost_int = -(by + hz) / w.tau;
        const double pres =
            std::max(std::sqrt(dot(r2, r2)) / resy0, cone_norm(r3_lp, r3_psd) / resz0) / w.tau;
        const double dres = std::sqrt(dot(r1, r1)) / resx0 / w.tau;
        const double relgap = gap_abs / std::max(1.0, std::abs(pcost_int));
        last_pres = pres;
        last_dres = dres;

        rep.primal_objective = prob.maximize ? -pcost_int : pcost_int;
        rep.dual_objective = prob.maximize ? -dcost_int : dcost_int;
        rep.duality_gap = gap_abs;
        rep.iterations = iter;

        if (trace) {
            trace->gap.push_back(gap_abs);
            trace->pcost.push_back(rep.primal_objective);
            trace->dcost.push_back(rep.dual_objective);
        }

        const double err = std::max({pres, dres, relgap});
        if (err < 0.999 * best_err) {
            best_err = err;
            save_best(pres, dres);
            no_improve = 0;
        } else {
            ++no_improve;
        }

        if (pres <= opt.tol && dres <= opt.tol && relgap <= opt.tol) {
            finalize_point(SolveStatus::Optimal, pres, dres, w.tau);
            finished = true;
            break;
        }
        if (no_improve >= 8) {
            // Stalled: report the best iterate; the certificate validator
            // decides whether its dual is still usable.
            restore_best();
            finalize_point(SolveStatus::MaxIterations, best.pres, best.dres, w.tau);
            finished = true;
            break;
        }
        if (by + hz < 0.0) {
            const double denom = -(by + hz);
            Vec atgz(w.m);
            for (int k = 0; k < w.m; ++k) atgz[k] = hx[k] + gtz[k];
            const double certres = std::sqrt(dot(atgz, atgz)) / resx0 / denom;
            if (certres <= opt.tol) {
                finalize_point(SolveStatus::PrimalInfeasible, pres, dres, denom);
                finished = true;
                break;
            }
        }
        if (cx < 0.0) {
            Vec t_lp = gz_lp;
            for (int r = 0; r < w.l; ++r) t_lp[r] += w.s_lp[r];
            std::vector<Vec> t_psd = gz_psd;
            for (size_t j = 0; j < w.psd.size(); ++j)
                for (size_t q = 0; q < t_psd[j].size(); ++q) t_psd[j][q] += w.psd[j].S[q];
            const double certres =
                std::max(std::sqrt(dot(ax, ax)) / resy0, cone_norm(t_lp, t_psd) / resz0) /
                (-cx);
            if (certres <= opt.tol) {
                finalize_point(SolveStatus::DualInfeasible, pres, dres, -cx);
                finished = true;
                break;
            }
        }

        const double mu = (sz + w.tau * w.kappa) / (nu + 1);

        // On any numerical breakdown fall back to the best iterate seen.
        auto bail = [&] {
            if (best.set) {
                restore_best();
                finalize_point(SolveStatus::MaxIterations, best.pres, best.dres, w.tau);
            } else {
                finalize_point(SolveStatus::NumericalFailure, pres, dres, w.tau);
            }
            finished = true;
        };

        if (!update_scaling(w)) {
            bail();
            break;
        }
        assemble_schur(w);
        KktFactor fac;
        if (!factor_kkt(w, fac)) {
            bail();
            break;
        }
        try {

        Vec negc(w.m);
        for (int k = 0; k < w.m; ++k) negc[k] = -w.c[k];
        Vec w1x, w1y, w1z_lp;
        std::vector<Vec> w1z_psd;
        kkt_solve(w, fac, negc, w.b, h_lp, h_psd, w1x, w1y, w1z_lp, w1z_psd);
        double cw = dot(w.c, w1x) + dot(w.b, w1y) + dot(h_lp, w1z_lp);
        for (size_t j = 0; j < w.psd.size(); ++j) cw += dot(h_psd[j], w1z_psd[j]);

        auto direction = [&](double eta, double sigma_mu, const Vec* gamma_lp,
                             const std::vector<Vec>* gamma_psd, double dkap_target, Vec& odx,
                             Vec& ody, Vec& odz_lp, std::vector<Vec>& odz_psd, Vec& ods_lp,
                             std::vector<Vec>& ods_psd, double& dtau, double& dkappa) {
            Vec dshat_lp(w.l);
            for (int r = 0; r < w.l; ++r) {
                const double lam2 = w.s_lp[r] * w.z_lp[r];
                double dsv = -lam2 + sigma_mu;
                if (gamma_lp) dsv -= (*gamma_lp)[r];
                dshat_lp[r] = w.w_lp[r] * (dsv / std::sqrt(lam2));
            }
            std::vector<Vec> dshat_psd(w.psd.size());
            Vec t1, Rt;
            for (size_t j = 0; j < w.psd.size(); ++j) {
                const auto& ps = w.psd[j];
                const int n = ps.n;
                Vec D(static_cast<size_t>(n) * n, 0.0);
                for (int i = 0; i < n; ++i)
                    D[static_cast<size_t>(i) * n + i] = -ps.lambda[i] * ps.lambda[i] + sigma_mu;
                if (gamma_psd)
                    for (size_t q = 0; q < D.size(); ++q) D[q] -= (*gamma_psd)[j][q];
                for (int i = 0; i < n; ++i)
                    for (int q = 0; q < n; ++q)
                        D[static_cast<size_t>(i) * n + q] *= 2.0 / (ps.lambda[i] + ps.lambda[q]);
                mat_mul(ps.R, D, t1, n);
                transpose(ps.R, Rt, n);
                mat_mul(t1, Rt, dshat_psd[j], n);
                symmetrize(dshat_psd[j], n);
            }

            Vec bx(w.m), byv(w.p), bz_lp(w.l);
            std::vector<Vec> bz_psd(w.psd.size());
            for (int k = 0; k < w.m; ++k) bx[k] = -eta * r1[k];
            for (int i = 0; i < w.p; ++i) byv[i] = -eta * r2[i];
            for (int r = 0; r < w.l; ++r) bz_lp[r] = -eta * r3_lp[r] - dshat_lp[r];
            for (size_t j = 0; j < w.psd.size(); ++j) {
                bz_psd[j].assign(r3_psd[j].size(), 0.0);
                for (size_t q = 0; q < bz_psd[j].size(); ++q)
                    bz_psd[j][q] = -eta * r3_psd[j][q] - dshat_psd[j][q];
            }
            Vec vx, vy, vz_lp;
            std::vector<Vec> vz_psd;
            kkt_solve(w, fac, bx, byv, bz_lp, bz_psd, vx, vy, vz_lp, vz_psd);
            double cv = dot(w.c, vx) + dot(w.b, vy) + dot(h_lp, vz_lp);
            for (size_t j = 0; j < w.psd.size(); ++j) cv += dot(h_psd[j], vz_psd[j]);

            dtau = (-eta * r4 - dkap_target / w.tau - cv) / (cw - w.kappa / w.tau);
            odx = vx;
            ody = vy;
            odz_lp = vz_lp;
            odz_psd = vz_psd;
            for (int k = 0; k < w.m; ++k) odx[k] += dtau * w1x[k];
            for (int i = 0; i < w.p; ++i) ody[i] += dtau * w1y[i];
            for (int r = 0; r < w.l; ++r) odz_lp[r] += dtau * w1z_lp[r];
            for (size_t j = 0; j < w.psd.size(); ++j)
                for (size_t q = 0; q < odz_psd[j].size(); ++q)
                    odz_psd[j][q] += dtau * w1z_psd[j][q];
            Vec gdx_lp;
            std::vector<Vec> gdx_psd;
            eval_Gx(w, odx, gdx_lp, gdx_psd);
            ods_lp.assign(w.l, 0.0);
            for (int r = 0; r < w.l; ++r)
                ods_lp[r] = -eta * r3_lp[r] - gdx_lp[r] + h_lp[r] * dtau;
            ods_psd.resize(w.psd.size());
            for (size_t j = 0; j < w.psd.size(); ++j) {
                ods_psd[j].assign(r3_psd[j].size(), 0.0);
                for (size_t q = 0; q < r3_psd[j].size(); ++q)
                    ods_psd[j][q] = -eta * r3_psd[j][q] - gdx_psd[j][q] + h_psd[j][q] * dtau;
            }
            dkappa = (dkap_target - w.kappa * dtau) / w.tau;
        };

        Vec adx, ady, adz_lp, ads_lp;
        std::vector<Vec> adz_psd, ads_psd;
        double adtau = 0.0, adkappa = 0.0;
        direction(1.0, 0.0, nullptr, nullptr, -w.tau * w.kappa, adx, ady, adz_lp, adz_psd,
                  ads_lp, ads_psd, adtau, adkappa);

        auto max_step = [&](const Vec& dslp, const std::vector<Vec>& dspsd, const Vec& dzlp,
                            const std::vector<Vec>& dzpsd, double dtau_, double dkap_) {
            double a = std::numeric_limits<double>::infinity();
            a = std::min(a, max_step_lp(w.s_lp, dslp));
            a = std::min(a, max_step_lp(w.z_lp, dzlp));
            for (size_t j = 0; j < w.psd.size(); ++j) {
                a = std::min(a, max_step_psd(w.psd[j].n, w.psd[j].S, dspsd[j]));
                a = std::min(a, max_step_psd(w.psd[j].n, w.psd[j].Z, dzpsd[j]));
            }
            if (dtau_ < 0.0) a = std::min(a, -w.tau / dtau_);
            if (dkap_ < 0.0) a = std::min(a, -w.kappa / dkap_);
            return a;
        };
        const double alpha_aff = std::min(1.0, max_step(ads_lp, ads_psd, adz_lp, adz_psd,
                                                        adtau, adkappa));

        double sz_aff = 0.0;
        {
            const double a = alpha_aff;
            for (int r = 0; r < w.l; ++r)
                sz_aff += (w.s_lp[r] + a * ads_lp[r]) * (w.z_lp[r] + a * adz_lp[r]);
            for (size_t j = 0; j < w.psd.size(); ++j) {
                double acc = 0.0;
                const auto& S = w.psd[j].S;
                const auto& Z = w.psd[j].Z;
                for (size_t q = 0; q < S.size(); ++q)
                    acc += (S[q] + a * ads_psd[j][q]) * (Z[q] + a * adz_psd[j][q]);
                sz_aff += acc;
            }
            sz_aff += (w.tau + a * adtau) * (w.kappa + a * adkappa);
        }
        const double sigma =
            std::pow(std::clamp(sz_aff / (sz + w.tau * w.kappa), 0.0, 1.0), 3.0);

        // Mehrotra correction (W^{-T} ds_a) o (W dz_a).
        Vec gamma_lp(w.l, 0.0);
        for (int r = 0; r < w.l; ++r) gamma_lp[r] = ads_lp[r] * adz_lp[r];
        std::vector<Vec> gamma_psd(w.psd.size());
        {
            Vec t1, dst, dzt, RinvT, Rt, g1, g2;
            for (size_t j = 0; j < w.psd.size(); ++j) {
                const auto& ps = w.psd[j];
                const int n = ps.n;
                mat_mul(ps.Rinv, ads_psd[j], t1, n);
                transpose(ps.Rinv, RinvT, n);
                mat_mul(t1, RinvT, dst, n);
                transpose(ps.R, Rt, n);
                mat_mul(Rt, adz_psd[j], t1, n);
                mat_mul(t1, ps.R, dzt, n);
                mat_mul(dst, dzt, g1, n);
                mat_mul(dzt, dst, g2, n);
                gamma_psd[j].assign(g1.size(), 0.0);
                for (size_t q = 0; q < g1.size(); ++q) gamma_psd[j][q] = 0.5 * (g1[q] + g2[q]);
            }
        }
        const double gamma_kap = adtau * adkappa;

        const double mu_sigma = sigma * mu;
        double dtau = 0.0, dkappa = 0.0;
        direction(1.0 - sigma, mu_sigma, &gamma_lp, &gamma_psd,
                  -w.tau * w.kappa - gamma_kap + mu_sigma, dx, dy, dz_lp, dz_psd, ds_lp,
                  ds_psd, dtau, dkappa);

        double alpha = max_step(ds_lp, ds_psd, dz_lp, dz_psd, dtau, dkappa);
        alpha = std::min(1.0, 0.99 * alpha);
        if (!(alpha > 0.0) || !std::isfinite(alpha)) {
            bail();
            break;
        }

        for (int k = 0; k < w.m; ++k) w.x[k] += alpha * dx[k];
        for (int i = 0; i < w.p; ++i) w.y[i] += alpha * dy[i];
        for (int r = 0; r < w.l; ++r) {
            w.s_lp[r] += alpha * ds_lp[r];
            w.z_lp[r] += alpha * dz_lp[r];
        }
        for (size_t j = 0; j < w.psd.size(); ++j) {
            for (size_t q = 0; q < w.psd[j].S.size(); ++q) {
                w.psd[j].S[q] += alpha * ds_psd[j][q];
                w.psd[j].Z[q] += alpha * dz_psd[j][q];
            }
            symmetrize(w.psd[j].S, w.psd[j].n);
            symmetrize(w.psd[j].Z, w.psd[j].n);
        }
        w.tau += alpha * dtau;
        w.kappa += alpha * dkappa;
        } catch (const std::exception&) {
            bail();
            break;
        }
    }

    if (!finished) {
        finalize_point(SolveStatus::MaxIterations, last_pres, last_dres, w.tau);
        rep.iterations = iter;
    }

    if (rep.status == SolveStatus::Optimal || rep.status == SolveStatus::MaxIterations) {
        const auto check = validate_certificate(prob, rep);
        // A max-iterations exit can still carry a usable dual certificate.
        rep.has_certificate = check.valid;
        if (check.valid) rep.certified_bound = check.bound;
    } else if (rep.status == SolveStatus::PrimalInfeasible) {
        const auto check = validate_infeasibility(prob, rep);
        rep.has_certificate = check.valid;
        rep.infeasibility_margin = check.valid ? check.bound : 0.0;
    }

    rep.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
            .count();
    return rep;
}

namespace {

CertificateValidation check_multipliers(const ConicProblem& p, const std::vector<double>& u,
                                        const std::vector<double>& z_lp,
                                        const std::vector<RealSymMatrix>& Z_psd,
                                        const std::vector<double>& g) {
    CertificateValidation out;
    if (u.size() != p.equalities.size() || z_lp.size() != p.lp_rows.size() ||
        Z_psd.size() != p.psd_blocks.size()) {
        out.message = "multiplier shape mismatch";
        return out;
    }
    std::vector<RealSymMatrix> Z = Z_psd;
    double min_e = 0.0, psd_corr = 0.0;
    for (size_t j = 0; j < Z.size(); ++j) {
        if (Z[j].n != p.psd_blocks[j].dim) {
            out.message = "dual block dimension mismatch";
            return out;
        }
        const double me = sym_eig_values(Z[j]).front();
        min_e = std::min(min_e, me);
        if (me < 0.0) {
            for (int i = 0; i < Z[j].n; ++i) Z[j].at(i, i) += -me;
            psd_corr += -me;
        }
    }
    std::vector<double> z = z_lp;
    for (auto& v : z)
        if (v < 0.0) {
            psd_corr += -v;
            v = 0.0;
        }
    out.min_dual_eig = min_e;
    out.psd_correction = psd_corr;

    // Stationarity: rho_k = g_k - (E^T u)_k + (D^T z)_k + sum_j <F_jk, Z_j>.
    std::vector<double> rho(p.num_vars, 0.0);
    if (!g.empty())
        for (int k = 0; k < p.num_vars; ++k) rho[k] = g[k];
    for (size_t i = 0; i < p.equalities.size(); ++i)
        for (const auto& [k, cf] : p.equalities[i].terms) rho[k] -= cf * u[i];
    for (size_t r = 0; r < p.lp_rows.size(); ++r)
        for (const auto& [k, cf] : p.lp_rows[r].terms) rho[k] += cf * z[r];
    for (size_t j = 0; j < p.psd_blocks.size(); ++j) {
        for (const auto& [k, F] : p.psd_blocks[j].terms) {
            double ip = 0.0;
            for (const auto& e : F) {
                ip += e.v * Z[j].at(e.r, e.c);
                if (e.r != e.c) ip += e.v * Z[j].at(e.c, e.r);
            }
            rho[k] += ip;
        }
    }
    double resid = 0.0;
    for (int k = 0; k < p.num_vars; ++k) {
        const double bnd =
            (k < static_cast<int>(p.var_abs_bound.size())) ? p.var_abs_bound[k] : 1.0;
        resid += std::abs(rho[k]) * bnd;
    }
    out.residual_term = resid;

    double value = 0.0;
    for (size_t i = 0; i < p.equalities.size(); ++i) value += u[i] * p.equalities[i].constant;
    for (size_t r = 0; r < p.lp_rows.size(); ++r) value += z[r] * p.lp_rows[r].constant;
    for (size_t j = 0; j < p.psd_blocks.size(); ++j)
        for (const auto& e : p.psd_blocks[j].constant) {
            value += e.v * Z[j].at(e.r, e.c);
            if (e.r != e.c) value += e.v * Z[j].at(e.c, e.r);
        }
    out.bound = value;
    return out;
}

} // namespace

CertificateValidation validate_certificate(const ConicProblem& p, const SolveReport& r) {
    // Work in the internal "maximize" sense: max (sense*g)^T y.
    const double sense = p.maximize ? 1.0 : -1.0;
    std::vector<double> g(p.num_vars, 0.0);
    for (const auto& [k, v] : p.objective) g[k] += sense * v;
    auto out = check_multipliers(p, r.eq_duals, r.lp_duals, r.psd_duals, g);
    if (!out.message.empty()) return out;
    const double raw = out.bound + out.residual_term; // upper bound on max sense*g^T y
    out.bound = p.maximize ? raw : -raw;              // lower bound when minimizing
    const double scale = std::max(1.0, std::abs(r.dual_objective));
    out.valid = out.psd_correction <= 1e-5 * scale && out.residual_term <= 1e-3 * scale &&
                std::abs(out.bound - r.dual_objective) <= 1e-3 * scale;
    if (!out.valid && out.message.empty()) out.message = "certificate corrections too large";
    return out;
}

CertificateValidation validate_infeasibility(const ConicProblem& p, const SolveReport& r) {
    auto out = check_multipliers(p, r.eq_duals, r.lp_duals, r.psd_duals, {});
    if (!out.message.empty()) return out;
    // For every feasible y: 0 <= value + sum rho_k y_k, so value < -residual
    // proves emptiness with margin -(value + residual).
    const double margin = -(out.bound + out.residual_term);
    out.bound = margin;
    out.valid = margin > 0.0;
    if (!out.valid && out.message.empty()) out.message = "Farkas margin not positive";
    return out;
}

std::string SolveReport::to_json() const {
    nlohmann::json j;
    j["status"] = to_string(status);
    j["primal_objective"] = primal_objective;
    j["dual_objective"] = dual_objective;
    j["duality_gap"] = duality_gap;
    j["primal_residual"] = primal_residual;
    j["dual_residual"] = dual_residual;
    j["certified_bound"] = certified_bound;
    j["has_certificate"] = has_certificate;
    j["iterations"] = iterations;
    j["wall_time_ms"] = wall_time_ms;
    if (status == SolveStatus::PrimalInfeasible) j["infeasibility_margin"] = infeasibility_margin;
    return j.dump(2);
}

} // namespace ctrg
