#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ctrg/analytic.hpp"
#include "ctrg/linalg.hpp"
#include "ctrg/npa.hpp"
#include "ctrg/sdp.hpp"

using namespace ctrg;

namespace {

ConicProblem toy_cross() {
    // max t s.t. [[1, t], [t, 1]] PSD
    ConicProblem p;
    p.num_vars = 1;
    p.maximize = true;
    p.objective = {{0, 1.0}};
    PsdBlock b;
    b.dim = 2;
    b.constant = {{0, 0, 1.0}, {1, 1, 1.0}};
    b.terms = {{0, {{1, 0, 1.0}}}};
    p.psd_blocks.push_back(b);
    p.var_abs_bound = {2.0};
    return p;
}

RealSymMatrix random_sym(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RealSymMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = u(rng);
            m.at(i, j) = v;
            m.at(j, i) = v;
        }
    return m;
}

} // namespace

TEST_CASE("toy cross problem solves to 1") {
    const auto rep = solve(toy_cross());
    REQUIRE(rep.status == SolveStatus::Optimal);
    CHECK(rep.primal_objective == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(rep.certified_bound == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.certified_bound >= rep.primal_objective - 1e-9);
    CHECK(rep.has_certificate);
}

TEST_CASE("largest eigenvalue via the minimization path") {
    // min lambda s.t. lambda I - A PSD; optimum is max eig(A).
    std::mt19937_64 rng(31);
    for (int t = 0; t < 5; ++t) {
        const auto A = random_sym(5, rng);
        ConicProblem p;
        p.num_vars = 1;
        p.maximize = false;
        p.objective = {{0, 1.0}};
        PsdBlock b;
        b.dim = 5;
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j <= i; ++j)
                if (A.at(i, j) != 0.0) b.constant.push_back({i, j, -A.at(i, j)});
        std::vector<SymEntry> diag;
        for (int i = 0; i < 5; ++i) diag.push_back({i, i, 1.0});
        b.terms = {{0, diag}};
        p.psd_blocks.push_back(b);
        p.var_abs_bound = {10.0};
        const auto rep = solve(p);
        REQUIRE(rep.status == SolveStatus::Optimal);
        CMatrix Ac(5);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) Ac.at(i, j) = A.at(i, j);
        const double lmax = herm_eigs(Ac).back();
        CHECK(rep.primal_objective == doctest::Approx(lmax).epsilon(1e-6));
        // Minimization: the certified bound is a lower bound.
        CHECK(rep.certified_bound <= rep.primal_objective + 1e-8);
        CHECK(rep.certified_bound == doctest::Approx(lmax).epsilon(1e-6));
    }
}

TEST_CASE("tsirelson value at the first level") {
    const auto rp = max_bell_given_chi(0.0, MonomialSet::level("l1"));
    const auto rep = solve(rp.to_conic());
    REQUIRE(rep.has_certificate);
    CHECK(rep.certified_bound == doctest::Approx(kChshTsirelson).epsilon(1e-4 / 2.8));
    CHECK(std::abs(rep.certified_bound - kChshTsirelson) <= 1e-4);
}

TEST_CASE("weak duality holds along the trace") {
    IterationTrace tr;
    SolveOptions opt;
    opt.collect_trace = true;
    const auto rp = max_bell_given_chi(0.01, MonomialSet::level("l1"));
    const auto rep = solve(rp.to_conic(), opt, &tr);
    REQUIRE(rep.status == SolveStatus::Optimal);
    for (const double g : tr.gap) CHECK(g >= 0.0);
    CHECK(rep.primal_objective <= rep.certified_bound + 1e-7);
}

TEST_CASE("certificate validation accepts optimal reports and rejects tampering") {
    const auto rp = max_bell_given_chi(0.0, MonomialSet::level("l1"));
    const auto cp = rp.to_conic();
    auto rep = solve(cp);
    REQUIRE(rep.status == SolveStatus::Optimal);
    const auto ok = validate_certificate(cp, rep);
    CHECK(ok.valid);
    CHECK(ok.psd_correction <= 10 * 1e-7);
    CHECK(ok.residual_term <= 10 * 1e-4);
    CHECK(ok.bound == doctest::Approx(rep.certified_bound).epsilon(1e-9));

    auto corrupted = rep;
    corrupted.psd_duals[0].at(0, 1) += 0.05;
    corrupted.psd_duals[0].at(1, 0) += 0.05;
    const auto bad = validate_certificate(cp, corrupted);
    CHECK_FALSE(bad.valid);
}

TEST_CASE("infeasible system yields a validated Farkas certificate") {
    // y >= 2 and y <= 1 cannot hold.
    ConicProblem p;
    p.num_vars = 1;
    p.maximize = true;
    p.objective = {{0, 1.0}};
    PsdBlock b;
    b.dim = 1;
    b.terms = {{0, {{0, 0, 1.0}}}}; // y >= 0
    p.psd_blocks.push_back(b);
    AffineRow hi;
    hi.constant = 1.0;
    hi.terms = {{0, -1.0}};
    p.lp_rows.push_back(hi);
    AffineRow lo;
    lo.constant = -2.0;
    lo.terms = {{0, 1.0}};
    p.lp_rows.push_back(lo);
    p.var_abs_bound = {4.0};
    const auto rep = solve(p);
    REQUIRE(rep.status == SolveStatus::PrimalInfeasible);
    const auto check = validate_infeasibility(p, rep);
    CHECK(check.valid);
    CHECK(check.bound > 0.0);
}

TEST_CASE("identical solves are bit-identical") {
    const auto rp = randomness_program(2.5, 0.002, {0, 0, 0, 0}, MonomialSet::level("l1"));
    const auto cp = rp.to_conic();
    const auto a = solve(cp);
    const auto b = solve(cp);
    CHECK(a.certified_bound == b.certified_bound);
    CHECK(a.iterations == b.iterations);
    REQUIRE(a.y.size() == b.y.size());
    for (size_t i = 0; i < a.y.size(); ++i) CHECK(a.y[i] == b.y[i]);
}

TEST_CASE("certified bound is invariant under rescaling by 1e3") {
    // Scale the constant block and the equality right-hand sides; the
    // optimum scales linearly.
    const double k = 1e3;
    auto base = toy_cross();
    auto scaled = base;
    for (auto& e : scaled.psd_blocks[0].constant) e.v *= k;
    scaled.var_abs_bound = {2.0 * k};
    const auto r1 = solve(base);
    const auto r2 = solve(scaled);
    REQUIRE(r1.status == SolveStatus::Optimal);
    REQUIRE(r2.status == SolveStatus::Optimal);
    CHECK(r2.certified_bound / k == doctest::Approx(r1.certified_bound).epsilon(1e-6));
}

TEST_CASE("size budget is enforced") {
    ConicProblem p;
    p.num_vars = 1;
    p.objective = {{0, 1.0}};
    PsdBlock b;
    b.dim = 2500;
    b.terms = {{0, {{0, 0, 1.0}}}};
    p.psd_blocks.push_back(b);
    CHECK_THROWS_AS(solve(p), std::invalid_argument);
}

TEST_CASE("max-iterations exit still reports honestly") {
    SolveOptions opt;
    opt.max_iter = 3;
    const auto rp = max_bell_given_chi(0.0, MonomialSet::level("l1"));
    const auto rep = solve(rp.to_conic(), opt);
    CHECK(rep.status == SolveStatus::MaxIterations);
}

TEST_CASE("exported problems import to the same certified bound") {
    const auto rp = randomness_program(2.4, 0.005, {0, 0, 0, 0}, MonomialSet::level("l1"));
    const auto direct = solve(rp.to_conic());
    const auto imported = import_problem_json(rp.to_json(0.005));
    const auto redone = solve(imported.conic);
    REQUIRE(direct.has_certificate);
    REQUIRE(redone.has_certificate);
    CHECK(std::abs(direct.certified_bound - redone.certified_bound) <= 1e-9);
}
