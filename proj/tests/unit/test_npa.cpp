#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "ctrg/analytic.hpp"
#include "ctrg/bell.hpp"
#include "ctrg/models.hpp"
#include "ctrg/npa.hpp"
#include "ctrg/npa_bounds.hpp"
#include "ctrg/sdp.hpp"

using namespace ctrg;

TEST_CASE("canonicalizer: idempotence and cross-party commutation") {
    const Letter X0 = letter_proj_a(0), X1 = letter_proj_a(1);
    const Letter Y0 = letter_proj_b(0);
    const Letter Z = letter_z(0, 1, 1, 0);

    CHECK(canonicalize({X0, X0}) == Word{X0});
    CHECK(canonicalize({Y0, X0}) == Word({X0, Y0}));
    CHECK(canonicalize({X0, Y0, X0}) == Word({X0, Y0}));
    CHECK(canonicalize({X0, X1, X0}) == Word({X0, X1, X0})); // same party, no commutation
    // Collective letters commute with nothing.
    CHECK(canonicalize({Y0, Z, X0}) == Word({Y0, Z, X0}));
    CHECK(canonicalize({Z, Z}) == Word({Z, Z})); // no idempotence for Z
}

TEST_CASE("moment representatives identify adjoints") {
    const Letter X0 = letter_proj_a(0), X1 = letter_proj_a(1);
    const Letter Z = letter_z(1, 1, 0, 1);
    CHECK(moment_representative({X0, X1}) == moment_representative({X1, X0}));
    CHECK(moment_representative({Z, X0}) == moment_representative({X0, Z}));
    CHECK(moment_representative({}) == Word{});
}

TEST_CASE("word strings round trip") {
    const Word w = {letter_proj_a(1), letter_z(0, 1, 1, 0), letter_proj_b(0)};
    CHECK(word_from_string(word_to_string(w)) == w);
    CHECK(word_to_string({}) == "1");
    CHECK(word_from_string("1") == Word{});
    CHECK_THROWS_AS(word_from_string("Q3"), std::invalid_argument);
}

TEST_CASE("levels produce expected basis sizes") {
    CHECK(MonomialSet::level("l1").moment_basis.size() == 21);
    CHECK(MonomialSet::level("l1xy").moment_basis.size() == 25);
    CHECK(MonomialSet::level("l1xy").loc_basis.size() == 5);
    CHECK(MonomialSet::level("l2r").loc_basis.size() == 9);
    CHECK(MonomialSet::level("l1xyzw").moment_basis.size() == 57);
    CHECK(MonomialSet::level("l2").moment_basis.size() > 400);
    CHECK_THROWS_AS(MonomialSet::level("bogus"), std::invalid_argument);
}

TEST_CASE("structural audit: affine rows reference canonical registered moments") {
    const auto rp = randomness_program(2.5, 0.01, {0, 0, 0, 0}, MonomialSet::level("l1xy"));
    REQUIRE(static_cast<int>(rp.var_words.size()) == rp.num_vars);
    std::set<std::string> seen;
    for (const auto& s : rp.var_words) {
        const Word w = word_from_string(s);
        CHECK(moment_representative(w) == w); // stored reps are canonical
        CHECK(seen.insert(s).second);         // and unique
    }
    auto check_terms = [&](const std::vector<std::pair<int, double>>& terms) {
        for (const auto& [k, v] : terms) {
            CHECK(k >= 0);
            CHECK(k < rp.num_vars);
            CHECK(std::isfinite(v));
        }
    };
    for (const auto& row : rp.equalities) check_terms(row.terms);
    for (const auto& row : rp.lp_rows) check_terms(row.terms);
    for (const auto& blk : rp.blocks)
        for (const auto& e : blk.entries) {
            CHECK(e.var >= -1);
            CHECK(e.var < rp.num_vars);
            CHECK(e.r >= e.c);
            CHECK(e.r < blk.dim);
        }
    // The identity moment is substituted, never a variable.
    for (const auto& s : rp.var_words) CHECK(s != "1");
}

TEST_CASE("tsirelson and the unconstrained extreme") {
    SdpBoundOptions opt;
    opt.level = MonomialSet::level("l1");
    CHECK(max_bell_sdp(0.0, opt).value == doctest::Approx(kChshTsirelson).epsilon(1e-4));
    CHECK(max_bell_sdp(1.0, opt).value == doctest::Approx(4.0).epsilon(1e-4));
    const double mid = max_bell_sdp(0.01, opt).value;
    CHECK(mid > kChshTsirelson);
    CHECK(mid < 4.0);
}

TEST_CASE("max bell value is monotone in the cross-talk budget") {
    SdpBoundOptions opt;
    opt.level = MonomialSet::level("l1");
    double prev = 0.0;
    for (double chi : {0.0, 0.01, 0.05, 0.2}) {
        const double v = max_bell_sdp(chi, opt).value;
        CHECK(v >= prev - 1e-6);
        prev = v;
    }
}

TEST_CASE("randomness bound shrinks when the level grows") {
    const double v1 = p_star_sdp(2.5, 0.005, 0, 0, {MonomialSet::level("l1"), {}, {}}).value;
    const double v2 = p_star_sdp(2.5, 0.005, 0, 0, {MonomialSet::level("l1xy"), {}, {}}).value;
    const double v3 = p_star_sdp(2.5, 0.005, 0, 0, {MonomialSet::level("l2r"), {}, {}}).value;
    CHECK(v2 <= v1 + 1e-6);
    CHECK(v3 <= v2 + 1e-6);
}

TEST_CASE("randomness bound is nondecreasing in chi") {
    SdpBoundOptions opt;
    opt.level = MonomialSet::level("l1xy");
    double prev = 0.0;
    for (double chi : {0.0, 0.003, 0.01, 0.03}) {
        const double v = p_star_sdp(2.5, chi, 0, 0, opt).value;
        CHECK(v >= prev - 1e-6);
        prev = v;
    }
}

TEST_CASE("pair guessing at the tsirelson point stays below one half") {
    SdpBoundOptions opt;
    opt.level = MonomialSet::level("l1xy");
    const auto r = p_star_sdp(kChshTsirelson, 0.0, 0, 0, opt);
    CHECK(r.value <= closed_form_chsh_zero(kChshTsirelson) + 1e-6);
}

TEST_CASE("bell equality and lower-bound variants agree for the relaxation") {
    SdpBoundOptions eq;
    eq.level = MonomialSet::level("l1xy");
    SdpBoundOptions geq = eq;
    geq.npa.bell_as_lower_bound = true;
    const double a = p_star_sdp(2.5, 0.005, 0, 0, eq).value;
    const double b = p_star_sdp(2.5, 0.005, 0, 0, geq).value;
    CHECK(a == doctest::Approx(b).epsilon(1e-6));
}

TEST_CASE("min chi: scalar level reproduces the PR gap in closed form") {
    // At the scalar localizing level the only bridge is |<Z> - <XY>| <= chi,
    // so the PR box needs chi >= (4 - 2 sqrt 2) / 16.
    SdpBoundOptions opt;
    opt.level = MonomialSet::level("l1");
    const auto r = min_chi_sdp(pr_box(), opt, 1e-5);
    const double expected = (4.0 - kChshTsirelson) / 16.0;
    CHECK(r.certified_lower <= expected + 1e-4);
    CHECK(r.feasible_upper >= expected - 1e-4);
    CHECK(r.certified_lower > 0.01);
    CHECK(r.lower_is_certified);
}

TEST_CASE("min chi: product-realizable behavior needs none") {
    SdpBoundOptions opt;
    opt.level = MonomialSet::level("l1xy");
    const auto beh = born_behavior(ion_model({0.0}));
    const auto r = min_chi_sdp(beh, opt);
    CHECK(r.certified_lower <= 1e-6);
    CHECK(r.feasible_upper <= 1e-6);
}

TEST_CASE("min chi never falls below the signaling estimator") {
    const auto beh = born_behavior(josephson_model({0.0059, 0.0031}));
    const double simple = chi_lower_bound_simple(beh);
    SdpBoundOptions opt;
    opt.level = MonomialSet::level("l1xy");
    const auto r = min_chi_sdp(beh, opt);
    CHECK(r.feasible_upper + 1e-6 >= simple);
    CHECK(r.certified_lower > 0.0);
}

TEST_CASE("simple chi estimator") {
    CHECK(chi_lower_bound_simple(pr_box()) == doctest::Approx(0.0));
    CHECK(chi_lower_bound_simple(max_signaling_box()) == doctest::Approx(0.25));
}

TEST_CASE("chi-parametric problems require explicit materialization") {
    const auto rp = min_chi_program(pr_box(), MonomialSet::level("l1"));
    CHECK(rp.chi_is_variable);
    CHECK_THROWS_AS(rp.to_conic(), std::logic_error);
    CHECK_NOTHROW(rp.to_conic(0.1));
}

TEST_CASE("randomness program rejects bad inputs") {
    CHECK_THROWS_AS(randomness_program(2.5, -0.1, {0, 0, 0, 0}, MonomialSet::level("l1")),
                    std::invalid_argument);
    CHECK_THROWS_AS(randomness_program(4.5, 0.0, {0, 0, 0, 0}, MonomialSet::level("l1")),
                    std::invalid_argument);
    CHECK_THROWS_AS(randomness_program(2.5, 0.0, {2, 0, 0, 0}, MonomialSet::level("l1")),
                    std::invalid_argument);
    MonomialSet empty;
    CHECK_THROWS_AS(randomness_program(2.5, 0.0, {0, 0, 0, 0}, empty), std::invalid_argument);
}

TEST_CASE("outcome-relabelled targets give identical bounds") {
    SdpBoundOptions opt;
    opt.level = MonomialSet::level("l1");
    const auto r00 = solve(randomness_program(2.4, 0.002, {0, 0, 0, 0}, opt.level).to_conic());
    const auto r11 = solve(randomness_program(2.4, 0.002, {1, 1, 0, 0}, opt.level).to_conic());
    REQUIRE(r00.has_certificate);
    REQUIRE(r11.has_certificate);
    CHECK(r00.certified_bound == doctest::Approx(r11.certified_bound).epsilon(1e-6));
}
