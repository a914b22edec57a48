#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ctrg/analytic.hpp"
#include "ctrg/bell.hpp"
#include "ctrg/models.hpp"

using namespace ctrg;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("ion model at zero leakage is exactly product and maximally violating") {
    const auto m = ion_model({0.0});
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const auto diff = m.pi_ab(a, b, x, y) - kron(m.pi_a(a, x), m.pi_b(b, y));
                    CHECK(diff.max_abs() <= 1e-14);
                }
    const auto beh = born_behavior(m);
    CHECK(BellExpression::chsh().evaluate(beh) == doctest::Approx(kChshTsirelson).epsilon(1e-9));
}

TEST_CASE("ion model with leakage keeps exact completeness and loses violation") {
    const auto m = ion_model({0.03});
    CHECK_NOTHROW(m.validate(1e-12));
    const auto beh = born_behavior(m);
    const double I = BellExpression::chsh().evaluate(beh);
    CHECK(I < kChshTsirelson - 1e-6);
    CHECK(I > 2.0);
}

TEST_CASE("ion chi bound matches the overlap closed form") {
    CHECK(ion_chi_bound({0.0}) == doctest::Approx(0.0));
    for (double eps : {0.01, 0.03, 0.05, 0.08}) {
        const double u = eps * kPi / 8.0;
        const double expected = std::sqrt(1.0 - std::pow(std::cos(u), 4.0));
        CHECK(ion_chi_bound({eps}) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("ion chi bound grows with the leakage ratio") {
    double prev = -1.0;
    for (int i = 0; i <= 10; ++i) {
        const double v = ion_chi_bound({0.1 * i / 10.0});
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("josephson model at zero flip probabilities is the ideal product model") {
    const auto m = josephson_model({0.0, 0.0});
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const auto diff = m.pi_ab(a, b, x, y) - kron(m.pi_a(a, x), m.pi_b(b, y));
                    CHECK(diff.max_abs() <= 1e-14);
                }
    CHECK(josephson_chi_objective({0.0, 0.0}, {0.0, 0.0}, MeasurementAngles::standard_chsh()) <=
          1e-12);
}

TEST_CASE("josephson model with the reported parameters is a valid device") {
    const auto m = josephson_model({0.0059, 0.0031});
    CHECK_NOTHROW(m.validate(1e-12));
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const auto eigs = herm_eigs(m.pi_ab(a, b, x, y));
                    CHECK(eigs.front() >= -1e-12);
                    CHECK(eigs.back() <= 1.0 + 1e-12);
                }
    const auto beh = born_behavior(m);
    CHECK(signaling_delta(beh).delta > 0.0);
    CHECK(signaling_delta(beh).delta <= delta_from_chi(Scenario::chsh(), 0.0030) + 1e-9);
    const double I = BellExpression::chsh().evaluate(beh);
    CHECK(I > 2.7);
    CHECK(I < kChshTsirelson);
}

TEST_CASE("josephson chi minimization reproduces the balanced ansatz") {
    const auto r = josephson_chi_bound({0.0059, 0.0031});
    CHECK(r.chi == doctest::Approx(0.0030).epsilon(0.1));
    CHECK(std::abs(r.chi - 0.0030) <= 3e-4);
    CHECK(r.argmin.q_a >= 0.0);
    CHECK(r.argmin.q_a <= 0.001);
    CHECK(std::abs(r.argmin.q_b - 0.0029) <= 5e-4);
}

TEST_CASE("swapping the tunneling probabilities swaps the ansatz") {
    const auto fwd = josephson_chi_bound({0.0059, 0.0031});
    const auto rev = josephson_chi_bound({0.0031, 0.0059});
    CHECK(fwd.chi == doctest::Approx(rev.chi).epsilon(1e-6));
    CHECK(fwd.argmin.q_a == doctest::Approx(rev.argmin.q_b).epsilon(1e-3));
    CHECK(fwd.argmin.q_b == doctest::Approx(rev.argmin.q_a).epsilon(1e-3));
}

TEST_CASE("josephson chi objective is angle independent") {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
    const JosephsonParams params{0.0059, 0.0031};
    const ProductAnsatz q{0.0001, 0.0029};
    const double ref = josephson_chi_objective(params, q, MeasurementAngles::standard_chsh());
    for (int t = 0; t < 5; ++t) {
        MeasurementAngles ang;
        for (int x = 0; x < 2; ++x) ang.alice[x] = {u(rng) / 2.0, u(rng)};
        for (int y = 0; y < 2; ++y) ang.bob[y] = {u(rng) / 2.0, u(rng)};
        CHECK(josephson_chi_objective(params, q, ang) == doctest::Approx(ref).epsilon(1e-9));
    }
}

TEST_CASE("born rule on a maximally mixed state is uniform") {
    auto m = ion_model({0.03});
    CMatrix mixed = CMatrix::identity(4);
    mixed *= cplx(0.25);
    m.state = mixed;
    const auto beh = born_behavior(m);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y)
                    CHECK(beh.p(a, b, x, y) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("deterministic model produces the classical corner") {
    const auto beh = born_behavior(deterministic_model());
    CHECK(beh.p(0, 0, 0, 0) == doctest::Approx(1.0));
    CHECK(BellExpression::chsh().evaluate(beh) == doctest::Approx(2.0));
    CHECK(signaling_delta(beh).delta <= 1e-12);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(ion_model({-0.1}), std::invalid_argument);
    CHECK_THROWS_AS(ion_model({1.0}), std::invalid_argument);
    CHECK_THROWS_AS(josephson_model({-0.1, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(josephson_model({0.0, 1.5}), std::invalid_argument);
}
