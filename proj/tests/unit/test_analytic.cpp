#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ctrg/analytic.hpp"

using namespace ctrg;

TEST_CASE("closed form chi=0 ceiling") {
    CHECK(closed_form_chsh_zero(2.0) == doctest::Approx(1.0));
    CHECK(closed_form_chsh_zero(kChshTsirelson) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(closed_form_chsh_zero(2.0252) == doctest::Approx(0.99362).epsilon(1e-5));
    CHECK_THROWS_AS(closed_form_chsh_zero(kChshTsirelson + 1e-6), std::domain_error);
    CHECK_THROWS_AS(closed_form_chsh_zero(1.9), std::domain_error);
}

TEST_CASE("shifted bound") {
    const auto curve = [](double I) { return closed_form_chsh_zero(I); };
    // chi = 0 collapses to the curve itself.
    for (double I : {2.1, 2.4, 2.7}) {
        CHECK(bound_shifted(I, 0.0, 16.0, curve) == doctest::Approx(curve(I)).epsilon(1e-12));
    }
    CHECK(bound_shifted(2.0732, 0.0030, 16.0, curve) == doctest::Approx(0.9966).epsilon(5e-4));
    // Argument clipped at the local bound: curve(2) + chi saturates to 1.
    CHECK(bound_shifted(2.1, 0.01, 16.0, curve) == doctest::Approx(1.0));
    CHECK_THROWS_AS(bound_shifted(2.5, 0.01, 0.0, curve), std::invalid_argument);
}

TEST_CASE("shifted bound monotone in chi and I") {
    const auto curve = [](double I) { return closed_form_chsh_zero(I); };
    for (int i = 0; i < 12; ++i) {
        const double I = 2.0 + (kChshTsirelson - 2.0) * i / 11.0;
        double prev = -1.0;
        for (int c = 0; c <= 10; ++c) {
            const double chi = 0.02 * c / 10.0;
            const double v = bound_shifted(I, chi, 16.0, curve);
            CHECK(v >= prev - 1e-12); // nondecreasing in chi
            prev = v;
        }
    }
    for (int c = 0; c <= 10; ++c) {
        const double chi = 0.02 * c / 10.0;
        double prev = 2.0;
        for (int i = 0; i < 12; ++i) {
            const double I = 2.0 + (kChshTsirelson - 2.0) * i / 11.0;
            const double v = bound_shifted(I, chi, 16.0, curve);
            CHECK(v <= prev + 1e-12); // nonincreasing in I
            prev = v;
        }
    }
}

TEST_CASE("signaling bound") {
    CHECK(bound_signaling(2.0, 0.0) == doctest::Approx(1.0));
    CHECK(bound_signaling(4.0, 0.0) == doctest::Approx(0.5));
    CHECK(bound_signaling(kChshTsirelson, 0.01) ==
          doctest::Approx(1.5 - std::sqrt(2.0) / 2.0 + 0.02).epsilon(1e-12));
    CHECK(bound_signaling(1.0, 0.3) == doctest::Approx(1.0)); // below the local bound
    CHECK_THROWS_AS(bound_signaling(4.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(bound_signaling(3.0, 1.5), std::invalid_argument);

    // Monotone: nonincreasing in I, nondecreasing in delta.
    for (int d = 0; d <= 5; ++d) {
        const double delta = 0.05 * d / 5.0;
        double prev = 2.0;
        for (int i = 0; i <= 20; ++i) {
            const double I = 2.0 + 2.0 * i / 20.0;
            const double v = bound_signaling(I, delta);
            CHECK(v <= prev + 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("upper envelope stays above the tabulated function") {
    // Tabulate the closed form and verify the envelope never dips below it.
    const int nodes = 17;
    std::vector<double> xs(nodes), ys(nodes);
    for (int i = 0; i < nodes; ++i) {
        xs[i] = 2.0 + (kChshTsirelson - 2.0) * i / (nodes - 1);
        ys[i] = closed_form_chsh_zero(xs[i]);
    }
    const UpperEnvelope env(xs, ys);
    for (int i = 0; i <= 400; ++i) {
        const double I = 2.0 + (kChshTsirelson - 2.0) * i / 400.0;
        CHECK(env(I) >= closed_form_chsh_zero(I) - 1e-12);
    }
    CHECK(env(2.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(env(1.8), std::domain_error);
    CHECK_THROWS_AS(UpperEnvelope({2.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("guessing probabilities clip to [1/4, 1]") {
    CHECK(clip_guess_probability(2.0) == doctest::Approx(1.0));
    CHECK(clip_guess_probability(0.1) == doctest::Approx(0.25));
    CHECK(clip_guess_probability(0.7) == doctest::Approx(0.7));
}
