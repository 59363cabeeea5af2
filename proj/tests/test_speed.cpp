#include <chrono>
#include <cmath>

#include "doctest.h"
#include "travwave/error.hpp"
#include "travwave/speed.hpp"

using namespace travwave;

TEST_CASE("natural speed of the weed model") {
    const auto s = make_weed_model(1.0 / 3.0);
    const double c = natural_speed(s);
    CHECK(std::abs(c - (-0.2356)) <= 1e-3);
    CHECK(std::abs(c - (2.0 / 3.0 - 1.0) / std::sqrt(2.0)) <= 1e-8);
}

TEST_CASE("balanced weed model has zero speed") {
    CHECK(std::abs(natural_speed(make_weed_model(0.5))) <= 1e-6);
}

TEST_CASE("natural speed follows the cubic formula for other thresholds") {
    for (double us : {0.1, 0.25, 0.4}) {
        const double exact = (2.0 * us - 1.0) / std::sqrt(2.0);
        CHECK(std::abs(natural_speed(make_weed_model(us)) - exact) <= 1e-8);
    }
    // time rescaling: f -> r f scales the speed by sqrt(r)
    const double exact = std::sqrt(6.0) * (2.0 / 6.0 - 1.0) / std::sqrt(2.0);
    CHECK(std::abs(natural_speed(make_weed_model(1.0 / 6.0, 6.0)) - exact) <= 1e-8);
}

TEST_CASE("gap is increasing in c") {
    const auto s = make_weed_model(1.0 / 3.0);
    double prev = manifold_gap(s, -1.0);
    for (double c = -0.9; c <= 1.0; c += 0.1) {
        const double g = manifold_gap(s, c);
        CHECK(g > prev);
        prev = g;
    }
}

TEST_CASE("natural speed is insensitive to tighter tolerances") {
    const auto s = make_weed_model(0.3);
    PhaseSettings tight;
    tight.rtol = 1e-11;
    tight.atol = 1e-13;
    CHECK(std::abs(natural_speed(s) - natural_speed(s, 1e-10, tight)) <= 1e-6);
}

TEST_CASE("sign convention: speed is negative when the reaction integral is positive") {
    // int_0^1 u(u-a)(1-u) du = 1/12 - a/6
    for (double us : {0.2, 1.0 / 3.0, 0.45}) {
        const double integral = 1.0 / 12.0 - us / 6.0;
        CHECK(integral > 0.0);
        CHECK(natural_speed(make_weed_model(us)) < 0.0);
    }
}

TEST_CASE("natural speed runs quickly") {
    const auto t0 = std::chrono::steady_clock::now();
    natural_speed(make_weed_model(1.0 / 3.0));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 5.0);
}

TEST_CASE("natural speed requires bistability") {
    CHECK_THROWS_AS(natural_speed(make_logistic_model(1.0)), Error);
}

TEST_CASE("heteroclinic joins the manifolds at u*") {
    const auto s = make_weed_model(1.0 / 3.0);
    const double c = natural_speed(s);
    const auto h = heteroclinic(s, c);
    REQUIRE(h.junctions.size() == 1);
    const std::size_t j = h.junctions[0];
    CHECK(std::abs(h.p[j] - h.p[j - 1]) <= 1e-8);
    for (std::size_t i = 0; i < h.size(); ++i)
        CHECK(std::abs(h.p[i] - h.u[i] * (1 - h.u[i]) / std::sqrt(2.0)) <= 1e-3);
}

TEST_CASE("modified speed") {
    const auto s = make_weed_model(1.0 / 3.0);
    const double cs = natural_speed(s);
    CHECK(std::abs(modified_speed(s, s.f) - cs) <= 1e-9);

    // f - beta_max/2 is not zero at u = 1, so it is rejected as a substitute.
    auto half = [s](double u) { return s.f(u) - 0.5 * s.beta_max(u); };
    CHECK_THROWS_AS(modified_speed(s, half), Error);

    auto low = [s](double u) { return std::abs(u - 0.7) < 1e-3 ? s.f(u) - 2.0 * s.beta_max(u) : s.f(u); };
    try {
        modified_speed(s, low);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::invalid_substitute);
    }

    // Independent gap oracle: speed of the substitute lies where its gap changes sign.
    for (double factor : {0.5, 0.1}) {
        const auto fh = scaled_substitute(s, factor);
        const double ch = modified_speed(s, fh);
        CHECK(ch > cs);
        const auto sub = with_reaction(s, fh);
        CHECK(manifold_gap(sub, ch - 1e-6) < 0.0);
        CHECK(manifold_gap(sub, ch + 1e-6) > 0.0);
    }
    CHECK(modified_speed(s, scaled_substitute(s, 0.1)) > 0.0);
}
