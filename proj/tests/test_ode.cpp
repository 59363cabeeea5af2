#include <cmath>
#include <limits>

#include "doctest.h"
#include "travwave/ode.hpp"

using namespace travwave;

TEST_CASE("exponential decay is integrated to tolerance") {
    auto rhs = [](double, const ode::State<1>& y) { return ode::State<1>{-y[0]}; };
    auto sol = ode::integrate<1>(rhs, 0.0, {1.0}, 5.0);
    CHECK(sol.outcome == ode::Outcome::reached_end);
    CHECK(sol.t.back() == 5.0);
    CHECK(sol.y.back()[0] == doctest::Approx(std::exp(-5.0)).epsilon(1e-9));
}

TEST_CASE("harmonic oscillator backwards in time") {
    auto rhs = [](double, const ode::State<2>& y) { return ode::State<2>{y[1], -y[0]}; };
    auto sol = ode::integrate<2>(rhs, 0.0, {0.0, 1.0}, -3.0);
    CHECK(sol.t.back() == -3.0);
    CHECK(sol.y.back()[0] == doctest::Approx(std::sin(-3.0)).epsilon(1e-9));
    CHECK(sol.y.back()[1] == doctest::Approx(std::cos(-3.0)).epsilon(1e-9));
    for (std::size_t i = 1; i < sol.t.size(); ++i) CHECK(sol.t[i] < sol.t[i - 1]);
}

TEST_CASE("event is located on the dense output") {
    auto rhs = [](double, const ode::State<1>& y) { return ode::State<1>{-y[0]}; };
    std::vector<ode::Event<1>> ev{{[](double, const ode::State<1>& y) { return y[0] - 0.5; }, -1}};
    auto sol = ode::integrate<1>(rhs, 0.0, {1.0}, 10.0, ev);
    REQUIRE(sol.outcome == ode::Outcome::event);
    CHECK(sol.event_index == 0);
    CHECK(sol.t.back() == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    CHECK(sol.y.back()[0] == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("event direction filter skips crossings of the wrong sense") {
    auto rhs = [](double, const ode::State<2>& y) { return ode::State<2>{y[1], -y[0]}; };
    // sin t first crosses 0.5 upward near pi/6, downward near 5pi/6.
    std::vector<ode::Event<2>> ev{{[](double, const ode::State<2>& y) { return y[0] - 0.5; }, -1}};
    auto sol = ode::integrate<2>(rhs, 0.0, {0.0, 1.0}, 10.0, ev);
    REQUIRE(sol.outcome == ode::Outcome::event);
    CHECK(sol.t.back() == doctest::Approx(5.0 * M_PI / 6.0).epsilon(1e-9));
}

TEST_CASE("non-finite right-hand side ends in a singular outcome near the blow-up") {
    // y' = y^2 blows up at t = 1 for y(0) = 1.
    auto rhs = [](double, const ode::State<1>& y) { return ode::State<1>{y[0] * y[0]}; };
    auto sol = ode::integrate<1>(rhs, 0.0, {1.0}, 2.0);
    CHECK(sol.outcome == ode::Outcome::singular);
    CHECK(sol.t.back() == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("FSAL derivative matches the right-hand side at every node") {
    auto rhs = [](double t, const ode::State<1>& y) { return ode::State<1>{std::cos(t) * y[0]}; };
    auto sol = ode::integrate<1>(rhs, 0.0, {1.0}, 4.0);
    for (std::size_t i = 0; i < sol.t.size(); ++i)
        CHECK(sol.dy[i][0] == doctest::Approx(rhs(sol.t[i], sol.y[i])[0]).epsilon(1e-12));
    CHECK(sol.y.back()[0] == doctest::Approx(std::exp(std::sin(4.0))).epsilon(1e-9));
}
