#include <cmath>
#include <limits>

#include "doctest.h"
#include "travwave/error.hpp"
#include "travwave/model.hpp"

using namespace travwave;

namespace {

double central(const std::function<double(double)>& g, double x, double h) { return (g(x + h) - g(x - h)) / (2 * h); }

}  // namespace

TEST_CASE("weed model values") {
    const auto s = make_weed_model(1.0 / 3.0);
    CHECK(s.f(0.5) == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
    CHECK(s.beta_max(0.5) == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
    // beta_max(1/2) = 1/12, so beta = 1/48 is a quarter of it: L = (1/48)/(1/12 - 1/48) = 1/3.
    CHECK(s.L(0.5, 1.0 / 48.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    for (double u : {0.0, 0.1, 1.0 / 3.0, 0.5, 0.9, 1.0}) CHECK(s.L(u, 0.0) == 0.0);
    CHECK(s.beta_max(0.2) == 0.0);
    CHECK(std::isinf(s.L(0.5, s.beta_max(0.5))));
    CHECK(std::isinf(s.L(0.2, 0.01)));
}

TEST_CASE("weed model half of the removable growth costs one unit") {
    // beta_max(1/2) = (1/2)(1/6) = 1/12; half of that gives L = 1/(2 - 1) = 1.
    const auto s = make_weed_model(1.0 / 3.0);
    const double half = 0.5 * s.beta_max(0.5);
    CHECK(s.L(0.5, half) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("controlled reaction is consistent with the effort density") {
    const auto s = make_weed_model(1.0 / 3.0, 2.0);
    for (double u : {0.4, 0.6, 0.85})
        for (double frac : {0.1, 0.5, 0.9}) {
            const double b = frac * s.beta_max(u);
            const double alpha = s.L(u, b);
            CHECK(s.f_controlled(u, alpha) == doctest::Approx(s.f(u) - b).epsilon(1e-12));
        }
}

TEST_CASE("weed model parameter validation") {
    CHECK_THROWS_AS(make_weed_model(0.0), Error);
    CHECK_THROWS_AS(make_weed_model(0.6), Error);
    CHECK_THROWS_AS(make_weed_model(0.3, -1.0), Error);
    try {
        make_weed_model(0.7);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::invalid_parameter);
    }
}

TEST_CASE("logistic model") {
    const auto s = make_logistic_model(1.0);
    CHECK(s.f(0.5) == doctest::Approx(0.25));
    CHECK(s.L(0.3, 0.0) == 0.0);
    CHECK(s.L(0.5, 0.2) == doctest::Approx(0.4));
    const auto rep = check_A1(s);
    CHECK_FALSE(rep.passed);
    bool found = false;
    for (const auto& cl : rep.clauses)
        if (cl.clause == "df(0) < 0") {
            found = true;
            CHECK_FALSE(cl.passed);
        }
    CHECK(found);
    CHECK_THROWS_AS(make_logistic_model(0.0), Error);
}

TEST_CASE("check_A1 on the weed model locates u*") {
    const auto rep = check_A1(make_weed_model(1.0 / 3.0));
    CHECK(rep.passed);
    CHECK(rep.interior_zero == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    REQUIRE(rep.sign_pattern.size() == 2);
    CHECK(rep.sign_pattern[0] == -1);
    CHECK(rep.sign_pattern[1] == 1);
}

TEST_CASE("check_A1 rejects f identically zero") {
    ModelSpec s = make_weed_model(1.0 / 3.0);
    s.f = [](double) { return 0.0; };
    s.df = [](double) { return 0.0; };
    const auto rep = check_A1(s);
    CHECK_FALSE(rep.passed);
}

TEST_CASE("f vanishes only at u* on a dense grid") {
    for (double us : {0.2, 1.0 / 3.0, 0.5}) {
        const auto s = make_weed_model(us);
        CHECK(std::abs(s.f(us)) <= 1e-15);
        int changes = 0;
        double prev = s.f(1e-4);
        for (int i = 2; i < 10000; ++i) {
            const double v = s.f(i * 1e-4);
            if ((prev < -1e-10 && v > 1e-10) || (prev > 1e-10 && v < -1e-10)) ++changes;
            if (std::abs(v) > 1e-10) prev = v;
        }
        CHECK(changes == 1);
    }
}

TEST_CASE("analytic partials of L agree with independent central differences") {
    const auto s = make_weed_model(1.0 / 3.0);
    const double h = 1e-6;
    for (double u : {0.4, 0.5, 0.7, 0.95}) {
        const double bm = s.beta_max(u);
        for (double frac : {0.05, 0.25, 0.5, 0.8}) {
            const double b = frac * bm;
            const double lb = central([&](double x) { return s.L(u, x); }, b, h * bm);
            CHECK(std::abs(lb - s.L_beta(u, b)) <= 1e-5 * std::abs(s.L_beta(u, b)));
            const double lbb = central([&](double x) { return s.L_beta(u, x); }, b, h * bm);
            CHECK(std::abs(lbb - s.L_betabeta(u, b)) <= 1e-5 * std::abs(s.L_betabeta(u, b)));
            const double lub = central([&](double x) { return s.L_beta(x, b); }, u, h);
            CHECK(std::abs(lub - s.L_ubeta(u, b)) <= 1e-5 * std::abs(s.L_ubeta(u, b)));
        }
    }
}

TEST_CASE("check_A2 on the weed model") {
    const auto s = make_weed_model(1.0 / 3.0);
    const auto rep = check_A2(s, {0.5}, {0.0, 1.0 / 96.0});
    CHECK(rep.passed);
    CHECK(rep.fd_discrepancy_beta <= 1e-6);

    const auto wide = check_A2(s, {0.5, 0.6, 0.8, 0.95}, {0.0, 1e-3, 5e-3, 1e-2, 2e-2, 4e-2});
    CHECK(wide.passed);
    CHECK(wide.fd_discrepancy_beta <= 1e-5);
    CHECK(wide.fd_discrepancy_betabeta <= 1e-5);
    CHECK(wide.fd_discrepancy_ubeta <= 1e-5);
    CHECK(wide.fitted_p > 1.0);
    CHECK(wide.fitted_c1 > 0.0);
}

TEST_CASE("check_A2 domain error on the finiteness boundary") {
    const auto s = make_weed_model(1.0 / 3.0);
    CHECK_THROWS_AS(check_A2(s, {0.5}, {s.beta_max(0.5)}), Error);
}

TEST_CASE("Model 2 parameters") {
    Model2Params p{1, 1, 1};
    CHECK(p.v_star() == doctest::Approx(0.5));
    Model2Params bad{1, 0, 1};
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("death-rate bound for the scaled weed model used with Model 2") {
    CHECK(satisfies_death_rate_bound(make_weed_model(1.0 / 6.0, 6.0), 1.0));
    CHECK_FALSE(satisfies_death_rate_bound(make_weed_model(1.0 / 3.0, 6.0), 1.0));
}
