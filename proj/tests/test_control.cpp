#include <cmath>
#include <limits>

#include "doctest.h"
#include "travwave/control.hpp"
#include "travwave/error.hpp"
#include "travwave/speed.hpp"

using namespace travwave;

namespace {

double junction_jump(const PhaseTrajectory& t) {
    double worst = 0.0;
    for (std::size_t j : t.junctions) worst = std::max(worst, std::abs(t.p[j] - t.p[j - 1]));
    return worst;
}

// Independent reference: adaptive Simpson on L/P over the arc.
double adaptive_simpson(const std::function<double(double)>& g, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = g(0.5 * (a + m)), rm = g(0.5 * (m + b));
    const double left = (m - a) / 6 * (fa + 4 * lm + fm);
    const double right = (b - m) / 6 * (fm + 4 * rm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
    return adaptive_simpson(g, a, m, fa, lm, fm, left, tol / 2, depth - 1) +
           adaptive_simpson(g, m, b, fm, rm, fb, right, tol / 2, depth - 1);
}

}  // namespace

TEST_CASE("cost of an uncontrolled trajectory is zero") {
    const auto s = make_weed_model(1.0 / 3.0);
    const auto h = heteroclinic(s, natural_speed(s));
    CHECK(cost_of(s, h) == 0.0);
    auto t = h;
    t.beta.assign(t.size(), 0.0);
    t.dbeta.assign(t.size(), 0.0);
    CHECK(cost_of(s, t) == 0.0);
}

TEST_CASE("cost is infinite when the control reaches beta_max") {
    const auto s = make_weed_model(1.0 / 3.0);
    auto t = integrate_pu(s, 0.0, [&s](double U) { return s.beta_max(U); }, 0.5, 0.2, 0.6);
    CHECK(std::isinf(cost_of(s, t)));
}

TEST_CASE("cost with active control where P vanishes is singular") {
    const auto s = make_weed_model(1.0 / 3.0);
    PhaseTrajectory t;
    t.u = {0.5, 0.6};
    t.p = {0.0, 0.1};
    t.dp = {1.0, 1.0};
    t.beta = {0.01, 0.01};
    t.dbeta = {0.0, 0.0};
    CHECK_THROWS_AS(cost_of(s, t), Error);
}

TEST_CASE("bang control at c = -0.1") {
    const auto s = make_weed_model(1.0 / 3.0);
    const auto b = bang_control(s, -0.1);
    REQUIRE(b.status == BangStatus::controlled);
    CHECK(b.gamma > 0.0);
    CHECK(std::isfinite(b.gamma));
    CHECK(b.u0 > 0.0);
    CHECK(b.u0 < s.u_star);
    CHECK(junction_jump(b.trajectory) <= 1e-8);
    CHECK(b.trajectory.u.front() == 0.0);
    CHECK(b.trajectory.u.back() == 1.0);
    CHECK(b.trajectory.p.front() == 0.0);
    CHECK(b.trajectory.p.back() == 0.0);
    CHECK(chart_residual(s, b.trajectory) <= 1e-5);
    // the weed model cannot act below u*, so the bang control has infinite cost
    CHECK(std::isinf(cost_of(s, b.trajectory)));
    // slightly weaker control no longer meets P_flat
    const auto flat = unstable_manifold(s, -0.1, nullptr, s.u_star);
    const auto sharp = stable_manifold(s, -0.1, s.u_star);
    CHECK(bang_crossing(s, -0.1, b.gamma - 1e-6, flat, sharp) < 0.0);
}

TEST_CASE("bang crossing moves monotonically with gamma") {
    const auto s = make_weed_model(1.0 / 3.0);
    const double c = -0.1;
    const auto flat = unstable_manifold(s, c, nullptr, s.u_star);
    const auto sharp = stable_manifold(s, c, s.u_star);
    const auto b = bang_control(s, c);
    double prev = 0.0;
    for (double k : {1.001, 1.1, 1.5, 2.0, 4.0, 8.0}) {
        const double x = bang_crossing(s, c, k * b.gamma, flat, sharp);
        CHECK(x > prev);
        prev = x;
    }
}

TEST_CASE("bang control status at and below the natural speed") {
    const auto s = make_weed_model(1.0 / 3.0);
    const double cs = natural_speed(s);
    const auto at = bang_control(s, cs);
    CHECK(at.status == BangStatus::natural_speed);
    CHECK(at.gamma == 0.0);
    CHECK(cost_of(s, at.trajectory) == 0.0);
    const auto below = bang_control(s, cs - 0.05);
    CHECK(below.status == BangStatus::no_control_needed);
    CHECK(below.trajectory.empty());
}

TEST_CASE("finite cost construction at c = -0.1") {
    const auto s = make_weed_model(1.0 / 3.0);
    const auto fh = scaled_substitute(s, 0.1);
    const auto k = finite_cost_control(s, -0.1, std::nullopt, fh);
    CHECK(k.c_prime == doctest::Approx(0.5 * (-0.1 + k.c_hat)));
    CHECK(k.c_star < k.c);
    CHECK(k.c < k.c_prime);
    CHECK(k.c_prime < k.c_hat);
    CHECK(k.a > 0.0);
    CHECK(k.u1 < k.u2_tilde);
    CHECK(k.u2_tilde <= k.u2 + 1e-9);
    CHECK(std::isfinite(k.cost));
    CHECK(k.cost > 0.0);
    CHECK(junction_jump(k.trajectory) <= 1e-8);
    CHECK(k.trajectory.u.front() == 0.0);
    CHECK(k.trajectory.u.back() == 1.0);
    CHECK(chart_residual(s, k.trajectory) <= 1e-5);

    const auto& arc = k.pieces[1];
    // max-with-zero form of the control and the comparison with P_{c'}
    for (double U = k.u1; U <= k.u2_tilde; U += 1e-3) {
        const double excess = s.beta_max(U) - (k.c_prime - k.c) * k.p_cprime.p_at(U);
        if (excess <= 0.0) CHECK(k.beta_tilde(U) == 0.0);
        else CHECK(k.beta_tilde(U) == doctest::Approx(excess).epsilon(1e-12));
        CHECK(arc.p_at(U) >= k.p_cprime.p_at(U) - 1e-9);
        if (k.beta_tilde(U) > 0.0) CHECK(s.beta_max(U) - k.beta_tilde(U) >= k.delta - 1e-12);
    }
    CHECK(k.delta > 0.0);
    // control vanishes outside [u1, u2_tilde]
    for (double U : {0.1, 0.5 * k.u1, 0.5 * (k.u2_tilde + 1.0), 0.99})
        CHECK(k.trajectory.beta_at(U) == 0.0);

    // refined quadrature oracle
    auto g = [&](double U) { return s.L(U, k.beta_tilde(U)) / arc.p_at(U); };
    const double a = arc.u.front(), b = arc.u.back();
    const double fa = g(a), fm = g(0.5 * (a + b)), fb = g(b);
    const double ref = adaptive_simpson(g, a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), 1e-12, 40);
    CHECK(std::abs(k.cost - ref) <= 1e-6);
    const auto q = cost_quadrature(s, arc);
    CHECK(std::abs(q.value - q.coarse) <= 1e-6 * q.value);
}

TEST_CASE("finite cost construction rejects misordered speeds") {
    const auto s = make_weed_model(1.0 / 3.0);
    const auto fh = scaled_substitute(s, 0.1);
    CHECK_THROWS_AS(finite_cost_control(s, -0.1, -0.15, fh), Error);
    CHECK_THROWS_AS(finite_cost_control(s, -0.3, std::nullopt, fh), Error);
    CHECK_THROWS_AS(finite_cost_control(s, -0.1, 0.5, fh), Error);
}

TEST_CASE("finite cost construction at the natural speed is free") {
    const auto s = make_weed_model(1.0 / 3.0);
    const auto k = finite_cost_control(s, natural_speed(s), std::nullopt, scaled_substitute(s, 0.1));
    CHECK(k.cost == 0.0);
}

TEST_CASE("finite cost construction across the effort grid") {
    const auto s = make_weed_model(1.0 / 3.0);
    const auto fh = scaled_substitute(s, 0.1);
    for (double c : {-0.2, -0.15, -0.05, 0.0}) {
        const auto k = finite_cost_control(s, c, std::nullopt, fh);
        CHECK(std::isfinite(k.cost));
        CHECK(junction_jump(k.trajectory) <= 1e-8);
    }
}
