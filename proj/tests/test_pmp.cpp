#include <array>
#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "travwave/control.hpp"
#include "travwave/error.hpp"
#include "travwave/pmp.hpp"
#include "travwave/speed.hpp"

using namespace travwave;

namespace {

const ModelSpec& weed() {
    static const ModelSpec s = make_weed_model(1.0 / 3.0);
    return s;
}

const OptimalProfile& profile_01() {
    static const OptimalProfile p = optimal_profile(weed(), -0.1);
    return p;
}

// Fixed-step RK4 on the coupled (P, beta) system with the cost appended as a
// third component; independent of the adaptive solver used by the library.
std::array<double, 3> rk4_shot(const ModelSpec& s, double c, double u1, double p1, double u2, int steps) {
    auto rhs = [&](double U, const std::array<double, 3>& y) {
        const double P = y[0], b = std::max(y[1], 0.0);
        const double P2 = P * P;
        const double db = ((b - s.f(U)) / P2 * s.L_beta(U, b) - s.L(U, b) / P2 - s.L_ubeta(U, b)) / s.L_betabeta(U, b);
        return std::array<double, 3>{-c + (b - s.f(U)) / P, db, s.L(U, b) / P};
    };
    std::array<double, 3> y{p1, 0.0, 0.0};
    const double h = (u2 - u1) / steps;
    for (int i = 0; i < steps; ++i) {
        const double U = u1 + i * h;
        auto add = [&](const std::array<double, 3>& k, double w) {
            return std::array<double, 3>{y[0] + w * k[0], y[1] + w * k[1], y[2] + w * k[2]};
        };
        const auto k1 = rhs(U, y);
        const auto k2 = rhs(U + h / 2, add(k1, h / 2));
        const auto k3 = rhs(U + h / 2, add(k2, h / 2));
        const auto k4 = rhs(U + h, add(k3, h));
        for (int j = 0; j < 3; ++j) y[j] += h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    }
    return y;
}

}  // namespace

TEST_CASE("shooting function changes sign across the root") {
    const auto& p = profile_01();
    const auto m = manifolds_at(weed(), -0.1);
    const auto below = shoot_from(weed(), m, p.u1 - 1e-3);
    const auto above = shoot_from(weed(), m, p.u1 + 1e-3);
    CHECK(below.outcome == ShotOutcome::hit);
    CHECK(below.phi > 0.0);
    CHECK(above.outcome == ShotOutcome::beta_exhausted);
    CHECK(above.phi < 0.0);
    // the scan table agrees with the bracket
    int changes = 0;
    const auto& tab = p.diagnostics.phi_table;
    for (std::size_t i = 0; i + 1 < tab.size(); ++i)
        if ((tab[i].second > 0) != (tab[i + 1].second > 0)) ++changes;
    CHECK(changes == 1);
    CHECK(p.diagnostics.roots.size() == 1);
}

TEST_CASE("a start where the control decreases immediately exhausts it") {
    const auto m = manifolds_at(weed(), -0.1);
    const auto r = shoot_from(weed(), m, 0.62);
    CHECK(r.outcome == ShotOutcome::beta_exhausted);
    CHECK(r.phi < 0.0);
    CHECK(r.arc.dbeta.front() < 0.0);
}

TEST_CASE("optimal profile at c = -0.1") {
    const auto& s = weed();
    const auto& p = profile_01();
    const auto& t = p.trajectory;
    REQUIRE(p.diagnostics.converged);
    CHECK(s.u_star < p.u1);
    CHECK(p.u1 < p.u2);
    CHECK(p.u2 < 1.0);
    CHECK(t.u.front() == 0.0);
    CHECK(t.u.back() == 1.0);

    // boundary conditions of the control
    CHECK(std::abs(t.beta[p.arc_begin]) <= 1e-6);
    CHECK(std::abs(t.beta[p.arc_end - 1]) <= 1e-6);
    for (std::size_t i = p.arc_begin + 1; i + 1 < p.arc_end; ++i) CHECK(t.beta[i] > 0.0);
    for (std::size_t i = 0; i < p.arc_begin; ++i) CHECK(t.beta[i] == 0.0);
    for (std::size_t i = p.arc_end; i < t.size(); ++i) CHECK(t.beta[i] == 0.0);

    // P continuous across u1 and u2 and equal to the manifolds there
    const auto m = manifolds_at(s, -0.1);
    for (std::size_t j : t.junctions) CHECK(std::abs(t.p[j] - t.p[j - 1]) <= 1e-8);
    CHECK(std::abs(t.p[p.arc_begin] - m.flat.p_at(p.u1)) <= 1e-8);
    CHECK(std::abs(t.p[p.arc_end - 1] - m.sharp.p_at(p.u2)) <= 1e-8);

    // adjoint on the support and the optimality boundary conditions
    for (std::size_t i = p.arc_begin; i < p.arc_end; ++i)
        CHECK(std::abs(t.y[i] + s.L_beta(t.u[i], t.beta[i])) <= 1e-6);
    CHECK(std::abs(t.y[p.arc_begin] + s.L_beta(p.u1, 0.0)) <= 1e-5);
    CHECK(std::abs(t.y[p.arc_end - 1] + s.L_beta(p.u2, 0.0)) <= 1e-5);
    CHECK(t.y.front() == 0.0);
    CHECK(t.y.back() == 0.0);

    CHECK(chart_residual(s, t) <= 1e-5);
}

TEST_CASE("optimal profile against an independent fixed-step shot") {
    const auto& s = weed();
    const auto& p = profile_01();
    const auto m = manifolds_at(s, -0.1);
    const auto y = rk4_shot(s, -0.1, p.u1, m.flat.p_at(p.u1), p.u2, 40000);
    CHECK(std::abs(y[0] - m.sharp.p_at(p.u2)) <= 1e-6);
    CHECK(std::abs(y[1]) <= 1e-5);
    CHECK(y[2] == doctest::Approx(p.cost).epsilon(1e-6));
    // values frozen from the oracle above
    CHECK(p.u1 == doctest::Approx(0.4448829344).epsilon(1e-8));
    CHECK(p.u2 == doctest::Approx(0.8835906831).epsilon(1e-8));
    CHECK(p.cost == doctest::Approx(1.0848578308).epsilon(1e-7));
}

TEST_CASE("necessary-condition residuals") {
    const auto& s = weed();
    const auto& p = profile_01();
    const auto r = pmp_residual(p, s);
    CHECK(r.adjoint <= 1e-5);
    CHECK(r.pointwise_failures == 0);
    CHECK(r.boundary <= 1e-5);

    // a perturbed control value is no longer the pointwise minimiser
    auto q = p;
    const std::size_t mid = (p.arc_begin + p.arc_end) / 2;
    q.trajectory.beta[mid] += 1e-3;
    const auto rq = pmp_residual(q, s);
    CHECK(rq.pointwise_failures > r.pointwise_failures);
    CHECK(rq.pointwise_worst > 1e-8);
}

TEST_CASE("natural speed gives the trivial profile") {
    const auto& s = weed();
    const double cs = natural_speed(s);
    const auto p = optimal_profile(s, cs);
    CHECK(p.cost == 0.0);
    CHECK(p.diagnostics.trivial);
    CHECK(p.u1 == p.u2);
    const auto r = pmp_residual(p, s);
    CHECK(r.adjoint == 0.0);
    CHECK(r.pointwise_failures == 0);
}

TEST_CASE("effort curve is nondecreasing from the natural speed") {
    const auto& s = weed();
    const double cs = natural_speed(s);
    std::vector<double> grid;
    for (int k = 0; k <= 12; ++k) grid.push_back(cs + (0.1 - cs) * k / 12.0);
    const auto rows = effort_curve(s, grid);
    REQUIRE(rows.size() == grid.size());
    CHECK(rows.front().effort <= 1e-6);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].ok);
        if (i > 0) {
            CHECK(rows[i].c > rows[i - 1].c);
            CHECK(rows[i].effort >= rows[i - 1].effort);
        }
    }
    // rows do not depend on their neighbours
    auto thinned = grid;
    thinned.erase(thinned.begin() + 5);
    const auto rows2 = effort_curve(s, thinned);
    for (std::size_t i = 0; i < rows2.size(); ++i) {
        const auto& ref = rows[i < 5 ? i : i + 1];
        CHECK(rows2[i].c == ref.c);
        CHECK(rows2[i].effort == ref.effort);
    }
}

TEST_CASE("effort curve input order and thread cap do not matter") {
    const auto& s = weed();
    setenv("TRAVWAVE_THREADS", "1", 1);
    const auto serial = effort_curve(s, {0.0, -0.2, -0.1});
    setenv("TRAVWAVE_THREADS", "3", 1);
    const auto threaded = effort_curve(s, {-0.1, 0.0, -0.2});
    unsetenv("TRAVWAVE_THREADS");
    REQUIRE(serial.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(serial[i].c == threaded[i].c);
        CHECK(serial[i].effort == threaded[i].effort);
    }
    CHECK(serial[0].c == -0.2);
}

TEST_CASE("optimal cost never exceeds the concatenated construction") {
    const auto& s = weed();
    const auto fh = scaled_substitute(s, 0.1);
    for (double c : {-0.2, -0.15, -0.1, -0.05, 0.0}) {
        const auto opt = optimal_profile(s, c);
        const auto con = finite_cost_control(s, c, std::nullopt, fh);
        CHECK(opt.cost <= con.cost);
    }
}

TEST_CASE("effort is stable under tolerance refinement") {
    const auto& s = weed();
    PmpSettings fine;
    fine.shot_rtol = 5e-11;
    fine.shot_atol = 5e-14;
    fine.phase.rtol = 5e-11;
    fine.phase.atol = 5e-13;
    for (double c : {-0.2, -0.1, 0.0}) {
        const double a = optimal_profile(s, c).cost;
        const double b = optimal_profile(s, c, 1e-10, fine).cost;
        CHECK(std::abs(a - b) <= 1e-5 * a);
    }
}

TEST_CASE("nonconvex effort is rejected") {
    auto s = weed();
    s.L_betabeta = [](double, double) { return -1.0; };
    CHECK_THROWS_AS(shoot_from(s, -0.1, 0.45), Error);
    try {
        shoot_from(s, -0.1, 0.45);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::convexity_violation);
    }
}
