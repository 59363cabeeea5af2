#include "travwave/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "travwave/error.hpp"
#include "travwave/ode.hpp"
#include "travwave/speed.hpp"

namespace travwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

struct AxisOrbit {
    bool reached_one = false;
    double u_switch = 0.0;
    double p_switch = 0.0;
    bool switched = false;
};

// Orbit of U' = P, P' = -c P - f(U) from (a, 0). With p_switch > 0 it stops
// once P reaches that value.
AxisOrbit orbit_from_axis(const ScalarFn& f, double c, double a, double p_switch) {
    auto rhs = [&](double, const ode::State<2>& s) { return ode::State<2>{s[1], -c * s[1] - f(s[0])}; };
    std::vector<ode::Event<2>> events{
        {[](double, const ode::State<2>& s) { return s[0] - 1.0; }, +1},
        {[](double, const ode::State<2>& s) { return s[1]; }, -1},
    };
    if (p_switch > 0.0) events.push_back({[p_switch](double, const ode::State<2>& s) { return s[1] - p_switch; }, +1});
    ode::Options opt;
    opt.rtol = 1e-11;
    opt.atol = 1e-13;
    const auto sol = ode::integrate<2>(rhs, 0.0, ode::State<2>{a, 0.0}, 1e4, events, opt);
    AxisOrbit out;
    if (sol.outcome == ode::Outcome::event) {
        out.reached_one = sol.event_index == 0;
        if (sol.event_index == 2) {
            out.switched = true;
            out.u_switch = sol.y.back()[0];
            out.p_switch = sol.y.back()[1];
        }
    }
    return out;
}

}  // namespace

CostQuadrature cost_quadrature(const ModelSpec& spec, const PhaseTrajectory& traj, double p_tol) {
    CostQuadrature q;
    if (!traj.has_beta() || traj.size() < 2) return q;
    const bool nodes = !traj.beta.empty();
    bool infinite = false;
    auto integrand = [&](double U, double P, double b) {
        if (b == 0.0) return 0.0;
        if (P <= p_tol)
            throw Error(ErrorKind::singular_cost, "control " + num(b) + " active where P = " + num(P) + " (U = " +
                                                      num(U) + ")");
        const double L = spec.L(U, b);
        if (!std::isfinite(L)) {
            infinite = true;
            return 0.0;
        }
        return L / P;
    };
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const double a = traj.u[i], b = traj.u[i + 1];
        const double h = b - a;
        if (h <= 0.0) continue;
        const double ba = nodes ? traj.beta[i] : traj.beta_at(a);
        const double bb = nodes ? traj.beta[i + 1] : traj.beta_at(b);
        const double ga = integrand(a, traj.p[i], ba);
        const double gb = integrand(b, traj.p[i + 1], bb);
        auto g = [&](double U) { return integrand(U, traj.p_at(U), traj.beta_at(U)); };
        const double gm = g(a + 0.5 * h);
        q.coarse += h / 6.0 * (ga + 4.0 * gm + gb);
        q.value += h / 12.0 * (ga + 4.0 * g(a + 0.25 * h) + 2.0 * gm + 4.0 * g(a + 0.75 * h) + gb);
    }
    if (infinite) q.value = q.coarse = kInf;
    return q;
}

double cost_of(const ModelSpec& spec, const PhaseTrajectory& traj) { return cost_quadrature(spec, traj).value; }

double bang_crossing(const ModelSpec& spec, double c, double gamma, const PhaseTrajectory& flat,
                     const PhaseTrajectory& sharp, const PhaseSettings& settings) {
    const double us = spec.u_star;
    ScalarFn beta = [gamma](double) { return gamma; };
    PhaseEvent below{[&flat](double U, double P) { return P - p_or_zero(flat, U); }, -1};
    const auto orbit = integrate_pu(spec, c, beta, us, sharp.p_at(us), 0.0, &below, settings);
    if (orbit.end == EndReason::event || orbit.end == EndReason::p_zero) return orbit.end_u;
    return -1.0;
}

BangControl bang_control(const ModelSpec& spec, double c, const BangSettings& settings) {
    BangControl out;
    out.c = c;
    out.c_star = natural_speed(spec);
    if (c < out.c_star - settings.speed_guard) {
        out.status = BangStatus::no_control_needed;
        return out;
    }
    if (c <= out.c_star + settings.speed_guard) {
        out.status = BangStatus::natural_speed;
        out.u0 = spec.u_star;
        out.trajectory = heteroclinic(spec, out.c_star, settings.phase);
        return out;
    }
    const double us = spec.u_star;
    const auto flat = unstable_manifold(spec, c, nullptr, us, settings.phase);
    const auto sharp = stable_manifold(spec, c, us, settings.phase);
    if (flat.end == EndReason::p_zero || sharp.end == EndReason::p_zero)
        throw Error(ErrorKind::construction_failure, "a manifold reaches P = 0 before u* at c = " + num(c));

    double lo = 0.0, hi = std::max(max_f(spec), 1e-6);
    while (bang_crossing(spec, c, hi, flat, sharp, settings.phase) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > settings.gamma_cap)
            throw Error(ErrorKind::cap_exceeded, "no crossing below gamma = " + num(settings.gamma_cap));
    }
    while (hi - lo > settings.gamma_tol) {
        const double mid = 0.5 * (lo + hi);
        if (bang_crossing(spec, c, mid, flat, sharp, settings.phase) < 0.0) lo = mid;
        else hi = mid;
    }
    out.gamma = hi;
    const double gamma = hi;
    ScalarFn beta = [gamma](double) { return gamma; };
    PhaseEvent below{[&flat](double U, double P) { return P - p_or_zero(flat, U); }, -1};
    auto arc = integrate_pu(spec, c, beta, us, sharp.p_at(us), 0.0, &below, settings.phase);
    if (arc.end != EndReason::event)
        throw Error(ErrorKind::construction_failure, "controlled orbit does not meet the unstable manifold");
    out.u0 = arc.end_u;
    arc.c = c;
    out.trajectory = concatenate({restrict_to(flat, 0.0, out.u0), arc, sharp});
    out.trajectory.c = c;
    return out;
}

ConcatProfile finite_cost_control(const ModelSpec& spec, double c, std::optional<double> c_prime,
                                  const ScalarFn& f_hat, const PhaseSettings& settings) {
    ConcatProfile out;
    out.c = c;
    out.c_star = natural_speed(spec, 1e-10, settings);
    out.c_hat = modified_speed(spec, f_hat, 1e-10, settings);
    out.c_prime = c_prime ? *c_prime : 0.5 * (c + out.c_hat);

    if (std::abs(c - out.c_star) <= 1e-9) {
        // No control is needed at the natural speed.
        out.trajectory = heteroclinic(spec, out.c_star, settings);
        out.pieces = {out.trajectory};
        out.u1 = out.u2 = out.u2_tilde = spec.u_star;
        out.beta_tilde = [](double) { return 0.0; };
        return out;
    }
    if (!(out.c_star < c && c < out.c_prime && out.c_prime < out.c_hat))
        throw Error(ErrorKind::invalid_parameter, "need c* < c < c' < c_hat, got c* = " + num(out.c_star) + ", c = " +
                                                      num(c) + ", c' = " + num(out.c_prime) +
                                                      ", c_hat = " + num(out.c_hat));
    const double cp = out.c_prime;
    const auto sub = with_reaction(spec, f_hat);

    // Left endpoint a of an orbit of the substitute system at speed c' that
    // reaches U = 1 with positive slope.
    double lo = 1e-6, hi = sub.u_star * (1.0 - 1e-9);
    if (!orbit_from_axis(f_hat, cp, lo, 0.0).reached_one)
        throw Error(ErrorKind::construction_failure, "orbit from (" + num(lo) + ", 0) does not reach U = 1");
    if (orbit_from_axis(f_hat, cp, hi, 0.0).reached_one) {
        lo = hi;
    } else {
        for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (orbit_from_axis(f_hat, cp, mid, 0.0).reached_one) lo = mid;
            else hi = mid;
        }
    }
    out.a_crit = lo;
    out.a = 0.5 * out.a_crit;
    const auto start = orbit_from_axis(f_hat, cp, out.a, 1e-4);
    if (!start.switched)
        throw Error(ErrorKind::construction_failure, "orbit from (" + num(out.a) + ", 0) never leaves the axis");
    auto pc = integrate_pu(sub, cp, nullptr, start.u_switch, start.p_switch, 1.0, nullptr, settings);
    if (pc.end != EndReason::reached_target)
        throw Error(ErrorKind::construction_failure, "P_{c'} orbit reaches P = 0 at U = " + num(pc.end_u));
    pc.kind = TrajectoryKind::controlled;
    out.p_cprime = pc;

    const auto flat = unstable_manifold(spec, c, nullptr, 1.0, settings);
    const auto sharp = stable_manifold(spec, c, 0.0, settings);

    auto shared_pc = std::make_shared<PhaseTrajectory>(pc);
    out.u1 = first_crossing([&](double U) { return shared_pc->p_at(U) - p_or_zero(flat, U); }, pc.u, +1);
    if (std::isnan(out.u1)) throw Error(ErrorKind::construction_failure, "P_{c'} never meets the unstable manifold");
    std::vector<double> grid;
    grid.push_back(out.u1);
    for (double U : pc.u)
        if (U > out.u1) grid.push_back(U);
    out.u2 = first_crossing([&](double U) { return shared_pc->p_at(U) - p_or_zero(sharp, U); }, grid, +1);
    if (std::isnan(out.u2)) throw Error(ErrorKind::construction_failure, "P_{c'} never meets the stable manifold");

    auto beta_max = spec.beta_max;
    const double gap_speed = cp - c;
    ScalarFn beta_tilde = [shared_pc, beta_max, gap_speed](double U) {
        if (!shared_pc->covers(U)) return 0.0;
        return std::max(beta_max(U) - gap_speed * shared_pc->p_at(U), 0.0);
    };
    out.beta_tilde = beta_tilde;

    PhaseEvent meet{[&sharp](double U, double P) { return P - p_or_zero(sharp, U); }, +1};
    auto arc = integrate_pu(spec, c, beta_tilde, out.u1, pc.p_at(out.u1), 1.0, &meet, settings);
    if (arc.end != EndReason::event)
        throw Error(ErrorKind::construction_failure, "controlled arc does not meet the stable manifold (ended " +
                                                         std::string(to_string(arc.end)) + " at U = " +
                                                         num(arc.end_u) + ")");
    out.u2_tilde = arc.end_u;
    arc.c = c;

    out.delta = kInf;
    for (double U : arc.u) out.delta = std::min(out.delta, gap_speed * pc.p_at(U));

    out.pieces = {restrict_to(flat, 0.0, out.u1), arc, restrict_to(sharp, out.u2_tilde, 1.0)};
    out.trajectory = concatenate(out.pieces);
    out.trajectory.c = c;
    out.cost = cost_of(spec, arc);
    return out;
}

}  // namespace travwave
