#include "travwave/pmp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "travwave/control.hpp"
#include "travwave/error.hpp"
#include "travwave/ode.hpp"
#include "travwave/parallel.hpp"
#include "travwave/speed.hpp"

namespace travwave {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

// d/dU of the adjoint expression -L_beta along a solution of the coupled system.
double beta_slope(const ModelSpec& spec, double U, double P, double b) {
    b = std::max(b, 0.0);
    const double bm = spec.beta_max(U);
    const double lbb = spec.L_betabeta(U, b);
    // Trial stages may step slightly below zero before the event is located,
    // where the slope is frozen at its value for beta = 0.
    if (!(b < bm)) return kNaN;
    if (!(lbb > 0.0))
        throw Error(ErrorKind::convexity_violation, "L_betabeta = " + num(lbb) + " at (" + num(U) + ", " + num(b) + ")");
    const double P2 = P * P;
    const double bracket =
        (b - spec.f(U)) / P2 * spec.L_beta(U, b) - spec.L(U, b) / P2 - spec.L_ubeta(U, b);
    return bracket / lbb;
}

// Gauss-Legendre 3-point rule on [a, b]; avoids the endpoints where P may vanish.
template <class G>
double gauss3(const G& g, double a, double b) {
    const double m = 0.5 * (a + b), r = 0.5 * (b - a);
    const double x = std::sqrt(0.6);
    return r * (5.0 / 9.0 * g(m - r * x) + 8.0 / 9.0 * g(m) + 5.0 / 9.0 * g(m + r * x));
}

// Adjoint outside the control support: dY/dU = -f/P^2 Y started from y0 at
// node `from`, walking towards `to` (exclusive of `from`). Nodes with P = 0
// are the saddle points where Y vanishes.
void propagate_adjoint(const ModelSpec& spec, PhaseTrajectory& t, std::size_t from, std::size_t to, int step) {
    double log_ratio = 0.0;
    const double y0 = t.y[from];
    std::size_t prev = from;
    for (std::size_t i = from + step; i != to + step; i += step) {
        const double a = std::min(t.u[prev], t.u[i]), b = std::max(t.u[prev], t.u[i]);
        if (b > a) {
            const double I = gauss3(
                [&](double U) {
                    const double P = t.p_at(U);
                    return -spec.f(U) / (P * P);
                },
                a, b);
            log_ratio += step > 0 ? I : -I;
        }
        t.y[i] = (t.p[i] <= 0.0 || !std::isfinite(log_ratio)) ? 0.0 : y0 * std::exp(log_ratio);
        prev = i;
    }
}

OptimalProfile trivial_profile(const ModelSpec& spec, double c, double c_star, const PhaseSettings& phase) {
    OptimalProfile out;
    out.c = c;
    out.c_star = c_star;
    out.u1 = out.u2 = spec.u_star;
    out.trajectory = heteroclinic(spec, c_star, phase);
    out.trajectory.beta.assign(out.trajectory.size(), 0.0);
    out.trajectory.dbeta.assign(out.trajectory.size(), 0.0);
    out.trajectory.y.assign(out.trajectory.size(), 0.0);
    out.diagnostics.converged = true;
    out.diagnostics.trivial = true;
    return out;
}

}  // namespace

const char* to_string(ShotOutcome outcome) {
    switch (outcome) {
        case ShotOutcome::hit: return "hit";
        case ShotOutcome::beta_exhausted: return "beta-exhausted";
        case ShotOutcome::p_zero: return "p-zero";
        case ShotOutcome::saturated: return "saturated";
        case ShotOutcome::left_domain: return "left-domain";
    }
    return "unknown";
}

ManifoldPair manifolds_at(const ModelSpec& spec, double c, const PhaseSettings& settings) {
    ManifoldPair m;
    m.c = c;
    m.flat = unstable_manifold(spec, c, nullptr, 1.0, settings);
    m.sharp = stable_manifold(spec, c, 0.0, settings);
    return m;
}

ShotResult shoot_from(const ModelSpec& spec, const ManifoldPair& m, double u1, const PmpSettings& settings) {
    if (!m.flat.covers(u1) || !(u1 > 0.0 && u1 < 1.0))
        throw Error(ErrorKind::invalid_parameter, "u1 = " + num(u1) + " lies outside the unstable manifold");
    const double c = m.c;
    const double p_floor = settings.phase.p_floor;
    const auto& sharp = m.sharp;
    auto rhs = [&](double U, const ode::State<2>& s) -> ode::State<2> {
        const double P = s[0], b = s[1];
        return {-c + (b - spec.f(U)) / P, beta_slope(spec, U, P, b)};
    };
    std::vector<ode::Event<2>> events{
        {[&sharp](double U, const ode::State<2>& s) { return s[0] - p_or_zero(sharp, U); }, +1},
        {[](double, const ode::State<2>& s) { return s[1]; }, -1},
        {[p_floor](double, const ode::State<2>& s) { return s[0] - p_floor; }, -1},
        {[&spec](double U, const ode::State<2>& s) { return spec.beta_max(U) - s[1] - 1e-12; }, -1},
    };
    ode::Options opt;
    opt.rtol = settings.shot_rtol;
    opt.atol = settings.shot_atol;
    opt.max_step = settings.phase.max_step;
    const ode::State<2> y0{m.flat.p_at(u1), settings.beta_start};
    const auto sol = ode::integrate<2>(rhs, u1, y0, 1.0, events, opt);

    ShotResult r;
    r.u1 = u1;
    r.arc.c = c;
    r.arc.kind = TrajectoryKind::controlled;
    for (std::size_t i = 0; i < sol.t.size(); ++i) {
        r.arc.u.push_back(sol.t[i]);
        r.arc.p.push_back(sol.y[i][0]);
        r.arc.dp.push_back(sol.dy[i][0]);
        r.arc.beta.push_back(sol.y[i][1]);
        r.arc.dbeta.push_back(sol.dy[i][1]);
    }
    r.u_end = sol.t.back();
    r.beta_end = sol.y.back()[1];
    r.arc.end_u = r.u_end;
    const double P_end = sol.y.back()[0];
    if (sol.outcome == ode::Outcome::event) {
        r.arc.end = EndReason::event;
        switch (sol.event_index) {
            case 0:
                r.outcome = ShotOutcome::hit;
                r.phi = r.beta_end;
                break;
            case 1:
                r.outcome = ShotOutcome::beta_exhausted;
                r.phi = -(p_or_zero(sharp, r.u_end) - P_end);
                break;
            case 2:
                r.outcome = ShotOutcome::p_zero;
                r.arc.end = EndReason::p_zero;
                r.phi = -p_or_zero(sharp, r.u_end);
                break;
            default:
                r.outcome = ShotOutcome::saturated;
                r.phi = r.beta_end;
                break;
        }
    } else if (sol.outcome == ode::Outcome::reached_end) {
        r.outcome = ShotOutcome::left_domain;
        r.phi = r.beta_end;
    } else {
        // The solver stalled; the control is pinned against its upper bound or P collapsed.
        r.outcome = P_end <= 10 * p_floor ? ShotOutcome::p_zero : ShotOutcome::saturated;
        r.phi = r.outcome == ShotOutcome::p_zero ? -p_or_zero(sharp, r.u_end) : r.beta_end;
    }
    return r;
}

ShotResult shoot_from(const ModelSpec& spec, double c, double u1, const PmpSettings& settings) {
    return shoot_from(spec, manifolds_at(spec, c, settings.phase), u1, settings);
}

namespace {

double scan_begin(const ModelSpec& spec) { return spec.control_above_u_star_only ? spec.u_star : 0.0; }
double scan_end(const ManifoldPair& m) { return std::min(m.flat.u_back(), 1.0) - 1e-9; }

std::vector<ShotResult> scan_shots(const ModelSpec& spec, const ManifoldPair& m, const PmpSettings& settings) {
    std::vector<ShotResult> scan;
    for (int k = 1;; ++k) {
        const double u1 = scan_begin(spec) + k * settings.scan_step;
        if (u1 >= scan_end(m)) break;
        scan.push_back(shoot_from(spec, m, u1, settings));
    }
    return scan;
}

}  // namespace

std::vector<std::pair<double, double>> phi_scan(const ModelSpec& spec, double c, const PmpSettings& settings) {
    std::vector<std::pair<double, double>> table;
    for (const auto& r : scan_shots(spec, manifolds_at(spec, c, settings.phase), settings)) table.emplace_back(r.u1, r.phi);
    return table;
}

OptimalProfile optimal_profile(const ModelSpec& spec, double c, double tol, const PmpSettings& settings) {
    const double c_star = settings.c_star ? *settings.c_star : natural_speed(spec, 1e-10, settings.phase);
    if (c <= c_star + settings.speed_guard) return trivial_profile(spec, c, c_star, settings.phase);

    const auto m = manifolds_at(spec, c, settings.phase);
    OptimalProfile out;
    out.c = c;
    out.c_star = c_star;
    auto& diag = out.diagnostics;

    const double u_lo = scan_begin(spec);
    const double u_hi = scan_end(m);
    const auto scan = scan_shots(spec, m, settings);
    for (const auto& r : scan) diag.phi_table.emplace_back(r.u1, r.phi);
    diag.shots = static_cast<int>(scan.size());

    auto sign = [](double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); };
    std::vector<std::pair<ShotResult, ShotResult>> brackets;
    for (std::size_t i = 0; i + 1 < scan.size(); ++i) {
        const int s0 = sign(scan[i].phi), s1 = sign(scan[i + 1].phi);
        if (s0 != 0 && s1 != 0 && s0 != s1) brackets.emplace_back(scan[i], scan[i + 1]);
    }
    if (brackets.empty()) {
        std::ostringstream os;
        os << "shooting function has no sign change on [" << u_lo << ", " << u_hi << "] at c = " << c << "; u1,phi:";
        for (std::size_t i = 0; i < diag.phi_table.size(); i += std::max<std::size_t>(1, diag.phi_table.size() / 20))
            os << " " << diag.phi_table[i].first << "," << diag.phi_table[i].second;
        throw Error(ErrorKind::no_solution, os.str());
    }

    // Terminal mismatch of a shot: beta(u2) on a hit, the gap to P_sharp when
    // the control dies out. The trajectory meets P_sharp tangentially at the
    // root, so beta(u2) decays only like the square root of the u1 error and
    // the exhausted side usually ends up closer.
    auto mismatch = [&m](const ShotResult& r) {
        if (r.outcome == ShotOutcome::hit) return std::abs(r.beta_end);
        if (r.outcome == ShotOutcome::beta_exhausted) return std::abs(p_or_zero(m.sharp, r.u_end) - r.arc.p.back());
        return std::numeric_limits<double>::infinity();
    };
    std::vector<ShotResult> solved;
    std::vector<double> widths;
    for (auto [lo, hi] : brackets) {
        const int s_lo = sign(lo.phi);
        auto best = [&] { return std::min(mismatch(lo), mismatch(hi)); };
        for (int it = 0; it < 200 && (hi.u1 - lo.u1 > tol || best() > 1e-10); ++it) {
            const double u_mid = 0.5 * (lo.u1 + hi.u1);
            if (u_mid <= lo.u1 || u_mid >= hi.u1) break;
            auto mid = shoot_from(spec, m, u_mid, settings);
            ++diag.shots;
            if (sign(mid.phi) == s_lo) lo = std::move(mid);
            else hi = std::move(mid);
        }
        diag.roots.push_back(0.5 * (lo.u1 + hi.u1));
        widths.push_back(hi.u1 - lo.u1);
        solved.push_back(mismatch(lo) <= mismatch(hi) ? lo : hi);
    }
    ShotResult& shot = solved.front();
    if (!std::isfinite(mismatch(shot)))
        throw Error(ErrorKind::nonconvergence, "no shot near u1 = " + num(shot.u1) + " reaches the stable manifold (" +
                                                   to_string(shot.outcome) + ")");
    diag.bracket = widths.front();
    diag.phi = shot.phi;
    diag.converged = mismatch(shot) <= 1e-8;
    shot.arc.beta.back() = std::max(shot.arc.beta.back(), 0.0);

    out.u1 = shot.u1;
    out.u2 = shot.u_end;
    auto left = restrict_to(m.flat, 0.0, out.u1);
    auto right = restrict_to(m.sharp, out.u2, 1.0);
    // Both ends agree to within the terminal mismatch.
    right.p.front() = shot.arc.p.back();
    out.trajectory = concatenate({left, shot.arc, right});
    out.trajectory.c = c;
    out.arc_begin = left.size();
    out.arc_end = out.arc_begin + shot.arc.size();

    auto& t = out.trajectory;
    t.y.assign(t.size(), 0.0);
    for (std::size_t i = out.arc_begin; i < out.arc_end; ++i) t.y[i] = -spec.L_beta(t.u[i], t.beta[i]);
    if (out.arc_begin > 0) {
        t.y[out.arc_begin - 1] = t.y[out.arc_begin];
        if (out.arc_begin > 1) propagate_adjoint(spec, t, out.arc_begin - 1, 0, -1);
    }
    if (out.arc_end < t.size()) {
        t.y[out.arc_end] = t.y[out.arc_end - 1];
        if (out.arc_end + 1 < t.size()) propagate_adjoint(spec, t, out.arc_end, t.size() - 1, +1);
    }
    out.cost = cost_of(spec, shot.arc);
    return out;
}

PmpResidual pmp_residual(const OptimalProfile& profile, const ModelSpec& spec) {
    PmpResidual r;
    const auto& t = profile.trajectory;
    if (t.empty()) return r;

    // Adjoint identity d/dU L_beta = ((beta - f)/P^2) L_beta - L/P^2 at segment
    // midpoints, with the derivative of the cubic interpolant of L_beta.
    auto lb_node = [&](std::size_t i) { return spec.L_beta(t.u[i], t.beta[i]); };
    auto dlb_node = [&](std::size_t i) {
        return spec.L_ubeta(t.u[i], t.beta[i]) + spec.L_betabeta(t.u[i], t.beta[i]) * t.dbeta[i];
    };
    for (std::size_t i = profile.arc_begin; i + 1 < profile.arc_end; ++i) {
        const double h = t.u[i + 1] - t.u[i];
        if (h <= 0.0 || !(t.beta[i] > 0.0) || !(t.beta[i + 1] > 0.0)) continue;
        const double U = t.u[i] + 0.5 * h;
        const double l0 = lb_node(i), l1 = lb_node(i + 1);
        const double slope = 1.5 * (l1 - l0) / h - 0.25 * (dlb_node(i) + dlb_node(i + 1));
        const double P = t.p_at(U), b = t.beta_at(U);
        const double rhs = (b - spec.f(U)) / (P * P) * spec.L_beta(U, b) - spec.L(U, b) / (P * P);
        r.adjoint = std::max(r.adjoint, std::abs(slope - rhs));
    }

    // Pointwise minimality of beta Y + L(U, beta) over admissible controls.
    if (!t.y.empty() && !t.beta.empty()) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double U = t.u[i], Y = t.y[i], b = t.beta[i];
            if (!std::isfinite(Y)) continue;
            const double bm = spec.beta_max(U);
            auto value = [&](double x) { return x * Y + spec.L(U, x); };
            const double own = value(b);
            double best = value(0.0);
            if (bm > 0.0) {
                // Exact minimiser from the monotone first-order condition.
                double hi = std::isfinite(bm) ? bm : std::max(1.0, 2.0 * b);
                if (!std::isfinite(bm))
                    while (spec.L_beta(U, hi) + Y < 0.0 && hi < 1e12) hi *= 2.0;
                if (spec.L_beta(U, 0.0) + Y < 0.0) {
                    double lo = 0.0;
                    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
                        const double mid = 0.5 * (lo + hi);
                        if (spec.L_beta(U, mid) + Y < 0.0) lo = mid;
                        else hi = mid;
                    }
                    best = std::min(best, value(lo));
                }
                const double top = std::isfinite(bm) ? bm * (1.0 - 1e-6) : hi;
                for (int k = 1; k <= 64; ++k) best = std::min(best, value(top * k / 64.0));
            }
            const double gain = own - best;
            if (gain > 1e-8) {
                ++r.pointwise_failures;
                r.pointwise_worst = std::max(r.pointwise_worst, gain);
            }
        }
    }

    if (profile.arc_end > profile.arc_begin && !t.y.empty()) {
        const std::size_t a = profile.arc_begin, b = profile.arc_end - 1;
        r.boundary = std::max(std::abs(t.y[a] + spec.L_beta(t.u[a], 0.0)), std::abs(t.y[b] + spec.L_beta(t.u[b], 0.0)));
    }
    return r;
}

std::vector<EffortRow> effort_curve(const ModelSpec& spec, std::vector<double> c_grid, double tol,
                                    const PmpSettings& settings) {
    std::sort(c_grid.begin(), c_grid.end());
    PmpSettings shared = settings;
    if (!shared.c_star) shared.c_star = natural_speed(spec, 1e-10, settings.phase);
    std::vector<EffortRow> rows(c_grid.size());
    parallel_for(c_grid.size(), [&](std::size_t i) {
        EffortRow& row = rows[i];
        row.c = c_grid[i];
        try {
            const auto prof = optimal_profile(spec, row.c, tol, shared);
            row.effort = prof.cost;
            row.u1 = prof.u1;
            row.u2 = prof.u2;
            row.ok = prof.diagnostics.converged;
            if (!row.ok) row.message = "shooting did not converge";
        } catch (const Error& e) {
            row.effort = kNaN;
            row.message = e.what();
        }
    });
    return rows;
}

}  // namespace travwave
