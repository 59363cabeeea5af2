#include "travwave/phaseplane.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "travwave/error.hpp"
#include "travwave/ode.hpp"

namespace travwave {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

struct Hermite {
    double h, s;
    double value(double p0, double p1, double m0, double m1) const {
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * h * m0 + (-2 * s3 + 3 * s2) * p1 +
               (s3 - s2) * h * m1;
    }
    double slope(double p0, double p1, double m0, double m1) const {
        const double s2 = s * s;
        return (6 * s2 - 6 * s) / h * p0 + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) / h * p1 +
               (3 * s2 - 2 * s) * m1;
    }
};

double beta_or_zero(const ScalarFn& beta, double U) { return beta ? beta(U) : 0.0; }

void fill_beta(PhaseTrajectory& t, const ScalarFn& beta) {
    if (!beta) return;
    t.beta_fn = beta;
    t.beta.resize(t.u.size());
    t.dbeta.resize(t.u.size());
    for (std::size_t i = 0; i < t.u.size(); ++i) {
        const double U = t.u[i];
        t.beta[i] = beta(U);
        const double h = 1e-7;
        const double lo = std::max(0.0, U - h), hi = std::min(1.0, U + h);
        t.dbeta[i] = hi > lo ? (beta(hi) - beta(lo)) / (hi - lo) : 0.0;
    }
}

}  // namespace

const char* to_string(TrajectoryKind kind) {
    switch (kind) {
        case TrajectoryKind::unstable_manifold: return "unstable_manifold";
        case TrajectoryKind::stable_manifold: return "stable_manifold";
        case TrajectoryKind::controlled: return "controlled";
        case TrajectoryKind::concatenated: return "concatenated";
    }
    return "?";
}

const char* to_string(EndReason reason) {
    switch (reason) {
        case EndReason::reached_target: return "reached_target";
        case EndReason::p_zero: return "p_zero";
        case EndReason::event: return "event";
    }
    return "?";
}

std::size_t PhaseTrajectory::segment(double U) const {
    if (u.size() < 2 || U < u.front() || U > u.back())
        throw Error(ErrorKind::domain, "U = " + num(U) + " outside trajectory range [" +
                                           (u.empty() ? std::string("empty") : num(u.front()) + ", " + num(u.back())) +
                                           "]");
    auto it = std::upper_bound(u.begin(), u.end(), U);
    std::size_t i = it == u.end() ? u.size() - 2 : static_cast<std::size_t>(it - u.begin()) - 1;
    if (i >= u.size() - 1) i = u.size() - 2;
    while (i > 0 && u[i + 1] == u[i]) --i;
    while (i + 1 < u.size() - 1 && u[i + 1] == u[i]) ++i;
    return i;
}

double PhaseTrajectory::p_at(double U) const {
    if (u.size() == 1 && U == u.front()) return p.front();
    const std::size_t i = segment(U);
    const Hermite hm{u[i + 1] - u[i], (U - u[i]) / (u[i + 1] - u[i])};
    return hm.value(p[i], p[i + 1], dp[i], dp[i + 1]);
}

double PhaseTrajectory::dp_at(double U) const {
    if (u.size() == 1 && U == u.front()) return dp.front();
    const std::size_t i = segment(U);
    const Hermite hm{u[i + 1] - u[i], (U - u[i]) / (u[i + 1] - u[i])};
    return hm.slope(p[i], p[i + 1], dp[i], dp[i + 1]);
}

double PhaseTrajectory::beta_at(double U) const {
    if (beta_fn) return beta_fn(U);
    if (beta.empty()) return 0.0;
    if (u.size() == 1) return beta.front();
    const std::size_t i = segment(U);
    const Hermite hm{u[i + 1] - u[i], (U - u[i]) / (u[i + 1] - u[i])};
    return hm.value(beta[i], beta[i + 1], dbeta[i], dbeta[i + 1]);
}

double PhaseTrajectory::y_at(double U) const {
    if (y.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (u.size() == 1) return y.front();
    const std::size_t i = segment(U);
    const double s = (U - u[i]) / (u[i + 1] - u[i]);
    return (1 - s) * y[i] + s * y[i + 1];
}

std::pair<double, double> saddle_eigenvalues(const ModelSpec& spec, double c, double u_eq) {
    const double slope = spec.df(u_eq);
    if (!(slope < 0.0))
        throw Error(ErrorKind::not_a_saddle, "df(" + num(u_eq) + ") = " + num(slope) + " is not negative");
    const double disc = std::sqrt(c * c - 4.0 * slope);
    return {(-c + disc) / 2.0, (-c - disc) / 2.0};
}

PhaseTrajectory integrate_pu(const ModelSpec& spec, double c, const ScalarFn& beta, double u_from, double p_from,
                             double u_to, const PhaseEvent* event, const PhaseSettings& settings) {
    if (!(p_from > 0.0)) throw Error(ErrorKind::invalid_parameter, "integrate_pu needs p_from > 0");
    auto rhs = [&](double U, const ode::State<1>& s) -> ode::State<1> {
        return {-c + (beta_or_zero(beta, U) - spec.f(U)) / s[0]};
    };
    std::vector<ode::Event<1>> events;
    const double floor = settings.p_floor;
    events.push_back({[floor](double, const ode::State<1>& s) { return s[0] - floor; }, -1});
    if (event) {
        auto g = event->g;
        events.push_back({[g](double U, const ode::State<1>& s) { return g(U, s[0]); }, event->direction});
    }
    ode::Options opt;
    opt.rtol = settings.rtol;
    opt.atol = settings.atol;
    opt.max_step = settings.max_step;
    const auto sol = ode::integrate<1>(rhs, u_from, ode::State<1>{p_from}, u_to, events, opt);
    if (sol.outcome == ode::Outcome::singular)
        throw Error(ErrorKind::singularity, "step size underflow at U = " + num(sol.t.back()) +
                                                ", P = " + num(sol.y.back()[0]));
    if (sol.outcome == ode::Outcome::max_steps)
        throw Error(ErrorKind::nonconvergence, "step limit reached at U = " + num(sol.t.back()));

    PhaseTrajectory t;
    t.c = c;
    t.kind = TrajectoryKind::controlled;
    const std::size_t n = sol.t.size();
    t.u.resize(n);
    t.p.resize(n);
    t.dp.resize(n);
    const bool backward = u_to < u_from;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = backward ? n - 1 - k : k;
        t.u[k] = sol.t[j];
        t.p[k] = sol.y[j][0];
        t.dp[k] = sol.dy[j][0];
    }
    const double U_end = sol.t.back();
    t.end_u = U_end;
    if (sol.outcome == ode::Outcome::event && sol.event_index == 0) {
        t.end = EndReason::p_zero;
        const double drive = std::abs(beta_or_zero(beta, U_end) - spec.f(U_end));
        if (drive > 0.0) {
            const double pe = sol.y.back()[0];
            t.end_u = U_end + (backward ? -1.0 : 1.0) * pe * pe / (2.0 * drive);
        }
    } else if (sol.outcome == ode::Outcome::event) {
        t.end = EndReason::event;
    }
    fill_beta(t, beta);
    return t;
}

PhaseTrajectory unstable_manifold(const ModelSpec& spec, double c, const ScalarFn& beta, double u_stop,
                                  const PhaseSettings& settings) {
    if (!(u_stop > 0.0 && u_stop <= 1.0)) throw Error(ErrorKind::invalid_parameter, "u_stop must lie in (0,1]");
    const auto [lp, lm] = saddle_eigenvalues(spec, c, 0.0);
    (void)lm;
    const double e = settings.seed;
    PhaseTrajectory t;
    if (u_stop <= e) {
        t.u = {0.0, u_stop};
        t.p = {0.0, lp * u_stop};
        t.dp = {lp, lp};
        t.end_u = u_stop;
    } else {
        t = integrate_pu(spec, c, beta, e, lp * e, u_stop, nullptr, settings);
        t.u.insert(t.u.begin(), 0.0);
        t.p.insert(t.p.begin(), 0.0);
        t.dp.insert(t.dp.begin(), lp);
        if (!t.beta.empty()) {
            t.beta.insert(t.beta.begin(), beta_or_zero(beta, 0.0));
            t.dbeta.insert(t.dbeta.begin(), t.dbeta.front());
        }
    }
    t.c = c;
    t.kind = TrajectoryKind::unstable_manifold;
    return t;
}

PhaseTrajectory stable_manifold(const ModelSpec& spec, double c, double u_stop, const PhaseSettings& settings) {
    if (!(u_stop >= 0.0 && u_stop <= 1.0)) throw Error(ErrorKind::invalid_parameter, "u_stop must lie in [0,1]");
    const auto [lp, lm] = saddle_eigenvalues(spec, c, 1.0);
    (void)lp;
    const double e = settings.seed;
    PhaseTrajectory t;
    if (u_stop >= 1.0) {
        t.u = {1.0};
        t.p = {0.0};
        t.dp = {lm};
        t.end_u = 1.0;
    } else if (u_stop >= 1.0 - e) {
        t.u = {u_stop, 1.0};
        t.p = {-lm * (1.0 - u_stop), 0.0};
        t.dp = {lm, lm};
        t.end_u = u_stop;
    } else {
        t = integrate_pu(spec, c, nullptr, 1.0 - e, -lm * e, u_stop, nullptr, settings);
        t.u.push_back(1.0);
        t.p.push_back(0.0);
        t.dp.push_back(lm);
    }
    t.c = c;
    t.kind = TrajectoryKind::stable_manifold;
    return t;
}

PhaseTrajectory restrict_to(const PhaseTrajectory& traj, double u_lo, double u_hi) {
    if (traj.empty() || u_lo > u_hi || u_lo < traj.u.front() || u_hi > traj.u.back())
        throw Error(ErrorKind::domain, "restriction [" + num(u_lo) + ", " + num(u_hi) + "] outside trajectory");
    PhaseTrajectory out;
    out.c = traj.c;
    out.kind = traj.kind;
    out.beta_fn = traj.beta_fn;
    out.end = traj.end;
    out.end_u = traj.end_u;
    const bool with_beta = !traj.beta.empty();
    const bool with_y = !traj.y.empty();
    auto push_interp = [&](double U) {
        out.u.push_back(U);
        out.p.push_back(traj.p_at(U));
        out.dp.push_back(traj.dp_at(U));
        if (with_beta) {
            out.beta.push_back(traj.beta_at(U));
            const std::size_t i = traj.u.size() > 1 ? traj.segment(U) : 0;
            const double s = traj.u.size() > 1 ? (U - traj.u[i]) / (traj.u[i + 1] - traj.u[i]) : 0.0;
            out.dbeta.push_back(traj.u.size() > 1 ? (1 - s) * traj.dbeta[i] + s * traj.dbeta[i + 1]
                                                  : traj.dbeta.front());
        }
        if (with_y) out.y.push_back(traj.y_at(U));
    };
    auto push_node = [&](std::size_t i) {
        out.u.push_back(traj.u[i]);
        out.p.push_back(traj.p[i]);
        out.dp.push_back(traj.dp[i]);
        if (with_beta) {
            out.beta.push_back(traj.beta[i]);
            out.dbeta.push_back(traj.dbeta[i]);
        }
        if (with_y) out.y.push_back(traj.y[i]);
    };
    push_interp(u_lo);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.u[i] > u_lo && traj.u[i] < u_hi) {
            if (std::find(traj.junctions.begin(), traj.junctions.end(), i) != traj.junctions.end() &&
                out.u.size() > 1)
                out.junctions.push_back(out.u.size());
            push_node(i);
        }
    }
    if (u_hi > u_lo) push_interp(u_hi);
    if (u_hi < traj.u.back()) out.end = EndReason::reached_target, out.end_u = u_hi;
    return out;
}

PhaseTrajectory concatenate(const std::vector<PhaseTrajectory>& pieces) {
    PhaseTrajectory out;
    out.kind = TrajectoryKind::concatenated;
    if (pieces.empty()) return out;
    bool any_beta = false, any_y = false, any_fn = false;
    for (const auto& p : pieces) {
        any_beta = any_beta || p.has_beta();
        any_y = any_y || !p.y.empty();
        any_fn = any_fn || static_cast<bool>(p.beta_fn);
    }
    out.c = pieces.front().c;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        const auto& p = pieces[k];
        if (p.empty()) continue;
        if (!out.u.empty()) {
            if (std::abs(p.u.front() - out.u.back()) > 1e-12)
                throw Error(ErrorKind::invalid_trajectory, "pieces do not meet: " + num(out.u.back()) + " vs " +
                                                               num(p.u.front()));
            out.junctions.push_back(out.u.size());
        }
        for (std::size_t j : p.junctions) out.junctions.push_back(out.u.size() + j);
        out.u.insert(out.u.end(), p.u.begin(), p.u.end());
        out.p.insert(out.p.end(), p.p.begin(), p.p.end());
        out.dp.insert(out.dp.end(), p.dp.begin(), p.dp.end());
        if (any_beta) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                out.beta.push_back(p.beta.empty() ? (p.beta_fn ? p.beta_fn(p.u[i]) : 0.0) : p.beta[i]);
                out.dbeta.push_back(p.dbeta.empty() ? 0.0 : p.dbeta[i]);
            }
        }
        if (any_y) {
            for (std::size_t i = 0; i < p.size(); ++i)
                out.y.push_back(p.y.empty() ? std::numeric_limits<double>::quiet_NaN() : p.y[i]);
        }
        out.end = p.end;
        out.end_u = p.end_u;
    }
    if (any_fn) {
        auto shared = std::make_shared<std::vector<PhaseTrajectory>>(pieces);
        out.beta_fn = [shared](double U) {
            for (const auto& p : *shared) {
                if (p.empty() || U < p.u.front() || U > p.u.back()) continue;
                return p.has_beta() ? p.beta_at(U) : 0.0;
            }
            return 0.0;
        };
    }
    return out;
}

double chart_residual(const ModelSpec& spec, const PhaseTrajectory& traj, double p_min) {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const double h = traj.u[i + 1] - traj.u[i];
        if (h <= 0.0) continue;
        const double U = traj.u[i] + 0.5 * h;
        const Hermite hm{h, 0.5};
        const double P = hm.value(traj.p[i], traj.p[i + 1], traj.dp[i], traj.dp[i + 1]);
        if (P < p_min) continue;
        const double slope = hm.slope(traj.p[i], traj.p[i + 1], traj.dp[i], traj.dp[i + 1]);
        const double rhs = -traj.c + (traj.beta_at(U) - spec.f(U)) / P;
        worst = std::max(worst, std::abs(slope - rhs) / std::max(1.0, std::abs(rhs)));
    }
    return worst;
}

double first_crossing(const ScalarFn& d, const std::vector<double>& grid, int direction) {
    if (grid.empty()) return std::numeric_limits<double>::quiet_NaN();
    auto crossed = [direction](double before, double after) {
        return direction > 0 ? (before < 0.0 && after >= 0.0) : (before > 0.0 && after <= 0.0);
    };
    double prev_u = grid.front(), prev = d(prev_u);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double U = grid[i];
        if (U <= prev_u) continue;
        const double v = d(U);
        if (crossed(prev, v)) {
            double lo = prev_u, hi = U, dlo = prev;
            for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double dm = d(mid);
                if (crossed(dlo, dm)) {
                    hi = mid;
                } else {
                    lo = mid;
                    dlo = dm;
                }
            }
            return 0.5 * (lo + hi);
        }
        prev_u = U;
        prev = v;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double p_or_zero(const PhaseTrajectory& traj, double U) {
    if (traj.empty() || U < traj.u.front() || U > traj.u.back()) return 0.0;
    return traj.p_at(U);
}

double slope_bound(double c, double max_f) {
    if (std::abs(c) < 1e-4) return 1.0 + c / 2.0 + c * c / 12.0 + max_f * (0.5 + c / 12.0);
    const double q = -std::expm1(-c);
    return c / q + max_f * (1.0 / q - 1.0 / c);
}

}  // namespace travwave
