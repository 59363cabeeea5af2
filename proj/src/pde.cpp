#include "travwave/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "travwave/error.hpp"

namespace travwave {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(8);
    os << v;
    return os.str();
}

enum class System { scalar, model1, model2 };

// alpha on the nodes at time t, tabulated when the control moves in the frame.
class ControlSampler {
public:
    ControlSampler(const MovingControl& control, const std::vector<double>& x, double frame_speed, double T) {
        const std::size_t n = x.size();
        if (control.empty()) {
            fixed_.assign(n, 0.0);
            zero_ = true;
            return;
        }
        drift_ = frame_speed - control.speed;
        if (drift_ == 0.0) {
            fixed_.resize(n);
            for (std::size_t i = 0; i < n; ++i) fixed_[i] = control.alpha(x[i]);
            zero_ = std::all_of(fixed_.begin(), fixed_.end(), [](double a) { return a == 0.0; });
            return;
        }
        const double dx = n > 1 ? x[1] - x[0] : 1.0;
        step_ = dx / 8.0;
        lo_ = x.front() + std::min(0.0, drift_ * T) - dx;
        const double hi = x.back() + std::max(0.0, drift_ * T) + dx;
        const auto m = static_cast<std::size_t>(std::ceil((hi - lo_) / step_)) + 1;
        table_.resize(m);
        for (std::size_t k = 0; k < m; ++k) table_[k] = control.alpha(lo_ + static_cast<double>(k) * step_);
        x_ = x;
        current_.resize(n);
    }

    bool zero() const { return zero_; }

    const std::vector<double>& at(double t) {
        if (table_.empty()) return fixed_;
        const double shift = drift_ * t;
        for (std::size_t i = 0; i < x_.size(); ++i) {
            const double s = (x_[i] + shift - lo_) / step_;
            const auto k = static_cast<std::size_t>(std::clamp(s, 0.0, static_cast<double>(table_.size() - 2)));
            const double r = std::clamp(s - static_cast<double>(k), 0.0, 1.0);
            current_[i] = (1.0 - r) * table_[k] + r * table_[k + 1];
        }
        return current_;
    }

private:
    std::vector<double> fixed_, table_, x_, current_;
    double drift_ = 0.0, lo_ = 0.0, step_ = 1.0;
    bool zero_ = false;
};

struct Fields {
    std::vector<double> u, v, th;
};

class Evolver {
public:
    Evolver(System sys, const ModelSpec& spec, const Grid& grid, double kappa1, const Model2Params& q)
        : sys_(sys), spec_(spec), grid_(grid), k1_(kappa1), q_(q) {}

    EvolutionRecord run(const GridState& initial, const MovingControl& control, double T) {
        if (!(grid_.dx > 0.0) || !(grid_.hi > grid_.lo)) throw Error(ErrorKind::config, "grid needs dx > 0 and hi > lo");
        if (!(T >= 0.0)) throw Error(ErrorKind::config, "final time must be nonnegative");
        const double limit = 0.4 * grid_.dx * grid_.dx;
        double dt = grid_.dt > 0.0 ? grid_.dt : limit;
        if (dt > limit * (1.0 + 1e-12))
            throw Error(ErrorKind::config, "dt = " + num(dt) + " exceeds the stability bound 0.4 dx^2 = " + num(limit));

        EvolutionRecord rec;
        rec.x = grid_.nodes();
        const std::size_t n = rec.x.size();
        n_ = n;
        check_initial(initial, n);

        const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
        dt = steps > 0 ? T / static_cast<double>(steps) : dt;
        rec.dt = dt;
        rec.steps = steps;
        rec.frame_speed = grid_.frame_speed;
        const auto every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(grid_.snapshot_interval / dt)));

        ControlSampler alpha(control, rec.x, grid_.frame_speed, T);
        Fields y{initial.u, initial.v, initial.theta};
        Fields k, y1, y2;
        resize(k, n);
        resize(y1, n);
        resize(y2, n);

        rec.field_min = std::numeric_limits<double>::infinity();
        rec.field_max = -std::numeric_limits<double>::infinity();
        track(rec, y, 0.0);
        rec.snapshots.push_back(snapshot(y, 0.0));
        double a_prev = grid_integral(rec.x, alpha.at(0.0));
        double t_prev = grid_integral(rec.x, y.th.empty() ? std::vector<double>(n, 0.0) : y.th);

        auto combine = [&](Fields& out, double wa, const Fields& a, double wb, const Fields& b, const Fields& kk) {
            for (std::size_t i = 0; i < n; ++i) out.u[i] = wa * a.u[i] + wb * (b.u[i] + dt * kk.u[i]);
            if (has_v())
                for (std::size_t i = 0; i < n; ++i) out.v[i] = wa * a.v[i] + wb * (b.v[i] + dt * kk.v[i]);
            if (has_theta())
                for (std::size_t i = 0; i < n; ++i) out.th[i] = wa * a.th[i] + wb * (b.th[i] + dt * kk.th[i]);
        };

        std::vector<double> th_old;
        for (std::size_t s = 1; s <= steps; ++s) {
            const double t = static_cast<double>(s - 1) * dt;
            if (has_theta()) th_old = y.th;
            // SSP-RK3
            rhs(y, alpha.at(t), alpha.zero(), k);
            combine(y1, 0.0, y, 1.0, y, k);
            rhs(y1, alpha.at(t + dt), alpha.zero(), k);
            combine(y2, 0.75, y, 0.25, y1, k);
            rhs(y2, alpha.at(t + 0.5 * dt), alpha.zero(), k);
            combine(y, 1.0 / 3.0, y, 2.0 / 3.0, y2, k);

            const double tn = static_cast<double>(s) * dt;
            track(rec, y, tn);
            if (has_theta())
                for (std::size_t i = 0; i < n; ++i)
                    rec.max_theta_decrease = std::max(rec.max_theta_decrease, th_old[i] - y.th[i]);
            const double a_now = grid_integral(rec.x, alpha.at(tn));
            rec.cost_alpha += 0.5 * dt * (a_prev + a_now);
            a_prev = a_now;
            if (has_theta()) {
                const double t_now = grid_integral(rec.x, y.th);
                rec.cost_theta += 0.5 * dt * (t_prev + t_now);
                t_prev = t_now;
            }
            if (s % every == 0 || s == steps) {
                rec.snapshots.push_back(snapshot(y, tn));
                const auto& first = rec.snapshots.front();
                const auto& last = rec.snapshots.back();
                rec.drift_u = std::max(rec.drift_u, sup_diff(first.u, last.u));
                rec.drift_v = std::max(rec.drift_v, sup_diff(first.v, last.v));
                rec.drift_theta = std::max(rec.drift_theta, sup_diff(first.theta, last.theta));
            }
        }
        return rec;
    }

private:
    bool has_v() const { return sys_ == System::model2; }
    bool has_theta() const { return sys_ != System::scalar; }

    void resize(Fields& f, std::size_t n) const {
        f.u.resize(n);
        if (has_v()) f.v.resize(n);
        if (has_theta()) f.th.resize(n);
    }

    void check_initial(const GridState& s, std::size_t n) const {
        auto in_range = [](const std::vector<double>& f) {
            return std::all_of(f.begin(), f.end(), [](double a) { return a >= -1e-12 && a <= 1.0 + 1e-12; });
        };
        if (s.u.size() != n) throw Error(ErrorKind::config, "initial u has " + std::to_string(s.u.size()) + " nodes, grid has " + std::to_string(n));
        if (has_theta() && s.theta.size() != n) throw Error(ErrorKind::config, "initial theta does not match the grid");
        if (has_v() && s.v.size() != n) throw Error(ErrorKind::config, "initial v does not match the grid");
        if (!in_range(s.u) || (has_theta() && !in_range(s.theta)) || (has_v() && !in_range(s.v)))
            throw Error(ErrorKind::config, "initial data must lie in [0, 1]");
        if (has_v())
            for (std::size_t i = 0; i < n; ++i)
                if (s.v[i] > s.u[i] + 1e-12) throw Error(ErrorKind::config, "initial data violates v <= u");
    }

    GridState snapshot(const Fields& y, double t) const { return GridState{t, y.u, y.v, y.th}; }

    static double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
        double m = 0.0;
        for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
        return m;
    }

    void track(EvolutionRecord& rec, const Fields& y, double t) const {
        auto scan = [&](const std::vector<double>& f, const char* name) {
            for (double a : f) {
                if (!std::isfinite(a) || a < -0.01 || a > 1.01)
                    throw Error(ErrorKind::instability, std::string(name) + " left [-0.01, 1.01] at t = " + num(t));
                rec.field_min = std::min(rec.field_min, a);
                rec.field_max = std::max(rec.field_max, a);
            }
        };
        scan(y.u, "u");
        if (has_v()) {
            scan(y.v, "v");
            for (std::size_t i = 0; i < y.u.size(); ++i) rec.max_v_minus_u = std::max(rec.max_v_minus_u, y.v[i] - y.u[i]);
        }
        if (has_theta()) scan(y.th, "theta");
    }

    // mirror reflection at both ends (zero slope)
    double at(const std::vector<double>& f, long i) const {
        const long last = static_cast<long>(n_) - 1;
        if (i < 0) i = -i;
        if (i > last) i = 2 * last - i;
        return f[static_cast<std::size_t>(i)];
    }

    double diffusion_transport(const std::vector<double>& f, long i) const {
        const double h = grid_.dx, c = grid_.frame_speed;
        const double l = at(f, i - 1), m = f[static_cast<std::size_t>(i)], r = at(f, i + 1);
        return (l - 2 * m + r) / (h * h) + c * (r - l) / (2 * h);
    }

    // c theta_z with third-order upwinding; information travels with velocity -c
    double transport_upwind(const std::vector<double>& f, long i) const {
        const double h = grid_.dx, c = grid_.frame_speed;
        if (c == 0.0) return 0.0;
        double dz;
        if (c < 0.0)
            dz = (at(f, i - 2) - 6 * at(f, i - 1) + 3 * f[static_cast<std::size_t>(i)] + 2 * at(f, i + 1)) / (6 * h);
        else
            dz = (-2 * at(f, i - 1) - 3 * f[static_cast<std::size_t>(i)] + 6 * at(f, i + 1) - at(f, i + 2)) / (6 * h);
        return c * dz;
    }

    void rhs(const Fields& y, const std::vector<double>& alpha, bool no_control, Fields& out) const {
        const long n = static_cast<long>(n_);
        for (long i = 0; i < n; ++i) {
            const auto j = static_cast<std::size_t>(i);
            const double u = y.u[j], a = alpha[j];
            double react;
            if (sys_ == System::model2) react = spec_.f(u) - a * u;
            else if (no_control || a == 0.0) react = spec_.f(u);
            else if (spec_.f_controlled) react = spec_.f_controlled(u, a);
            else react = spec_.f(u) - a;
            out.u[j] = diffusion_transport(y.u, i) + react;
            if (sys_ == System::model1) {
                out.th[j] = transport_upwind(y.th, i) + k1_ * u * (1.0 - y.th[j]);
            } else if (sys_ == System::model2) {
                const double v = y.v[j], th = y.th[j];
                out.v[j] = diffusion_transport(y.v, i) + q_.kappa2 * (u - v) * th - a * v - q_.d * v;
                out.th[j] = transport_upwind(y.th, i) + q_.kappa1 * v * (1.0 - th);
            }
        }
    }

    System sys_;
    const ModelSpec& spec_;
    Grid grid_;
    double k1_;
    Model2Params q_;
    std::size_t n_ = 0;
};

}  // namespace

std::vector<double> Grid::nodes() const {
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / dx));
    std::vector<double> x(n + 1);
    for (std::size_t i = 0; i <= n; ++i) x[i] = lo + static_cast<double>(i) * dx;
    return x;
}

GridState sample_profile(const SpatialProfile& profile, const Grid& grid) {
    GridState s;
    for (double X : grid.nodes()) s.u.push_back(std::clamp(profile.u_at(X), 0.0, 1.0));
    return s;
}

GridState sample_tree(const SpatialProfile& profile, double kappa1, double c, const Grid& grid) {
    if (!(c < 0.0)) throw Error(ErrorKind::nonexistence, "a tree profile needs c < 0");
    auto s = sample_profile(profile, grid);
    const CumulativeU integral(profile);
    for (double X : grid.nodes()) s.theta.push_back(std::clamp(-std::expm1(kappa1 / c * integral(X)), 0.0, 1.0));
    return s;
}

GridState sample_triple(const TriplePath& path, const Grid& grid) {
    if (path.size() < 2) throw Error(ErrorKind::config, "path has fewer than two nodes");
    GridState s;
    for (double X : grid.nodes()) {
        double u, v, th;
        if (X <= path.x.front()) {
            u = path.u.front();
            v = 0.0;
            th = 0.0;
        } else if (X >= path.x.back()) {
            u = path.u.back();
            v = path.v_star;
            th = 1.0;
        } else {
            const auto it = std::upper_bound(path.x.begin(), path.x.end(), X);
            const std::size_t j = static_cast<std::size_t>(it - path.x.begin()) - 1;
            const double r = (X - path.x[j]) / (path.x[j + 1] - path.x[j]);
            u = (1 - r) * path.u[j] + r * path.u[j + 1];
            v = (1 - r) * path.v[j] + r * path.v[j + 1];
            th = (1 - r) * path.theta[j] + r * path.theta[j + 1];
        }
        u = std::clamp(u, 0.0, 1.0);
        s.u.push_back(u);
        s.v.push_back(std::clamp(v, 0.0, u));
        s.theta.push_back(std::clamp(th, 0.0, 1.0));
    }
    return s;
}

MovingControl effort_control(const SpatialProfile& profile, const ModelSpec& spec, double speed) {
    return MovingControl{[&profile, &spec](double xi) {
                             const double b = profile.beta_at(xi);
                             return b > 0.0 ? spec.L(profile.u_at(xi), b) : 0.0;
                         },
                         speed};
}

MovingControl removal_control(const SpatialProfile& profile, double speed) {
    return MovingControl{[&profile](double xi) {
                             const double b = profile.beta_at(xi);
                             const double U = profile.u_at(xi);
                             return b > 0.0 && U > 0.0 ? b / U : 0.0;
                         },
                         speed};
}

EvolutionRecord evolve_scalar(const ModelSpec& spec, const GridState& initial, const MovingControl& control, double T,
                              const Grid& grid) {
    return Evolver(System::scalar, spec, grid, 0.0, {}).run(initial, control, T);
}

EvolutionRecord evolve_model1(const ModelSpec& spec, const GridState& initial, const MovingControl& control,
                              double kappa1, double T, const Grid& grid) {
    if (!(kappa1 > 0.0)) throw Error(ErrorKind::invalid_parameter, "kappa1 must be positive");
    return Evolver(System::model1, spec, grid, kappa1, {}).run(initial, control, T);
}

EvolutionRecord evolve_model2(const ModelSpec& spec, const GridState& initial, const MovingControl& control,
                              const Model2Params& params, double T, const Grid& grid) {
    params.validate();
    if (!satisfies_death_rate_bound(spec, params.d))
        throw Error(ErrorKind::invalid_parameter, "reaction term violates f(u) >= -d u for d = " + num(params.d));
    return Evolver(System::model2, spec, grid, 0.0, params).run(initial, control, T);
}

double grid_integral(const std::vector<double>& x, const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size() && i < f.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
    return s;
}

SpeedFit front_speed(const EvolutionRecord& rec, double level, double discard, double margin) {
    if (rec.snapshots.empty() || rec.x.size() < 2) throw Error(ErrorKind::config, "empty evolution record");
    const double t_end = rec.snapshots.back().t;
    const double lo = rec.x.front(), hi = rec.x.back();
    std::vector<double> ts, xs;
    for (const auto& s : rec.snapshots) {
        if (s.t < discard * t_end) continue;
        std::size_t i = 1;
        while (i < s.u.size() && !(s.u[i - 1] < level && s.u[i] >= level)) ++i;
        if (i >= s.u.size()) throw Error(ErrorKind::front_not_found, "no crossing of u = " + num(level) + " at t = " + num(s.t));
        const double z = rec.x[i - 1] + (level - s.u[i - 1]) / (s.u[i] - s.u[i - 1]) * (rec.x[i] - rec.x[i - 1]);
        if (z < lo + margin || z > hi - margin)
            throw Error(ErrorKind::domain_exceeded, "front at z = " + num(z) + " is within " + num(margin) + " of the boundary");
        ts.push_back(s.t);
        xs.push_back(z + rec.frame_speed * s.t);
    }
    const std::size_t m = ts.size();
    if (m < 3) throw Error(ErrorKind::config, "need at least three snapshots after the transient");
    double tm = 0, xm = 0;
    for (std::size_t k = 0; k < m; ++k) {
        tm += ts[k];
        xm += xs[k];
    }
    tm /= static_cast<double>(m);
    xm /= static_cast<double>(m);
    double stt = 0, stx = 0;
    for (std::size_t k = 0; k < m; ++k) {
        stt += (ts[k] - tm) * (ts[k] - tm);
        stx += (ts[k] - tm) * (xs[k] - xm);
    }
    SpeedFit fit;
    fit.speed = stx / stt;
    fit.points = m;
    double ss = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const double r = xs[k] - xm - fit.speed * (ts[k] - tm);
        ss += r * r;
    }
    fit.std_error = std::sqrt(ss / static_cast<double>(m - 2) / stt);
    return fit;
}

}  // namespace travwave
