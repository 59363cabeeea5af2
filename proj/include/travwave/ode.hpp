#pragma once

// Dormand-Prince 5(4) with FSAL, continuous extension of order 4 and
// terminal event location on the dense output.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace travwave::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Options {
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_step = 0.0;  // 0 selects automatically
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 500000;
};

template <std::size_t N>
struct Event {
    std::function<double(double, const State<N>&)> g;
    int direction = 0;  // +1 rising only, -1 falling only, 0 both
};

enum class Outcome { reached_end, event, singular, max_steps };

template <std::size_t N>
struct Solution {
    std::vector<double> t;
    std::vector<State<N>> y;
    std::vector<State<N>> dy;
    Outcome outcome = Outcome::reached_end;
    int event_index = -1;
    std::size_t rejected = 0;
};

namespace detail {

template <std::size_t N>
bool finite(const State<N>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

template <std::size_t N>
struct Dense {
    State<N> r1, r2, r3, r4, r5;
    double t0, h;

    State<N> at(double t) const {
        const double s = (t - t0) / h;
        const double s1 = 1.0 - s;
        State<N> out;
        for (std::size_t i = 0; i < N; ++i)
            out[i] = r1[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i])));
        return out;
    }
};

}  // namespace detail

// Integrates y' = rhs(t, y) from t0 towards t1 (either direction). The first
// event whose function changes sign (with the requested direction) stops the
// integration; the final node is then the located event point.
template <std::size_t N, class Rhs>
Solution<N> integrate(Rhs&& rhs, double t0, const State<N>& y0, double t1,
                      const std::vector<Event<N>>& events = {}, const Options& opt = {}) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                     a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                     d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                     d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

    Solution<N> sol;
    const double span = t1 - t0;
    const double dir = span >= 0 ? 1.0 : -1.0;

    State<N> y = y0;
    State<N> k1 = rhs(t0, y);
    sol.t.push_back(t0);
    sol.y.push_back(y);
    sol.dy.push_back(k1);
    if (!detail::finite(y) || !detail::finite(k1)) {
        sol.outcome = Outcome::singular;
        return sol;
    }
    if (span == 0.0) return sol;

    std::vector<double> g_prev(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) g_prev[e] = events[e].g(t0, y);

    auto scale = [&](double a, double b) { return opt.atol + opt.rtol * std::max(std::abs(a), std::abs(b)); };

    double h = opt.initial_step;
    if (h <= 0.0) {
        double d0 = 0, dd1 = 0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = scale(y[i], y[i]);
            d0 += (y[i] / sc) * (y[i] / sc);
            dd1 += (k1[i] / sc) * (k1[i] / sc);
        }
        d0 = std::sqrt(d0 / N);
        dd1 = std::sqrt(dd1 / N);
        h = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * d0 / dd1;
        h = std::min({h, std::abs(span), opt.max_step});
    }
    h = std::min(h, opt.max_step);

    double t = t0;
    State<N> k2, k3, k4, k5, k6, k7, ytmp, ynew;
    std::size_t steps = 0;
    bool last_rejected = false;

    while (dir * (t1 - t) > 0) {
        if (++steps > opt.max_steps) {
            sol.outcome = Outcome::max_steps;
            return sol;
        }
        const double tiny = 16 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1e-280);
        if (h < tiny) {
            sol.outcome = Outcome::singular;
            return sol;
        }
        double hs = dir * std::min(h, std::abs(t1 - t));
        bool clipped = std::abs(t1 - t) <= h;

        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * a21 * k1[i];
        k2 = rhs(t + c2 * hs, ytmp);
        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
        k3 = rhs(t + c3 * hs, ytmp);
        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = rhs(t + c4 * hs, ytmp);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = rhs(t + c5 * hs, ytmp);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        k6 = rhs(t + hs, ytmp);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        const double tnew = clipped ? t1 : t + hs;
        k7 = rhs(tnew, ynew);

        bool ok = detail::finite(k2) && detail::finite(k3) && detail::finite(k4) && detail::finite(k5) &&
                  detail::finite(k6) && detail::finite(k7) && detail::finite(ynew);
        double err = 0.0;
        if (ok) {
            for (std::size_t i = 0; i < N; ++i) {
                const double ei =
                    hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                const double r = ei / scale(y[i], ynew[i]);
                err += r * r;
            }
            err = std::sqrt(err / N);
            ok = std::isfinite(err);
        }
        if (!ok) {
            h *= 0.25;
            last_rejected = true;
            ++sol.rejected;
            continue;
        }
        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            last_rejected = true;
            ++sol.rejected;
            continue;
        }

        // accepted
        detail::Dense<N> dense;
        dense.t0 = t;
        dense.h = tnew - t;
        for (std::size_t i = 0; i < N; ++i) {
            dense.r1[i] = y[i];
            dense.r2[i] = ynew[i] - y[i];
            dense.r3[i] = dense.h * k1[i] - dense.r2[i];
            dense.r4[i] = dense.r2[i] - dense.h * k7[i] - dense.r3[i];
            dense.r5[i] = dense.h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }

        int fired = -1;
        double t_fire = tnew;
        for (std::size_t e = 0; e < events.size(); ++e) {
            const double gn = events[e].g(tnew, ynew);
            const double gp = g_prev[e];
            const bool rising = gp < 0 && gn >= 0;
            const bool falling = gp > 0 && gn <= 0;
            const bool hit = (events[e].direction >= 0 && rising) || (events[e].direction <= 0 && falling);
            if (hit) {
                double lo = t, hi = tnew, glo = gp;
                for (int it = 0; it < 200 && std::abs(hi - lo) > 4 * std::numeric_limits<double>::epsilon() *
                                                                     std::max(1.0, std::abs(hi));
                     ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double gm = events[e].g(mid, dense.at(mid));
                    if ((glo < 0) == (gm < 0) && gm != 0.0) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
                if (fired < 0 || dir * (hi - t_fire) < 0) {
                    fired = static_cast<int>(e);
                    t_fire = hi;
                }
            }
            g_prev[e] = gn;
        }

        if (fired >= 0) {
            State<N> ye = (t_fire == tnew) ? ynew : dense.at(t_fire);
            sol.t.push_back(t_fire);
            sol.y.push_back(ye);
            sol.dy.push_back(rhs(t_fire, ye));
            sol.outcome = Outcome::event;
            sol.event_index = fired;
            return sol;
        }

        t = tnew;
        y = ynew;
        k1 = k7;
        sol.t.push_back(t);
        sol.y.push_back(y);
        sol.dy.push_back(k1);

        double fac = err == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 10.0);
        if (last_rejected) fac = std::min(fac, 1.0);
        last_rejected = false;
        h = std::min(h * fac, opt.max_step);
    }
    sol.outcome = Outcome::reached_end;
    return sol;
}

}  // namespace travwave::ode
