#include "travwave/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "travwave/error.hpp"

namespace travwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

void Model2Params::validate() const {
    if (!(kappa1 > 0) || !(kappa2 > 0) || !(d > 0))
        throw Error(ErrorKind::invalid_parameter, "kappa1, kappa2 and d must be positive");
}

void AssumptionReport::add(std::string clause, bool ok, std::string detail) {
    clauses.push_back({std::move(clause), ok, std::move(detail)});
    passed = passed && ok;
}

ModelSpec make_weed_model(double u_star, double rate) {
    if (!(u_star > 0.0 && u_star <= 0.5))
        throw Error(ErrorKind::invalid_parameter, "weed model needs 0 < u_star <= 1/2, got " + fmt(u_star));
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw Error(ErrorKind::invalid_parameter, "weed model growth rate must be positive");
    const double us = u_star, r = rate;
    // Effort is measured against G(u) = r u (u - u_star), the largest removable growth.
    auto G = [us, r](double u) { return r * u * (u - us); };
    auto dG = [us, r](double u) { return r * (2.0 * u - us); };

    ModelSpec s;
    s.label = "weed";
    s.u_star = us;
    s.f = [us, r](double u) { return r * u * (u - us) * (1.0 - u); };
    s.df = [us, r](double u) { return r * (-3.0 * u * u + 2.0 * (1.0 + us) * u - us); };
    s.beta_max = [us, G](double u) { return u > us ? G(u) : 0.0; };
    s.L = [us, G](double u, double b) {
        if (b == 0.0) return 0.0;
        const double g = G(u);
        if (u <= us || b < 0.0 || b >= g) return kInf;
        return b / (g - b);
    };
    s.L_beta = [us, G](double u, double b) {
        const double g = G(u);
        if (u <= us || b >= g) return kInf;
        return g / ((g - b) * (g - b));
    };
    s.L_betabeta = [us, G](double u, double b) {
        const double g = G(u);
        if (u <= us || b >= g) return kInf;
        const double q = g - b;
        return 2.0 * g / (q * q * q);
    };
    s.L_ubeta = [us, G, dG](double u, double b) {
        const double g = G(u);
        if (u <= us || b >= g) return -kInf;
        const double q = g - b;
        return -dG(u) * (g + b) / (q * q * q);
    };
    s.f_controlled = [us, r](double u, double alpha) { return r * u * (u - us) * (1.0 / (1.0 + alpha) - u); };
    s.bistable = true;
    s.control_above_u_star_only = true;
    return s;
}

ModelSpec make_logistic_model(double kappa3) {
    if (!(kappa3 > 0.0) || !std::isfinite(kappa3))
        throw Error(ErrorKind::invalid_parameter, "logistic model needs kappa3 > 0");
    const double k = kappa3;
    ModelSpec s;
    s.label = "logistic";
    s.u_star = 0.0;
    s.f = [k](double u) { return k * (1.0 - u) * u; };
    s.df = [k](double u) { return k * (1.0 - 2.0 * u); };
    s.beta_max = [](double) { return kInf; };
    s.L = [](double u, double b) {
        if (b == 0.0) return 0.0;
        return u > 0.0 ? b / u : kInf;
    };
    s.L_beta = [](double u, double) { return u > 0.0 ? 1.0 / u : kInf; };
    s.L_betabeta = [](double, double) { return 0.0; };
    s.L_ubeta = [](double u, double) { return u > 0.0 ? -1.0 / (u * u) : -kInf; };
    s.f_controlled = [k](double u, double alpha) { return k * (1.0 - u) * u - alpha * u; };
    s.bistable = false;
    return s;
}

ModelSpec with_reaction(const ModelSpec& base, ScalarFn f_hat, ScalarFn df_hat, std::string label) {
    ModelSpec s = base;
    s.label = label.empty() ? base.label + "-substitute" : std::move(label);
    s.f = f_hat;
    if (df_hat) {
        s.df = std::move(df_hat);
    } else {
        s.df = [f_hat](double u) {
            const double h = 1e-6;
            const double lo = std::max(0.0, u - h), hi = std::min(1.0, u + h);
            return (f_hat(hi) - f_hat(lo)) / (hi - lo);
        };
    }
    s.f_controlled = nullptr;
    // Locate the interior sign change of f_hat.
    const int n = 2000;
    double prev_u = 1.0 / n, prev = f_hat(prev_u);
    for (int i = 2; i < n; ++i) {
        const double u = static_cast<double>(i) / n;
        const double v = f_hat(u);
        if ((prev < 0.0 && v >= 0.0) || (prev > 0.0 && v <= 0.0)) {
            double lo = prev_u, hi = u, flo = prev;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = f_hat(mid);
                if ((fm < 0.0) == (flo < 0.0) && fm != 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            s.u_star = 0.5 * (lo + hi);
            break;
        }
        prev_u = u;
        prev = v;
    }
    return s;
}

AssumptionReport check_A1(const ModelSpec& spec, int samples) {
    AssumptionReport rep;
    const double tol = 1e-10;
    const double f0 = spec.f(0.0), f1 = spec.f(1.0);
    rep.add("f(0) = 0", std::abs(f0) <= tol, "f(0) = " + fmt(f0));
    rep.add("f(1) = 0", std::abs(f1) <= tol, "f(1) = " + fmt(f1));
    const double d0 = spec.df(0.0), d1 = spec.df(1.0);
    rep.add("df(0) < 0", d0 < 0.0, "df(0) = " + fmt(d0));
    rep.add("df(1) < 0", d1 < 0.0, "df(1) = " + fmt(d1));

    // Sign pattern of f on the open interval, ignoring values within tolerance.
    int changes = 0;
    int last = 0;
    double zero = std::numeric_limits<double>::quiet_NaN();
    for (int i = 1; i < samples - 1; ++i) {
        const double u = static_cast<double>(i) / (samples - 1);
        const double v = spec.f(u);
        const int sgn = v > tol ? 1 : (v < -tol ? -1 : 0);
        if (sgn == 0) continue;
        if (sgn != last) {
            if (last != 0) {
                ++changes;
                const double prev_u = static_cast<double>(i - 1) / (samples - 1);
                double lo = prev_u, hi = u;
                for (int it = 0; it < 100; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if ((spec.f(mid) > 0.0) == (sgn > 0)) hi = mid;
                    else lo = mid;
                }
                zero = 0.5 * (lo + hi);
            }
            rep.sign_pattern.push_back(sgn);
            last = sgn;
        }
    }
    rep.interior_zero = zero;
    const bool one_change = changes == 1 && rep.sign_pattern.size() == 2 && rep.sign_pattern[0] < 0;
    rep.add("single interior sign change (- then +)", one_change,
            "sign changes = " + std::to_string(changes));
    if (one_change) {
        const double dz = spec.df(zero);
        rep.add("df(u*) > 0", dz > 0.0, "df(" + fmt(zero) + ") = " + fmt(dz));
    } else {
        rep.add("df(u*) > 0", false, "no interior zero");
    }
    return rep;
}

AssumptionReport check_A2(const ModelSpec& spec, const std::vector<double>& u_samples,
                          const std::vector<double>& beta_samples) {
    AssumptionReport rep;
    for (double u : u_samples)
        for (double b : beta_samples)
            if (b < 0.0 || (b > 0.0 && b >= spec.beta_max(u)))
                throw Error(ErrorKind::domain, "sample (u=" + fmt(u) + ", beta=" + fmt(b) +
                                                   ") outside the finiteness region");

    bool zero_ok = true;
    for (double u : u_samples) zero_ok = zero_ok && spec.L(u, 0.0) == 0.0;
    rep.add("L(u,0) = 0", zero_ok);

    auto rel = [](double approx, double exact) {
        return std::abs(approx - exact) / std::max(std::abs(exact), 1e-12);
    };

    bool convex = true;
    bool superlinear = true;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int nfit = 0;
    for (double u : u_samples) {
        const double bmax = spec.beta_max(u);
        double prev_ratio = -kInf;
        std::vector<double> sorted = beta_samples;
        std::sort(sorted.begin(), sorted.end());
        for (double b : sorted) {
            const double h = 1e-6 * std::max(b, 1e-3 * std::min(bmax, 1.0));
            const double lo = std::max(0.0, b - h);
            const double hi = b + h;
            if (hi < bmax) {
                const double fd_b = (spec.L(u, hi) - spec.L(u, lo)) / (hi - lo);
                const double fd_bb = (spec.L_beta(u, hi) - spec.L_beta(u, lo)) / (hi - lo);
                rep.fd_discrepancy_beta = std::max(rep.fd_discrepancy_beta, rel(fd_b, spec.L_beta(u, b)));
                rep.fd_discrepancy_betabeta =
                    std::max(rep.fd_discrepancy_betabeta, rel(fd_bb, spec.L_betabeta(u, b)));
                const double hu = 1e-6;
                if (b < spec.beta_max(u - hu) && b < spec.beta_max(u + hu)) {
                    const double fd_ub = (spec.L_beta(u + hu, b) - spec.L_beta(u - hu, b)) / (2 * hu);
                    rep.fd_discrepancy_ubeta = std::max(rep.fd_discrepancy_ubeta, rel(fd_ub, spec.L_ubeta(u, b)));
                }
                const double step = std::min(b, bmax - b) * 0.5;
                if (step > 0.0) {
                    const double second = spec.L(u, b + step) - 2 * spec.L(u, b) + spec.L(u, b - step);
                    convex = convex && second > 0.0;
                }
            }
            if (b > 0.0) {
                const double Lv = spec.L(u, b);
                const double ratio = Lv / b;
                superlinear = superlinear && ratio > prev_ratio;
                prev_ratio = ratio;
                if (Lv > 0.0) {
                    sx += std::log(b);
                    sy += std::log(Lv);
                    sxx += std::log(b) * std::log(b);
                    sxy += std::log(b) * std::log(Lv);
                    ++nfit;
                }
            }
        }
    }
    rep.add("strict convexity in beta", convex);
    rep.add("superlinear growth (L/beta increasing)", superlinear);
    if (nfit >= 2) {
        const double denom = nfit * sxx - sx * sx;
        rep.fitted_p = denom != 0.0 ? (nfit * sxy - sx * sy) / denom : 0.0;
        double c1 = kInf;
        for (double u : u_samples)
            for (double b : beta_samples)
                if (b > 0.0) c1 = std::min(c1, spec.L(u, b) / std::pow(b, rep.fitted_p));
        rep.fitted_c1 = c1;
    }
    return rep;
}

bool satisfies_death_rate_bound(const ModelSpec& spec, double d, int samples) {
    for (int i = 0; i < samples; ++i) {
        const double u = static_cast<double>(i) / (samples - 1);
        if (spec.f(u) < -d * u - 1e-12) return false;
    }
    return true;
}

double max_abs_df(const ModelSpec& spec, int samples) {
    double m = 0.0;
    for (int i = 0; i < samples; ++i) m = std::max(m, std::abs(spec.df(static_cast<double>(i) / (samples - 1))));
    return m;
}

double max_f(const ModelSpec& spec, int samples) {
    double m = 0.0;
    for (int i = 0; i < samples; ++i) m = std::max(m, spec.f(static_cast<double>(i) / (samples - 1)));
    return m;
}

}  // namespace travwave
