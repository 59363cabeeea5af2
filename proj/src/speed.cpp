#include "travwave/speed.hpp"

#include <cmath>
#include <sstream>

#include "travwave/error.hpp"

namespace travwave {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

void require_bistable(const ModelSpec& spec) {
    const auto rep = check_A1(spec);
    if (!rep.passed) {
        std::string why;
        for (const auto& cl : rep.clauses)
            if (!cl.passed) why += " [" + cl.clause + (cl.detail.empty() ? "" : ": " + cl.detail) + "]";
        throw Error(ErrorKind::invalid_parameter, spec.label + " fails the bistability assumptions:" + why);
    }
}

}  // namespace

double manifold_gap(const ModelSpec& spec, double c, const PhaseSettings& settings) {
    const double us = spec.u_star;
    const auto flat = unstable_manifold(spec, c, nullptr, us, settings);
    const auto sharp = stable_manifold(spec, c, us, settings);
    // A manifold that reaches P = 0 before u* lies below every positive value there.
    const double pf = flat.end == EndReason::p_zero ? 0.0 : flat.p.back();
    const double ps = sharp.end == EndReason::p_zero ? 0.0 : sharp.p.front();
    return ps - pf;
}

double natural_speed(const ModelSpec& spec, double tol, const PhaseSettings& settings) {
    require_bistable(spec);
    double half = 2.0 * std::sqrt(max_abs_df(spec)) + 1.0;
    double lo = -half, hi = half;
    double glo = manifold_gap(spec, lo, settings), ghi = manifold_gap(spec, hi, settings);
    int expansions = 0;
    while (!(glo < 0.0 && ghi > 0.0)) {
        if (++expansions > 5)
            throw Error(ErrorKind::bracket_failure, "gap keeps its sign on [" + num(lo) + ", " + num(hi) + "]");
        half *= 2.0;
        lo = -half;
        hi = half;
        glo = manifold_gap(spec, lo, settings);
        ghi = manifold_gap(spec, hi, settings);
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double g = manifold_gap(spec, mid, settings);
        if (g == 0.0) return mid;
        if (g < 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

PhaseTrajectory heteroclinic(const ModelSpec& spec, double c, const PhaseSettings& settings) {
    const double us = spec.u_star;
    auto flat = unstable_manifold(spec, c, nullptr, us, settings);
    auto sharp = stable_manifold(spec, c, us, settings);
    if (flat.end == EndReason::p_zero || sharp.end == EndReason::p_zero)
        throw Error(ErrorKind::construction_failure, "a manifold reaches P = 0 before u* at c = " + num(c));
    auto joined = concatenate({flat, sharp});
    joined.c = c;
    return joined;
}

double modified_speed(const ModelSpec& spec, const ScalarFn& f_hat, double tol, const PhaseSettings& settings,
                      int samples) {
    for (int i = 0; i < samples; ++i) {
        const double u = static_cast<double>(i) / (samples - 1);
        const double fh = f_hat(u), f = spec.f(u);
        const double bm = spec.beta_max(u);
        const double slack = 1e-12 * std::max(1.0, std::abs(f));
        if (fh > f + slack)
            throw Error(ErrorKind::invalid_substitute, "f_hat exceeds f at u = " + num(u));
        if (std::isfinite(bm) && fh < f - bm - slack)
            throw Error(ErrorKind::invalid_substitute, "f_hat lies below f - beta_max at u = " + num(u));
    }
    const auto sub = with_reaction(spec, f_hat);
    const auto rep = check_A1(sub, samples);
    if (!rep.passed) {
        std::string why;
        for (const auto& cl : rep.clauses)
            if (!cl.passed) why += " [" + cl.clause + (cl.detail.empty() ? "" : ": " + cl.detail) + "]";
        throw Error(ErrorKind::invalid_substitute, "f_hat is not bistable:" + why);
    }
    return natural_speed(sub, tol, settings);
}

ScalarFn scaled_substitute(const ModelSpec& spec, double factor) {
    if (!(factor > 0.0 && factor <= 1.0))
        throw Error(ErrorKind::invalid_parameter, "substitute factor must lie in (0, 1]");
    const double us = spec.u_star;
    auto f = spec.f;
    return [f, us, factor](double u) { return u > us ? factor * f(u) : f(u); };
}

}  // namespace travwave
