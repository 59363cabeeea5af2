#include "acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include "travwave/control.hpp"
#include "travwave/error.hpp"
#include "travwave/model.hpp"
#include "travwave/model2.hpp"
#include "travwave/pde.hpp"
#include "travwave/phaseplane.hpp"
#include "travwave/pmp.hpp"
#include "travwave/profile.hpp"
#include "travwave/speed.hpp"

namespace travwave::acceptance {

namespace {

std::string fmt(const char* pattern, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

class Checks {
public:
    explicit Checks(std::vector<CheckLine>& out) : out_(out) {}
    bool operator()(std::string what, bool ok, std::string detail = "") {
        out_.push_back({std::move(what), ok, std::move(detail)});
        return ok;
    }

private:
    std::vector<CheckLine>& out_;
};

const double kCubicSpeed = -1.0 / (3.0 * std::sqrt(2.0));
const std::vector<double> kEffortGrid{-0.2, -0.15, -0.1, -0.05, 0.0};

// Shared inputs, computed on first use.
struct Context {
    ModelSpec weed = make_weed_model(1.0 / 3.0);
    ModelSpec fast = make_weed_model(1.0 / 6.0, 6.0);
    Model2Params unit;

    const OptimalProfile& optimal() {
        if (!optimal_) optimal_ = optimal_profile(weed, -0.1);
        return *optimal_;
    }
    const SpatialProfile& profile() {
        if (!profile_) profile_ = reconstruct_x(optimal().trajectory, weed);
        return *profile_;
    }
    const SpatialProfile& fast_profile() {
        if (!fast_profile_) fast_profile_ = reconstruct_x(optimal_profile(fast, -0.9).trajectory, fast);
        return *fast_profile_;
    }
    const VThetaSolution& vtheta() {
        if (!vtheta_) vtheta_ = solve_vtheta(fast_profile(), fast, unit, -0.9);
        return *vtheta_;
    }
    double c_star() {
        if (!c_star_) c_star_ = natural_speed(weed);
        return *c_star_;
    }
    const std::vector<EffortRow>& effort() {
        if (!effort_) {
            std::vector<double> grid{c_star()};
            grid.insert(grid.end(), kEffortGrid.begin(), kEffortGrid.end());
            effort_ = effort_curve(weed, grid);
        }
        return *effort_;
    }

    std::optional<double> effort_seconds;

private:
    std::optional<OptimalProfile> optimal_;
    std::optional<SpatialProfile> profile_, fast_profile_;
    std::optional<VThetaSolution> vtheta_;
    std::optional<double> c_star_;
    std::optional<std::vector<EffortRow>> effort_;
};

double max_finite(const std::vector<double>& v) {
    double m = -INFINITY;
    for (double a : v)
        if (std::isfinite(a)) m = std::max(m, a);
    return m;
}

double min_finite(const std::vector<double>& v) {
    double m = INFINITY;
    for (double a : v)
        if (std::isfinite(a)) m = std::min(m, a);
    return m;
}

void natural_speed_criterion(Context& ctx, Checks& check) {
    const double cs = ctx.c_star();
    check("c* against -1/(3 sqrt 2)", std::abs(cs - kCubicSpeed) <= 1e-3, fmt("c* = %.6f", cs));
}

void exact_profile_criterion(Context& ctx, Checks& check) {
    const auto traj = heteroclinic(ctx.weed, ctx.c_star());
    double p_err = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i)
        p_err = std::max(p_err, std::abs(traj.p[i] - traj.u[i] * (1.0 - traj.u[i]) / std::sqrt(2.0)));
    check("P(U) = U(1-U)/sqrt 2", p_err <= 1e-3, fmt("sup error %.2e", p_err));

    const auto sp = reconstruct_x(traj, ctx.weed);
    double u_err = 0.0;
    for (std::size_t i = 0; i < sp.size(); ++i)
        u_err = std::max(u_err, std::abs(sp.u[i] - 1.0 / (1.0 + 2.0 * std::exp(-sp.x[i] / std::sqrt(2.0)))));
    check("U(x) against the shifted logistic", u_err <= 2e-3, fmt("sup error %.2e", u_err));
}

void pmp_criterion(Context& ctx, Checks& check) {
    const auto& opt = ctx.optimal();
    const auto& s = ctx.weed;
    check("shooting converged", opt.diagnostics.converged);
    check("u* < u1 < u2 < 1", s.u_star < opt.u1 && opt.u1 < opt.u2 && opt.u2 < 1.0,
          fmt("u1 = %.6f, u2 = %.6f", opt.u1, opt.u2));
    const double b1 = std::abs(opt.trajectory.beta_at(opt.u1)), b2 = std::abs(opt.trajectory.beta_at(opt.u2));
    check("beta vanishes at u1 and u2", b1 <= 1e-6 && b2 <= 1e-6, fmt("%.1e, %.1e", b1, b2));
    const auto res = pmp_residual(opt, s);
    check("adjoint residual", res.adjoint <= 1e-5, fmt("%.2e", res.adjoint));
    check("boundary conditions of the adjoint", res.boundary <= 1e-5, fmt("%.2e", res.boundary));
    check("pointwise minimality", res.pointwise_failures == 0, fmt("%d failures", res.pointwise_failures));
    const auto m = manifolds_at(s, -0.1);
    const double gap1 = std::abs(opt.trajectory.p_at(opt.u1) - m.flat.p_at(opt.u1));
    const double gap2 = std::abs(opt.trajectory.p_at(opt.u2) - m.sharp.p_at(opt.u2));
    check("arc leaves P_flat and lands on P_sharp", gap1 <= 1e-6 && gap2 <= 1e-6, fmt("%.1e, %.1e", gap1, gap2));
    bool positive = true;
    for (std::size_t i = opt.arc_begin + 1; i + 1 < opt.arc_end; ++i) positive = positive && opt.trajectory.beta[i] > 0.0;
    check("control active strictly inside the arc", positive);
}

void effort_criterion(Context& ctx, Checks& check) {
    const auto& rows = ctx.effort();
    bool ok = true;
    std::string table;
    for (const auto& r : rows) {
        ok = ok && r.ok;
        table += fmt("%s(%.4f, %.6f)", table.empty() ? "" : " ", r.c, r.effort);
    }
    check("all rows solved", ok, table);
    check("E(c*) vanishes", rows.front().effort <= 1e-6, fmt("E(c*) = %.2e", rows.front().effort));
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].effort >= rows[i - 1].effort;
    check("E nondecreasing in c", monotone);
}

void dominance_criterion(Context& ctx, Checks& check) {
    const auto& rows = ctx.effort();
    const auto substitute = scaled_substitute(ctx.weed, 0.1);
    for (const auto& r : rows) {
        const auto built = finite_cost_control(ctx.weed, r.c, std::nullopt, substitute);
        check(fmt("E(%.4f) <= constructed cost", r.c), r.effort <= built.cost,
              fmt("%.6f <= %.6f", r.effort, built.cost));
    }
}

void model1_criterion(Context& ctx, Checks& check) {
    const auto tree = theta_model1(ctx.profile(), 1.0, -0.1);
    bool monotone = true;
    for (std::size_t i = 1; i < tree.size(); ++i) monotone = monotone && tree.theta[i] >= tree.theta[i - 1];
    check("Theta nondecreasing", monotone);
    check("Theta end values", tree.theta.front() <= 1e-3 && tree.theta.back() >= 1.0 - 1e-3,
          fmt("%.2e, %.8f", tree.theta.front(), tree.theta.back()));
    bool refused = false;
    try {
        theta_model1(ctx.profile(), 1.0, 0.1);
    } catch (const Error& e) {
        refused = e.kind() == ErrorKind::nonexistence;
    }
    check("c = +0.1 has no tree profile", refused);
}

void spectral_criterion(Context& ctx, Checks& check) {
    const auto& q = ctx.unit;
    const double cs = c_sharp(q);
    check("c_sharp(1,1,1) = -1", std::abs(cs + 1.0) <= 1e-10, fmt("%.15f", cs));
    const auto coeff = char_poly(-1.0, q);
    const std::array<double, 4> factored{1.0, -1.0, -1.0, 1.0};  // (l - 1)^2 (l + 1)
    double diff = 0.0;
    for (int i = 0; i < 4; ++i) diff = std::max(diff, std::abs(coeff[i] - factored[i]));
    check("p = (l - 1)^2 (l + 1) at c = -1", diff <= 1e-10, fmt("%.1e", diff));
    const auto rep = spectrum(-1.0, q);
    check("repeated root classified", rep.classification == SpectrumClass::repeated_real, to_string(rep.classification));

    const auto sp = spectrum(-0.9, q);
    check("classification at c = -0.9", sp.classification == SpectrumClass::complex_pair && sp.lambda1 < 0.0 &&
                                            sp.a > 0.0 && sp.b > 0.0,
          fmt("lambda1 = %.8f, a = %.8f, b = %.8f", sp.lambda1, sp.a, sp.b));
    const auto A = linearization(-0.9, q);
    auto residual = [&](std::complex<double> l, const std::array<std::complex<double>, 3>& v) {
        double r = 0.0;
        for (int i = 0; i < 3; ++i) {
            std::complex<double> s = 0.0;
            for (int j = 0; j < 3; ++j) s += A[i][j] * v[j];
            r = std::max(r, std::abs(s - l * v[i]));
        }
        return r;
    };
    const std::complex<double> I(0.0, 1.0);
    std::array<std::complex<double>, 3> v1, v2;
    for (int i = 0; i < 3; ++i) {
        v1[i] = sp.eigvec1[i];
        v2[i] = sp.w2[i] + I * sp.w3[i];
    }
    const double r = std::max(residual(sp.lambda1, v1), residual({sp.a, sp.b}, v2));
    check("eigenpair residuals", r <= 1e-9, fmt("%.1e", r));
}

void sandwich_criterion(Context& ctx, Checks& check) {
    const auto& sol = ctx.vtheta();
    const double upper = std::max(max_finite(sol.upper.res_v), max_finite(sol.upper.res_theta));
    check("supersolution residuals <= 0", upper <= 1e-6, fmt("max %.2e", upper));
    const auto& low = sol.lower.path;
    const double lower = std::min(min_finite(low.res_v), min_finite(low.res_theta));
    check("subsolution residuals >= 0", lower >= -1e-6, fmt("min %.2e", lower));
    check("solution residuals", std::max(sol.residual_v, sol.residual_theta) <= 1e-6,
          fmt("%.1e, %.1e after %d iterations", sol.residual_v, sol.residual_theta, sol.iterations));
    check("solution between the bounds", sol.lower_margin >= -1e-6 && sol.upper_margin >= -1e-6,
          fmt("margins %.2e, %.2e", sol.lower_margin, sol.upper_margin));
    const double v_end = sol.path.v.back();
    check("V(+inf) = V*", std::abs(v_end - ctx.unit.v_star()) <= 1e-3, fmt("V = %.6f", v_end));
}

void pde_criterion(Context& ctx, Checks& check) {
    const auto& sp = ctx.profile();
    {
        Grid g;
        g.frame_speed = -0.1;
        const auto r = evolve_scalar(ctx.weed, sample_profile(sp, g), effort_control(sp, ctx.weed, -0.1), 50.0, g);
        check("comoving drift of the controlled front", r.drift_u <= 1e-2, fmt("%.2e", r.drift_u));
    }
    {
        Grid g;
        const auto r = evolve_scalar(ctx.weed, sample_profile(sp, g), effort_control(sp, ctx.weed, -0.1), 50.0, g);
        const auto fit = front_speed(r);
        check("controlled lab-frame speed", std::abs(fit.speed + 0.1) <= 0.05 * 0.1, fmt("%.6f", fit.speed));
    }
    {
        Grid g;
        GridState s;
        for (double x : g.nodes()) s.u.push_back(x < 0.0 ? 0.0 : 1.0);
        const auto fit = front_speed(evolve_scalar(ctx.weed, s, {}, 100.0, g));
        check("uncontrolled front speed", std::abs(fit.speed - kCubicSpeed) <= 0.02 * std::abs(kCubicSpeed),
              fmt("%.6f", fit.speed));
    }
}

void spiral_criterion(Context& ctx, Checks& check) {
    const auto rep = case2_demo(ctx.unit, -0.9);
    check("sign violation within 3 periods", rep.violated && rep.within_periods,
          rep.violated ? fmt("%s < 0 at x = %.3f, period %.3f", rep.component.c_str(), rep.violation_x, rep.period)
                       : std::string("no violation"));
}

// Module invariants, each asserted at its stated tolerance.
void property_criterion(Context& ctx, Checks& check) {
    const auto& w = ctx.weed;

    // model
    for (const ModelSpec* s : {&ctx.weed, &ctx.fast}) {
        const auto a1 = check_A1(*s);
        check("A1 and the interior zero at u*", a1.passed && std::abs(a1.interior_zero - s->u_star) <= 1e-10,
              fmt("zero %.12f", a1.interior_zero));
        bool inactive = true;
        for (int i = 0; i <= 100; ++i) inactive = inactive && s->beta_max(s->u_star * i / 100.0) == 0.0;
        check("beta_max vanishes below u*", inactive);
    }
    {
        const auto a2 = check_A2(w, {0.5, 0.6, 0.8, 0.95}, {0.0, 1e-3, 5e-3, 1e-2, 2e-2, 4e-2});
        const double fd = std::max({a2.fd_discrepancy_beta, a2.fd_discrepancy_betabeta, a2.fd_discrepancy_ubeta});
        check("partials of L against central differences", a2.passed && fd <= 1e-5, fmt("%.1e", fd));
    }

    // phaseplane
    {
        const double M = max_f(w);
        double worst_res = 0.0;
        bool bounded = true;
        for (double c : {ctx.c_star(), -0.1, 0.0, 0.1}) {
            for (const auto& t : {unstable_manifold(w, c, nullptr, 1.0), stable_manifold(w, c, 0.0)}) {
                worst_res = std::max(worst_res, chart_residual(w, t));
                for (double p : t.p) bounded = bounded && p <= slope_bound(c, M);
            }
        }
        worst_res = std::max(worst_res, chart_residual(w, ctx.optimal().trajectory));
        check("chart residual of manifolds and the optimal arc", worst_res <= 1e-5, fmt("%.1e", worst_res));
        check("slope bound", bounded);
        PhaseSettings half;
        half.seed = 0.5e-8;
        const auto a = unstable_manifold(w, -0.1, nullptr, 1.0), b = unstable_manifold(w, -0.1, nullptr, 1.0, half);
        const auto sa = stable_manifold(w, -0.1, 0.5), sb = stable_manifold(w, -0.1, 0.5, half);
        const double moved = std::max(std::abs(a.end_u - b.end_u), std::abs(sa.p.front() - sb.p.front()));
        check("halving the manifold seed", moved < 1e-6, fmt("%.1e", moved));
    }

    // speed
    {
        bool increasing = true;
        double prev = manifold_gap(w, -1.0);
        for (int k = 1; k <= 19; ++k) {
            const double g = manifold_gap(w, -1.0 + 0.1 * k);
            increasing = increasing && g > prev;
            prev = g;
        }
        check("gap increasing in c", increasing);
        PhaseSettings tight;
        tight.rtol = 1e-11;
        tight.atol = 1e-13;
        const double shift = std::abs(natural_speed(w) - natural_speed(w, 1e-10, tight));
        check("natural speed under tighter tolerances", shift <= 1e-6, fmt("%.1e", shift));
        const double balanced = natural_speed(make_weed_model(0.5));
        check("balanced model has zero speed", std::abs(balanced) <= 1e-6, fmt("%.1e", balanced));
    }

    // control_construct
    {
        const auto bang = bang_control(w, -0.1);
        const auto flat = unstable_manifold(w, -0.1, nullptr, w.u_star);
        const auto sharp = stable_manifold(w, -0.1, w.u_star);
        bool monotone = true;
        double prev = 0.0;
        for (double k : {1.001, 1.1, 1.5, 2.0, 4.0, 8.0}) {
            const double x = bang_crossing(w, -0.1, k * bang.gamma, flat, sharp);
            monotone = monotone && x > prev;
            prev = x;
        }
        check("bang crossing monotone in gamma", monotone);
        const auto built = finite_cost_control(w, -0.1, std::nullopt, scaled_substitute(w, 0.1));
        bool margin = built.delta > 0.0;
        for (double U = built.u1; U <= built.u2_tilde; U += 1e-3)
            if (built.beta_tilde(U) > 0.0) margin = margin && w.beta_max(U) - built.beta_tilde(U) >= built.delta - 1e-12;
        check("constructed control stays below beta_max", margin, fmt("delta %.3e", built.delta));
        double jump = 0.0;
        for (std::size_t j : built.trajectory.junctions)
            jump = std::max(jump, std::abs(built.trajectory.p[j] - built.trajectory.p[j - 1]));
        check("junction jumps of P", jump <= 1e-8, fmt("%.1e", jump));
    }

    // pmp
    {
        PmpSettings fine;
        fine.shot_rtol = 5e-11;
        fine.shot_atol = 5e-14;
        fine.phase.rtol = 5e-11;
        fine.phase.atol = 5e-13;
        const double a = ctx.optimal().cost, b = optimal_profile(w, -0.1, 1e-10, fine).cost;
        check("effort under tolerance refinement", std::abs(a - b) <= 1e-5 * a, fmt("%.2e relative", std::abs(a - b) / a));
        check("optimal boundary conditions", pmp_residual(ctx.optimal(), w).boundary <= 1e-5);
    }

    // profile
    {
        const auto& sp = ctx.profile();
        const auto& traj = ctx.optimal().trajectory;
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < sp.size(); ++i) {
            const double h = sp.x[i + 1] - sp.x[i];
            const double Um = sp.u_at(sp.x[i] + 0.5 * h);
            const double bm = traj.beta_at(Um);
            total += h / 6.0 * (sp.alpha[i] + 4.0 * (bm == 0.0 ? 0.0 : w.L(Um, bm)) + sp.alpha[i + 1]);
        }
        const double cost = ctx.optimal().cost;
        check("int alpha dx equals the phase-plane cost", std::abs(total - cost) <= 1e-5 * cost,
              fmt("%.8f vs %.8f", total, cost));
        bool increasing = true;
        for (std::size_t i = 1; i < sp.size(); ++i)
            if (sp.p[i] > 0.0 && sp.p[i - 1] > 0.0) increasing = increasing && sp.u[i] > sp.u[i - 1];
        check("U increasing where P > 0", increasing);
        ReconstructSettings wide;
        wide.tail_pad = 20.0;
        const double t1 = theta_model1(sp, 1.0, -0.1).theta.back();
        const double t2 = theta_model1(reconstruct_x(traj, w, wide), 1.0, -0.1).theta.back();
        check("Theta right end under a doubled grid", std::abs(t1 - t2) < 1e-5, fmt("%.1e", std::abs(t1 - t2)));
    }

    // model2
    {
        const auto& q = ctx.unit;
        const auto sp = spectrum(-0.9, q);
        double worst = 0.0;
        for (auto z : sp.roots) worst = std::max(worst, std::abs(char_poly_value(-0.9, q, z)));
        check("p at the reported eigenvalues", worst <= 1e-10, fmt("%.1e", worst));
        bool increasing = true;
        double prev = -INFINITY;
        const double cs = c_sharp(q);
        for (int k = 1; k <= 60; ++k) {
            const double c = 3.0 * cs * (1.0 - k / 61.0);
            const double v = std::real(char_poly_value(c, q, lambda_min(c, q)));
            increasing = increasing && v > prev;
            prev = v;
        }
        check("p(lambda_min) increasing in c", increasing);
        check("death-rate bound of the Model 2 reaction", satisfies_death_rate_bound(ctx.fast, q.d));
        const auto& sol = ctx.vtheta();
        check("sandwich", sol.lower_margin >= -1e-6 && sol.upper_margin >= -1e-6);
    }

    // pde
    {
        Grid g;
        g.lo = -20;
        g.hi = 20;
        g.dx = 0.1;
        const auto x = g.nodes();
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double worst = 0.0;
        for (int pair = 0; pair < 4; ++pair) {
            GridState lo, hi;
            const double shift = 10.0 * unit(rng) - 5.0;
            for (double xi : x) {
                const double base = 1.0 / (1.0 + std::exp(-(xi - shift))) * (0.8 + 0.2 * unit(rng));
                lo.u.push_back(base);
                hi.u.push_back(std::min(1.0, base + 0.3 * unit(rng)));
            }
            const auto a = evolve_scalar(w, lo, {}, 10.0, g), b = evolve_scalar(w, hi, {}, 10.0, g);
            for (std::size_t k = 0; k < a.snapshots.size(); ++k)
                for (std::size_t i = 0; i < x.size(); ++i)
                    worst = std::max(worst, a.snapshots[k].u[i] - b.snapshots[k].u[i]);
        }
        check("ordered data stay ordered", worst <= 1e-12, fmt("%.1e", worst));

        ModelSpec inert = w;
        inert.f = [](double) { return 0.0; };
        inert.f_controlled = nullptr;
        GridState bump;
        for (double xi : x) bump.u.push_back(0.5 + 0.4 * std::tanh(xi) * std::exp(-0.05 * xi * xi));
        const auto r = evolve_scalar(inert, bump, {}, 10.0, g);
        const double drift =
            std::abs(grid_integral(r.x, r.snapshots.back().u) - grid_integral(r.x, r.snapshots.front().u)) / 10.0;
        check("mass conserved without reaction", drift <= 1e-8, fmt("%.1e per unit time", drift));
    }
    {
        auto measure = [&](double dx) {
            Grid g;
            g.lo = -40;
            g.hi = 40;
            g.dx = dx;
            GridState s;
            for (double xi : g.nodes()) s.u.push_back(xi < 15.0 ? 0.0 : 1.0);
            return front_speed(evolve_scalar(w, s, {}, 60.0, g)).speed;
        };
        const double coarse = measure(0.1), fine = measure(0.05);
        check("speed under dx halving", std::abs(coarse - fine) < 0.01 * std::abs(fine),
              fmt("%.6f vs %.6f", coarse, fine));
    }
    {
        const auto& fp = ctx.fast_profile();
        Grid g;
        g.lo = -30;
        g.hi = 30;
        g.dx = 0.1;
        GridState s = sample_profile(fp, g);
        const auto x = g.nodes();
        for (std::size_t i = 0; i < x.size(); ++i) {
            s.v.push_back(s.u[i] * 0.5 * (1.0 + std::sin(x[i])));
            s.theta.push_back(x[i] > 0.0 ? 0.9 : 0.1);
        }
        const auto lab = evolve_model2(ctx.fast, s, removal_control(fp, -0.9), ctx.unit, 20.0, g);
        Grid cg;
        cg.frame_speed = -0.9;
        const auto co = evolve_model2(ctx.fast, sample_triple(ctx.vtheta().path, cg), removal_control(fp, -0.9),
                                      ctx.unit, 50.0, cg);
        bool inside = true;
        for (const auto* r : {&lab, &co})
            inside = inside && r->max_v_minus_u <= 1e-6 && r->field_min >= -1e-6 && r->field_max <= 1.0 + 1e-6;
        check("invariant region during Model 2 evolutions", inside,
              fmt("v - u <= %.1e, %.1e", lab.max_v_minus_u, co.max_v_minus_u));
    }
}

struct Criterion {
    int id;
    const char* title;
    double budget;
    void (*body)(Context&, Checks&);
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all{
        {1, "natural speed", 5, natural_speed_criterion},
        {2, "exact profile", 5, exact_profile_criterion},
        {3, "optimal profile at c = -0.1", 30, pmp_criterion},
        {4, "effort curve", 180, effort_criterion},
        {5, "dominance over the construction", 180, dominance_criterion},
        {6, "tree profile", 5, model1_criterion},
        {7, "Model 2 spectrum", 1, spectral_criterion},
        {8, "Model 2 sandwich", 60, sandwich_criterion},
        {9, "PDE cross-validation", 120, pde_criterion},
        {10, "spiral obstruction", 5, spiral_criterion},
        {11, "module properties", 300, property_criterion},
    };
    return all;
}

}  // namespace

std::string CriterionResult::line() const {
    std::string note;
    for (const auto& c : checks)
        if (!c.ok) {
            note = "failed: " + c.what + (c.detail.empty() ? "" : " (" + c.detail + ")");
            break;
        }
    if (note.empty() && seconds > budget) note = "over the time budget";
    if (note.empty())
        for (const auto& c : checks)
            if (!c.detail.empty()) {
                note = c.what + ": " + c.detail;
                break;
            }
    return fmt("%s %2d %s (%.1f s / %.0f s)", passed ? "PASS" : "FAIL", id, title.c_str(), seconds, budget) +
           (note.empty() ? "" : " " + note);
}

int criterion_count() { return static_cast<int>(criteria().size()); }

std::vector<CriterionResult> run(const std::vector<int>& only,
                                 const std::function<void(const CriterionResult&)>& on_result) {
    Context ctx;
    std::vector<CriterionResult> results;
    for (const auto& c : criteria()) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        CriterionResult r;
        r.id = c.id;
        r.title = c.title;
        r.budget = c.budget;
        Checks check(r.checks);
        const auto start = std::chrono::steady_clock::now();
        try {
            c.body(ctx, check);
        } catch (const std::exception& e) {
            check("completed without error", false, e.what());
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        // criteria 4 and 5 share one budget
        if (c.id == 4) ctx.effort_seconds = r.seconds;
        if (c.id == 5 && ctx.effort_seconds) r.seconds += *ctx.effort_seconds;
        r.passed = !r.checks.empty() &&
                   std::all_of(r.checks.begin(), r.checks.end(), [](const CheckLine& l) { return l.ok; }) &&
                   r.seconds <= r.budget;
        if (on_result) on_result(r);
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace travwave::acceptance
