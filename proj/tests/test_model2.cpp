#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "travwave/error.hpp"
#include "travwave/model2.hpp"
#include "travwave/pmp.hpp"
#include "travwave/profile.hpp"

using namespace travwave;

namespace {

const ModelSpec& fast_weed() {
    static const ModelSpec s = make_weed_model(1.0 / 6.0, 6.0);
    return s;
}

const SpatialProfile& controlled_profile() {
    static const SpatialProfile sp = reconstruct_x(optimal_profile(fast_weed(), -0.9).trajectory, fast_weed());
    return sp;
}

const VThetaSolution& solved() {
    static const VThetaSolution s = solve_vtheta(controlled_profile(), fast_weed(), Model2Params{}, -0.9);
    return s;
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::invalid_parameter;
}

double p_real(double c, const Model2Params& q, double x) {
    return x * x * x + c * x * x - q.d * x - q.kappa1 * q.kappa2 / c;
}

// Real root of the cubic on [lo, hi] by bisection.
double bisect_root(double c, const Model2Params& q, double lo, double hi) {
    double flo = p_real(c, q, lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi), fm = p_real(c, q, mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double p_at_lambda_min(double c, const Model2Params& q) { return p_real(c, q, lambda_min(c, q)); }

std::array<std::complex<double>, 3> mat_vec(const Mat3& A, const std::array<std::complex<double>, 3>& v) {
    std::array<std::complex<double>, 3> out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[i] += A[i][j] * v[j];
    return out;
}

// Hermite interpolation of a path at X using the stored slopes.
double v_at(const TriplePath& p, double X) {
    const double h = p.x[1] - p.x[0];
    const auto j = static_cast<std::size_t>((X - p.x[0]) / h);
    const double t = (X - p.x[j]) / h, t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * p.v[j] + (t3 - 2 * t2 + t) * h * p.w[j] + (-2 * t3 + 3 * t2) * p.v[j + 1] +
           (t3 - t2) * h * p.w[j + 1];
}

}  // namespace

TEST_CASE("characteristic polynomial coefficients") {
    Model2Params q;
    const auto a = char_poly(-1.0, q);
    CHECK(a == std::array<double, 4>{1.0, -1.0, -1.0, 1.0});
    const auto b = char_poly(1.0, q);
    CHECK(b == std::array<double, 4>{1.0, 1.0, -1.0, -1.0});
    for (double c : {-3.0, -1.0, -0.2}) CHECK(char_poly_value(c, q, 0.0).real() > 0.0);
    CHECK(kind_of([&] { char_poly(0.0, q); }) == ErrorKind::domain);
    CHECK(kind_of([&] { spectrum(0.0, q); }) == ErrorKind::domain);
}

TEST_CASE("threshold speed") {
    Model2Params unit;
    CHECK(c_sharp(unit) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(lambda_min(-1.0, unit) == doctest::Approx(1.0));
    CHECK(std::abs(p_at_lambda_min(-1.0, unit)) <= 1e-14);

    for (const Model2Params q : {Model2Params{1, 1, 1}, Model2Params{2, 0.5, 0.3}, Model2Params{0.4, 3, 2}}) {
        const double cs = c_sharp(q);
        CHECK(cs < 0.0);
        CHECK(std::abs(p_at_lambda_min(cs, q)) <= 1e-9);
        // lambda_min is the critical point of p
        for (double c : {cs, 0.5 * cs, 2 * cs}) {
            const double l = lambda_min(c, q);
            CHECK(std::abs(3 * l * l + 2 * c * l - q.d) <= 1e-12);
        }
        // the closed form agrees with bisection on p(lambda_min(c); c) = 0
        double lo = 50 * cs, hi = 0.01 * cs;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (p_at_lambda_min(mid, q) > 0 ? hi : lo) = mid;
        }
        CHECK(cs == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-10));
        // p(lambda_min) is increasing in c, nonpositive below the threshold and positive above
        double prev = -INFINITY;
        for (int k = 1; k <= 60; ++k) {
            const double c = 3 * cs * (1.0 - k / 61.0);
            const double v = p_at_lambda_min(c, q);
            CHECK(v > prev);
            prev = v;
            if (c <= cs) CHECK(v <= 1e-12);
            else CHECK(v > 0.0);
        }
    }
}

TEST_CASE("spectrum at the threshold is a repeated root") {
    Model2Params q;
    const auto sp = spectrum(-1.0, q);
    CHECK(sp.classification == SpectrumClass::repeated_real);
    CHECK(sp.lambda1 == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(sp.a == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(sp.b == 0.0);
    for (auto z : sp.roots) CHECK(std::abs(char_poly_value(-1.0, q, z)) <= 1e-10);
    CHECK(spectrum(-1.5, q).classification == SpectrumClass::three_real);
}

TEST_CASE("spectrum in the complex regime") {
    Model2Params q;
    const double c = -0.9;
    const auto sp = spectrum(c, q);
    REQUIRE(sp.classification == SpectrumClass::complex_pair);
    CHECK(sp.lambda1 < 0.0);
    CHECK(sp.a > 0.0);
    CHECK(sp.b > 0.0);
    for (auto z : sp.roots) CHECK(std::abs(char_poly_value(c, q, z)) <= 1e-10);

    // oracle: the negative root by bisection, the pair from the root sum and product
    const double l1 = bisect_root(c, q, -10.0, 0.0);
    const double a = (-c - l1) / 2.0;
    const double m2 = q.kappa1 * q.kappa2 / (c * l1);
    CHECK(sp.lambda1 == doctest::Approx(l1).epsilon(1e-12));
    CHECK(sp.a == doctest::Approx(a).epsilon(1e-12));
    CHECK(sp.b == doctest::Approx(std::sqrt(m2 - a * a)).epsilon(1e-10));
    // frozen from the oracle
    CHECK(sp.lambda1 == doctest::Approx(-1.05266998).epsilon(1e-7));
    CHECK(sp.b == doctest::Approx(0.31982346).epsilon(1e-7));

    // eigenpairs
    const auto A = linearization(c, q);
    auto residual = [&](std::complex<double> l, std::array<std::complex<double>, 3> v) {
        const auto Av = mat_vec(A, v);
        double r = 0;
        for (int i = 0; i < 3; ++i) r = std::max(r, std::abs(Av[i] - l * v[i]));
        return r;
    };
    const std::complex<double> I(0, 1);
    CHECK(residual(sp.lambda1, {sp.eigvec1[0], sp.eigvec1[1], sp.eigvec1[2]}) <= 1e-9);
    std::array<std::complex<double>, 3> v2, v3;
    for (int i = 0; i < 3; ++i) {
        v2[i] = sp.w2[i] + I * sp.w3[i];
        v3[i] = sp.w2[i] - I * sp.w3[i];
    }
    CHECK(residual({sp.a, sp.b}, v2) <= 1e-9);
    CHECK(residual({sp.a, -sp.b}, v3) <= 1e-9);

    // the plane spanned by w2, w3 is invariant and rotates at rate b
    for (int i = 0; i < 3; ++i) {
        double Aw2 = 0, Aw3 = 0;
        for (int j = 0; j < 3; ++j) {
            Aw2 += A[i][j] * sp.w2[j];
            Aw3 += A[i][j] * sp.w3[j];
        }
        CHECK(Aw2 == doctest::Approx(sp.a * sp.w2[i] - sp.b * sp.w3[i]).epsilon(1e-12));
        CHECK(Aw3 == doctest::Approx(sp.b * sp.w2[i] + sp.a * sp.w3[i]).epsilon(1e-12));
    }
    // the eigenvector of the negative root has entries of both signs
    CHECK(sp.eigvec1[0] > 0.0);
    CHECK(sp.eigvec1[2] < 0.0);
}

TEST_CASE("quasimonotone on the invariant box") {
    Model2Params q{0.7, 1.3, 0.4};
    std::vector<Vec3> samples;
    for (int i = 0; i <= 10; ++i)
        for (int j = 0; j <= i; ++j)
            for (int k = 0; k <= 10; ++k) samples.push_back({i / 10.0, j / 10.0, k / 10.0});
    const auto rep = quasimonotone_check(q, 0.3, samples);
    CHECK(rep.passed());
    CHECK(rep.rejected == 0);
    CHECK(rep.checked == samples.size());
    CHECK(rep.min_offdiagonal >= 0.0);

    const auto bad = quasimonotone_check(q, 0.0, {{0.3, 0.5, 0.2}, {0.5, 0.3, 1.2}, {0.5, 0.3, 0.5}});
    CHECK(bad.rejected == 2);
    CHECK(bad.checked == 1);
}

TEST_CASE("upper solution") {
    Model2Params q;
    const auto& sp = controlled_profile();
    const auto nodes = uniform_nodes(-20.0, 60.0, 0.05);
    const auto up = supersolution(sp, fast_weed(), q, -0.9, nodes);
    REQUIRE(up.size() == nodes.size());
    CHECK(up.v_star == 0.5);
    double vmax = 0;
    for (std::size_t i = 0; i < up.size(); ++i) {
        vmax = std::max(vmax, up.v[i]);
        CHECK(up.v[i] <= up.u[i]);
        CHECK(up.res_theta[i] == doctest::Approx(q.kappa1 * (1 - up.theta[i]) * (up.v[i] - up.u[i])));
        CHECK(up.res_theta[i] <= 0.0);
        if (std::isfinite(up.res_v[i])) CHECK(up.res_v[i] <= 1e-6);
        if (up.u[i] > 0.5) CHECK(up.res_v[i] <= q.kappa2 * (1 - 0.5) - q.d * 0.5);
    }
    CHECK(vmax == 0.5);
    CHECK(up.theta.back() >= 1.0 - 1e-3);
    CHECK(up.theta.front() <= 1e-3);

    // the tree profile of the scalar model uses the same formula
    const auto th = theta_model1(sp, q.kappa1, -0.9);
    for (std::size_t i = th.core_begin; i < th.core_end; i += 11) {
        const auto one = supersolution(sp, fast_weed(), q, -0.9, {th.x[i]});
        CHECK(one.theta[0] == doctest::Approx(th.theta[i]).epsilon(1e-8));
    }

    // a profile that does not solve the scalar equation is refused
    auto broken = sp;
    broken.p[broken.size() / 2] *= 1.01;
    CHECK(kind_of([&] { supersolution(broken, fast_weed(), q, -0.9, nodes); }) == ErrorKind::construction_failure);
    // a death rate below the reaction's decay is refused
    CHECK(kind_of([&] { supersolution(sp, fast_weed(), Model2Params{1, 1, 0.1}, -0.9, nodes); }) ==
          ErrorKind::invalid_parameter);
}

TEST_CASE("decay rate of the right piece") {
    CHECK(lambda0_of(-1.0, 2.0) == doctest::Approx(-1.0));
    CHECK(lambda0_of(-0.9, 1.0) < 0.0);
}

TEST_CASE("lower solution") {
    Model2Params q;
    const double c = -0.9;
    const auto lo = subsolution(controlled_profile(), fast_weed(), q, c);
    const auto& p = lo.path;
    const auto sp = spectrum(c, q);
    CHECK(lo.x1 > lo.x0);
    CHECK(lo.x1 - lo.x0 <= 4 * std::numbers::pi / sp.b);
    CHECK(lo.eps <= 1e-3);
    CHECK(lo.halvings <= 10);
    CHECK(lo.theta_tilde > 0.0);
    CHECK(lo.theta_tilde < 1.0);
    CHECK(lo.slope_left < 0.0);
    CHECK(lo.slope_right >= 0.0);
    CHECK(lo.comparison_margin >= -1e-6);
    CHECK(lo.min_residual >= -1e-6);
    CHECK(p.theta.back() >= 1.0 - 1e-3);
    // V vanishes at x1: the last node before x1 extrapolates to zero there
    std::size_t k = 0;
    while (p.x[k + 1] <= lo.x1) ++k;
    CHECK(std::abs(p.v[k] + p.w[k] * (lo.x1 - p.x[k])) <= (p.x[1] - p.x[0]) * (p.x[1] - p.x[0]));
    CHECK(p.v[k + 1] >= 0.0);

    // zero left of x0, nonnegative everywhere
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(p.v[i] >= -1e-12);
        CHECK(p.theta[i] >= 0.0);
        if (p.x[i] < lo.x0 - 1e-9) CHECK(p.v[i] == 0.0);
    }

    // independent residual check with plain finite differences, away from x0 and x1
    const double h = p.x[1] - p.x[0];
    for (std::size_t i = 1; i + 1 < p.size(); ++i) {
        const double X = p.x[i];
        if (std::abs(X - lo.x0) < 3 * h || std::abs(X - lo.x1) < 3 * h) continue;
        const double d2 = (p.v[i + 1] - 2 * p.v[i] + p.v[i - 1]) / (h * h);
        const double d1 = (p.v[i + 1] - p.v[i - 1]) / (2 * h);
        const double r = d2 + c * d1 + q.kappa2 * (p.u[i] - p.v[i]) * p.theta[i] - (q.d + p.alpha[i]) * p.v[i];
        CHECK(r >= -1e-4);
    }

    CHECK(kind_of([&] { subsolution(controlled_profile(), fast_weed(), q, -1.2); }) == ErrorKind::regime);
    CHECK(kind_of([&] { subsolution(controlled_profile(), fast_weed(), q, 0.1); }) == ErrorKind::regime);
}

TEST_CASE("coupled solution between the bounds") {
    Model2Params q;
    const auto& s = solved();
    const auto& p = s.path;
    CHECK(p.kind == TripleKind::solution);
    CHECK(s.residual_v <= 1e-6);
    CHECK(s.residual_theta <= 1e-6);
    CHECK(s.lower_margin >= -1e-6);
    CHECK(s.upper_margin >= -1e-6);
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(p.v[i] >= 0.0);
        CHECK(p.v[i] <= p.u[i] + 1e-12);
        CHECK(p.u[i] <= 1.0);
        CHECK(p.theta[i] >= 0.0);
        CHECK(p.theta[i] <= 1.0);
        if (i > 0) CHECK(p.theta[i] >= p.theta[i - 1]);
    }
    CHECK(std::abs(p.v.front()) <= 1e-3);
    CHECK(std::abs(p.theta.front()) <= 1e-3);
    CHECK(std::abs(p.v.back() - q.v_star()) <= 1e-3);
    CHECK(p.theta.back() >= 1.0 - 1e-3);
    CHECK(s.alpha_support_begin < s.alpha_support_end);

    // Theta against 1 - exp((kappa1 / c) int V) with Simpson on node pairs
    const double h = p.x[1] - p.x[0];
    double I = 0;
    for (std::size_t i = 2; i < p.size(); i += 2) {
        I += h / 3 * (p.v[i - 2] + 4 * p.v[i - 1] + p.v[i]);
        CHECK(p.theta[i] == doctest::Approx(-std::expm1(q.kappa1 / -0.9 * I)).epsilon(1e-4));
    }

    // iteration history is nonincreasing eventually and ends below tolerance
    CHECK(s.history.back() < 1e-10);
}

TEST_CASE("coupled solution under refinement") {
    Model2Params q;
    const auto& base = solved();
    Model2Settings fine;
    fine.h = 0.01;
    const auto f = solve_vtheta(controlled_profile(), fast_weed(), q, -0.9, fine);
    double diff = 0;
    for (std::size_t i = 0; i < base.path.size(); ++i) diff = std::max(diff, std::abs(base.path.v[i] - f.path.v[2 * i]));
    CHECK(diff < 1e-4);

    Model2Settings wide;
    wide.halfwidth = 2.0 * 20.0 / spectrum(-0.9, q).a;
    const auto w = solve_vtheta(controlled_profile(), fast_weed(), q, -0.9, wide);
    double dd = 0;
    for (std::size_t i = 0; i < base.path.size(); ++i) {
        const double X = base.path.x[i];
        if (X + 1 >= w.path.x.back()) continue;
        dd = std::max(dd, std::abs(base.path.v[i] - v_at(w.path, X)));
    }
    CHECK(dd < 1e-4);
}

TEST_CASE("uniform host state gives an exact damage equation") {
    Model2Params q;
    SpatialProfile flat;
    flat.x = {-100.0, 100.0};
    flat.u = {1.0, 1.0};
    flat.p = {0.0, 0.0};
    flat.upp = {0.0, 0.0};
    flat.beta = {0.0, 0.0};
    flat.alpha = {0.0, 0.0};
    const auto s = solve_vtheta(flat, fast_weed(), q, -0.9);
    const auto& p = s.path;
    const double h = p.x[1] - p.x[0], c = -0.9;
    double worst = 0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        const double r = c * (p.theta[i + 1] - p.theta[i]) / h +
                         0.5 * q.kappa1 * (p.v[i] * (1 - p.theta[i]) + p.v[i + 1] * (1 - p.theta[i + 1]));
        worst = std::max(worst, std::abs(r));
    }
    CHECK(worst <= 1e-8);
    for (double a : p.alpha) CHECK(a == 0.0);
}

TEST_CASE("spiral near the zero state forces a sign change") {
    Model2Params q;
    const double c = -0.9;
    const auto sp = spectrum(c, q);
    const auto d = case2_demo(q, c);
    CHECK(d.violated);
    CHECK(d.within_periods);
    CHECK(d.violation_x < 0.0);
    CHECK(-d.violation_x <= 3 * 2 * std::numbers::pi / sp.b);
    CHECK(d.period == doctest::Approx(2 * std::numbers::pi / sp.b));
    CHECK(d.rotation_rate == doctest::Approx(sp.b).epsilon(1e-3));
    // the seed itself lies in the positive cone
    CHECK(d.v.front() > 0.0);
    CHECK(d.theta.front() > 0.0);

    Case2Settings twice;
    twice.seed_amplitude = 2e-6;
    const auto d2 = case2_demo(q, c, twice);
    CHECK(std::abs(d2.windings - d.windings) <= 1.0);
    CHECK(d2.violated);

    CHECK(kind_of([&] { case2_demo(q, -1.2); }) == ErrorKind::regime);
}
