#include "travwave/model2.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "travwave/error.hpp"
#include "travwave/ode.hpp"

namespace travwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

void require_nonzero_speed(double c) {
    if (c == 0.0) throw Error(ErrorKind::domain, "the characteristic polynomial divides by c; c = 0 is not allowed");
}

Vec3 eigvec(double c, const Model2Params& q, double lambda) { return {1.0, lambda, -q.kappa1 / (c * lambda)}; }

double alpha_at(const SpatialProfile& p, double X, double U) {
    const double b = p.beta_at(X);
    return b > 0.0 && U > 0.0 ? b / U : 0.0;
}

void check_death_rate(const ModelSpec& spec, const Model2Params& q) {
    if (!satisfies_death_rate_bound(spec, q.d))
        throw Error(ErrorKind::invalid_parameter,
                    "reaction term violates f(u) >= -d u on [0,1] for d = " + num(q.d) + " (" + spec.label + ")");
}

// Thomas algorithm; lo[0] and up[n-1] are ignored.
std::vector<double> tridiagonal(const std::vector<double>& lo, std::vector<double> di, const std::vector<double>& up,
                                std::vector<double> rhs) {
    const std::size_t n = di.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = lo[i] / di[i - 1];
        di[i] -= m * up[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    std::vector<double> out(n);
    out[n - 1] = rhs[n - 1] / di[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) out[i] = (rhs[i] - up[i] * out[i + 1]) / di[i];
    return out;
}

template <std::size_t N>
ode::State<N> hermite_state(const ode::Solution<N>& s, double X) {
    const auto it = std::upper_bound(s.t.begin(), s.t.end(), X);
    std::size_t i = it == s.t.begin() ? 0 : static_cast<std::size_t>(it - s.t.begin()) - 1;
    if (i + 1 >= s.t.size()) i = s.t.size() - 2;
    const double h = s.t[i + 1] - s.t[i];
    const double r = (X - s.t[i]) / h, r2 = r * r, r3 = r2 * r;
    ode::State<N> out;
    for (std::size_t k = 0; k < N; ++k)
        out[k] = (2 * r3 - 3 * r2 + 1) * s.y[i][k] + (r3 - 2 * r2 + r) * h * s.dy[i][k] +
                 (-2 * r3 + 3 * r2) * s.y[i + 1][k] + (r3 - r2) * h * s.dy[i + 1][k];
    return out;
}

double grid_derivative(const std::vector<double>& v, std::size_t i, double h) {
    const std::size_t n = v.size();
    if (n < 2) return 0.0;
    if (i == 0) return (v[1] - v[0]) / h;
    if (i + 1 == n) return (v[n - 1] - v[n - 2]) / h;
    return (v[i + 1] - v[i - 1]) / (2 * h);
}

double default_halfwidth(const Model2Spectrum& sp) { return 20.0 / std::min(std::abs(sp.lambda1), sp.a); }

}  // namespace

const char* to_string(SpectrumClass k) {
    switch (k) {
        case SpectrumClass::complex_pair: return "complex_pair";
        case SpectrumClass::repeated_real: return "repeated_real";
        case SpectrumClass::three_real: return "three_real";
    }
    return "?";
}

const char* to_string(TripleKind k) {
    switch (k) {
        case TripleKind::supersolution: return "supersolution";
        case TripleKind::subsolution: return "subsolution";
        case TripleKind::solution: return "solution";
    }
    return "?";
}

std::array<double, 4> char_poly(double c, const Model2Params& q) {
    require_nonzero_speed(c);
    return {1.0, c, -q.d, -q.kappa1 * q.kappa2 / c};
}

std::complex<double> char_poly_value(double c, const Model2Params& q, std::complex<double> lambda) {
    const auto k = char_poly(c, q);
    return ((lambda + k[1]) * lambda + k[2]) * lambda + k[3];
}

double lambda_min(double c, const Model2Params& q) { return (-c + std::sqrt(c * c + 3.0 * q.d)) / 3.0; }

double c_sharp(const Model2Params& q) {
    q.validate();
    const double d = q.d, k = q.kappa1 * q.kappa2;
    const double num = -2.0 * d * d * d - 9.0 * k * d + 2.0 * std::pow(d * d + 3.0 * k, 1.5);
    return -std::sqrt(num / (d * d + 4.0 * k));
}

Mat3 linearization(double c, const Model2Params& q) {
    require_nonzero_speed(c);
    return Mat3{Vec3{0.0, 1.0, 0.0}, Vec3{q.d, -c, -q.kappa2}, Vec3{-q.kappa1 / c, 0.0, 0.0}};
}

Model2Spectrum spectrum(double c, const Model2Params& q) {
    require_nonzero_speed(c);
    q.validate();
    if (c > 0.0) throw Error(ErrorKind::regime, "the Model 2 spectrum is analysed for c < 0, got c = " + num(c));
    const auto k = char_poly(c, q);

    Eigen::Matrix3d comp;
    comp << -k[1], -k[2], -k[3], 1.0, 0.0, 0.0, 0.0, 1.0, 0.0;
    Eigen::EigenSolver<Eigen::Matrix3d> es(comp, false);
    Model2Spectrum out;
    out.c = c;
    out.params = q;
    out.lambda_min = lambda_min(c, q);
    out.c_sharp = c_sharp(q);
    for (int i = 0; i < 3; ++i) {
        std::complex<double> z = es.eigenvalues()[i];
        const std::complex<double> dp = (3.0 * z + 2.0 * k[1]) * z + k[2];
        if (std::abs(dp) > 1e-8) z -= char_poly_value(c, q, z) / dp;
        out.roots[static_cast<std::size_t>(i)] = z;
    }

    const double B = k[1], C = k[2], D = k[3];
    const double terms[] = {18 * B * C * D, 4 * B * B * B * D, B * B * C * C, 4 * C * C * C, 27 * D * D};
    const double disc = terms[0] - terms[1] + terms[2] - terms[3] - terms[4];
    double scale = 0.0;
    for (double t : terms) scale = std::max(scale, std::abs(t));

    auto& r = out.roots;
    if (std::abs(disc) <= 1e-12 * scale || disc > 0.0) {
        for (auto& z : r) z = {z.real(), 0.0};
        std::sort(r.begin(), r.end(), [](auto x, auto y) { return x.real() < y.real(); });
        out.lambda1 = r[0].real();
        out.eigvec1 = eigvec(c, q, out.lambda1);
        if (disc > 1e-12 * scale) {
            out.classification = SpectrumClass::three_real;
            out.a = r[1].real();
            out.w2 = eigvec(c, q, r[1].real());
            out.w3 = eigvec(c, q, r[2].real());
        } else {
            out.classification = SpectrumClass::repeated_real;
            out.a = 0.5 * (r[1].real() + r[2].real());
            r[1] = r[2] = {out.a, 0.0};
            out.w2 = eigvec(c, q, out.a);
            out.w3 = {0.0, 0.0, 0.0};
        }
        out.b = 0.0;
        return out;
    }

    // one real root and a complex pair
    std::sort(r.begin(), r.end(), [](auto x, auto y) { return std::abs(x.imag()) < std::abs(y.imag()); });
    r[0] = {r[0].real(), 0.0};
    out.lambda1 = r[0].real();
    out.a = 0.5 * (r[1].real() + r[2].real());
    out.b = 0.5 * (std::abs(r[1].imag()) + std::abs(r[2].imag()));
    r[1] = {out.a, out.b};
    r[2] = {out.a, -out.b};
    out.classification = SpectrumClass::complex_pair;
    out.eigvec1 = eigvec(c, q, out.lambda1);
    const double m2 = out.a * out.a + out.b * out.b;
    out.w2 = {1.0, out.a, -q.kappa1 * out.a / (c * m2)};
    out.w3 = {0.0, out.b, q.kappa1 * out.b / (c * m2)};
    return out;
}

std::vector<double> uniform_nodes(double lo, double hi, double h) {
    if (!(h > 0.0) || !(hi >= lo)) throw Error(ErrorKind::invalid_parameter, "bad grid [" + num(lo) + ", " + num(hi) + "]");
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / h - 1e-9));
    std::vector<double> x(n + 1);
    for (std::size_t i = 0; i <= n; ++i) x[i] = lo + static_cast<double>(i) * h;
    return x;
}

double scalar_residual(const SpatialProfile& p, const ModelSpec& spec, double c) {
    double worst = 0.0;
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i) {
        double upp;
        if (p.upp.size() == n) {
            upp = p.upp[i];
        } else {
            if (i == 0 || i + 1 == n) continue;
            const double hl = p.x[i] - p.x[i - 1], hr = p.x[i + 1] - p.x[i];
            upp = (-hr / (hl * (hl + hr))) * p.p[i - 1] + ((hr - hl) / (hl * hr)) * p.p[i] +
                  (hl / (hr * (hl + hr))) * p.p[i + 1];
        }
        worst = std::max(worst, std::abs(upp + c * p.p[i] + spec.f(p.u[i]) - p.beta[i]));
    }
    return worst;
}

TriplePath supersolution(const SpatialProfile& profile, const ModelSpec& spec, const Model2Params& q, double c,
                         const std::vector<double>& nodes, const Model2Settings& settings) {
    q.validate();
    if (!(c < 0.0)) throw Error(ErrorKind::regime, "the upper solution needs c < 0, got c = " + num(c));
    if (profile.x.empty()) throw Error(ErrorKind::invalid_trajectory, "empty scalar profile");
    check_death_rate(spec, q);
    const double r0 = scalar_residual(profile, spec, c);
    if (r0 > settings.profile_tolerance)
        throw Error(ErrorKind::construction_failure, "scalar profile residual " + num(r0) + " exceeds tolerance");

    const CumulativeU integral(profile);
    const double vs = q.v_star(), rate = q.kappa1 / c;
    TriplePath out;
    out.kind = TripleKind::supersolution;
    out.c = c;
    out.v_star = vs;
    out.x = nodes;
    double worst = -kInf;
    for (double X : nodes) {
        const double U = profile.u_at(X), P = profile.p_at(X), al = alpha_at(profile, X, U);
        const double v = std::min(U, vs);
        const double th = -std::expm1(rate * integral(X));
        double rv = kNaN;
        if (U < vs) {
            const double upp = -c * P - spec.f(U) + al * U;  // from the scalar equation
            rv = upp + c * P + q.kappa2 * (U - v) * th - q.d * v - al * v;
        } else if (U > vs) {
            rv = q.kappa2 * (U - vs) * th - q.d * vs - al * vs;
        }
        const double rt = q.kappa1 * (1.0 - th) * (v - U);
        out.u.push_back(U);
        out.v.push_back(v);
        out.theta.push_back(th);
        out.w.push_back(U < vs ? P : 0.0);
        out.alpha.push_back(al);
        out.res_v.push_back(rv);
        out.res_theta.push_back(rt);
        if (std::isfinite(rv)) worst = std::max(worst, rv);
        worst = std::max(worst, rt);
    }
    if (worst > settings.residual_tolerance)
        throw Error(ErrorKind::construction_failure, "upper solution residual " + num(worst) + " is positive");
    return out;
}

double lambda0_of(double c, double s) { return (-c - std::sqrt(c * c + 4.0 * s)) / 2.0; }

Subsolution subsolution(const SpatialProfile& profile, const ModelSpec& spec, const Model2Params& q, double c,
                        const Model2Settings& settings) {
    if (c >= 0.0) throw Error(ErrorKind::regime, "the lower solution needs c < 0, got c = " + num(c));
    const auto sp = spectrum(c, q);
    if (sp.classification != SpectrumClass::complex_pair)
        throw Error(ErrorKind::regime, "c = " + num(c) + " is not above c_sharp = " + num(sp.c_sharp) + " (" +
                                           to_string(sp.classification) + ")");
    if (profile.x.empty()) throw Error(ErrorKind::invalid_trajectory, "empty scalar profile");
    check_death_rate(spec, q);
    if (!(settings.eps > 0.0) || !(settings.eps0 > 0.0) || !(settings.eps0 < 1.0))
        throw Error(ErrorKind::invalid_parameter, "eps and eps0 must lie in (0, 1)");
    if (profile.beta.back() > 0.0)
        throw Error(ErrorKind::construction_failure, "control does not vanish at the right end of the profile");

    double alpha_end = -kInf;
    for (std::size_t i = 0; i < profile.size(); ++i)
        if (profile.beta[i] > 0.0) alpha_end = profile.x[i + 1];

    const double H = settings.halfwidth > 0.0 ? settings.halfwidth : default_halfwidth(sp);
    const double h = settings.h, XL = -H, eps0 = settings.eps0;

    // leftmost x with U >= 1 - eps0 (U is nondecreasing)
    double xu = XL;
    if (profile.u_at(XL) < 1.0 - eps0) {
        double lo = XL, hi = std::max(XL + 1.0, profile.x.back());
        for (int k = 0; profile.u_at(hi) < 1.0 - eps0; ++k) {
            if (k > 60) throw Error(ErrorKind::construction_failure, "U never reaches 1 - eps0");
            lo = hi;
            hi += std::max(1.0, hi - XL);
        }
        for (int k = 0; k < 200 && hi - lo > 1e-12; ++k) {
            const double mid = 0.5 * (lo + hi);
            (profile.u_at(mid) < 1.0 - eps0 ? lo : hi) = mid;
        }
        xu = hi;
    }
    const double x0raw = std::max(xu, alpha_end);
    const double x0 = XL + std::ceil((x0raw - XL) / h - 1e-9) * h;

    const CumulativeU integral(profile);
    const double vs = q.v_star(), rate = q.kappa1 / c, k1 = q.kappa1, k2 = q.kappa2, d = q.d;
    const double a = sp.a, b = sp.b, m2 = a * a + b * b;
    const double window = 4.0 * std::numbers::pi / b;

    auto rhs = [&](double X, const ode::State<3>& y) {
        const double U = profile.u_at(X);
        return ode::State<3>{y[1], -c * y[1] - k2 * (U - y[0]) * y[2] + d * y[0], -rate * y[0] * (1.0 - y[2])};
    };
    ode::Options opt;
    opt.rtol = 1e-11;
    opt.atol = 1e-16;
    opt.max_step = 0.1;
    std::vector<ode::Event<3>> events{{[](double, const ode::State<3>& y) { return y[0]; }, -1}};

    Subsolution out;
    out.x0 = x0;
    out.eps0 = eps0;
    double eps = settings.eps;
    ode::Solution<3> sol;
    std::string why;
    for (int halving = 0;; ++halving) {
        if (halving > settings.max_halvings)
            throw Error(ErrorKind::construction_failure, "no admissible window after " +
                                                             std::to_string(settings.max_halvings) +
                                                             " halvings of eps: " + why);
        const ode::State<3> y0{0.0, eps * b, eps * k1 * b / (c * m2)};
        sol = ode::integrate<3>(rhs, x0, y0, x0 + 1.05 * window, events, opt);
        out.halvings = halving;
        out.eps = eps;
        eps *= 0.5;
        if (sol.outcome != ode::Outcome::event) {
            why = "V has no zero within 4 pi / b of x0";
            continue;
        }
        const double x1 = sol.t.back();
        const auto& y1 = sol.y.back();
        if (x1 - x0 > window) {
            why = "first zero of V beyond 4 pi / b";
            continue;
        }
        if (!(sol.dy.back()[0] < 0.0) || !(y1[2] > 0.0) || !(y1[2] < 1.0)) {
            why = "Theta(x1) outside (0, 1) or V'(x1) >= 0";
            continue;
        }
        bool ordered = true;
        for (std::size_t i = 1; i + 1 < sol.t.size() && ordered; ++i) {
            const double U = profile.u_at(sol.t[i]);
            const double tb = -std::expm1(rate * integral(sol.t[i]));
            if (!(sol.y[i][0] > 0.0) || sol.y[i][0] > std::min(U, vs) || sol.y[i][2] > tb) ordered = false;
        }
        if (!ordered) {
            why = "V or Theta leaves the band below the upper solution";
            continue;
        }
        break;
    }

    const double x1 = sol.t.back();
    const double tt = sol.y.back()[2];
    out.x1 = x1;
    out.theta_tilde = tt;
    out.slope_left = sol.y.back()[1];
    out.v_dagger = k2 * (1.0 - eps0) * tt / (k2 * tt + d);
    out.lambda0 = lambda0_of(c, k2 * tt + d);
    const double vd = out.v_dagger, l0 = out.lambda0;
    auto v_tilde = [&](double X) { return vd * -std::expm1(l0 * (X - x1)); };
    auto theta_right = [&](double X) {
        const double s = X - x1;
        return 1.0 - (1.0 - tt) * std::exp(rate * vd * (s - std::expm1(l0 * s) / l0));
    };

    const double tail = (-c / k1) * std::log((1.0 - tt) / settings.theta_tail) / vd + 1.0 / -l0;
    const double XR = std::max(H, x1 + tail + settings.right_margin);
    auto& path = out.path;
    path.kind = TripleKind::subsolution;
    path.c = c;
    path.v_star = vs;
    path.x = uniform_nodes(XL, XR, h);
    const std::size_t n = path.size();
    path.u.resize(n);
    path.alpha.resize(n);
    path.v.assign(n, 0.0);
    path.theta.assign(n, 0.0);
    path.w.assign(n, 0.0);
    path.res_v.assign(n, 0.0);
    path.res_theta.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        path.u[i] = profile.u_at(path.x[i]);
        path.alpha[i] = alpha_at(profile, path.x[i], path.u[i]);
    }

    // [x0, x1]: the small-data solution, Theta cut at zero
    std::size_t first_right = n;
    for (std::size_t i = 0; i < n; ++i) {
        const double X = path.x[i];
        if (X < x0 - 1e-9 * h) continue;
        if (X > x1) {
            first_right = i;
            break;
        }
        const auto y = hermite_state(sol, X);
        const auto dy = rhs(X, y);
        const double U = path.u[i];
        const double th = std::max(y[2], 0.0);
        const double dth = y[2] > 0.0 ? dy[2] : 0.0;
        path.v[i] = y[0];
        path.w[i] = y[1];
        path.theta[i] = th;
        path.res_v[i] = dy[1] + c * y[1] + k2 * (U - y[0]) * th - d * y[0] - path.alpha[i] * y[0];
        path.res_theta[i] = c * dth + k1 * (1.0 - th) * y[0];
    }
    if (first_right + 2 >= n) throw Error(ErrorKind::construction_failure, "grid ends before the right piece");

    // (x1, XR]: v solves the linear problem with theta from v_tilde
    std::size_t j0 = first_right;
    if (path.x[j0] - x1 < 1e-6 * h) {
        path.v[j0] = 0.0;
        path.theta[j0] = theta_right(path.x[j0]);
        ++j0;
    }
    for (std::size_t i = first_right; i < n; ++i) path.theta[i] = theta_right(path.x[i]);
    const std::size_t m = n - 1 - j0;  // unknowns j0 .. n-2
    std::vector<double> lo(m), di(m), up(m), rv(m);
    auto coeffs = [&](std::size_t i, double hl, double& A, double& Bc, double& C) {
        const double hr = h;
        const double th = path.theta[i];
        A = 2.0 / (hl * (hl + hr)) - c * hr / (hl * (hl + hr));
        Bc = -2.0 / (hl * hr) + c * (hr - hl) / (hl * hr) - (d + k2 * th);
        C = 2.0 / (hr * (hl + hr)) + c * hl / (hr * (hl + hr));
    };
    const double v_end = k2 * path.u[n - 1] * path.theta[n - 1] / (d + k2 * path.theta[n - 1]);
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t i = j0 + r;
        const double hl = i == first_right ? path.x[i] - x1 : h;
        double A, Bc, C;
        coeffs(i, hl, A, Bc, C);
        lo[r] = A;
        di[r] = Bc;
        up[r] = C;
        rv[r] = -k2 * path.u[i] * path.theta[i];
        if (r + 1 == m) rv[r] -= C * v_end;
    }
    const auto vr = tridiagonal(lo, di, up, rv);
    for (std::size_t r = 0; r < m; ++r) path.v[j0 + r] = vr[r];
    path.v[n - 1] = v_end;

    double margin = kInf;
    for (std::size_t i = first_right; i < n; ++i) {
        const double X = path.x[i];
        const double vt = v_tilde(X);
        margin = std::min(margin, path.v[i] - vt);
        const double th = path.theta[i];
        path.res_theta[i] = c * (-rate * vt * (1.0 - th)) + k1 * (1.0 - th) * path.v[i];
        if (i >= j0 && i + 1 < n) {
            const double hl = i == first_right ? X - x1 : h;
            double A, Bc, C;
            coeffs(i, hl, A, Bc, C);
            const double left = i == first_right ? 0.0 : path.v[i - 1];
            path.res_v[i] = A * left + Bc * path.v[i] + C * path.v[i + 1] + k2 * path.u[i] * th;
        } else {
            path.res_v[i] = kNaN;
        }
        path.w[i] = grid_derivative(path.v, i, h);
    }
    out.comparison_margin = margin;
    {
        const std::size_t i = first_right;
        const double hl = path.x[i] - x1;
        if (i == j0) out.slope_right = path.v[i] * (hl + h) / (hl * h) - path.v[i + 1] * hl / (h * (hl + h));
        else out.slope_right = (path.v[i + 1] - 0.0) / (path.x[i + 1] - x1);
        path.w[i] = out.slope_right;
    }

    double worst = kInf;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isfinite(path.res_v[i])) worst = std::min(worst, path.res_v[i]);
        worst = std::min(worst, path.res_theta[i]);
    }
    out.min_residual = worst;
    const double tol = settings.residual_tolerance;
    if (worst < -tol) throw Error(ErrorKind::construction_failure, "lower solution residual " + num(worst) + " is negative");
    if (margin < -tol)
        throw Error(ErrorKind::construction_failure, "right piece falls below v_tilde by " + num(-margin));
    if (!(out.slope_left < 0.0) || out.slope_right < -tol)
        throw Error(ErrorKind::construction_failure,
                    "slopes at x1 not ordered: " + num(out.slope_left) + ", " + num(out.slope_right));
    if (path.theta.back() < 1.0 - 1e-3)
        throw Error(ErrorKind::construction_failure, "theta does not reach 1 at the right end");
    return out;
}

VThetaSolution solve_vtheta(const SpatialProfile& profile, const ModelSpec& spec, const Model2Params& q, double c,
                            const Model2Settings& settings) {
    VThetaSolution out;
    out.lower = subsolution(profile, spec, q, c, settings);
    const auto& lo_path = out.lower.path;
    out.upper = supersolution(profile, spec, q, c, lo_path.x, settings);
    const auto& up_path = out.upper;
    const double slack = settings.sandwich_slack;
    const std::size_t n = lo_path.size();
    for (std::size_t i = 0; i < n; ++i)
        if (lo_path.v[i] > up_path.v[i] + slack || lo_path.theta[i] > up_path.theta[i] + slack)
            throw Error(ErrorKind::ordering, "lower solution exceeds the upper one at x = " + num(lo_path.x[i]));

    out.alpha_support_begin = kInf;
    out.alpha_support_end = -kInf;
    for (std::size_t i = 0; i < profile.size(); ++i)
        if (profile.beta[i] > 0.0) {
            out.alpha_support_begin = std::min(out.alpha_support_begin, profile.x[i]);
            out.alpha_support_end = std::max(out.alpha_support_end, profile.x[i]);
        }

    const double h = settings.h, k1 = q.kappa1, k2 = q.kappa2, d = q.d, vs = q.v_star();
    const auto& U = lo_path.u;
    const auto& al = lo_path.alpha;
    std::vector<double> V = lo_path.v, T = lo_path.theta;
    V.front() = 0.0;
    T.front() = 0.0;
    V.back() = vs;

    const std::size_t m = n - 2;
    const double lo_c = 1.0 / (h * h) - c / (2 * h), up_c = 1.0 / (h * h) + c / (2 * h);
    std::vector<double> lo(m, lo_c), up(m, up_c), di(m), rv(m);
    for (std::size_t r = 0; r < m; ++r) di[r] = -2.0 / (h * h) - (d + al[r + 1] + k2);

    // trapezoid step of c Theta' + kappa1 V (1 - Theta) = 0, solved for the new node
    auto march = [&](const std::vector<double>& v, std::vector<double>& t) {
        t[0] = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i)
            t[i + 1] = (c * t[i] / h - 0.5 * k1 * v[i] * (1.0 - t[i]) - 0.5 * k1 * v[i + 1]) /
                       (c / h - 0.5 * k1 * v[i + 1]);
    };

    std::vector<double> Tn(n);
    const double w = settings.damping;
    for (int it = 1;; ++it) {
        if (it > settings.max_iterations) {
            std::string tail;
            for (std::size_t k = out.history.size() > 5 ? out.history.size() - 5 : 0; k < out.history.size(); ++k)
                tail += " " + num(out.history[k]);
            throw Error(ErrorKind::nonconvergence,
                        "fixed point not reached in " + std::to_string(settings.max_iterations) + " iterations; last updates" + tail);
        }
        for (std::size_t r = 0; r < m; ++r) {
            const std::size_t i = r + 1;
            rv[r] = -k2 * (U[i] * T[i] + V[i] * (1.0 - T[i]));
        }
        rv[m - 1] -= up_c * vs;
        const auto Vn = tridiagonal(lo, di, up, rv);
        double change = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            const double nv = V[r + 1] + w * (Vn[r] - V[r + 1]);
            change = std::max(change, std::abs(nv - V[r + 1]));
            V[r + 1] = nv;
        }
        march(V, Tn);
        for (std::size_t i = 0; i < n; ++i) {
            change = std::max(change, std::abs(Tn[i] - T[i]));
            T[i] = Tn[i];
        }
        out.history.push_back(change);
        out.iterations = it;
        if (change < settings.tolerance) break;
    }

    auto& path = out.path;
    path.kind = TripleKind::solution;
    path.c = c;
    path.v_star = vs;
    path.x = lo_path.x;
    path.u = U;
    path.alpha = al;
    path.v = V;
    path.theta = T;
    path.w.resize(n);
    path.res_v.assign(n, kNaN);
    path.res_theta.assign(n, kNaN);
    double rv_max = 0.0, rt_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        path.w[i] = grid_derivative(V, i, h);
        if (i > 0 && i + 1 < n) {
            const double r = (V[i + 1] - 2 * V[i] + V[i - 1]) / (h * h) + c * (V[i + 1] - V[i - 1]) / (2 * h) +
                             k2 * (U[i] - V[i]) * T[i] - (d + al[i]) * V[i];
            path.res_v[i] = r;
            rv_max = std::max(rv_max, std::abs(r));
        }
        if (i + 1 < n) {
            const double r = c * (T[i + 1] - T[i]) / h + 0.5 * k1 * (V[i] * (1 - T[i]) + V[i + 1] * (1 - T[i + 1]));
            path.res_theta[i] = r;
            rt_max = std::max(rt_max, std::abs(r));
        }
    }
    out.residual_v = rv_max;
    out.residual_theta = rt_max;
    if (rv_max > settings.residual_tolerance || rt_max > settings.residual_tolerance)
        throw Error(ErrorKind::nonconvergence, "discrete residuals " + num(rv_max) + ", " + num(rt_max) + " too large");

    out.lower_margin = kInf;
    out.upper_margin = kInf;
    for (std::size_t i = 0; i < n; ++i) {
        out.lower_margin = std::min({out.lower_margin, V[i] - lo_path.v[i], T[i] - lo_path.theta[i]});
        out.upper_margin = std::min({out.upper_margin, up_path.v[i] - V[i], up_path.theta[i] - T[i]});
    }
    if (out.lower_margin < -slack || out.upper_margin < -slack)
        throw Error(ErrorKind::ordering, "solution leaves the band between lower and upper solutions (margins " +
                                             num(out.lower_margin) + ", " + num(out.upper_margin) + ")");
    return out;
}

QuasimonotoneReport quasimonotone_check(const Model2Params& q, double alpha, const std::vector<Vec3>& samples) {
    q.validate();
    (void)alpha;  // alpha only enters the diagonal
    QuasimonotoneReport rep;
    rep.min_offdiagonal = kInf;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const double u = samples[s][0], v = samples[s][1], th = samples[s][2];
        if (!(0.0 <= v && v <= u && u <= 1.0 && 0.0 <= th && th <= 1.0)) {
            ++rep.rejected;
            continue;
        }
        ++rep.checked;
        const std::pair<const char*, double> partials[] = {
            {"dF1/dv", 0.0},
            {"dF1/dtheta", 0.0},
            {"dF2/du", q.kappa2 * th},
            {"dF2/dtheta", q.kappa2 * (u - v)},
            {"dF3/du", 0.0},
            {"dF3/dv", q.kappa1 * (1.0 - th)},
        };
        for (const auto& [name, val] : partials) {
            rep.min_offdiagonal = std::min(rep.min_offdiagonal, val);
            if (val < -1e-12) rep.violations.push_back({s, name, val});
        }
    }
    if (rep.checked == 0) rep.min_offdiagonal = 0.0;
    return rep;
}

Case2Report case2_demo(const Model2Params& q, double c, const Case2Settings& settings) {
    const auto sp = spectrum(c, q);
    if (sp.classification != SpectrumClass::complex_pair)
        throw Error(ErrorKind::regime, "c = " + num(c) + " is not in (c_sharp, 0) = (" + num(sp.c_sharp) + ", 0)");
    if (!(settings.seed_amplitude > 0.0)) throw Error(ErrorKind::invalid_parameter, "seed amplitude must be positive");

    Eigen::Matrix3d basis;
    for (int r = 0; r < 3; ++r) {
        basis(r, 0) = sp.eigvec1[r];
        basis(r, 1) = sp.w2[r];
        basis(r, 2) = sp.w3[r];
    }
    const Eigen::Matrix3d to_coords = basis.inverse();

    const double k1 = q.kappa1, k2 = q.kappa2, d = q.d;
    auto rhs = [&](double, const ode::State<3>& y) {
        return ode::State<3>{y[1], -c * y[1] - k2 * (1.0 - y[0]) * y[2] + d * y[0], -(k1 / c) * y[0] * (1.0 - y[2])};
    };
    ode::State<3> y0;
    for (std::size_t i = 0; i < 3; ++i)
        y0[i] = settings.seed_amplitude * (sp.w2[i] + settings.offset * sp.eigvec1[i]);

    Case2Report rep;
    rep.period = 2.0 * std::numbers::pi / sp.b;
    const double span = settings.periods * rep.period;
    ode::Options opt;
    opt.rtol = 1e-10;
    opt.atol = 1e-14 * settings.seed_amplitude;
    opt.max_step = settings.max_step;
    std::vector<ode::Event<3>> events{
        {[](double, const ode::State<3>& y) { return std::abs(y[0]) + std::abs(y[1]) + std::abs(y[2]) - 1.0; }, 1}};
    const auto sol = ode::integrate<3>(rhs, 0.0, y0, -span, events, opt);

    double prev_angle = 0.0;
    bool sigma = true;
    double angle0 = 0.0, angle_sigma = 0.0;
    for (std::size_t i = 0; i < sol.t.size(); ++i) {
        const auto& y = sol.y[i];
        const Eigen::Vector3d Y = to_coords * Eigen::Vector3d(y[0], y[1], y[2]);
        double ang = std::atan2(Y[2], Y[1]);
        if (i > 0) {
            while (ang - prev_angle > std::numbers::pi) ang -= 2 * std::numbers::pi;
            while (ang - prev_angle < -std::numbers::pi) ang += 2 * std::numbers::pi;
        } else {
            angle0 = ang;
        }
        prev_angle = ang;
        const double radius = std::hypot(Y[1], Y[2]);
        rep.x.push_back(sol.t[i]);
        rep.v.push_back(y[0]);
        rep.w.push_back(y[1]);
        rep.theta.push_back(y[2]);
        rep.angle.push_back(ang);
        rep.xi1.push_back(Y[0]);
        rep.radius.push_back(radius);
        if (sigma && std::abs(Y[0]) <= radius) {
            rep.sigma_until = sol.t[i];
            angle_sigma = ang;
        } else {
            sigma = false;
        }
        if (!rep.violated && i > 0 && (y[0] < 0.0 || y[2] < 0.0)) {
            const auto& yp = sol.y[i - 1];
            const std::size_t k = y[0] < 0.0 ? 0 : 2;
            const double s = yp[k] / (yp[k] - y[k]);
            rep.violated = true;
            rep.violation_x = sol.t[i - 1] + s * (sol.t[i] - sol.t[i - 1]);
            rep.component = k == 0 ? "V" : "Theta";
        }
    }
    rep.windings = std::abs(angle_sigma - angle0) / (2 * std::numbers::pi);
    rep.rotation_rate = rep.sigma_until != 0.0 ? std::abs((angle_sigma - angle0) / rep.sigma_until) : 0.0;
    rep.within_periods = rep.violated && std::abs(rep.violation_x) <= span;
    return rep;
}

}  // namespace travwave
