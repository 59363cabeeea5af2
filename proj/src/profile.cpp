#include "travwave/profile.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "travwave/error.hpp"

namespace travwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

double inverse_slope_integral(const PhaseTrajectory& t, double a, double b, double tol) {
    if (a == b) return 0.0;
    auto g = [&t](double V) { return 1.0 / t.p_at(V); };
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(g, a, b, 12, tol);
}

// Exact integral of the cubic Hermite interpolant of U with slopes P.
double hermite_integral(double h, double u0, double u1, double p0, double p1) {
    return 0.5 * h * (u0 + u1) + h * h / 12.0 * (p0 - p1);
}

double left_rate(const ModelSpec& spec, double c, double u0, double p0) {
    if (spec.df(0.0) < 0.0) return saddle_eigenvalues(spec, c, 0.0).first;
    return u0 > 0.0 ? p0 / u0 : 0.0;
}

double right_rate(const ModelSpec& spec, double c, double un, double pn) {
    if (spec.df(1.0) < 0.0) return saddle_eigenvalues(spec, c, 1.0).second;
    return un < 1.0 ? -pn / (1.0 - un) : 0.0;
}

}  // namespace

double SpatialProfile::u_at(double X) const {
    if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (X <= x.front()) return u.front() * std::exp(lambda_left * (X - x.front()));
    if (X >= x.back()) return 1.0 - (1.0 - u.back()) * std::exp(lambda_right * (X - x.back()));
    const auto it = std::upper_bound(x.begin(), x.end(), X);
    const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    const double h = x[i + 1] - x[i];
    const double s = (X - x[i]) / h, s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * u[i] + (s3 - 2 * s2 + s) * h * p[i] + (-2 * s3 + 3 * s2) * u[i + 1] +
           (s3 - s2) * h * p[i + 1];
}

double SpatialProfile::p_at(double X) const {
    if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (X <= x.front()) return lambda_left * u_at(X);
    if (X >= x.back()) return -lambda_right * (1.0 - u_at(X));
    const auto it = std::upper_bound(x.begin(), x.end(), X);
    const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    const double h = x[i + 1] - x[i];
    const double s = (X - x[i]) / h, s2 = s * s;
    return (6 * s2 - 6 * s) / h * (u[i] - u[i + 1]) + (3 * s2 - 4 * s + 1) * p[i] + (3 * s2 - 2 * s) * p[i + 1];
}

double SpatialProfile::beta_at(double X) const {
    if (x.empty() || X <= x.front() || X >= x.back()) return 0.0;
    const auto it = std::upper_bound(x.begin(), x.end(), X);
    const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    const double s = (X - x[i]) / (x[i + 1] - x[i]);
    return (1.0 - s) * beta[i] + s * beta[i + 1];
}

SpatialProfile reconstruct_x(const PhaseTrajectory& traj, const ModelSpec& spec, const ReconstructSettings& settings) {
    if (traj.size() < 2) throw Error(ErrorKind::invalid_trajectory, "need at least two nodes");
    for (std::size_t i = 1; i + 1 < traj.size(); ++i)
        if (!(traj.p[i] > 0.0))
            throw Error(ErrorKind::invalid_trajectory, "P = " + num(traj.p[i]) + " at interior node U = " + num(traj.u[i]));

    // Nodes with P > 0 and strictly increasing U (junction duplicates collapse).
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (!(traj.p[i] > 0.0)) continue;
        if (!idx.empty() && traj.u[i] <= traj.u[idx.back()]) {
            idx.back() = i;
            continue;
        }
        idx.push_back(i);
    }
    if (idx.size() < 2) throw Error(ErrorKind::invalid_trajectory, "fewer than two nodes with P > 0");
    const double us = spec.u_star;
    if (us < traj.u[idx.front()] || us > traj.u[idx.back()])
        throw Error(ErrorKind::invalid_trajectory, "trajectory does not cross u_star = " + num(us));

    const std::size_t n = idx.size();
    std::vector<double> xs(n);
    std::size_t k = 0;
    while (k + 1 < n && traj.u[idx[k + 1]] < us) ++k;
    // nodes k and k+1 straddle the anchor
    xs[k] = -inverse_slope_integral(traj, traj.u[idx[k]], us, settings.quad_tol);
    if (k + 1 < n) xs[k + 1] = inverse_slope_integral(traj, us, traj.u[idx[k + 1]], settings.quad_tol);
    for (std::size_t j = k; j-- > 0;)
        xs[j] = xs[j + 1] - inverse_slope_integral(traj, traj.u[idx[j]], traj.u[idx[j + 1]], settings.quad_tol);
    for (std::size_t j = k + 2; j < n; ++j)
        xs[j] = xs[j - 1] + inverse_slope_integral(traj, traj.u[idx[j - 1]], traj.u[idx[j]], settings.quad_tol);

    SpatialProfile out;
    out.c = traj.c;
    out.u_star = us;
    const double u0 = traj.u[idx.front()], p0 = traj.p[idx.front()];
    const double un = traj.u[idx.back()], pn = traj.p[idx.back()];
    out.lambda_left = left_rate(spec, traj.c, u0, p0);
    out.lambda_right = right_rate(spec, traj.c, un, pn);

    auto push = [&out](double X, double U, double P, double Upp, double b, double a) {
        out.x.push_back(X);
        out.u.push_back(U);
        out.p.push_back(P);
        out.upp.push_back(Upp);
        out.beta.push_back(b);
        out.alpha.push_back(a);
    };
    const int m = std::max(settings.tail_points, 1);
    if (out.lambda_left > 0.0) {
        const double width = settings.tail_pad / out.lambda_left;
        for (int j = m; j >= 1; --j) {
            const double dx = -width * j / m;
            const double U = u0 * std::exp(out.lambda_left * dx);
            push(xs.front() + dx, U, out.lambda_left * U, out.lambda_left * out.lambda_left * U, 0.0, 0.0);
        }
    }
    out.core_begin = out.x.size();
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t i = idx[j];
        const double U = traj.u[i];
        const double b = traj.beta.empty() ? traj.beta_at(U) : traj.beta[i];
        push(xs[j], U, traj.p[i], i < traj.dp.size() ? traj.p[i] * traj.dp[i] : 0.0, b, b == 0.0 ? 0.0 : spec.L(U, b));
    }
    out.core_end = out.x.size();
    if (out.lambda_right < 0.0) {
        const double width = settings.tail_pad / -out.lambda_right;
        for (int j = 1; j <= m; ++j) {
            const double dx = width * j / m;
            const double gap = (1.0 - un) * std::exp(out.lambda_right * dx);
            push(xs.back() + dx, 1.0 - gap, -out.lambda_right * gap, -out.lambda_right * out.lambda_right * gap, 0.0, 0.0);
        }
    }
    return out;
}

std::vector<double> cumulative_u_integral(const SpatialProfile& profile) {
    std::vector<double> I(profile.size(), 0.0);
    if (profile.x.empty()) return I;
    double acc = 0.0;
    if (profile.u.front() > 0.0) acc = profile.lambda_left > 0.0 ? profile.u.front() / profile.lambda_left : kInf;
    I[0] = acc;
    for (std::size_t i = 1; i < profile.size(); ++i) {
        acc += hermite_integral(profile.x[i] - profile.x[i - 1], profile.u[i - 1], profile.u[i], profile.p[i - 1],
                                profile.p[i]);
        I[i] = acc;
    }
    return I;
}

SpatialProfile theta_model1(SpatialProfile profile, double kappa1, double c, const ThetaSettings& settings) {
    if (!(c < 0.0))
        throw Error(ErrorKind::nonexistence, "a traveling tree profile needs c < 0, got c = " + num(c));
    if (!(kappa1 > 0.0)) throw Error(ErrorKind::invalid_parameter, "kappa1 must be positive");
    if (profile.x.empty()) throw Error(ErrorKind::invalid_trajectory, "empty profile");
    if (profile.u.front() > 0.0 && !(profile.lambda_left > 0.0))
        throw Error(ErrorKind::integrability, "U does not decay as x -> -inf (left rate " + num(profile.lambda_left) + ")");

    const double rate = kappa1 / c;
    auto theta_of = [rate](double I) { return -std::expm1(rate * I); };
    auto I = cumulative_u_integral(profile);
    if (!std::isfinite(I.front())) throw Error(ErrorKind::integrability, "left tail integral of U diverges");

    // Past the grid U -> 1, so the integral grows linearly and Theta -> 1.
    const double x_end = profile.x.back() + settings.max_extension;
    const double h = profile.lambda_right < 0.0 ? std::min(1.0, 0.5 / -profile.lambda_right) : 1.0;
    while (1.0 - theta_of(I.back()) > settings.right_tolerance) {
        if (profile.x.back() >= x_end)
            throw Error(ErrorKind::integrability, "Theta does not approach 1 within the extension limit");
        const double X = profile.x.back() + h;
        const double U = profile.u_at(X);
        const double P = profile.lambda_right < 0.0 ? -profile.lambda_right * (1.0 - U) : 0.0;
        const double dI = hermite_integral(h, profile.u.back(), U, profile.p.back(), P);
        profile.x.push_back(X);
        profile.u.push_back(U);
        profile.p.push_back(P);
        if (!profile.upp.empty()) profile.upp.push_back(profile.lambda_right * P);
        profile.beta.push_back(0.0);
        profile.alpha.push_back(0.0);
        I.push_back(I.back() + dI);
    }
    profile.theta.resize(profile.size());
    for (std::size_t i = 0; i < profile.size(); ++i) profile.theta[i] = theta_of(I[i]);
    return profile;
}

CumulativeU::CumulativeU(const SpatialProfile& p) : p_(p) {
    if (p.x.empty()) throw Error(ErrorKind::invalid_trajectory, "empty profile");
    const double u0 = p.u.front();
    if (u0 <= 0.0) head_ = 0.0;
    else head_ = p.lambda_left > 0.0 ? u0 / p.lambda_left : kInf;
    acc_.resize(p.size());
    acc_[0] = head_;
    for (std::size_t i = 1; i < p.size(); ++i) acc_[i] = acc_[i - 1] + segment(p.x[i - 1], p.x[i]);
}

double CumulativeU::operator()(double X) const {
    const auto& x = p_.x;
    if (X <= x.front()) {
        if (!std::isfinite(head_) || head_ == 0.0) return head_;
        return head_ * std::exp(p_.lambda_left * (X - x.front()));
    }
    if (X >= x.back()) {
        const double s = X - x.back();
        const double gap = 1.0 - p_.u.back();
        if (p_.lambda_right < 0.0) return acc_.back() + s - gap * (-std::expm1(p_.lambda_right * s)) / -p_.lambda_right;
        return acc_.back() + p_.u.back() * s;
    }
    const auto it = std::upper_bound(x.begin(), x.end(), X);
    const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    return acc_[i] + segment(x[i], X);
}

double CumulativeU::segment(double a, double b) const {
    if (a == b) return 0.0;
    return boost::math::quadrature::gauss<double, 7>::integrate([this](double X) { return p_.u_at(X); }, a, b);
}

DecayReport decay_check(const SpatialProfile& profile, const ModelSpec& spec) {
    DecayReport r;
    const double us = spec.u_star;
    if (profile.x.empty()) {
        r.notes.push_back("empty profile");
        return r;
    }
    // anchor: first crossing of u_star
    std::size_t a = 0;
    while (a < profile.size() && profile.u[a] < us) ++a;
    if (a == profile.size()) {
        r.notes.push_back("profile never reaches u_star");
        r.x_anchor = profile.x.back();
    } else if (a == 0) {
        r.x_anchor = profile.x.front();
    } else {
        const double w = (us - profile.u[a - 1]) / (profile.u[a] - profile.u[a - 1]);
        r.x_anchor = profile.x[a - 1] + w * (profile.x[a] - profile.x[a - 1]);
    }

    r.c_bound = kInf;
    for (std::size_t i = 0; i < profile.size() && profile.x[i] <= r.x_anchor; ++i)
        if (profile.u[i] > 0.0) r.c_bound = std::min(r.c_bound, profile.p[i] / profile.u[i]);
    if (!std::isfinite(r.c_bound)) r.c_bound = 0.0;
    if (!(r.c_bound > 0.0)) {
        ++r.violations;
        r.notes.push_back("no positive lower bound for U'/U left of the anchor");
    }
    for (std::size_t i = 0; i < profile.size() && profile.x[i] <= r.x_anchor; ++i) {
        const double bound = us * std::exp(-r.c_bound * (r.x_anchor - profile.x[i]));
        const double excess = profile.u[i] - bound;
        if (excess > 1e-6 * bound + 1e-14) {
            ++r.violations;
            r.worst_violation = std::max(r.worst_violation, excess);
        }
    }

    // asymptotic rate: least-squares slope of log U on the deepest trajectory nodes
    std::vector<std::pair<double, double>> pts;
    for (double level : {1e-3, 1e-1}) {
        pts.clear();
        for (std::size_t i = profile.core_begin; i < profile.core_end; ++i)
            if (profile.u[i] > 0.0 && profile.u[i] <= level * us) pts.emplace_back(profile.x[i], std::log(profile.u[i]));
        if (pts.size() >= 3) break;
    }
    if (pts.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto [X, Y] : pts) {
            sx += X;
            sy += Y;
            sxx += X * X;
            sxy += X * Y;
        }
        const double nn = static_cast<double>(pts.size());
        const double den = nn * sxx - sx * sx;
        if (den > 0.0) r.c_asymptotic = (nn * sxy - sx * sy) / den;
    } else {
        r.notes.push_back("too few nodes in the left tail to fit a decay rate");
    }

    const auto I = cumulative_u_integral(profile);
    if (a == 0) {
        r.left_integral = I.front();
    } else if (a == profile.size()) {
        r.left_integral = kInf;
    } else {
        const double h = r.x_anchor - profile.x[a - 1];
        r.left_integral = I[a - 1] + 0.5 * h * (profile.u[a - 1] + us);
    }
    r.finite = std::isfinite(r.left_integral) && r.c_bound > 0.0;
    if (!r.finite) r.notes.push_back("integral of U over the left half-line is not finite");
    return r;
}

}  // namespace travwave
