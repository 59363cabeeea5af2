#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "travwave/model.hpp"
#include "travwave/profile.hpp"

namespace travwave {

// Model 2 couples the scalar profile U to an infected fraction V and a
// cumulative damage Theta:
//   V'' + c V' + kappa2 (U - V) Theta - d V - alpha V = 0
//   c Theta' + kappa1 V (1 - Theta) = 0
// with alpha = beta / U taken from the scalar profile.

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

// Monic coefficients (1, c, -d, -kappa1 kappa2 / c) of the characteristic
// polynomial of the (V, W, Theta) linearisation at the zero state with U = 1.
std::array<double, 4> char_poly(double c, const Model2Params& params);
std::complex<double> char_poly_value(double c, const Model2Params& params, std::complex<double> lambda);

// Positive critical point of the characteristic polynomial.
double lambda_min(double c, const Model2Params& params);
double c_sharp(const Model2Params& params);

// Linearisation of (V, W, Theta) about zero with U = 1, alpha = 0.
Mat3 linearization(double c, const Model2Params& params);

enum class SpectrumClass { complex_pair, repeated_real, three_real };
const char* to_string(SpectrumClass k);

struct Model2Spectrum {
    double c = 0.0;
    Model2Params params;
    std::array<std::complex<double>, 3> roots{};
    double lambda1 = 0.0;  // the negative real root
    double a = 0.0;        // real part of the remaining pair (or the smaller of two positive roots)
    double b = 0.0;        // imaginary part, >= 0
    double lambda_min = 0.0;
    double c_sharp = 0.0;
    SpectrumClass classification = SpectrumClass::three_real;
    Vec3 eigvec1{};
    // Real and imaginary parts of the eigenvector of a + ib; they span the
    // plane Sigma. For three real roots these are the two remaining eigenvectors.
    Vec3 w2{};
    Vec3 w3{};
};

Model2Spectrum spectrum(double c, const Model2Params& params);

enum class TripleKind { supersolution, subsolution, solution };
const char* to_string(TripleKind k);

struct TriplePath {
    std::vector<double> x;
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> theta;
    std::vector<double> w;      // V'
    std::vector<double> alpha;  // beta / U on the same nodes
    // Signed residuals of the V and Theta equations at the nodes (NaN where
    // not evaluated, e.g. at junctions).
    std::vector<double> res_v;
    std::vector<double> res_theta;
    TripleKind kind = TripleKind::solution;
    double c = 0.0;
    double v_star = 0.0;

    std::size_t size() const { return x.size(); }
};

struct Model2Settings {
    double halfwidth = 0.0;  // 0 selects 20 / min(|lambda1|, a)
    double h = 0.02;
    double eps = 1e-3;
    double eps0 = 1e-3;
    int max_halvings = 10;
    double theta_tail = 1e-6;  // right end is placed where 1 - theta_lower drops below this
    double right_margin = 10.0;
    double damping = 0.5;
    int max_iterations = 20000;
    double tolerance = 1e-11;
    double residual_tolerance = 1e-6;
    double sandwich_slack = 1e-6;
    double profile_tolerance = 1e-5;
};

// Uniform nodes lo, lo + h, ... up to the first node >= hi.
std::vector<double> uniform_nodes(double lo, double hi, double h);

// Largest |U'' + c U' + f(U) - beta| over the profile nodes.
double scalar_residual(const SpatialProfile& profile, const ModelSpec& spec, double c);

// (U, min(U, V*), 1 - exp((kappa1 / c) int U)) on the given nodes; residuals
// of the V and Theta equations must be <= tolerance.
TriplePath supersolution(const SpatialProfile& profile, const ModelSpec& spec, const Model2Params& params, double c,
                         const std::vector<double>& nodes, const Model2Settings& settings = {});

struct Subsolution {
    TriplePath path;
    double x0 = 0.0;
    double x1 = 0.0;
    double eps = 0.0;
    double eps0 = 0.0;
    int halvings = 0;
    double theta_tilde = 0.0;  // Theta at x1
    double v_dagger = 0.0;
    double lambda0 = 0.0;
    double slope_left = 0.0;   // V'(x1-)
    double slope_right = 0.0;  // V'(x1+)
    double comparison_margin = 0.0;  // min of v - v_tilde right of x1
    double min_residual = 0.0;
};

// Explicit lower bound on the right piece: V_dagger (1 - exp(lambda0 (x - x1))).
double lambda0_of(double c, double kappa2_theta_plus_d);

Subsolution subsolution(const SpatialProfile& profile, const ModelSpec& spec, const Model2Params& params, double c,
                        const Model2Settings& settings = {});

struct VThetaSolution {
    TriplePath path;
    Subsolution lower;
    TriplePath upper;
    int iterations = 0;
    std::vector<double> history;  // sup-norm update per iteration
    double residual_v = 0.0;
    double residual_theta = 0.0;
    double lower_margin = 0.0;  // min over nodes of (V - v_lower, Theta - theta_lower)
    double upper_margin = 0.0;  // min over nodes of (v_upper - V, theta_upper - Theta)
    double alpha_support_begin = 0.0;
    double alpha_support_end = 0.0;
};

VThetaSolution solve_vtheta(const SpatialProfile& profile, const ModelSpec& spec, const Model2Params& params, double c,
                            const Model2Settings& settings = {});

struct QuasimonotoneViolation {
    std::size_t sample = 0;
    std::string partial;
    double value = 0.0;
};

struct QuasimonotoneReport {
    std::size_t checked = 0;
    std::size_t rejected = 0;  // samples outside 0 <= v <= u <= 1, theta in [0, 1]
    double min_offdiagonal = 0.0;
    std::vector<QuasimonotoneViolation> violations;
    bool passed() const { return violations.empty(); }
};

QuasimonotoneReport quasimonotone_check(const Model2Params& params, double alpha, const std::vector<Vec3>& samples);

struct Case2Settings {
    double seed_amplitude = 1e-6;
    double offset = 1e-8;  // component along eigvec1, relative to the amplitude
    double periods = 3.0;
    double max_step = 0.02;
};

struct Case2Report {
    double period = 0.0;  // 2 pi / b
    bool violated = false;
    double violation_x = 0.0;  // first x (going left) with V < 0 or Theta < 0
    std::string component;
    bool within_periods = false;
    double windings = 0.0;       // turns of the Sigma angle while Sigma dominates
    double rotation_rate = 0.0;  // |d angle / dx| over the same stretch
    double sigma_until = 0.0;    // leftmost x where the Sigma part still dominates
    std::vector<double> x, v, w, theta, angle, xi1, radius;
};

Case2Report case2_demo(const Model2Params& params, double c, const Case2Settings& settings = {});

}  // namespace travwave
