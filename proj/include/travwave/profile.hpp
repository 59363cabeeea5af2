#pragma once

#include <string>
#include <vector>

#include "travwave/model.hpp"
#include "travwave/phaseplane.hpp"

namespace travwave {

// Traveling profile in physical space, translated so that U(0) = u_star.
struct SpatialProfile {
    std::vector<double> x;
    std::vector<double> u;
    std::vector<double> p;      // U'(x)
    std::vector<double> upp;    // U''(x), empty for hand-built profiles
    std::vector<double> beta;   // control in the (U, P) chart
    std::vector<double> alpha;  // L(U, beta), the physical control
    std::vector<double> theta;  // empty unless a tree profile was attached
    double c = 0.0;
    double u_star = 0.0;
    // Tail rates: U ~ e^{lambda_left x} as x -> -inf, 1 - U ~ e^{lambda_right x} as x -> +inf.
    double lambda_left = 0.0;
    double lambda_right = 0.0;
    // Node range that comes from the trajectory; the rest is tail padding.
    std::size_t core_begin = 0;
    std::size_t core_end = 0;

    std::size_t size() const { return x.size(); }
    // Cubic Hermite in x using U' = P; exponential tails outside the grid.
    double u_at(double X) const;
    double p_at(double X) const;
    // Linear in x between nodes, zero outside.
    double beta_at(double X) const;
};

struct ReconstructSettings {
    double tail_pad = 10.0;  // padding on each side, in units of 1/|lambda|
    int tail_points = 40;
    double quad_tol = 1e-12;
};

// x(U) = int_{u_star}^{U} dV / P(V) on the trajectory nodes.
SpatialProfile reconstruct_x(const PhaseTrajectory& traj, const ModelSpec& spec, const ReconstructSettings& settings = {});

struct ThetaSettings {
    // The right tail is extended until 1 - Theta drops below this.
    double right_tolerance = 1e-7;
    double max_extension = 1e4;
};

// Theta(x) = 1 - exp((kappa1 / c) int_{-inf}^{x} U), which exists only for c < 0.
SpatialProfile theta_model1(SpatialProfile profile, double kappa1, double c, const ThetaSettings& settings = {});

// Integral of U over (-inf, x_i] at every node, using the left exponential tail.
std::vector<double> cumulative_u_integral(const SpatialProfile& profile);

// Integral of U over (-inf, X] at arbitrary X, using the profile tails;
// +inf when U does not decay on the left.
class CumulativeU {
public:
    explicit CumulativeU(const SpatialProfile& profile);
    double operator()(double X) const;

private:
    double segment(double a, double b) const;

    const SpatialProfile& p_;
    double head_ = 0.0;
    std::vector<double> acc_;
};

struct DecayReport {
    double x_anchor = 0.0;      // where U = u_star
    double c_bound = 0.0;       // min P/U over nodes left of the anchor
    double c_asymptotic = 0.0;  // slope of log U on the far-left nodes
    int violations = 0;         // nodes with U > u_star exp(-c_bound (x_anchor - x))
    double worst_violation = 0.0;
    double left_integral = 0.0;  // int_{-inf}^{x_anchor} U dx
    bool finite = false;
    std::vector<std::string> notes;
};

DecayReport decay_check(const SpatialProfile& profile, const ModelSpec& spec);

}  // namespace travwave
