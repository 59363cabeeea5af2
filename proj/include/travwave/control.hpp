#pragma once

#include <optional>
#include <vector>

#include "travwave/model.hpp"
#include "travwave/phaseplane.hpp"

namespace travwave {

struct CostQuadrature {
    double value = 0.0;   // composite Simpson after one refinement
    double coarse = 0.0;  // composite Simpson on the node set
};

// J = int L(U, beta(U)) / P(U) dU over the trajectory. Infinite when the
// control reaches the finiteness boundary somewhere.
CostQuadrature cost_quadrature(const ModelSpec& spec, const PhaseTrajectory& traj, double p_tol = 1e-12);
double cost_of(const ModelSpec& spec, const PhaseTrajectory& traj);

enum class BangStatus { controlled, natural_speed, no_control_needed };

struct BangControl {
    BangStatus status = BangStatus::controlled;
    double gamma = 0.0;
    double u0 = 0.0;
    double c = 0.0;
    double c_star = 0.0;
    PhaseTrajectory trajectory;  // empty when no control is needed
};

struct BangSettings {
    double gamma_tol = 1e-8;
    double gamma_cap = 1e6;
    double speed_guard = 1e-9;
    // The minimal gamma pushes the junction towards the origin, where P is tiny.
    PhaseSettings phase{1e-10, 1e-14, 1e-8, 1e-11};
};

// beta = gamma on (u0, u*) with the smallest gamma whose backward orbit from
// (u*, P_sharp(u*)) meets P_flat.
BangControl bang_control(const ModelSpec& spec, double c, const BangSettings& settings = {});

// Crossing abscissa of the backward orbit with constant control gamma, or a
// negative value when it reaches U = 0 without meeting P_flat.
double bang_crossing(const ModelSpec& spec, double c, double gamma, const PhaseTrajectory& flat,
                     const PhaseTrajectory& sharp, const PhaseSettings& settings = {});

struct ConcatProfile {
    double c = 0.0;
    double c_prime = 0.0;
    double c_hat = 0.0;
    double c_star = 0.0;
    double a = 0.0;       // left endpoint of the P_{c'} orbit on the U axis
    double a_crit = 0.0;  // supremum of admissible left endpoints
    double u1 = 0.0;
    double u2 = 0.0;        // crossing of P_{c'} with P_sharp
    double u2_tilde = 0.0;  // crossing of the controlled arc with P_sharp
    double delta = 0.0;     // lower bound of beta_max - beta_tilde where beta_tilde > 0
    double cost = 0.0;
    ScalarFn beta_tilde;
    PhaseTrajectory p_cprime;  // orbit of the substitute equation at speed c'
    std::vector<PhaseTrajectory> pieces;
    PhaseTrajectory trajectory;  // concatenation of the pieces
};

// Finite-cost concatenation through the substitute reaction f_hat. Without
// c_prime the midpoint of (c, c_hat) is used.
ConcatProfile finite_cost_control(const ModelSpec& spec, double c, std::optional<double> c_prime,
                                  const ScalarFn& f_hat, const PhaseSettings& settings = {});

}  // namespace travwave
