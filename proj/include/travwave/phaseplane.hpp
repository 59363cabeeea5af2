#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "travwave/model.hpp"

namespace travwave {

enum class TrajectoryKind { unstable_manifold, stable_manifold, controlled, concatenated };
enum class EndReason { reached_target, p_zero, event };

const char* to_string(TrajectoryKind kind);
const char* to_string(EndReason reason);

// Sampled curve U -> P(U) in the (U, P = U') chart. Nodes are nondecreasing in
// U; a repeated abscissa only occurs at a junction between concatenated pieces.
struct PhaseTrajectory {
    std::vector<double> u;
    std::vector<double> p;
    std::vector<double> dp;     // dP/dU at the nodes
    std::vector<double> beta;   // control samples, empty if uncontrolled
    std::vector<double> dbeta;  // dbeta/dU, same length as beta
    std::vector<double> y;      // adjoint samples, optional
    ScalarFn beta_fn;           // exact control when known (feedback constructions)
    double c = 0.0;
    TrajectoryKind kind = TrajectoryKind::controlled;
    EndReason end = EndReason::reached_target;
    // Abscissa where the trajectory ended: target, event location, or the
    // extrapolated zero of P.
    double end_u = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::size_t> junctions;  // first node index of each later piece

    std::size_t size() const { return u.size(); }
    bool empty() const { return u.empty(); }
    bool has_beta() const { return !beta.empty() || static_cast<bool>(beta_fn); }
    double u_front() const { return u.front(); }
    double u_back() const { return u.back(); }
    bool covers(double U) const { return !u.empty() && U >= u.front() && U <= u.back(); }

    double p_at(double U) const;
    double dp_at(double U) const;
    double beta_at(double U) const;
    double y_at(double U) const;  // linear in U

    // Index i with u[i] <= U <= u[i+1] and u[i] < u[i+1].
    std::size_t segment(double U) const;
};

struct PhaseSettings {
    double rtol = 1e-10;
    double atol = 1e-12;
    double seed = 1e-8;     // distance from the saddle at which a manifold is seeded
    double p_floor = 1e-7;  // P below this counts as having reached zero
    double max_step = 5e-3; // keeps cubic Hermite lookups well below the tolerances
};

struct PhaseEvent {
    std::function<double(double u, double p)> g;
    int direction = 0;
};

std::pair<double, double> saddle_eigenvalues(const ModelSpec& spec, double c, double u_eq);

PhaseTrajectory unstable_manifold(const ModelSpec& spec, double c, const ScalarFn& beta, double u_stop,
                                  const PhaseSettings& settings = {});
PhaseTrajectory stable_manifold(const ModelSpec& spec, double c, double u_stop, const PhaseSettings& settings = {});

// dP/dU = -c + (beta(U) - f(U)) / P from (u_from, p_from) towards u_to, in
// either direction. Stops at u_to, when P reaches the floor, or at `event`.
PhaseTrajectory integrate_pu(const ModelSpec& spec, double c, const ScalarFn& beta, double u_from, double p_from,
                             double u_to, const PhaseEvent* event = nullptr, const PhaseSettings& settings = {});

// Keeps the part of `traj` with U in [u_lo, u_hi], inserting interpolated end nodes.
PhaseTrajectory restrict_to(const PhaseTrajectory& traj, double u_lo, double u_hi);

// Joins pieces that meet end to start; the control becomes zero where a piece has none.
PhaseTrajectory concatenate(const std::vector<PhaseTrajectory>& pieces);

// Largest mismatch between the derivative of the interpolant and the chart
// equation at segment midpoints with P >= p_min, relative to max(1, |rhs|).
double chart_residual(const ModelSpec& spec, const PhaseTrajectory& traj, double p_min = 1e-4);

// First sign change of d along the increasing grid (direction +1: from
// negative to non-negative, -1: the reverse), refined by bisection. NaN if none.
double first_crossing(const ScalarFn& d, const std::vector<double>& grid, int direction);

// P of the trajectory, or zero outside its range (manifolds that reached P = 0).
double p_or_zero(const PhaseTrajectory& traj, double U);

// Uniform bound on P for a profile with speed c and M = max f.
double slope_bound(double c, double max_f);

}  // namespace travwave
