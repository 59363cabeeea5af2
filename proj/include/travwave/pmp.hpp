#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "travwave/model.hpp"
#include "travwave/phaseplane.hpp"

namespace travwave {

enum class ShotOutcome { hit, beta_exhausted, p_zero, saturated, left_domain };
const char* to_string(ShotOutcome outcome);

struct ShotResult {
    ShotOutcome outcome = ShotOutcome::hit;
    double u1 = 0.0;
    double u_end = 0.0;  // u2 when the stable manifold is met
    double beta_end = 0.0;
    // Shooting function: beta(u2) on a hit, minus the remaining gap to P_sharp
    // when the control dies out or P collapses.
    double phi = 0.0;
    PhaseTrajectory arc;
};

struct PmpSettings {
    PhaseSettings phase;      // manifolds
    double shot_rtol = 1e-10;
    double shot_atol = 1e-13;
    double beta_start = 1e-10;
    double scan_step = 1e-3;
    double speed_guard = 1e-9;
    std::optional<double> c_star;  // skips the natural speed computation
};

// Unstable and stable manifolds at speed c, shared by all shots.
struct ManifoldPair {
    double c = 0.0;
    PhaseTrajectory flat;
    PhaseTrajectory sharp;
};

ManifoldPair manifolds_at(const ModelSpec& spec, double c, const PhaseSettings& settings = {});

ShotResult shoot_from(const ModelSpec& spec, const ManifoldPair& m, double u1, const PmpSettings& settings = {});
ShotResult shoot_from(const ModelSpec& spec, double c, double u1, const PmpSettings& settings = {});

// (u1, phi(u1)) on the scan grid used by optimal_profile, at any speed.
std::vector<std::pair<double, double>> phi_scan(const ModelSpec& spec, double c, const PmpSettings& settings = {});

struct ShootingDiagnostics {
    bool converged = false;
    bool trivial = false;  // c at or below the natural speed
    int shots = 0;
    double bracket = 0.0;  // final width of the u1 bracket
    double phi = 0.0;      // shooting function at the returned u1
    std::vector<double> roots;
    std::vector<std::pair<double, double>> phi_table;  // (u1, phi) scan
};

struct OptimalProfile {
    double c = 0.0;
    double c_star = 0.0;
    double u1 = 0.0;
    double u2 = 0.0;
    double cost = 0.0;
    PhaseTrajectory trajectory;  // P, beta and adjoint Y on [0, 1]
    std::size_t arc_begin = 0;   // node range of the controlled arc
    std::size_t arc_end = 0;
    ShootingDiagnostics diagnostics;
};

// u1 solving phi(u1) = 0 by a scan of step settings.scan_step and bisection
// down to tol, smallest root first.
OptimalProfile optimal_profile(const ModelSpec& spec, double c, double tol = 1e-10, const PmpSettings& settings = {});

struct PmpResidual {
    double adjoint = 0.0;  // max midpoint residual of the adjoint identity on the arc
    int pointwise_failures = 0;
    double pointwise_worst = 0.0;  // largest improvement found by another control value
    double boundary = 0.0;         // max |Y + L_beta(., 0)| at u1 and u2
};

PmpResidual pmp_residual(const OptimalProfile& profile, const ModelSpec& spec);

struct EffortRow {
    double c = 0.0;
    double effort = 0.0;
    double u1 = 0.0;
    double u2 = 0.0;
    bool ok = false;
    std::string message;
};

// Minimum cost per speed; rows are independent and computed in parallel.
std::vector<EffortRow> effort_curve(const ModelSpec& spec, std::vector<double> c_grid, double tol = 1e-10,
                                    const PmpSettings& settings = {});

}  // namespace travwave
