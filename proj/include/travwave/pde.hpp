#pragma once

#include <functional>
#include <vector>

#include "travwave/model.hpp"
#include "travwave/model2.hpp"
#include "travwave/profile.hpp"

namespace travwave {

// Explicit method-of-lines evolution on a uniform grid with zero-slope ends,
// optionally in a frame moving with speed frame_speed (z = x - frame_speed t).

struct Grid {
    double lo = -60.0;
    double hi = 60.0;
    double dx = 0.05;
    double dt = 0.0;  // 0 selects 0.4 dx^2
    double snapshot_interval = 0.5;
    double frame_speed = 0.0;

    std::vector<double> nodes() const;
};

struct GridState {
    double t = 0.0;
    std::vector<double> u;
    std::vector<double> v;      // empty unless Model 2
    std::vector<double> theta;  // empty for the scalar equation
};

// Control alpha(xi) attached to the coordinate xi = x - speed t.
struct MovingControl {
    std::function<double(double)> alpha;
    double speed = 0.0;

    bool empty() const { return !alpha; }
};

// Physical control L(U, beta) of a scalar profile, for f_controlled.
MovingControl effort_control(const SpatialProfile& profile, const ModelSpec& spec, double speed);
// Per-capita removal beta / U of a scalar profile, as used by Model 2.
MovingControl removal_control(const SpatialProfile& profile, double speed);

// Initial data on the grid nodes: U from a scalar profile, Theta of the tree
// model from the closed form, (U, V, Theta) from a Model 2 path (V* and 1
// beyond its right end, zero beyond its left end).
GridState sample_profile(const SpatialProfile& profile, const Grid& grid);
GridState sample_tree(const SpatialProfile& profile, double kappa1, double c, const Grid& grid);
GridState sample_triple(const TriplePath& path, const Grid& grid);

struct EvolutionRecord {
    std::vector<double> x;  // frame coordinates
    std::vector<GridState> snapshots;
    double frame_speed = 0.0;
    double dt = 0.0;
    std::size_t steps = 0;
    // sup over snapshots of |field(t) - field(0)|
    double drift_u = 0.0;
    double drift_v = 0.0;
    double drift_theta = 0.0;
    double field_min = 0.0;  // over all fields and steps
    double field_max = 0.0;
    double max_v_minus_u = -1.0;     // Model 2 ordering v <= u
    double max_theta_decrease = 0.0;  // per step, at any node
    double cost_alpha = 0.0;          // int int alpha dx dt
    double cost_theta = 0.0;          // int int theta dx dt
};

EvolutionRecord evolve_scalar(const ModelSpec& spec, const GridState& initial, const MovingControl& control, double T,
                              const Grid& grid = {});
EvolutionRecord evolve_model1(const ModelSpec& spec, const GridState& initial, const MovingControl& control,
                              double kappa1, double T, const Grid& grid = {});
EvolutionRecord evolve_model2(const ModelSpec& spec, const GridState& initial, const MovingControl& control,
                              const Model2Params& params, double T, const Grid& grid = {});

struct SpeedFit {
    double speed = 0.0;  // lab-frame speed of the level crossing
    double std_error = 0.0;
    std::size_t points = 0;
};

// Least-squares slope of the position where u first reaches `level`, after
// discarding the first `discard` fraction of the run.
SpeedFit front_speed(const EvolutionRecord& record, double level = 0.5, double discard = 0.2, double margin = 10.0);

// Trapezoid integral of a field over the grid.
double grid_integral(const std::vector<double>& x, const std::vector<double>& f);

}  // namespace travwave
