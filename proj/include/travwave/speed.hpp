#pragma once

#include "travwave/model.hpp"
#include "travwave/phaseplane.hpp"

namespace travwave {

// P_sharp(u*) - P_flat(u*) for the uncontrolled chart equation at speed c.
double manifold_gap(const ModelSpec& spec, double c, const PhaseSettings& settings = {});

double natural_speed(const ModelSpec& spec, double tol = 1e-10, const PhaseSettings& settings = {});

// Unstable manifold on [0, u*] joined to the stable manifold on [u*, 1].
PhaseTrajectory heteroclinic(const ModelSpec& spec, double c, const PhaseSettings& settings = {});

// Natural speed of u_t = u_xx + f_hat(u) after checking f - beta_max <= f_hat <= f
// and the bistable clauses for f_hat.
double modified_speed(const ModelSpec& spec, const ScalarFn& f_hat, double tol = 1e-10,
                      const PhaseSettings& settings = {}, int samples = 2001);

// Substitute that keeps f below u* and scales it by `factor` above.
ScalarFn scaled_substitute(const ModelSpec& spec, double factor);

}  // namespace travwave
