#pragma once

#include <algorithm>

#include "jumprl/model/params.hpp"
#include "jumprl/trajopt/schedule.hpp"
#include "jumprl/trajopt/trajectory.hpp"

namespace jumprl {

// Post-hoc validation of a solved jump, assembled straight from the model
// rather than through the optimizer's constraint machinery: collocation
// defects, stance-foot constancy, boundary conditions, joint/speed/torque
// limits, the friction cone and terrain clearance, plus the net
// center-of-mass displacement against the commanded jump.
struct TrajectoryCheck {
  double max_defect = 0.0;     // trapezoidal dynamics residual, mixed units
  double max_pin_drift = 0.0;  // stance foot motion away from its anchor [m]
  double max_boundary = 0.0;   // initial-state and final-pose rows
  double min_box = 0.0;        // joint range [rad] and normalized speed/torque margin
  double min_grf = 0.0;        // force-scaled normal floor and cone margin
  double min_clearance = 0.0;  // swing foot height above the terrain [m]
  double com_error = 0.0;      // |CoM displacement - commanded displacement| [m]

  double max_eq() const { return std::max({max_defect, max_pin_drift, max_boundary}); }
  double min_ineq() const { return std::min({min_box, min_grf, min_clearance}); }
  bool passes(double eq_tol = 1e-4, double ineq_tol = 1e-6, double com_tol = 0.02) const {
    return max_eq() < eq_tol && min_ineq() > -ineq_tol && com_error < com_tol;
  }
};

TrajectoryCheck check_jump_trajectory(const ModelParams& p, const KnotTrajectory& traj);

}  // namespace jumprl
