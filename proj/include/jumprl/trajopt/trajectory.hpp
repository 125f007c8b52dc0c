#pragma once

#include <array>
#include <string>
#include <vector>

#include "jumprl/control/controller.hpp"
#include "jumprl/model/params.hpp"
#include "jumprl/trajopt/schedule.hpp"

namespace jumprl {

// Optimizer output: state and torque at every knot of the phase schedule.
struct KnotTrajectory {
  JumpTarget target;
  PhaseSchedule schedule;
  std::vector<Vec7> q;
  std::vector<Vec7> qd;
  std::vector<Vec4> tau;

  int num_knots() const { return static_cast<int>(q.size()); }
  double knot_time(int k) const { return k * schedule.h; }
};

// Dense 1 ms reference used by the controller and the environment.
struct ReferenceTrajectory {
  static constexpr double kSampleDt = 0.001;

  JumpTarget target;
  PhaseSchedule schedule;
  std::vector<ControlRefs> samples;

  int size() const { return static_cast<int>(samples.size()); }
  double duration() const { return (size() - 1) * kSampleDt; }

  // Sample covering time t; clamped to the ends.
  const ControlRefs& at_time(double t) const;
};

// Hip-frame foot position and velocity references implied by a desired state.
void extract_foot_refs(const ModelParams& p, const Vec7& q_d, const Vec7& qd_d,
                       std::array<Vec2, 2>& p_d, std::array<Vec2, 2>& v_d);

// Linear interpolation of the knot states to the 1 ms grid; knot-time samples
// reproduce the knot values exactly and foot references are re-derived from
// the interpolated configuration.
ReferenceTrajectory interpolate(const ModelParams& p, const KnotTrajectory& knots);

std::string phase_name(PhaseLabel ph);
PhaseLabel phase_from_name(const std::string& name);

// Text table, one row per 1 ms sample:
//   t q_d[7] qd_d[7] tau_d[4] p_d[4] v_d[4] phase
// with the jump target and schedule in the header. Values are written with
// enough digits to round-trip bit exactly.
void save_trajectory(const ReferenceTrajectory& traj, const std::string& path);
ReferenceTrajectory load_trajectory(const std::string& path);

}  // namespace jumprl
