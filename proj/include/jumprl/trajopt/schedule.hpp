#pragma once

#include <cmath>
#include <stdexcept>

#include "jumprl/control/controller.hpp"
#include "jumprl/model/dynamics.hpp"
#include "jumprl/model/params.hpp"

namespace jumprl {

// Task geometry constants shared by the optimizer, the environment and the
// reward: the jump starts from a 0.25 m crouch and ends standing 0.3 m above
// the landing platform, whose edge sits 0.25 m short of the target distance.
constexpr double kCrouchHeight = 0.25;
constexpr double kStandingHeight = 0.3;
constexpr double kPreLandExtension = 0.3;  // feet this far below hips at touchdown
constexpr double kPlatformSetback = 0.25;

struct JumpTarget {
  double distance = 0.6;
  double height = 0.2;

  double platform_edge() const { return distance - kPlatformSetback; }
  Vec2 final_body_pos() const { return Vec2(distance, kStandingHeight + height); }

  void validate_standard() const {
    if (distance < 0.5 || distance > 1.0 || height < 0.2 || height > 0.4)
      throw std::invalid_argument("target outside the standard library range");
  }
};

struct InfeasibleScheduleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Contact phase timing: double stance, single (rear) stance, flight, sampled
// at the knot spacing h.
struct PhaseSchedule {
  double t_double = 0.4;
  double t_single = 0.4;
  double t_flight = 0.5;
  double h = 0.01;

  int k_double() const { return static_cast<int>(std::lround(t_double / h)); }
  int k_single() const { return static_cast<int>(std::lround(t_single / h)); }
  int k_flight() const { return static_cast<int>(std::lround(t_flight / h)); }
  int num_intervals() const { return k_double() + k_single() + k_flight(); }
  int num_knots() const { return num_intervals() + 1; }
  double total_time() const { return t_double + t_single + t_flight; }
  double takeoff_time() const { return t_double + t_single; }

  PhaseLabel interval_phase(int i) const {
    if (i < k_double()) return PhaseLabel::kDouble;
    if (i < k_double() + k_single()) return PhaseLabel::kSingle;
    return PhaseLabel::kFlight;
  }
  // A knot is labeled by the interval it opens; the last knot is flight.
  PhaseLabel knot_phase(int k) const {
    return interval_phase(std::min(k, num_intervals() - 1));
  }
  ContactMask interval_mask(int i) const {
    ContactMask m;
    const PhaseLabel ph = interval_phase(i);
    m.front = ph == PhaseLabel::kDouble;
    m.rear = ph != PhaseLabel::kFlight;
    return m;
  }

  void validate() const {
    if (h <= 0) throw std::invalid_argument("schedule: knot spacing must be positive");
    auto multiple = [this](double t) { return std::abs(t / h - std::lround(t / h)) < 1e-9; };
    if (!multiple(t_double) || !multiple(t_single) || !multiple(t_flight))
      throw std::invalid_argument("schedule: durations must be multiples of h");
    if (t_double <= 0 || t_single <= 0 || t_flight < 0)
      throw std::invalid_argument("schedule: durations must be positive");
    if (std::abs(t_double + t_single - 0.8) > 1e-9)
      throw std::invalid_argument("schedule: ground phase must last 0.8 s");
  }
};

// Ballistic flight time for a target: rise to a clearance apex above both the
// takeoff pose and the landing platform, then fall onto it.
inline double ballistic_flight_time(const JumpTarget& t, double h = 0.01) {
  const double g = 9.81;
  const double z_takeoff = 0.30;
  const double z_land = kStandingHeight + t.height;
  const double apex = std::max(z_takeoff, z_land) + 0.05;
  const double time =
      std::sqrt(2.0 * (apex - z_takeoff) / g) + std::sqrt(2.0 * (apex - z_land) / g);
  return std::max(0.3, std::lround(time / h) * h);
}

inline PhaseSchedule default_schedule(const JumpTarget& t, double h = 0.01) {
  PhaseSchedule s;
  s.h = h;
  s.t_flight = ballistic_flight_time(t, h);
  return s;
}

// Rejects schedules whose flight time cannot ballistically reach the target
// with any takeoff the legs can produce.
inline void check_ballistic_feasibility(const JumpTarget& t, const PhaseSchedule& s) {
  if (s.t_flight <= 0.0) {
    if (t.distance != 0.0 || t.height != 0.0)
      throw InfeasibleScheduleError("zero flight time with a nonzero jump target");
    return;
  }
  const double g = 9.81;
  const double z_takeoff = 0.30;
  const double z_land = kStandingHeight + t.height;
  const double vz = (z_land - z_takeoff + 0.5 * g * s.t_flight * s.t_flight) / s.t_flight;
  const double vx = t.distance / s.t_flight;
  const double v_max = 8.4;  // two 0.2 m links at the 21 rad/s joint speed limit
  if (std::hypot(vx, vz) > v_max)
    throw InfeasibleScheduleError("flight time ballistically incompatible with target");
}

}  // namespace jumprl
