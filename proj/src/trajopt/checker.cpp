#include "jumprl/trajopt/checker.hpp"

#include <cmath>
#include <limits>

#include "jumprl/model/dynamics.hpp"
#include "jumprl/model/kinematics.hpp"
#include "jumprl/model/terrain.hpp"
#include "jumprl/trajopt/jump_nlp.hpp"

namespace jumprl {

namespace {

// The clearance terrain the plan is validated against: the platform rises
// from zero to full height over the 5 cm strip ending at the edge, so any
// foot that clears this profile also clears the sharp step.
double clearance_profile(const JumpTarget& t, double x) {
  constexpr double kBlend = 0.05;
  const double u = (x - (t.platform_edge() - kBlend)) / kBlend;
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return t.height;
  return t.height * u * u * (3.0 - 2.0 * u);
}

}  // namespace

TrajectoryCheck check_jump_trajectory(const ModelParams& p, const KnotTrajectory& traj) {
  TrajectoryCheck out;
  const PhaseSchedule& sched = traj.schedule;
  const JumpTarget& tgt = traj.target;
  const int N = traj.num_knots();
  const int Kd = sched.k_double();
  const int Kg = Kd + sched.k_single();
  const double h = sched.h;

  auto state = [&](int k) {
    PlanarState s;
    s.q = traj.q[k];
    s.qd = traj.qd[k];
    return s;
  };

  // Trapezoidal defects, re-deriving the contact set per interval.
  for (int i = 0; i + 1 < N; ++i) {
    const ContactMask m = sched.interval_mask(i);
    const StanceDynamics d0 = stance_dynamics(p, state(i), traj.tau[i], m, false);
    const StanceDynamics d1 = stance_dynamics(p, state(i + 1), traj.tau[i + 1], m, false);
    const Vec7 dq = traj.q[i + 1] - traj.q[i] - 0.5 * h * (traj.qd[i] + traj.qd[i + 1]);
    const Vec7 dv = traj.qd[i + 1] - traj.qd[i] - 0.5 * h * (d0.qdd + d1.qdd);
    out.max_defect =
        std::max({out.max_defect, dq.cwiseAbs().maxCoeff(), dv.cwiseAbs().maxCoeff()});
  }

  // Stance feet must hold the spot they occupied at liftoff of the plan.
  const Vec2 anchor_front = foot_pos_world(p, traj.q[0], Leg::kFront);
  const Vec2 anchor_rear = foot_pos_world(p, traj.q[0], Leg::kRear);
  for (int k = 0; k <= Kd; ++k) {
    const Vec2 d = foot_pos_world(p, traj.q[k], Leg::kFront) - anchor_front;
    out.max_pin_drift = std::max(out.max_pin_drift, d.cwiseAbs().maxCoeff());
  }
  for (int k = 0; k <= Kg; ++k) {
    const Vec2 d = foot_pos_world(p, traj.q[k], Leg::kRear) - anchor_rear;
    out.max_pin_drift = std::max(out.max_pin_drift, d.cwiseAbs().maxCoeff());
  }

  // Boundary rows: crouch at rest initially, commanded body pose plus
  // pre-landing leg posture at the final knot.
  const PlanarState crouch = crouch_state(p);
  const Vec2 legs_land = preland_joints(p);
  const Vec2 body_goal = tgt.final_body_pos();
  double b = (traj.q[0] - crouch.q).cwiseAbs().maxCoeff();
  b = std::max(b, (traj.qd[0] - crouch.qd).cwiseAbs().maxCoeff());
  b = std::max(b, std::abs(traj.q[N - 1][kBaseX] - body_goal.x()));
  b = std::max(b, std::abs(traj.q[N - 1][kBaseZ] - body_goal.y()));
  b = std::max(b, std::abs(traj.q[N - 1][kPitch]));
  for (int leg = 0; leg < 2; ++leg) {
    b = std::max(b, std::abs(traj.q[N - 1][3 + 2 * leg] - legs_land[0]));
    b = std::max(b, std::abs(traj.q[N - 1][4 + 2 * leg] - legs_land[1]));
  }
  out.max_boundary = b;

  // Joint range in radians; speed and torque as fractions of the limit.
  double box = std::numeric_limits<double>::infinity();
  for (int k = 0; k < N; ++k) {
    for (int j = 0; j < 4; ++j) {
      const auto& lim = p.joint_limit(j);
      box = std::min(box, traj.q[k][3 + j] - lim[0]);
      box = std::min(box, lim[1] - traj.q[k][3 + j]);
      box = std::min(box, (p.speed_limit - std::abs(traj.qd[k][3 + j])) / p.speed_limit);
      box = std::min(box, (p.torque_limit - std::abs(traj.tau[k][j])) / p.torque_limit);
    }
  }
  out.min_box = box;

  // Contact forces at the start of every stance interval: normal floor and
  // friction cone, in the optimizer's 100 N scale.
  constexpr double kMinNormal = 10.0;
  constexpr double kForceScale = 100.0;
  const double mu = Terrain{}.friction;
  double grf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < Kg; ++i) {
    const ContactMask m = sched.interval_mask(i);
    const StanceDynamics d = stance_dynamics(p, state(i), traj.tau[i], m, false);
    for (int f = 0; f < 2; ++f) {
      if (!(f == 0 ? m.front : m.rear)) continue;
      grf = std::min(grf, (d.grf[f].y() - kMinNormal) / kForceScale);
      grf = std::min(grf, (mu * d.grf[f].y() - std::abs(d.grf[f].x())) / kForceScale);
    }
  }
  out.min_grf = grf;

  // Swing-foot clearance from the knot after liftoff until the knot before
  // touchdown.
  double clear = std::numeric_limits<double>::infinity();
  for (int k = Kd + 1; k <= N - 2; ++k) {
    const Vec2 f = foot_pos_world(p, traj.q[k], Leg::kFront);
    clear = std::min(clear, f.y() - clearance_profile(tgt, f.x()));
  }
  for (int k = Kg + 1; k <= N - 2; ++k) {
    const Vec2 f = foot_pos_world(p, traj.q[k], Leg::kRear);
    clear = std::min(clear, f.y() - clearance_profile(tgt, f.x()));
  }
  out.min_clearance = clear;

  // The jump must carry the center of mass by the displacement the two
  // boundary poses imply.
  Vec7 q_goal;
  q_goal << body_goal.x(), body_goal.y(), 0.0, legs_land[0], legs_land[1], legs_land[0],
      legs_land[1];
  const Vec2 want = com_position(p, q_goal) - com_position(p, crouch.q);
  const Vec2 got = com_position(p, traj.q[N - 1]) - com_position(p, traj.q[0]);
  out.com_error = (got - want).norm();

  return out;
}

}  // namespace jumprl
