#pragma once

#include "jumprl/model/params.hpp"

namespace jumprl {

using Mat27 = Eigen::Matrix<double, 2, 7>;

// Leg-frame (hip-attached, torso-aligned) two-link kinematics. Thigh angle is
// measured from the torso -z axis, knee angle relative to the thigh.
Vec2 foot_pos_hip(const ModelParams& p, double qh, double qk);
Mat2 foot_jacobian_hip(const ModelParams& p, double qh, double qk);

inline Vec2 foot_pos_hip(const ModelParams& p, const Vec7& q, Leg leg) {
  return foot_pos_hip(p, q[hip_coord(leg)], q[knee_coord(leg)]);
}
inline Mat2 foot_jacobian_hip(const ModelParams& p, const Vec7& q, Leg leg) {
  return foot_jacobian_hip(p, q[hip_coord(leg)], q[knee_coord(leg)]);
}

// Hip-frame foot velocity, J(q_leg) * qd_leg.
inline Vec2 foot_vel_hip(const ModelParams& p, const Vec7& q, const Vec7& qd, Leg leg) {
  return foot_jacobian_hip(p, q, leg) * Vec2(qd[hip_coord(leg)], qd[knee_coord(leg)]);
}

// Two-link IK in the hip frame; knee solution on the negative branch to match
// the knee joint range. Throws std::domain_error when out of reach.
Vec2 leg_ik_hip(const ModelParams& p, const Vec2& foot_hip);

struct PointKin {
  Vec2 pos = Vec2::Zero();
  Mat27 jac = Mat27::Zero();
  Vec2 vel = Vec2::Zero();
  Vec2 bias_acc = Vec2::Zero();  // Jdot * qd
};

// World-frame foot kinematics (position, full 2x7 Jacobian, velocity, bias
// acceleration at qdd = 0).
PointKin foot_kin_world(const ModelParams& p, const Vec7& q, const Vec7& qd, Leg leg);

inline Vec2 foot_pos_world(const ModelParams& p, const Vec7& q, Leg leg) {
  return foot_kin_world(p, q, Vec7::Zero(), leg).pos;
}

Vec2 com_position(const ModelParams& p, const Vec7& q);
Vec2 com_velocity(const ModelParams& p, const Vec7& q, const Vec7& qd);

}  // namespace jumprl
