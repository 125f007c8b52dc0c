#include "jumprl/control/controller.hpp"

#include <algorithm>
#include <cmath>

namespace jumprl {

namespace {

Vec2 leg_joints(const Vec7& v, Leg leg) {
  return Vec2(v[hip_coord(leg)], v[knee_coord(leg)]);
}

void add_leg(Vec4& tau, Leg leg, const Vec2& contribution) {
  const int base = leg == Leg::kFront ? 0 : 2;
  tau[base] += contribution.x();
  tau[base + 1] += contribution.y();
}

}  // namespace

Vec4 tau_ff(const ControlRefs& refs, const PlanarState& s, const GainSet& gains) {
  const Vec4 q_err = refs.q_d.segment<4>(kFrontHip) - s.q.segment<4>(kFrontHip);
  const Vec4 qd_err = refs.qd_d.segment<4>(kFrontHip) - s.qd.segment<4>(kFrontHip);
  return gains.kp_joint.cwiseProduct(q_err) + gains.kd_joint.cwiseProduct(qd_err) + refs.tau_d;
}

Vec4 tau_opt(const ModelParams& p, const ControlRefs& refs, const PlanarState& s,
             const GainSet& gains) {
  Vec4 tau = tau_ff(refs, s, gains);
  for (Leg leg : {Leg::kFront, Leg::kRear}) {
    const int f = static_cast<int>(leg);
    const Mat2 J = foot_jacobian_hip(p, s.q, leg);
    const Vec2 pos = foot_pos_hip(p, s.q, leg);
    const Vec2 vel = J * leg_joints(s.qd, leg);
    const Vec2 force = gains.kp_cart.cwiseProduct(refs.p_d[f] - pos) +
                       gains.kd_cart.cwiseProduct(refs.v_d[f] - vel);
    add_leg(tau, leg, J.transpose() * force);
  }
  return tau;
}

Vec4 delta_q(const ModelParams& p, const Vec7& q_d, const std::array<Vec2, 2>& dp) {
  Vec4 dq = Vec4::Zero();
  for (Leg leg : {Leg::kFront, Leg::kRear}) {
    const Mat2 Jd = foot_jacobian_hip(p, q_d, leg);
    add_leg(dq, leg, Jd.transpose() * dp[static_cast<int>(leg)]);
  }
  return dq;
}

Vec4 tau_rl(const ModelParams& p, const std::array<Vec2, 2>& dp, const ControlRefs& refs,
            const PlanarState& s, const GainSet& gains, OffsetSemantics semantics) {
  const Vec4 dq = delta_q(p, refs.q_d, dp);
  Vec4 tau = Vec4::Zero();
  if (semantics == OffsetSemantics::kAdditive) {
    for (Leg leg : {Leg::kFront, Leg::kRear}) {
      const Mat2 J = foot_jacobian_hip(p, s.q, leg);
      add_leg(tau, leg, J.transpose() * gains.kp_cart.cwiseProduct(dp[static_cast<int>(leg)]));
    }
    tau += gains.kp_joint.cwiseProduct(dq);
  } else {
    for (Leg leg : {Leg::kFront, Leg::kRear}) {
      const Mat2 J = foot_jacobian_hip(p, s.q, leg);
      const Vec2 pos = foot_pos_hip(p, s.q, leg);
      add_leg(tau, leg,
              J.transpose() * gains.kp_cart.cwiseProduct(dp[static_cast<int>(leg)] - pos));
    }
    tau += gains.kp_joint.cwiseProduct(dq - s.q.segment<4>(kFrontHip));
  }
  return tau;
}

int offset_segment(double t) {
  if (t < 0.0 || t >= 0.1 * OffsetSchedule::kSegments) return -1;
  return std::min(OffsetSchedule::kSegments - 1, static_cast<int>(std::floor(t / 0.1)));
}

Vec4 full_torque(const ModelParams& p, const ControlRefs& refs, const PlanarState& s,
                 const OffsetSchedule* schedule, const GainSet& gains,
                 OffsetSemantics semantics) {
  Vec4 tau = tau_opt(p, refs, s, gains);
  if (schedule != nullptr && is_contact_phase(refs.phase)) {
    const int seg = offset_segment(refs.t);
    if (seg >= 0) tau += tau_rl(p, schedule->segments[seg], refs, s, gains, semantics);
  }
  return tau.cwiseMax(-p.torque_limit).cwiseMin(p.torque_limit);
}

}  // namespace jumprl
