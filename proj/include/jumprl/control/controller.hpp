#pragma once

#include <array>
#include <stdexcept>

#include "jumprl/model/kinematics.hpp"
#include "jumprl/model/params.hpp"

namespace jumprl {

// Joint-space and Cartesian PD gains. The named presets match the tracking
// study: "high" (300, 3) and "low" (100, 2) joint gains.
struct GainSet {
  Vec4 kp_joint = Vec4::Zero();
  Vec4 kd_joint = Vec4::Zero();
  Vec2 kp_cart = Vec2(500.0, 500.0);  // N/m, per-leg diagonal
  Vec2 kd_cart = Vec2(10.0, 10.0);    // N*s/m

  static GainSet high() {
    GainSet g;
    g.kp_joint.setConstant(300.0);
    g.kd_joint.setConstant(3.0);
    return g;
  }
  static GainSet low() {
    GainSet g;
    g.kp_joint.setConstant(100.0);
    g.kd_joint.setConstant(2.0);
    return g;
  }

  void validate() const {
    if ((kp_joint.array() < 0).any() || (kd_joint.array() < 0).any() ||
        (kp_cart.array() < 0).any() || (kd_cart.array() < 0).any())
      throw std::invalid_argument("gains: diagonal entries must be non-negative");
  }
};

// Piecewise-constant Cartesian foot offsets over the 0.8 s ground phase:
// 8 segments at 10 Hz, per-leg (dx, dz), each component limited to 5 cm.
struct OffsetSchedule {
  static constexpr int kSegments = 8;
  static constexpr double kLimit = 0.05;  // m
  static constexpr int kFlatSize = kSegments * 2 * 2;

  std::array<std::array<Vec2, 2>, kSegments> segments;  // [segment][leg]

  OffsetSchedule() {
    for (auto& seg : segments)
      for (auto& dp : seg) dp.setZero();
  }

  bool within_limits() const {
    for (const auto& seg : segments)
      for (const auto& dp : seg)
        if (dp.cwiseAbs().maxCoeff() > kLimit) return false;
    return true;
  }

  void clamp() {
    for (auto& seg : segments)
      for (auto& dp : seg)
        dp = dp.cwiseMax(-kLimit).cwiseMin(kLimit);
  }

  // Flat layout: segment-major, then leg (front, rear), then (dx, dz).
  void to_flat(double* out) const {
    int i = 0;
    for (const auto& seg : segments)
      for (const auto& dp : seg) {
        out[i++] = dp.x();
        out[i++] = dp.y();
      }
  }
  static OffsetSchedule from_flat(const double* in) {
    OffsetSchedule s;
    int i = 0;
    for (auto& seg : s.segments)
      for (auto& dp : seg) {
        dp.x() = in[i++];
        dp.y() = in[i++];
      }
    return s;
  }
};

enum class PhaseLabel : int { kDouble = 0, kSingle = 1, kFlight = 2 };

inline bool is_contact_phase(PhaseLabel ph) { return ph != PhaseLabel::kFlight; }

// One dense (1 ms) sample of the reference trajectory, as consumed by the
// tracking controller.
struct ControlRefs {
  double t = 0.0;
  PhaseLabel phase = PhaseLabel::kDouble;
  Vec7 q_d = Vec7::Zero();
  Vec7 qd_d = Vec7::Zero();
  Vec4 tau_d = Vec4::Zero();
  std::array<Vec2, 2> p_d{Vec2::Zero(), Vec2::Zero()};  // hip-frame foot refs
  std::array<Vec2, 2> v_d{Vec2::Zero(), Vec2::Zero()};
};

enum class OffsetSemantics { kAdditive, kLiteral };

// Joint PD around the reference plus feedforward torque.
Vec4 tau_ff(const ControlRefs& refs, const PlanarState& s, const GainSet& gains);

// Cartesian foot-space PD mapped through the leg Jacobian, on top of tau_ff.
Vec4 tau_opt(const ModelParams& p, const ControlRefs& refs, const PlanarState& s,
             const GainSet& gains);

// Joint-space image of a Cartesian offset, taken at the desired configuration.
Vec4 delta_q(const ModelParams& p, const Vec7& q_d, const std::array<Vec2, 2>& dp);

// Torque contribution of the learned offsets.
Vec4 tau_rl(const ModelParams& p, const std::array<Vec2, 2>& dp, const ControlRefs& refs,
            const PlanarState& s, const GainSet& gains, OffsetSemantics semantics);

// The active offset segment for a sample time, or -1 outside the ground phase.
int offset_segment(double t);

// Full control law: tau_opt plus gated offset contributions, saturated to the
// actuator limit. Pass a null schedule for the offset-free controller.
Vec4 full_torque(const ModelParams& p, const ControlRefs& refs, const PlanarState& s,
                 const OffsetSchedule* schedule, const GainSet& gains,
                 OffsetSemantics semantics = OffsetSemantics::kAdditive);

}  // namespace jumprl
