#pragma once

#include <array>
#include <stdexcept>

#include <Eigen/Dense>

namespace jumprl {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Vec7 = Eigen::Matrix<double, 7, 1>;
using Mat77 = Eigen::Matrix<double, 7, 7>;

constexpr int kNumCoords = 7;
constexpr int kNumJoints = 4;

// Generalized coordinate layout: [x_b, z_b, theta_b, q_fh, q_fk, q_rh, q_rk].
enum Coord : int {
  kBaseX = 0,
  kBaseZ = 1,
  kPitch = 2,
  kFrontHip = 3,
  kFrontKnee = 4,
  kRearHip = 5,
  kRearKnee = 6,
};

enum class Leg : int { kFront = 0, kRear = 1 };

inline int hip_coord(Leg leg) { return leg == Leg::kFront ? kFrontHip : kRearHip; }
inline int knee_coord(Leg leg) { return leg == Leg::kFront ? kFrontKnee : kRearKnee; }

// Sagittal-plane 5-link model. Each planar leg lumps a left/right pair, so
// link masses and the torque limit are doubled relative to a single leg.
struct ModelParams {
  double torso_mass = 9.2;
  double torso_pitch_inertia = 0.0565;
  // Order: front thigh, front shank, rear thigh, rear shank.
  std::array<double, 4> link_masses{1.0, 0.4, 1.0, 0.4};
  std::array<double, 4> link_inertias{1.0 * 0.2 * 0.2 / 12.0, 0.4 * 0.2 * 0.2 / 12.0,
                                      1.0 * 0.2 * 0.2 / 12.0, 0.4 * 0.2 * 0.2 / 12.0};
  double l1 = 0.2;
  double l2 = 0.2;
  double l_body = 0.361;
  std::array<double, 2> hip_offsets{0.361 / 2.0, -0.361 / 2.0};
  // Thigh [-60 deg, 240 deg], knee [-154.5 deg, -52.5 deg]; same ranges for
  // front and rear legs. Order matches joint coordinates fh, fk, rh, rk.
  std::array<std::array<double, 2>, 4> joint_limits{{
      {-1.0471975511965976, 4.1887902047863905},
      {-2.6965336943312392, -0.9162978572970230},
      {-1.0471975511965976, 4.1887902047863905},
      {-2.6965336943312392, -0.9162978572970230},
  }};
  double torque_limit = 67.0;  // 2 x 33.5 N*m, pair-lumped
  double speed_limit = 21.0;   // rad/s
  double gravity = 9.81;

  double total_mass() const {
    double m = torso_mass;
    for (double lm : link_masses) m += lm;
    return m;
  }

  double hip_offset(Leg leg) const { return hip_offsets[static_cast<int>(leg)]; }

  const std::array<double, 2>& joint_limit(int joint) const { return joint_limits[joint]; }

  void validate() const {
    if (std::abs(total_mass() - 12.0) > 1e-9)
      throw std::invalid_argument("model: total mass must be 12 kg");
    if (l1 <= 0 || l2 <= 0 || l_body <= 0) throw std::invalid_argument("model: lengths must be positive");
    if (torque_limit <= 0 || speed_limit <= 0) throw std::invalid_argument("model: limits must be positive");
    for (const auto& lim : joint_limits)
      if (lim[0] >= lim[1]) throw std::invalid_argument("model: empty joint limit interval");
  }
};

struct PlanarState {
  Vec7 q = Vec7::Zero();
  Vec7 qd = Vec7::Zero();

  bool finite() const { return q.allFinite() && qd.allFinite(); }
};

}  // namespace jumprl
