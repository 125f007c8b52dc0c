#pragma once

#include <cstdint>

#include "jumprl/model/kinematics.hpp"
#include "jumprl/model/params.hpp"

namespace jumprl::detail {

// World-frame points of the 5-link chain are the base position plus a few
// terms of the form a * (sin(chi + delta), -cos(chi + delta)) where chi is a
// 0/1-weighted sum of the angle coordinates. All kinematic quantities and
// their derivatives reduce to loops over these terms.
struct Term {
  double amp = 0.0;
  double phase = 0.0;
  std::uint8_t mask = 0;  // bit j set => coordinate j enters chi
};

constexpr int kMaxTerms = 3;

struct PointDef {
  Term terms[kMaxTerms];
  int nterms = 0;
};

struct BodyDef {
  double mass = 0.0;
  double inertia = 0.0;
  std::uint8_t wmask = 0;  // angular velocity = sum of qd over wmask
  PointDef com;
};

struct Geometry {
  BodyDef bodies[5];     // torso, f-thigh, f-shank, r-thigh, r-shank
  PointDef feet[2];      // front, rear
  double gravity = 9.81;
  double total_mass = 0.0;

  static Geometry make(const ModelParams& p);
};

// Evaluated kinematics of one point for a given (q, qd).
struct PointEval {
  Vec2 pos = Vec2::Zero();
  Mat27 jac = Mat27::Zero();
  Vec2 vel = Vec2::Zero();
  Vec2 bias = Vec2::Zero();  // Jdot * qd
};

PointEval eval_point(const PointDef& def, const Vec7& q, const Vec7& qd);

// Per-coordinate derivatives of the Jacobian and of the bias acceleration.
struct PointDerivs {
  Mat27 djac_dq[7];      // d jac / d q_l
  Vec2 dbias_dq[7];
  Vec2 dbias_dqd[7];
};

void eval_point_derivs(const PointDef& def, const Vec7& q, const Vec7& qd, PointDerivs& out);

}  // namespace jumprl::detail
