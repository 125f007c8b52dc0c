#include "jumprl/model/kinematics.hpp"

#include <cmath>
#include <stdexcept>

#include "model/body_geometry.hpp"

namespace jumprl {

Vec2 foot_pos_hip(const ModelParams& p, double qh, double qk) {
  return Vec2(p.l1 * std::sin(qh) + p.l2 * std::sin(qh + qk),
              -p.l1 * std::cos(qh) - p.l2 * std::cos(qh + qk));
}

Mat2 foot_jacobian_hip(const ModelParams& p, double qh, double qk) {
  const double sh = std::sin(qh), ch = std::cos(qh);
  const double shk = std::sin(qh + qk), chk = std::cos(qh + qk);
  Mat2 J;
  J << p.l1 * ch + p.l2 * chk, p.l2 * chk,
       p.l1 * sh + p.l2 * shk, p.l2 * shk;
  return J;
}

Vec2 leg_ik_hip(const ModelParams& p, const Vec2& foot_hip) {
  const double r2 = foot_hip.squaredNorm();
  const double c = (r2 - p.l1 * p.l1 - p.l2 * p.l2) / (2.0 * p.l1 * p.l2);
  if (c < -1.0 || c > 1.0) throw std::domain_error("leg_ik_hip: target out of reach");
  const double qk = -std::acos(c);  // knee range is all-negative
  const double qh = std::atan2(foot_hip.x(), -foot_hip.y()) -
                    std::atan2(p.l2 * std::sin(qk), p.l1 + p.l2 * std::cos(qk));
  return Vec2(qh, qk);
}

PointKin foot_kin_world(const ModelParams& p, const Vec7& q, const Vec7& qd, Leg leg) {
  const detail::Geometry geom = detail::Geometry::make(p);
  const detail::PointEval ev = detail::eval_point(geom.feet[static_cast<int>(leg)], q, qd);
  PointKin out;
  out.pos = ev.pos;
  out.jac = ev.jac;
  out.vel = ev.vel;
  out.bias_acc = ev.bias;
  return out;
}

Vec2 com_position(const ModelParams& p, const Vec7& q) {
  const detail::Geometry geom = detail::Geometry::make(p);
  Vec2 weighted = Vec2::Zero();
  for (const auto& body : geom.bodies)
    weighted += body.mass * detail::eval_point(body.com, q, Vec7::Zero()).pos;
  return weighted / geom.total_mass;
}

Vec2 com_velocity(const ModelParams& p, const Vec7& q, const Vec7& qd) {
  const detail::Geometry geom = detail::Geometry::make(p);
  Vec2 weighted = Vec2::Zero();
  for (const auto& body : geom.bodies)
    weighted += body.mass * detail::eval_point(body.com, q, qd).vel;
  return weighted / geom.total_mass;
}

}  // namespace jumprl
