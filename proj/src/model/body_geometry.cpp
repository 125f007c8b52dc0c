#include "model/body_geometry.hpp"

#include <cmath>

namespace jumprl::detail {

namespace {

constexpr double kHalfPi = 1.5707963267948966;

std::uint8_t bit(int coord) { return static_cast<std::uint8_t>(1u << coord); }

Term hip_term(const ModelParams& p, Leg leg) {
  // R(theta) * (c, 0) = c (sin(theta + pi/2), -cos(theta + pi/2)); the rear
  // hip flips the phase sign instead of the amplitude.
  const double c = std::abs(p.hip_offset(leg));
  return Term{c, leg == Leg::kFront ? kHalfPi : -kHalfPi, bit(kPitch)};
}

Term thigh_term(double len, Leg leg) {
  return Term{len, 0.0, static_cast<std::uint8_t>(bit(kPitch) | bit(hip_coord(leg)))};
}

Term shank_term(double len, Leg leg) {
  return Term{len, 0.0,
              static_cast<std::uint8_t>(bit(kPitch) | bit(hip_coord(leg)) | bit(knee_coord(leg)))};
}

}  // namespace

Geometry Geometry::make(const ModelParams& p) {
  Geometry g;
  g.gravity = p.gravity;
  g.total_mass = p.total_mass();

  BodyDef& torso = g.bodies[0];
  torso.mass = p.torso_mass;
  torso.inertia = p.torso_pitch_inertia;
  torso.wmask = bit(kPitch);
  torso.com.nterms = 0;

  for (int li = 0; li < 2; ++li) {
    const Leg leg = static_cast<Leg>(li);
    const int thigh_idx = 1 + 2 * li;
    const int shank_idx = 2 + 2 * li;

    BodyDef& thigh = g.bodies[thigh_idx];
    thigh.mass = p.link_masses[2 * li];
    thigh.inertia = p.link_inertias[2 * li];
    thigh.wmask = static_cast<std::uint8_t>(bit(kPitch) | bit(hip_coord(leg)));
    thigh.com.terms[0] = hip_term(p, leg);
    thigh.com.terms[1] = thigh_term(p.l1 / 2.0, leg);
    thigh.com.nterms = 2;

    BodyDef& shank = g.bodies[shank_idx];
    shank.mass = p.link_masses[2 * li + 1];
    shank.inertia = p.link_inertias[2 * li + 1];
    shank.wmask = static_cast<std::uint8_t>(bit(kPitch) | bit(hip_coord(leg)) | bit(knee_coord(leg)));
    shank.com.terms[0] = hip_term(p, leg);
    shank.com.terms[1] = thigh_term(p.l1, leg);
    shank.com.terms[2] = shank_term(p.l2 / 2.0, leg);
    shank.com.nterms = 3;

    PointDef& foot = g.feet[li];
    foot.terms[0] = hip_term(p, leg);
    foot.terms[1] = thigh_term(p.l1, leg);
    foot.terms[2] = shank_term(p.l2, leg);
    foot.nterms = 3;
  }
  return g;
}

PointEval eval_point(const PointDef& def, const Vec7& q, const Vec7& qd) {
  PointEval out;
  out.pos = Vec2(q[kBaseX], q[kBaseZ]);
  out.jac(0, kBaseX) = 1.0;
  out.jac(1, kBaseZ) = 1.0;
  out.vel = Vec2(qd[kBaseX], qd[kBaseZ]);

  for (int t = 0; t < def.nterms; ++t) {
    const Term& tm = def.terms[t];
    double chi = tm.phase;
    double chidot = 0.0;
    for (int j = kPitch; j < kNumCoords; ++j) {
      if (tm.mask & (1u << j)) {
        chi += q[j];
        chidot += qd[j];
      }
    }
    const double s = std::sin(chi);
    const double c = std::cos(chi);
    out.pos += tm.amp * Vec2(s, -c);
    const Vec2 dcol = tm.amp * Vec2(c, s);
    for (int j = kPitch; j < kNumCoords; ++j)
      if (tm.mask & (1u << j)) out.jac.col(j) += dcol;
    out.vel += chidot * dcol;
    out.bias += tm.amp * chidot * chidot * Vec2(-s, c);
  }
  return out;
}

void eval_point_derivs(const PointDef& def, const Vec7& q, const Vec7& qd, PointDerivs& out) {
  for (int l = 0; l < kNumCoords; ++l) {
    out.djac_dq[l].setZero();
    out.dbias_dq[l].setZero();
    out.dbias_dqd[l].setZero();
  }
  for (int t = 0; t < def.nterms; ++t) {
    const Term& tm = def.terms[t];
    double chi = tm.phase;
    double chidot = 0.0;
    for (int j = kPitch; j < kNumCoords; ++j) {
      if (tm.mask & (1u << j)) {
        chi += q[j];
        chidot += qd[j];
      }
    }
    const double s = std::sin(chi);
    const double c = std::cos(chi);
    const Vec2 d2 = tm.amp * Vec2(-s, c);          // d/dchi of the Jacobian column
    const Vec2 d3 = tm.amp * Vec2(-c, -s);         // d/dchi of d2
    for (int l = kPitch; l < kNumCoords; ++l) {
      if (!(tm.mask & (1u << l))) continue;
      for (int j = kPitch; j < kNumCoords; ++j)
        if (tm.mask & (1u << j)) out.djac_dq[l].col(j) += d2;
      out.dbias_dq[l] += chidot * chidot * d3;
      out.dbias_dqd[l] += 2.0 * chidot * d2;
    }
  }
}

}  // namespace jumprl::detail
