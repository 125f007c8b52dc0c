#include "jumprl/model/integrator.hpp"

#include <cmath>

namespace jumprl {

namespace {

bool state_sane(const PlanarState& x) {
  if (!x.finite()) return false;
  if (std::abs(x.q[kBaseX]) > 10.0 || std::abs(x.q[kBaseZ]) > 10.0) return false;
  if (std::abs(x.q[kPitch]) > 50.0) return false;
  if (x.qd.cwiseAbs().maxCoeff() > 1e3) return false;
  return true;
}

}  // namespace

ContactReport sim_step(const ModelParams& p, const ContactParams& cp, const Terrain& terrain,
                       SimState& s, const Vec4& tau, double dt) {
  ContactReport report{};
  std::array<Vec2, 2> forces{Vec2::Zero(), Vec2::Zero()};
  Eigen::LDLT<Mat77> mass_ldlt;
  bool have_mass = false;
  for (int f = 0; f < 2; ++f) {
    const Leg leg = static_cast<Leg>(f);
    const PointKin foot = foot_kin_world(p, s.x.q, s.x.qd, leg);
    const double ground = terrain.ground_height(leg, foot.pos.x());
    ContactParams local = cp;
    if (foot.pos.y() < ground) {
      // Clamp the normal damping by the impulse limit of the foot's apparent
      // mass, otherwise the light distal links get kicked off at touchdown
      // (explicit damping is unstable when d*dt exceeds the apparent mass).
      if (!have_mass) {
        mass_ldlt.compute(mass_matrix(p, s.x.q));
        have_mass = true;
      }
      const double lam_inv = foot.jac.row(1).dot(mass_ldlt.solve(foot.jac.row(1).transpose()));
      if (lam_inv > 0.0) local.d_normal = std::min(local.d_normal, 1.0 / (lam_inv * dt));
    }
    report[f] = contact_force(foot.pos, foot.vel, ground, terrain.friction, local, s.anchors[f]);
    forces[f] = Vec2(report[f].tangential, report[f].normal);
  }

  const Vec7 qdd = forward_dynamics(p, s.x, tau, forces);

  const Vec7 qd_prev = s.x.qd;
  s.x.qd += dt * qdd;
  for (int j = 0; j < kNumJoints; ++j) {
    double& w = s.x.qd[kFrontHip + j];
    w = std::clamp(w, -p.speed_limit, p.speed_limit);
  }
  // Trapezoidal position update (velocity-Verlet flavour): exact for constant
  // acceleration, so ballistic segments integrate without O(dt) bias.
  s.x.q += 0.5 * dt * (qd_prev + s.x.qd);
  for (int j = 0; j < kNumJoints; ++j) {
    const auto& lim = p.joint_limit(j);
    double& qj = s.x.q[kFrontHip + j];
    double& wj = s.x.qd[kFrontHip + j];
    if (qj < lim[0]) {
      qj = lim[0];
      wj = std::max(wj, 0.0);
    } else if (qj > lim[1]) {
      qj = lim[1];
      wj = std::min(wj, 0.0);
    }
  }
  s.t += dt;

  if (!state_sane(s.x)) throw SimDivergedError();
  return report;
}

}  // namespace jumprl
