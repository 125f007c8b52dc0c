#include <doctest.h>

#include <cmath>

#include "jumprl/model/dynamics.hpp"
#include "jumprl/util/rng.hpp"

using namespace jumprl;

namespace {

Vec7 random_config(const ModelParams& p, Rng& rng) {
  Vec7 q;
  q[kBaseX] = rng.uniform(-1.0, 1.0);
  q[kBaseZ] = rng.uniform(0.2, 1.0);
  q[kPitch] = rng.uniform(-0.6, 0.6);
  for (int j = 0; j < kNumJoints; ++j) {
    const auto& lim = p.joint_limit(j);
    const double margin = 0.05 * (lim[1] - lim[0]);
    q[kFrontHip + j] = rng.uniform(lim[0] + margin, lim[1] - margin);
  }
  return q;
}

Vec7 random_rates(Rng& rng, double scale) {
  Vec7 qd;
  for (int i = 0; i < kNumCoords; ++i) qd[i] = rng.uniform(-scale, scale);
  return qd;
}

// Crouch with both feet directly below their hips on the ground.
PlanarState crouch_state(const ModelParams& p, double body_z) {
  PlanarState s;
  s.q[kBaseZ] = body_z;
  const Vec2 angles = leg_ik_hip(p, Vec2(0.0, -body_z));
  s.q[kFrontHip] = angles.x();
  s.q[kFrontKnee] = angles.y();
  s.q[kRearHip] = angles.x();
  s.q[kRearKnee] = angles.y();
  return s;
}

// Static reaction forces and torques holding a given pose, solved from the
// base rows of the equations of motion with zero tangential force.
struct Statics {
  std::array<Vec2, 2> forces;
  Vec4 tau;
};

Statics solve_statics(const ModelParams& p, const Vec7& q) {
  const Vec7 h = bias_forces(p, q, Vec7::Zero());
  const Mat27 Jf = foot_kin_world(p, q, Vec7::Zero(), Leg::kFront).jac;
  const Mat27 Jr = foot_kin_world(p, q, Vec7::Zero(), Leg::kRear).jac;
  Mat2 A;
  A << Jf(1, kBaseZ), Jr(1, kBaseZ), Jf(1, kPitch), Jr(1, kPitch);
  const Vec2 fz = A.inverse() * Vec2(h[kBaseZ], h[kPitch]);
  Statics out;
  out.forces = {Vec2(0.0, fz[0]), Vec2(0.0, fz[1])};
  const Vec7 residual = h - Jf.transpose() * out.forces[0] - Jr.transpose() * out.forces[1];
  out.tau = residual.segment<4>(kFrontHip);
  return out;
}

}  // namespace

TEST_CASE("mass matrix is symmetric positive definite") {
  ModelParams p;
  Rng rng(21);
  for (int it = 0; it < 200; ++it) {
    const Vec7 q = random_config(p, rng);
    const Mat77 M = mass_matrix(p, q);
    CHECK((M - M.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat77> es(M);
    CHECK(es.eigenvalues().minCoeff() > 1e-6);
    // Base translation rows carry the total mass.
    CHECK(M(kBaseX, kBaseX) == doctest::Approx(12.0).epsilon(1e-9));
    CHECK(M(kBaseZ, kBaseZ) == doctest::Approx(12.0).epsilon(1e-9));
  }
}

TEST_CASE("ballistic centre of mass accelerates at exactly gravity") {
  ModelParams p;
  Rng rng(22);
  const double e = 1e-6;
  for (int it = 0; it < 100; ++it) {
    PlanarState s;
    s.q = random_config(p, rng);
    s.qd = random_rates(rng, it % 2 ? 5.0 : 0.0);  // with and without joint motion
    const Vec7 qdd = forward_dynamics(p, s, Vec4::Zero(), {Vec2::Zero(), Vec2::Zero()});
    const Vec2 ap = com_velocity(p, s.q + e * s.qd, s.qd + e * qdd);
    const Vec2 am = com_velocity(p, s.q - e * s.qd, s.qd - e * qdd);
    const Vec2 a_com = (ap - am) / (2 * e);
    CHECK(std::abs(a_com.x()) < 1e-5);
    CHECK(a_com.y() == doctest::Approx(-9.81).epsilon(1e-5));
  }
}

TEST_CASE("angular momentum about the centre of mass is conserved in flight") {
  ModelParams p;
  Rng rng(23);
  const double e = 1e-6;
  for (int it = 0; it < 100; ++it) {
    PlanarState s;
    s.q = random_config(p, rng);
    s.qd = random_rates(rng, 6.0);
    const Vec7 qdd = forward_dynamics(p, s, Vec4::Zero(), {Vec2::Zero(), Vec2::Zero()});
    PlanarState sp{s.q + e * s.qd, s.qd + e * qdd};
    PlanarState sm{s.q - e * s.qd, s.qd - e * qdd};
    const double dLdt =
        (angular_momentum_about_com(p, sp) - angular_momentum_about_com(p, sm)) / (2 * e);
    CHECK(std::abs(dLdt) < 1e-5 * std::max(1.0, std::abs(angular_momentum_about_com(p, s))));
  }
}

TEST_CASE("static crouch is an equilibrium of the forward dynamics") {
  ModelParams p;
  const PlanarState s = crouch_state(p, 0.25);
  const Statics st = solve_statics(p, s.q);

  // Feet carry the full weight. The split is not symmetric: both legs fold
  // the same way, which puts the centre of mass ahead of the base.
  CHECK(st.forces[0].y() + st.forces[1].y() == doctest::Approx(12.0 * 9.81).epsilon(1e-9));
  CHECK(st.forces[0].y() > st.forces[1].y());
  CHECK(st.forces[0].y() > 0.0);
  CHECK(st.forces[1].y() > 0.0);

  const Vec7 qdd = forward_dynamics(p, s, st.tau, st.forces);
  CHECK(qdd.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("work-energy balance along the instantaneous flow") {
  ModelParams p;
  Rng rng(24);
  const double e = 1e-6;
  for (int it = 0; it < 100; ++it) {
    PlanarState s;
    s.q = random_config(p, rng);
    s.qd = random_rates(rng, 5.0);
    Vec4 tau;
    for (int j = 0; j < 4; ++j) tau[j] = rng.uniform(-30.0, 30.0);
    std::array<Vec2, 2> forces{Vec2(rng.uniform(-50, 50), rng.uniform(0, 150)),
                               Vec2(rng.uniform(-50, 50), rng.uniform(0, 150))};
    const Vec7 qdd = forward_dynamics(p, s, tau, forces);

    PlanarState sp{s.q + e * s.qd, s.qd + e * qdd};
    PlanarState sm{s.q - e * s.qd, s.qd - e * qdd};
    const double dEdt = (total_energy(p, sp) - total_energy(p, sm)) / (2 * e);

    double power = tau.dot(s.qd.segment<4>(kFrontHip));
    power += forces[0].dot(foot_kin_world(p, s.q, s.qd, Leg::kFront).vel);
    power += forces[1].dot(foot_kin_world(p, s.q, s.qd, Leg::kRear).vel);
    CHECK(dEdt == doctest::Approx(power).epsilon(1e-6).scale(std::max(1.0, std::abs(power))));
  }
}

TEST_CASE("stance dynamics pins the contact feet and matches free dynamics") {
  ModelParams p;
  Rng rng(25);
  for (int it = 0; it < 100; ++it) {
    PlanarState s;
    s.q = random_config(p, rng);
    s.qd = random_rates(rng, 3.0);
    Vec4 tau;
    for (int j = 0; j < 4; ++j) tau[j] = rng.uniform(-60.0, 60.0);
    ContactMask mask;
    mask.front = it % 3 != 1;
    mask.rear = it % 3 != 0;

    const StanceDynamics sd = stance_dynamics(p, s, tau, mask, false);

    for (int f = 0; f < 2; ++f) {
      const bool active = f == 0 ? mask.front : mask.rear;
      if (!active) continue;
      const PointKin k = foot_kin_world(p, s.q, s.qd, static_cast<Leg>(f));
      const Vec2 foot_acc = k.jac * sd.qdd + k.bias_acc;
      CHECK(foot_acc.norm() < 1e-7);
    }

    const Vec7 qdd_free = forward_dynamics(p, s, tau, sd.grf);
    CHECK((qdd_free - sd.qdd).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("static crouch reaction forces agree with the stance solver") {
  ModelParams p;
  const PlanarState s = crouch_state(p, 0.25);
  const Statics st = solve_statics(p, s.q);
  ContactMask mask;
  mask.front = mask.rear = true;
  const StanceDynamics sd = stance_dynamics(p, s, st.tau, mask, false);
  CHECK(sd.qdd.cwiseAbs().maxCoeff() < 1e-8);
  for (int f = 0; f < 2; ++f) {
    CHECK(std::abs(sd.grf[f].x() - st.forces[f].x()) < 1e-8);
    CHECK(sd.grf[f].y() == doctest::Approx(st.forces[f].y()).epsilon(1e-8));
  }
}

TEST_CASE("stance dynamics derivatives match finite differences") {
  ModelParams p;
  Rng rng(26);
  const double e = 1e-6;
  double worst = 0.0;
  for (int it = 0; it < 30; ++it) {
    PlanarState s;
    s.q = random_config(p, rng);
    s.qd = random_rates(rng, 3.0);
    Vec4 tau;
    for (int j = 0; j < 4; ++j) tau[j] = rng.uniform(-60.0, 60.0);
    ContactMask mask;
    mask.front = it % 3 != 1;
    mask.rear = it % 3 != 0;

    const StanceDynamics sd = stance_dynamics(p, s, tau, mask, true);

    auto record = [&](double analytic, double fd) {
      const double rel = std::abs(analytic - fd) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, rel);
    };

    for (int l = 0; l < kNumCoords; ++l) {
      PlanarState sp = s, sm = s;
      sp.q[l] += e;
      sm.q[l] -= e;
      const StanceDynamics dp = stance_dynamics(p, sp, tau, mask, false);
      const StanceDynamics dm = stance_dynamics(p, sm, tau, mask, false);
      for (int i = 0; i < kNumCoords; ++i)
        record(sd.dqdd_dq(i, l), (dp.qdd[i] - dm.qdd[i]) / (2 * e));
      for (int f = 0; f < 2; ++f)
        for (int i = 0; i < 2; ++i)
          record(sd.dgrf_dq[f](i, l), (dp.grf[f][i] - dm.grf[f][i]) / (2 * e));

      sp = s;
      sm = s;
      sp.qd[l] += e;
      sm.qd[l] -= e;
      const StanceDynamics vp = stance_dynamics(p, sp, tau, mask, false);
      const StanceDynamics vm = stance_dynamics(p, sm, tau, mask, false);
      for (int i = 0; i < kNumCoords; ++i)
        record(sd.dqdd_dqd(i, l), (vp.qdd[i] - vm.qdd[i]) / (2 * e));
      for (int f = 0; f < 2; ++f)
        for (int i = 0; i < 2; ++i)
          record(sd.dgrf_dqd[f](i, l), (vp.grf[f][i] - vm.grf[f][i]) / (2 * e));
    }

    for (int k = 0; k < kNumJoints; ++k) {
      Vec4 tp = tau, tm = tau;
      tp[k] += e;
      tm[k] -= e;
      const StanceDynamics up = stance_dynamics(p, s, tp, mask, false);
      const StanceDynamics um = stance_dynamics(p, s, tm, mask, false);
      for (int i = 0; i < kNumCoords; ++i)
        record(sd.dqdd_dtau(i, k), (up.qdd[i] - um.qdd[i]) / (2 * e));
      for (int f = 0; f < 2; ++f)
        for (int i = 0; i < 2; ++i)
          record(sd.dgrf_dtau[f](i, k), (up.grf[f][i] - um.grf[f][i]) / (2 * e));
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("gravity part of the bias vector is the potential gradient") {
  ModelParams p;
  Rng rng(27);
  const double e = 1e-6;
  for (int it = 0; it < 100; ++it) {
    const Vec7 q = random_config(p, rng);
    const Vec7 h = bias_forces(p, q, Vec7::Zero());
    for (int l = 0; l < kNumCoords; ++l) {
      Vec7 qp = q, qm = q;
      qp[l] += e;
      qm[l] -= e;
      const double grad = (potential_energy(p, qp) - potential_energy(p, qm)) / (2 * e);
      CHECK(h[l] == doctest::Approx(grad).epsilon(1e-6).scale(std::max(1.0, std::abs(grad))));
    }
  }
}
