#include <doctest.h>

#include <cmath>

#include "jumprl/model/integrator.hpp"

using namespace jumprl;

namespace {

PlanarState crouch_state(const ModelParams& p, double body_z) {
  PlanarState s;
  s.q[kBaseZ] = body_z;
  const Vec2 angles = leg_ik_hip(p, Vec2(0.0, -body_z));
  for (Leg leg : {Leg::kFront, Leg::kRear}) {
    s.q[hip_coord(leg)] = angles.x();
    s.q[knee_coord(leg)] = angles.y();
  }
  return s;
}

SimState flight_state() {
  SimState s;
  s.x.q[kBaseZ] = 1.0;
  s.x.q[kFrontHip] = 1.57;
  s.x.q[kFrontKnee] = -1.8;
  s.x.q[kRearHip] = 1.57;
  s.x.q[kRearKnee] = -1.8;
  s.x.qd[kBaseX] = 0.5;
  s.x.qd[kBaseZ] = 3.0;
  s.x.qd[kPitch] = 1.0;
  s.x.qd[kFrontHip] = 1.0;
  s.x.qd[kFrontKnee] = -0.8;
  s.x.qd[kRearHip] = -1.0;
  s.x.qd[kRearKnee] = 0.8;
  return s;
}

}  // namespace

TEST_CASE("free fall from rest matches the closed form") {
  ModelParams p;
  ContactParams cp;
  Terrain terrain;
  SimState s;
  s.x.q[kBaseZ] = 1.0;
  s.x.q[kFrontHip] = 0.3;
  s.x.q[kFrontKnee] = -1.2;
  s.x.q[kRearHip] = 0.3;
  s.x.q[kRearKnee] = -1.2;
  const Vec7 q0 = s.x.q;
  for (int k = 0; k < 100; ++k) sim_step(p, cp, terrain, s, Vec4::Zero());
  const double dz = s.x.q[kBaseZ] - q0[kBaseZ];
  CHECK(std::abs(dz - (-0.5 * 9.81 * 0.1 * 0.1)) < 1e-4);
  CHECK(std::abs(dz - (-0.5 * 9.81 * 0.1 * 0.1)) < 1e-9);  // exact for constant acceleration
  CHECK(std::abs(s.x.q[kBaseX]) < 1e-12);
  CHECK(std::abs(s.x.q[kPitch]) < 1e-12);
  for (int j = 0; j < kNumJoints; ++j) CHECK(std::abs(s.x.q[kFrontHip + j] - q0[kFrontHip + j]) < 1e-12);
  CHECK(s.t == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("mechanical energy drifts below 0.1 percent over half a second of flight") {
  ModelParams p;
  ContactParams cp;
  Terrain terrain;
  SimState s = flight_state();
  const double e0 = total_energy(p, s.x);
  for (int k = 0; k < 500; ++k) sim_step(p, cp, terrain, s, Vec4::Zero());
  const double e1 = total_energy(p, s.x);
  CHECK(std::abs(e1 - e0) < 1e-3 * std::abs(e0));
}

TEST_CASE("per-step momentum change equals the gravity impulse in flight") {
  ModelParams p;
  ContactParams cp;
  Terrain terrain;
  SimState s = flight_state();
  const double m = p.total_mass();
  for (int k = 0; k < 300; ++k) {
    const Vec2 before = m * com_velocity(p, s.x.q, s.x.qd);
    sim_step(p, cp, terrain, s, Vec4::Zero());
    const Vec2 after = m * com_velocity(p, s.x.q, s.x.qd);
    const Vec2 impulse = after - before - Vec2(0.0, -m * 9.81 * 1e-3);
    CHECK(impulse.norm() < 1e-4);
  }
}

TEST_CASE("joint speed and angle limits are enforced along a saturated swing") {
  ModelParams p;
  ContactParams cp;
  Terrain terrain;
  SimState s;
  s.x.q[kBaseZ] = 5.0;
  s.x.q[kFrontKnee] = -1.8;
  s.x.q[kRearHip] = 1.57;
  s.x.q[kRearKnee] = -1.8;
  Vec4 tau(p.torque_limit, 0.0, 0.0, 0.0);
  for (int k = 0; k < 500; ++k) {
    sim_step(p, cp, terrain, s, tau);
    for (int j = 0; j < kNumJoints; ++j) {
      CHECK(std::abs(s.x.qd[kFrontHip + j]) <= p.speed_limit + 1e-12);
      const auto& lim = p.joint_limit(j);
      CHECK(s.x.q[kFrontHip + j] >= lim[0] - 1e-12);
      CHECK(s.x.q[kFrontHip + j] <= lim[1] + 1e-12);
    }
  }
  // The driven hip actually reached both caps.
  CHECK(s.x.q[kFrontHip] == doctest::Approx(p.joint_limit(0)[1]).epsilon(1e-9));
}

TEST_CASE("a dropped crouch settles onto its feet under a joint PD hold") {
  ModelParams p;
  ContactParams cp;
  Terrain terrain;
  SimState s;
  s.x = crouch_state(p, 0.25);
  s.x.q[kBaseZ] = 0.28;  // feet 3 cm above ground
  const Vec7 q_ref = crouch_state(p, 0.25).q;

  ContactReport report{};
  for (int k = 0; k < 2000; ++k) {
    Vec4 tau;
    for (int j = 0; j < kNumJoints; ++j) {
      tau[j] = 100.0 * (q_ref[kFrontHip + j] - s.x.q[kFrontHip + j]) - 2.0 * s.x.qd[kFrontHip + j];
      tau[j] = std::clamp(tau[j], -p.torque_limit, p.torque_limit);
    }
    report = sim_step(p, cp, terrain, s, tau);
  }

  CHECK(report[0].in_contact);
  CHECK(report[1].in_contact);
  CHECK(s.x.q[kBaseZ] > 0.2);
  CHECK(s.x.q[kBaseZ] < 0.3);
  CHECK(std::abs(s.x.qd[kBaseZ]) < 0.02);
  CHECK(std::abs(s.x.qd[kBaseX]) < 0.02);
  const double total_normal = report[0].normal + report[1].normal;
  CHECK(total_normal == doctest::Approx(12.0 * 9.81).epsilon(0.05));
}

TEST_CASE("per-foot terrain heights shift the resting pose") {
  ModelParams p;
  ContactParams cp;
  Terrain terrain;
  terrain.block_heights = {0.06, 0.0};
  SimState s;
  s.x = crouch_state(p, 0.25);
  s.x.q[kBaseZ] = 0.32;
  const Vec7 q_ref = crouch_state(p, 0.25).q;
  for (int k = 0; k < 1200; ++k) {
    Vec4 tau;
    for (int j = 0; j < kNumJoints; ++j) {
      tau[j] = 120.0 * (q_ref[kFrontHip + j] - s.x.q[kFrontHip + j]) - 2.5 * s.x.qd[kFrontHip + j];
      tau[j] = std::clamp(tau[j], -p.torque_limit, p.torque_limit);
    }
    sim_step(p, cp, terrain, s, tau);
  }
  const Vec2 front = foot_pos_world(p, s.x.q, Leg::kFront);
  const Vec2 rear = foot_pos_world(p, s.x.q, Leg::kRear);
  CHECK(front.y() == doctest::Approx(0.06).epsilon(0.1));
  CHECK(std::abs(rear.y()) < 0.01);
  // Standing on the raised block pitches the body backwards.
  CHECK(s.x.q[kPitch] > 0.02);
}

TEST_CASE("simulation is bitwise deterministic") {
  ModelParams p;
  ContactParams cp;
  Terrain terrain;
  auto run = [&]() {
    SimState s;
    s.x = crouch_state(p, 0.25);
    s.x.q[kBaseZ] = 0.30;
    const Vec7 q_ref = s.x.q;
    for (int k = 0; k < 600; ++k) {
      Vec4 tau;
      for (int j = 0; j < kNumJoints; ++j)
        tau[j] = std::clamp(90.0 * (q_ref[kFrontHip + j] - s.x.q[kFrontHip + j]) - 2.0 * s.x.qd[kFrontHip + j],
                            -p.torque_limit, p.torque_limit);
      sim_step(p, cp, terrain, s, tau);
    }
    return s;
  };
  const SimState a = run();
  const SimState b = run();
  for (int i = 0; i < kNumCoords; ++i) {
    CHECK(a.x.q[i] == b.x.q[i]);
    CHECK(a.x.qd[i] == b.x.qd[i]);
  }
}

TEST_CASE("insane states raise the divergence error") {
  ModelParams p;
  ContactParams cp;
  Terrain terrain;
  SimState s;
  s.x.q[kBaseZ] = 1.0;
  s.x.qd[kBaseX] = 2000.0;
  CHECK_THROWS_AS(sim_step(p, cp, terrain, s, Vec4::Zero()), SimDivergedError);
}
