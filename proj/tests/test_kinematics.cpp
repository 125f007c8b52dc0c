#include <doctest.h>

#include <cmath>

#include "jumprl/model/kinematics.hpp"
#include "jumprl/util/rng.hpp"

using namespace jumprl;

namespace {

const double kPi = 3.14159265358979323846;

Vec7 random_config(const ModelParams& p, Rng& rng) {
  Vec7 q;
  q[kBaseX] = rng.uniform(-1.0, 1.0);
  q[kBaseZ] = rng.uniform(0.1, 1.0);
  q[kPitch] = rng.uniform(-0.8, 0.8);
  for (int j = 0; j < kNumJoints; ++j) {
    const auto& lim = p.joint_limit(j);
    q[kFrontHip + j] = rng.uniform(lim[0], lim[1]);
  }
  return q;
}

Vec7 random_rates(Rng& rng, double scale) {
  Vec7 qd;
  for (int i = 0; i < kNumCoords; ++i) qd[i] = rng.uniform(-scale, scale);
  return qd;
}

Mat2 rot(double th) {
  Mat2 R;
  R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  return R;
}

}  // namespace

TEST_CASE("hip-frame forward kinematics at reference poses") {
  ModelParams p;
  p.validate();

  Vec2 f = foot_pos_hip(p, 0.0, 0.0);
  CHECK(std::abs(f.x()) < 1e-12);
  CHECK(f.y() == doctest::Approx(-0.4).epsilon(1e-12));

  f = foot_pos_hip(p, kPi / 2.0, 0.0);
  CHECK(f.x() == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(std::abs(f.y()) < 1e-12);

  f = foot_pos_hip(p, kPi / 6.0, -kPi / 3.0);
  CHECK(std::abs(f.x()) < 1e-12);
  CHECK(f.y() == doctest::Approx(-0.34641016151377546).epsilon(1e-12));
}

TEST_CASE("hip-frame Jacobian at the straight-down pose") {
  ModelParams p;
  const Mat2 J = foot_jacobian_hip(p, 0.0, 0.0);
  CHECK(J(0, 0) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(J(0, 1) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(std::abs(J(1, 0)) < 1e-12);
  CHECK(std::abs(J(1, 1)) < 1e-12);
}

TEST_CASE("hip-frame Jacobian matches finite differences over 1000 configurations") {
  ModelParams p;
  Rng rng(1234);
  const double h = 1e-6;
  double worst = 0.0;
  for (int it = 0; it < 1000; ++it) {
    const double qh = rng.uniform(p.joint_limit(0)[0], p.joint_limit(0)[1]);
    const double qk = rng.uniform(p.joint_limit(1)[0], p.joint_limit(1)[1]);
    const Mat2 J = foot_jacobian_hip(p, qh, qk);
    Mat2 Jfd;
    Jfd.col(0) = (foot_pos_hip(p, qh + h, qk) - foot_pos_hip(p, qh - h, qk)) / (2 * h);
    Jfd.col(1) = (foot_pos_hip(p, qh, qk + h) - foot_pos_hip(p, qh, qk - h)) / (2 * h);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        const double rel = std::abs(J(r, c) - Jfd(r, c)) / std::max(1.0, std::abs(Jfd(r, c)));
        worst = std::max(worst, rel);
      }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("IK inverts FK on the in-range branch") {
  ModelParams p;
  Rng rng(77);
  for (int it = 0; it < 500; ++it) {
    const double qh = rng.uniform(-1.0, 1.5);
    const double qk = rng.uniform(p.joint_limit(1)[0] + 1e-3, p.joint_limit(1)[1] - 1e-3);
    const Vec2 foot = foot_pos_hip(p, qh, qk);
    const Vec2 sol = leg_ik_hip(p, foot);
    CHECK(sol.x() == doctest::Approx(qh).epsilon(1e-9));
    CHECK(sol.y() == doctest::Approx(qk).epsilon(1e-9));
    const Vec2 rebuilt = foot_pos_hip(p, sol.x(), sol.y());
    CHECK((rebuilt - foot).norm() < 1e-10);
  }
}

TEST_CASE("IK rejects unreachable targets") {
  ModelParams p;
  CHECK_THROWS_AS(leg_ik_hip(p, Vec2(1.0, 0.0)), std::domain_error);
  CHECK_THROWS_AS(leg_ik_hip(p, Vec2(0.0, -0.5)), std::domain_error);
}

TEST_CASE("world foot position composes base pose with leg kinematics") {
  ModelParams p;
  Rng rng(5);
  for (int it = 0; it < 200; ++it) {
    const Vec7 q = random_config(p, rng);
    for (Leg leg : {Leg::kFront, Leg::kRear}) {
      const Vec2 base(q[kBaseX], q[kBaseZ]);
      const Vec2 hip_local(p.hip_offset(leg), 0.0);
      const Vec2 expected = base + rot(q[kPitch]) * (hip_local + foot_pos_hip(p, q, leg));
      const Vec2 got = foot_pos_world(p, q, leg);
      CHECK((got - expected).norm() < 1e-12);
    }
  }
}

TEST_CASE("world foot Jacobian, velocity and bias match finite differences") {
  ModelParams p;
  Rng rng(9);
  const double h = 1e-6;
  for (int it = 0; it < 100; ++it) {
    const Vec7 q = random_config(p, rng);
    const Vec7 qd = random_rates(rng, 4.0);
    for (Leg leg : {Leg::kFront, Leg::kRear}) {
      const PointKin k = foot_kin_world(p, q, qd, leg);

      CHECK((k.vel - k.jac * qd).norm() < 1e-12);

      for (int j = 0; j < kNumCoords; ++j) {
        Vec7 qp = q, qm = q;
        qp[j] += h;
        qm[j] -= h;
        const Vec2 col =
            (foot_pos_world(p, qp, leg) - foot_pos_world(p, qm, leg)) / (2 * h);
        CHECK((k.jac.col(j) - col).norm() < 1e-6);
      }

      const Vec2 vp = foot_kin_world(p, q + h * qd, qd, leg).vel;
      const Vec2 vm = foot_kin_world(p, q - h * qd, qd, leg).vel;
      CHECK((k.bias_acc - (vp - vm) / (2 * h)).norm() < 1e-5);
    }
  }
}

TEST_CASE("centre of mass of the symmetric rest pose") {
  ModelParams p;
  Vec7 q = Vec7::Zero();
  q[kBaseZ] = 0.55;
  const Vec2 com = com_position(p, q);
  CHECK(std::abs(com.x()) < 1e-12);
  // (9.2*0.55 + 2*(1.0*0.45 + 0.4*0.25)) / 12
  CHECK(com.y() == doctest::Approx(6.16 / 12.0).epsilon(1e-12));
}

TEST_CASE("centre-of-mass velocity is the configuration derivative along the flow") {
  ModelParams p;
  Rng rng(13);
  const double h = 1e-6;
  for (int it = 0; it < 100; ++it) {
    const Vec7 q = random_config(p, rng);
    const Vec7 qd = random_rates(rng, 4.0);
    const Vec2 v = com_velocity(p, q, qd);
    const Vec2 fd = (com_position(p, q + h * qd) - com_position(p, q - h * qd)) / (2 * h);
    CHECK((v - fd).norm() < 1e-6);
  }
}
