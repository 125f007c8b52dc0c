#include "jumprl/model/dynamics.hpp"

#include <Eigen/LU>

#include "model/body_geometry.hpp"

namespace jumprl {

namespace {

using detail::Geometry;
using detail::PointDerivs;
using detail::PointEval;

Vec7 angular_jac_row(std::uint8_t wmask) {
  Vec7 w = Vec7::Zero();
  for (int j = kPitch; j < kNumCoords; ++j)
    if (wmask & (1u << j)) w[j] = 1.0;
  return w;
}

Mat77 assemble_mass_matrix(const Geometry& geom, const Vec7& q) {
  Mat77 M = Mat77::Zero();
  for (const auto& body : geom.bodies) {
    const PointEval ev = detail::eval_point(body.com, q, Vec7::Zero());
    M.noalias() += body.mass * ev.jac.transpose() * ev.jac;
    const Vec7 w = angular_jac_row(body.wmask);
    M.noalias() += body.inertia * w * w.transpose();
  }
  return M;
}

Vec7 assemble_bias(const Geometry& geom, const Vec7& q, const Vec7& qd) {
  const Vec2 g(0.0, -geom.gravity);
  Vec7 h = Vec7::Zero();
  for (const auto& body : geom.bodies) {
    const PointEval ev = detail::eval_point(body.com, q, qd);
    h.noalias() += body.mass * ev.jac.transpose() * (ev.bias - g);
  }
  return h;
}

}  // namespace

Mat77 mass_matrix(const ModelParams& p, const Vec7& q) {
  return assemble_mass_matrix(Geometry::make(p), q);
}

Vec7 bias_forces(const ModelParams& p, const Vec7& q, const Vec7& qd) {
  return assemble_bias(Geometry::make(p), q, qd);
}

Vec7 forward_dynamics(const ModelParams& p, const PlanarState& s, const Vec4& tau,
                      const std::array<Vec2, 2>& foot_forces) {
  if (!s.finite() || !tau.allFinite()) throw SingularMassError();
  const Geometry geom = Geometry::make(p);
  const Mat77 M = assemble_mass_matrix(geom, s.q);
  Vec7 rhs = -assemble_bias(geom, s.q, s.qd);
  for (int j = 0; j < kNumJoints; ++j) rhs[kFrontHip + j] += tau[j];
  for (int f = 0; f < 2; ++f) {
    if (foot_forces[f].isZero()) continue;
    const PointEval foot = detail::eval_point(geom.feet[f], s.q, s.qd);
    rhs.noalias() += foot.jac.transpose() * foot_forces[f];
  }
  Eigen::LDLT<Mat77> ldlt(M);
  if (ldlt.info() != Eigen::Success) throw SingularMassError();
  const Vec7 qdd = ldlt.solve(rhs);
  if (!qdd.allFinite()) throw SingularMassError();
  return qdd;
}

StanceDynamics stance_dynamics(const ModelParams& p, const PlanarState& s, const Vec4& tau,
                               const ContactMask& mask, bool want_derivatives) {
  if (!s.finite() || !tau.allFinite()) throw SingularMassError();
  const Geometry geom = Geometry::make(p);
  const int nc = mask.count();
  const int dim = kNumCoords + 2 * nc;

  // Body kinematics, reused by the derivative pass.
  PointEval body_ev[5];
  for (int b = 0; b < 5; ++b) body_ev[b] = detail::eval_point(geom.bodies[b].com, s.q, s.qd);

  Mat77 M = Mat77::Zero();
  Vec7 h = Vec7::Zero();
  const Vec2 g(0.0, -geom.gravity);
  for (int b = 0; b < 5; ++b) {
    const auto& body = geom.bodies[b];
    M.noalias() += body.mass * body_ev[b].jac.transpose() * body_ev[b].jac;
    const Vec7 w = angular_jac_row(body.wmask);
    M.noalias() += body.inertia * w * w.transpose();
    h.noalias() += body.mass * body_ev[b].jac.transpose() * (body_ev[b].bias - g);
  }

  int stance_feet[2] = {-1, -1};
  int row = 0;
  if (mask.front) stance_feet[row++] = 0;
  if (mask.rear) stance_feet[row++] = 1;

  PointEval foot_ev[2];
  for (int c = 0; c < nc; ++c) foot_ev[c] = detail::eval_point(geom.feet[stance_feet[c]], s.q, s.qd);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
  A.topLeftCorner<7, 7>() = M;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
  b.head<7>() = -h;
  for (int j = 0; j < kNumJoints; ++j) b[kFrontHip + j] += tau[j];
  for (int c = 0; c < nc; ++c) {
    A.block<2, 7>(7 + 2 * c, 0) = foot_ev[c].jac;
    A.block<7, 2>(0, 7 + 2 * c) = -foot_ev[c].jac.transpose();
    b.segment<2>(7 + 2 * c) = -foot_ev[c].bias;
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const Eigen::VectorXd y = lu.solve(b);
  if (!y.allFinite()) throw SingularMassError();

  StanceDynamics out;
  out.qdd = y.head<7>();
  for (int c = 0; c < nc; ++c) out.grf[stance_feet[c]] = y.segment<2>(7 + 2 * c);
  if (!want_derivatives) return out;

  PointDerivs body_dv[5];
  for (int b2 = 0; b2 < 5; ++b2) detail::eval_point_derivs(geom.bodies[b2].com, s.q, s.qd, body_dv[b2]);
  PointDerivs foot_dv[2];
  for (int c = 0; c < nc; ++c) detail::eval_point_derivs(geom.feet[stance_feet[c]], s.q, s.qd, foot_dv[c]);

  // d y / d theta = A^{-1} (db - dA * y), assembled column by column.
  Eigen::MatrixXd rhs(dim, 2 * kNumCoords + kNumJoints);
  rhs.setZero();
  for (int l = 0; l < kNumCoords; ++l) {
    // with respect to q_l
    Vec7 dh = Vec7::Zero();
    Mat77 dM = Mat77::Zero();
    for (int b2 = 0; b2 < 5; ++b2) {
      const auto& body = geom.bodies[b2];
      const Mat27& J = body_ev[b2].jac;
      const Mat27& D = body_dv[b2].djac_dq[l];
      dM.noalias() += body.mass * (D.transpose() * J + J.transpose() * D);
      dh.noalias() += body.mass * (D.transpose() * (body_ev[b2].bias - g) + J.transpose() * body_dv[b2].dbias_dq[l]);
    }
    Eigen::VectorXd col = Eigen::VectorXd::Zero(dim);
    col.head<7>() = -dh - dM * out.qdd;
    for (int c = 0; c < nc; ++c) {
      const Mat27& Dc = foot_dv[c].djac_dq[l];
      col.head<7>().noalias() += Dc.transpose() * y.segment<2>(7 + 2 * c);
      col.segment<2>(7 + 2 * c) = -foot_dv[c].dbias_dq[l] - Dc * out.qdd;
    }
    rhs.col(l) = col;

    // with respect to qd_l
    Vec7 dh_v = Vec7::Zero();
    for (int b2 = 0; b2 < 5; ++b2)
      dh_v.noalias() += geom.bodies[b2].mass * body_ev[b2].jac.transpose() * body_dv[b2].dbias_dqd[l];
    Eigen::VectorXd col_v = Eigen::VectorXd::Zero(dim);
    col_v.head<7>() = -dh_v;
    for (int c = 0; c < nc; ++c) col_v.segment<2>(7 + 2 * c) = -foot_dv[c].dbias_dqd[l];
    rhs.col(kNumCoords + l) = col_v;
  }
  for (int j = 0; j < kNumJoints; ++j) rhs(kFrontHip + j, 2 * kNumCoords + j) = 1.0;

  const Eigen::MatrixXd dy = lu.solve(rhs);
  out.dqdd_dq = dy.block<7, 7>(0, 0);
  out.dqdd_dqd = dy.block<7, 7>(0, kNumCoords);
  out.dqdd_dtau = dy.block<7, 4>(0, 2 * kNumCoords);
  for (int c = 0; c < nc; ++c) {
    const int f = stance_feet[c];
    out.dgrf_dq[f] = dy.block<2, 7>(7 + 2 * c, 0);
    out.dgrf_dqd[f] = dy.block<2, 7>(7 + 2 * c, kNumCoords);
    out.dgrf_dtau[f] = dy.block<2, 4>(7 + 2 * c, 2 * kNumCoords);
  }
  return out;
}

double kinetic_energy(const ModelParams& p, const PlanarState& s) {
  return 0.5 * s.qd.dot(mass_matrix(p, s.q) * s.qd);
}

double potential_energy(const ModelParams& p, const Vec7& q) {
  return p.total_mass() * p.gravity * com_position(p, q).y();
}

double angular_momentum_about_com(const ModelParams& p, const PlanarState& s) {
  const Geometry geom = Geometry::make(p);
  const Vec2 com = com_position(p, s.q);
  const Vec2 com_vel = com_velocity(p, s.q, s.qd);
  double L = 0.0;
  for (const auto& body : geom.bodies) {
    const PointEval ev = detail::eval_point(body.com, s.q, s.qd);
    const Vec2 r = ev.pos - com;
    const Vec2 v = ev.vel - com_vel;
    double omega = 0.0;
    for (int j = kPitch; j < kNumCoords; ++j)
      if (body.wmask & (1u << j)) omega += s.qd[j];
    L += body.inertia * omega + body.mass * (r.x() * v.y() - r.y() * v.x());
  }
  return L;
}

}  // namespace jumprl
