#pragma once

#include <array>
#include <stdexcept>

#include "jumprl/model/kinematics.hpp"
#include "jumprl/model/params.hpp"

namespace jumprl {

struct SingularMassError : std::runtime_error {
  SingularMassError() : std::runtime_error("dynamics: mass matrix numerically singular") {}
};

Mat77 mass_matrix(const ModelParams& p, const Vec7& q);

// Bias vector h(q, qd): Coriolis/centrifugal plus gravity, so the equations of
// motion read M(q) qdd + h(q, qd) = S tau + sum J_c^T f_c.
Vec7 bias_forces(const ModelParams& p, const Vec7& q, const Vec7& qd);

// Free dynamics with explicit external forces applied at the feet (world
// frame). Joint torque order: fh, fk, rh, rk.
Vec7 forward_dynamics(const ModelParams& p, const PlanarState& s, const Vec4& tau,
                      const std::array<Vec2, 2>& foot_forces);

struct ContactMask {
  bool front = false;
  bool rear = false;
  int count() const { return (front ? 1 : 0) + (rear ? 1 : 0); }
};

// Pinned-foot dynamics: solves the contact-consistent KKT system
//   [M  -Jc^T] [qdd]   [S tau - h]
//   [Jc   0  ] [ f ] = [ -Jc_dot qd ]
// so stance feet have zero acceleration and f is the implied ground reaction
// force. Used by the trajectory NLP and the independent checker.
struct StanceDynamics {
  Vec7 qdd = Vec7::Zero();
  std::array<Vec2, 2> grf{Vec2::Zero(), Vec2::Zero()};  // valid where mask set

  // Derivatives, filled when requested.
  Mat77 dqdd_dq = Mat77::Zero();
  Mat77 dqdd_dqd = Mat77::Zero();
  Eigen::Matrix<double, 7, 4> dqdd_dtau = Eigen::Matrix<double, 7, 4>::Zero();
  std::array<Mat27, 2> dgrf_dq{Mat27::Zero(), Mat27::Zero()};
  std::array<Mat27, 2> dgrf_dqd{Mat27::Zero(), Mat27::Zero()};
  std::array<Eigen::Matrix<double, 2, 4>, 2> dgrf_dtau{Eigen::Matrix<double, 2, 4>::Zero(),
                                                       Eigen::Matrix<double, 2, 4>::Zero()};
};

StanceDynamics stance_dynamics(const ModelParams& p, const PlanarState& s, const Vec4& tau,
                               const ContactMask& mask, bool want_derivatives);

double kinetic_energy(const ModelParams& p, const PlanarState& s);
double potential_energy(const ModelParams& p, const Vec7& q);
inline double total_energy(const ModelParams& p, const PlanarState& s) {
  return kinetic_energy(p, s) + potential_energy(p, s.q);
}

double angular_momentum_about_com(const ModelParams& p, const PlanarState& s);

}  // namespace jumprl
