#include "jumprl/trajopt/jump_nlp.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "jumprl/model/kinematics.hpp"
#include "jumprl/model/terrain.hpp"

namespace jumprl {
namespace {

constexpr int kVarsPerKnot = 18;
constexpr double kScaleQd = 10.0;
constexpr double kScaleU = 50.0;
constexpr double kForceScale = 100.0;
constexpr double kBlendWidth = 0.05;

int iq(int k) { return kVarsPerKnot * k; }
int iqd(int k) { return kVarsPerKnot * k + 7; }
int iu(int k) { return kVarsPerKnot * k + 14; }

// Smoothstep platform profile that reaches the full height exactly at the
// edge, so feet clearing it also clear the sharp terrain used in simulation.
void platform_profile(double x, double edge, double* sigma, double* dsigma) {
  double u = (x - (edge - kBlendWidth)) / kBlendWidth;
  if (u <= 0.0) {
    *sigma = 0.0;
    *dsigma = 0.0;
  } else if (u >= 1.0) {
    *sigma = 1.0;
    *dsigma = 0.0;
  } else {
    *sigma = u * u * (3.0 - 2.0 * u);
    *dsigma = 6.0 * u * (1.0 - u) / kBlendWidth;
  }
}

}  // namespace

PlanarState crouch_state(const ModelParams& p) {
  PlanarState s;
  s.q[kBaseZ] = kCrouchHeight;
  const Vec2 j = leg_ik_hip(p, Vec2(0.0, -kCrouchHeight));
  s.q[kFrontHip] = j[0];
  s.q[kFrontKnee] = j[1];
  s.q[kRearHip] = j[0];
  s.q[kRearKnee] = j[1];
  return s;
}

Vec2 preland_joints(const ModelParams& p) {
  return leg_ik_hip(p, Vec2(0.0, -kPreLandExtension));
}

JumpNlp::JumpNlp(const ModelParams& p, const JumpTarget& target, const PhaseSchedule& schedule,
                 const JumpNlpOptions& opts)
    : p_(p), target_(target), schedule_(schedule), opts_(opts) {
  schedule_.validate();
  check_ballistic_feasibility(target_, schedule_);
  n_knots_ = schedule_.num_knots();

  const int K = schedule_.num_intervals();
  const int Kd = schedule_.k_double();
  const int Ks = schedule_.k_single();
  const int N = n_knots_;

  layout_.eq_init = 0;
  layout_.eq_defects = 14;
  layout_.eq_front_pins = layout_.eq_defects + 14 * K;
  layout_.eq_rear_pins = layout_.eq_front_pins + 2 * (Kd + 1);
  layout_.eq_boundary = layout_.eq_rear_pins + 2 * (Kd + Ks + 1);
  layout_.n_eq = layout_.eq_boundary + 7;

  layout_.ineq_box = 0;
  layout_.ineq_grf = 24 * N;
  layout_.ineq_clearance = layout_.ineq_grf + 3 * (2 * Kd + Ks);
  const int n_clear_front = std::max(0, (N - 2) - (Kd + 1) + 1);
  const int n_clear_rear = std::max(0, (N - 2) - (Kd + Ks + 1) + 1);
  layout_.n_ineq = layout_.ineq_clearance + n_clear_front + n_clear_rear;

  // Every knot is evaluated under the contact mask of each interval touching
  // it; phase-boundary knots appear under two masks.
  knot_masks_.resize(N);
  int slots = 0;
  for (int k = 0; k < N; ++k) {
    auto add = [&](const ContactMask& m) {
      for (const KnotMask& km : knot_masks_[k])
        if (km.mask.front == m.front && km.mask.rear == m.rear) return;
      knot_masks_[k].push_back({m, slots++});
    };
    if (k > 0) add(schedule_.interval_mask(k - 1));
    if (k < K) add(schedule_.interval_mask(k));
  }
  dyn_.resize(slots);
  feet_.resize(N);

  scale_ = VecX::Ones(num_vars());
  for (int k = 0; k < N; ++k) {
    scale_.segment<7>(iqd(k)).setConstant(kScaleQd);
    scale_.segment<4>(iu(k)).setConstant(kScaleU);
  }

  x_init_ = crouch_state(p_);
  q_land_ = preland_joints(p_);
  anchors_[0] = foot_pos_world(p_, x_init_.q, Leg::kFront);
  anchors_[1] = foot_pos_world(p_, x_init_.q, Leg::kRear);
}

int JumpNlp::slot_for(int knot, const ContactMask& mask) const {
  for (const KnotMask& km : knot_masks_[knot])
    if (km.mask.front == mask.front && km.mask.rear == mask.rear) return km.slot;
  throw std::logic_error("jump nlp: knot evaluated under an unregistered contact mask");
}

double JumpNlp::eval(const VecX& x, VecX& c, VecX& psi) {
  c.resize(num_eq());
  psi.resize(num_ineq());
  return assemble(x, &c, &psi, nullptr, nullptr, nullptr);
}

void JumpNlp::grad_combination(const VecX& x, const VecX& wc, const VecX& wpsi, VecX& grad) {
  grad.resize(num_vars());
  assemble(x, nullptr, nullptr, &wc, &wpsi, &grad);
}

double JumpNlp::eval_full(const VecX& x, VecX& grad_f, VecX& obj_curvature, VecX& c, SpMat& Jc,
                          VecX& psi, SpMat& Jpsi) {
  c.resize(num_eq());
  psi.resize(num_ineq());
  obj_curvature = VecX::Zero(num_vars());
  Triplets ct, pt;
  ct.reserve(320 * static_cast<size_t>(n_knots_));
  pt.reserve(80 * static_cast<size_t>(n_knots_));
  const double f = assemble(x, &c, &psi, nullptr, nullptr, nullptr, &ct, &pt, &grad_f,
                            &obj_curvature);
  Jc.resize(num_eq(), num_vars());
  Jc.setFromTriplets(ct.begin(), ct.end());
  Jpsi.resize(num_ineq(), num_vars());
  Jpsi.setFromTriplets(pt.begin(), pt.end());
  return f;
}

double JumpNlp::assemble(const VecX& z, VecX* c, VecX* psi, const VecX* wc, const VecX* wpsi,
                         VecX* grad, Triplets* Jc_t, Triplets* Jpsi_t, VecX* grad_f,
                         VecX* curv) {
  const int N = n_knots_;
  const int K = N - 1;
  const int Kd = schedule_.k_double();
  const int Ks = schedule_.k_single();
  const double h = schedule_.h;
  const bool want_grad = grad != nullptr;
  const bool want_jac = Jc_t != nullptr;

  const VecX xp = scale_.cwiseProduct(z);
  std::vector<PlanarState> xs(N);
  std::vector<Vec4> us(N);
  for (int k = 0; k < N; ++k) {
    xs[k].q = xp.segment<7>(iq(k));
    xs[k].qd = xp.segment<7>(iqd(k));
    us[k] = xp.segment<4>(iu(k));
  }

  for (int k = 0; k < N; ++k)
    for (const KnotMask& km : knot_masks_[k])
      dyn_[km.slot] = stance_dynamics(p_, xs[k], us[k], km.mask, want_grad || want_jac);
  for (int k = 0; k < N; ++k)
    for (int f = 0; f < 2; ++f)
      feet_[k][f] = foot_kin_world(p_, xs[k].q, xs[k].qd, f == 0 ? Leg::kFront : Leg::kRear);

  VecX gp;
  if (want_grad) gp = VecX::Zero(num_vars());
  VecX gf;
  if (grad_f) gf = VecX::Zero(num_vars());

  // Jacobian coefficients are emitted in solver coordinates, i.e. scaled by
  // the column's variable scale.
  auto ec = [&](int r, int col, double v) { Jc_t->emplace_back(r, col, v * scale_[col]); };
  auto ei = [&](int r, int col, double v) { Jpsi_t->emplace_back(r, col, v * scale_[col]); };

  // Objective: control energy plus a soft terminal pose term.
  double fval = 0.0;
  for (int k = 0; k < N; ++k) {
    fval += opts_.w_energy * h * us[k].squaredNorm();
    if (want_grad) gp.segment<4>(iu(k)) += 2.0 * opts_.w_energy * h * us[k];
    if (grad_f) gf.segment<4>(iu(k)) += 2.0 * opts_.w_energy * h * us[k];
    if (curv)
      curv->segment<4>(iu(k)).array() += 2.0 * opts_.w_energy * h * kScaleU * kScaleU;
  }
  const Vec2 bp = target_.final_body_pos();
  const double pose_tgt[3] = {bp.x(), bp.y(), 0.0};
  for (int i = 0; i < 3; ++i) {
    const double e = xs[N - 1].q[i] - pose_tgt[i];
    fval += opts_.w_pose * e * e;
    if (want_grad) gp[iq(N - 1) + i] += 2.0 * opts_.w_pose * e;
    if (grad_f) gf[iq(N - 1) + i] += 2.0 * opts_.w_pose * e;
    if (curv) (*curv)[iq(N - 1) + i] += 2.0 * opts_.w_pose;
  }

  // ---- Equalities ----
  int row = 0;

  // Frozen initial state.
  for (int i = 0; i < 7; ++i) {
    if (c) (*c)[row] = xs[0].q[i] - x_init_.q[i];
    if (want_grad) gp[iq(0) + i] += (*wc)[row];
    if (want_jac) ec(row, iq(0) + i, 1.0);
    ++row;
  }
  for (int i = 0; i < 7; ++i) {
    if (c) (*c)[row] = xs[0].qd[i] - x_init_.qd[i];
    if (want_grad) gp[iqd(0) + i] += (*wc)[row];
    if (want_jac) ec(row, iqd(0) + i, 1.0);
    ++row;
  }

  // Trapezoidal defects.
  for (int i = 0; i < K; ++i) {
    const ContactMask m = schedule_.interval_mask(i);
    const StanceDynamics& da = dyn_[slot_for(i, m)];
    const StanceDynamics& db = dyn_[slot_for(i + 1, m)];

    if (c)
      c->segment<7>(row) = xs[i + 1].q - xs[i].q - 0.5 * h * (xs[i].qd + xs[i + 1].qd);
    if (want_grad) {
      const Vec7 w = wc->segment<7>(row);
      gp.segment<7>(iq(i + 1)) += w;
      gp.segment<7>(iq(i)) -= w;
      gp.segment<7>(iqd(i)) -= 0.5 * h * w;
      gp.segment<7>(iqd(i + 1)) -= 0.5 * h * w;
    }
    if (want_jac)
      for (int j = 0; j < 7; ++j) {
        ec(row + j, iq(i + 1) + j, 1.0);
        ec(row + j, iq(i) + j, -1.0);
        ec(row + j, iqd(i) + j, -0.5 * h);
        ec(row + j, iqd(i + 1) + j, -0.5 * h);
      }
    row += 7;

    if (c)
      c->segment<7>(row) = xs[i + 1].qd - xs[i].qd - 0.5 * h * (da.qdd + db.qdd);
    if (want_grad) {
      const Vec7 w = wc->segment<7>(row);
      gp.segment<7>(iqd(i + 1)) += w;
      gp.segment<7>(iqd(i)) -= w;
      gp.segment<7>(iq(i)) -= 0.5 * h * (da.dqdd_dq.transpose() * w);
      gp.segment<7>(iqd(i)) -= 0.5 * h * (da.dqdd_dqd.transpose() * w);
      gp.segment<4>(iu(i)) -= 0.5 * h * (da.dqdd_dtau.transpose() * w);
      gp.segment<7>(iq(i + 1)) -= 0.5 * h * (db.dqdd_dq.transpose() * w);
      gp.segment<7>(iqd(i + 1)) -= 0.5 * h * (db.dqdd_dqd.transpose() * w);
      gp.segment<4>(iu(i + 1)) -= 0.5 * h * (db.dqdd_dtau.transpose() * w);
    }
    if (want_jac)
      for (int j = 0; j < 7; ++j) {
        ec(row + j, iqd(i + 1) + j, 1.0);
        ec(row + j, iqd(i) + j, -1.0);
        for (int m = 0; m < 7; ++m) {
          ec(row + j, iq(i) + m, -0.5 * h * da.dqdd_dq(j, m));
          ec(row + j, iqd(i) + m, -0.5 * h * da.dqdd_dqd(j, m));
          ec(row + j, iq(i + 1) + m, -0.5 * h * db.dqdd_dq(j, m));
          ec(row + j, iqd(i + 1) + m, -0.5 * h * db.dqdd_dqd(j, m));
        }
        for (int m = 0; m < 4; ++m) {
          ec(row + j, iu(i) + m, -0.5 * h * da.dqdd_dtau(j, m));
          ec(row + j, iu(i + 1) + m, -0.5 * h * db.dqdd_dtau(j, m));
        }
      }
    row += 7;
  }

  // Stance foot pins.
  auto pin_rows = [&](int k, int f) {
    const PointKin& pk = feet_[k][f];
    if (c) c->segment<2>(row) = pk.pos - anchors_[f];
    if (want_grad) gp.segment<7>(iq(k)) += pk.jac.transpose() * wc->segment<2>(row);
    if (want_jac)
      for (int j = 0; j < 2; ++j)
        for (int m = 0; m < 7; ++m) ec(row + j, iq(k) + m, pk.jac(j, m));
    row += 2;
  };
  for (int k = 0; k <= Kd; ++k) pin_rows(k, 0);
  for (int k = 0; k <= Kd + Ks; ++k) pin_rows(k, 1);

  // Terminal body pose and pre-landing legs.
  for (int i = 0; i < 3; ++i) {
    if (c) (*c)[row] = xs[N - 1].q[i] - pose_tgt[i];
    if (want_grad) gp[iq(N - 1) + i] += (*wc)[row];
    if (want_jac) ec(row, iq(N - 1) + i, 1.0);
    ++row;
  }
  for (int j = 0; j < 4; ++j) {
    const double tgt = (j % 2 == 0) ? q_land_[0] : q_land_[1];
    if (c) (*c)[row] = xs[N - 1].q[3 + j] - tgt;
    if (want_grad) gp[iq(N - 1) + 3 + j] += (*wc)[row];
    if (want_jac) ec(row, iq(N - 1) + 3 + j, 1.0);
    ++row;
  }
  assert(row == layout_.n_eq);
  (void)row;

  // ---- Inequalities (psi >= 0) ----
  int irow = 0;
  const double margin = opts_.ineq_margin;
  const double u_lim = opts_.torque_headroom * p_.torque_limit;

  for (int k = 0; k < N; ++k) {
    for (int j = 0; j < 4; ++j) {
      const auto& lim = p_.joint_limit(j);
      const double qj = xs[k].q[3 + j];
      if (psi) (*psi)[irow] = (qj - lim[0]) - margin;
      if (want_grad) gp[iq(k) + 3 + j] += (*wpsi)[irow];
      if (want_jac) ei(irow, iq(k) + 3 + j, 1.0);
      ++irow;
      if (psi) (*psi)[irow] = (lim[1] - qj) - margin;
      if (want_grad) gp[iq(k) + 3 + j] -= (*wpsi)[irow];
      if (want_jac) ei(irow, iq(k) + 3 + j, -1.0);
      ++irow;
    }
    for (int j = 0; j < 4; ++j) {
      const double vj = xs[k].qd[3 + j];
      if (psi) (*psi)[irow] = (p_.speed_limit - vj) / p_.speed_limit - margin;
      if (want_grad) gp[iqd(k) + 3 + j] -= (*wpsi)[irow] / p_.speed_limit;
      if (want_jac) ei(irow, iqd(k) + 3 + j, -1.0 / p_.speed_limit);
      ++irow;
      if (psi) (*psi)[irow] = (vj + p_.speed_limit) / p_.speed_limit - margin;
      if (want_grad) gp[iqd(k) + 3 + j] += (*wpsi)[irow] / p_.speed_limit;
      if (want_jac) ei(irow, iqd(k) + 3 + j, 1.0 / p_.speed_limit);
      ++irow;
    }
    for (int j = 0; j < 4; ++j) {
      const double uj = us[k][j];
      if (psi) (*psi)[irow] = (u_lim - uj) / p_.torque_limit - margin;
      if (want_grad) gp[iu(k) + j] -= (*wpsi)[irow] / p_.torque_limit;
      if (want_jac) ei(irow, iu(k) + j, -1.0 / p_.torque_limit);
      ++irow;
      if (psi) (*psi)[irow] = (uj + u_lim) / p_.torque_limit - margin;
      if (want_grad) gp[iu(k) + j] += (*wpsi)[irow] / p_.torque_limit;
      if (want_jac) ei(irow, iu(k) + j, 1.0 / p_.torque_limit);
      ++irow;
    }
  }

  // Ground reaction force bounds at stance interval left endpoints: minimum
  // normal force and the friction cone.
  const double mu = Terrain{}.friction;
  for (int i = 0; i < Kd + Ks; ++i) {
    const ContactMask m = schedule_.interval_mask(i);
    const StanceDynamics& d = dyn_[slot_for(i, m)];
    for (int f = 0; f < 2; ++f) {
      if (!(f == 0 ? m.front : m.rear)) continue;
      const Vec2 g = d.grf[f];
      auto grf_grad = [&](double w_fx, double w_fz) {
        gp.segment<7>(iq(i)) +=
            (w_fx * d.dgrf_dq[f].row(0) + w_fz * d.dgrf_dq[f].row(1)).transpose();
        gp.segment<7>(iqd(i)) +=
            (w_fx * d.dgrf_dqd[f].row(0) + w_fz * d.dgrf_dqd[f].row(1)).transpose();
        gp.segment<4>(iu(i)) +=
            (w_fx * d.dgrf_dtau[f].row(0) + w_fz * d.dgrf_dtau[f].row(1)).transpose();
      };
      auto grf_jac = [&](double w_fx, double w_fz) {
        for (int m = 0; m < 7; ++m) {
          ei(irow, iq(i) + m, w_fx * d.dgrf_dq[f](0, m) + w_fz * d.dgrf_dq[f](1, m));
          ei(irow, iqd(i) + m, w_fx * d.dgrf_dqd[f](0, m) + w_fz * d.dgrf_dqd[f](1, m));
        }
        for (int m = 0; m < 4; ++m)
          ei(irow, iu(i) + m, w_fx * d.dgrf_dtau[f](0, m) + w_fz * d.dgrf_dtau[f](1, m));
      };
      if (psi) (*psi)[irow] = (g.y() - opts_.grf_min) / kForceScale - margin;
      if (want_grad) grf_grad(0.0, (*wpsi)[irow] / kForceScale);
      if (want_jac) grf_jac(0.0, 1.0 / kForceScale);
      ++irow;
      if (psi) (*psi)[irow] = (mu * g.y() - g.x()) / kForceScale - margin;
      if (want_grad) grf_grad(-(*wpsi)[irow] / kForceScale, mu * (*wpsi)[irow] / kForceScale);
      if (want_jac) grf_jac(-1.0 / kForceScale, mu / kForceScale);
      ++irow;
      if (psi) (*psi)[irow] = (mu * g.y() + g.x()) / kForceScale - margin;
      if (want_grad) grf_grad((*wpsi)[irow] / kForceScale, mu * (*wpsi)[irow] / kForceScale);
      if (want_jac) grf_jac(1.0 / kForceScale, mu / kForceScale);
      ++irow;
    }
  }

  // Swing and flight feet stay above the (smoothed) terrain; the touchdown
  // knot is exempt since its feet sit exactly on the platform.
  const double edge = target_.platform_edge();
  auto clearance_row = [&](int k, int f) {
    const PointKin& pk = feet_[k][f];
    double sig, dsig;
    platform_profile(pk.pos.x(), edge, &sig, &dsig);
    if (psi) (*psi)[irow] = pk.pos.y() - target_.height * sig - opts_.clearance_margin;
    if (want_grad)
      gp.segment<7>(iq(k)) +=
          (*wpsi)[irow] * (pk.jac.row(1) - target_.height * dsig * pk.jac.row(0)).transpose();
    if (want_jac)
      for (int m = 0; m < 7; ++m)
        ei(irow, iq(k) + m, pk.jac(1, m) - target_.height * dsig * pk.jac(0, m));
    ++irow;
  };
  for (int k = Kd + 1; k <= N - 2; ++k) clearance_row(k, 0);
  for (int k = Kd + Ks + 1; k <= N - 2; ++k) clearance_row(k, 1);
  assert(irow == layout_.n_ineq);
  (void)irow;

  if (want_grad) *grad = scale_.cwiseProduct(gp);
  if (grad_f) *grad_f = scale_.cwiseProduct(gf);
  return fval;
}

VecX JumpNlp::initial_guess() const {
  const int N = n_knots_;
  const int Kd = schedule_.k_double();
  const int Ks = schedule_.k_single();
  const int Kf = schedule_.k_flight();
  const int Kg = Kd + Ks;
  const double h = schedule_.h;
  const double g = p_.gravity;

  std::vector<Vec7> q(N, x_init_.q);
  std::vector<Vec4> u(N, Vec4::Zero());

  if (Kf > 0) {
    const double Tf = schedule_.t_flight;
    const double x_to = 0.05, z_to = opts_.guess_takeoff_z;
    const Vec2 land = target_.final_body_pos();
    const double vx = (land.x() - x_to) / Tf;
    const double vz = (land.y() - z_to + 0.5 * g * Tf * Tf) / Tf;

    // Ground phase: hold the crouch through double stance, then a C1 ramp to
    // the takeoff state over the single-stance phase, legs following by IK so
    // the feet stay put.
    for (int k = 0; k <= Kg; ++k) {
      Vec2 base(0.0, kCrouchHeight);
      if (k > Kd) {
        const double s = static_cast<double>(k - Kd) / Ks;
        const double ts = schedule_.t_single;
        const double h00 = 2 * s * s * s - 3 * s * s + 1;
        const double h01 = -2 * s * s * s + 3 * s * s;
        const double h11 = s * s * s - s * s;
        base.x() = h00 * 0.0 + h01 * x_to + h11 * ts * vx;
        base.y() = h00 * kCrouchHeight + h01 * z_to + h11 * ts * vz;
      }
      q[k][kBaseX] = base.x();
      q[k][kBaseZ] = base.y();
      // The rear foot stays anchored throughout; the front foot is anchored
      // only while it carries load, then lifts toward the landing pose so it
      // clears the ground instead of stretching after the departing base.
      const Vec2 foot_hip_r = anchors_[1] - base - Vec2(p_.hip_offset(Leg::kRear), 0.0);
      const Vec2 jr = leg_ik_hip(p_, foot_hip_r);
      q[k][kRearHip] = jr[0];
      q[k][kRearKnee] = jr[1];
      if (k <= Kd) {
        const Vec2 foot_hip_f = anchors_[0] - base - Vec2(p_.hip_offset(Leg::kFront), 0.0);
        const Vec2 jf = leg_ik_hip(p_, foot_hip_f);
        q[k][kFrontHip] = jf[0];
        q[k][kFrontKnee] = jf[1];
      } else {
        const double s = static_cast<double>(k - Kd) / Ks;
        const double ss = s * s * (3.0 - 2.0 * s);
        const Vec2 front0(x_init_.q[kFrontHip], x_init_.q[kFrontKnee]);
        const Vec2 jf = (1.0 - ss) * front0 + ss * q_land_;
        q[k][kFrontHip] = jf[0];
        q[k][kFrontKnee] = jf[1];
      }
    }
    // Flight: ballistic base, each leg blending from its own takeoff pose to
    // the landing configuration.
    const Vec2 front_to(q[Kg][kFrontHip], q[Kg][kFrontKnee]);
    const Vec2 rear_to(q[Kg][kRearHip], q[Kg][kRearKnee]);
    for (int k = Kg + 1; k < N; ++k) {
      const double t = (k - Kg) * h;
      q[k][kBaseX] = x_to + vx * t;
      q[k][kBaseZ] = z_to + vz * t - 0.5 * g * t * t;
      q[k][kPitch] = 0.0;
      const double a = static_cast<double>(k - Kg) / Kf;
      const Vec2 fl = (1.0 - a) * front_to + a * q_land_;
      const Vec2 rl = (1.0 - a) * rear_to + a * q_land_;
      q[k][kFrontHip] = fl[0];
      q[k][kFrontKnee] = fl[1];
      q[k][kRearHip] = rl[0];
      q[k][kRearKnee] = rl[1];
    }
  }

  std::vector<Vec7> qd(N);
  for (int k = 0; k < N; ++k) {
    if (k == 0)
      qd[k] = (q[1] - q[0]) / h;
    else if (k == N - 1)
      qd[k] = (q[N - 1] - q[N - 2]) / h;
    else
      qd[k] = (q[k + 1] - q[k - 1]) / (2.0 * h);
    for (int j = 3; j < 7; ++j)
      qd[k][j] = std::clamp(qd[k][j], -0.95 * p_.speed_limit, 0.95 * p_.speed_limit);
  }
  if (Kf == 0)
    for (auto& v : qd) v.setZero();

  // Torque guess by inverse dynamics: the least-squares torques that best
  // reproduce the finite-difference accelerations of the kinematic guess
  // under each interval's contact model. Starting dynamically consistent
  // keeps the solver out of degenerate high-speed basins.
  const double u_cap = 0.9 * opts_.torque_headroom * p_.torque_limit;
  const int K = N - 1;
  for (int k = 0; k < N; ++k) {
    Vec7 aref;
    if (k == 0)
      aref = (qd[1] - qd[0]) / h;
    else if (k == N - 1)
      aref = (qd[N - 1] - qd[N - 2]) / h;
    else
      aref = (qd[k + 1] - qd[k - 1]) / (2.0 * h);

    PlanarState s;
    s.q = q[k];
    s.qd = qd[k];
    const ContactMask m = schedule_.interval_mask(std::min(k, K - 1));
    const StanceDynamics d0 = stance_dynamics(p_, s, Vec4::Zero(), m, true);
    const Vec4 ls = d0.dqdd_dtau.colPivHouseholderQr().solve(aref - d0.qdd);
    u[k] = ls.cwiseMax(-u_cap).cwiseMin(u_cap);
  }

  KnotTrajectory traj;
  traj.target = target_;
  traj.schedule = schedule_;
  traj.q = q;
  traj.qd = qd;
  traj.tau = u;
  return pack(traj);
}

KnotTrajectory JumpNlp::unpack(const VecX& z) const {
  const VecX xp = scale_.cwiseProduct(z);
  KnotTrajectory traj;
  traj.target = target_;
  traj.schedule = schedule_;
  traj.q.resize(n_knots_);
  traj.qd.resize(n_knots_);
  traj.tau.resize(n_knots_);
  for (int k = 0; k < n_knots_; ++k) {
    traj.q[k] = xp.segment<7>(iq(k));
    traj.qd[k] = xp.segment<7>(iqd(k));
    traj.tau[k] = xp.segment<4>(iu(k));
  }
  return traj;
}

VecX JumpNlp::pack(const KnotTrajectory& traj) const {
  if (traj.num_knots() != n_knots_)
    throw std::invalid_argument("pack: knot count does not match the schedule");
  VecX xp(num_vars());
  for (int k = 0; k < n_knots_; ++k) {
    xp.segment<7>(iq(k)) = traj.q[k];
    xp.segment<7>(iqd(k)) = traj.qd[k];
    xp.segment<4>(iu(k)) = traj.tau[k];
  }
  return xp.cwiseQuotient(scale_);
}

JumpSolveResult solve_jump(const ModelParams& p, const JumpTarget& target,
                           const PhaseSchedule& schedule, const JumpNlpOptions& opts) {
  JumpNlp nlp(p, target, schedule, opts);
  VecX x = nlp.initial_guess();
  AlReport report = solve_al(nlp, x, opts.al);

  // The multiplier stage optimizes the cost but closes the last decade of
  // constraint residual slowly; a pure feasibility polish finishes the job
  // quadratically while barely moving the iterate.
  const PolishReport pol = polish_feasibility(nlp, x, opts.polish);

  VecX c(nlp.num_eq()), psi(nlp.num_ineq());
  report.cost = nlp.eval(x, c, psi);
  report.max_eq = c.lpNorm<Eigen::Infinity>();
  report.min_ineq = psi.minCoeff();
  report.converged = pol.feasible;
  report.message = (pol.feasible ? std::string("feasible") : std::string("NOT feasible")) +
                   ": max |c| = " + std::to_string(report.max_eq) +
                   ", min psi = " + std::to_string(report.min_ineq) + " (" +
                   std::to_string(report.inner_iters) + " inner + " +
                   std::to_string(pol.iters) + " polish iterations)";
  return {nlp.unpack(x), report};
}

}  // namespace jumprl
