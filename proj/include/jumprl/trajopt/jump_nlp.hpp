#pragma once

#include <array>
#include <vector>

#include "jumprl/model/dynamics.hpp"
#include "jumprl/model/params.hpp"
#include "jumprl/trajopt/nlp.hpp"
#include "jumprl/trajopt/schedule.hpp"
#include "jumprl/trajopt/trajectory.hpp"

namespace jumprl {

// Crouch used as the jump's frozen initial state: body at the crouch height,
// zero pitch, both feet on the ground directly below their hips.
PlanarState crouch_state(const ModelParams& p);

// Leg configuration commanded for touchdown: feet below the hips at the
// pre-landing extension. Returns (hip, knee), same for both legs.
Vec2 preland_joints(const ModelParams& p);

// Solver settings that work across the whole target grid. The inner budget is
// generous because the multiplier updates are gated on inner convergence: a
// starved inner loop degenerates into a pure penalty method.
inline AlOptions default_jump_al_options() {
  AlOptions o;
  o.max_outer = 12;
  o.max_inner_per_outer = 1500;
  o.max_inner_total = 4500;
  o.rho_eq = 1e4;
  o.rho_ineq = 1e4;
  o.rho_growth = 3.0;
  o.rho_max = 1e7;
  o.eq_tol = 2e-5;
  o.ineq_tol = 1e-6;  // constraints carry their own shift margins on top
  o.grad_tol_start = 3e-2;
  o.grad_tol_final = 1e-5;
  return o;
}

struct JumpNlpOptions {
  double w_energy = 1e-4;   // weight on sum ||u||^2 h
  double w_pose = 10.0;     // terminal body-pose quadratic
  double torque_headroom = 0.97;   // fraction of the torque limit offered to the NLP
  double grf_min = 10.0;           // minimum normal force on stance feet [N]
  double ineq_margin = 1e-4;       // shift on scaled box / force inequalities
  double clearance_margin = 1e-5;  // shift on clearance ordinates [m]
  double guess_takeoff_z = 0.30;   // body height the warm start leaves the ground at
  AlOptions al = default_jump_al_options();
  PolishOptions polish;
};

// Direct transcription of one jump on the contact phase schedule:
// trapezoidal collocation over all knots with per-phase pinned-foot dynamics.
// Decision vector (internally scaled): [q(7) qd(7) u(4)] per knot.
class JumpNlp : public AlProblem {
 public:
  JumpNlp(const ModelParams& p, const JumpTarget& target, const PhaseSchedule& schedule,
          const JumpNlpOptions& opts = {});

  int num_vars() const override { return 18 * n_knots_; }
  int num_eq() const override { return layout_.n_eq; }
  int num_ineq() const override { return layout_.n_ineq; }

  double eval(const VecX& x, VecX& c, VecX& psi) override;
  void grad_combination(const VecX& x, const VecX& wc, const VecX& wpsi, VecX& grad) override;
  bool has_jacobians() const override { return true; }
  double eval_full(const VecX& x, VecX& grad_f, VecX& obj_curvature, VecX& c, SpMat& Jc,
                   VecX& psi, SpMat& Jpsi) override;

  // Starting rows of the constraint blocks, for diagnostics and tests.
  struct RowLayout {
    int eq_init = 0;        // 14 rows: frozen initial state
    int eq_defects = 0;     // 14 per interval
    int eq_front_pins = 0;  // 2 per double-stance knot
    int eq_rear_pins = 0;   // 2 per ground-phase knot
    int eq_boundary = 0;    // 3 final body pose + 4 final leg joints
    int n_eq = 0;
    int ineq_box = 0;        // 24 per knot: joint range, speed, torque
    int ineq_grf = 0;        // 3 per stance foot per stance interval
    int ineq_clearance = 0;  // swing/flight foot ordinates above the terrain
    int n_ineq = 0;
  };
  const RowLayout& layout() const { return layout_; }

  VecX initial_guess() const;
  KnotTrajectory unpack(const VecX& x) const;
  VecX pack(const KnotTrajectory& traj) const;

  const JumpTarget& target() const { return target_; }
  const PhaseSchedule& schedule() const { return schedule_; }

 private:
  struct KnotMask {
    ContactMask mask;
    int slot = 0;  // index into the dynamics cache
  };

  using Triplets = std::vector<Eigen::Triplet<double>>;
  double assemble(const VecX& x, VecX* c, VecX* psi, const VecX* wc, const VecX* wpsi,
                  VecX* grad, Triplets* Jc_t = nullptr, Triplets* Jpsi_t = nullptr,
                  VecX* grad_f = nullptr, VecX* curv = nullptr);
  int slot_for(int knot, const ContactMask& mask) const;

  ModelParams p_;
  JumpTarget target_;
  PhaseSchedule schedule_;
  JumpNlpOptions opts_;
  int n_knots_ = 0;
  RowLayout layout_;
  VecX scale_;  // per-variable scaling, x_physical = scale .* x_solver

  PlanarState x_init_;
  Vec2 q_land_;  // pre-landing (hip, knee)
  std::array<Vec2, 2> anchors_;

  std::vector<std::vector<KnotMask>> knot_masks_;  // per knot, masks it is evaluated under
  std::vector<StanceDynamics> dyn_;                // cache, indexed by slot
  std::vector<std::array<PointKin, 2>> feet_;      // world foot kinematics per knot
};

struct JumpSolveResult {
  KnotTrajectory trajectory;
  AlReport report;
};

// Builds, warm-starts and solves the NLP. The report carries convergence and
// residual diagnostics; the trajectory is the best iterate either way.
JumpSolveResult solve_jump(const ModelParams& p, const JumpTarget& target,
                           const PhaseSchedule& schedule, const JumpNlpOptions& opts = {});

}  // namespace jumprl
