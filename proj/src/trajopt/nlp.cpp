#include "jumprl/trajopt/nlp.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>

namespace jumprl {

LbfgsResult minimize_lbfgs(const std::function<double(const VecX&, VecX*)>& fn, VecX& x,
                           const LbfgsOptions& opt) {
  const int n = static_cast<int>(x.size());
  LbfgsResult res;

  VecX g(n), g_new(n);
  double f = fn(x, &g);
  std::deque<VecX> s_hist, y_hist;
  std::deque<double> rho_hist;

  VecX d(n), x_new(n);
  for (res.iters = 0; res.iters < opt.max_iters; ++res.iters) {
    res.grad_norm = g.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(f) || !g.allFinite()) break;
    if (res.grad_norm <= opt.grad_tol) {
      res.converged = true;
      break;
    }

    // Two-loop recursion.
    d = -g;
    const int m = static_cast<int>(s_hist.size());
    std::vector<double> alpha(m);
    for (int i = m - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(d);
      d -= alpha[i] * y_hist[i];
    }
    if (m > 0) {
      const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      d *= gamma;
    }
    for (int i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(d);
      d += (alpha[i] - beta) * s_hist[i];
    }

    double dg = d.dot(g);
    if (dg >= 0.0) {  // not a descent direction; fall back to steepest descent
      d = -g;
      dg = -g.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    // Armijo backtracking.
    double step = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < opt.max_line_search; ++ls) {
      x_new = x + step * d;
      f_new = fn(x_new, nullptr);
      if (std::isfinite(f_new) && f_new <= f + opt.armijo_c1 * step * dg) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    f_new = fn(x_new, &g_new);
    const VecX s = x_new - x;
    const VecX y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x = x_new;
    f = f_new;
    g = g_new;
  }
  res.f = f;
  if (res.iters == opt.max_iters) res.grad_norm = g.lpNorm<Eigen::Infinity>();
  return res;
}

namespace {

double ineq_violation(const VecX& psi) {
  double v = 0.0;
  for (int i = 0; i < psi.size(); ++i) v = std::max(v, -psi[i]);
  return v;
}

// Levenberg-damped Gauss-Newton minimization of the AL merit for fixed
// multipliers and penalties. The model Hessian rho_e Jc^T Jc + rho_i
// Jpsi_act^T Jpsi_act + diag(objective curvature) is always positive
// semidefinite, so steps stay well defined at any penalty level.
struct GnState {
  // Damping starts high so the first steps stay close to the warm start; it
  // decays quickly once full steps are accepted.
  double lambda = 1.0;
};

LbfgsResult minimize_gauss_newton(AlProblem& problem, VecX& x, const VecX& y, const VecX& mu,
                                  double rho_eq, double rho_ineq, double active_band,
                                  const LbfgsOptions& opt, GnState& state) {
  const int n = static_cast<int>(x.size());
  const int n_ineq = problem.num_ineq();
  LbfgsResult res;

  VecX grad_f(n), curv(n), c, psi, c_try, psi_try;
  SpMat Jc, Jpsi;

  auto merit_value = [&](const VecX& z) {
    const double fz = problem.eval(z, c_try, psi_try);
    double L = fz + y.dot(c_try) + 0.5 * rho_eq * c_try.squaredNorm();
    for (int j = 0; j < n_ineq; ++j) {
      const double t = std::max(0.0, mu[j] - rho_ineq * psi_try[j]);
      L += (t * t - mu[j] * mu[j]) / (2.0 * rho_ineq);
    }
    return L;
  };

  Eigen::SimplicialLDLT<SpMat> ldlt;

  for (res.iters = 0; res.iters < opt.max_iters; ++res.iters) {
    const double f = problem.eval_full(x, grad_f, curv, c, Jc, psi, Jpsi);
    double L = f + y.dot(c) + 0.5 * rho_eq * c.squaredNorm();
    VecX act(n_ineq);
    for (int j = 0; j < n_ineq; ++j) {
      act[j] = std::max(0.0, mu[j] - rho_ineq * psi[j]);
      L += (act[j] * act[j] - mu[j] * mu[j]) / (2.0 * rho_ineq);
    }
    res.f = L;

    const VecX gL = grad_f + Jc.transpose() * (y + rho_eq * c) - Jpsi.transpose() * act;
    res.grad_norm = gL.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(L) || !gL.allFinite()) break;
    if (res.grad_norm <= opt.grad_tol) {
      res.converged = true;
      break;
    }

    // Gauss-Newton model over the active inequality rows plus a band of
    // nearly-active ones; the extra rows keep the model conservative where
    // the PHR term switches on, which is where pure Gauss-Newton overshoots.
    std::vector<int> arow(n_ineq, -1);
    int n_active = 0;
    for (int j = 0; j < n_ineq; ++j)
      if (mu[j] - rho_ineq * psi[j] > -rho_ineq * active_band) arow[j] = n_active++;
    if (opt.trace)
      std::printf("  gn %4d  L %.10g  g %9.3g  lam %8.2g  act %d\n", res.iters, L,
                  res.grad_norm, state.lambda, n_active);
    SpMat Ja(n_active, n);
    if (n_active > 0) {
      std::vector<Eigen::Triplet<double>> trip;
      for (int col = 0; col < Jpsi.outerSize(); ++col)
        for (SpMat::InnerIterator it(Jpsi, col); it; ++it)
          if (arow[it.row()] >= 0) trip.emplace_back(arow[it.row()], it.col(), it.value());
      Ja.setFromTriplets(trip.begin(), trip.end());
    }

    SpMat H = rho_eq * SpMat(Jc.transpose() * Jc);
    if (n_active > 0) H += rho_ineq * SpMat(Ja.transpose() * Ja);

    bool moved = false;
    for (int attempt = 0; attempt < 12 && !moved; ++attempt) {
      SpMat Dg(n, n);
      {
        std::vector<Eigen::Triplet<double>> dt;
        dt.reserve(n);
        for (int i = 0; i < n; ++i) dt.emplace_back(i, i, curv[i] + state.lambda);
        Dg.setFromTriplets(dt.begin(), dt.end());
      }
      const SpMat M = H + Dg;
      ldlt.compute(M);
      if (ldlt.info() != Eigen::Success) {
        state.lambda = std::max(state.lambda * 10.0, 1e-8);
        continue;
      }
      const VecX step = ldlt.solve(-gL);
      const double dg = step.dot(gL);
      if (!step.allFinite() || dg >= 0.0) {
        state.lambda = std::max(state.lambda * 10.0, 1e-8);
        continue;
      }
      double alpha = 1.0;
      for (int ls = 0; ls < opt.max_line_search; ++ls) {
        const VecX x_try = x + alpha * step;
        const double L_try = merit_value(x_try);
        if (std::isfinite(L_try) && L_try <= L + opt.armijo_c1 * alpha * dg) {
          x = x_try;
          moved = true;
          if (opt.trace && alpha < 1.0) std::printf("  gn ls    alpha %g\n", alpha);
          // The quadratic model only holds inside the current PHR active set,
          // so track the damping to the step fraction the line search kept.
          if (alpha >= 0.5)
            state.lambda = std::max(state.lambda / 3.0, 1e-10);
          else if (alpha < 0.01)
            state.lambda = std::min(state.lambda * 16.0, 1e8);
          else
            state.lambda = std::min(state.lambda * 4.0, 1e8);
          break;
        }
        alpha *= 0.5;
        if (alpha * step.lpNorm<Eigen::Infinity>() < 1e-14) break;
      }
      if (!moved) state.lambda = std::max(state.lambda * 10.0, 1e-8);
    }
    if (!moved) break;  // damping exhausted; let the outer loop adjust
  }
  return res;
}

}  // namespace

PolishReport polish_feasibility(AlProblem& problem, VecX& x, const PolishOptions& opt) {
  PolishReport rep;
  if (!problem.has_jacobians()) return rep;
  const int n = static_cast<int>(x.size());
  const int n_eq = problem.num_eq();
  const int n_ineq = problem.num_ineq();

  VecX grad_f(n), curv(n), c, psi, c_try, psi_try;
  SpMat Jc, Jpsi;

  // Inequality rows are weighted so that a violation at the feasibility
  // tolerance carries the same cost as an equality residual at its (100x
  // looser) tolerance; otherwise the least-squares direction ignores them.
  constexpr double kPsiW = 100.0;

  auto phi_value = [&](const VecX& z) {
    problem.eval(z, c_try, psi_try);
    double phi = 0.5 * c_try.squaredNorm();
    for (int j = 0; j < n_ineq; ++j)
      if (psi_try[j] < 0.0) phi += 0.5 * kPsiW * kPsiW * psi_try[j] * psi_try[j];
    return phi;
  };

  Eigen::SimplicialLDLT<SpMat> ldlt;
  double lambda = 1e-4;

  for (rep.iters = 0; rep.iters < opt.max_iters; ++rep.iters) {
    problem.eval_full(x, grad_f, curv, c, Jc, psi, Jpsi);
    rep.max_eq = n_eq > 0 ? c.lpNorm<Eigen::Infinity>() : 0.0;
    rep.min_ineq = n_ineq > 0 ? psi.minCoeff() : 0.0;
    if (rep.max_eq <= opt.eq_tol && rep.min_ineq >= -opt.ineq_tol) {
      rep.feasible = true;
      return rep;
    }

    double phi = 0.5 * c.squaredNorm();
    // The model Hessian also includes rows that are close to turning
    // violated, which keeps full steps from blowing through the boundary.
    std::vector<int> vrow(n_ineq, -1);
    int n_band = 0;
    for (int j = 0; j < n_ineq; ++j) {
      if (psi[j] < 0.0) phi += 0.5 * kPsiW * kPsiW * psi[j] * psi[j];
      if (psi[j] < 1e-4) vrow[j] = n_band++;
    }

    VecX g = Jc.transpose() * c;
    SpMat Jv(n_band, n);
    if (n_band > 0) {
      VecX pv = VecX::Zero(n_band);
      std::vector<Eigen::Triplet<double>> trip;
      for (int col = 0; col < Jpsi.outerSize(); ++col)
        for (SpMat::InnerIterator it(Jpsi, col); it; ++it)
          if (vrow[it.row()] >= 0)
            trip.emplace_back(vrow[it.row()], it.col(), kPsiW * it.value());
      Jv.setFromTriplets(trip.begin(), trip.end());
      for (int j = 0; j < n_ineq; ++j)
        if (vrow[j] >= 0 && psi[j] < 0.0) pv[vrow[j]] = kPsiW * psi[j];
      g += Jv.transpose() * pv;
    }

    SpMat H = SpMat(Jc.transpose() * Jc);
    if (n_band > 0) H += SpMat(Jv.transpose() * Jv);

    if (opt.trace)
      std::printf("  polish %2d  phi %.6g  max_eq %.3g  min_psi %.3g  lam %.2g  band %d\n",
                  rep.iters, phi, rep.max_eq, rep.min_ineq, lambda, n_band);

    bool moved = false;
    for (int attempt = 0; attempt < 10 && !moved; ++attempt) {
      SpMat Dg(n, n);
      {
        std::vector<Eigen::Triplet<double>> dt;
        dt.reserve(n);
        for (int i = 0; i < n; ++i) dt.emplace_back(i, i, lambda);
        Dg.setFromTriplets(dt.begin(), dt.end());
      }
      ldlt.compute(H + Dg);
      if (ldlt.info() != Eigen::Success) {
        lambda = std::max(lambda * 100.0, 1e-6);
        continue;
      }
      const VecX step = ldlt.solve(-g);
      const double dg = step.dot(g);
      if (!step.allFinite() || dg >= 0.0) {
        lambda = std::max(lambda * 100.0, 1e-6);
        continue;
      }
      if (opt.trace)
        std::printf("  polish lin |c+Js| %.3g vs |c| %.3g  |s| %.3g\n",
                    (c + Jc * step).norm(), c.norm(), step.norm());
      double alpha = 1.0;
      for (int ls = 0; ls < opt.max_line_search; ++ls) {
        const VecX x_try = x + alpha * step;
        const double phi_try = phi_value(x_try);
        if (std::isfinite(phi_try) && phi_try <= phi + 1e-4 * alpha * dg) {
          x = x_try;
          moved = true;
          if (opt.trace) std::printf("  polish ls  alpha %g\n", alpha);
          if (alpha >= 0.5)
            lambda = std::max(lambda / 3.0, 1e-8);
          else if (alpha < 0.01)
            lambda = std::min(lambda * 16.0, 1e8);
          else
            lambda = std::min(lambda * 4.0, 1e8);
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) lambda = std::max(lambda * 100.0, 1e-6);
    }
    if (!moved) break;
  }

  problem.eval(x, c, psi);
  rep.max_eq = n_eq > 0 ? c.lpNorm<Eigen::Infinity>() : 0.0;
  rep.min_ineq = n_ineq > 0 ? psi.minCoeff() : 0.0;
  rep.feasible = rep.max_eq <= opt.eq_tol && rep.min_ineq >= -opt.ineq_tol;
  return rep;
}

AlReport solve_al(AlProblem& problem, VecX& x, const AlOptions& opt) {
  AlReport rep;
  const int n_eq = problem.num_eq();
  const int n_ineq = problem.num_ineq();

  VecX y = VecX::Zero(n_eq);       // equality multipliers
  VecX mu = VecX::Zero(n_ineq);    // inequality multipliers (>= 0)
  double rho_eq = opt.rho_eq;
  double rho_ineq = opt.rho_ineq;

  VecX c(n_eq), psi(n_ineq);
  double f = problem.eval(x, c, psi);

  VecX best_x = x;
  double best_feas = std::numeric_limits<double>::infinity();
  double best_cost = std::numeric_limits<double>::infinity();
  bool best_feasible = false;
  AlReport best_rep;
  auto consider_best = [&](const VecX& xc, double fc, const VecX& cc, const VecX& pc) {
    const double max_eq = n_eq > 0 ? cc.lpNorm<Eigen::Infinity>() : 0.0;
    const double viol = ineq_violation(pc);
    const double feas = std::max(max_eq, viol);
    const bool feasible_here = max_eq <= opt.eq_tol && viol <= opt.ineq_tol;
    bool better;
    if (feasible_here && best_feasible)
      better = fc < best_cost;
    else if (feasible_here != best_feasible)
      better = feasible_here;
    else
      better = feas < best_feas;
    if (better) {
      best_feasible = feasible_here;
      best_x = xc;
      best_feas = feas;
      best_cost = fc;
      best_rep.cost = fc;
      best_rep.max_eq = max_eq;
      best_rep.min_ineq = n_ineq > 0 ? pc.minCoeff() : 0.0;
    }
  };
  consider_best(x, f, c, psi);

  // Feasibility levels at the last accepted multiplier update; updates are
  // gated on making progress against these, otherwise the penalty grows.
  double gate_eq = std::numeric_limits<double>::infinity();
  double gate_viol = std::numeric_limits<double>::infinity();
  int stagnant = 0;

  VecX wc(n_eq), wpsi(n_ineq), stat_grad;
  GnState gn;
  int n_updates = 0;
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    if (rep.inner_iters >= opt.max_inner_total) break;

    auto merit = [&](const VecX& z, VecX* grad) -> double {
      double fz = problem.eval(z, c, psi);
      double L = fz + y.dot(c) + 0.5 * rho_eq * c.squaredNorm();
      for (int j = 0; j < n_ineq; ++j) {
        const double t = std::max(0.0, mu[j] - rho_ineq * psi[j]);
        L += (t * t - mu[j] * mu[j]) / (2.0 * rho_ineq);
      }
      if (grad) {
        wc = y + rho_eq * c;
        for (int j = 0; j < n_ineq; ++j) wpsi[j] = -std::max(0.0, mu[j] - rho_ineq * psi[j]);
        problem.grad_combination(z, wc, wpsi, *grad);
      }
      return L;
    };

    LbfgsOptions inner;
    inner.max_iters = std::min(opt.max_inner_per_outer, opt.max_inner_total - rep.inner_iters);
    inner.grad_tol = std::max(opt.grad_tol_final, opt.grad_tol_start * std::pow(0.5, n_updates));
    inner.trace = opt.trace_inner;
    const LbfgsResult lr = problem.has_jacobians()
                               ? minimize_gauss_newton(problem, x, y, mu, rho_eq, rho_ineq,
                                                       opt.active_band, inner, gn)
                               : minimize_lbfgs(merit, x, inner);
    rep.inner_iters += std::max(1, lr.iters);
    ++rep.outer_iters;

    f = problem.eval(x, c, psi);
    const double max_eq = n_eq > 0 ? c.lpNorm<Eigen::Infinity>() : 0.0;
    const double viol = ineq_violation(psi);
    consider_best(x, f, c, psi);

    const bool feasible = max_eq <= opt.eq_tol && viol <= opt.ineq_tol;

    // Candidate first-order multipliers at x; also used for the KKT
    // stationarity test, which stays meaningful at large penalties.
    VecX y_new = y + rho_eq * c;
    VecX mu_new(n_ineq);
    for (int j = 0; j < n_ineq; ++j) mu_new[j] = std::max(0.0, mu[j] - rho_ineq * psi[j]);
    double stat = std::numeric_limits<double>::infinity();
    if (feasible) {
      problem.grad_combination(x, y_new, -mu_new, stat_grad);
      stat = stat_grad.lpNorm<Eigen::Infinity>();
    }

    if (opt.verbose)
      std::printf(
          "outer %2d  inner %5d  f %12.5g  |c| %9.3g  viol %9.3g  rho %g/%g  g %.2g  kkt %.2g\n",
          outer, lr.iters, f, max_eq, viol, rho_eq, rho_ineq, lr.grad_norm, stat);

    if (feasible && stat <= opt.stat_tol) {
      rep.converged = true;
      break;
    }

    // Multipliers and penalties only move once the inner loop has actually
    // solved the current subproblem; an unfinished subproblem just continues.
    if (!lr.converged) {
      if (lr.iters < 5) {
        // The inner cannot move at all: either we are done to machine
        // precision or the damping has saturated. Retrying is pointless.
        if (++stagnant >= 3) break;
      }
      continue;
    }

    // Gated updates: take the multiplier step unless feasibility regressed,
    // otherwise lean harder on the penalty.
    const bool eq_progress = max_eq <= std::max(0.9 * gate_eq, opt.eq_tol);
    const bool ineq_progress = viol <= std::max(0.9 * gate_viol, opt.ineq_tol);
    if (eq_progress) {
      y = y_new.cwiseMax(-opt.multiplier_cap).cwiseMin(opt.multiplier_cap);
      gate_eq = std::max(max_eq, opt.eq_tol);
    } else {
      rho_eq = std::min(opt.rho_max, rho_eq * opt.rho_growth);
    }
    if (ineq_progress) {
      mu = mu_new.cwiseMin(opt.multiplier_cap);
      gate_viol = std::max(viol, opt.ineq_tol);
    } else {
      rho_ineq = std::min(opt.rho_max, rho_ineq * opt.rho_growth);
    }
    if (eq_progress || ineq_progress) ++n_updates;

    // Give up once the penalties are maxed out and nothing moves.
    if (!eq_progress && !ineq_progress && rho_eq >= opt.rho_max && rho_ineq >= opt.rho_max)
      ++stagnant;
    else
      stagnant = 0;
    if (stagnant >= 3) break;
  }

  x = best_x;
  rep.cost = best_rep.cost;
  rep.max_eq = best_rep.max_eq;
  rep.min_ineq = best_rep.min_ineq;
  if (rep.converged)
    rep.message = "converged";
  else
    rep.message = "did not converge: max |c| = " + std::to_string(rep.max_eq) +
                  ", min psi = " + std::to_string(rep.min_ineq) + " after " +
                  std::to_string(rep.inner_iters) + " inner iterations";
  return rep;
}

}  // namespace jumprl
