/*
 * Copyright 2026 The dshoot Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "dshoot/evolution.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "dshoot/errors.hpp"

namespace dshoot {
namespace {

struct Residual {
  Vector dtheta;
  Vector pi;
  double norm = 0.0;
};

// Flow and residual for dtheta = -A (r + Gamma pi) [, dt_f = -k_tf(...)].
Residual form1_flow(const Form1Quantities &fq, const SpdOperator &minv, double k_tf,
                    bool tf_free, const Gains &gains, const Vector &g) {
  std::optional<TfTerms> terms;
  if (tf_free)
    terms = TfTerms{k_tf, fq.tf_scalar, fq.tf_row};
  Residual out;
  out.pi = multiplier(minv, fq.r_1p, fq.Gamma_1p, terms, gains.K_g, g);
  const Vector res = fq.r_1p + fq.Gamma_1p * out.pi;
  const Index s = fq.r_1p.size();
  out.dtheta = Vector::Zero(s + 1);
  out.dtheta.head(s) = -minv.apply(res);
  out.norm = res.norm();
  if (tf_free) {
    const double tf_res = fq.tf_scalar + (fq.tf_row.size() ? fq.tf_row.dot(out.pi) : 0.0);
    out.dtheta[s] = -k_tf * tf_res;
    out.norm += std::abs(tf_res);
  }
  return out;
}

Residual block_flow(const SpdOperator &op, const Vector &r, const Matrix &Gamma,
                    const Gains &gains, const Vector &g, Index s) {
  Residual out;
  out.pi = multiplier(op, r, Gamma, std::nullopt, gains.K_g, g);
  const Vector res = r + Gamma * out.pi;
  out.dtheta = Vector::Zero(s + 1);
  out.dtheta.head(res.size()) = -op.apply(res);
  out.norm = res.norm();
  return out;
}

} // namespace

std::string to_string(EvolutionModeKind kind) {
  switch (kind) {
  case EvolutionModeKind::form1:
    return "form1";
  case EvolutionModeKind::form2:
    return "form2";
  case EvolutionModeKind::gradient_flow:
    return "gradient_flow";
  }
  return "unknown";
}

EvolutionModeKind mode_from_string(const std::string &name) {
  for (auto k : {EvolutionModeKind::form1, EvolutionModeKind::form2,
                 EvolutionModeKind::gradient_flow}) {
    if (to_string(k) == name)
      return k;
  }
  throw ConfigurationError("unknown mode '" + name + "'");
}

void StopCriteria::validate() const {
  if (!(tau_max > 0.0))
    throw ConfigurationError("stop.tau_max must be positive");
  if (!(tol_opt > 0.0))
    throw ConfigurationError("stop.tol_opt must be positive");
  if (!(tol_feas > 0.0))
    throw ConfigurationError("stop.tol_feas must be positive");
  if (!(record_every > 0.0))
    throw ConfigurationError("stop.record_every must be positive");
}

SpdOperator SpdOperator::inverse_of(const Matrix &M, const std::string &what) {
  SpdOperator op;
  op.dim_ = M.rows();
  op.llt_.emplace(M);
  if (M.rows() != M.cols() || op.llt_->info() != Eigen::Success || !M.allFinite())
    throw RankError(what + " is not positive definite; the basis or constraint "
                           "columns are not linearly independent");
  return op;
}

SpdOperator SpdOperator::explicit_gain(const Matrix &K) {
  if (!is_spd(K))
    throw ConfigurationError("gain matrix is not symmetric positive definite");
  SpdOperator op;
  op.dim_ = K.rows();
  op.gain_ = K;
  return op;
}

Matrix SpdOperator::apply(const Matrix &x) const {
  if (x.rows() != dim_)
    throw StructuralError("SPD operator applied to wrong dimension");
  return llt_ ? Matrix(llt_->solve(x)) : Matrix(gain_ * x);
}

Vector multiplier(const SpdOperator &op, const Vector &r, const Matrix &Gamma,
                  const std::optional<TfTerms> &tf_terms, const Matrix &K_g,
                  const Vector &g_val) {
  const Index q = Gamma.cols();
  if (q == 0)
    return Vector(0);
  const Matrix a_gamma = op.apply(Gamma);
  Matrix m_pi = Gamma.transpose() * a_gamma;
  Vector r_pi = a_gamma.transpose() * r - K_g * g_val;
  if (tf_terms) {
    m_pi.noalias() += tf_terms->k_tf * tf_terms->tf_row * tf_terms->tf_row.transpose();
    r_pi += tf_terms->k_tf * tf_terms->tf_scalar * tf_terms->tf_row;
  }
  m_pi = 0.5 * (m_pi + m_pi.transpose());
  Eigen::LLT<Matrix> llt(m_pi);
  if (llt.info() != Eigen::Success || !m_pi.allFinite())
    throw RankError("multiplier matrix is singular; the constraint sensitivity "
                    "does not have full column rank");
  return -llt.solve(r_pi);
}

EvolutionRhs evolution_rhs(const EvolutionMode &mode, const OcpProblem &prob,
                           const Parameterization &par, const Gains &gains,
                           const EvolutionState &state, const OdeSettings &ode,
                           const QuadratureSpec &quad, const Matrix *M_p_fixed) {
  const Index s = par.s();
  const bool free = prob.tf_free();
  if (state.p.size() != s)
    throw StructuralError("evolution state has wrong parameter length");

  EvolutionRhs out;
  out.bundle = evaluate_iterate(prob, par, state.p, state.t_f, ode);
  out.J = out.bundle.J;
  out.g = out.bundle.g;
  const double k_tf = effective_k_tf(prob, gains);

  Residual res;
  switch (mode.kind) {
  case EvolutionModeKind::form1: {
    if (par.form() != Form::form1)
      throw ConfigurationError("form1 evolution needs a form1 parameterization");
    const Form1Quantities fq =
        assemble_form1(prob, par, out.bundle, gains, state.p, quad, M_p_fixed);
    res = form1_flow(fq, SpdOperator::inverse_of(fq.M_p, "M_p"), k_tf, free, gains, out.g);
    break;
  }
  case EvolutionModeKind::form2: {
    const Form2Quantities fq = assemble_form2(prob, par, out.bundle, gains, state.p, quad);
    res = block_flow(SpdOperator::inverse_of(fq.M_ptf, "M_ptf"), fq.r_2ptf, fq.Gamma_2ptf,
                     gains, out.g, s);
    break;
  }
  case EvolutionModeKind::gradient_flow: {
    const std::optional<Matrix> &k_opt = mode.K_theta ? mode.K_theta : gains.K_theta;
    if (!k_opt)
      throw ConfigurationError("gradient_flow mode needs K_theta");
    const Index dim = free ? s + 1 : s;
    Matrix k_theta = *k_opt;
    if (!free && k_theta.rows() == s + 1 && k_theta.cols() == s + 1)
      k_theta = Matrix(k_theta.topLeftCorner(s, s));
    if (k_theta.rows() != dim || k_theta.cols() != dim) {
      std::ostringstream os;
      os << "K_theta must be " << dim << "x" << dim;
      throw ConfigurationError(os.str());
    }
    const NlpGradients ng = nlp_gradients(prob, par, out.bundle, state.p, quad);
    res = block_flow(SpdOperator::explicit_gain(k_theta), Vector(ng.f_theta.head(dim)),
                     Matrix(ng.g_theta.leftCols(dim).transpose()), gains, out.g, s);
    break;
  }
  }
  out.dtheta = std::move(res.dtheta);
  out.pi = std::move(res.pi);
  out.residual_norm = res.norm;
  return out;
}

double lyapunov_diagnostic(const Vector &g_val, double J_val, double c1) {
  if (!(c1 > 0.0))
    throw ConfigurationError("c1 must be positive");
  return g_val.norm() + c1 * J_val;
}

SolveResult solve_evolution(const EvolutionMode &mode, const OcpProblem &prob,
                            const Parameterization &par, const Gains &gains,
                            const EvolutionState &init, const StopCriteria &stop,
                            const OdeSettings &ode_outer, const OdeSettings &ode_inner,
                            const QuadratureSpec &quad, const EvolutionOptions &options) {
  const auto clock_start = std::chrono::steady_clock::now();
  stop.validate();
  ode_outer.validate();
  ode_inner.validate();
  const Index s = par.s();
  const bool free = prob.tf_free();
  const double tf0 = free ? init.t_f : *prob.fixed_tf;
  if (!(tf0 > prob.t0))
    throw ConfigurationError("initial t_f must exceed t0");
  if (init.p.size() != s)
    throw ConfigurationError("initial p has wrong length");
  if (mode.kind == EvolutionModeKind::form1 && par.form() != Form::form1)
    throw ConfigurationError("form1 evolution needs a form1 parameterization");
  gains.validate(prob, prob.t0, tf0);
  validate_independence(par, init.p, tf0, std::max(quad.nodes, static_cast<int>(s)));

  std::optional<Matrix> M_p_fixed;
  if (options.constant_M_p && mode.kind == EvolutionModeKind::form1 && !free)
    M_p_fixed = assemble_M_p(par, gains, tf0, quad);
  const Matrix *m_fixed = M_p_fixed ? &*M_p_fixed : nullptr;

  SolveResult result;
  std::vector<std::string> &warnings = result.report.warnings;
  bool warned_pi = false;

  const auto unpack = [s](const Vector &y) { return EvolutionState{y.head(s), y[s]}; };
  const auto evaluate = [&](double tau, const Vector &y) {
    try {
      EvolutionRhs e = evolution_rhs(mode, prob, par, gains, unpack(y), ode_inner, quad, m_fixed);
      if (!warned_pi && e.pi.size() > 0 && e.pi.norm() > options.pi_bound) {
        std::ostringstream os;
        os << "multiplier norm " << e.pi.norm() << " exceeds bound " << options.pi_bound
           << " at tau = " << tau;
        warnings.push_back(os.str());
        warned_pi = true;
      }
      return e;
    } catch (const IntegrationError &err) {
      throw IntegrationError(std::string("inner solve failed: ") + err.what() + " at tau", tau);
    }
  };

  const auto make_row = [&](double tau, const Vector &y, const EvolutionRhs &e) {
    TraceRow row;
    row.tau = tau;
    row.p = y.head(s);
    row.t_f = y[s];
    row.pi = e.pi;
    row.J = e.J;
    row.g_norm = e.g.norm();
    row.residual_norm = e.residual_norm;
    row.V = lyapunov_diagnostic(e.g, e.J, options.c1);
    return row;
  };
  const auto converged = [&](const EvolutionRhs &e) {
    return e.residual_norm <= stop.tol_opt && e.g.norm() <= stop.tol_feas;
  };

  Vector y0(s + 1);
  y0 << init.p, tf0;
  EvolutionRhs last = evaluate(0.0, y0);
  Vector last_y = y0;
  double last_tau = 0.0;
  EvolutionRhs end_eval = last;
  Vector end_y = y0;
  result.trace.rows.push_back(make_row(0.0, y0, last));
  long next_record = 1;

  const double eps_t = 1e-6 * (tf0 - prob.t0);
  IvpHooks hooks;
  hooks.accept_state = [&](double, const Vector &y) {
    return !free || y[s] > prob.t0 + eps_t;
  };
  hooks.on_step = [&](const DenseSegment &seg, const Vector &y_end) {
    end_eval = last;
    end_y = y_end;
    const double tau_end = seg.t_end;
    while (static_cast<double>(next_record) * stop.record_every < tau_end) {
      const double tau = static_cast<double>(next_record) * stop.record_every;
      const Vector y = seg.eval(tau);
      result.trace.rows.push_back(make_row(tau, y, evaluate(tau, y)));
      ++next_record;
    }
    const bool done = converged(end_eval);
    if (static_cast<double>(next_record) * stop.record_every == tau_end || done ||
        tau_end >= stop.tau_max) {
      result.trace.rows.push_back(make_row(tau_end, y_end, end_eval));
      if (static_cast<double>(next_record) * stop.record_every == tau_end)
        ++next_record;
    }
    return !done;
  };

  const OdeRhs rhs = [&](double tau, const Vector &y) -> Vector {
    if (!(last_tau == tau && last_y == y)) {
      last = evaluate(tau, y);
      last_y = y;
      last_tau = tau;
    }
    return last.dtheta;
  };

  DenseSolution sol;
  if (converged(end_eval)) {
    sol.t_reached = 0.0;
    sol.y_final = y0;
  } else {
    sol = integrate_ivp(rhs, y0, {0.0, stop.tau_max}, ode_outer, hooks);
  }

  SolveReport &rep = result.report;
  rep.p_final = end_y.head(s);
  rep.tf_final = end_y[s];
  rep.pi_final = end_eval.pi;
  rep.J_final = end_eval.J;
  rep.residual_norm = end_eval.residual_norm;
  rep.g_norm = end_eval.g.norm();
  rep.converged = converged(end_eval);
  rep.tau_reached = sol.t_reached;
  result.final_eval = std::move(end_eval);
  rep.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return result;
}

GradientFlowResult
gradient_flow_generic(const std::function<Vector(const Vector &)> &f_grad,
                      const std::function<Vector(const Vector &)> &h_val,
                      const std::function<Matrix(const Vector &)> &h_jac,
                      const Matrix &K_theta, const Matrix &K_h, const Vector &theta0,
                      const StopCriteria &stop, const OdeSettings &ode) {
  stop.validate();
  const SpdOperator k = SpdOperator::explicit_gain(K_theta);
  if (k.dim() != theta0.size())
    throw ConfigurationError("K_theta dimension does not match theta");

  struct Eval {
    Vector dtheta, pi;
    double stationarity = 0.0, feasibility = 0.0;
  };
  const auto eval = [&](const Vector &theta) {
    const Vector f = f_grad(theta);
    const Vector h = h_val ? h_val(theta) : Vector(0);
    Eval e;
    if (h.size() == 0) {
      e.pi = Vector(0);
      e.dtheta = -k.apply(f);
      e.stationarity = f.norm();
      return e;
    }
    const Matrix hj = h_jac(theta);
    e.pi = multiplier(k, f, hj.transpose(), std::nullopt, K_h, h);
    const Vector res = f + hj.transpose() * e.pi;
    e.dtheta = -k.apply(res);
    e.stationarity = res.norm();
    e.feasibility = h.norm();
    return e;
  };
  const auto done = [&](const Eval &e) {
    return e.stationarity <= stop.tol_opt && e.feasibility <= stop.tol_feas;
  };

  GradientFlowResult out;
  Eval e0 = eval(theta0);
  if (done(e0)) {
    out.theta = theta0;
    out.pi = e0.pi;
    out.converged = true;
    return out;
  }
  IvpHooks hooks;
  hooks.on_step = [&](const DenseSegment &, const Vector &y) { return !done(eval(y)); };
  const DenseSolution sol = integrate_ivp(
      [&](double, const Vector &y) { return eval(y).dtheta; }, theta0, {0.0, stop.tau_max},
      ode, hooks);
  const Eval ef = eval(sol.y_final);
  out.theta = sol.y_final;
  out.pi = ef.pi;
  out.converged = done(ef);
  out.tau_reached = sol.t_reached;
  return out;
}

} // namespace dshoot
