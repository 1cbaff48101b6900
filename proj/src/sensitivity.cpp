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

#include "dshoot/sensitivity.hpp"

#include <sstream>

#include "dshoot/errors.hpp"

namespace dshoot {
namespace {

// Trajectory integrals shared by both forms and the NLP gradients.
struct Integrals {
  Matrix M_p;
  Vector r_p;
  Matrix Gamma_p;
  Vector M_pt;
  double m_tt = 0.0;
  double r_t = 0.0;
  Eigen::RowVectorXd Gamma_t;
  double tf_scalar = 0.0;
  Vector tf_row;
};

Integrals integrate_terms(const OcpProblem &prob, const Parameterization &par,
                          const AdjointBundle &bundle, const Gains &gains, const Vector &p,
                          const QuadratureSpec &quad, bool with_M, bool with_tf_terms) {
  const double t_f = bundle.t_f;
  const Index s = par.s(), q = prob.q;
  if (p.size() != s)
    throw StructuralError("parameter vector has wrong length");
  const QuadratureRule rule = iterate_rule(par, t_f, quad);

  Integrals out;
  out.M_p = Matrix::Zero(s, s);
  out.r_p = Vector::Zero(s);
  out.Gamma_p = Matrix::Zero(s, q);
  out.M_pt = Vector::Zero(s);
  out.Gamma_t = Eigen::RowVectorXd::Zero(q);
  for (const auto &node : rule.nodes()) {
    const double t = node.t, w = node.weight;
    const Matrix up = par.jac_p(t, t_f, node.piece);
    const PointwiseGradient pg = pointwise_gradient(prob, bundle, t, node.piece);
    out.r_p.noalias() += w * up.transpose() * pg.p_u;
    out.Gamma_p.noalias() += w * up.transpose() * pg.fu_psi;
    if (!with_M && !with_tf_terms)
      continue;
    const Matrix k_inv = gains.K_inv(t);
    const Matrix kup = k_inv * up;
    if (with_M)
      out.M_p.noalias() += w * up.transpose() * kup;
    if (with_tf_terms) {
      const Vector utf = par.jac_tf(t, p, t_f, node.piece);
      out.M_pt.noalias() += w * kup.transpose() * utf;
      out.m_tt += w * utf.dot(k_inv * utf);
      out.r_t += w * utf.dot(pg.p_u);
      out.Gamma_t.noalias() += w * utf.transpose() * pg.fu_psi;
    }
  }

  const TerminalBracket tb = terminal_bracket(prob, bundle);
  out.tf_scalar = tb.scalar;
  out.tf_row = tb.row;
  return out;
}

} // namespace

Matrix AdjointBundle::psi(double t) const {
  const Vector flat = psi_traj(t);
  return Eigen::Map<const Matrix>(flat.data(), n, q);
}

StateSolution solve_state(const OcpProblem &prob, const Parameterization &par,
                          const Vector &p, double t_f, const OdeSettings &ode) {
  return simulate(prob, par.control(p, t_f), t_f, ode);
}

AdjointBundle solve_adjoints(const OcpProblem &prob, const StateSolution &state,
                             const ControlSignal &control, const OdeSettings &ode) {
  const Index n = prob.n, q = prob.q;
  const double t_f = state.t_f;
  const Vector mu_f = prob.phi_x(state.x_f, t_f);
  Vector y_f(n + n * q);
  y_f.head(n) = mu_f;
  if (q > 0) {
    const Matrix psi_f = prob.g_x(state.x_f, t_f).transpose();
    y_f.tail(n * q) = Eigen::Map<const Vector>(psi_f.data(), n * q);
  }

  auto rhs_for_piece = [&](std::size_t piece) -> OdeRhs {
    return [&, piece](double t, const Vector &y) {
      const Vector x = state.x(t);
      const Vector u = control.value(t, piece);
      const Matrix at = prob.f_x(x, u, t).transpose();
      Vector dy(y.size());
      dy.head(n) = -at * y.head(n) - prob.L_x(x, u, t);
      if (q > 0) {
        Eigen::Map<const Matrix> psi(y.data() + n, n, q);
        Eigen::Map<Matrix>(dy.data() + n, n, q) = -at * psi;
      }
      return dy;
    };
  };
  const DenseSolution sol =
      integrate_piecewise(rhs_for_piece, y_f, {t_f, prob.t0}, control.breaks, ode);

  AdjointBundle b;
  b.n = n;
  b.q = q;
  b.t_f = t_f;
  b.x_traj = state.x;
  b.x_f = state.x_f;
  b.control = control;
  Matrix sel_mu = Matrix::Zero(n, n + n * q);
  sel_mu.leftCols(n).setIdentity();
  Matrix sel_psi = Matrix::Zero(n * q, n + n * q);
  sel_psi.rightCols(n * q).setIdentity();
  b.joint_traj = sol.trajectory;
  b.mu_traj = sol.trajectory.transformed(sel_mu);
  b.psi_traj = sol.trajectory.transformed(sel_psi);
  b.J = prob.phi(state.x_f, t_f) + state.running_cost_total;
  b.g = prob.g(state.x_f, t_f);
  return b;
}

AdjointBundle evaluate_iterate(const OcpProblem &prob, const Parameterization &par,
                               const Vector &p, double t_f, const OdeSettings &ode) {
  const ControlSignal control = par.control(p, t_f);
  const StateSolution state = simulate(prob, control, t_f, ode);
  return solve_adjoints(prob, state, control, ode);
}

QuadratureRule iterate_rule(const Parameterization &par, double t_f,
                            const QuadratureSpec &quad) {
  return QuadratureRule::composite_simpson(par.t0(), t_f, quad.nodes, par.breaks(t_f));
}

PointwiseGradient pointwise_gradient(const OcpProblem &prob, const AdjointBundle &bundle,
                                     double t, std::size_t piece) {
  const Vector x = bundle.x_traj(t);
  const Vector u = bundle.control.value(t, piece);
  const Matrix fu_t = prob.f_u(x, u, t).transpose();
  PointwiseGradient out;
  out.p_u = prob.L_u(x, u, t) + fu_t * bundle.mu_traj(t);
  out.fu_psi = bundle.q > 0 ? Matrix(fu_t * bundle.psi(t)) : Matrix(prob.m, 0);
  return out;
}

TerminalBracket terminal_bracket(const OcpProblem &prob, const AdjointBundle &bundle) {
  const double t_f = bundle.t_f;
  const Vector u_f = bundle.control(t_f);
  const Vector f_f = prob.f(bundle.x_f, u_f, t_f);
  TerminalBracket out;
  out.scalar = prob.phi_t(bundle.x_f, t_f) + prob.phi_x(bundle.x_f, t_f).dot(f_f) +
               prob.L(bundle.x_f, u_f, t_f);
  out.row = prob.q > 0 ? Vector(prob.g_x(bundle.x_f, t_f) * f_f + prob.g_t(bundle.x_f, t_f))
                       : Vector(0);
  return out;
}

Matrix assemble_M_p(const Parameterization &par, const Gains &gains, double t_f,
                    const QuadratureSpec &quad) {
  const QuadratureRule rule = iterate_rule(par, t_f, quad);
  Matrix M = Matrix::Zero(par.s(), par.s());
  for (const auto &node : rule.nodes()) {
    const Matrix up = par.jac_p(node.t, t_f, node.piece);
    M.noalias() += node.weight * up.transpose() * gains.K_inv(node.t) * up;
  }
  return M;
}

Form1Quantities assemble_form1(const OcpProblem &prob, const Parameterization &par,
                               const AdjointBundle &bundle, const Gains &gains,
                               const Vector &p, const QuadratureSpec &quad,
                               const Matrix *M_p_fixed) {
  Integrals in = integrate_terms(prob, par, bundle, gains, p, quad, M_p_fixed == nullptr, false);
  Form1Quantities out;
  out.M_p = M_p_fixed ? *M_p_fixed : std::move(in.M_p);
  out.r_1p = std::move(in.r_p);
  out.Gamma_1p = std::move(in.Gamma_p);
  out.tf_scalar = in.tf_scalar;
  out.tf_row = std::move(in.tf_row);
  return out;
}

Form2Quantities assemble_form2(const OcpProblem &prob, const Parameterization &par,
                               const AdjointBundle &bundle, const Gains &gains,
                               const Vector &p, const QuadratureSpec &quad) {
  const bool free = prob.tf_free();
  const Integrals in = integrate_terms(prob, par, bundle, gains, p, quad, true, free);
  Form2Quantities out;
  if (!free) {
    out.M_ptf = in.M_p;
    out.r_2ptf = in.r_p;
    out.Gamma_2ptf = in.Gamma_p;
    return out;
  }
  const Index s = par.s(), q = prob.q;
  if (!(gains.k_tf > 0.0))
    throw ConfigurationError("k_tf must be positive for a free final time");
  out.M_ptf.resize(s + 1, s + 1);
  out.M_ptf.topLeftCorner(s, s) = in.M_p;
  out.M_ptf.topRightCorner(s, 1) = in.M_pt;
  out.M_ptf.bottomLeftCorner(1, s) = in.M_pt.transpose();
  out.M_ptf(s, s) = 1.0 / gains.k_tf + in.m_tt;
  out.r_2ptf.resize(s + 1);
  out.r_2ptf << in.r_p, in.tf_scalar + in.r_t;
  out.Gamma_2ptf.resize(s + 1, q);
  out.Gamma_2ptf.topRows(s) = in.Gamma_p;
  if (q > 0)
    out.Gamma_2ptf.row(s) = in.tf_row.transpose() + in.Gamma_t;
  return out;
}

NlpGradients nlp_gradients(const OcpProblem &prob, const Parameterization &par,
                           const AdjointBundle &bundle, const Vector &p,
                           const QuadratureSpec &quad) {
  Gains unit;
  unit.K_inv = [m = prob.m](double) { return Matrix::Identity(m, m); };
  const Integrals in = integrate_terms(prob, par, bundle, unit, p, quad, false,
                                       par.form() == Form::form2);
  const Index s = par.s(), q = prob.q;
  NlpGradients out;
  out.f_theta.resize(s + 1);
  out.f_theta << in.r_p, in.tf_scalar + in.r_t;
  out.g_theta.resize(q, s + 1);
  out.g_theta.leftCols(s) = in.Gamma_p.transpose();
  if (q > 0)
    out.g_theta.col(s) = in.tf_row + in.Gamma_t.transpose();
  return out;
}

} // namespace dshoot
