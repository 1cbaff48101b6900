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

#include "dshoot/costate.hpp"

#include "dshoot/errors.hpp"

namespace dshoot {
namespace {

double sup_residual(const OcpProblem &prob, const Parameterization &par,
                    const AdjointBundle &bundle, const Vector &pi, const QuadratureSpec &quad) {
  double sup = 0.0;
  const QuadratureRule rule = iterate_rule(par, bundle.t_f, quad);
  for (const auto &node : rule.nodes()) {
    const PointwiseGradient pg = pointwise_gradient(prob, bundle, node.t, node.piece);
    const Vector res = pi.size() > 0 ? Vector(pg.p_u + pg.fu_psi * pi) : pg.p_u;
    sup = std::max(sup, res.norm());
  }
  return sup;
}

void check_pi(const OcpProblem &prob, const Vector &pi) {
  if (pi.size() != prob.q)
    throw StructuralError("multiplier has wrong dimension");
}

} // namespace

CostateTrajectory reconstruct_costate(const OcpProblem &prob, const AdjointBundle &bundle,
                                      const Vector &pi) {
  check_pi(prob, pi);
  const Index n = prob.n, q = prob.q;
  Matrix map = Matrix::Zero(n, n + n * q);
  map.leftCols(n).setIdentity();
  for (Index j = 0; j < q; ++j)
    map.block(0, n + j * n, n, n).diagonal().setConstant(pi[j]);
  return {bundle.joint_traj.transformed(map), pi};
}

OptimalityResiduals optimality_residuals(const OcpProblem &prob, const Parameterization &par,
                                         const Form1Quantities &fq,
                                         const AdjointBundle &bundle, const Vector &pi,
                                         const Vector &g_val, const QuadratureSpec &quad) {
  check_pi(prob, pi);
  OptimalityResiduals out;
  out.param_residual = fq.r_1p + fq.Gamma_1p * pi;
  if (prob.tf_free())
    out.tf_residual = std::abs(fq.tf_scalar + (pi.size() ? fq.tf_row.dot(pi) : 0.0));
  out.continuous_residual_sup = sup_residual(prob, par, bundle, pi, quad);
  out.feasibility = g_val.norm();
  return out;
}

OptimalityResiduals optimality_residuals(const OcpProblem &prob, const Parameterization &par,
                                         const Form2Quantities &fq,
                                         const AdjointBundle &bundle, const Vector &pi,
                                         const Vector &g_val, const QuadratureSpec &quad) {
  check_pi(prob, pi);
  const Vector full = fq.r_2ptf + fq.Gamma_2ptf * pi;
  const Index s = par.s();
  OptimalityResiduals out;
  out.param_residual = full.head(s);
  if (full.size() > s)
    out.tf_residual = std::abs(full[s]);
  out.continuous_residual_sup = sup_residual(prob, par, bundle, pi, quad);
  out.feasibility = g_val.norm();
  return out;
}

MultiplierSystem continuous_multiplier_system(const OcpProblem &prob,
                                              const Parameterization &par,
                                              const AdjointBundle &bundle, const Gains &gains,
                                              const Vector &g_val, const QuadratureSpec &quad) {
  const Index q = prob.q;
  MultiplierSystem out{Matrix::Zero(q, q), Vector::Zero(q)};
  if (q == 0)
    return out;
  const QuadratureRule rule = iterate_rule(par, bundle.t_f, quad);
  for (const auto &node : rule.nodes()) {
    const PointwiseGradient pg = pointwise_gradient(prob, bundle, node.t, node.piece);
    const Matrix k = gains.K_inv(node.t).inverse();
    const Matrix kf = k * pg.fu_psi;
    out.M_pi.noalias() += node.weight * pg.fu_psi.transpose() * kf;
    out.r_pi.noalias() += node.weight * kf.transpose() * pg.p_u;
  }
  const double k_tf = effective_k_tf(prob, gains);
  if (k_tf > 0.0) {
    const TerminalBracket tb = terminal_bracket(prob, bundle);
    out.M_pi.noalias() += k_tf * tb.row * tb.row.transpose();
    out.r_pi += k_tf * tb.scalar * tb.row;
  }
  out.r_pi -= gains.K_g * g_val;
  return out;
}

Vector continuous_multiplier(const OcpProblem &prob, const Parameterization &par,
                             const AdjointBundle &bundle, const Gains &gains,
                             const Vector &g_val, const QuadratureSpec &quad) {
  if (prob.q == 0)
    return Vector(0);
  const MultiplierSystem sys = continuous_multiplier_system(prob, par, bundle, gains, g_val, quad);
  Eigen::LLT<Matrix> llt(0.5 * (sys.M_pi + sys.M_pi.transpose()));
  if (llt.info() != Eigen::Success)
    throw RankError("continuous multiplier matrix is singular");
  return -llt.solve(sys.r_pi);
}

double costate_ode_residual(const OcpProblem &prob, const AdjointBundle &bundle,
                            const CostateTrajectory &lam, int samples) {
  const double t0 = prob.t0, t_f = bundle.t_f;
  double worst = 0.0;
  for (int i = 1; i <= samples; ++i) {
    const double t = t0 + (t_f - t0) * (i - 0.5) / samples;
    const Vector x = bundle.x_traj(t);
    const Vector u = bundle.control(t);
    const Vector l = lam.lam_traj(t);
    const Vector res = lam.lam_traj.derivative(t) + prob.f_x(x, u, t).transpose() * l +
                       prob.L_x(x, u, t);
    worst = std::max(worst, res.norm());
  }
  return worst;
}

} // namespace dshoot
