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

#ifndef DSHOOT_SENSITIVITY_HPP
#define DSHOOT_SENSITIVITY_HPP

#include "dshoot/integrate.hpp"
#include "dshoot/ocp.hpp"
#include "dshoot/parameterize.hpp"
#include "dshoot/quadrature.hpp"

namespace dshoot {

/// Everything the evolution equations need from one iterate: the state,
/// the backward adjoints
///
///   mu'  = -f_x^T mu - L_x,  mu(t_f)  = phi_x,
///   Psi' = -f_x^T Psi,       Psi(t_f) = g_x^T,
///
/// and the control that produced them.
struct AdjointBundle {
  DenseTrajectory x_traj;
  DenseTrajectory mu_traj;
  /// Psi flattened column-major (n*q entries).
  DenseTrajectory psi_traj;
  /// [mu; vec(Psi)] as integrated.
  DenseTrajectory joint_traj;
  Index n = 0;
  Index q = 0;
  ControlSignal control;
  double t_f = 0.0;
  Vector x_f;
  double J = 0.0;
  Vector g;

  Matrix psi(double t) const;
};

struct Form1Quantities {
  Matrix M_p;
  Vector r_1p;
  Matrix Gamma_1p;
  /// (phi_t + phi_x^T f + L) at t_f.
  double tf_scalar = 0.0;
  /// (g_x f + g_t) at t_f.
  Vector tf_row;
};

/// Augmented (s+1)-block quantities; for a fixed final time they reduce to
/// the s-block of Form 1.
struct Form2Quantities {
  Matrix M_ptf;
  Vector r_2ptf;
  Matrix Gamma_2ptf;
};

struct NlpGradients {
  Vector f_theta;
  Matrix g_theta;
};

StateSolution solve_state(const OcpProblem &prob, const Parameterization &par,
                          const Vector &p, double t_f, const OdeSettings &ode);

/// Backward solve of mu and Psi along `state` under `control`.
AdjointBundle solve_adjoints(const OcpProblem &prob, const StateSolution &state,
                             const ControlSignal &control, const OdeSettings &ode);

/// Forward and backward solves for the iterate (p, t_f), plus J and g.
AdjointBundle evaluate_iterate(const OcpProblem &prob, const Parameterization &par,
                               const Vector &p, double t_f, const OdeSettings &ode);

/// Quadrature rule the trajectory integrals of this iterate use.
QuadratureRule iterate_rule(const Parameterization &par, double t_f,
                            const QuadratureSpec &quad);

/// `M_p_fixed`, when given, replaces the quadrature of M_p (its value does
/// not depend on the iterate for linear bases with a fixed final time).
Form1Quantities assemble_form1(const OcpProblem &prob, const Parameterization &par,
                               const AdjointBundle &bundle, const Gains &gains,
                               const Vector &p, const QuadratureSpec &quad,
                               const Matrix *M_p_fixed = nullptr);

Form2Quantities assemble_form2(const OcpProblem &prob, const Parameterization &par,
                               const AdjointBundle &bundle, const Gains &gains,
                               const Vector &p, const QuadratureSpec &quad);

/// Gradient of J and Jacobian of g with respect to theta = (p, t_f).
NlpGradients nlp_gradients(const OcpProblem &prob, const Parameterization &par,
                           const AdjointBundle &bundle, const Vector &p,
                           const QuadratureSpec &quad);

/// M_p alone, for iterate-independent reuse.
Matrix assemble_M_p(const Parameterization &par, const Gains &gains, double t_f,
                    const QuadratureSpec &quad);

struct TerminalBracket {
  /// (phi_t + phi_x^T f + L) at t_f.
  double scalar = 0.0;
  /// (g_x f + g_t) at t_f.
  Vector row;
};
TerminalBracket terminal_bracket(const OcpProblem &prob, const AdjointBundle &bundle);

/// p_u(t) = L_u + f_u^T mu and f_u^T Psi (m x q) at one time.
struct PointwiseGradient {
  Vector p_u;
  Matrix fu_psi;
};
PointwiseGradient pointwise_gradient(const OcpProblem &prob, const AdjointBundle &bundle,
                                     double t, std::size_t piece);

} // namespace dshoot

#endif // DSHOOT_SENSITIVITY_HPP
