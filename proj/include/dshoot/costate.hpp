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

#ifndef DSHOOT_COSTATE_HPP
#define DSHOOT_COSTATE_HPP

#include "dshoot/ocp.hpp"
#include "dshoot/parameterize.hpp"
#include "dshoot/sensitivity.hpp"

namespace dshoot {

struct CostateTrajectory {
  DenseTrajectory lam_traj;
  Vector pi_used;
};

/// lambda(t) = mu(t) + Psi(t) pi, built from the stored adjoints.
CostateTrajectory reconstruct_costate(const OcpProblem &prob, const AdjointBundle &bundle,
                                      const Vector &pi);

struct OptimalityResiduals {
  /// r + Gamma pi over the parameter block.
  Vector param_residual;
  /// Terminal-time optimality residual (zero for a fixed final time).
  double tf_residual = 0.0;
  /// sup_t |p_u(t) + f_u^T Psi(t) pi| over the quadrature nodes.
  double continuous_residual_sup = 0.0;
  double feasibility = 0.0;
};

OptimalityResiduals optimality_residuals(const OcpProblem &prob, const Parameterization &par,
                                         const Form1Quantities &fq,
                                         const AdjointBundle &bundle, const Vector &pi,
                                         const Vector &g_val, const QuadratureSpec &quad);

OptimalityResiduals optimality_residuals(const OcpProblem &prob, const Parameterization &par,
                                         const Form2Quantities &fq,
                                         const AdjointBundle &bundle, const Vector &pi,
                                         const Vector &g_val, const QuadratureSpec &quad);

/// Multiplier system of the unparameterized control,
///   M_pi = int (f_u^T Psi)^T K (f_u^T Psi) dt [+ k_tf row row^T],
///   r_pi = int (f_u^T Psi)^T K p_u dt [+ k_tf row scalar] - K_g g.
struct MultiplierSystem {
  Matrix M_pi;
  Vector r_pi;
};

MultiplierSystem continuous_multiplier_system(const OcpProblem &prob,
                                              const Parameterization &par,
                                              const AdjointBundle &bundle, const Gains &gains,
                                              const Vector &g_val, const QuadratureSpec &quad);

/// pi_c = -M_pi^-1 r_pi; throws RankError when M_pi is singular.
Vector continuous_multiplier(const OcpProblem &prob, const Parameterization &par,
                             const AdjointBundle &bundle, const Gains &gains,
                             const Vector &g_val, const QuadratureSpec &quad);

/// max |lambda' + f_x^T lambda + L_x| at `samples` evenly spaced interior
/// times, with lambda' from the interpolant.
double costate_ode_residual(const OcpProblem &prob, const AdjointBundle &bundle,
                            const CostateTrajectory &lam, int samples);

} // namespace dshoot

#endif // DSHOOT_COSTATE_HPP
