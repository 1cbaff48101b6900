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

#ifndef DSHOOT_EVOLUTION_HPP
#define DSHOOT_EVOLUTION_HPP

#include <functional>
#include <optional>

#include "dshoot/integrate.hpp"
#include "dshoot/ocp.hpp"
#include "dshoot/parameterize.hpp"
#include "dshoot/sensitivity.hpp"

namespace dshoot {

enum class EvolutionModeKind { form1, form2, gradient_flow };

struct EvolutionMode {
  EvolutionModeKind kind = EvolutionModeKind::form1;
  /// Gain of the gradient-flow mode; falls back to Gains::K_theta.
  std::optional<Matrix> K_theta;

  static EvolutionMode form1() { return {EvolutionModeKind::form1, std::nullopt}; }
  static EvolutionMode form2() { return {EvolutionModeKind::form2, std::nullopt}; }
  static EvolutionMode gradient_flow(Matrix k) {
    return {EvolutionModeKind::gradient_flow, std::move(k)};
  }
};

std::string to_string(EvolutionModeKind kind);
EvolutionModeKind mode_from_string(const std::string &name);

struct EvolutionState {
  Vector p;
  double t_f = 0.0;
};

struct StopCriteria {
  double tau_max = 300.0;
  double tol_opt = 1e-6;
  double tol_feas = 1e-6;
  double record_every = 1.0;

  void validate() const;
};

struct EvolutionOptions {
  /// Weight of J in the diagnostic V = |g| + c1 J.
  double c1 = 0.01;
  /// Multipliers larger than this in norm are reported as a warning.
  double pi_bound = 1e6;
  /// Reuse one M_p for Form 1 with a fixed final time.
  bool constant_M_p = true;
};

/// Symmetric positive-definite operator, stored either as a Cholesky
/// factor of M (applying M^-1) or as an explicit gain matrix K (applying K).
class SpdOperator {
public:
  /// Throws RankError mentioning `what` when M is not numerically SPD.
  static SpdOperator inverse_of(const Matrix &M, const std::string &what);
  static SpdOperator explicit_gain(const Matrix &K);

  Matrix apply(const Matrix &x) const;
  Index dim() const { return dim_; }

private:
  std::optional<Eigen::LLT<Matrix>> llt_;
  Matrix gain_;
  Index dim_ = 0;
};

/// Terminal-time contribution of Form 1 to the multiplier system.
struct TfTerms {
  double k_tf = 0.0;
  double tf_scalar = 0.0;
  Vector tf_row;
};

/// pi = -M_pi^-1 r_pi with
///   M_pi = G^T A G [+ k_tf row row^T],
///   r_pi = G^T A r [+ k_tf row scalar] - K_g g,
/// where A is `op` (M^-1 or K_theta). Empty for q = 0. Throws RankError
/// when M_pi is not SPD.
Vector multiplier(const SpdOperator &op, const Vector &r, const Matrix &Gamma,
                  const std::optional<TfTerms> &tf_terms, const Matrix &K_g,
                  const Vector &g_val);

/// Evaluation of the evolution equations at one state.
struct EvolutionRhs {
  /// d[p; t_f]/dtau, length s+1 (last entry zero for a fixed final time).
  Vector dtheta;
  Vector pi;
  double J = 0.0;
  Vector g;
  /// |r + Gamma pi| plus the terminal-time residual.
  double residual_norm = 0.0;
  AdjointBundle bundle;
};

EvolutionRhs evolution_rhs(const EvolutionMode &mode, const OcpProblem &prob,
                           const Parameterization &par, const Gains &gains,
                           const EvolutionState &state, const OdeSettings &ode,
                           const QuadratureSpec &quad, const Matrix *M_p_fixed = nullptr);

struct SolveResult {
  SolveReport report;
  SolveTrace trace;
  /// Evaluation at the final state, including its adjoint bundle.
  EvolutionRhs final_eval;
};

SolveResult solve_evolution(const EvolutionMode &mode, const OcpProblem &prob,
                            const Parameterization &par, const Gains &gains,
                            const EvolutionState &init, const StopCriteria &stop,
                            const OdeSettings &ode_outer, const OdeSettings &ode_inner,
                            const QuadratureSpec &quad, const EvolutionOptions &options = {});

double lyapunov_diagnostic(const Vector &g_val, double J_val, double c1);

struct GradientFlowResult {
  Vector theta;
  Vector pi;
  bool converged = false;
  double tau_reached = 0.0;
};

/// Equality-constrained gradient flow
///   theta' = -K (f_theta + h_theta^T pi),
///   pi = -(h_theta K h_theta^T)^-1 (h_theta K f_theta - K_h h),
/// integrated until stationary and feasible or tau_max. Loose tolerances
/// leave the state hovering near rel_tol off the fixed point.
GradientFlowResult
gradient_flow_generic(const std::function<Vector(const Vector &)> &f_grad,
                      const std::function<Vector(const Vector &)> &h_val,
                      const std::function<Matrix(const Vector &)> &h_jac,
                      const Matrix &K_theta, const Matrix &K_h, const Vector &theta0,
                      const StopCriteria &stop, const OdeSettings &ode = {});

} // namespace dshoot

#endif // DSHOOT_EVOLUTION_HPP
