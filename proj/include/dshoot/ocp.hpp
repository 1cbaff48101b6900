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

#ifndef DSHOOT_OCP_HPP
#define DSHOOT_OCP_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dshoot/integrate.hpp"

namespace dshoot {

/// Bolza optimal control problem with terminal equality constraints
///
///   min  phi(x(tf), tf) + int_{t0}^{tf} L(x, u, t) dt
///   s.t. x' = f(x, u, t),  x(t0) = x0,  g(x(tf), tf) = 0.
///
/// All first derivatives are supplied analytically.
struct OcpProblem {
  using DynFn = std::function<Vector(const Vector &x, const Vector &u, double t)>;
  using DynJac = std::function<Matrix(const Vector &x, const Vector &u, double t)>;
  using CostFn = std::function<double(const Vector &x, const Vector &u, double t)>;
  using CostGrad = DynFn;
  using TermFn = std::function<double(const Vector &xf, double tf)>;
  using TermGrad = std::function<Vector(const Vector &xf, double tf)>;
  using TermJac = std::function<Matrix(const Vector &xf, double tf)>;

  std::string name;
  Index n = 0;
  Index m = 0;
  Index q = 0;
  double t0 = 0.0;
  Vector x0;
  /// Set for fixed-final-time problems; empty means t_f is free.
  std::optional<double> fixed_tf;

  DynFn f;
  DynJac f_x;
  DynJac f_u;
  CostFn L;
  CostGrad L_x;
  CostGrad L_u;
  TermFn phi;
  TermGrad phi_x;
  TermFn phi_t;
  TermGrad g;
  TermJac g_x;
  TermGrad g_t;

  bool tf_free() const { return !fixed_tf.has_value(); }
};

/// Gains of the evolution equations.
struct Gains {
  /// Inverse control weight K^-1(t), m x m SPD.
  std::function<Matrix(double t)> K_inv;
  double k_tf = 0.1;
  Matrix K_g;
  /// Only used by the gradient-flow mode.
  std::optional<Matrix> K_theta;

  /// K = k * I, k_tf, K_g = kg * I.
  static Gains scalar(Index m, Index q, double k, double k_tf, double kg);

  /// Checks symmetry and definiteness of every gain at a few times in
  /// [t_lo, t_hi]; throws ConfigurationError.
  void validate(const OcpProblem &prob, double t_lo, double t_hi) const;
};

/// The terminal-time gain actually used: zero for fixed-t_f problems.
double effective_k_tf(const OcpProblem &prob, const Gains &gains);

/// True when `a` is symmetric (to round-off) and positive definite.
bool is_spd(const Matrix &a);

/// A control history u(t) on [t0, tf] that may jump at `breaks`.
///
/// Piece j is the interval between consecutive entries of
/// {t0, breaks..., tf}. Evaluation is right-continuous, and tf belongs to
/// the last piece. Integration never steps across a break.
struct ControlSignal {
  std::function<Vector(double t, std::size_t piece)> value;
  std::vector<double> breaks;

  ControlSignal() = default;
  ControlSignal(std::function<Vector(double t, std::size_t piece)> fn,
                std::vector<double> interior_breaks)
      : value(std::move(fn)), breaks(std::move(interior_breaks)) {}
  /// Smooth control without breaks.
  ControlSignal(std::function<Vector(double t)> fn); // NOLINT(implicit)

  std::size_t piece_at(double t) const;
  Vector operator()(double t) const { return value(t, piece_at(t)); }
};

/// Forward state solve with the running cost carried as an extra state.
struct StateSolution {
  DenseTrajectory x;
  DenseTrajectory running_cost;
  double t_f = 0.0;
  Vector x_f;
  double running_cost_total = 0.0;
  std::size_t steps = 0;
};

StateSolution simulate(const OcpProblem &prob, const ControlSignal &u, double t_f,
                       const OdeSettings &ode);

double objective_value(const OcpProblem &prob, const ControlSignal &u, double t_f,
                       const OdeSettings &ode);
Vector constraint_value(const OcpProblem &prob, const ControlSignal &u, double t_f,
                        const OdeSettings &ode);

struct ValidationReport {
  /// Worst relative error per derivative evaluator, keyed by name.
  std::map<std::string, double> max_rel_error;
};

/// Compares every analytic derivative with central differences at
/// `samples` random points. Throws StructuralError on dimension mismatches
/// and DerivativeMismatchError when a relative error exceeds `tol`.
ValidationReport validate_problem(const OcpProblem &prob, int samples,
                                  std::uint64_t seed = 20260101, double tol = 1e-4);

/// Checks evaluator output dimensions at one point; throws StructuralError.
void check_dimensions(const OcpProblem &prob, const Vector &x, const Vector &u, double t);

struct SolveReport {
  Vector p_final;
  double tf_final = 0.0;
  Vector pi_final;
  double J_final = 0.0;
  double residual_norm = 0.0;
  double g_norm = 0.0;
  bool converged = false;
  double tau_reached = 0.0;
  double wall_time = 0.0;
  std::vector<std::string> warnings;
};

struct TraceRow {
  double tau = 0.0;
  Vector p;
  double t_f = 0.0;
  Vector pi;
  double J = 0.0;
  double g_norm = 0.0;
  double residual_norm = 0.0;
  double V = 0.0;
};

struct SolveTrace {
  std::vector<TraceRow> rows;
};

} // namespace dshoot

#endif // DSHOOT_OCP_HPP
