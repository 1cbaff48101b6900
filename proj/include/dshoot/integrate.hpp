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

#ifndef DSHOOT_INTEGRATE_HPP
#define DSHOOT_INTEGRATE_HPP

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dshoot {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Tolerances and budget for the adaptive Runge-Kutta solver.
struct OdeSettings {
  double rel_tol = 1e-3;
  double abs_tol = 1e-6;
  long max_steps = 200000;
  std::optional<double> initial_step;
  /// Upper bound on the step length. When unset, steps are capped at
  /// `max_step_fraction` of the span length.
  std::optional<double> max_step;
  double max_step_fraction = 0.1;
  /// When set, error control is disabled and every step has this length
  /// (the last one is shortened to land on the end of the span).
  std::optional<double> fixed_step;

  /// Throws ConfigurationError naming the offending field.
  void validate() const;
};

/// One accepted Dormand-Prince step with its free 4th-order interpolant.
///
/// The step runs from `t_start` to `t_end` in the direction of integration;
/// `coeffs` holds the five Hairer continuous-output vectors column-wise, so
/// y(theta) = r1 + theta (r2 + (1-theta) (r3 + theta (r4 + (1-theta) r5))),
/// with theta = (t - t_start) / (t_end - t_start).
struct DenseSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  Matrix coeffs;

  double t_lo() const { return std::min(t_start, t_end); }
  double t_hi() const { return std::max(t_start, t_end); }
  Vector eval(double t) const;
  Vector derivative(double t) const;
};

/// Continuous piecewise-polynomial representation of an integrated
/// trajectory. The grid is strictly increasing regardless of the direction
/// of integration, and evaluation at a grid node returns the stored value.
class DenseTrajectory {
public:
  DenseTrajectory() = default;
  DenseTrajectory(std::vector<DenseSegment> segments, std::vector<double> grid,
                  std::vector<Vector> values);

  const std::vector<double> &t_grid() const { return grid_; }
  const std::vector<Vector> &values() const { return values_; }
  double t_begin() const { return grid_.front(); }
  double t_end() const { return grid_.back(); }
  Index dim() const;
  bool empty() const { return grid_.empty(); }

  /// Evaluates the interpolant; throws DomainError outside the grid span.
  Vector operator()(double t) const;
  /// Time derivative of the interpolant.
  Vector derivative(double t) const;

  /// Returns the trajectory of `map * y(t)`; nodes and interpolant are both
  /// transformed, so exactness at nodes is preserved.
  DenseTrajectory transformed(const Matrix &map) const;

  /// Joins untransformed trajectories given in increasing time order whose
  /// spans touch end to start.
  static DenseTrajectory concatenate(const std::vector<DenseTrajectory> &parts);

private:
  const DenseSegment &segment_at(double t) const;
  void check_domain(double t) const;

  std::shared_ptr<const std::vector<DenseSegment>> segments_;
  std::vector<double> grid_;
  std::vector<Vector> values_;
  std::optional<Matrix> map_;
};

struct DenseSolution {
  DenseTrajectory trajectory;
  std::size_t steps = 0;
  std::size_t rejections = 0;
  double final_error = 0.0;
  /// Where integration actually stopped; differs from the requested end
  /// only when a step observer asked to stop early.
  double t_reached = 0.0;
  Vector y_final;
};

using OdeRhs = std::function<Vector(double t, const Vector &y)>;

/// Optional callbacks for callers that drive the solver step by step.
struct IvpHooks {
  /// Returning false rejects the trial step; it is retried at half length.
  std::function<bool(double t, const Vector &y)> accept_state;
  /// Called after every accepted step; returning false stops integration.
  std::function<bool(const DenseSegment &step, const Vector &y_end)> on_step;
};

/// Adaptive Dormand-Prince 5(4) solve of y' = rhs(t, y) over `span`.
/// `span.second < span.first` integrates backward in time.
DenseSolution integrate_ivp(const OdeRhs &rhs, const Vector &y0,
                            std::pair<double, double> span,
                            const OdeSettings &settings,
                            const IvpHooks &hooks = {});

/// Integrates across `breaks` (interior times, increasing) so that no step
/// straddles one. `rhs_for_piece(j)` is used on the j-th piece counted from
/// the left; pieces are visited in the direction of integration.
DenseSolution
integrate_piecewise(const std::function<OdeRhs(std::size_t piece)> &rhs_for_piece,
                    const Vector &y0, std::pair<double, double> span,
                    std::span<const double> breaks, const OdeSettings &settings);

/// Evaluates the continuous interpolant of a solution.
Vector dense_eval(const DenseSolution &sol, double t);

} // namespace dshoot

#endif // DSHOOT_INTEGRATE_HPP
