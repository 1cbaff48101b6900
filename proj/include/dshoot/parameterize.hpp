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

#ifndef DSHOOT_PARAMETERIZE_HPP
#define DSHOOT_PARAMETERIZE_HPP

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dshoot/integrate.hpp"
#include "dshoot/ocp.hpp"

namespace dshoot {

enum class BasisKind { global_polynomial, lagrange_nodes, piecewise_linear, piecewise_constant };

/// Form 1 controls depend on p only; Form 2 controls also move with t_f.
enum class Form { form1, form2 };

struct BasisSpec {
  BasisKind kind = BasisKind::global_polynomial;
  /// Polynomial order, or the number of segments N for node-based kinds.
  int size = 0;
};

std::string to_string(BasisKind kind);
std::string to_string(Form form);
BasisKind basis_kind_from_string(const std::string &name);
Form form_from_string(const std::string &name);

/// Linear-in-p control parameterization u(t; p[, t_f]).
///
/// Parameter layout is block-wise: p = [c_0; c_1; ...] with each block of
/// length m (polynomial coefficients of t^k, or node values). Node-based
/// kinds use the uniform nodes t_i = t0 + i (T - t0) / N, where T is t_f for
/// Form 2 and the frozen horizon for Form 1.
class Parameterization {
public:
  BasisKind kind() const { return kind_; }
  Form form() const { return form_; }
  int size() const { return size_; }
  Index s() const { return s_; }
  Index m() const { return m_; }
  double t0() const { return t0_; }

  /// Horizon that places the nodes.
  double node_horizon(double t_f) const { return node_tf_ ? *node_tf_ : t_f; }

  /// Interior break times of the control (empty for smooth kinds).
  std::vector<double> breaks(double t_f) const;
  /// Right-continuous piece index; t_f maps to the last piece.
  std::size_t piece_at(double t, double t_f) const;

  Vector eval(double t, const Vector &p, double t_f) const;
  Vector eval(double t, const Vector &p, double t_f, std::size_t piece) const;
  Matrix jac_p(double t, double t_f) const;
  Matrix jac_p(double t, double t_f, std::size_t piece) const;
  /// Zero for Form 1 and for piecewise-constant controls.
  Vector jac_tf(double t, const Vector &p, double t_f, std::size_t piece) const;

  ControlSignal control(const Vector &p, double t_f) const;

private:
  friend Parameterization make_basis(BasisSpec spec, Index m, double t0, Form form,
                                     std::optional<double> fixed_tf);

  // Scalar basis row (length size+1 or N) and its t-derivative.
  Eigen::RowVectorXd scalar_row(double t, double t_f, std::size_t piece) const;
  Eigen::RowVectorXd scalar_row_dt(double t, double t_f, std::size_t piece) const;
  Index scalar_count() const { return s_ / m_; }
  void check_domain(double t, const Vector *p, double t_f) const;

  BasisKind kind_ = BasisKind::global_polynomial;
  Form form_ = Form::form1;
  int size_ = 0;
  Index m_ = 1;
  Index s_ = 0;
  double t0_ = 0.0;
  std::optional<double> node_tf_;
};

/// Builds a parameterization. Node-based kinds under Form 1 need the fixed
/// final time (`fixed_tf`) because their nodes would otherwise move with t_f.
Parameterization make_basis(BasisSpec spec, Index m, double t0, Form form,
                            std::optional<double> fixed_tf = std::nullopt);

Vector eval_control(const Parameterization &par, const Vector &p, double t_f, double t);

/// (u_p(t), u_tf(t)).
std::pair<Matrix, Vector> eval_sensitivities(const Parameterization &par, const Vector &p,
                                             double t_f, double t);

/// Smallest eigenvalue of the quadrature Gram matrix of the columns of
/// u_p on [t0, t_f]. Throws DependentBasisError when it is at most 1e-10
/// times the largest.
double validate_independence(const Parameterization &par, const Vector &p, double t_f,
                             int quad_nodes);

/// Same check for an arbitrary column family jac(t, piece) with s columns.
double validate_independence(const std::function<Matrix(double t, std::size_t piece)> &jac,
                             Index s, double t0, double t_f,
                             const std::vector<double> &breaks, int quad_nodes);

} // namespace dshoot

#endif // DSHOOT_PARAMETERIZE_HPP
