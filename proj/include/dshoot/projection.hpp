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

#ifndef DSHOOT_PROJECTION_HPP
#define DSHOOT_PROJECTION_HPP

#include <functional>

#include "dshoot/integrate.hpp"
#include "dshoot/ocp.hpp"
#include "dshoot/parameterize.hpp"
#include "dshoot/quadrature.hpp"

namespace dshoot {

/// Vector function of time; `piece` selects the side of a control break.
using TimeFunction = std::function<Vector(double t, std::size_t piece)>;
using TimeMatrixFunction = std::function<Matrix(double t, std::size_t piece)>;

/// <a, b> = int a^T W b dt, evaluated with `rule`.
struct InnerProductSpec {
  double t0 = 0.0;
  double t_f = 1.0;
  std::function<Matrix(double t)> weight;
  QuadratureRule rule;

  double inner(const TimeFunction &a, const TimeFunction &b) const;
};

/// Columns a_1(t) ... a_k(t) spanning the subspace S.
struct BasisSet {
  TimeMatrixFunction A;
  Index k = 0;
};

struct Projection {
  Vector coords;
  /// Pro_S(f)(t) = A(t) coords.
  TimeFunction fn;
  Matrix gram;
};

Matrix gram_matrix(const InnerProductSpec &spec, const BasisSet &basis);

/// Orthogonal projection of f onto span(A) under `spec`; throws
/// DependentBasisError when the Gram matrix is singular.
Projection project(const InnerProductSpec &spec, const BasisSet &basis, const TimeFunction &f);

struct Theorem3Report {
  /// Weighted L2 norm of Pro_S(p_u) + Pro_S(f_u^T Psi) pi.
  double function_residual_norm = 0.0;
  /// Coordinates of that function in the basis, M_p^-1 (r + Gamma pi).
  Vector coordinate_residual;
  double coordinate_residual_norm = 0.0;
  /// Extreme eigenvalues of the Gram matrix; the two norms satisfy
  /// sqrt(lmin) |c| <= |f| <= sqrt(lmax) |c|.
  double gram_lambda_min = 0.0;
  double gram_lambda_max = 0.0;
};

Theorem3Report theorem3_check(const InnerProductSpec &spec, const BasisSet &basis,
                              const TimeFunction &p_u, const TimeMatrixFunction &fu_psi,
                              const Vector &pi);

/// Inner product with W = K on the iterate's quadrature grid.
InnerProductSpec control_inner_product(const Parameterization &par, const Gains &gains,
                                       double t_f, const QuadratureSpec &quad);

/// Columns of K^-1 u_p; their Gram matrix under W = K is M_p.
BasisSet control_basis(const Parameterization &par, const Gains &gains, double t_f);

} // namespace dshoot

#endif // DSHOOT_PROJECTION_HPP
