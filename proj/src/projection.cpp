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

#include "dshoot/projection.hpp"

#include <cmath>

#include "dshoot/errors.hpp"
#include "dshoot/sensitivity.hpp"

namespace dshoot {
namespace {

// int A^T W F dt for a matrix-valued F (columns projected independently).
Matrix moment(const InnerProductSpec &spec, const BasisSet &basis, const TimeMatrixFunction &F) {
  Matrix out;
  for (const auto &node : spec.rule.nodes()) {
    const Matrix a = basis.A(node.t, node.piece);
    const Matrix f = F(node.t, node.piece);
    const Matrix term = node.weight * a.transpose() * spec.weight(node.t) * f;
    if (out.size() == 0)
      out = term;
    else
      out += term;
  }
  return out;
}

Eigen::LDLT<Matrix> factor_gram(const Matrix &gram) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const Index k = gram.rows();
  if (k == 0)
    return Eigen::LDLT<Matrix>(gram);
  if (!(eig.eigenvalues()[0] > 1e-12 * eig.eigenvalues()[k - 1]))
    throw DependentBasisError("projection basis is linearly dependent");
  return Eigen::LDLT<Matrix>(gram);
}

} // namespace

double InnerProductSpec::inner(const TimeFunction &a, const TimeFunction &b) const {
  double sum = 0.0;
  for (const auto &node : rule.nodes())
    sum += node.weight * a(node.t, node.piece).dot(weight(node.t) * b(node.t, node.piece));
  return sum;
}

Matrix gram_matrix(const InnerProductSpec &spec, const BasisSet &basis) {
  return moment(spec, basis, basis.A);
}

Projection project(const InnerProductSpec &spec, const BasisSet &basis, const TimeFunction &f) {
  Projection out;
  out.gram = gram_matrix(spec, basis);
  const Matrix rhs =
      moment(spec, basis, [&](double t, std::size_t piece) { return Matrix(f(t, piece)); });
  out.coords = factor_gram(out.gram).solve(rhs).col(0);
  out.fn = [A = basis.A, c = out.coords](double t, std::size_t piece) {
    return Vector(A(t, piece) * c);
  };
  return out;
}

Theorem3Report theorem3_check(const InnerProductSpec &spec, const BasisSet &basis,
                              const TimeFunction &p_u, const TimeMatrixFunction &fu_psi,
                              const Vector &pi) {
  const Matrix gram = gram_matrix(spec, basis);
  const auto ldlt = factor_gram(gram);
  Vector b = moment(spec, basis, [&](double t, std::size_t piece) { return Matrix(p_u(t, piece)); })
                 .col(0);
  if (pi.size() > 0)
    b += moment(spec, basis, fu_psi) * pi;
  Theorem3Report out;
  out.coordinate_residual = ldlt.solve(b);
  out.coordinate_residual_norm = out.coordinate_residual.norm();
  out.function_residual_norm =
      std::sqrt(std::max(0.0, out.coordinate_residual.dot(gram * out.coordinate_residual)));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  out.gram_lambda_min = eig.eigenvalues()[0];
  out.gram_lambda_max = eig.eigenvalues()[gram.rows() - 1];
  return out;
}

InnerProductSpec control_inner_product(const Parameterization &par, const Gains &gains,
                                       double t_f, const QuadratureSpec &quad) {
  InnerProductSpec spec;
  spec.t0 = par.t0();
  spec.t_f = t_f;
  spec.weight = [k_inv = gains.K_inv](double t) { return Matrix(k_inv(t).inverse()); };
  spec.rule = iterate_rule(par, t_f, quad);
  return spec;
}

BasisSet control_basis(const Parameterization &par, const Gains &gains, double t_f) {
  BasisSet basis;
  basis.k = par.s();
  basis.A = [par, k_inv = gains.K_inv, t_f](double t, std::size_t piece) {
    return Matrix(k_inv(t) * par.jac_p(t, t_f, piece));
  };
  return basis;
}

} // namespace dshoot
