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

#include "dshoot/parameterize.hpp"

#include <cmath>
#include <sstream>

#include "dshoot/errors.hpp"
#include "dshoot/quadrature.hpp"

namespace dshoot {
namespace {

Matrix kron_identity(const Eigen::RowVectorXd &row, Index m) {
  Matrix out = Matrix::Zero(m, row.size() * m);
  for (Index k = 0; k < row.size(); ++k)
    out.block(0, k * m, m, m).diagonal().setConstant(row[k]);
  return out;
}

bool is_node_kind(BasisKind kind) { return kind != BasisKind::global_polynomial; }

} // namespace

std::string to_string(BasisKind kind) {
  switch (kind) {
  case BasisKind::global_polynomial:
    return "global_polynomial";
  case BasisKind::lagrange_nodes:
    return "lagrange_nodes";
  case BasisKind::piecewise_linear:
    return "piecewise_linear";
  case BasisKind::piecewise_constant:
    return "piecewise_constant";
  }
  return "unknown";
}

std::string to_string(Form form) { return form == Form::form1 ? "form1" : "form2"; }

BasisKind basis_kind_from_string(const std::string &name) {
  for (BasisKind k : {BasisKind::global_polynomial, BasisKind::lagrange_nodes,
                      BasisKind::piecewise_linear, BasisKind::piecewise_constant}) {
    if (to_string(k) == name)
      return k;
  }
  throw ConfigurationError("unknown parameterization kind '" + name + "'");
}

Form form_from_string(const std::string &name) {
  if (name == "form1")
    return Form::form1;
  if (name == "form2")
    return Form::form2;
  throw ConfigurationError("unknown form '" + name + "'");
}

Parameterization make_basis(BasisSpec spec, Index m, double t0, Form form,
                            std::optional<double> fixed_tf) {
  if (m < 1)
    throw ConfigurationError("control dimension must be at least 1");
  Parameterization par;
  par.kind_ = spec.kind;
  par.form_ = form;
  par.size_ = spec.size;
  par.m_ = m;
  par.t0_ = t0;
  switch (spec.kind) {
  case BasisKind::global_polynomial:
    if (spec.size < 0)
      throw ConfigurationError("polynomial order must be non-negative");
    par.s_ = m * (spec.size + 1);
    break;
  case BasisKind::lagrange_nodes:
  case BasisKind::piecewise_linear:
    if (spec.size < 1)
      throw ConfigurationError("node count N must be at least 1");
    par.s_ = m * (spec.size + 1);
    break;
  case BasisKind::piecewise_constant:
    if (spec.size < 1)
      throw ConfigurationError("node count N must be at least 1");
    par.s_ = m * spec.size;
    break;
  }
  if (is_node_kind(spec.kind) && form == Form::form1) {
    if (!fixed_tf)
      throw ConfigurationError(to_string(spec.kind) +
                               " with a free final time requires form2");
    par.node_tf_ = fixed_tf;
  }
  if (fixed_tf && !(*fixed_tf > t0))
    throw ConfigurationError("final time must exceed t0");
  return par;
}

void Parameterization::check_domain(double t, const Vector *p, double t_f) const {
  if (p && p->size() != s_) {
    std::ostringstream os;
    os << "parameter vector has length " << p->size() << ", expected " << s_;
    throw StructuralError(os.str());
  }
  if (!(t_f > t0_))
    throw DomainError("final time must exceed t0");
  const double slack = 1e-12 * std::max(1.0, std::abs(t_f));
  if (!(t >= t0_ - slack && t <= t_f + slack)) {
    std::ostringstream os;
    os.precision(17);
    os << "t = " << t << " outside control interval [" << t0_ << ", " << t_f << "]";
    throw DomainError(os.str());
  }
}

std::vector<double> Parameterization::breaks(double t_f) const {
  std::vector<double> out;
  if (kind_ != BasisKind::piecewise_linear && kind_ != BasisKind::piecewise_constant)
    return out;
  const double horizon = node_horizon(t_f);
  for (int i = 1; i < size_; ++i) {
    const double b = t0_ + i * (horizon - t0_) / size_;
    if (b < t_f)
      out.push_back(b);
  }
  return out;
}

std::size_t Parameterization::piece_at(double t, double t_f) const {
  if (kind_ != BasisKind::piecewise_linear && kind_ != BasisKind::piecewise_constant)
    return 0;
  const double horizon = node_horizon(t_f);
  const auto node = [&](int i) { return t0_ + i * (horizon - t0_) / size_; };
  int j = static_cast<int>(std::floor((t - t0_) / (horizon - t0_) * size_));
  j = std::clamp(j, 0, size_ - 1);
  while (j > 0 && t < node(j))
    --j;
  while (j < size_ - 1 && t >= node(j + 1))
    ++j;
  return static_cast<std::size_t>(j);
}

Eigen::RowVectorXd Parameterization::scalar_row(double t, double t_f,
                                                std::size_t piece) const {
  const Index count = scalar_count();
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(count);
  const double horizon = node_horizon(t_f);
  switch (kind_) {
  case BasisKind::global_polynomial: {
    double power = 1.0;
    for (Index k = 0; k < count; ++k) {
      row[k] = power;
      power *= t;
    }
    break;
  }
  case BasisKind::lagrange_nodes: {
    const double sigma = (t - t0_) / (horizon - t0_);
    for (Index i = 0; i < count; ++i) {
      double l = 1.0;
      const double si = static_cast<double>(i) / size_;
      for (Index j = 0; j < count; ++j) {
        if (j != i) {
          const double sj = static_cast<double>(j) / size_;
          l *= (sigma - sj) / (si - sj);
        }
      }
      row[i] = l;
    }
    break;
  }
  case BasisKind::piecewise_linear: {
    const auto j = static_cast<Index>(piece);
    const double h = (horizon - t0_) / size_;
    const double xi = (t - (t0_ + static_cast<double>(j) * h)) / h;
    row[j] = 1.0 - xi;
    row[j + 1] = xi;
    break;
  }
  case BasisKind::piecewise_constant:
    row[static_cast<Index>(piece)] = 1.0;
    break;
  }
  return row;
}

Eigen::RowVectorXd Parameterization::scalar_row_dt(double t, double t_f,
                                                   std::size_t piece) const {
  const Index count = scalar_count();
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(count);
  const double horizon = node_horizon(t_f);
  switch (kind_) {
  case BasisKind::global_polynomial: {
    double power = 1.0;
    for (Index k = 1; k < count; ++k) {
      row[k] = static_cast<double>(k) * power;
      power *= t;
    }
    break;
  }
  case BasisKind::lagrange_nodes: {
    const double sigma = (t - t0_) / (horizon - t0_);
    for (Index i = 0; i < count; ++i) {
      const double si = static_cast<double>(i) / size_;
      double sum = 0.0;
      for (Index k = 0; k < count; ++k) {
        if (k == i)
          continue;
        const double sk = static_cast<double>(k) / size_;
        double term = 1.0 / (si - sk);
        for (Index j = 0; j < count; ++j) {
          if (j != i && j != k) {
            const double sj = static_cast<double>(j) / size_;
            term *= (sigma - sj) / (si - sj);
          }
        }
        sum += term;
      }
      row[i] = sum / (horizon - t0_);
    }
    break;
  }
  case BasisKind::piecewise_linear: {
    const auto j = static_cast<Index>(piece);
    const double h = (horizon - t0_) / size_;
    row[j] = -1.0 / h;
    row[j + 1] = 1.0 / h;
    break;
  }
  case BasisKind::piecewise_constant:
    break;
  }
  return row;
}

Vector Parameterization::eval(double t, const Vector &p, double t_f) const {
  return eval(t, p, t_f, piece_at(t, t_f));
}

Vector Parameterization::eval(double t, const Vector &p, double t_f, std::size_t piece) const {
  check_domain(t, &p, t_f);
  return jac_p(t, t_f, piece) * p;
}

Matrix Parameterization::jac_p(double t, double t_f) const {
  return jac_p(t, t_f, piece_at(t, t_f));
}

Matrix Parameterization::jac_p(double t, double t_f, std::size_t piece) const {
  check_domain(t, nullptr, t_f);
  return kron_identity(scalar_row(t, t_f, piece), m_);
}

Vector Parameterization::jac_tf(double t, const Vector &p, double t_f,
                                std::size_t piece) const {
  check_domain(t, &p, t_f);
  if (form_ == Form::form1 || !is_node_kind(kind_) ||
      kind_ == BasisKind::piecewise_constant)
    return Vector::Zero(m_);
  // Nodes scale with t_f, so u depends on t only through (t - t0)/(t_f - t0).
  const Vector du_dt = kron_identity(scalar_row_dt(t, t_f, piece), m_) * p;
  return -(t - t0_) / (t_f - t0_) * du_dt;
}

ControlSignal Parameterization::control(const Vector &p, double t_f) const {
  check_domain(t0_, &p, t_f);
  return ControlSignal(
      [par = *this, p, t_f](double t, std::size_t piece) { return par.eval(t, p, t_f, piece); },
      breaks(t_f));
}

Vector eval_control(const Parameterization &par, const Vector &p, double t_f, double t) {
  return par.eval(t, p, t_f);
}

std::pair<Matrix, Vector> eval_sensitivities(const Parameterization &par, const Vector &p,
                                             double t_f, double t) {
  const std::size_t piece = par.piece_at(t, t_f);
  return {par.jac_p(t, t_f, piece), par.jac_tf(t, p, t_f, piece)};
}

double validate_independence(const std::function<Matrix(double t, std::size_t piece)> &jac,
                             Index s, double t0, double t_f,
                             const std::vector<double> &breaks, int quad_nodes) {
  if (quad_nodes < s)
    throw ConfigurationError("independence check needs at least s quadrature nodes");
  const QuadratureRule rule =
      QuadratureRule::composite_simpson(t0, t_f, std::max(quad_nodes, 3), breaks);
  Matrix gram = Matrix::Zero(s, s);
  for (const auto &node : rule.nodes()) {
    const Matrix a = jac(node.t, node.piece);
    if (a.cols() != s)
      throw StructuralError("basis Jacobian has wrong column count");
    gram.noalias() += node.weight * a.transpose() * a;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const double lmin = eig.eigenvalues()[0];
  const double lmax = eig.eigenvalues()[s - 1];
  if (!(lmin > 1e-10 * lmax)) {
    std::ostringstream os;
    os.precision(6);
    os << "basis columns are linearly dependent (Gram eigenvalue " << lmin
       << "); null direction [";
    const Vector v = eig.eigenvectors().col(0);
    for (Index i = 0; i < s; ++i)
      os << (i ? ", " : "") << v[i];
    os << "]";
    throw DependentBasisError(os.str());
  }
  return lmin;
}

double validate_independence(const Parameterization &par, const Vector &p, double t_f,
                             int quad_nodes) {
  if (p.size() != par.s())
    throw StructuralError("parameter vector has wrong length");
  return validate_independence(
      [&](double t, std::size_t piece) { return par.jac_p(t, t_f, piece); }, par.s(),
      par.t0(), t_f, par.breaks(t_f), quad_nodes);
}

} // namespace dshoot
