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

#include "dshoot/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "dshoot/errors.hpp"

namespace dshoot {
namespace {

constexpr double kFdStep = 1e-6;

std::string describe(const Vector &v) {
  std::ostringstream os;
  os.precision(6);
  os << "[";
  for (Index i = 0; i < v.size(); ++i)
    os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

void expect_dims(const char *name, Index rows, Index cols, Index want_rows,
                 Index want_cols) {
  if (rows != want_rows || cols != want_cols) {
    std::ostringstream os;
    os << "evaluator " << name << " returned " << rows << "x" << cols << ", expected "
       << want_rows << "x" << want_cols;
    throw StructuralError(os.str());
  }
}

// Central-difference Jacobian of a vector function of a vector argument.
template <class Fn> Matrix fd_jacobian(const Fn &fn, const Vector &z) {
  const Vector f0 = fn(z);
  Matrix jac(f0.size(), z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double h = kFdStep * std::max(1.0, std::abs(z[i]));
    Vector zp = z, zm = z;
    zp[i] += h;
    zm[i] -= h;
    jac.col(i) = (fn(zp) - fn(zm)) / (2.0 * h);
  }
  return jac;
}

double rel_error(const Matrix &analytic, const Matrix &fd) {
  if (analytic.size() == 0)
    return 0.0;
  const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
  return (analytic - fd).cwiseAbs().maxCoeff() / scale;
}

} // namespace

Gains Gains::scalar(Index m, Index q, double k, double k_tf, double kg) {
  if (!(k > 0.0))
    throw ConfigurationError("gain K must be positive");
  Gains g;
  const Matrix k_inv = Matrix::Identity(m, m) / k;
  g.K_inv = [k_inv](double) { return k_inv; };
  g.k_tf = k_tf;
  g.K_g = kg * Matrix::Identity(q, q);
  return g;
}

bool is_spd(const Matrix &a) {
  if (a.rows() != a.cols())
    return false;
  if (a.size() == 0)
    return true;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    return false;
  Eigen::LLT<Matrix> llt(a);
  return llt.info() == Eigen::Success;
}

void Gains::validate(const OcpProblem &prob, double t_lo, double t_hi) const {
  if (!K_inv)
    throw ConfigurationError("gains: K_inv is not set");
  for (int i = 0; i <= 4; ++i) {
    const double t = t_lo + (t_hi - t_lo) * i / 4.0;
    const Matrix k = K_inv(t);
    if (k.rows() != prob.m || k.cols() != prob.m)
      throw ConfigurationError("gains: K has wrong dimension");
    if (!is_spd(k))
      throw ConfigurationError("gains: K is not symmetric positive definite");
  }
  if (prob.tf_free() && !(k_tf > 0.0))
    throw ConfigurationError("gains: k_tf must be positive for a free final time");
  if (K_g.rows() != prob.q || K_g.cols() != prob.q)
    throw ConfigurationError("gains: K_g has wrong dimension");
  if (!is_spd(K_g))
    throw ConfigurationError("gains: K_g is not symmetric positive definite");
  if (K_theta && !is_spd(*K_theta))
    throw ConfigurationError("gains: K_theta is not symmetric positive definite");
}

double effective_k_tf(const OcpProblem &prob, const Gains &gains) {
  return prob.tf_free() ? gains.k_tf : 0.0;
}

ControlSignal::ControlSignal(std::function<Vector(double t)> fn)
    : value([fn = std::move(fn)](double t, std::size_t) { return fn(t); }) {}

std::size_t ControlSignal::piece_at(double t) const {
  return static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), t) -
                                  breaks.begin());
}

StateSolution simulate(const OcpProblem &prob, const ControlSignal &u, double t_f,
                       const OdeSettings &ode) {
  if (!(t_f > prob.t0)) {
    std::ostringstream os;
    os << "final time " << t_f << " must exceed t0 = " << prob.t0;
    throw DomainError(os.str());
  }
  const Index n = prob.n;
  Vector y0(n + 1);
  y0 << prob.x0, 0.0;
  auto rhs_for_piece = [&](std::size_t piece) -> OdeRhs {
    return [&, piece](double t, const Vector &y) {
      const Vector x = y.head(n);
      const Vector uu = u.value(t, piece);
      Vector dy(n + 1);
      dy << prob.f(x, uu, t), prob.L(x, uu, t);
      return dy;
    };
  };
  DenseSolution sol = integrate_piecewise(rhs_for_piece, y0, {prob.t0, t_f}, u.breaks, ode);

  StateSolution out;
  Matrix sel_x = Matrix::Zero(n, n + 1);
  sel_x.leftCols(n).setIdentity();
  Matrix sel_c = Matrix::Zero(1, n + 1);
  sel_c(0, n) = 1.0;
  out.x = sol.trajectory.transformed(sel_x);
  out.running_cost = sol.trajectory.transformed(sel_c);
  out.t_f = t_f;
  out.x_f = sol.y_final.head(n);
  out.running_cost_total = sol.y_final[n];
  out.steps = sol.steps;
  return out;
}

double objective_value(const OcpProblem &prob, const ControlSignal &u, double t_f,
                       const OdeSettings &ode) {
  const StateSolution s = simulate(prob, u, t_f, ode);
  return prob.phi(s.x_f, t_f) + s.running_cost_total;
}

Vector constraint_value(const OcpProblem &prob, const ControlSignal &u, double t_f,
                        const OdeSettings &ode) {
  const StateSolution s = simulate(prob, u, t_f, ode);
  return prob.g(s.x_f, t_f);
}

void check_dimensions(const OcpProblem &prob, const Vector &x, const Vector &u, double t) {
  const Index n = prob.n, m = prob.m, q = prob.q;
  if (prob.x0.size() != n)
    throw StructuralError("x0 has wrong dimension");
  const Vector fv = prob.f(x, u, t);
  expect_dims("f", fv.size(), 1, n, 1);
  const Matrix fx = prob.f_x(x, u, t);
  expect_dims("f_x", fx.rows(), fx.cols(), n, n);
  const Matrix fu = prob.f_u(x, u, t);
  expect_dims("f_u", fu.rows(), fu.cols(), n, m);
  const Vector lx = prob.L_x(x, u, t);
  expect_dims("L_x", lx.size(), 1, n, 1);
  const Vector lu = prob.L_u(x, u, t);
  expect_dims("L_u", lu.size(), 1, m, 1);
  const Vector px = prob.phi_x(x, t);
  expect_dims("phi_x", px.size(), 1, n, 1);
  const Vector gv = prob.g(x, t);
  expect_dims("g", gv.size(), 1, q, 1);
  const Matrix gx = prob.g_x(x, t);
  expect_dims("g_x", gx.rows(), gx.cols(), q, n);
  const Vector gt = prob.g_t(x, t);
  expect_dims("g_t", gt.size(), 1, q, 1);
}

ValidationReport validate_problem(const OcpProblem &prob, int samples, std::uint64_t seed,
                                  double tol) {
  if (samples < 1)
    throw ConfigurationError("validate_problem needs at least one sample");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Index n = prob.n, m = prob.m;

  ValidationReport report;
  for (const char *name : {"f_x", "f_u", "L_x", "L_u", "phi_x", "phi_t", "g_x", "g_t"})
    report.max_rel_error[name] = 0.0;

  for (int k = 0; k < samples; ++k) {
    Vector x = prob.x0;
    for (Index i = 0; i < n; ++i)
      x[i] += unit(rng);
    Vector u(m);
    for (Index i = 0; i < m; ++i)
      u[i] = unit(rng);
    const double t = prob.t0 + 0.5 * (1.0 + unit(rng));
    const double tf = prob.fixed_tf ? *prob.fixed_tf : prob.t0 + 1.0 + 0.5 * unit(rng);
    check_dimensions(prob, x, u, t);

    const auto record = [&](const char *name, const Matrix &analytic, const Matrix &fd) {
      const double e = rel_error(analytic, fd);
      report.max_rel_error[name] = std::max(report.max_rel_error[name], e);
      if (!(e <= tol)) {
        std::ostringstream os;
        os << "derivative " << name << " disagrees with finite differences (relative error "
           << e << ") at x = " << describe(x) << ", u = " << describe(u) << ", t = " << t
           << ", t_f = " << tf;
        throw DerivativeMismatchError(os.str());
      }
    };

    record("f_x", prob.f_x(x, u, t),
           fd_jacobian([&](const Vector &z) { return prob.f(z, u, t); }, x));
    record("f_u", prob.f_u(x, u, t),
           fd_jacobian([&](const Vector &z) { return prob.f(x, z, t); }, u));
    const auto scalar_l = [&](const Vector &xx, const Vector &uu) {
      return Vector::Constant(1, prob.L(xx, uu, t));
    };
    record("L_x", prob.L_x(x, u, t).transpose(),
           fd_jacobian([&](const Vector &z) { return scalar_l(z, u); }, x));
    record("L_u", prob.L_u(x, u, t).transpose(),
           fd_jacobian([&](const Vector &z) { return scalar_l(x, z); }, u));
    record("phi_x", prob.phi_x(x, tf).transpose(),
           fd_jacobian([&](const Vector &z) { return Vector::Constant(1, prob.phi(z, tf)); }, x));
    const Vector tfv = Vector::Constant(1, tf);
    record("phi_t", Matrix::Constant(1, 1, prob.phi_t(x, tf)),
           fd_jacobian([&](const Vector &z) { return Vector::Constant(1, prob.phi(x, z[0])); },
                       tfv));
    if (prob.q > 0) {
      record("g_x", prob.g_x(x, tf),
             fd_jacobian([&](const Vector &z) { return prob.g(z, tf); }, x));
      record("g_t", prob.g_t(x, tf),
             fd_jacobian([&](const Vector &z) { return prob.g(x, z[0]); }, tfv));
    }
  }
  return report;
}

} // namespace dshoot
