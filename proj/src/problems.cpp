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

#include "dshoot/problems.hpp"

#include <cmath>

#include "dshoot/errors.hpp"

namespace dshoot {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v)
    out[i++] = x;
  return out;
}

constexpr double kGravity = 10.0;

} // namespace

BuiltinProblem make_example1() {
  BuiltinProblem b;
  OcpProblem &p = b.prob;
  p.name = "example1";
  p.n = 2;
  p.m = 1;
  p.q = 2;
  p.t0 = 0.0;
  p.x0 = vec({1.0, 1.0});
  p.fixed_tf = 2.0;
  p.f = [](const Vector &x, const Vector &u, double) { return vec({x[1], u[0]}); };
  p.f_x = [](const Vector &, const Vector &, double) {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 1) = 1.0;
    return a;
  };
  p.f_u = [](const Vector &, const Vector &, double) { return Matrix(vec({0.0, 1.0})); };
  p.L = [](const Vector &, const Vector &u, double) { return 0.5 * u[0] * u[0]; };
  p.L_x = [](const Vector &, const Vector &, double) { return Vector(Vector::Zero(2)); };
  p.L_u = [](const Vector &, const Vector &u, double) { return Vector(u); };
  p.phi = [](const Vector &, double) { return 0.0; };
  p.phi_x = [](const Vector &, double) { return Vector(Vector::Zero(2)); };
  p.phi_t = [](const Vector &, double) { return 0.0; };
  p.g = [](const Vector &x, double) { return Vector(x); };
  p.g_x = [](const Vector &, double) { return Matrix(Matrix::Identity(2, 2)); };
  p.g_t = [](const Vector &, double) { return Vector(Vector::Zero(2)); };

  b.gains = Gains::scalar(1, 2, 0.1, 0.1, 0.1);
  b.cases = {{"cubic", {BasisKind::global_polynomial, 3}, Form::form1}};

  AnalyticOracle o;
  o.u_hat = [](double t) { return vec({3.0 * t - 3.5}); };
  o.x_hat = [](double t) {
    return vec({0.5 * t * t * t - 1.75 * t * t + t + 1.0, 1.5 * t * t - 3.5 * t + 1.0});
  };
  o.lam_hat = [](double t) { return vec({3.0, 3.5 - 3.0 * t}); };
  o.pi_hat = vec({3.0, -2.5});
  o.J_hat = 3.25;
  o.tf_hat = 2.0;
  b.oracle = o;
  return b;
}

BuiltinProblem make_example2() {
  BuiltinProblem b;
  OcpProblem &p = b.prob;
  p.name = "brachistochrone";
  p.n = 3;
  p.m = 1;
  p.q = 2;
  p.t0 = 0.0;
  p.x0 = Vector::Zero(3);
  p.f = [](const Vector &x, const Vector &u, double) {
    const double v = x[2];
    return vec({v * std::sin(u[0]), -v * std::cos(u[0]), kGravity * std::cos(u[0])});
  };
  p.f_x = [](const Vector &, const Vector &u, double) {
    Matrix a = Matrix::Zero(3, 3);
    a(0, 2) = std::sin(u[0]);
    a(1, 2) = -std::cos(u[0]);
    return a;
  };
  p.f_u = [](const Vector &x, const Vector &u, double) {
    const double v = x[2];
    return Matrix(vec({v * std::cos(u[0]), v * std::sin(u[0]), -kGravity * std::sin(u[0])}));
  };
  p.L = [](const Vector &, const Vector &, double) { return 0.0; };
  p.L_x = [](const Vector &, const Vector &, double) { return Vector(Vector::Zero(3)); };
  p.L_u = [](const Vector &, const Vector &, double) { return Vector(Vector::Zero(1)); };
  p.phi = [](const Vector &, double tf) { return tf; };
  p.phi_x = [](const Vector &, double) { return Vector(Vector::Zero(3)); };
  p.phi_t = [](const Vector &, double) { return 1.0; };
  p.g = [](const Vector &x, double) { return vec({x[0] - 2.0, x[1] + 2.0}); };
  p.g_x = [](const Vector &, double) {
    Matrix gx = Matrix::Zero(2, 3);
    gx(0, 0) = 1.0;
    gx(1, 1) = 1.0;
    return gx;
  };
  p.g_t = [](const Vector &, double) { return Vector(Vector::Zero(2)); };

  b.gains = Gains::scalar(1, 2, 0.1, 0.1, 0.1);
  b.cases = {
      {"case1_polynomial", {BasisKind::global_polynomial, 4}, Form::form1},
      {"case2_lagrange", {BasisKind::lagrange_nodes, 4}, Form::form2},
      {"case3_piecewise_linear", {BasisKind::piecewise_linear, 20}, Form::form2},
      {"case4_piecewise_constant", {BasisKind::piecewise_constant, 20}, Form::form2},
  };

  ReferenceValues r;
  r.tf = 0.8165;
  r.pi = vec({-0.1477, 0.0564});
  r.pi_step = vec({-0.1469, 0.0589});
  r.p_case1 = vec({0.0, 1.4771, 0.0, 0.0, 0.0});
  r.tf_straight_line = std::sqrt(0.8);
  b.reference = r;
  return b;
}

BuiltinProblem make_example1_corrupted() {
  BuiltinProblem b = make_example1();
  b.prob.name = "example1_corrupted_fx";
  b.prob.f_x = [](const Vector &, const Vector &, double) { return Matrix(Matrix::Zero(2, 2)); };
  b.oracle.reset();
  return b;
}

BuiltinProblem make_problem(const std::string &name) {
  if (name == "example1")
    return make_example1();
  if (name == "brachistochrone")
    return make_example2();
  if (name == "example1_corrupted_fx")
    return make_example1_corrupted();
  throw ConfigurationError("unknown problem '" + name + "'");
}

std::vector<std::string> list_problems() {
  return {"example1", "brachistochrone", "example1_corrupted_fx"};
}

AnalyticErrors example1_analytic_report(const std::function<Vector(double)> &u,
                                        const std::function<Vector(double)> &x,
                                        const std::function<Vector(double)> &lam,
                                        const Vector &pi, double J, int samples) {
  const AnalyticOracle o = *make_example1().oracle;
  AnalyticErrors e;
  for (int i = 0; i < samples; ++i) {
    const double t = o.tf_hat * i / (samples - 1);
    e.u_sup = std::max(e.u_sup, (u(t) - o.u_hat(t)).cwiseAbs().maxCoeff());
    e.x_sup = std::max(e.x_sup, (x(t) - o.x_hat(t)).cwiseAbs().maxCoeff());
    e.lam_sup = std::max(e.lam_sup, (lam(t) - o.lam_hat(t)).cwiseAbs().maxCoeff());
  }
  e.pi_err = (pi - o.pi_hat).cwiseAbs().maxCoeff();
  e.J_err = std::abs(J - o.J_hat);
  return e;
}

AnalyticErrors example1_analytic_report(const Parameterization &par, const SolveResult &result,
                                        int samples) {
  const BuiltinProblem ex = make_example1();
  const AdjointBundle &b = result.final_eval.bundle;
  const CostateTrajectory lam = reconstruct_costate(ex.prob, b, result.report.pi_final);
  const Vector p = result.report.p_final;
  const double tf = result.report.tf_final;
  return example1_analytic_report([&](double t) { return par.eval(t, p, tf); },
                                  [&](double t) { return b.x_traj(t); },
                                  [&](double t) { return lam.lam_traj(t); },
                                  result.report.pi_final, result.report.J_final, samples);
}

} // namespace dshoot
