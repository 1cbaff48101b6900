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

#ifndef DSHOOT_PROBLEMS_HPP
#define DSHOOT_PROBLEMS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dshoot/costate.hpp"
#include "dshoot/evolution.hpp"
#include "dshoot/ocp.hpp"
#include "dshoot/parameterize.hpp"

namespace dshoot {

struct NamedParameterization {
  std::string name;
  BasisSpec spec;
  Form form = Form::form1;
};

struct AnalyticOracle {
  std::function<Vector(double)> u_hat;
  std::function<Vector(double)> x_hat;
  std::function<Vector(double)> lam_hat;
  Vector pi_hat;
  double J_hat = 0.0;
  double tf_hat = 0.0;
};

/// Published reference values for problems without a closed form.
struct ReferenceValues {
  double tf = 0.0;
  Vector pi;
  /// Multiplier reported for the piecewise-constant case.
  Vector pi_step;
  Vector p_case1;
  /// Descent time along the straight chord with a constant control.
  double tf_straight_line = 0.0;
};

struct BuiltinProblem {
  OcpProblem prob;
  Gains gains;
  std::vector<NamedParameterization> cases;
  std::optional<AnalyticOracle> oracle;
  std::optional<ReferenceValues> reference;
};

/// Double integrator x1' = x2, x2' = u, J = 1/2 int u^2, from [1, 1] to
/// [0, 0] over the fixed horizon [0, 2].
BuiltinProblem make_example1();

/// Brachistochrone (x', y', V') = (V sin u, -V cos u, 10 cos u), J = t_f,
/// from rest at the origin to (x, y) = (2, -2).
BuiltinProblem make_example2();

/// Example 1 with a term missing from f_x, for exercising the checks.
BuiltinProblem make_example1_corrupted();

/// "example1", "brachistochrone" or "example1_corrupted_fx".
BuiltinProblem make_problem(const std::string &name);
std::vector<std::string> list_problems();

struct AnalyticErrors {
  double u_sup = 0.0;
  double x_sup = 0.0;
  double lam_sup = 0.0;
  double pi_err = 0.0;
  double J_err = 0.0;
};

/// Sup-norm errors of candidate trajectories against the Example 1 oracle,
/// sampled at `samples` evenly spaced times on [0, 2].
AnalyticErrors example1_analytic_report(const std::function<Vector(double)> &u,
                                        const std::function<Vector(double)> &x,
                                        const std::function<Vector(double)> &lam,
                                        const Vector &pi, double J, int samples = 201);

/// Same, for a finished solve.
AnalyticErrors example1_analytic_report(const Parameterization &par, const SolveResult &result,
                                        int samples = 201);

} // namespace dshoot

#endif // DSHOOT_PROBLEMS_HPP
