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

#ifndef DSHOOT_APP_HPP
#define DSHOOT_APP_HPP

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "dshoot/evolution.hpp"
#include "dshoot/problems.hpp"

namespace dshoot::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitNotConverged = 4,
  kExitCheckFailed = 5,
};

/// A parsed run configuration. Every field has a default, so "{}" is a
/// valid document (Example 1 with its first recommended basis).
struct RunConfig {
  std::string problem = "example1";
  /// Name of a recommended parameterization of the problem, if one was used.
  std::string case_name;
  EvolutionMode mode;
  BasisSpec basis;
  Form form = Form::form1;
  Gains gains;
  Vector init_p;
  double init_tf = 1.0;
  StopCriteria stop;
  OdeSettings ode_outer;
  OdeSettings ode_inner;
  QuadratureSpec quad;
  EvolutionOptions options;
  int trajectory_samples = 201;
  std::string out_dir = "out";

  BuiltinProblem builtin;
  Parameterization par;
};

/// Throws ConfigurationError whose message starts with the offending field,
/// e.g. "ode_inner.rel_tol: must be positive".
RunConfig parse_config(const nlohmann::json &doc);
RunConfig load_config(const std::filesystem::path &path);

struct SolveOutcome {
  int exit_code = kExitOk;
  SolveResult result;
};

/// Runs the solve and writes trace.csv, trajectory.csv, costates.csv and
/// report.json into `out_dir`. Solver failures propagate as exceptions.
SolveOutcome run_solve(const RunConfig &cfg, const std::filesystem::path &out_dir);

enum class CheckKind { gradients, projection, all };
CheckKind check_kind_from_string(const std::string &name);

struct CheckItem {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct CheckOutcome {
  int exit_code = kExitOk;
  std::vector<CheckItem> items;
};

/// Runs the derivative and projection oracles at the configured initial
/// point and writes checks.json into `out_dir`.
CheckOutcome run_check(const RunConfig &cfg, CheckKind what,
                       const std::filesystem::path &out_dir);

/// File-level entry points used by the command-line tool. They map every
/// failure to an exit code and print a one-line diagnostic to stderr.
int solve_file(const std::filesystem::path &config,
               const std::optional<std::filesystem::path> &out_override);
int check_file(const std::filesystem::path &config, const std::string &what,
               const std::optional<std::filesystem::path> &out_override);

/// %.17g, which round-trips every double.
std::string format_number(double v);

} // namespace dshoot::app

#endif // DSHOOT_APP_HPP
