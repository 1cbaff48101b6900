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

// dshoot: batch front end for the direct-shooting solver.
//
//   dshoot solve --config FILE [--config FILE ...] [--out DIR] [--jobs N]
//   dshoot check --config FILE --what gradients|projection|all [--out DIR]
//   dshoot list-problems

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "dshoot/app.hpp"

namespace fs = std::filesystem;
using namespace dshoot;

namespace {

int run_batch(const std::vector<std::string> &configs, const std::optional<fs::path> &out,
              int jobs) {
  if (configs.size() == 1)
    return app::solve_file(configs.front(), out);
  // Several configs share --out: each gets a subdirectory named after it.
  std::vector<int> codes(configs.size(), 0);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      std::optional<fs::path> dir;
      if (out)
        dir = *out / fs::path(configs[i]).stem();
      codes[i] = app::solve_file(configs[i], dir);
    }
  };
  std::vector<std::thread> pool;
  const int n = std::clamp(jobs, 1, static_cast<int>(configs.size()));
  for (int i = 0; i < n; ++i)
    pool.emplace_back(worker);
  for (auto &t : pool)
    t.join();
  return *std::max_element(codes.begin(), codes.end());
}

} // namespace

int main(int argc, char **argv) {
  CLI::App cli{"Direct-shooting optimal control solver"};
  cli.require_subcommand(1);

  std::vector<std::string> solve_configs;
  std::string out_dir;
  int jobs = 1;
  auto *solve = cli.add_subcommand("solve", "Solve one or more configurations");
  solve->add_option("--config", solve_configs, "Run configuration (JSON)")->required();
  solve->add_option("--out", out_dir, "Output directory (overrides out_dir)");
  solve->add_option("--jobs", jobs, "Concurrent solves when several configs are given")
      ->check(CLI::PositiveNumber);

  std::string check_config, what = "all";
  auto *check = cli.add_subcommand("check", "Run derivative and projection checks");
  check->add_option("--config", check_config, "Run configuration (JSON)")->required();
  check->add_option("--what", what, "gradients, projection or all");
  check->add_option("--out", out_dir, "Output directory (overrides out_dir)");

  auto *list = cli.add_subcommand("list-problems", "List built-in problems");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : app::kExitConfig;
  }

  const std::optional<fs::path> out =
      out_dir.empty() ? std::nullopt : std::optional<fs::path>(out_dir);
  if (*solve)
    return run_batch(solve_configs, out, jobs);
  if (*check)
    return app::check_file(check_config, what, out);
  if (*list) {
    for (const std::string &name : list_problems()) {
      const BuiltinProblem b = make_problem(name);
      std::cout << name;
      for (const auto &c : b.cases)
        std::cout << ' ' << c.name;
      std::cout << '\n';
    }
  }
  return 0;
}
