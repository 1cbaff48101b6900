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

#include "dshoot/app.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "dshoot/costate.hpp"
#include "dshoot/errors.hpp"
#include "dshoot/projection.hpp"

namespace dshoot::app {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string &field, const std::string &msg) {
  throw ConfigurationError(field + ": " + msg);
}

// Field-level reader over one JSON object; rejects unknown keys.
class Section {
public:
  Section(const json &obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object())
      fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string &key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string &key) const {
    seen_.insert(key);
    return obj_.contains(key);
  }

  const json &at(const std::string &key) const {
    seen_.insert(key);
    return obj_.at(key);
  }

  double number(const std::string &key, double fallback) const {
    if (!has(key))
      return fallback;
    const json &v = at(key);
    if (!v.is_number())
      fail(field(key), "expected a number");
    return v.get<double>();
  }

  double positive(const std::string &key, double fallback) const {
    const double v = number(key, fallback);
    if (!(v > 0.0) || !std::isfinite(v))
      fail(field(key), "must be positive (got " + format_number(v) + ")");
    return v;
  }

  long integer(const std::string &key, long fallback) const {
    if (!has(key))
      return fallback;
    const json &v = at(key);
    if (!v.is_number_integer())
      fail(field(key), "expected an integer");
    return v.get<long>();
  }

  std::string string(const std::string &key, const std::string &fallback) const {
    if (!has(key))
      return fallback;
    const json &v = at(key);
    if (!v.is_string())
      fail(field(key), "expected a string");
    return v.get<std::string>();
  }

  std::optional<Section> child(const std::string &key) const {
    if (!has(key))
      return std::nullopt;
    return Section(at(key), field(key));
  }

  void finish() const {
    for (const auto &item : obj_.items())
      if (!seen_.count(item.key()))
        fail(field(item.key()), "unknown key");
  }

private:
  const json &obj_;
  std::string path_;
  mutable std::set<std::string> seen_;
};

Vector parse_vector(const json &v, const std::string &field) {
  if (!v.is_array())
    fail(field, "expected an array of numbers");
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      fail(field, "expected an array of numbers");
    out[static_cast<Index>(i)] = v[i].get<double>();
  }
  return out;
}

// A scalar k (meaning k * I) or a dim x dim nested array.
Matrix parse_gain(const json &v, Index dim, const std::string &field) {
  if (v.is_number()) {
    if (!(v.get<double>() > 0.0))
      fail(field, "must be positive (got " + format_number(v.get<double>()) + ")");
    return v.get<double>() * Matrix::Identity(dim, dim);
  }
  if (!v.is_array() || static_cast<Index>(v.size()) != dim)
    fail(field, "expected a number or a " + std::to_string(dim) + "x" + std::to_string(dim) +
                    " matrix");
  Matrix out(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    const Vector row = parse_vector(v[static_cast<std::size_t>(i)], field);
    if (row.size() != dim)
      fail(field, "row " + std::to_string(i) + " has wrong length");
    out.row(i) = row.transpose();
  }
  if (!is_spd(out))
    fail(field, "must be symmetric positive definite");
  return out;
}

OdeSettings parse_ode(const std::optional<Section> &sec, OdeSettings out) {
  if (!sec)
    return out;
  out.rel_tol = sec->positive("rel_tol", out.rel_tol);
  out.abs_tol = sec->positive("abs_tol", out.abs_tol);
  out.max_steps = sec->integer("max_steps", out.max_steps);
  if (out.max_steps <= 0)
    fail(sec->field("max_steps"), "must be positive");
  if (sec->has("max_step"))
    out.max_step = sec->positive("max_step", 1.0);
  sec->finish();
  return out;
}

template <class F> auto with_field(const std::string &field, F &&fn) {
  try {
    return fn();
  } catch (const ConfigurationError &e) {
    fail(field, e.what());
  }
}

std::ofstream open_out(const fs::path &path) {
  std::ofstream os(path);
  if (!os)
    throw Error("cannot write " + path.string());
  return os;
}

void write_row(std::ostream &os, const std::vector<double> &row) {
  for (std::size_t i = 0; i < row.size(); ++i)
    os << (i ? "," : "") << format_number(row[i]);
  os << '\n';
}

void append(std::vector<double> &row, const Vector &v) {
  row.insert(row.end(), v.data(), v.data() + v.size());
}

void write_header(std::ostream &os, const std::vector<std::string> &cols) {
  for (std::size_t i = 0; i < cols.size(); ++i)
    os << (i ? "," : "") << cols[i];
  os << '\n';
}

std::vector<std::string> indexed(const std::string &stem, Index n) {
  std::vector<std::string> out;
  for (Index i = 0; i < n; ++i)
    out.push_back(stem + "_" + std::to_string(i));
  return out;
}

json to_json(const Vector &v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

void write_trace(const fs::path &path, const SolveTrace &trace, Index s, Index q) {
  std::ofstream os = open_out(path);
  std::vector<std::string> cols{"tau"};
  for (const auto &c : indexed("p", s))
    cols.push_back(c);
  cols.push_back("t_f");
  for (const auto &c : indexed("pi", q))
    cols.push_back(c);
  for (const char *c : {"J", "g_norm", "residual_norm", "V"})
    cols.push_back(c);
  write_header(os, cols);
  for (const TraceRow &r : trace.rows) {
    std::vector<double> row{r.tau};
    append(row, r.p);
    row.push_back(r.t_f);
    append(row, r.pi);
    row.insert(row.end(), {r.J, r.g_norm, r.residual_norm, r.V});
    write_row(os, row);
  }
}

OptimalityResiduals final_residuals(const RunConfig &cfg, const SolveResult &r) {
  const AdjointBundle &b = r.final_eval.bundle;
  const OcpProblem &prob = cfg.builtin.prob;
  if (cfg.mode.kind == EvolutionModeKind::form2)
    return optimality_residuals(
        prob, cfg.par, assemble_form2(prob, cfg.par, b, cfg.gains, r.report.p_final, cfg.quad), b,
        r.report.pi_final, b.g, cfg.quad);
  return optimality_residuals(
      prob, cfg.par, assemble_form1(prob, cfg.par, b, cfg.gains, r.report.p_final, cfg.quad), b,
      r.report.pi_final, b.g, cfg.quad);
}

json report_json(const RunConfig &cfg, const SolveResult &r) {
  const SolveReport &rep = r.report;
  const OptimalityResiduals res = final_residuals(cfg, r);
  json j;
  j["problem"] = cfg.problem;
  j["case"] = cfg.case_name;
  j["mode"] = to_string(cfg.mode.kind);
  j["basis"] = {{"kind", to_string(cfg.basis.kind)},
                {"size", cfg.basis.size},
                {"form", to_string(cfg.form)}};
  j["p_final"] = to_json(rep.p_final);
  j["tf_final"] = rep.tf_final;
  j["pi_final"] = to_json(rep.pi_final);
  j["J_final"] = rep.J_final;
  j["residual_norm"] = rep.residual_norm;
  j["g_norm"] = rep.g_norm;
  j["converged"] = rep.converged;
  j["tau_reached"] = rep.tau_reached;
  j["wall_time"] = rep.wall_time;
  j["warnings"] = rep.warnings;
  j["optimality"] = {{"param_residual_norm", res.param_residual.norm()},
                     {"tf_residual", res.tf_residual},
                     {"continuous_residual_sup", res.continuous_residual_sup},
                     {"feasibility", res.feasibility}};
  return j;
}

void write_json(const fs::path &path, const json &j) {
  std::ofstream os = open_out(path);
  os << j.dump(2) << '\n';
}

fs::path resolve_out(const RunConfig &cfg, const std::optional<fs::path> &override_dir) {
  return override_dir ? *override_dir : fs::path(cfg.out_dir);
}

// Tightened copy of the inner settings for finite differencing.
OdeSettings fd_ode(OdeSettings ode) {
  ode.rel_tol = std::min(ode.rel_tol, 1e-11);
  ode.abs_tol = std::min(ode.abs_tol, 1e-13);
  return ode;
}

CheckItem check(const std::string &name, double value, double tol, std::string detail = {}) {
  return {name, value, tol, std::isfinite(value) && value <= tol, std::move(detail)};
}

void gradient_checks(const RunConfig &cfg, std::vector<CheckItem> &items) {
  const OcpProblem &prob = cfg.builtin.prob;
  try {
    const ValidationReport rep = validate_problem(prob, 5);
    double worst = 0.0;
    for (const auto &[k, v] : rep.max_rel_error)
      worst = std::max(worst, v);
    items.push_back(check("derivative_evaluators", worst, 1e-4));
  } catch (const DerivativeMismatchError &e) {
    items.push_back({"derivative_evaluators", 1.0, 1e-4, false, e.what()});
  }

  const OdeSettings ode = fd_ode(cfg.ode_inner);
  const double tf = prob.tf_free() ? cfg.init_tf : *prob.fixed_tf;
  const Vector &p = cfg.init_p;
  const Index s = cfg.par.s();
  const Index cols = prob.tf_free() ? s + 1 : s;
  const AdjointBundle b = evaluate_iterate(prob, cfg.par, p, tf, ode);
  const NlpGradients ng = nlp_gradients(prob, cfg.par, b, p, cfg.quad);

  Vector dJ(cols);
  Matrix dg(prob.q, cols);
  for (Index k = 0; k < cols; ++k) {
    Vector pp = p, pm = p;
    double tp = tf, tm = tf;
    double h;
    if (k < s) {
      h = 1e-5 * std::max(1.0, std::abs(p[k]));
      pp[k] += h;
      pm[k] -= h;
    } else {
      h = 1e-5 * std::max(1.0, std::abs(tf));
      tp += h;
      tm -= h;
    }
    const AdjointBundle bp = evaluate_iterate(prob, cfg.par, pp, tp, ode);
    const AdjointBundle bm = evaluate_iterate(prob, cfg.par, pm, tm, ode);
    dJ[k] = (bp.J - bm.J) / (2.0 * h);
    dg.col(k) = (bp.g - bm.g) / (2.0 * h);
  }
  const double ef = (ng.f_theta.head(cols) - dJ).cwiseAbs().maxCoeff() /
                    std::max(1.0, dJ.cwiseAbs().maxCoeff());
  items.push_back(check("f_theta_vs_finite_difference", ef, 1e-3));
  if (prob.q > 0) {
    const double eg = (ng.g_theta.leftCols(cols) - dg).cwiseAbs().maxCoeff() /
                      std::max(1.0, dg.cwiseAbs().maxCoeff());
    items.push_back(check("g_theta_vs_finite_difference", eg, 1e-3));
  }
}

void projection_checks(const RunConfig &cfg, std::vector<CheckItem> &items) {
  const OcpProblem &prob = cfg.builtin.prob;
  const double tf = prob.tf_free() ? cfg.init_tf : *prob.fixed_tf;
  const AdjointBundle b = evaluate_iterate(prob, cfg.par, cfg.init_p, tf, cfg.ode_inner);
  const InnerProductSpec spec = control_inner_product(cfg.par, cfg.gains, tf, cfg.quad);
  const BasisSet basis = control_basis(cfg.par, cfg.gains, tf);

  // Project p_u and each column of f_u^T Psi.
  std::vector<std::pair<std::string, TimeFunction>> fns;
  fns.emplace_back("p_u", [&](double t, std::size_t piece) {
    return pointwise_gradient(prob, b, t, piece).p_u;
  });
  for (Index j = 0; j < prob.q; ++j)
    fns.emplace_back("fu_psi_" + std::to_string(j), [&, j](double t, std::size_t piece) {
      return Vector(pointwise_gradient(prob, b, t, piece).fu_psi.col(j));
    });

  double idem = 0.0, ortho = 0.0, pyth = 0.0;
  for (const auto &[name, f] : fns) {
    const Projection pr = project(spec, basis, f);
    const Projection again = project(spec, basis, pr.fn);
    idem = std::max(idem, (again.coords - pr.coords).norm() / std::max(1.0, pr.coords.norm()));
    const TimeFunction resid = [&](double t, std::size_t piece) {
      return Vector(f(t, piece) - pr.fn(t, piece));
    };
    const double ff = spec.inner(f, f);
    const double scale = std::max(1.0, ff);
    for (Index i = 0; i < basis.k; ++i) {
      const TimeFunction ai = [&, i](double t, std::size_t piece) {
        return Vector(basis.A(t, piece).col(i));
      };
      ortho = std::max(ortho, std::abs(spec.inner(resid, ai)) / scale);
    }
    pyth = std::max(pyth, std::abs(ff - spec.inner(pr.fn, pr.fn) - spec.inner(resid, resid)) /
                              scale);
  }
  items.push_back(check("projection_idempotence", idem, 1e-10));
  items.push_back(check("projection_orthogonality", ortho, 1e-8));
  items.push_back(check("projection_pythagoras", pyth, 1e-8));

  // Function and coordinate residuals must be related by the Gram spectrum.
  const EvolutionRhs e = evolution_rhs(
      cfg.mode.kind == EvolutionModeKind::gradient_flow ? EvolutionMode::form1() : cfg.mode,
      prob, cfg.par, cfg.gains, {cfg.init_p, tf}, cfg.ode_inner, cfg.quad);
  const Theorem3Report rep = theorem3_check(
      spec, basis, fns.front().second,
      [&](double t, std::size_t piece) { return pointwise_gradient(prob, b, t, piece).fu_psi; },
      e.pi);
  const double c = rep.coordinate_residual_norm, fnorm = rep.function_residual_norm;
  const double lo = std::sqrt(rep.gram_lambda_min) * c, hi = std::sqrt(rep.gram_lambda_max) * c;
  const double violation =
      std::max({0.0, lo - fnorm, fnorm - hi}) / std::max(1.0, fnorm);
  items.push_back(check("residual_norm_equivalence", violation, 1e-9));
}

} // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunConfig parse_config(const json &doc) {
  const Section root(doc, "");
  RunConfig cfg;
  cfg.problem = root.string("problem", cfg.problem);
  cfg.builtin = with_field("problem", [&] { return make_problem(cfg.problem); });
  const OcpProblem &prob = cfg.builtin.prob;

  const std::string mode = root.string("mode", "form1");
  const EvolutionModeKind kind = with_field("mode", [&] { return mode_from_string(mode); });
  cfg.mode.kind = kind;

  // Parameterization: a recommended case by name, or an explicit spec.
  cfg.form = kind == EvolutionModeKind::form2 ? Form::form2 : Form::form1;
  if (cfg.builtin.cases.empty())
    fail("parameterization", "problem has no recommended parameterization");
  cfg.basis = cfg.builtin.cases.front().spec;
  cfg.case_name = cfg.builtin.cases.front().name;
  if (!root.has("parameterization") && kind == EvolutionModeKind::form2)
    for (const auto &c : cfg.builtin.cases)
      if (c.form == Form::form2) {
        cfg.basis = c.spec;
        cfg.case_name = c.name;
        break;
      }
  if (auto sec = root.child("parameterization")) {
    if (sec->has("case")) {
      const std::string name = sec->string("case", "");
      const NamedParameterization *found = nullptr;
      for (const auto &c : cfg.builtin.cases)
        if (c.name == name)
          found = &c;
      if (!found)
        fail(sec->field("case"), "unknown case '" + name + "' for problem " + cfg.problem);
      cfg.basis = found->spec;
      cfg.form = found->form;
      cfg.case_name = found->name;
    } else {
      cfg.case_name.clear();
    }
    if (sec->has("kind")) {
      const std::string k = sec->string("kind", "");
      cfg.basis.kind = with_field(sec->field("kind"), [&] { return basis_kind_from_string(k); });
      cfg.case_name.clear();
    }
    if (sec->has("size")) {
      cfg.basis.size = static_cast<int>(sec->integer("size", 0));
      cfg.case_name.clear();
    }
    if (sec->has("form")) {
      const std::string f = sec->string("form", "");
      cfg.form = with_field(sec->field("form"), [&] { return form_from_string(f); });
    }
    sec->finish();
  }
  if (kind == EvolutionModeKind::form1 && cfg.form != Form::form1)
    fail("mode", "form1 evolution needs parameterization.form = form1");
  cfg.par = with_field("parameterization", [&] {
    return make_basis(cfg.basis, prob.m, prob.t0, cfg.form, prob.fixed_tf);
  });
  const Index s = cfg.par.s();

  cfg.gains = cfg.builtin.gains;
  if (auto sec = root.child("gains")) {
    if (sec->has("K")) {
      const Matrix K = parse_gain(sec->at("K"), prob.m, sec->field("K"));
      const Matrix K_inv = K.inverse();
      cfg.gains.K_inv = [K_inv](double) { return K_inv; };
    }
    cfg.gains.k_tf = sec->positive("k_tf", cfg.gains.k_tf);
    if (sec->has("K_g"))
      cfg.gains.K_g = parse_gain(sec->at("K_g"), prob.q, sec->field("K_g"));
    if (sec->has("K_theta"))
      cfg.gains.K_theta = parse_gain(sec->at("K_theta"), prob.tf_free() ? s + 1 : s,
                                     sec->field("K_theta"));
    sec->finish();
  }
  if (kind == EvolutionModeKind::gradient_flow && !cfg.gains.K_theta)
    fail("gains.K_theta", "required by mode gradient_flow");
  cfg.mode.K_theta = cfg.gains.K_theta;

  cfg.init_p = Vector::Zero(s);
  cfg.init_tf = prob.fixed_tf ? *prob.fixed_tf : 1.0;
  if (auto sec = root.child("init")) {
    if (sec->has("p")) {
      const json &p = sec->at("p");
      if (p.is_string()) {
        if (p.get<std::string>() != "zeros")
          fail(sec->field("p"), "expected \"zeros\" or an array of numbers");
      } else {
        cfg.init_p = parse_vector(p, sec->field("p"));
        if (cfg.init_p.size() != s)
          fail(sec->field("p"), "expected " + std::to_string(s) + " entries, got " +
                                    std::to_string(cfg.init_p.size()));
      }
    }
    if (sec->has("t_f")) {
      if (prob.fixed_tf)
        fail(sec->field("t_f"), "problem has a fixed final time");
      cfg.init_tf = sec->number("t_f", cfg.init_tf);
      if (!(cfg.init_tf > prob.t0))
        fail(sec->field("t_f"), "must exceed t0 = " + format_number(prob.t0));
    }
    sec->finish();
  }

  if (auto sec = root.child("stop")) {
    cfg.stop.tau_max = sec->positive("tau_max", cfg.stop.tau_max);
    cfg.stop.tol_opt = sec->positive("tol_opt", cfg.stop.tol_opt);
    cfg.stop.tol_feas = sec->positive("tol_feas", cfg.stop.tol_feas);
    cfg.stop.record_every = sec->positive("record_every", cfg.stop.record_every);
    sec->finish();
  }

  cfg.ode_outer = parse_ode(root.child("ode_outer"), OdeSettings{});
  OdeSettings inner;
  inner.rel_tol = 1e-9;
  inner.abs_tol = 1e-11;
  cfg.ode_inner = parse_ode(root.child("ode_inner"), inner);

  if (auto sec = root.child("quad")) {
    cfg.quad.nodes = static_cast<int>(sec->integer("nodes", cfg.quad.nodes));
    if (cfg.quad.nodes < 3)
      fail(sec->field("nodes"), "must be at least 3");
    sec->finish();
  }

  cfg.options.c1 = root.positive("c1", cfg.options.c1);
  cfg.options.pi_bound = root.positive("pi_bound", cfg.options.pi_bound);
  cfg.trajectory_samples = static_cast<int>(root.integer("trajectory_samples", 201));
  if (cfg.trajectory_samples < 2)
    fail("trajectory_samples", "must be at least 2");
  cfg.out_dir = root.string("out_dir", cfg.out_dir);
  root.finish();

  with_field("gains", [&] {
    cfg.gains.validate(prob, prob.t0, cfg.init_tf);
    return 0;
  });
  return cfg;
}

RunConfig load_config(const fs::path &path) {
  std::ifstream is(path);
  if (!is)
    throw ConfigurationError(path.string() + ": cannot open");
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error &e) {
    throw ConfigurationError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

SolveOutcome run_solve(const RunConfig &cfg, const fs::path &out_dir) {
  const OcpProblem &prob = cfg.builtin.prob;
  SolveOutcome out;
  out.result = solve_evolution(cfg.mode, prob, cfg.par, cfg.gains, {cfg.init_p, cfg.init_tf},
                               cfg.stop, cfg.ode_outer, cfg.ode_inner, cfg.quad, cfg.options);
  const SolveResult &r = out.result;
  fs::create_directories(out_dir);
  write_trace(out_dir / "trace.csv", r.trace, cfg.par.s(), prob.q);

  const AdjointBundle &b = r.final_eval.bundle;
  const CostateTrajectory lam = reconstruct_costate(prob, b, r.report.pi_final);
  const double tf = r.report.tf_final;
  std::ofstream traj = open_out(out_dir / "trajectory.csv");
  std::ofstream cost = open_out(out_dir / "costates.csv");
  std::vector<std::string> cols{"t"};
  for (const auto &c : indexed("x", prob.n))
    cols.push_back(c);
  for (const auto &c : indexed("u", prob.m))
    cols.push_back(c);
  write_header(traj, cols);
  cols = {"t"};
  for (const auto &c : indexed("lambda", prob.n))
    cols.push_back(c);
  write_header(cost, cols);
  const int n = cfg.trajectory_samples;
  for (int k = 0; k < n; ++k) {
    const double t = k + 1 == n ? tf : prob.t0 + (tf - prob.t0) * k / (n - 1);
    std::vector<double> row{t};
    append(row, b.x_traj(t));
    append(row, b.control(t));
    write_row(traj, row);
    row = {t};
    append(row, lam.lam_traj(t));
    write_row(cost, row);
  }

  write_json(out_dir / "report.json", report_json(cfg, r));
  out.exit_code = r.report.converged ? kExitOk : kExitNotConverged;
  return out;
}

CheckKind check_kind_from_string(const std::string &name) {
  if (name == "gradients")
    return CheckKind::gradients;
  if (name == "projection")
    return CheckKind::projection;
  if (name == "all")
    return CheckKind::all;
  throw ConfigurationError("--what: expected gradients, projection or all (got '" + name + "')");
}

CheckOutcome run_check(const RunConfig &cfg, CheckKind what, const fs::path &out_dir) {
  CheckOutcome out;
  if (what != CheckKind::projection)
    gradient_checks(cfg, out.items);
  if (what != CheckKind::gradients)
    projection_checks(cfg, out.items);

  json items = json::array();
  bool all_passed = true;
  for (const CheckItem &c : out.items) {
    items.push_back({{"name", c.name},
                     {"value", c.value},
                     {"tolerance", c.tolerance},
                     {"passed", c.passed},
                     {"detail", c.detail}});
    all_passed = all_passed && c.passed;
  }
  fs::create_directories(out_dir);
  write_json(out_dir / "checks.json",
             {{"problem", cfg.problem}, {"checks", items}, {"passed", all_passed}});
  out.exit_code = all_passed ? kExitOk : kExitCheckFailed;
  return out;
}

int solve_file(const fs::path &config, const std::optional<fs::path> &out_override) {
  RunConfig cfg;
  try {
    cfg = load_config(config);
  } catch (const Error &e) {
    std::cerr << config.string() << ": " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const SolveOutcome o = run_solve(cfg, resolve_out(cfg, out_override));
    if (o.exit_code == kExitNotConverged)
      std::cerr << config.string() << ": not converged at tau = "
                << o.result.report.tau_reached << " (residual "
                << o.result.report.residual_norm << ", |g| " << o.result.report.g_norm
                << ")\n";
    return o.exit_code;
  } catch (const ConfigurationError &e) {
    std::cerr << config.string() << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const IntegrationError &e) {
    std::cerr << config.string() << ": solver error at tau = " << e.time() << ": " << e.what()
              << '\n';
    return kExitSolver;
  } catch (const std::exception &e) {
    std::cerr << config.string() << ": solver error: " << e.what() << '\n';
    return kExitSolver;
  }
}

int check_file(const fs::path &config, const std::string &what,
               const std::optional<fs::path> &out_override) {
  RunConfig cfg;
  CheckKind kind;
  try {
    kind = check_kind_from_string(what);
    cfg = load_config(config);
  } catch (const Error &e) {
    std::cerr << config.string() << ": " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const CheckOutcome o = run_check(cfg, kind, resolve_out(cfg, out_override));
    for (const CheckItem &c : o.items)
      if (!c.passed)
        std::cerr << "FAILED " << c.name << ": " << format_number(c.value) << " > "
                  << format_number(c.tolerance) << (c.detail.empty() ? "" : " (" + c.detail + ")")
                  << '\n';
    return o.exit_code;
  } catch (const ConfigurationError &e) {
    std::cerr << config.string() << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception &e) {
    std::cerr << config.string() << ": check error: " << e.what() << '\n';
    return kExitSolver;
  }
}

} // namespace dshoot::app
