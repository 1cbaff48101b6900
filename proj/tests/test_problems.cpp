#include <cmath>

#include <gtest/gtest.h>

#include "dshoot/errors.hpp"
#include "dshoot/problems.hpp"
#include "test_util.hpp"

using namespace dshoot;
using dshoot::testing::vec;

namespace {

OdeSettings inner_ode() {
  OdeSettings o;
  o.rel_tol = 1e-9;
  o.abs_tol = 1e-11;
  return o;
}

} // namespace

TEST(Example1, OracleValues) {
  const BuiltinProblem ex = make_example1();
  ASSERT_TRUE(ex.oracle);
  const AnalyticOracle &o = *ex.oracle;
  EXPECT_DOUBLE_EQ(o.u_hat(0.0)[0], -3.5);
  EXPECT_NEAR(o.x_hat(2.0).norm(), 0.0, 1e-14);
  EXPECT_EQ(o.x_hat(0.0), ex.prob.x0);
  EXPECT_EQ(o.pi_hat, vec({3.0, -2.5}));
  EXPECT_EQ(o.lam_hat(0.0), vec({3.0, 3.5}));
  EXPECT_DOUBLE_EQ(o.J_hat, 3.25);
  EXPECT_EQ(o.tf_hat, 2.0);
  EXPECT_EQ(ex.prob.fixed_tf, 2.0);
  EXPECT_EQ(ex.prob.n, 2);
  EXPECT_EQ(ex.prob.m, 1);
  EXPECT_EQ(ex.prob.q, 2);
}

TEST(Example1, OracleCostIsIntegralOfControlSquared) {
  // 1/2 int_0^2 (3t - 3.5)^2 dt by Simpson, exact for quadratics.
  const AnalyticOracle o = *make_example1().oracle;
  const auto h = [&](double t) { return 0.5 * std::pow(o.u_hat(t)[0], 2); };
  EXPECT_NEAR((2.0 / 6.0) * (h(0.0) + 4.0 * h(1.0) + h(2.0)), o.J_hat, 1e-14);
}

TEST(Example1, OracleSelfConsistency) {
  const BuiltinProblem ex = make_example1();
  const AnalyticOracle &o = *ex.oracle;
  for (int k = 0; k <= 40; ++k) {
    const double t = 2.0 * k / 40.0;
    // Hamiltonian stationarity: u + lambda_2 = 0.
    EXPECT_NEAR(o.u_hat(t)[0] + o.lam_hat(t)[1], 0.0, 1e-12);
  }
  // x_hat solves the dynamics under u_hat.
  const StateSolution s = simulate(ex.prob, ControlSignal(o.u_hat), 2.0, inner_ode());
  for (double t : {0.3, 1.1, 2.0})
    EXPECT_LT((s.x(t) - o.x_hat(t)).norm(), 1e-8);
  EXPECT_NEAR(s.running_cost_total, o.J_hat, 1e-8);
}

TEST(Example1, ReportOracleAgainstItself) {
  const AnalyticOracle o = *make_example1().oracle;
  const AnalyticErrors e = example1_analytic_report(o.u_hat, o.x_hat, o.lam_hat, o.pi_hat, o.J_hat);
  EXPECT_EQ(e.u_sup, 0.0);
  EXPECT_EQ(e.x_sup, 0.0);
  EXPECT_EQ(e.lam_sup, 0.0);
  EXPECT_EQ(e.pi_err, 0.0);
  EXPECT_EQ(e.J_err, 0.0);
}

TEST(Example1, ReportAtZeroControl) {
  const BuiltinProblem ex = make_example1();
  const Parameterization par = make_basis(ex.cases[0].spec, 1, 0.0, ex.cases[0].form, 2.0);
  const AnalyticOracle &o = *ex.oracle;
  const Vector p = Vector::Zero(par.s());
  const AnalyticErrors e = example1_analytic_report(
      [&](double t) { return par.eval(t, p, 2.0); }, o.x_hat, o.lam_hat, o.pi_hat, o.J_hat);
  EXPECT_DOUBLE_EQ(e.u_sup, 3.5);
}

TEST(Example1, ReportForConvergedSolve) {
  const BuiltinProblem ex = make_example1();
  const Parameterization par = make_basis(ex.cases[0].spec, 1, 0.0, ex.cases[0].form, 2.0);
  const SolveResult r = solve_evolution(EvolutionMode::form1(), ex.prob, par, ex.gains,
                                        {Vector::Zero(par.s()), 2.0}, {}, OdeSettings{},
                                        inner_ode(), {});
  const AnalyticErrors e = example1_analytic_report(par, r);
  EXPECT_LE(e.u_sup, 1e-3);
  EXPECT_LE(e.x_sup, 1e-3);
  EXPECT_LE(e.lam_sup, 1e-3);
  EXPECT_LE(e.pi_err, 1e-3);
  EXPECT_LE(e.J_err, 1e-3);
}

TEST(Brachistochrone, ReferenceValues) {
  const BuiltinProblem ex = make_example2();
  ASSERT_TRUE(ex.reference);
  EXPECT_FALSE(ex.oracle);
  EXPECT_TRUE(ex.prob.tf_free());
  EXPECT_DOUBLE_EQ(ex.reference->tf, 0.8165);
  EXPECT_EQ(ex.reference->pi, vec({-0.1477, 0.0564}));
  EXPECT_EQ(ex.reference->p_case1, vec({0.0, 1.4771, 0.0, 0.0, 0.0}));
  EXPECT_NEAR(ex.reference->tf_straight_line, std::sqrt(0.8), 1e-15);
  EXPECT_GT(ex.reference->tf_straight_line, ex.reference->tf);
  ASSERT_EQ(ex.cases.size(), 4u);
}

TEST(Brachistochrone, StraightLineDescent) {
  // Constant heading pi/4 reaches (2, -2) at t = sqrt(0.8).
  const BuiltinProblem ex = make_example2();
  const double tf = std::sqrt(0.8);
  const StateSolution s = simulate(
      ex.prob, ControlSignal([](double) { return vec({M_PI / 4.0}); }), tf, inner_ode());
  EXPECT_NEAR(s.x_f[0], 2.0, 1e-8);
  EXPECT_NEAR(s.x_f[1], -2.0, 1e-8);
  EXPECT_LT(ex.prob.g(s.x_f, tf).norm(), 1e-8);
}

TEST(Brachistochrone, Case1ControlIsLinear) {
  const BuiltinProblem ex = make_example2();
  const NamedParameterization &c = ex.cases[0];
  const Parameterization par = make_basis(c.spec, 1, 0.0, c.form);
  const SolveResult r = solve_evolution(EvolutionMode::form1(), ex.prob, par, ex.gains,
                                        {Vector::Zero(par.s()), 1.0}, {}, OdeSettings{},
                                        inner_ode(), {});
  const double tf = r.report.tf_final;
  const Vector &p = r.report.p_final;
  // Chord through the endpoints of the converged control.
  const double u0 = par.eval(0.0, p, tf)[0], u1 = par.eval(tf, p, tf)[0];
  double sup = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double t = tf * k / 100.0;
    sup = std::max(sup, std::abs(par.eval(t, p, tf)[0] - (u0 + (u1 - u0) * t / tf)));
  }
  EXPECT_LE(sup, 2e-3);
  EXPECT_NEAR(p[1], ex.reference->p_case1[1], 2e-3);
}

TEST(Registry, NamesResolve) {
  for (const std::string &name : list_problems())
    EXPECT_EQ(make_problem(name).prob.name, name);
  EXPECT_THROW(make_problem("rocket"), ConfigurationError);
}

TEST(Registry, CorruptedProblemFailsValidation) {
  const BuiltinProblem ex = make_example1_corrupted();
  EXPECT_THROW(validate_problem(ex.prob, 5), DerivativeMismatchError);
  EXPECT_NO_THROW(validate_problem(make_example1().prob, 5));
}
