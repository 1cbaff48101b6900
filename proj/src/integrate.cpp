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

#include "dshoot/integrate.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "dshoot/errors.hpp"

namespace dshoot {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                 a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Continuous output coefficients (Hairer, Norsett & Wanner).
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kAlpha = 0.17;
constexpr double kBeta = 0.04;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;

double scaled_norm(const Vector &v, const Vector &y_a, const Vector &y_b,
                   const OdeSettings &s) {
  double worst = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double scale =
        s.abs_tol + s.rel_tol * std::max(std::abs(y_a[i]), std::abs(y_b[i]));
    worst = std::max(worst, std::abs(v[i]) / scale);
  }
  return worst;
}

Vector eval_rhs(const OdeRhs &rhs, double t, const Vector &y) {
  Vector k = rhs(t, y);
  if (k.size() != y.size()) {
    std::ostringstream os;
    os << "rhs returned dimension " << k.size() << ", expected " << y.size();
    throw StructuralError(os.str());
  }
  if (!k.allFinite())
    throw DivergenceError("non-finite right-hand side", t);
  return k;
}

double initial_step(const OdeRhs &rhs, double t0, const Vector &y0,
                    const Vector &f0, double dir, double span_len,
                    const OdeSettings &s) {
  const double dn0 = scaled_norm(y0, y0, y0, s);
  const double dn1 = scaled_norm(f0, y0, y0, s);
  double h0 = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
  h0 = std::min(h0, span_len);
  const Vector y1 = y0 + dir * h0 * f0;
  const Vector f1 = eval_rhs(rhs, t0 + dir * h0, y1);
  const double dn2 = scaled_norm(f1 - f0, y0, y0, s) / h0;
  const double big = std::max(dn1, dn2);
  const double h1 = big <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                 : std::pow(0.01 / big, 1.0 / 5.0);
  return std::min({100.0 * h0, h1, span_len});
}

} // namespace

void OdeSettings::validate() const {
  if (!(rel_tol > 0.0) || !std::isfinite(rel_tol))
    throw ConfigurationError("ode rel_tol must be positive");
  if (!(abs_tol > 0.0) || !std::isfinite(abs_tol))
    throw ConfigurationError("ode abs_tol must be positive");
  if (max_steps <= 0)
    throw ConfigurationError("ode max_steps must be positive");
  if (initial_step && !(*initial_step > 0.0))
    throw ConfigurationError("ode initial_step must be positive");
  if (max_step && !(*max_step > 0.0))
    throw ConfigurationError("ode max_step must be positive");
  if (!(max_step_fraction > 0.0))
    throw ConfigurationError("ode max_step_fraction must be positive");
  if (fixed_step && !(*fixed_step > 0.0))
    throw ConfigurationError("ode fixed_step must be positive");
}

Vector DenseSegment::eval(double t) const {
  const double th = (t - t_start) / (t_end - t_start);
  const auto r = [this](int i) { return coeffs.col(i); };
  return r(0) + th * (r(1) + (1.0 - th) * (r(2) + th * (r(3) + (1.0 - th) * r(4))));
}

Vector DenseSegment::derivative(double t) const {
  const double h = t_end - t_start;
  const double th = (t - t_start) / h;
  const auto r = [this](int i) { return coeffs.col(i); };
  const Vector a = r(3) + (1.0 - th) * r(4);
  const Vector b = r(2) + th * a;
  const Vector c = r(1) + (1.0 - th) * b;
  const Vector db = a - th * r(4);
  const Vector dc = -b + (1.0 - th) * db;
  return (c + th * dc) / h;
}

DenseTrajectory::DenseTrajectory(std::vector<DenseSegment> segments,
                                 std::vector<double> grid,
                                 std::vector<Vector> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (grid_.empty() || grid_.size() != values_.size())
    throw StructuralError("dense trajectory needs matching non-empty grid and values");
  std::sort(segments.begin(), segments.end(),
            [](const DenseSegment &a, const DenseSegment &b) { return a.t_lo() < b.t_lo(); });
  segments_ = std::make_shared<const std::vector<DenseSegment>>(std::move(segments));
}

Index DenseTrajectory::dim() const {
  return values_.empty() ? 0 : values_.front().size();
}

void DenseTrajectory::check_domain(double t) const {
  if (grid_.empty())
    throw DomainError("evaluation of an empty trajectory");
  const double slack = 1e-12 * std::max(1.0, std::abs(grid_.back()));
  if (!(t >= grid_.front() - slack && t <= grid_.back() + slack)) {
    std::ostringstream os;
    os.precision(17);
    os << "t = " << t << " outside trajectory span [" << grid_.front() << ", "
       << grid_.back() << "]";
    throw DomainError(os.str());
  }
}

const DenseSegment &DenseTrajectory::segment_at(double t) const {
  const auto &segs = *segments_;
  auto it = std::upper_bound(segs.begin(), segs.end(), t,
                             [](double v, const DenseSegment &s) { return v < s.t_lo(); });
  if (it != segs.begin())
    --it;
  return *it;
}

Vector DenseTrajectory::operator()(double t) const {
  check_domain(t);
  const auto node = std::lower_bound(grid_.begin(), grid_.end(), t);
  if (node != grid_.end() && *node == t)
    return values_[static_cast<std::size_t>(node - grid_.begin())];
  if (t <= grid_.front())
    return values_.front();
  if (t >= grid_.back())
    return values_.back();
  const Vector y = segment_at(t).eval(t);
  return map_ ? Vector(*map_ * y) : y;
}

Vector DenseTrajectory::derivative(double t) const {
  check_domain(t);
  if (segments_->empty())
    return Vector::Zero(dim());
  t = std::clamp(t, grid_.front(), grid_.back());
  const Vector dy = segment_at(t).derivative(t);
  return map_ ? Vector(*map_ * dy) : dy;
}

DenseTrajectory DenseTrajectory::transformed(const Matrix &map) const {
  const Index raw_dim = map_ ? map_->cols() : dim();
  if (map.cols() != raw_dim)
    throw StructuralError("trajectory map has wrong column count");
  DenseTrajectory out;
  out.segments_ = segments_;
  out.grid_ = grid_;
  out.values_.reserve(values_.size());
  for (const auto &v : values_)
    out.values_.push_back(map * v);
  out.map_ = map_ ? Matrix(map * *map_) : map;
  return out;
}

DenseTrajectory DenseTrajectory::concatenate(const std::vector<DenseTrajectory> &parts) {
  if (parts.empty())
    throw StructuralError("nothing to concatenate");
  std::vector<DenseSegment> segments;
  std::vector<double> grid;
  std::vector<Vector> values;
  for (const auto &part : parts) {
    if (part.map_)
      throw StructuralError("cannot concatenate transformed trajectories");
    const std::size_t skip =
        (!grid.empty() && part.grid_.front() == grid.back()) ? 1 : 0;
    grid.insert(grid.end(), part.grid_.begin() + static_cast<long>(skip), part.grid_.end());
    values.insert(values.end(), part.values_.begin() + static_cast<long>(skip),
                  part.values_.end());
    segments.insert(segments.end(), part.segments_->begin(), part.segments_->end());
  }
  return DenseTrajectory(std::move(segments), std::move(grid), std::move(values));
}

DenseSolution integrate_ivp(const OdeRhs &rhs, const Vector &y0,
                            std::pair<double, double> span,
                            const OdeSettings &settings, const IvpHooks &hooks) {
  settings.validate();
  const auto [t0, t1] = span;
  if (!std::isfinite(t0) || !std::isfinite(t1))
    throw ConfigurationError("integration span must be finite");
  if (!y0.allFinite())
    throw DivergenceError("non-finite initial state", t0);

  DenseSolution sol;
  std::vector<DenseSegment> segments;
  std::vector<double> grid{t0};
  std::vector<Vector> values{y0};

  const double dir = t1 >= t0 ? 1.0 : -1.0;
  const double span_len = std::abs(t1 - t0);
  double t = t0;
  Vector y = y0;

  if (span_len == 0.0) {
    sol.trajectory = DenseTrajectory({}, grid, values);
    sol.t_reached = t0;
    sol.y_final = y0;
    return sol;
  }

  Vector k1 = eval_rhs(rhs, t, y);
  const double h_max = settings.max_step ? *settings.max_step
                                         : settings.max_step_fraction * span_len;
  double h;
  if (settings.fixed_step)
    h = std::min(*settings.fixed_step, span_len);
  else if (settings.initial_step)
    h = std::min(*settings.initial_step, span_len);
  else
    h = initial_step(rhs, t0, y0, k1, dir, span_len, settings);
  if (!settings.fixed_step)
    h = std::min(h, h_max);

  double err_prev = 1e-4;
  bool last_rejected = false;
  long attempts = 0;
  const Index n = y.size();
  Vector k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ys(n), y_new(n), err(n);

  while (dir * (t1 - t) > 0.0) {
    if (++attempts > settings.max_steps)
      throw StepBudgetError("step budget exhausted", t);
    const double remaining = std::abs(t1 - t);
    bool final_step = false;
    const double tiny = 16.0 * std::numeric_limits<double>::epsilon() *
                        std::max(1.0, std::abs(t1));
    if (h >= remaining || remaining - h <= tiny) {
      h = remaining;
      final_step = true;
    }
    if (!final_step && h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
      throw IntegrationError("step size underflow", t);

    const double hs = dir * h;
    ys = y + hs * a21 * k1;
    k2 = eval_rhs(rhs, t + c2 * hs, ys);
    ys = y + hs * (a31 * k1 + a32 * k2);
    k3 = eval_rhs(rhs, t + c3 * hs, ys);
    ys = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
    k4 = eval_rhs(rhs, t + c4 * hs, ys);
    ys = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    k5 = eval_rhs(rhs, t + c5 * hs, ys);
    ys = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    const double t_new = final_step ? t1 : t + hs;
    k6 = eval_rhs(rhs, t + hs, ys);
    y_new = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    if (!y_new.allFinite())
      throw DivergenceError("non-finite state", t_new);

    if (hooks.accept_state && !hooks.accept_state(t_new, y_new)) {
      ++sol.rejections;
      h *= 0.5;
      last_rejected = true;
      continue;
    }
    k7 = eval_rhs(rhs, t_new, y_new);
    err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = settings.fixed_step ? 0.0 : scaled_norm(err, y, y_new, settings);

    if (en > 1.0) {
      ++sol.rejections;
      h *= std::max(kMinFactor, kSafety * std::pow(en, -0.2));
      last_rejected = true;
      continue;
    }

    DenseSegment seg;
    seg.t_start = t;
    seg.t_end = t_new;
    seg.coeffs.resize(n, 5);
    seg.coeffs.col(0) = y;
    seg.coeffs.col(1) = y_new - y;
    seg.coeffs.col(2) = hs * k1 - seg.coeffs.col(1);
    seg.coeffs.col(3) = seg.coeffs.col(1) - hs * k7 - seg.coeffs.col(2);
    seg.coeffs.col(4) = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

    ++sol.steps;
    sol.final_error = en;
    t = t_new;
    y = y_new;
    k1 = k7;
    grid.push_back(t);
    values.push_back(y);
    segments.push_back(std::move(seg));

    if (hooks.on_step && !hooks.on_step(segments.back(), y))
      break;

    if (!settings.fixed_step) {
      double fac = kSafety * std::pow(std::max(en, 1e-10), -kAlpha) *
                   std::pow(err_prev, kBeta);
      fac = std::clamp(fac, kMinFactor, kMaxFactor);
      if (last_rejected)
        fac = std::min(fac, 1.0);
      h = std::min(h * fac, h_max);
      err_prev = std::max(en, 1e-4);
    }
    last_rejected = false;
  }

  sol.t_reached = t;
  sol.y_final = y;
  if (dir < 0.0) {
    std::reverse(grid.begin(), grid.end());
    std::reverse(values.begin(), values.end());
  }
  sol.trajectory = DenseTrajectory(std::move(segments), std::move(grid), std::move(values));
  return sol;
}

DenseSolution
integrate_piecewise(const std::function<OdeRhs(std::size_t piece)> &rhs_for_piece,
                    const Vector &y0, std::pair<double, double> span,
                    std::span<const double> breaks, const OdeSettings &settings) {
  const auto [t0, t1] = span;
  const double lo = std::min(t0, t1), hi = std::max(t0, t1);
  std::vector<double> edges{lo};
  for (double b : breaks) {
    if (b > edges.back() && b < hi)
      edges.push_back(b);
  }
  edges.push_back(hi);
  const std::size_t pieces = edges.size() - 1;
  const bool forward = t1 >= t0;

  std::vector<DenseSolution> parts;
  parts.reserve(pieces);
  Vector y = y0;
  for (std::size_t k = 0; k < pieces; ++k) {
    const std::size_t j = forward ? k : pieces - 1 - k;
    const double a = forward ? edges[j] : edges[j + 1];
    const double b = forward ? edges[j + 1] : edges[j];
    parts.push_back(integrate_ivp(rhs_for_piece(j), y, {a, b}, settings));
    y = parts.back().y_final;
  }
  if (parts.size() == 1)
    return std::move(parts.front());

  if (!forward)
    std::reverse(parts.begin(), parts.end());
  DenseSolution out;
  std::vector<DenseTrajectory> trajs;
  for (const auto &part : parts) {
    trajs.push_back(part.trajectory);
    out.steps += part.steps;
    out.rejections += part.rejections;
  }
  out.final_error = forward ? parts.back().final_error : parts.front().final_error;
  out.t_reached = t1;
  out.y_final = y;
  out.trajectory = DenseTrajectory::concatenate(trajs);
  return out;
}

Vector dense_eval(const DenseSolution &sol, double t) { return sol.trajectory(t); }

} // namespace dshoot
