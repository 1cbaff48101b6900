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

#ifndef DSHOOT_QUADRATURE_HPP
#define DSHOOT_QUADRATURE_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace dshoot {

/// Node budget for the trajectory integrals of one iterate.
struct QuadratureSpec {
  int nodes = 201;
};

struct QuadratureNode {
  double t = 0.0;
  double weight = 0.0;
  /// Control piece the node belongs to; nodes on a break appear once per side.
  std::size_t piece = 0;
};

/// Weighted node set for time integrals of trajectory functionals.
class QuadratureRule {
public:
  QuadratureRule() = default;
  explicit QuadratureRule(std::vector<QuadratureNode> nodes) : nodes_(std::move(nodes)) {}

  /// Composite Simpson rule with roughly `node_count` nodes over [t0, t1],
  /// split so that no subinterval straddles an interior break. Every piece
  /// gets an even number (at least two) of subintervals.
  static QuadratureRule composite_simpson(double t0, double t1, int node_count,
                                          std::span<const double> breaks = {});

  /// Single node with the given weight; degenerates every integral to a
  /// pointwise product.
  static QuadratureRule single_point(double t, double weight = 1.0,
                                     std::size_t piece = 0);

  const std::vector<QuadratureNode> &nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

private:
  std::vector<QuadratureNode> nodes_;
};

} // namespace dshoot

#endif // DSHOOT_QUADRATURE_HPP
