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

#include "dshoot/quadrature.hpp"

#include <cmath>

#include "dshoot/errors.hpp"

namespace dshoot {

QuadratureRule QuadratureRule::composite_simpson(double t0, double t1, int node_count,
                                                 std::span<const double> breaks) {
  if (node_count < 3)
    throw ConfigurationError("quadrature needs at least 3 nodes");
  if (!(t1 > t0))
    throw DomainError("quadrature interval must have positive length");

  std::vector<double> edges{t0};
  for (double b : breaks) {
    if (b > edges.back() && b < t1)
      edges.push_back(b);
  }
  edges.push_back(t1);
  const std::size_t pieces = edges.size() - 1;

  const int total_intervals = node_count - 1;
  int per_piece = static_cast<int>(
      std::ceil(static_cast<double>(total_intervals) / (2.0 * static_cast<double>(pieces))));
  per_piece = 2 * std::max(per_piece, 1);

  std::vector<QuadratureNode> nodes;
  nodes.reserve(pieces * static_cast<std::size_t>(per_piece + 1));
  for (std::size_t j = 0; j < pieces; ++j) {
    const double a = edges[j], b = edges[j + 1];
    const double h = (b - a) / per_piece;
    for (int i = 0; i <= per_piece; ++i) {
      const double w = (i == 0 || i == per_piece) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      const double t = i == per_piece ? b : a + i * h;
      nodes.push_back({t, w * h / 3.0, j});
    }
  }
  return QuadratureRule(std::move(nodes));
}

QuadratureRule QuadratureRule::single_point(double t, double weight, std::size_t piece) {
  return QuadratureRule({{t, weight, piece}});
}

} // namespace dshoot
