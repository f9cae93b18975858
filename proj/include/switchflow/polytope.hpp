#pragma once

#include "switchflow/types.hpp"

#include <vector>

namespace switchflow {

// V-representation of a subdifferential at a query point: ∂f(x) = conv(generators).
struct SubdifferentialPolytope {
  std::vector<Vector> generators;

  std::size_t dim() const {
    return generators.empty() ? 0 : static_cast<std::size_t>(generators.front().size());
  }
};

struct MinNormPoint {
  Vector point;
  Vector weights;  // convex weights over the generators
  int iterations = 0;
  bool used_fallback = false;
};

// Wolfe's minimum-norm-point algorithm with a projected-gradient fallback on
// the simplex weights if the active-set loop cycles numerically.
MinNormPoint solve_min_norm(const SubdifferentialPolytope& polytope);
Vector min_norm_point(const SubdifferentialPolytope& polytope);

// Euclidean projection onto the probability simplex.
Vector project_simplex(const Vector& y);

// min over generators g of v.(g - v); nonnegative iff v is the min-norm point.
double min_norm_certificate(const SubdifferentialPolytope& polytope, const Vector& v);

}  // namespace switchflow
