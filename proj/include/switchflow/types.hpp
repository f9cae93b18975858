#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace switchflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Agent layout of a state: k agents of dimension m each.
struct Layout {
  std::size_t agents = 1;
  std::size_t dim = 1;

  std::size_t size() const { return agents * dim; }
  bool operator==(const Layout&) const = default;
};

// Point of R^n carrying its agent layout (n = k * m).
class StateVector {
 public:
  StateVector() = default;
  StateVector(Vector values, Layout layout);
  // Single-agent layout of dimension values.size().
  explicit StateVector(Vector values);

  const Vector& values() const { return values_; }
  Vector& values() { return values_; }
  const Layout& layout() const { return layout_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  auto block(std::size_t agent) const {
    return values_.segment(static_cast<Eigen::Index>(agent * layout_.dim),
                           static_cast<Eigen::Index>(layout_.dim));
  }
  auto block(std::size_t agent) {
    return values_.segment(static_cast<Eigen::Index>(agent * layout_.dim),
                           static_cast<Eigen::Index>(layout_.dim));
  }

  // Mean of the agent blocks.
  Vector agent_mean() const;

 private:
  Vector values_;
  Layout layout_;
};

Vector to_vector(const std::vector<double>& values);
std::vector<double> to_std(const Vector& values);

// Relative membership tolerance used throughout: 1e-8 * (1 + |x|).
inline double membership_tolerance(const Vector& x) { return 1e-8 * (1.0 + x.norm()); }

}  // namespace switchflow
