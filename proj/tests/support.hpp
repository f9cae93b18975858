#pragma once

#include "switchflow/types.hpp"

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace testing {

using switchflow::Vector;

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  Vector cube(Eigen::Index n, double r) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(-r, r);
    return v;
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline double max_abs_diff(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace testing
