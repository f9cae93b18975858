#pragma once

#include "switchflow/types.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace switchflow {

// a(t) = base + Σ amplitude · sin(frequency · t + phase)
struct WeightProfile {
  struct Harmonic {
    double amplitude = 0.0;
    double frequency = 0.0;
    double phase = 0.0;
  };

  double base = 0.0;
  std::vector<Harmonic> harmonics;

  static WeightProfile constant(double w) { return {w, {}}; }

  double at(double t) const;
  // Interval bounds from the coefficients.
  double lower_bound() const;
  double upper_bound() const;
  bool is_constant() const { return harmonics.empty(); }
  bool is_identically_zero() const;
};

struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  WeightProfile weight;
};

struct WeightBounds {
  double lower = 0.0;  // a_*
  double upper = 0.0;  // a^*
};

// Undirected communication graph on k agents, weights a_ij(t) = a_ji(t) >= 0.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  // Edges with i == j, repeated pairs or negative weights are rejected. Edges
  // whose profile vanishes identically are dropped. When bounds are given,
  // every edge weight must stay in [a_*, a^*] for all t.
  WeightedGraph(std::size_t agents, std::vector<Edge> edges,
                std::optional<WeightBounds> bounds = std::nullopt);

  static WeightedGraph from_matrix(const Matrix& weights);

  std::size_t agents() const { return agents_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool is_time_varying() const;
  const std::optional<WeightBounds>& declared_bounds() const { return bounds_; }
  // Declared bounds, else the coefficient-interval envelope over all edges.
  WeightBounds weight_bounds() const;

  Matrix weights(double t) const;
  // L(t) = D(t) - A(t)
  Matrix laplacian(double t) const;

  std::vector<std::vector<std::size_t>> components() const;
  bool connected() const { return components().size() <= 1; }

 private:
  std::size_t agents_ = 0;
  std::vector<Edge> edges_;
  std::optional<WeightBounds> bounds_;
};

// Edge list: one "i j w" line per edge, 0-based, '#' starts a comment. Pairs
// listed in both directions must carry equal weights. `agents` = 0 infers k
// from the largest index.
WeightedGraph read_edge_list(std::istream& in, std::size_t agents = 0);
WeightedGraph read_edge_list_file(const std::string& path, std::size_t agents = 0);

// Connectivity of the union of the graphs' edge sets.
bool union_connected(std::span<const WeightedGraph> graphs);

}  // namespace switchflow
