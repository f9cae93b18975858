#include "switchflow/graph.hpp"

#include "switchflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <queue>
#include <sstream>

namespace switchflow {

double WeightProfile::at(double t) const {
  double w = base;
  for (const auto& h : harmonics) w += h.amplitude * std::sin(h.frequency * t + h.phase);
  return w;
}

double WeightProfile::lower_bound() const {
  double w = base;
  for (const auto& h : harmonics) w -= (h.frequency == 0.0 ? -h.amplitude * std::sin(h.phase)
                                                           : std::abs(h.amplitude));
  return w;
}

double WeightProfile::upper_bound() const {
  double w = base;
  for (const auto& h : harmonics) w += (h.frequency == 0.0 ? h.amplitude * std::sin(h.phase)
                                                           : std::abs(h.amplitude));
  return w;
}

bool WeightProfile::is_identically_zero() const {
  return lower_bound() == 0.0 && upper_bound() == 0.0;
}

WeightedGraph::WeightedGraph(std::size_t agents, std::vector<Edge> edges,
                             std::optional<WeightBounds> bounds)
    : agents_(agents), bounds_(bounds) {
  if (bounds_ && !(bounds_->lower > 0 && bounds_->lower <= bounds_->upper)) {
    fail(ErrorKind::InvalidArgument, "weight bounds must satisfy 0 < a_* <= a^*");
  }
  std::map<std::pair<std::size_t, std::size_t>, bool> seen;
  for (auto& e : edges) {
    if (e.i >= agents || e.j >= agents) {
      fail(ErrorKind::InvalidArgument, "edge index out of range");
    }
    if (e.i == e.j) fail(ErrorKind::InvalidArgument, "self loops are not allowed (a_ii = 0)");
    if (e.i > e.j) std::swap(e.i, e.j);
    if (!seen.emplace(std::pair{e.i, e.j}, true).second) {
      fail(ErrorKind::InvalidArgument, "edge {" + std::to_string(e.i) + "," +
                                           std::to_string(e.j) + "} listed twice");
    }
    if (e.weight.lower_bound() < 0) {
      fail(ErrorKind::InvalidArgument, "edge weights must be nonnegative");
    }
    if (e.weight.is_identically_zero()) continue;
    if (bounds_ && (e.weight.lower_bound() < bounds_->lower - 1e-15 ||
                    e.weight.upper_bound() > bounds_->upper + 1e-15)) {
      fail(ErrorKind::InvalidArgument, "edge {" + std::to_string(e.i) + "," +
                                           std::to_string(e.j) +
                                           "} weight leaves the declared bounds");
    }
    edges_.push_back(std::move(e));
  }
}

WeightedGraph WeightedGraph::from_matrix(const Matrix& weights) {
  if (weights.rows() != weights.cols()) fail(ErrorKind::InvalidArgument, "weights not square");
  const auto k = static_cast<std::size_t>(weights.rows());
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < k; ++i) {
    if (weights(i, i) != 0) fail(ErrorKind::InvalidArgument, "weights must have zero diagonal");
    for (std::size_t j = i + 1; j < k; ++j) {
      if (weights(i, j) != weights(j, i)) {
        fail(ErrorKind::InvalidArgument, "weights must be symmetric");
      }
      if (weights(i, j) != 0) edges.push_back({i, j, WeightProfile::constant(weights(i, j))});
    }
  }
  return WeightedGraph(k, std::move(edges));
}

bool WeightedGraph::is_time_varying() const {
  return std::any_of(edges_.begin(), edges_.end(),
                     [](const Edge& e) { return !e.weight.is_constant(); });
}

WeightBounds WeightedGraph::weight_bounds() const {
  if (bounds_) return *bounds_;
  WeightBounds b{std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& e : edges_) {
    b.lower = std::min(b.lower, e.weight.lower_bound());
    b.upper = std::max(b.upper, e.weight.upper_bound());
  }
  if (edges_.empty()) b.lower = 0.0;
  return b;
}

Matrix WeightedGraph::weights(double t) const {
  const auto k = static_cast<Eigen::Index>(agents_);
  Matrix A = Matrix::Zero(k, k);
  for (const auto& e : edges_) {
    const double w = e.weight.at(t);
    A(e.i, e.j) = w;
    A(e.j, e.i) = w;
  }
  return A;
}

Matrix WeightedGraph::laplacian(double t) const {
  const Matrix A = weights(t);
  Matrix L = -A;
  L.diagonal() = A.rowwise().sum();
  return L;
}

std::vector<std::vector<std::size_t>> WeightedGraph::components() const {
  std::vector<std::vector<std::size_t>> adjacency(agents_);
  for (const auto& e : edges_) {
    adjacency[e.i].push_back(e.j);
    adjacency[e.j].push_back(e.i);
  }
  std::vector<bool> visited(agents_, false);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < agents_; ++start) {
    if (visited[start]) continue;
    std::vector<std::size_t> component;
    std::queue<std::size_t> frontier;
    frontier.push(start);
    visited[start] = true;
    while (!frontier.empty()) {
      const auto v = frontier.front();
      frontier.pop();
      component.push_back(v);
      for (auto w : adjacency[v]) {
        if (!visited[w]) {
          visited[w] = true;
          frontier.push(w);
        }
      }
    }
    std::sort(component.begin(), component.end());
    out.push_back(std::move(component));
  }
  return out;
}

WeightedGraph read_edge_list(std::istream& in, std::size_t agents) {
  std::map<std::pair<std::size_t, std::size_t>, double> directed;
  std::string line;
  std::size_t line_no = 0;
  std::size_t max_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    long long i = 0;
    long long j = 0;
    double w = 0.0;
    if (!(fields >> i)) continue;
    std::string rest;
    if (!(fields >> j >> w) || (fields >> rest) || i < 0 || j < 0) {
      fail(ErrorKind::InvalidArgument, "edge list line " + std::to_string(line_no) +
                                           ": expected \"i j w\"");
    }
    const auto key = std::pair{static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
    if (!directed.emplace(key, w).second) {
      fail(ErrorKind::InvalidArgument,
           "edge list line " + std::to_string(line_no) + ": duplicate edge");
    }
    max_index = std::max({max_index, key.first, key.second});
  }
  std::vector<Edge> edges;
  for (const auto& [key, w] : directed) {
    const auto [i, j] = key;
    if (auto rev = directed.find({j, i}); rev != directed.end()) {
      if (rev->second != w) {
        fail(ErrorKind::InvalidArgument, "edge list is not symmetric at {" + std::to_string(i) +
                                             "," + std::to_string(j) + "}");
      }
      if (j < i) continue;  // already taken from the other direction
    }
    edges.push_back({i, j, WeightProfile::constant(w)});
  }
  const std::size_t k = agents > 0 ? agents : (directed.empty() ? 0 : max_index + 1);
  return WeightedGraph(k, std::move(edges));
}

WeightedGraph read_edge_list_file(const std::string& path, std::size_t agents) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidArgument, "cannot open edge list " + path);
  return read_edge_list(in, agents);
}

bool union_connected(std::span<const WeightedGraph> graphs) {
  if (graphs.empty()) fail(ErrorKind::InvalidArgument, "no graphs given");
  const auto k = graphs.front().agents();
  std::vector<Edge> all;
  std::map<std::pair<std::size_t, std::size_t>, bool> seen;
  for (const auto& g : graphs) {
    if (g.agents() != k) fail(ErrorKind::LayoutMismatch, "graphs differ in agent count");
    for (const auto& e : g.edges()) {
      if (seen.emplace(std::pair{e.i, e.j}, true).second) {
        all.push_back({e.i, e.j, WeightProfile::constant(1.0)});
      }
    }
  }
  return WeightedGraph(k, std::move(all)).connected();
}

}  // namespace switchflow
