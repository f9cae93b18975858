#include "switchflow/integrator.hpp"

#include "switchflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace switchflow {
namespace {

const ModeDescriptor& mode_for(std::span<const ModeDescriptor> modes, int q) {
  if (q < 1 || static_cast<std::size_t>(q) > modes.size()) {
    fail(ErrorKind::InvalidArgument,
         "signal selects mode " + std::to_string(q) + " of " + std::to_string(modes.size()));
  }
  return modes[static_cast<std::size_t>(q - 1)];
}

bool diverged(const Vector& x, double bound) { return !x.allFinite() || x.norm() > bound; }

}  // namespace

Vector step(const ModeDescriptor& mode, SchemeKind kind, double h, const Vector& x, double t) {
  if (!(h > 0)) fail(ErrorKind::InvalidArgument, "step must be positive");
  if (!contains(mode.constraint, x)) {
    fail(ErrorKind::PointOutsideSet, "step started outside the mode's constraint set");
  }
  if (kind == SchemeKind::ProximalEuler) return prox(mode.restricted(), h, x, t);
  const Vector g = min_norm_point(mode.objective->subdifferential(x, t));
  return project(mode.constraint, Vector(x - h * g));
}

std::vector<double> time_grid(const SwitchingSignal& signal, double horizon, double h) {
  if (!(h > 0) || !(horizon >= 0)) fail(ErrorKind::InvalidArgument, "need h > 0, horizon >= 0");
  std::vector<double> fixed = signal.switch_times(horizon);
  if (fixed.empty() || fixed.back() != horizon) fixed.push_back(horizon);
  const double snap = 1e-6 * h;
  std::vector<double> grid{0.0};
  std::size_t next_fixed = 0;
  for (long long j = 1;; ++j) {
    const double t = static_cast<double>(j) * h;
    while (next_fixed < fixed.size() && fixed[next_fixed] <= t + snap) {
      if (fixed[next_fixed] > grid.back()) grid.push_back(fixed[next_fixed]);
      ++next_fixed;
    }
    if (t >= horizon - snap) break;
    if (t > grid.back() + snap && (next_fixed >= fixed.size() || t < fixed[next_fixed] - snap)) {
      grid.push_back(t);
    }
  }
  while (next_fixed < fixed.size()) {
    if (fixed[next_fixed] > grid.back()) grid.push_back(fixed[next_fixed]);
    ++next_fixed;
  }
  return grid;
}

Trajectory simulate(std::span<const ModeDescriptor> modes, const SwitchingSignal& signal,
                    const StateVector& x0, double horizon, const StepScheme& scheme,
                    const SimulationOptions& options) {
  if (modes.empty()) fail(ErrorKind::InvalidArgument, "no modes");
  Trajectory traj;
  traj.layout = x0.layout();
  const int q0 = signal.mode_at(0.0);
  const auto& first = mode_for(modes, q0);
  if (first.objective->dim() != x0.size()) {
    fail(ErrorKind::LayoutMismatch, "initial condition size differs from the modes' dimension");
  }
  if (!contains(first.constraint, x0.values())) {
    fail(ErrorKind::InitialConditionOutsideSet, "x0 is not in C_sigma(0)");
  }
  const auto grid = time_grid(signal, horizon, scheme.h);
  traj.times.reserve(grid.size());
  traj.states.reserve(grid.size());
  traj.modes.reserve(grid.size());
  traj.times.push_back(0.0);
  traj.states.push_back(x0.values());
  traj.modes.push_back(q0);

  Vector x = x0.values();
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    const double t = grid[j];
    const int q = traj.modes.back();
    x = step(mode_for(modes, q), scheme.kind, grid[j + 1] - t, x, t);
    const double t_next = grid[j + 1];
    const int q_next = signal.mode_at(t_next);
    if (diverged(x, options.divergence_bound)) {
      traj.times.push_back(t_next);
      traj.states.push_back(x);
      traj.modes.push_back(q_next);
      traj.termination = {TerminationKind::Diverged, t_next, q_next};
      return traj;
    }
    if (q_next != q) {
      const auto& incoming = mode_for(modes, q_next);
      if (!contains(incoming.constraint, x)) {
        if (options.policy == SwitchPolicy::Terminate) {
          traj.times.push_back(t_next);
          traj.states.push_back(x);
          traj.modes.push_back(q_next);
          traj.termination = {TerminationKind::LeftConstraint, t_next, q_next};
          return traj;
        }
        x = project(incoming.constraint, x);
        ++traj.reprojections;
      }
    }
    traj.times.push_back(t_next);
    traj.states.push_back(x);
    traj.modes.push_back(q_next);
  }
  traj.termination = {TerminationKind::Completed, traj.times.back(), traj.modes.back()};
  return traj;
}

MonotoneMap linear_map(const Matrix& A, std::string name) {
  return {[A](const Vector& x) -> Vector { return A * x; }, Vector::Zero(A.cols()),
          std::move(name)};
}

MonotoneMap subgradient_map(std::shared_ptr<const ConvexFunction> f, Vector zero,
                            std::string name) {
  return {[f](const Vector& x) { return min_norm_point(f->subdifferential(x, 0.0)); },
          std::move(zero), std::move(name)};
}

double monotonicity_probe(const MonotoneMap& map, std::size_t pairs, std::uint64_t seed,
                          double radius) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-radius, radius);
  const auto n = map.zero.size();
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < pairs; ++s) {
    Vector x(n);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = map.zero[i] + coord(rng);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = map.zero[i] + coord(rng);
    worst = std::min(worst, (map.apply(x) - map.apply(y)).dot(x - y));
  }
  return worst;
}

Trajectory simulate_monotone(std::span<const MonotoneMap> maps, const SwitchingSignal& signal,
                             const Vector& x0, double horizon, double h, double divergence_bound) {
  if (maps.empty()) fail(ErrorKind::InvalidArgument, "no maps");
  auto map_for = [&](int q) -> const MonotoneMap& {
    if (q < 1 || static_cast<std::size_t>(q) > maps.size()) {
      fail(ErrorKind::InvalidArgument, "signal selects a map that does not exist");
    }
    return maps[static_cast<std::size_t>(q - 1)];
  };
  Trajectory traj;
  traj.layout = Layout{1, static_cast<std::size_t>(x0.size())};
  const auto grid = time_grid(signal, horizon, h);
  traj.times.reserve(grid.size());
  traj.states.reserve(grid.size());
  traj.modes.reserve(grid.size());
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  traj.modes.push_back(signal.mode_at(0.0));
  Vector x = x0;
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    x = x - (grid[j + 1] - grid[j]) * map_for(traj.modes.back()).apply(x);
    traj.times.push_back(grid[j + 1]);
    traj.states.push_back(x);
    traj.modes.push_back(signal.mode_at(grid[j + 1]));
    if (diverged(x, divergence_bound)) {
      traj.termination = {TerminationKind::Diverged, grid[j + 1], traj.modes.back()};
      return traj;
    }
  }
  traj.termination = {TerminationKind::Completed, traj.times.back(), traj.modes.back()};
  return traj;
}

std::vector<double> pairwise_distance_series(const Trajectory& a, const Trajectory& b) {
  if (a.times != b.times || a.modes != b.modes) {
    fail(ErrorKind::GridMismatch, "trajectories do not share a grid and signal");
  }
  std::vector<double> out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = (a.states[j] - b.states[j]).norm();
  return out;
}

}  // namespace switchflow
