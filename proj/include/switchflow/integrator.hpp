#pragma once

#include "switchflow/objective.hpp"
#include "switchflow/switching.hpp"
#include "switchflow/types.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace switchflow {

enum class SchemeKind { ExplicitProjectedSubgradient, ProximalEuler };

struct StepScheme {
  SchemeKind kind = SchemeKind::ExplicitProjectedSubgradient;
  double h = 1e-3;
};

// What happens when a switch lands the state outside the incoming C_q.
// Terminate ends the maximal solution there. ReprojectOnSwitch projects onto
// C_q and continues; that trajectory is not a solution in the strict sense.
enum class SwitchPolicy { Terminate, ReprojectOnSwitch };

enum class TerminationKind { Completed, LeftConstraint, Diverged };

struct Termination {
  TerminationKind kind = TerminationKind::Completed;
  double time = 0.0;
  int mode = 0;
};

struct Trajectory {
  Layout layout;
  std::vector<double> times;
  std::vector<Vector> states;
  // σ(t_j); drives the step leaving node j.
  std::vector<int> modes;
  Termination termination;
  std::size_t reprojections = 0;

  std::size_t size() const { return times.size(); }
  StateVector state(std::size_t j) const { return StateVector(states[j], layout); }
  const Vector& final_state() const { return states.back(); }
};

// One step from (t, x) with step h. Explicit: project(C, x - h g*), g* the
// min-norm subgradient. Proximal: prox of f^C with step h.
Vector step(const ModeDescriptor& mode, SchemeKind kind, double h, const Vector& x, double t);
inline Vector step(const ModeDescriptor& mode, const StepScheme& scheme, const Vector& x,
                   double t) {
  return step(mode, scheme.kind, scheme.h, x, t);
}

// Uniform nodes j·h refined so every switch instant in (0, horizon) and the
// horizon appear exactly once; uniform nodes within 1e-6·h of one are dropped.
std::vector<double> time_grid(const SwitchingSignal& signal, double horizon, double h);

struct SimulationOptions {
  SwitchPolicy policy = SwitchPolicy::Terminate;
  double divergence_bound = 1e9;
};

// ẋ ∈ -M_σ(t)(x), modes indexed by σ's values 1..p. Throws
// InitialConditionOutsideSet when x0 ∉ C_σ(0).
Trajectory simulate(std::span<const ModeDescriptor> modes, const SwitchingSignal& signal,
                    const StateVector& x0, double horizon, const StepScheme& scheme,
                    const SimulationOptions& options = {});

// Single-valued evaluation of a monotone mapping on query points.
struct MonotoneMap {
  std::function<Vector(const Vector&)> apply;
  Vector zero;  // a sample of M^{-1}(0)
  std::string name;
};

MonotoneMap linear_map(const Matrix& A, std::string name = "linear");
// Min-norm selection of ∂f.
MonotoneMap subgradient_map(std::shared_ptr<const ConvexFunction> f, Vector zero,
                            std::string name = "subgradient");

// min over random pairs of (M(x) - M(y)).(x - y); >= -1e-9 for monotone maps.
double monotonicity_probe(const MonotoneMap& map, std::size_t pairs, std::uint64_t seed,
                          double radius = 2.0);

// Explicit Euler x+ = x - h M_σ(t)(x).
Trajectory simulate_monotone(std::span<const MonotoneMap> maps, const SwitchingSignal& signal,
                             const Vector& x0, double horizon, double h,
                             double divergence_bound = 1e9);

// t ↦ |φ(t) - ψ(t)| on a shared grid. Throws GridMismatch.
std::vector<double> pairwise_distance_series(const Trajectory& a, const Trajectory& b);

}  // namespace switchflow
