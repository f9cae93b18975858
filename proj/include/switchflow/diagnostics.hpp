#pragma once

#include "switchflow/integrator.hpp"
#include "switchflow/objective.hpp"
#include "switchflow/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace switchflow {

// Residual functions W_q attached to a family of modes, together with the
// velocity bounds used to size discretization tolerances. Modes are 1-based.
class ResidualModel {
 public:
  virtual ~ResidualModel() = default;
  virtual int mode_count() const = 0;
  // W_q(x) >= 0, +inf off C_q.
  virtual double residual(int q, const Vector& x) const = 0;
  // The quantity bounding -dV/dt while σ = q at time t. Equals W_q for
  // time-invariant modes.
  virtual double decrease_residual(int q, const Vector& x, double t) const {
    (void)t;
    return residual(q, x);
  }
  // Norm of the velocity selection the integrator uses at (x, t).
  virtual double velocity_bound(int q, const Vector& x, double t) const = 0;
};

// W_q = f_q^{C_q} - min_{C_q} f_q for subgradient modes; minima come from
// argmin_oracle once per mode. With time-varying weights W_q is built from
// the constant-weight envelope, while the decrease bound uses f_q(·, t).
class SubgradientResiduals final : public ResidualModel {
 public:
  explicit SubgradientResiduals(std::vector<ModeDescriptor> modes,
                                std::span<const Vector> seeds = {});

  int mode_count() const override { return static_cast<int>(modes_.size()); }
  double residual(int q, const Vector& x) const override;
  double decrease_residual(int q, const Vector& x, double t) const override;
  double velocity_bound(int q, const Vector& x, double t) const override;

  const MinimizerSet& minimizers(int q) const;
  const ModeDescriptor& mode(int q) const;

 private:
  std::vector<ModeDescriptor> modes_;
  std::vector<ModeDescriptor> residual_modes_;  // envelopes, or the modes themselves
  std::vector<MinimizerSet> minimizers_;
  std::vector<MinimizerSet> residual_minimizers_;
};

// Arbitrary residuals paired with a velocity field (e.g. the rotation
// counterexample).
class FunctionalResiduals final : public ResidualModel {
 public:
  using Residual = std::function<double(const Vector&)>;
  using Velocity = std::function<Vector(int, const Vector&)>;

  FunctionalResiduals(std::vector<Residual> residuals, Velocity velocity);

  int mode_count() const override { return static_cast<int>(residuals_.size()); }
  double residual(int q, const Vector& x) const override;
  double velocity_bound(int q, const Vector& x, double t) const override;

 private:
  std::vector<Residual> residuals_;
  Velocity velocity_;
};

// W_q(x) = dist(x, q-th closed quadrant of R²) for q = 1..4, velocity from `map`.
FunctionalResiduals quadrant_residuals(const MonotoneMap& map);

// W_q(x) = M_q(x).(x - a) for monotone maps sharing the zero a.
FunctionalResiduals pairing_residuals(std::vector<MonotoneMap> maps, Vector zero);

struct LyapunovReport {
  Vector anchor;
  std::vector<double> values;       // V(φ(t_j)) = ½|φ(t_j) - a|²
  double max_positive_increment = 0.0;  // max ΔV/Δt
  double max_abs_rate = 0.0;            // max |ΔV/Δt|
  double max_residual = 0.0;            // max W_σ(t_j)(φ(t_j))
  double lipschitz = 0.0;               // L = max|ẋ| · max velocity bound
  double tolerance = 0.0;               // L · max Δt
  double worst_violation = 0.0;         // max (ΔV/Δt + W_j - L Δt_j)
  std::size_t violations = 0;
  bool passed = true;
};

// Checks ΔV/Δt <= -W_σ(t_j)(φ(t_j)) + L Δt_j on every step. The anchor must
// satisfy W_q(a) <= 1e-8 for all q (AnchorNotInA).
LyapunovReport lyapunov_check(const Trajectory& traj, const Vector& anchor,
                              const ResidualModel& model);

struct ResidualReport {
  // series[q-1][j] = W_q(φ(t_j)), sampled every `stride` nodes and always at
  // the final node.
  std::vector<std::vector<double>> series;
  std::vector<double> series_times;
  std::vector<double> terminal;
  Vector limit;
  double eps = 1e-5;
  // Modes active with positive measure on the second half of the run.
  std::vector<int> q_infinity;
  bool all_modes_converged = false;  // W_q(x̂) <= eps for every q
  bool q_infinity_converged = false; // W_q(x̂) <= eps for q in q_infinity
};

ResidualReport residuals(const Trajectory& traj, const ResidualModel& model, double eps = 1e-5,
                         std::size_t stride = 1);

struct NonexpansivenessReport {
  // Worst excess of a squared distance over its earliest-allowed value, after
  // discounting the accumulated discretization allowance.
  double worst_violation = 0.0;
  double slack = 0.0;
  std::size_t intervals = 0;
  bool passed = true;
};

// On each maximal interval with σ = q, |φ(t) - a_q| must be nonincreasing up
// to the allowance 2 |g_j| |ẋ_j| Δt_j² accumulated on squared distances.
// anchors[q-1] must satisfy W_q(a_q) <= 1e-8 (AnchorNotInAq).
NonexpansivenessReport per_mode_nonexpansiveness(const Trajectory& traj,
                                                 std::span<const Vector> anchors,
                                                 const ResidualModel& model);

// |φ(t) - ψ(t)| nonincreasing for two trajectories on the same grid and
// signal, up to the allowance Δt_j² (G_φ + G_ψ)² per step.
NonexpansivenessReport pair_nonexpansiveness(const Trajectory& a, const Trajectory& b,
                                             const ResidualModel& model);

struct LimitEstimate {
  Vector limit;
  double tail_diameter = 0.0;  // exact when it decides the outcome, else a bound
  bool is_cauchy = false;
};

LimitEstimate limit_detect(const Trajectory& traj, double tail_fraction = 0.2, double eps = 1e-5);

struct DemipositivityOptions {
  std::size_t samples = 10000;
  std::uint64_t seed = 0xde1d;
  double radius = 2.0;
  // Locally minimize M(x).(x-a)/|x-a| on spheres around a from each sample.
  bool refine = false;
};

struct DemipositivityResult {
  bool is_violated = false;
  std::optional<Vector> witness;
  std::optional<Vector> value;  // M(witness)
  std::size_t points_examined = 0;
};

// Searches for x with |M(x).(x-a)| <= 1e-9 while |M(x)| > 1e-6, and with
// M(x) within 1e-6 (cosine) of orthogonal to x - a. Refutes
// demipositivity when it finds one; finding none certifies nothing. Probes
// the axis points a ± r e_i (r = 1, 0.5, radius) before random samples.
// Throws AnchorNotZero when |M(a)| > 1e-8.
DemipositivityResult demipositivity_probe(const MonotoneMap& map, const Vector& anchor,
                                          const DemipositivityOptions& options = {});

struct EnvelopeReport {
  double worst_gap = 0.0;  // max over probes of g(x) - f(x, t)
  std::size_t probes = 0;
  bool passed = true;
};

// g = objective.envelope() must satisfy g(x) <= f(x, t) for all x and t.
EnvelopeReport envelope_probe(const ObjectiveDescriptor& objective, std::size_t probes,
                              double horizon, std::uint64_t seed, double radius = 3.0);

}  // namespace switchflow
