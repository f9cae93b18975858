#include "switchflow/diagnostics.hpp"

#include "switchflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace switchflow {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAnchorTolerance = 1e-8;

void require_mode(int q, int count) {
  if (q < 1 || q > count) {
    fail(ErrorKind::InvalidArgument,
         "mode " + std::to_string(q) + " outside 1.." + std::to_string(count));
  }
}

// Velocity estimates ẋ_j = (x_{j+1} - x_j) / Δt_j.
double max_speed(const Trajectory& traj) {
  double speed = 0.0;
  for (std::size_t j = 0; j + 1 < traj.size(); ++j) {
    const double dt = traj.times[j + 1] - traj.times[j];
    speed = std::max(speed, (traj.states[j + 1] - traj.states[j]).norm() / dt);
  }
  return speed;
}

}  // namespace

SubgradientResiduals::SubgradientResiduals(std::vector<ModeDescriptor> modes,
                                           std::span<const Vector> seeds)
    : modes_(std::move(modes)) {
  residual_modes_.reserve(modes_.size());
  for (const auto& mode : modes_) {
    if (mode.objective->is_time_varying()) {
      residual_modes_.emplace_back(
          std::make_shared<const ObjectiveDescriptor>(mode.objective->envelope()),
          mode.constraint);
    } else {
      residual_modes_.push_back(mode);
    }
  }
  for (std::size_t q = 0; q < modes_.size(); ++q) {
    minimizers_.push_back(argmin_oracle(modes_[q], seeds));
    if (modes_[q].objective->is_time_varying()) {
      residual_minimizers_.push_back(argmin_oracle(residual_modes_[q], seeds));
    } else {
      residual_minimizers_.push_back(minimizers_[q]);
    }
  }
}

const MinimizerSet& SubgradientResiduals::minimizers(int q) const {
  require_mode(q, mode_count());
  return minimizers_[static_cast<std::size_t>(q - 1)];
}

const ModeDescriptor& SubgradientResiduals::mode(int q) const {
  require_mode(q, mode_count());
  return modes_[static_cast<std::size_t>(q - 1)];
}

double SubgradientResiduals::residual(int q, const Vector& x) const {
  require_mode(q, mode_count());
  const auto& mode = residual_modes_[static_cast<std::size_t>(q - 1)];
  if (!contains(mode.constraint, x)) return kInf;
  const double w = mode.objective->value(x, 0.0) -
                   residual_minimizers_[static_cast<std::size_t>(q - 1)].min_value;
  return std::max(0.0, w);
}

double SubgradientResiduals::decrease_residual(int q, const Vector& x, double t) const {
  require_mode(q, mode_count());
  const auto& mode = modes_[static_cast<std::size_t>(q - 1)];
  if (!mode.objective->is_time_varying()) return residual(q, x);
  if (!contains(mode.constraint, x)) return kInf;
  // Every a in A minimizes f_q(·, t) for all t, so min_{C_q} f_q(·, t) is
  // attained at the cached minimizer.
  const auto& mins = minimizers_[static_cast<std::size_t>(q - 1)];
  const Vector a = mins.nearest(x);
  return std::max(0.0, mode.objective->value(x, t) - mode.objective->value(a, t));
}

double SubgradientResiduals::velocity_bound(int q, const Vector& x, double t) const {
  require_mode(q, mode_count());
  const auto& mode = modes_[static_cast<std::size_t>(q - 1)];
  return min_norm_point(mode.objective->subdifferential(x, t)).norm();
}

FunctionalResiduals::FunctionalResiduals(std::vector<Residual> residuals, Velocity velocity)
    : residuals_(std::move(residuals)), velocity_(std::move(velocity)) {
  if (residuals_.empty()) fail(ErrorKind::InvalidArgument, "no residual functions");
}

double FunctionalResiduals::residual(int q, const Vector& x) const {
  require_mode(q, mode_count());
  return residuals_[static_cast<std::size_t>(q - 1)](x);
}

double FunctionalResiduals::velocity_bound(int q, const Vector& x, double) const {
  require_mode(q, mode_count());
  return velocity_(q, x).norm();
}

FunctionalResiduals quadrant_residuals(const MonotoneMap& map) {
  std::vector<FunctionalResiduals::Residual> quadrants;
  const double signs[4][2] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  for (const auto& s : signs) {
    Vector lower(2);
    Vector upper(2);
    for (int i = 0; i < 2; ++i) {
      lower[i] = s[i] > 0 ? 0.0 : -kInf;
      upper[i] = s[i] > 0 ? kInf : 0.0;
    }
    const ConvexSet quadrant = ConvexSet::box(lower, upper);
    quadrants.emplace_back([quadrant](const Vector& x) { return distance(quadrant, x); });
  }
  return FunctionalResiduals(std::move(quadrants),
                             [map](int, const Vector& x) { return map.apply(x); });
}

FunctionalResiduals pairing_residuals(std::vector<MonotoneMap> maps, Vector zero) {
  std::vector<FunctionalResiduals::Residual> pairings;
  for (const auto& map : maps) {
    pairings.emplace_back(
        [map, zero](const Vector& x) { return std::max(0.0, map.apply(x).dot(x - zero)); });
  }
  return FunctionalResiduals(
      std::move(pairings),
      [maps](int q, const Vector& x) { return maps[static_cast<std::size_t>(q - 1)].apply(x); });
}

LyapunovReport lyapunov_check(const Trajectory& traj, const Vector& anchor,
                              const ResidualModel& model) {
  for (int q = 1; q <= model.mode_count(); ++q) {
    const double w = model.residual(q, anchor);
    if (!(w <= kAnchorTolerance)) {
      fail(ErrorKind::AnchorNotInA,
           "anchor has W_" + std::to_string(q) + " = " + std::to_string(w));
    }
  }
  LyapunovReport report;
  report.anchor = anchor;
  const std::size_t n = traj.size();
  report.values.reserve(n);
  for (const auto& x : traj.states) report.values.push_back(0.5 * (x - anchor).squaredNorm());
  if (n < 2) return report;

  std::vector<double> rates(n - 1);
  std::vector<double> bounds(n - 1);
  double max_g = 0.0;
  double max_dt = 0.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double t = traj.times[j];
    const double dt = traj.times[j + 1] - t;
    const Vector& x = traj.states[j];
    const Vector d = traj.states[j + 1] - x;
    // ΔV = d.(x - a) + ½|d|², avoiding cancellation between two large V.
    rates[j] = (d.dot(x - anchor) + 0.5 * d.squaredNorm()) / dt;
    const int q = traj.modes[j];
    bounds[j] = model.decrease_residual(q, x, t);
    max_g = std::max(max_g, model.velocity_bound(q, x, t));
    max_dt = std::max(max_dt, dt);
    report.max_positive_increment = std::max(report.max_positive_increment, rates[j]);
    report.max_abs_rate = std::max(report.max_abs_rate, std::abs(rates[j]));
    report.max_residual = std::max(report.max_residual, bounds[j]);
  }
  report.lipschitz = max_speed(traj) * max_g;
  report.tolerance = report.lipschitz * max_dt;
  report.worst_violation = -kInf;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double dt = traj.times[j + 1] - traj.times[j];
    // Rounding in d.(x - a) is relative to |x - a| |d|.
    const double slack = 1e-12 * (1.0 + 2.0 * report.values[j]) / dt;
    const double excess = rates[j] + bounds[j] - report.lipschitz * dt;
    report.worst_violation = std::max(report.worst_violation, excess);
    if (!(excess <= slack)) ++report.violations;
  }
  report.passed = report.violations == 0;
  return report;
}

ResidualReport residuals(const Trajectory& traj, const ResidualModel& model, double eps,
                         std::size_t stride) {
  if (traj.size() == 0) fail(ErrorKind::InvalidArgument, "empty trajectory");
  stride = std::max<std::size_t>(stride, 1);
  ResidualReport report;
  report.eps = eps;
  const int p = model.mode_count();
  report.series.assign(static_cast<std::size_t>(p), {});
  const std::size_t last = traj.size() - 1;
  for (std::size_t j = 0;; j = std::min(j + stride, last)) {
    report.series_times.push_back(traj.times[j]);
    for (int q = 1; q <= p; ++q) {
      report.series[static_cast<std::size_t>(q - 1)].push_back(model.residual(q, traj.states[j]));
    }
    if (j == last) break;
  }
  report.limit = traj.final_state();
  for (int q = 1; q <= p; ++q) report.terminal.push_back(model.residual(q, report.limit));

  const double end = traj.times.back();
  const double half = 0.5 * end;
  std::vector<double> recent(static_cast<std::size_t>(p), 0.0);
  for (std::size_t j = 0; j + 1 < traj.size(); ++j) {
    const double lo = std::max(traj.times[j], half);
    const double hi = traj.times[j + 1];
    const int q = traj.modes[j];
    if (hi > lo && q >= 1 && q <= p) recent[static_cast<std::size_t>(q - 1)] += hi - lo;
  }
  if (traj.size() == 1 || end == 0.0) {
    const int q = traj.modes.back();
    if (q >= 1 && q <= p) recent[static_cast<std::size_t>(q - 1)] = 1.0;
  }
  report.all_modes_converged = true;
  report.q_infinity_converged = true;
  for (int q = 1; q <= p; ++q) {
    const bool ok = report.terminal[static_cast<std::size_t>(q - 1)] <= eps;
    report.all_modes_converged = report.all_modes_converged && ok;
    if (recent[static_cast<std::size_t>(q - 1)] > 0) {
      report.q_infinity.push_back(q);
      report.q_infinity_converged = report.q_infinity_converged && ok;
    }
  }
  return report;
}

namespace {

// Squared distances sq[0..m] along one run of steps with allowances
// allowance[0..m-1]: d_l² - S_l may not exceed min_{i<=l} (d_i² - S_i), where
// S_l accumulates the allowance. Returns the worst excess.
double run_excess(std::span<const double> sq, std::span<const double> allowance) {
  double best = sq[0];
  double accumulated = 0.0;
  double worst = 0.0;
  for (std::size_t l = 1; l < sq.size(); ++l) {
    accumulated += allowance[l - 1];
    const double shifted = sq[l] - accumulated;
    worst = std::max(worst, shifted - best);
    best = std::min(best, shifted);
  }
  return worst;
}

double squared_scale(const std::vector<double>& sq) {
  double scale = 0.0;
  for (double s : sq) scale = std::max(scale, s);
  return 1e-12 * (1.0 + scale);
}

}  // namespace

NonexpansivenessReport per_mode_nonexpansiveness(const Trajectory& traj,
                                                 std::span<const Vector> anchors,
                                                 const ResidualModel& model) {
  if (anchors.size() != static_cast<std::size_t>(model.mode_count())) {
    fail(ErrorKind::InvalidArgument, "need one anchor per mode");
  }
  for (int q = 1; q <= model.mode_count(); ++q) {
    const double w = model.residual(q, anchors[static_cast<std::size_t>(q - 1)]);
    if (!(w <= kAnchorTolerance)) {
      fail(ErrorKind::AnchorNotInAq,
           "anchor for mode " + std::to_string(q) + " has W = " + std::to_string(w));
    }
  }
  NonexpansivenessReport report;
  const std::size_t steps = traj.size() > 0 ? traj.size() - 1 : 0;
  std::vector<double> sq;
  std::vector<double> allowance;
  // Steps s..e-1 run mode q; nodes s..e belong to the interval.
  for (std::size_t s = 0; s < steps;) {
    const int q = traj.modes[s];
    std::size_t e = s + 1;
    while (e < steps && traj.modes[e] == q) ++e;
    const Vector& a = anchors[static_cast<std::size_t>(q - 1)];
    sq.clear();
    allowance.clear();
    for (std::size_t j = s; j <= e; ++j) sq.push_back((traj.states[j] - a).squaredNorm());
    for (std::size_t j = s; j < e; ++j) {
      const double dt = traj.times[j + 1] - traj.times[j];
      const double speed = (traj.states[j + 1] - traj.states[j]).norm() / dt;
      const double g = model.velocity_bound(q, traj.states[j], traj.times[j]);
      allowance.push_back(2.0 * g * speed * dt * dt);
    }
    const double slack = squared_scale(sq);
    const double excess = run_excess(sq, allowance);
    report.worst_violation = std::max(report.worst_violation, excess);
    report.slack = std::max(report.slack, slack);
    if (excess > slack) report.passed = false;
    ++report.intervals;
    s = e;
  }
  return report;
}

NonexpansivenessReport pair_nonexpansiveness(const Trajectory& a, const Trajectory& b,
                                             const ResidualModel& model) {
  const auto distances = pairwise_distance_series(a, b);
  NonexpansivenessReport report;
  if (distances.empty()) return report;
  std::vector<double> sq(distances.size());
  for (std::size_t j = 0; j < sq.size(); ++j) sq[j] = distances[j] * distances[j];
  std::vector<double> allowance(sq.size() - 1);
  for (std::size_t j = 0; j + 1 < a.size(); ++j) {
    const int q = a.modes[j];
    const double dt = a.times[j + 1] - a.times[j];
    const double ga = model.velocity_bound(q, a.states[j], a.times[j]);
    const double gb = model.velocity_bound(q, b.states[j], b.times[j]);
    allowance[j] = dt * dt * (ga + gb) * (ga + gb);
  }
  // Both trajectories switch together, so the comparison spans switches.
  report.slack = squared_scale(sq);
  report.worst_violation = run_excess(sq, allowance);
  report.intervals = 1;
  report.passed = report.worst_violation <= report.slack;
  return report;
}

LimitEstimate limit_detect(const Trajectory& traj, double tail_fraction, double eps) {
  if (traj.size() == 0) fail(ErrorKind::InvalidArgument, "empty trajectory");
  LimitEstimate out;
  out.limit = traj.final_state();
  const double end = traj.times.back();
  const double start = end - std::clamp(tail_fraction, 0.0, 1.0) * (end - traj.times.front());
  std::size_t first = traj.size() - 1;
  while (first > 0 && traj.times[first - 1] >= start) --first;
  double radius = 0.0;
  for (std::size_t j = first; j < traj.size(); ++j) {
    radius = std::max(radius, (traj.states[j] - out.limit).norm());
  }
  // radius <= diameter <= 2 radius
  if (2.0 * radius <= eps) {
    out.tail_diameter = 2.0 * radius;
    out.is_cauchy = true;
    return out;
  }
  if (radius > eps) {
    out.tail_diameter = radius;
    out.is_cauchy = false;
    return out;
  }
  double diameter = radius;
  for (std::size_t i = first; i < traj.size() && diameter <= eps; ++i) {
    for (std::size_t j = i + 1; j < traj.size(); ++j) {
      diameter = std::max(diameter, (traj.states[i] - traj.states[j]).norm());
      if (diameter > eps) break;
    }
  }
  out.tail_diameter = diameter;
  out.is_cauchy = diameter <= eps;
  return out;
}

namespace {

// Besides the absolute bound, v must be nearly orthogonal to x - a: near a
// zero of a linear-growth map the absolute bound alone accepts any point.
bool is_witness(const MonotoneMap& map, const Vector& anchor, const Vector& x, Vector& value) {
  value = map.apply(x);
  const double pairing = std::abs(value.dot(x - anchor));
  const double norm = value.norm();
  return pairing <= 1e-9 && norm > 1e-6 && pairing <= 1e-6 * norm * (x - anchor).norm();
}

// Descends ψ(x) = M(x).(x - a) on the sphere |x - a| = r containing the
// start point, using central differences.
Vector refine_on_sphere(const MonotoneMap& map, const Vector& anchor, Vector x) {
  const double r = (x - anchor).norm();
  if (r == 0.0) return x;
  auto psi = [&](const Vector& y) { return map.apply(y).dot(y - anchor); };
  const double fd = 1e-7 * r;
  double step = 0.1 * r;
  double value = psi(x);
  for (int it = 0; it < 200 && value > 1e-10 && step > 1e-14 * r; ++it) {
    Vector grad(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      Vector e = Vector::Zero(x.size());
      e[i] = fd;
      grad[i] = (psi(x + e) - psi(x - e)) / (2 * fd);
    }
    const Vector radial = (x - anchor) / r;
    grad -= grad.dot(radial) * radial;
    const double gnorm = grad.norm();
    if (gnorm == 0.0) break;
    Vector trial = x - step * grad / gnorm;
    trial = anchor + r * (trial - anchor) / (trial - anchor).norm();
    const double trial_value = psi(trial);
    if (trial_value < value) {
      x = trial;
      value = trial_value;
      step *= 1.5;
    } else {
      step *= 0.5;
    }
  }
  return x;
}

}  // namespace

DemipositivityResult demipositivity_probe(const MonotoneMap& map, const Vector& anchor,
                                          const DemipositivityOptions& options) {
  const double at_anchor = map.apply(anchor).norm();
  if (!(at_anchor <= kAnchorTolerance)) {
    fail(ErrorKind::AnchorNotZero, "|M(a)| = " + std::to_string(at_anchor));
  }
  DemipositivityResult result;
  Vector value;
  auto examine = [&](const Vector& x) {
    ++result.points_examined;
    if (is_witness(map, anchor, x, value)) {
      result.is_violated = true;
      result.witness = x;
      result.value = value;
      return true;
    }
    return false;
  };
  const auto n = anchor.size();
  for (double r : {1.0, 0.5, options.radius}) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (double s : {1.0, -1.0}) {
        Vector x = anchor;
        x[i] += s * r;
        if (examine(x)) return result;
      }
    }
  }
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> coord(-options.radius, options.radius);
  for (std::size_t s = 0; s < options.samples; ++s) {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = anchor[i] + coord(rng);
    if (examine(x)) return result;
    if (options.refine && examine(refine_on_sphere(map, anchor, x))) return result;
  }
  return result;
}

EnvelopeReport envelope_probe(const ObjectiveDescriptor& objective, std::size_t probes,
                              double horizon, std::uint64_t seed, double radius) {
  const ObjectiveDescriptor lower = objective.envelope();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-radius, radius);
  std::uniform_real_distribution<double> time(0.0, horizon);
  EnvelopeReport report;
  report.worst_gap = -kInf;
  const auto n = static_cast<Eigen::Index>(objective.dim());
  for (std::size_t s = 0; s < probes; ++s) {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = coord(rng);
    const double t = time(rng);
    const double f = objective.value(x, t);
    const double gap = lower.value(x, 0.0) - f;
    report.worst_gap = std::max(report.worst_gap, gap);
    if (gap > 1e-12 * (1.0 + std::abs(f))) report.passed = false;
    ++report.probes;
  }
  if (probes == 0) report.worst_gap = 0.0;
  return report;
}

}  // namespace switchflow
