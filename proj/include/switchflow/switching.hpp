#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace switchflow {

// Piecewise-constant σ : [0, ∞) → {1, ..., p}, equal to modes[j] on
// [breakpoints[j], breakpoints[j+1]); the last mode persists forever.
class SwitchingSignal {
 public:
  // breakpoints[0] must be 0 and the sequence strictly increasing; modes >= 1.
  // Consecutive repeated modes are merged.
  SwitchingSignal(std::vector<double> breakpoints, std::vector<int> modes);
  static SwitchingSignal constant(int mode);

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<int>& modes() const { return modes_; }
  int max_mode() const;

  // Right-continuous.
  int mode_at(double t) const;
  // Switch instants in (0, horizon].
  std::vector<double> switch_times(double horizon) const;

  // This signal on [0, at), then `tail` shifted to start at `at`.
  SwitchingSignal spliced(double at, const SwitchingSignal& tail) const;
  // This signal on [0, at), then `tail_mode` forever.
  SwitchingSignal truncated(double at, int tail_mode) const;

  bool operator==(const SwitchingSignal&) const = default;

 private:
  std::vector<double> breakpoints_;
  std::vector<int> modes_;
};

// 1, 2, ..., p, 1, 2, ... with constant dwell; breakpoints cover [0, horizon).
SwitchingSignal make_round_robin(int modes, double dwell, double horizon);

// Uniform dwells in [dwell_min, dwell_max]; the first mode is uniform on
// {1..p} and every later mode uniform on the p-1 modes other than the current
// one (for p >= 2), so no interval merges.
SwitchingSignal make_random_dwell(int modes, double dwell_min, double dwell_max, double horizon,
                                  std::uint64_t seed);

// Repeats `pattern` (offset within the period, mode) every `period`.
SwitchingSignal make_periodic(const std::vector<std::pair<double, int>>& pattern, double period,
                              double horizon);

struct ModeMeasure {
  double horizon = 0.0;
  std::vector<double> measure;  // μ(T_q ∩ [0, T]), index q-1
  std::vector<double> recent;   // μ(T_q ∩ [T/2, T])
  std::vector<int> q_infinity;  // modes with recent > 0
  // min_q μ_q / T, and whether every mode keeps recurring.
  double growth_rate = 0.0;
  bool recurrent = false;

  double total() const;
};

// `mode_count` = 0 uses the largest mode appearing in the signal.
ModeMeasure measures(const SwitchingSignal& signal, double horizon, int mode_count = 0);

}  // namespace switchflow
