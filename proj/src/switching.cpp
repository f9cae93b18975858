#include "switchflow/switching.hpp"

#include "switchflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace switchflow {
namespace {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace

SwitchingSignal::SwitchingSignal(std::vector<double> breakpoints, std::vector<int> modes) {
  if (breakpoints.empty() || breakpoints.size() != modes.size()) {
    fail(ErrorKind::InvalidArgument, "signal needs one mode per breakpoint");
  }
  if (breakpoints.front() != 0.0) fail(ErrorKind::InvalidArgument, "first breakpoint must be 0");
  for (std::size_t j = 0; j < breakpoints.size(); ++j) {
    if (!std::isfinite(breakpoints[j])) fail(ErrorKind::InvalidArgument, "breakpoint not finite");
    if (j > 0 && !(breakpoints[j] > breakpoints[j - 1])) {
      fail(ErrorKind::InvalidArgument, "breakpoints must be strictly increasing");
    }
    if (modes[j] < 1) fail(ErrorKind::InvalidArgument, "modes are numbered from 1");
    if (!modes_.empty() && modes_.back() == modes[j]) continue;
    breakpoints_.push_back(breakpoints[j]);
    modes_.push_back(modes[j]);
  }
}

SwitchingSignal SwitchingSignal::constant(int mode) { return SwitchingSignal({0.0}, {mode}); }

int SwitchingSignal::max_mode() const { return *std::max_element(modes_.begin(), modes_.end()); }

int SwitchingSignal::mode_at(double t) const {
  if (t < 0) fail(ErrorKind::InvalidArgument, "signal evaluated at negative time");
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  return modes_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

std::vector<double> SwitchingSignal::switch_times(double horizon) const {
  std::vector<double> out;
  for (std::size_t j = 1; j < breakpoints_.size() && breakpoints_[j] <= horizon; ++j) {
    out.push_back(breakpoints_[j]);
  }
  return out;
}

SwitchingSignal SwitchingSignal::spliced(double at, const SwitchingSignal& tail) const {
  if (!(at > 0)) return tail;
  std::vector<double> bps;
  std::vector<int> ms;
  for (std::size_t j = 0; j < breakpoints_.size() && breakpoints_[j] < at; ++j) {
    bps.push_back(breakpoints_[j]);
    ms.push_back(modes_[j]);
  }
  for (std::size_t j = 0; j < tail.breakpoints_.size(); ++j) {
    bps.push_back(at + tail.breakpoints_[j]);
    ms.push_back(tail.modes_[j]);
  }
  return SwitchingSignal(std::move(bps), std::move(ms));
}

SwitchingSignal SwitchingSignal::truncated(double at, int tail_mode) const {
  return spliced(at, constant(tail_mode));
}

SwitchingSignal make_round_robin(int modes, double dwell, double horizon) {
  if (modes < 1) fail(ErrorKind::InvalidArgument, "need at least one mode");
  if (!(dwell > 0)) fail(ErrorKind::InvalidArgument, "dwell must be positive");
  std::vector<double> bps;
  std::vector<int> ms;
  for (long long j = 0;; ++j) {
    const double t = static_cast<double>(j) * dwell;
    if (j > 0 && t >= horizon) break;
    bps.push_back(t);
    ms.push_back(static_cast<int>(j % modes) + 1);
    if (modes == 1) break;
  }
  return SwitchingSignal(std::move(bps), std::move(ms));
}

SwitchingSignal make_random_dwell(int modes, double dwell_min, double dwell_max, double horizon,
                                  std::uint64_t seed) {
  if (modes < 1) fail(ErrorKind::InvalidArgument, "need at least one mode");
  if (!(dwell_min > 0 && dwell_min <= dwell_max)) {
    fail(ErrorKind::InvalidArgument, "dwell range must satisfy 0 < min <= max");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dwell(dwell_min, dwell_max);
  std::uniform_int_distribution<int> first(1, modes);
  std::vector<double> bps{0.0};
  std::vector<int> ms{first(rng)};
  if (modes == 1) return SwitchingSignal(std::move(bps), std::move(ms));
  std::uniform_int_distribution<int> other(1, modes - 1);
  double t = 0.0;
  while (true) {
    t += dwell_min == dwell_max ? dwell_min : dwell(rng);
    if (t >= horizon) break;
    int next = other(rng);
    if (next >= ms.back()) ++next;
    bps.push_back(t);
    ms.push_back(next);
  }
  return SwitchingSignal(std::move(bps), std::move(ms));
}

SwitchingSignal make_periodic(const std::vector<std::pair<double, int>>& pattern, double period,
                              double horizon) {
  if (pattern.empty() || pattern.front().first != 0.0) {
    fail(ErrorKind::InvalidArgument, "periodic pattern must start at offset 0");
  }
  if (!(period > pattern.back().first)) {
    fail(ErrorKind::InvalidArgument, "period must exceed the last pattern offset");
  }
  std::vector<double> bps;
  std::vector<int> ms;
  for (long long cycle = 0;; ++cycle) {
    const double start = static_cast<double>(cycle) * period;
    if (cycle > 0 && start >= horizon) break;
    for (const auto& [offset, mode] : pattern) {
      bps.push_back(start + offset);
      ms.push_back(mode);
    }
  }
  return SwitchingSignal(std::move(bps), std::move(ms));
}

double ModeMeasure::total() const {
  CompensatedSum s;
  for (double m : measure) s.add(m);
  return s.value();
}

ModeMeasure measures(const SwitchingSignal& signal, double horizon, int mode_count) {
  if (horizon < 0) fail(ErrorKind::InvalidArgument, "horizon must be nonnegative");
  const int p = mode_count > 0 ? mode_count : signal.max_mode();
  if (signal.max_mode() > p) fail(ErrorKind::InvalidArgument, "signal uses more modes than given");
  std::vector<CompensatedSum> full(static_cast<std::size_t>(p));
  std::vector<CompensatedSum> recent(static_cast<std::size_t>(p));
  const auto& bps = signal.breakpoints();
  const auto& ms = signal.modes();
  const double half = 0.5 * horizon;
  for (std::size_t j = 0; j < bps.size() && bps[j] < horizon; ++j) {
    const double end = j + 1 < bps.size() ? std::min(bps[j + 1], horizon) : horizon;
    const auto q = static_cast<std::size_t>(ms[j] - 1);
    full[q].add(end - bps[j]);
    const double rs = std::max(bps[j], half);
    if (end > rs) recent[q].add(end - rs);
  }
  ModeMeasure out;
  out.horizon = horizon;
  out.recurrent = horizon > 0;
  out.growth_rate = horizon > 0 ? INFINITY : 0.0;
  for (int q = 0; q < p; ++q) {
    out.measure.push_back(full[static_cast<std::size_t>(q)].value());
    out.recent.push_back(recent[static_cast<std::size_t>(q)].value());
    if (out.recent.back() > 0) out.q_infinity.push_back(q + 1);
    else out.recurrent = false;
    if (horizon > 0) out.growth_rate = std::min(out.growth_rate, out.measure.back() / horizon);
  }
  return out;
}

}  // namespace switchflow
