#include "switchflow/serialization.hpp"

#include "switchflow/error.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace switchflow {
namespace {

Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

// JSON has no infinities; they are written as strings.
Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

Json to_json(const SwitchingSignal& signal) {
  Json out = Json::array();
  for (std::size_t j = 0; j < signal.modes().size(); ++j) {
    out.push_back(Json::array({signal.breakpoints()[j], signal.modes()[j]}));
  }
  return out;
}

SwitchingSignal signal_from_json(const Json& pairs) {
  if (!pairs.is_array() || pairs.empty()) {
    fail(ErrorKind::ConfigInvalid, "signal: expected a nonempty array of [t, q] pairs");
  }
  std::vector<double> times;
  std::vector<int> modes;
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const auto& p = pairs[j];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number_integer()) {
      fail(ErrorKind::ConfigInvalid,
           "signal[" + std::to_string(j) + "]: expected [time, integer mode]");
    }
    times.push_back(p[0].get<double>());
    modes.push_back(p[1].get<int>());
  }
  try {
    return SwitchingSignal(std::move(times), std::move(modes));
  } catch (const Error& e) {
    fail(ErrorKind::ConfigInvalid, std::string("signal: ") + e.what());
  }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::size_t stride) {
  stride = std::max<std::size_t>(stride, 1);
  out << "t,q";
  const std::size_t n = traj.layout.size();
  for (std::size_t i = 0; i < n; ++i) out << ",x_" << i;
  out << '\n';
  if (traj.size() == 0) return;
  const std::size_t last = traj.size() - 1;
  for (std::size_t j = 0;; j = std::min(j + stride, last)) {
    out << format_double(traj.times[j]) << ',' << traj.modes[j];
    for (Eigen::Index i = 0; i < traj.states[j].size(); ++i) {
      out << ',' << format_double(traj.states[j][i]);
    }
    out << '\n';
    if (j == last) break;
  }
}

std::string to_string(TerminationKind kind) {
  switch (kind) {
    case TerminationKind::Completed: return "completed";
    case TerminationKind::LeftConstraint: return "left_constraint";
    case TerminationKind::Diverged: return "diverged";
  }
  return "unknown";
}

Json to_json(const Termination& termination) {
  return {{"kind", to_string(termination.kind)},
          {"time", termination.time},
          {"mode", termination.mode}};
}

Json trajectory_summary(const Trajectory& traj) {
  Json out;
  out["termination"] = to_json(traj.termination);
  out["nodes"] = traj.size();
  out["agents"] = traj.layout.agents;
  out["agent_dim"] = traj.layout.dim;
  out["reprojections"] = traj.reprojections;
  if (traj.size() > 0) {
    out["final_time"] = traj.times.back();
    out["final_state"] = vector_json(traj.final_state());
  }
  return out;
}

Json to_json(const LyapunovReport& r) {
  return {{"passed", r.passed},
          {"anchor", vector_json(r.anchor)},
          {"initial_value", r.values.empty() ? 0.0 : r.values.front()},
          {"final_value", r.values.empty() ? 0.0 : r.values.back()},
          {"max_positive_increment", r.max_positive_increment},
          {"max_abs_rate", r.max_abs_rate},
          {"max_residual", number(r.max_residual)},
          {"lipschitz", r.lipschitz},
          {"tolerance", r.tolerance},
          {"worst_violation", number(r.worst_violation)},
          {"violations", r.violations}};
}

Json to_json(const ResidualReport& r) {
  Json terminal = Json::array();
  for (double w : r.terminal) terminal.push_back(number(w));
  return {{"eps", r.eps},
          {"terminal", terminal},
          {"q_infinity", r.q_infinity},
          {"all_modes_converged", r.all_modes_converged},
          {"q_infinity_converged", r.q_infinity_converged},
          {"limit", vector_json(r.limit)}};
}

Json to_json(const NonexpansivenessReport& r) {
  return {{"passed", r.passed},
          {"worst_violation", r.worst_violation},
          {"slack", r.slack},
          {"intervals", r.intervals}};
}

Json to_json(const LimitEstimate& e) {
  return {{"is_cauchy", e.is_cauchy}, {"tail_diameter", e.tail_diameter}, {"limit", vector_json(e.limit)}};
}

Json to_json(const DemipositivityResult& r) {
  Json out{{"is_violated", r.is_violated}, {"points_examined", r.points_examined}};
  if (r.witness) out["witness"] = vector_json(*r.witness);
  if (r.value) out["value"] = vector_json(*r.value);
  return out;
}

Json to_json(const EnvelopeReport& r) {
  return {{"passed", r.passed}, {"worst_gap", r.worst_gap}, {"probes", r.probes}};
}

}  // namespace switchflow
