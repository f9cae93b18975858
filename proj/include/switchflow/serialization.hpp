#pragma once

#include "switchflow/diagnostics.hpp"
#include "switchflow/integrator.hpp"
#include "switchflow/switching.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>

namespace switchflow {

using Json = nlohmann::json;

// Shortest round-trip decimal form.
std::string format_double(double value);

// [[t_0, q_0], [t_1, q_1], ...]
Json to_json(const SwitchingSignal& signal);
SwitchingSignal signal_from_json(const Json& pairs);

// Header "t,q,x_0,...,x_{n-1}", one row per grid node (every `stride`-th, and
// always the last).
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::size_t stride = 1);

std::string to_string(TerminationKind kind);
Json to_json(const Termination& termination);
// Termination status and grid facts for the sidecar file.
Json trajectory_summary(const Trajectory& traj);

Json to_json(const LyapunovReport& report);
Json to_json(const ResidualReport& report);
Json to_json(const NonexpansivenessReport& report);
Json to_json(const LimitEstimate& estimate);
Json to_json(const DemipositivityResult& result);
Json to_json(const EnvelopeReport& report);

}  // namespace switchflow
