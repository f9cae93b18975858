#include "switchflow/error.hpp"
#include "switchflow/scenario.hpp"

#include <map>

namespace switchflow {
namespace {

// Each preset carries its expected outcomes in "diagnostics"; run() checks
// every one of them.
const std::map<std::string, const char*>& registry() {
  static const std::map<std::string, const char*> presets = {
      {"example1_p2", R"({
  "schema_version": 1,
  "name": "example1_p2",
  "description": "Quadratic consensus on a weighted 4-cycle; the limit is the initial average.",
  "agents": {"k": 4, "m": 1},
  "modes": [
    {"coupling": {"type": "p_norm", "p": 2},
     "graph": {"edges": [[0, 1, 1.0], [1, 2, 0.5], [2, 3, 2.0], [0, 3, 1.0]]}}
  ],
  "signal": {"type": "constant", "mode": 1},
  "integrator": {"scheme": "explicit", "h": 1e-3},
  "horizon": 20,
  "initial_condition": [1, -2, 3, 0.5],
  "seed": 1,
  "diagnostics": [
    {"type": "termination", "kind": "completed"},
    {"type": "lyapunov"},
    {"type": "per_mode"},
    {"type": "pair", "initial_condition": [0, 1, -1, 2]},
    {"type": "residuals", "eps": 1e-5, "require": "all"},
    {"type": "limit"},
    {"type": "consensus", "max": 1e-4},
    {"type": "limit_point", "target": "initial_average", "tol": 1e-4},
    {"type": "conservation", "rate": 1e-9}
  ],
  "output": {"csv_stride": 10}
})"},
      {"example1_p1_sign", R"({
  "schema_version": 1,
  "name": "example1_p1_sign",
  "description": "Absolute-value coupling on a 3-agent path; agents fuse in finite time.",
  "agents": {"k": 3, "m": 1},
  "modes": [
    {"coupling": {"type": "p_norm", "p": 1},
     "graph": {"edges": [[0, 1, 1.0], [1, 2, 1.0]]}}
  ],
  "signal": {"type": "constant", "mode": 1},
  "integrator": {"scheme": "proximal", "h": 1e-3},
  "horizon": 6,
  "initial_condition": [1.0, 0.25, -1.5],
  "seed": 2,
  "diagnostics": [
    {"type": "termination", "kind": "completed"},
    {"type": "lyapunov"},
    {"type": "per_mode"},
    {"type": "residuals", "eps": 1e-5, "require": "all"},
    {"type": "limit"},
    {"type": "consensus", "max": 1e-4},
    {"type": "limit_point", "target": "initial_average", "tol": 1e-4},
    {"type": "conservation", "rate": 1e-9}
  ],
  "output": {"csv_stride": 10}
})"},
      {"example2_infnorm", R"({
  "schema_version": 1,
  "name": "example2_infnorm",
  "description": "Squared max-norm coupling for 3 planar agents on a triangle.",
  "agents": {"k": 3, "m": 2},
  "modes": [
    {"coupling": {"type": "inf_norm_squared"},
     "graph": {"edges": [[0, 1, 1.0], [1, 2, 1.0], [0, 2, 1.0]]}}
  ],
  "signal": {"type": "constant", "mode": 1},
  "integrator": {"scheme": "explicit", "h": 1e-3},
  "horizon": 30,
  "initial_condition": [1, 0, -1, 2, 0.5, -1],
  "seed": 3,
  "diagnostics": [
    {"type": "termination", "kind": "completed"},
    {"type": "lyapunov"},
    {"type": "per_mode"},
    {"type": "residuals", "eps": 1e-5, "require": "all"},
    {"type": "limit"},
    {"type": "consensus", "max": 1e-4},
    {"type": "limit_point", "target": "initial_average", "tol": 1e-4},
    {"type": "conservation", "rate": 1e-9}
  ],
  "output": {"csv_stride": 10}
})"},
      {"example3_switched_quadratic", R"({
  "schema_version": 1,
  "name": "example3_switched_quadratic",
  "description": "Two single-edge quadratic modes with connected union under round-robin switching.",
  "agents": {"k": 3, "m": 1},
  "modes": [
    {"coupling": {"type": "p_norm", "p": 2}, "graph": {"edges": [[0, 1, 1.0]]}},
    {"coupling": {"type": "p_norm", "p": 2}, "graph": {"edges": [[1, 2, 1.0]]}}
  ],
  "signal": {"type": "round_robin", "dwell": 0.5},
  "integrator": {"scheme": "explicit", "h": 1e-3},
  "horizon": 100,
  "initial_condition": [1, -2, 4],
  "seed": 4,
  "diagnostics": [
    {"type": "termination", "kind": "completed"},
    {"type": "lyapunov"},
    {"type": "per_mode"},
    {"type": "pair", "initial_condition": [-1, 3, 0.5]},
    {"type": "residuals", "eps": 1e-5, "require": "all"},
    {"type": "limit"},
    {"type": "consensus", "max": 1e-4},
    {"type": "limit_point", "target": "initial_average", "tol": 1e-4},
    {"type": "conservation", "rate": 1e-9}
  ],
  "output": {"csv_stride": 50}
})"},
      {"example4_local_terms", R"({
  "schema_version": 1,
  "name": "example4_local_terms",
  "description": "Quadratic local costs sharing a center, coupled by switching single-edge graphs.",
  "agents": {"k": 3, "m": 2},
  "modes": [
    {"coupling": {"type": "p_norm", "p": 2}, "graph": {"edges": [[0, 1, 1.0]]},
     "local_terms": [
       {"type": "quadratic", "center": [0.5, -1], "weights": [1, 1]},
       {"type": "quadratic", "center": [0.5, -1], "weights": [2, 0.5]},
       {"type": "quadratic", "center": [0.5, -1], "weights": [0.5, 3]}]},
    {"coupling": {"type": "p_norm", "p": 2}, "graph": {"edges": [[1, 2, 1.0]]},
     "local_terms": [
       {"type": "quadratic", "center": [0.5, -1], "weights": [1, 1]},
       {"type": "quadratic", "center": [0.5, -1], "weights": [2, 0.5]},
       {"type": "quadratic", "center": [0.5, -1], "weights": [0.5, 3]}]}
  ],
  "signal": {"type": "round_robin", "dwell": 1.0},
  "integrator": {"scheme": "explicit", "h": 1e-3},
  "horizon": 30,
  "initial_condition": [2, 1, -1, 0, 3, -2],
  "seed": 5,
  "diagnostics": [
    {"type": "termination", "kind": "completed"},
    {"type": "lyapunov"},
    {"type": "per_mode"},
    {"type": "pair", "initial_condition": [0, 0, 1, 1, -2, 2]},
    {"type": "residuals", "eps": 1e-5, "require": "all"},
    {"type": "limit"},
    {"type": "consensus", "max": 1e-4},
    {"type": "limit_point", "target": [0.5, -1, 0.5, -1, 0.5, -1], "tol": 1e-4}
  ],
  "output": {"csv_stride": 10}
})"},
      {"example4_set_intersection", R"({
  "schema_version": 1,
  "name": "example4_set_intersection",
  "description": "Two agents with squared-distance costs to [0,2] and [1,3] agree on a point of [1,2].",
  "agents": {"k": 2, "m": 1},
  "modes": [
    {"coupling": {"type": "p_norm", "p": 2}, "graph": {"edges": [[0, 1, 1.0]]},
     "local_terms": [
       {"type": "half_squared_distance", "set": {"type": "box", "lower": [0], "upper": [2]}},
       {"type": "half_squared_distance", "set": {"type": "box", "lower": [1], "upper": [3]}}]}
  ],
  "signal": {"type": "constant", "mode": 1},
  "integrator": {"scheme": "explicit", "h": 1e-3},
  "horizon": 30,
  "initial_condition": [-2, 5],
  "seed": 6,
  "diagnostics": [
    {"type": "termination", "kind": "completed"},
    {"type": "lyapunov"},
    {"type": "per_mode"},
    {"type": "pair", "initial_condition": [4, -1]},
    {"type": "residuals", "eps": 1e-5, "require": "all"},
    {"type": "limit"},
    {"type": "consensus", "max": 1e-4},
    {"type": "limit_interval", "lower": 1, "upper": 2, "tol": 1e-5}
  ],
  "output": {"csv_stride": 10}
})"},
      {"example5_projected_boxes", R"({
  "schema_version": 1,
  "name": "example5_projected_boxes",
  "description": "Consensus with each agent confined to its own box, switching communication graphs.",
  "agents": {"k": 3, "m": 2},
  "modes": [
    {"coupling": {"type": "p_norm", "p": 2}, "graph": {"edges": [[0, 1, 1.0]]},
     "agent_constraints": [
       {"type": "box", "lower": [-1, -1], "upper": [1, 1]},
       {"type": "box", "lower": [0, -0.5], "upper": [2, 1.5]},
       {"type": "box", "lower": [0.5, -2], "upper": [3, 0.5]}]},
    {"coupling": {"type": "p_norm", "p": 2}, "graph": {"edges": [[1, 2, 1.0], [0, 2, 0.5]]},
     "agent_constraints": [
       {"type": "box", "lower": [-1, -1], "upper": [1, 1]},
       {"type": "box", "lower": [0, -0.5], "upper": [2, 1.5]},
       {"type": "box", "lower": [0.5, -2], "upper": [3, 0.5]}]}
  ],
  "signal": {"type": "round_robin", "dwell": 0.5},
  "integrator": {"scheme": "explicit", "h": 1e-3},
  "horizon": 50,
  "initial_condition": [-1, 1, 2, -0.5, 3, -2],
  "seed": 7,
  "diagnostics": [
    {"type": "termination", "kind": "completed"},
    {"type": "feasibility", "tol": 1e-6},
    {"type": "lyapunov"},
    {"type": "per_mode"},
    {"type": "pair", "initial_condition": [0, 0, 1, 1, 2, 0]},
    {"type": "residuals", "eps": 1e-5, "require": "all"},
    {"type": "limit"},
    {"type": "consensus", "max": 1e-4},
    {"type": "limit_interval", "lower": [0.5, -0.5], "upper": [1, 0.5], "tol": 1e-5}
  ],
  "output": {"csv_stride": 10}
})"},
      {"corollary_A_infty", R"({
  "schema_version": 1,
  "name": "corollary_A_infty",
  "description": "Mode 2 acts only on [0,1); the limit lies in the minimizers of mode 1 but not in consensus.",
  "agents": {"k": 3, "m": 1},
  "modes": [
    {"coupling": {"type": "p_norm", "p": 2}, "graph": {"edges": [[0, 1, 1.0]]}},
    {"coupling": {"type": "p_norm", "p": 2}, "graph": {"edges": [[1, 2, 1.0]]}}
  ],
  "signal": {"type": "explicit", "pairs": [[0, 2], [1, 1]]},
  "integrator": {"scheme": "explicit", "h": 1e-3},
  "horizon": 20,
  "initial_condition": [0, 1, 5],
  "seed": 8,
  "diagnostics": [
    {"type": "termination", "kind": "completed"},
    {"type": "lyapunov"},
    {"type": "per_mode"},
    {"type": "residuals", "name": "residuals_q_infinity", "eps": 1e-5, "require": "q_infinity"},
    {"type": "residuals", "name": "residuals_all_modes", "eps": 1e-5, "require": "all", "expect": false},
    {"type": "limit"},
    {"type": "a_infinity", "tol": 1e-4},
    {"type": "consensus", "min": 0.1},
    {"type": "conservation", "rate": 1e-9}
  ],
  "output": {"csv_stride": 10}
})"},
      {"timevarying_sin_weights", R"({
  "schema_version": 1,
  "name": "timevarying_sin_weights",
  "description": "Sinusoidally modulated weights in [0.5, 1.5] on a connected switching family.",
  "agents": {"k": 4, "m": 1},
  "modes": [
    {"coupling": {"type": "p_norm", "p": 2},
     "graph": {"edges": [
                 [0, 1, {"base": 1, "harmonics": [[0.3, 2, 0], [0.2, 0.7, 1]]}],
                 [2, 3, {"base": 1, "harmonics": [[0.3, 2, 0], [0.2, 0.7, 1]]}]],
               "bounds": [0.5, 1.5]}},
    {"coupling": {"type": "p_norm", "p": 2},
     "graph": {"edges": [[1, 2, {"base": 1, "harmonics": [[0.5, 3, 0.5]]}]],
               "bounds": [0.5, 1.5]}}
  ],
  "signal": {"type": "round_robin", "dwell": 0.5},
  "integrator": {"scheme": "explicit", "h": 1e-3},
  "horizon": 100,
  "initial_condition": [2, -1, 0.5, 3],
  "seed": 9,
  "diagnostics": [
    {"type": "termination", "kind": "completed"},
    {"type": "envelope", "probes": 10000},
    {"type": "lyapunov"},
    {"type": "per_mode"},
    {"type": "residuals", "eps": 1e-5, "require": "all"},
    {"type": "limit"},
    {"type": "consensus", "max": 1e-4},
    {"type": "limit_point", "target": "initial_average", "tol": 1e-4},
    {"type": "conservation", "rate": 1e-9}
  ],
  "output": {"csv_stride": 50}
})"},
      {"demipositive_saddle", R"({
  "schema_version": 1,
  "name": "demipositive_saddle",
  "description": "Switching between two strictly convex-concave saddle maps with the common zero 0.",
  "kind": "monotone",
  "agents": {"k": 1, "m": 2},
  "maps": [
    {"type": "linear", "name": "saddle_a", "matrix": [[2, 1], [-1, 2]]},
    {"type": "linear", "name": "saddle_b", "matrix": [[2, 2], [-2, 4]]}
  ],
  "zero": [0, 0],
  "residuals": "pairing",
  "signal": {"type": "round_robin", "dwell": 0.5},
  "integrator": {"scheme": "explicit", "h": 1e-3},
  "horizon": 20,
  "initial_condition": [1.5, -2],
  "seed": 10,
  "diagnostics": [
    {"type": "termination", "kind": "completed"},
    {"type": "monotonicity"},
    {"type": "demipositivity", "samples": 10000},
    {"type": "lyapunov"},
    {"type": "per_mode"},
    {"type": "pair", "initial_condition": [-1, 1]},
    {"type": "residuals", "eps": 1e-5, "require": "all"},
    {"type": "limit"},
    {"type": "limit_point", "target": [0, 0], "tol": 1e-4}
  ],
  "output": {"csv_stride": 10}
})"},
      {"demipositive_violation_probe", R"({
  "schema_version": 1,
  "name": "demipositive_violation_probe",
  "description": "The monotone map of x^2 + xy is not demipositive; the probe must exhibit the witness (0,1).",
  "kind": "monotone",
  "agents": {"k": 1, "m": 2},
  "maps": [
    {"type": "linear", "name": "x2_plus_xy", "matrix": [[2, 1], [-1, 0]]}
  ],
  "zero": [0, 0],
  "residuals": "pairing",
  "signal": {"type": "constant", "mode": 1},
  "integrator": {"scheme": "explicit", "h": 1e-3},
  "horizon": 20,
  "initial_condition": [1, 1],
  "seed": 11,
  "diagnostics": [
    {"type": "termination", "kind": "completed"},
    {"type": "monotonicity"},
    {"type": "demipositivity", "samples": 10000, "witness": [0, 1], "expect": false},
    {"type": "lyapunov"}
  ],
  "output": {"csv_stride": 10}
})"},
      {"counterexample_rotation", R"({
  "schema_version": 1,
  "name": "counterexample_rotation",
  "description": "Rotation with quadrant residuals: the decrease bound holds with both sides zero, yet the orbit never settles.",
  "kind": "monotone",
  "agents": {"k": 1, "m": 2},
  "maps": [
    {"type": "linear", "name": "rotation_q1", "matrix": [[0, -1], [1, 0]]},
    {"type": "linear", "name": "rotation_q2", "matrix": [[0, -1], [1, 0]]},
    {"type": "linear", "name": "rotation_q3", "matrix": [[0, -1], [1, 0]]},
    {"type": "linear", "name": "rotation_q4", "matrix": [[0, -1], [1, 0]]}
  ],
  "zero": [0, 0],
  "residuals": "quadrant",
  "signal": {"type": "explicit",
             "pairs": [[0, 4], [1.5707963267948966, 3], [3.141592653589793, 2], [4.71238898038469, 1]]},
  "integrator": {"scheme": "explicit", "h": 1e-4},
  "horizon": 6.283185307179586,
  "initial_condition": [1, 0],
  "seed": 12,
  "diagnostics": [
    {"type": "termination", "kind": "completed"},
    {"type": "lyapunov"},
    {"type": "limit", "expect": false},
    {"type": "radius", "min": 1, "max": 1.0005},
    {"type": "per_mode", "name": "per_mode_origin", "anchors": "zero"},
    {"type": "per_mode", "name": "per_mode_off_origin", "expect": false,
     "anchors": [[0.7071067811865476, 0.7071067811865476], [-0.7071067811865476, 0.7071067811865476],
                 [-0.7071067811865476, -0.7071067811865476], [0.7071067811865476, -0.7071067811865476]]},
    {"type": "residuals", "eps": 1e-5, "require": "all", "expect": false}
  ],
  "output": {"csv_stride": 100}
})"},
  };
  return presets;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : registry()) {
    (void)text;
    names.push_back(name);
  }
  return names;
}

Json preset_config(const std::string& name) {
  const auto it = registry().find(name);
  if (it == registry().end()) fail(ErrorKind::UnknownPreset, "no preset named '" + name + "'");
  return Json::parse(it->second);
}

}  // namespace switchflow
