#include "doctest.h"
#include "support.hpp"

#include "switchflow/error.hpp"
#include "switchflow/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

using namespace switchflow;
using testing::vec;

namespace {

const Layout kTwo{2, 1};

std::shared_ptr<const ObjectiveDescriptor> pair_quadratic(WeightProfile w = WeightProfile::constant(1)) {
  return std::make_shared<const ObjectiveDescriptor>(kTwo, PNormCoupling{2, true},
                                                     WeightedGraph(2, {{0, 1, w}}));
}

std::vector<ModeDescriptor> single(std::shared_ptr<const ObjectiveDescriptor> f,
                                   std::optional<ConvexSet> c = std::nullopt) {
  return {ModeDescriptor(std::move(f), std::move(c))};
}

// x_1 - x_2 = e^{-2t} d_0 with conserved sum.
Vector two_agent_exact(const Vector& x0, double t) {
  const double mean = 0.5 * (x0[0] + x0[1]);
  const double half_gap = 0.5 * (x0[0] - x0[1]) * std::exp(-2 * t);
  return vec({mean + half_gap, mean - half_gap});
}

MonotoneMap rotation() {
  Matrix R(2, 2);
  R << 0, -1, 1, 0;
  return linear_map(R, "rotation");
}

}  // namespace

TEST_SUITE("integrator") {

TEST_CASE("step examples") {
  const ModeDescriptor quad(pair_quadratic());
  const Vector x = step(quad, StepScheme{SchemeKind::ExplicitProjectedSubgradient, 0.1}, vec({1, 0}), 0.0);
  CHECK(testing::max_abs_diff(x, vec({0.9, 0.1})) < 1e-15);
  for (auto kind : {SchemeKind::ExplicitProjectedSubgradient, SchemeKind::ProximalEuler}) {
    CHECK(testing::max_abs_diff(step(quad, kind, 0.3, vec({0.4, 0.4}), 0.0), vec({0.4, 0.4})) < 1e-14);
  }
  const ModeDescriptor idle(std::make_shared<const ObjectiveDescriptor>(Layout{1, 1}, NoCoupling{},
                                                                         WeightedGraph(1, {})),
                            ConvexSet::box(vec({0}), vec({1})));
  for (auto kind : {SchemeKind::ExplicitProjectedSubgradient, SchemeKind::ProximalEuler}) {
    for (double h : {1e-3, 1.0, 100.0}) CHECK(step(idle, kind, h, vec({0.5}), 0.0)[0] == 0.5);
  }
  CHECK_THROWS_AS(step(idle, SchemeKind::ExplicitProjectedSubgradient, 0.1, vec({2}), 0.0), Error);
  CHECK_THROWS_AS(step(idle, SchemeKind::ExplicitProjectedSubgradient, 0.0, vec({0.5}), 0.0), Error);
}

TEST_CASE("two-agent closed form") {
  const auto modes = single(pair_quadratic());
  const auto traj = simulate(modes, SwitchingSignal::constant(1), StateVector(vec({1, 0}), kTwo), 5.0,
                             StepScheme{});
  CHECK(traj.termination.kind == TerminationKind::Completed);
  CHECK(traj.times.back() == 5.0);
  CHECK(testing::max_abs_diff(traj.final_state(), two_agent_exact(vec({1, 0}), 5.0)) <= 2e-3);
}

TEST_CASE("explicit scheme is first order") {
  const auto modes = single(pair_quadratic());
  // Endpoint at T = 1 keeps the error well above rounding.
  std::vector<double> errors;
  for (double h : {4e-3, 2e-3, 1e-3, 5e-4, 2.5e-4}) {
    const auto traj = simulate(modes, SwitchingSignal::constant(1), StateVector(vec({1, 0}), kTwo), 1.0,
                               StepScheme{SchemeKind::ExplicitProjectedSubgradient, h});
    errors.push_back((traj.final_state() - two_agent_exact(vec({1, 0}), 1.0)).norm());
  }
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double ratio = errors[i] / errors[i - 1];
    CHECK(ratio >= 0.4);
    CHECK(ratio <= 0.6);
  }
}

TEST_CASE("explicit and proximal schemes agree") {
  const auto modes = single(pair_quadratic());
  for (double h : {1e-3, 5e-4}) {
    const auto a = simulate(modes, SwitchingSignal::constant(1), StateVector(vec({2, -1}), kTwo), 1.0,
                            StepScheme{SchemeKind::ExplicitProjectedSubgradient, h});
    const auto b = simulate(modes, SwitchingSignal::constant(1), StateVector(vec({2, -1}), kTwo), 1.0,
                            StepScheme{SchemeKind::ProximalEuler, h});
    CHECK((a.final_state() - b.final_state()).norm() <= 10 * h);
  }
}

TEST_CASE("trajectories from a common minimizer are constant") {
  const auto modes = single(pair_quadratic());
  const auto traj = simulate(modes, make_round_robin(1, 1.0, 3.0), StateVector(vec({0.7, 0.7}), kTwo), 3.0,
                             StepScheme{});
  for (const auto& x : traj.states) CHECK(testing::max_abs_diff(x, vec({0.7, 0.7})) == 0.0);
}

TEST_CASE("grid contains every breakpoint exactly once") {
  const auto sig = make_random_dwell(3, 0.0123, 0.3, 10.0, 5);
  for (double h : {1e-3, 7e-3, 0.05}) {
    const auto grid = time_grid(sig, 10.0, h);
    CHECK(grid.front() == 0.0);
    CHECK(grid.back() == 10.0);
    for (std::size_t j = 1; j < grid.size(); ++j) {
      CHECK(grid[j] > grid[j - 1]);
      CHECK(grid[j] - grid[j - 1] <= h * (1 + 1e-9));
    }
    for (double b : sig.breakpoints()) {
      if (b > 10.0) continue;
      CHECK(std::count(grid.begin(), grid.end(), b) == 1);
    }
  }
}

TEST_CASE("whole-space modes always complete") {
  const Layout three{3, 1};
  std::vector<ModeDescriptor> modes;
  modes.emplace_back(std::make_shared<const ObjectiveDescriptor>(
      three, PNormCoupling{1, false}, WeightedGraph(3, {{0, 1, WeightProfile::constant(1)}})));
  modes.emplace_back(std::make_shared<const ObjectiveDescriptor>(
      three, InfNormCoupling{}, WeightedGraph(3, {{1, 2, WeightProfile::constant(1)}})));
  const auto traj = simulate(modes, make_round_robin(2, 0.3, 4.0), StateVector(vec({2, -1, 0.5}), three),
                             4.0, StepScheme{});
  CHECK(traj.termination.kind == TerminationKind::Completed);
}

TEST_CASE("initial condition must be feasible") {
  const auto modes = single(pair_quadratic(), ConvexSet::box(vec({0, 0}), vec({1, 1})));
  CHECK_THROWS_AS(simulate(modes, SwitchingSignal::constant(1), StateVector(vec({2, 0}), kTwo), 1.0,
                           StepScheme{}),
                  Error);
  try {
    simulate(modes, SwitchingSignal::constant(1), StateVector(vec({2, 0}), kTwo), 1.0, StepScheme{});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InitialConditionOutsideSet);
  }
}

TEST_CASE("switch policies") {
  std::vector<ModeDescriptor> modes{
      ModeDescriptor(pair_quadratic(), ConvexSet::box(vec({0, 0}), vec({2, 2}))),
      ModeDescriptor(pair_quadratic(), ConvexSet::box(vec({0, 0}), vec({0.5, 0.5})))};
  const auto sig = make_round_robin(2, 1.0, 4.0);
  const StateVector x0(vec({2, 0}), kTwo);
  const auto stopped = simulate(modes, sig, x0, 4.0, StepScheme{});
  CHECK(stopped.termination.kind == TerminationKind::LeftConstraint);
  CHECK(stopped.termination.time == 1.0);
  CHECK(stopped.termination.mode == 2);
  CHECK(stopped.times.back() == 1.0);

  SimulationOptions opts;
  opts.policy = SwitchPolicy::ReprojectOnSwitch;
  const auto continued = simulate(modes, sig, x0, 4.0, StepScheme{}, opts);
  CHECK(continued.termination.kind == TerminationKind::Completed);
  CHECK(continued.reprojections == 1);
  for (std::size_t j = 0; j < continued.size(); ++j) {
    const int q = continued.modes[j];
    CHECK(distance(modes[static_cast<std::size_t>(q - 1)].constraint, continued.states[j]) <= 1e-6);
  }
}

TEST_CASE("recorded states stay feasible") {
  const Layout layout{3, 2};
  std::vector<ConvexSet> boxes;
  for (int i = 0; i < 3; ++i) boxes.push_back(ConvexSet::box(vec({-1.0 + i, -1}), vec({0.5 + i, 1})));
  const auto f = std::make_shared<const ObjectiveDescriptor>(
      layout, PNormCoupling{2, true},
      WeightedGraph(3, {{0, 1, WeightProfile::constant(1)}, {1, 2, WeightProfile::constant(2)}}));
  const auto modes = single(f, ConvexSet::product(boxes));
  const auto traj = simulate(modes, SwitchingSignal::constant(1),
                             StateVector(vec({-1, 1, 0, -1, 2.5, 0.3}), layout), 5.0, StepScheme{});
  for (const auto& x : traj.states) CHECK(distance(modes[0].constraint, x) <= 1e-6);
}

TEST_CASE("pure coupling conserves the agent sum") {
  const Layout layout{4, 2};
  std::vector<ModeDescriptor> modes;
  for (Coupling c : {Coupling{PNormCoupling{1, false}}, Coupling{InfNormSquaredCoupling{}},
                     Coupling{PNormCoupling{3, true}}}) {
    modes.emplace_back(std::make_shared<const ObjectiveDescriptor>(
        layout, c,
        WeightedGraph(4, {{0, 1, WeightProfile::constant(1)}, {1, 3, WeightProfile::constant(0.5)},
                          {2, 3, WeightProfile::constant(2)}})));
  }
  const StateVector x0(vec({1, -2, 0.5, 3, -1, 0, 2, 2}), layout);
  const double T = 3.0;
  const auto traj = simulate(modes, make_round_robin(3, 0.2, T), x0, T, StepScheme{});
  const Vector sum0 = x0.agent_mean();
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const Vector mean = traj.state(j).agent_mean();
    CHECK((mean - sum0).cwiseAbs().maxCoeff() * 4 <= 1e-9 * std::max(traj.times[j], 1.0));
  }
}

TEST_CASE("time-varying weights are sampled at the left endpoint") {
  const auto f = pair_quadratic(WeightProfile{1.0, {{0.5, 1.0, 0.0}}});
  const ModeDescriptor mode(f);
  const double t = 0.9;
  const double a = 1.0 + 0.5 * std::sin(t);
  const Vector x = step(mode, SchemeKind::ExplicitProjectedSubgradient, 0.1, vec({1, 0}), t);
  CHECK(testing::max_abs_diff(x, vec({1 - 0.1 * a, 0.1 * a})) < 1e-15);
}

TEST_CASE("monotone flows") {
  const std::vector<MonotoneMap> rot{rotation()};
  const double h = 1e-4;
  const auto orbit = simulate_monotone(rot, SwitchingSignal::constant(1), vec({1, 0}), 2 * std::numbers::pi, h);
  for (const auto& x : orbit.states) {
    CHECK(x.norm() >= 1.0 - 1e-12);
    CHECK(x.norm() <= 1.0 + 5e-4);
  }
  CHECK((orbit.final_state() - vec({1, 0})).norm() <= 1e-3);

  Matrix S(2, 2);
  S << 2, 1, -1, 2;  // from x² - y² + xy
  const std::vector<MonotoneMap> saddle{linear_map(S, "saddle")};
  const auto conv = simulate_monotone(saddle, SwitchingSignal::constant(1), vec({1.5, -2}), 20.0, 1e-3);
  CHECK(conv.final_state().norm() <= 1e-4);

  const auto rest = simulate_monotone(saddle, SwitchingSignal::constant(1), vec({0, 0}), 1.0, 1e-2);
  for (const auto& x : rest.states) CHECK(x.norm() == 0.0);

  const std::vector<MonotoneMap> repel{linear_map(-Matrix::Identity(2, 2), "repel")};
  const auto blown = simulate_monotone(repel, SwitchingSignal::constant(1), vec({1, 0}), 100.0, 1e-2, 1e3);
  CHECK(blown.termination.kind == TerminationKind::Diverged);
}

TEST_CASE("monotonicity probe") {
  Matrix S(2, 2);
  S << 2, 1, -1, 2;
  CHECK(monotonicity_probe(rotation(), 1000, 1) >= -1e-9);
  CHECK(monotonicity_probe(linear_map(S), 1000, 2) >= -1e-9);
  CHECK(monotonicity_probe(linear_map(-Matrix::Identity(2, 2)), 100, 3) < 0.0);
}

TEST_CASE("pairwise distance series") {
  const auto modes = single(pair_quadratic());
  const auto sig = SwitchingSignal::constant(1);
  const double h = 1e-3;
  const auto a = simulate(modes, sig, StateVector(vec({1, 0}), kTwo), 2.0, StepScheme{SchemeKind::ExplicitProjectedSubgradient, h});
  const auto b = simulate(modes, sig, StateVector(vec({0, 1}), kTwo), 2.0, StepScheme{SchemeKind::ExplicitProjectedSubgradient, h});
  const auto same = pairwise_distance_series(a, a);
  for (double d : same) CHECK(d == 0.0);
  const auto d = pairwise_distance_series(a, b);
  for (std::size_t j = 0; j < d.size(); ++j) {
    CHECK(std::abs(d[j] - std::sqrt(2.0) * std::exp(-2 * a.times[j])) <= 1e-3);
    if (j > 0) CHECK(d[j] <= d[j - 1] + 5 * h);
  }
  const auto c = simulate(modes, sig, StateVector(vec({0, 1}), kTwo), 2.0, StepScheme{SchemeKind::ExplicitProjectedSubgradient, 2 * h});
  CHECK_THROWS_AS(pairwise_distance_series(a, c), Error);
}

}  // TEST_SUITE
