#include "doctest.h"
#include "support.hpp"

#include "switchflow/diagnostics.hpp"
#include "switchflow/error.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

using namespace switchflow;
using testing::vec;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const ObjectiveDescriptor> edge_quadratic(std::size_t k, std::size_t i, std::size_t j,
                                                          WeightProfile w = WeightProfile::constant(1)) {
  return std::make_shared<const ObjectiveDescriptor>(Layout{k, 1}, PNormCoupling{2, true},
                                                     WeightedGraph(k, {{i, j, w}}));
}

Trajectory constant_trajectory(const Vector& x, int mode, std::size_t nodes, double dt) {
  Trajectory t;
  t.layout = Layout{static_cast<std::size_t>(x.size()), 1};
  for (std::size_t j = 0; j < nodes; ++j) {
    t.times.push_back(static_cast<double>(j) * dt);
    t.states.push_back(x);
    t.modes.push_back(mode);
  }
  t.termination = {TerminationKind::Completed, t.times.back(), mode};
  return t;
}

MonotoneMap rotation() {
  Matrix R(2, 2);
  R << 0, -1, 1, 0;
  return linear_map(R, "rotation");
}

// Clockwise unit-circle orbit through the quadrants 4, 3, 2, 1, with mode q
// active while the orbit is in quadrant q.
struct RotationRun {
  Trajectory traj;
  FunctionalResiduals model = quadrant_residuals(rotation());
};

RotationRun rotation_run(double h = 1e-4) {
  const std::vector<MonotoneMap> maps(4, rotation());
  const SwitchingSignal signal({0, kPi / 2, kPi, 3 * kPi / 2}, {4, 3, 2, 1});
  return {simulate_monotone(maps, signal, vec({1, 0}), 2 * kPi, h), quadrant_residuals(rotation())};
}

std::vector<ModeDescriptor> switched_pair_modes() {
  return {ModeDescriptor(edge_quadratic(3, 0, 1)), ModeDescriptor(edge_quadratic(3, 1, 2))};
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("lyapunov: constant trajectory at the anchor") {
  const std::vector<ModeDescriptor> modes{ModeDescriptor(edge_quadratic(2, 0, 1))};
  const SubgradientResiduals model(modes);
  const auto traj = constant_trajectory(vec({0.3, 0.3}), 1, 50, 0.01);
  const auto rep = lyapunov_check(traj, vec({0.3, 0.3}), model);
  CHECK(rep.passed);
  CHECK(rep.violations == 0);
  CHECK(rep.max_abs_rate == 0.0);
  for (double v : rep.values) CHECK(v == 0.0);
}

TEST_CASE("lyapunov: two-agent quadratic against the closed form") {
  const std::vector<ModeDescriptor> modes{ModeDescriptor(edge_quadratic(2, 0, 1))};
  const SubgradientResiduals model(modes);
  const double h = 1e-3;
  const auto traj = simulate(modes, SwitchingSignal::constant(1), StateVector(vec({1, 0}), Layout{2, 1}), 3.0,
                             StepScheme{SchemeKind::ExplicitProjectedSubgradient, h});
  const auto rep = lyapunov_check(traj, vec({0.5, 0.5}), model);
  CHECK(rep.passed);
  CHECK(rep.violations == 0);
  // x_1 - x_2 = e^{-2t}, so V = ½ |x - a|² = ¼ e^{-4t}; the Euler iterates
  // give exactly (1 - 2h)^{2j} / 4.
  for (std::size_t j = 0; j < traj.size(); j += 100) {
    const double t = traj.times[j];
    const double discrete = 0.25 * std::pow(1 - 2 * h, 2.0 * static_cast<double>(j));
    const double exact = 0.25 * std::exp(-4 * t);
    CHECK(rep.values[j] == doctest::Approx(discrete).epsilon(1e-10));
    CHECK(std::abs(rep.values[j] - exact) <= 5 * h * t * exact + 1e-15);
    if (j > 0) CHECK(rep.values[j] < rep.values[j - 100]);
  }
  // L = |x'(0)|² = 2.
  CHECK(rep.tolerance == doctest::Approx(2 * h));
}

TEST_CASE("lyapunov: anchor outside A") {
  const std::vector<ModeDescriptor> modes{ModeDescriptor(edge_quadratic(2, 0, 1))};
  const SubgradientResiduals model(modes);
  const auto traj = constant_trajectory(vec({0.3, 0.3}), 1, 3, 0.1);
  try {
    (void)lyapunov_check(traj, vec({1, 0}), model);
    FAIL("expected AnchorNotInA");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AnchorNotInA);
  }
}

TEST_CASE("lyapunov: rotation with quadrant residuals holds with both sides near zero") {
  const auto run = rotation_run();
  const auto rep = lyapunov_check(run.traj, vec({0, 0}), run.model);
  CHECK(rep.passed);
  // W_sigma vanishes along the orbit, and V changes only by the O(h) Euler
  // drift: V_{j+1} = (1 + h²) V_j.
  CHECK(rep.max_residual <= 1e-3 * rep.tolerance);
  CHECK(rep.max_abs_rate <= 1e-4 * 1.001);
  CHECK(rep.max_abs_rate <= rep.tolerance);
}

TEST_CASE("quadrant and pairing residual values") {
  const auto quad = quadrant_residuals(rotation());
  CHECK(quad.mode_count() == 4);
  CHECK(quad.residual(1, vec({2, 3})) == 0.0);
  CHECK(quad.residual(1, vec({-1, 2})) == doctest::Approx(1.0));
  CHECK(quad.residual(2, vec({-1, 2})) == 0.0);
  CHECK(quad.residual(3, vec({1, 1})) == doctest::Approx(std::sqrt(2.0)));
  CHECK(quad.residual(4, vec({3, 4})) == doctest::Approx(4.0));
  CHECK(quad.velocity_bound(1, vec({3, 4}), 0.0) == doctest::Approx(5.0));

  Matrix S(2, 2);
  S << 2, 1, -1, 2;
  const auto pairing = pairing_residuals({linear_map(S)}, vec({0, 0}));
  testing::Sampler rng(11);
  for (int s = 0; s < 100; ++s) {
    const Vector x = rng.cube(2, 3);
    CHECK(pairing.residual(1, x) == doctest::Approx(2 * x.squaredNorm()));
  }
}

TEST_CASE("residuals: converged consensus run") {
  const auto modes = switched_pair_modes();
  const SubgradientResiduals model(modes);
  const auto signal = make_round_robin(2, 0.5, 40);
  const auto traj = simulate(modes, signal, StateVector(vec({1, -2, 4}), Layout{3, 1}), 40, StepScheme{});
  const auto rep = residuals(traj, model, 1e-5, 10);
  CHECK(rep.all_modes_converged);
  CHECK(rep.q_infinity_converged);
  for (double w : rep.terminal) CHECK(w <= 1e-6);
  CHECK(rep.q_infinity == std::vector<int>{1, 2});
  CHECK(rep.series.size() == 2);
  CHECK(rep.series_times.back() == traj.times.back());
}

TEST_CASE("residuals: mode 2 only on [0,1)") {
  const auto modes = switched_pair_modes();
  const SubgradientResiduals model(modes);
  const SwitchingSignal signal({0, 1}, {2, 1});
  const Vector x0 = vec({0, 1, 5});
  const auto traj = simulate(modes, signal, StateVector(x0, Layout{3, 1}), 20, StepScheme{});
  const auto rep = residuals(traj, model);
  CHECK(rep.q_infinity == std::vector<int>{1});
  CHECK(rep.terminal[0] <= 1e-6);
  CHECK(rep.q_infinity_converged);
  CHECK_FALSE(rep.all_modes_converged);
  // Agents 2 and 3 mix for one time unit, then agents 1 and 2 average.
  const double gap = 4 * std::exp(-2.0);
  const double x2 = 3 - 0.5 * gap;
  const double x3 = 3 + 0.5 * gap;
  const double fused = 0.5 * (0 + x2);
  // f_2 = ½ (x_2 - x_3)² and min f_2 = 0.
  CHECK(rep.terminal[1] == doctest::Approx(0.5 * (x3 - fused) * (x3 - fused)).epsilon(1e-2));
}

TEST_CASE("residuals: a point of A has vanishing residuals") {
  const auto modes = switched_pair_modes();
  const SubgradientResiduals model(modes);
  const auto traj = constant_trajectory(vec({-0.7, -0.7, -0.7}), 1, 5, 0.1);
  const auto rep = residuals(traj, model);
  for (double w : rep.terminal) CHECK(w <= 1e-8);
  CHECK(rep.all_modes_converged);
}

TEST_CASE("residuals are infinite off the constraint set") {
  const std::vector<ModeDescriptor> modes{
      ModeDescriptor(edge_quadratic(2, 0, 1), ConvexSet::box(vec({0, 0}), vec({1, 1})))};
  const SubgradientResiduals model(modes);
  CHECK(std::isinf(model.residual(1, vec({2, 0}))));
  CHECK(model.residual(1, vec({0.5, 0.5})) <= 1e-12);
  CHECK(model.residual(1, vec({1, 0})) == doctest::Approx(0.5));
}

TEST_CASE("time-varying residuals use the envelope") {
  WeightProfile w{1.0, {{0.5, 3.0, 0.0}}};
  const std::vector<ModeDescriptor> modes{ModeDescriptor(edge_quadratic(2, 0, 1, w))};
  const SubgradientResiduals model(modes);
  const Vector x = vec({1, -1});
  // Envelope weight a_* = 0.5: W = ½·0.5·|2|².
  CHECK(model.residual(1, x) == doctest::Approx(1.0));
  testing::Sampler rng(3);
  for (int s = 0; s < 50; ++s) {
    const double t = rng.uniform(0, 10);
    CHECK(model.decrease_residual(1, x, t) == doctest::Approx(0.5 * w.at(t) * 4));
    CHECK(model.decrease_residual(1, x, t) >= model.residual(1, x) - 1e-12);
  }
}

TEST_CASE("per-mode nonexpansiveness: subgradient flows") {
  const auto modes = switched_pair_modes();
  const SubgradientResiduals model(modes);
  const Vector x0 = vec({1, -2, 4});
  const auto traj =
      simulate(modes, make_round_robin(2, 0.5, 10), StateVector(x0, Layout{3, 1}), 10, StepScheme{});
  std::vector<Vector> anchors;
  for (int q = 1; q <= 2; ++q) anchors.push_back(model.minimizers(q).nearest(x0));
  const auto rep = per_mode_nonexpansiveness(traj, anchors, model);
  CHECK(rep.passed);
  CHECK(rep.intervals == 20);
  // Any point of A_q works, including ones far from the flow.
  const std::vector<Vector> far{vec({7, 7, -3}), vec({-5, 2, 2})};
  CHECK(per_mode_nonexpansiveness(traj, far, model).passed);
}

TEST_CASE("per-mode nonexpansiveness: rotation anchors") {
  const auto run = rotation_run();
  const std::vector<Vector> origin(4, vec({0, 0}));
  CHECK(per_mode_nonexpansiveness(run.traj, origin, run.model).passed);

  const double c = std::sqrt(0.5);
  const std::vector<Vector> diagonal{vec({c, c}), vec({-c, c}), vec({-c, -c}), vec({c, -c})};
  const auto rep = per_mode_nonexpansiveness(run.traj, diagonal, run.model);
  CHECK_FALSE(rep.passed);
  // Over each quarter turn |x - a_q|² = 2 - 2cos(s - π/4) falls to 0 at the
  // diagonal and climbs back to 2 - √2 at the axis.
  CHECK(rep.worst_violation == doctest::Approx(2 - std::sqrt(2.0)).epsilon(1e-3));

  const std::vector<Vector> off{vec({1, 1}), vec({0, 0}), vec({0, 0}), vec({-1, 0})};
  try {
    (void)per_mode_nonexpansiveness(run.traj, off, run.model);
    FAIL("expected AnchorNotInAq");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AnchorNotInAq);
  }
}

TEST_CASE("per-mode nonexpansiveness: constant trajectory") {
  const auto modes = switched_pair_modes();
  const SubgradientResiduals model(modes);
  const auto traj = constant_trajectory(vec({2, 1, 0}), 1, 20, 0.1);
  const std::vector<Vector> anchors{vec({1.5, 1.5, 0}), vec({2, 0.5, 0.5})};
  const auto rep = per_mode_nonexpansiveness(traj, anchors, model);
  CHECK(rep.passed);
  CHECK(rep.worst_violation <= 0.0);
}

TEST_CASE("pair nonexpansiveness") {
  const auto modes = switched_pair_modes();
  const SubgradientResiduals model(modes);
  const auto signal = make_random_dwell(2, 0.2, 1.0, 10, 5);
  const Layout layout{3, 1};
  const auto a = simulate(modes, signal, StateVector(vec({1, -2, 4}), layout), 10, StepScheme{});
  const auto b = simulate(modes, signal, StateVector(vec({-3, 0, 2}), layout), 10, StepScheme{});
  const auto rep = pair_nonexpansiveness(a, b, model);
  CHECK(rep.passed);
  const auto d = pairwise_distance_series(a, b);
  CHECK(d.back() < d.front());

  const auto other = simulate(modes, make_round_robin(2, 0.5, 10), StateVector(vec({0, 0, 1}), layout), 10,
                              StepScheme{});
  try {
    (void)pair_nonexpansiveness(a, other, model);
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GridMismatch);
  }
}

TEST_CASE("limit detection") {
  const auto modes = switched_pair_modes();
  const auto traj = simulate(modes, make_round_robin(2, 0.5, 40), StateVector(vec({1, -2, 4}), Layout{3, 1}),
                             40, StepScheme{});
  const auto converged = limit_detect(traj, 0.2, 1e-5);
  CHECK(converged.is_cauchy);
  CHECK(converged.limit == traj.final_state());

  const auto run = rotation_run();
  const auto orbit = limit_detect(run.traj, 0.2, 1e-5);
  CHECK_FALSE(orbit.is_cauchy);
  // The last fifth of a turn spans a chord 2 sin(0.2π) on the unit circle.
  CHECK(orbit.tail_diameter == doctest::Approx(2 * std::sin(0.2 * kPi)).epsilon(1e-3));

  const auto still = limit_detect(constant_trajectory(vec({1, 2}), 1, 10, 0.5));
  CHECK(still.is_cauchy);
  CHECK(still.tail_diameter == 0.0);
}

TEST_CASE("demipositivity: x^2 + xy is refuted at (0,1)") {
  Matrix A(2, 2);
  A << 2, 1, -1, 0;
  const auto res = demipositivity_probe(linear_map(A), vec({0, 0}));
  REQUIRE(res.is_violated);
  CHECK(testing::max_abs_diff(*res.witness, vec({0, 1})) == 0.0);
  CHECK(testing::max_abs_diff(*res.value, vec({1, 0})) == 0.0);
  // Independent evaluation: v.(x - a) = 0 with v != 0.
  CHECK((A * vec({0, 1})).dot(vec({0, 1})) == 0.0);
}

TEST_CASE("demipositivity: gradients and strict saddles give no witness") {
  Matrix two(1, 1);
  two << 2;
  const auto sq = demipositivity_probe(linear_map(two), vec({0}));
  CHECK_FALSE(sq.is_violated);
  CHECK(sq.points_examined >= 10000);

  Matrix S(2, 2);
  S << 2, 1, -1, 2;
  DemipositivityOptions opts;
  opts.refine = true;
  opts.samples = 2000;
  CHECK_FALSE(demipositivity_probe(linear_map(S), vec({0, 0})).is_violated);
  CHECK_FALSE(demipositivity_probe(linear_map(S), vec({0, 0}), opts).is_violated);

  const auto l1 = std::make_shared<const L1Norm>(3, 1.0);
  CHECK_FALSE(demipositivity_probe(subgradient_map(l1, vec({0, 0, 0})), vec({0, 0, 0})).is_violated);
}

TEST_CASE("demipositivity: anchor must be a zero") {
  Matrix S(2, 2);
  S << 2, 1, -1, 2;
  try {
    (void)demipositivity_probe(linear_map(S), vec({1, 0}));
    FAIL("expected AnchorNotZero");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AnchorNotZero);
  }
}

TEST_CASE("envelope probe") {
  const WeightProfile w{1.0, {{0.3, 2.0, 0.0}, {0.2, 0.7, 1.0}}};
  const ObjectiveDescriptor f(Layout{3, 2}, PNormCoupling{2, false},
                              WeightedGraph(3, {{0, 1, w}, {1, 2, WeightProfile::constant(0.8)}}));
  const auto rep = envelope_probe(f, 2000, 50, 7);
  CHECK(rep.passed);
  CHECK(rep.probes == 2000);
  CHECK(rep.worst_gap <= 0.0);
  // Independent check on a few probes: g uses the coefficient lower bound 0.5.
  testing::Sampler rng(8);
  const ObjectiveDescriptor g = f.envelope();
  for (int s = 0; s < 100; ++s) {
    const Vector x = rng.cube(6, 3);
    const double t = rng.uniform(0, 50);
    CHECK(g.value(x, t) <= f.value(x, t) + 1e-12);
  }
}

}  // TEST_SUITE
