// Acceptance criteria at the stated tolerances: one PASS/FAIL line each.
// Exit status is nonzero iff any criterion fails.

#include "switchflow/diagnostics.hpp"
#include "switchflow/error.hpp"
#include "switchflow/function.hpp"
#include "switchflow/polytope.hpp"
#include "switchflow/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace switchflow;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string fixed(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

int failures = 0;

void report(int id, const std::string& title, bool ok, const std::string& detail) {
  std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  Vector cube(Eigen::Index n, double r) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(-r, r);
    return v;
  }
  std::uint64_t seed() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

Vector repeat(const Vector& block, std::size_t agents) {
  Vector out(block.size() * static_cast<Eigen::Index>(agents));
  for (std::size_t i = 0; i < agents; ++i) out.segment(static_cast<Eigen::Index>(i) * block.size(), block.size()) = block;
  return out;
}

Vector agent_sum(const Vector& x, const Layout& layout) {
  Vector s = Vector::Zero(static_cast<Eigen::Index>(layout.dim));
  for (std::size_t i = 0; i < layout.agents; ++i) {
    s += x.segment(static_cast<Eigen::Index>(i * layout.dim), static_cast<Eigen::Index>(layout.dim));
  }
  return s;
}

// ---------------------------------------------------------------------------
// 1. Two-agent linear consensus against x_1 - x_2 = e^{-2t}.

void criterion_linear_oracle() {
  const Layout layout{2, 1};
  const auto f = std::make_shared<const ObjectiveDescriptor>(
      layout, PNormCoupling{2, false}, WeightedGraph(2, {{0, 1, WeightProfile::constant(1)}}));
  const std::vector<ModeDescriptor> modes{ModeDescriptor(f)};
  const double T = 5;
  auto exact = [&](double t) {
    const double half = 0.5 * std::exp(-2 * t);
    return vec({0.5 + half, 0.5 - half});
  };
  std::vector<double> errors;
  double runtime = 0;
  for (int k = 0; k <= 4; ++k) {
    const double h = 1e-3 / std::pow(2.0, k);
    const auto start = Clock::now();
    const auto traj = simulate(modes, SwitchingSignal::constant(1), StateVector(vec({1, 0}), layout), T,
                               StepScheme{SchemeKind::ExplicitProjectedSubgradient, h});
    if (k == 0) runtime = seconds_since(start);
    errors.push_back((traj.final_state() - exact(T)).lpNorm<Eigen::Infinity>());
  }
  bool ok = errors[0] <= 2e-3 && runtime < 1.0;
  std::string ratios;
  for (std::size_t k = 1; k < errors.size(); ++k) {
    const double r = errors[k] / errors[k - 1];
    ok = ok && r >= 0.4 && r <= 0.6;
    ratios += (k > 1 ? " " : "") + fixed(r);
  }
  report(1, "two-agent consensus oracle", ok,
         "endpoint error " + sci(errors[0]) + " (tol 2e-3), halving ratios " + ratios + ", runtime " +
             fixed(runtime) + " s (limit 1 s)");
}

// ---------------------------------------------------------------------------
// 2. Switched quadratic preset.

void criterion_example3() {
  const auto start = Clock::now();
  const Scenario s = preset("example3_switched_quadratic");
  const Trajectory traj = simulate(s.modes, s.signal, StateVector(s.initial_condition, s.layout), s.horizon, s.scheme, s.simulation);
  const SubgradientResiduals model(s.modes);
  const auto res = residuals(traj, model, 1e-5, 1000);
  const double runtime = seconds_since(start);
  const double err = consensus_error(traj.state(traj.size() - 1));
  const Vector average = repeat(StateVector(s.initial_condition, s.layout).agent_mean(), s.layout.agents);
  const double gap = (traj.final_state() - average).norm();
  double worst_w = 0;
  for (double w : res.terminal) worst_w = std::max(worst_w, w);
  const bool ok = err <= 1e-4 && worst_w <= 1e-5 && gap <= 1e-4 && runtime < 10.0;
  report(2, "switched consensus (example3_switched_quadratic)", ok,
         "consensus error " + sci(err) + ", max terminal W_q " + sci(worst_w) + ", distance to average " +
             sci(gap) + ", runtime " + fixed(runtime) + " s (limit 10 s)");
}

// ---------------------------------------------------------------------------
// Random scenarios where every mode's
// objective and constraint share the minimizer (c, ..., c), so A is nonempty.

struct RandomScenario {
  Layout layout;
  std::vector<ModeDescriptor> modes;
  SwitchingSignal signal = SwitchingSignal::constant(1);
  StepScheme scheme;
  double horizon = 2.0;
  Vector x0;
  Vector y0;
  Vector anchor;
  std::string label;
};

RandomScenario random_scenario(Rng& rng, int index) {
  RandomScenario r;
  r.layout = Layout{static_cast<std::size_t>(rng.integer(2, 5)), static_cast<std::size_t>(rng.integer(1, 2))};
  const std::size_t k = r.layout.agents;
  const auto m = static_cast<Eigen::Index>(r.layout.dim);
  const int p = rng.integer(1, 3);
  const Vector c = rng.cube(m, 1.0);

  const std::vector<std::pair<Coupling, std::string>> couplings{
      {PNormCoupling{2, false}, "p2"},          {PNormCoupling{2, true}, "p2sq"},
      {PNormCoupling{3, false}, "p3"},          {PNormCoupling{1.5, true}, "p1.5sq"},
      {InfNormSquaredCoupling{}, "infsq"},      {InfNormCoupling{}, "inf"},
      {PNormCoupling{1, false}, "p1"}};
  const auto& [coupling, cname] = couplings[static_cast<std::size_t>(index) % couplings.size()];
  const int local_kind = rng.integer(0, 2);
  const bool constrained = rng.integer(0, 2) == 0;

  std::optional<ConvexSet> constraint;
  if (constrained) {
    std::vector<ConvexSet> parts;
    for (std::size_t i = 0; i < k; ++i) {
      Vector lo = c, hi = c;
      for (Eigen::Index d = 0; d < m; ++d) {
        lo[d] -= rng.uniform(0.2, 1.5);
        hi[d] += rng.uniform(0.2, 1.5);
      }
      parts.push_back(ConvexSet::box(lo, hi));
    }
    constraint = ConvexSet::product(std::move(parts));
  }

  for (int q = 0; q < p; ++q) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        if (rng.uniform(0, 1) < 0.5) edges.push_back({i, j, WeightProfile::constant(rng.uniform(0.3, 2.0))});
      }
    }
    std::vector<LocalTerm> terms;
    if (local_kind > 0) {
      for (std::size_t i = 0; i < k; ++i) {
        if (local_kind == 1) {
          Vector w(m);
          for (Eigen::Index d = 0; d < m; ++d) w[d] = rng.uniform(0.2, 2.0);
          terms.push_back(quadratic_local_term(c, w));
        } else {
          const Vector lo = c - Vector::Constant(m, rng.uniform(0.0, 1.0));
          const Vector hi = c + Vector::Constant(m, rng.uniform(0.0, 1.0));
          terms.push_back(HalfSquaredDistance{ConvexSet::box(lo, hi)});
        }
      }
    }
    r.modes.emplace_back(std::make_shared<const ObjectiveDescriptor>(r.layout, coupling, WeightedGraph(k, edges),
                                                                     std::move(terms)),
                         constraint);
  }
  r.signal = make_random_dwell(p, 0.1, 0.6, r.horizon, rng.seed());
  const bool l1 = std::holds_alternative<PNormCoupling>(coupling) && std::get<PNormCoupling>(coupling).p == 1.0;
  r.scheme.kind = (l1 && local_kind == 0 && !constrained) ? SchemeKind::ProximalEuler
                                                          : SchemeKind::ExplicitProjectedSubgradient;
  r.scheme.h = 1e-3;
  const auto n = static_cast<Eigen::Index>(r.layout.size());
  r.x0 = rng.cube(n, 2.0);
  r.y0 = rng.cube(n, 2.0);
  if (constraint) {
    r.x0 = project(*constraint, r.x0);
    r.y0 = project(*constraint, r.y0);
  }
  r.anchor = repeat(c, k);
  static const char* local_names[] = {"none", "quadratic", "sqdist"};
  r.label = "k=" + std::to_string(k) + " m=" + std::to_string(r.layout.dim) + " p=" + std::to_string(p) + " " +
            cname + " local=" + local_names[local_kind] + (constrained ? " boxes" : "") +
            (r.scheme.kind == SchemeKind::ProximalEuler ? " prox" : "");
  return r;
}

Trajectory run(const RandomScenario& r, const Vector& x0) {
  return simulate(r.modes, r.signal, StateVector(x0, r.layout), r.horizon, r.scheme);
}

// 3. Lyapunov decrease on 100 random scenarios.
void criterion_lyapunov_suite() {
  Rng rng(20240301);
  int passed = 0;
  std::size_t violations = 0;
  double worst_margin = -1e300;
  std::string first_failure;
  for (int s = 0; s < 100; ++s) {
    const RandomScenario r = random_scenario(rng, s);
    try {
      const Trajectory traj = run(r, r.x0);
      const SubgradientResiduals model(r.modes, std::vector<Vector>{r.x0});
      const auto rep = lyapunov_check(traj, r.anchor, model);
      violations += rep.violations;
      worst_margin = std::max(worst_margin, rep.worst_violation);
      if (rep.passed && traj.termination.kind == TerminationKind::Completed) {
        ++passed;
      } else if (first_failure.empty()) {
        first_failure = "; first failure #" + std::to_string(s) + " (" + r.label + ")";
      }
    } catch (const Error& e) {
      if (first_failure.empty()) first_failure = "; #" + std::to_string(s) + " (" + r.label + ") threw " + e.what();
    }
  }
  report(3, "Lyapunov decrease over 100 random scenarios", passed == 100 && violations == 0,
         std::to_string(passed) + "/100 pass, " + std::to_string(violations) +
             " violations beyond tol(h), worst (dV/dt + W - tol) " + sci(worst_margin) + first_failure);
}

// 4. Paired trajectories under a shared signal.
void criterion_pair_suite() {
  Rng rng(20240302);
  int passed = 0;
  double worst = -1e300;
  double shrink = 0;
  std::string first_failure;
  for (int s = 0; s < 50; ++s) {
    const RandomScenario r = random_scenario(rng, s);
    try {
      const Trajectory a = run(r, r.x0);
      const Trajectory b = run(r, r.y0);
      const SubgradientResiduals model(r.modes, std::vector<Vector>{r.x0});
      const auto rep = pair_nonexpansiveness(a, b, model);
      worst = std::max(worst, rep.worst_violation);
      const auto d = pairwise_distance_series(a, b);
      shrink = std::max(shrink, d.back() / std::max(d.front(), 1e-300));
      if (rep.passed) {
        ++passed;
      } else if (first_failure.empty()) {
        first_failure = "; first failure #" + std::to_string(s) + " (" + r.label + ")";
      }
    } catch (const Error& e) {
      if (first_failure.empty()) first_failure = "; #" + std::to_string(s) + " (" + r.label + ") threw " + e.what();
    }
  }
  report(4, "pair nonexpansiveness over 50 random scenarios", passed == 50,
         std::to_string(passed) + "/50 pass, worst squared-distance excess " + sci(worst) +
             ", max final/initial distance " + fixed(shrink) + first_failure);
}

// ---------------------------------------------------------------------------
// 5. Conservation on every pure-coupling preset.

void criterion_conservation() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"example1_p2", "example1_p1_sign", "example2_infnorm", "example3_switched_quadratic",
                           "corollary_A_infty", "timevarying_sin_weights"}) {
    const Scenario s = preset(name);
    const Trajectory t = simulate(s.modes, s.signal, StateVector(s.initial_condition, s.layout), s.horizon, s.scheme, s.simulation);
    const Vector s0 = agent_sum(t.states.front(), t.layout);
    double rate = 0;
    for (std::size_t j = 1; j < t.size(); ++j) {
      const double drift = (agent_sum(t.states[j], t.layout) - s0).lpNorm<Eigen::Infinity>();
      rate = std::max(rate, drift / std::max(t.times[j], s.scheme.h));
    }
    ok = ok && rate <= 1e-9;
    detail += (detail.empty() ? "" : ", ") + std::string(name) + " " + sci(rate);
  }
  report(5, "conservation of the agent sum (per unit time, tol 1e-9)", ok, detail);
}

// 6. Constrained consensus: limit (ξ, ξ) with ξ ∈ [1, 2].
void criterion_set_intersection() {
  const Scenario s = preset("example4_set_intersection");
  const Trajectory t = simulate(s.modes, s.signal, StateVector(s.initial_condition, s.layout), s.horizon, s.scheme, s.simulation);
  const Vector x = t.final_state();
  const double xi = 0.5 * (x[0] + x[1]);
  const double spread = std::abs(x[0] - x[1]);
  const double outside = std::max({0.0, 1.0 - x.minCoeff(), x.maxCoeff() - 2.0});
  const bool ok = spread <= 1e-5 && outside <= 1e-5;
  report(6, "constrained consensus in D_1 ∩ D_2 = [1,2]", ok,
         "limit (" + fixed(x[0], 8) + ", " + fixed(x[1], 8) + "), xi = " + fixed(xi, 6) + ", |x_1 - x_2| " +
             sci(spread) + ", interval excess " + sci(outside) + " (tol 1e-5)");
}

// 7. Mode 2 only on [0, 1).
void criterion_persistent_mode() {
  const Scenario s = preset("corollary_A_infty");
  const Trajectory t = simulate(s.modes, s.signal, StateVector(s.initial_condition, s.layout), s.horizon, s.scheme, s.simulation);
  const Vector x = t.final_state();
  // W_1 = ½ (x_1 - x_2)², computed directly.
  const double w1 = 0.5 * (x[0] - x[1]) * (x[0] - x[1]);
  const SubgradientResiduals model(s.modes);
  const double w1_lib = model.residual(1, x);
  const double err = consensus_error(t.state(t.size() - 1));
  const bool ok = w1 <= 1e-5 && w1_lib <= 1e-5 && err > 0.1;
  report(7, "limit in A_inf but not in consensus", ok,
         "terminal W_1 " + sci(w1) + " (library " + sci(w1_lib) + ", tol 1e-5), consensus error " + fixed(err, 4) +
             " (> 0.1)");
}

// 8. Rotation counterexample.
void criterion_rotation() {
  const Scenario s = preset("counterexample_rotation");
  const Trajectory t = simulate_monotone(s.maps, s.signal, s.initial_condition, s.horizon, s.scheme.h);
  const auto model = quadrant_residuals(s.maps.front());
  const auto lyap = lyapunov_check(t, Vector::Zero(2), model);
  const auto lim = limit_detect(t, 0.2, 1e-5);
  double lo = 1e300, hi = 0;
  for (const Vector& x : t.states) {
    lo = std::min(lo, x.norm());
    hi = std::max(hi, x.norm());
  }
  const bool ok = lyap.passed && !lim.is_cauchy && lo >= 1.0 && hi <= 1.0 + 5e-4 &&
                  t.termination.kind == TerminationKind::Completed;
  report(8, "rotation counterexample", ok,
         std::string("lyapunov ") + (lyap.passed ? "passes" : "fails") + " (max W " + sci(lyap.max_residual) +
             ", max |dV/dt| " + sci(lyap.max_abs_rate) + "), limit_detect " + (lim.is_cauchy ? "true" : "false") +
             " (tail diameter " + fixed(lim.tail_diameter) + "), radius in [" + fixed(lo, 6) + ", " + fixed(hi, 6) +
             "]");
}

// ---------------------------------------------------------------------------
// 9. Demipositivity.

void criterion_demipositivity() {
  Matrix H(2, 2);
  H << 2, 1, -1, 0;
  const auto bad = demipositivity_probe(linear_map(H, "x2_plus_xy"), Vector::Zero(2));
  const bool witness_ok = bad.is_violated && bad.witness && (*bad.witness - vec({0, 1})).norm() == 0.0;

  // ∂f of convex catalog functions, anchored at a minimizer.
  Rng rng(909);
  std::vector<std::pair<std::shared_ptr<const ConvexFunction>, Vector>> catalog;
  Matrix B = Matrix::Random(3, 3);
  catalog.emplace_back(std::make_shared<const QuadraticFunction>(QuadraticForm{B * B.transpose(), Vector::Zero(3), 0}),
                       Vector::Zero(3));
  catalog.emplace_back(std::make_shared<const L1Norm>(3, 0.7), Vector::Zero(3));
  catalog.emplace_back(std::make_shared<const ZeroFunction>(2), Vector::Zero(2));
  const Layout layout{3, 2};
  const WeightedGraph tri(3, {{0, 1, WeightProfile::constant(1)},
                              {1, 2, WeightProfile::constant(0.5)},
                              {0, 2, WeightProfile::constant(2)}});
  for (const Coupling& c : std::vector<Coupling>{PNormCoupling{2, false}, PNormCoupling{1, false},
                                                 PNormCoupling{3, false}, PNormCoupling{1.5, true},
                                                 InfNormSquaredCoupling{}, InfNormCoupling{}}) {
    catalog.emplace_back(std::make_shared<const ObjectiveDescriptor>(layout, c, tri), Vector::Zero(6));
  }
  const Vector center = vec({0.3, -0.4});
  catalog.emplace_back(
      std::make_shared<const ObjectiveDescriptor>(
          layout, PNormCoupling{2, false}, tri,
          std::vector<LocalTerm>{quadratic_local_term(center, vec({1, 2})),
                                 HalfSquaredDistance{ConvexSet::ball(center, 0.5)},
                                 quadratic_local_term(center, vec({0.5, 0.5}))}),
      repeat(center, 3));
  std::size_t witnesses = 0;
  std::size_t examined = 0;
  for (const auto& [f, a] : catalog) {
    DemipositivityOptions opts;
    opts.samples = 10000;
    opts.seed = rng.seed();
    const auto res = demipositivity_probe(subgradient_map(f, a), a, opts);
    witnesses += res.is_violated ? 1 : 0;
    examined += res.points_examined;
  }

  const Scenario s = preset("demipositive_saddle");
  const Trajectory t = simulate_monotone(s.maps, s.signal, s.initial_condition, s.horizon, s.scheme.h);
  const double dist = t.final_state().norm();

  const bool ok = witness_ok && witnesses == 0 && dist <= 1e-4;
  report(9, "demipositivity", ok,
         std::string("witness ") + (witness_ok ? "(0,1) found" : "not found") + " for x^2+xy; " +
             std::to_string(witnesses) + " witnesses over " + std::to_string(catalog.size()) +
             " catalog subdifferentials (" + std::to_string(examined) + " points); saddle flow |x(20)| " + sci(dist) +
             " (tol 1e-4)");
}

// 10. Time-varying weights.
void criterion_time_varying() {
  const Scenario s = preset("timevarying_sin_weights");
  bool bounds_ok = true;
  for (const auto& mode : s.modes) {
    for (const auto& e : mode.objective->graph().edges()) {
      bounds_ok = bounds_ok && e.weight.lower_bound() >= 0.5 - 1e-12 && e.weight.upper_bound() <= 1.5 + 1e-12;
    }
  }
  const Trajectory t = simulate(s.modes, s.signal, StateVector(s.initial_condition, s.layout), s.horizon, s.scheme, s.simulation);
  const double err = consensus_error(t.state(t.size() - 1));
  // Envelope: direct comparison with constant weight a_* = 0.5 on each edge.
  Rng rng(1010);
  double worst_gap = -1e300;
  for (const auto& mode : s.modes) {
    const ObjectiveDescriptor g = mode.objective->envelope();
    for (int probe = 0; probe < 10000; ++probe) {
      const Vector x = rng.cube(4, 3.0);
      const double time = rng.uniform(0, s.horizon);
      worst_gap = std::max(worst_gap, g.value(x, time) - mode.objective->value(x, time));
    }
  }
  const bool ok = bounds_ok && err <= 1e-4 && worst_gap <= 1e-12;
  report(10, "time-varying weights in [0.5, 1.5]", ok,
         std::string("weights ") + (bounds_ok ? "within" : "outside") + " bounds, consensus error at T=100 " +
             sci(err) + ", envelope worst g - f " + sci(worst_gap) + " over 10^4 probes per mode");
}

// ---------------------------------------------------------------------------
// 11. Convex-kernel properties.

void criterion_kernel(Clock::time_point suite_start) {
  Rng rng(1111);
  std::vector<std::string> failed;

  Matrix basis(3, 1);
  basis << 1, 1, 1;
  const std::vector<ConvexSet> sets{
      ConvexSet::whole(3),
      ConvexSet::box(vec({-1, 0, 0.5}), vec({1, 2, 0.5})),
      ConvexSet::ball(vec({0.5, -0.5, 1}), 1.5),
      ConvexSet::halfspace(vec({1, -2, 0.5}), 0.3),
      ConvexSet::affine_from_basis(vec({1, 0, 0}), basis),
      ConvexSet::product({ConvexSet::box(vec({0}), vec({1})), ConvexSet::ball(vec({0, 0}), 1.0)}),
      ConvexSet::intersection({ConvexSet::ball(vec({0, 0, 0}), 1.0), ConvexSet::halfspace(vec({1, 1, 1}), 0.2)},
                              vec({0, 0, 0}))};
  double idem = 0, expand = -1e300, variational = -1e300;
  for (const auto& set : sets) {
    for (int s = 0; s < 1000; ++s) {
      const Vector x = rng.cube(3, 4.0), y = rng.cube(3, 4.0);
      const Vector px = project(set, x), py = project(set, y);
      idem = std::max(idem, (project(set, px) - px).norm());
      expand = std::max(expand, (px - py).norm() - (x - y).norm());
      const Vector z = project(set, rng.cube(3, 3.0));
      variational = std::max(variational, (x - px).dot(z - px));
    }
  }
  if (!(idem <= 1e-10)) failed.push_back("idempotence");
  if (!(expand <= 1e-9)) failed.push_back("nonexpansiveness");
  if (!(variational <= 1e-9)) failed.push_back("variational inequality");

  double hull = 0, cert = 1e300;
  for (int trial = 0; trial < 500; ++trial) {
    const auto dim = static_cast<Eigen::Index>(1 + trial % 5);
    SubdifferentialPolytope poly;
    const Vector shift = rng.cube(dim, 1.0);
    for (int g = 0; g <= trial % 9; ++g) poly.generators.push_back(shift + rng.cube(dim, 1.0));
    const auto r = solve_min_norm(poly);
    Vector combo = Vector::Zero(dim);
    double total = 0;
    for (std::size_t g = 0; g < poly.generators.size(); ++g) {
      const double w = r.weights[static_cast<Eigen::Index>(g)];
      if (w < -1e-12) hull = std::max(hull, -w);
      total += w;
      combo += w * poly.generators[g];
    }
    hull = std::max({hull, std::abs(total - 1), (combo - r.point).norm()});
    for (const auto& g : poly.generators) cert = std::min(cert, r.point.dot(g - r.point));
  }
  if (!(hull <= 1e-9)) failed.push_back("min-norm hull membership");
  if (!(cert >= -1e-9)) failed.push_back("min-norm optimality");

  // Prox: library certificate plus a direct check that no feasible
  // perturbation lowers the prox objective.
  const Layout layout{3, 1};
  const WeightedGraph path(3, {{0, 1, WeightProfile::constant(1)}, {1, 2, WeightProfile::constant(0.7)}});
  const ConvexSet box = ConvexSet::box(vec({-1, -0.5, -1}), vec({1, 1, 0.5}));
  std::vector<RestrictedFunction> proxed{
      {std::make_shared<const L1Norm>(3, 0.4), box},
      {std::make_shared<const ObjectiveDescriptor>(layout, PNormCoupling{1, false}, path), ConvexSet::whole(3)},
      {std::make_shared<const ObjectiveDescriptor>(layout, PNormCoupling{2, false}, path), box},
      {std::make_shared<const ObjectiveDescriptor>(layout, PNormCoupling{1, false}, path), box},
      {std::make_shared<const ObjectiveDescriptor>(layout, PNormCoupling{3, false}, path), box},
      {std::make_shared<const ObjectiveDescriptor>(layout, InfNormCoupling{}, path), ConvexSet::whole(3)},
      {std::make_shared<const QuadraticFunction>(QuadraticForm{Matrix::Identity(3, 3) * 2, vec({1, 0, -1}), 0}), box}};
  double prox_res = 0, prox_gain = -1e300;
  for (const auto& f : proxed) {
    for (int s = 0; s < 40; ++s) {
      const Vector x = rng.cube(3, 2.0);
      const double h = rng.uniform(0.05, 1.0);
      const Vector u = prox(f, h, x);
      prox_res = std::max(prox_res, prox_residual(f, h, x, u) / (1 + x.norm()));
      const double base = f.value(u) + (u - x).squaredNorm() / (2 * h);
      for (int d = 0; d < 20; ++d) {
        const Vector v = project(f.constraint, Vector(u + rng.cube(3, 1e-3)));
        prox_gain = std::max(prox_gain, base - (f.value(v) + (v - x).squaredNorm() / (2 * h)));
      }
    }
  }
  // Minimizers over C are fixed points.
  double fixed_gap = 0;
  for (std::size_t i = 0; i < proxed.size(); ++i) {
    const bool coupling = dynamic_cast<const ObjectiveDescriptor*>(proxed[i].base.get()) != nullptr;
    for (int s = 0; s < 10; ++s) {
      const Vector a = coupling ? Vector::Constant(3, rng.uniform(-0.5, 0.5))
                                : (i == 0 ? Vector::Zero(3) : vec({-0.5, 0, 0.5}));
      fixed_gap = std::max(fixed_gap, (prox(proxed[i], rng.uniform(0.05, 1.0), a) - a).norm());
    }
  }
  if (!(prox_res <= 1e-8)) failed.push_back("prox residual");
  if (!(fixed_gap <= 1e-8)) failed.push_back("prox fixed point");
  if (!(prox_gain <= 1e-10)) failed.push_back("prox optimality by perturbation");

  const Layout big{4, 2};
  const WeightedGraph path4(4, {{0, 1, WeightProfile::constant(1)},
                                {1, 2, WeightProfile::constant(1.5)},
                                {2, 3, WeightProfile::constant(2)}});
  std::vector<std::shared_ptr<const ObjectiveDescriptor>> smooth{
      std::make_shared<const ObjectiveDescriptor>(big, PNormCoupling{2, false}, path4),
      std::make_shared<const ObjectiveDescriptor>(big, PNormCoupling{3, false}, path4),
      std::make_shared<const ObjectiveDescriptor>(big, PNormCoupling{3, true}, path4),
      std::make_shared<const ObjectiveDescriptor>(big, InfNormSquaredCoupling{}, path4),
      std::make_shared<const ObjectiveDescriptor>(
          big, PNormCoupling{2, false}, path4,
          std::vector<LocalTerm>{HalfSquaredDistance{ConvexSet::ball(vec({0, 0}), 0.5)},
                                 quadratic_local_term(vec({1, -1}), vec({2, 0.5})), NoLocalTerm{},
                                 HalfSquaredDistance{ConvexSet::box(vec({0, 0}), vec({1, 1}))}})};
  double fd_rel = 0;
  for (const auto& f : smooth) {
    for (int s = 0; s < 200; ++s) {
      const Vector x = rng.cube(8, 2.0);
      const auto poly = f->subdifferential(x, 0.0);
      if (poly.generators.size() != 1) {
        fd_rel = 1e300;
        continue;
      }
      Vector fd(8);
      for (Eigen::Index i = 0; i < 8; ++i) {
        Vector e = Vector::Zero(8);
        e[i] = 1e-6;
        fd[i] = (f->value(x + e, 0) - f->value(x - e, 0)) / 2e-6;
      }
      fd_rel = std::max(fd_rel, (poly.generators[0] - fd).norm() / std::max(1.0, fd.norm()));
    }
  }
  if (!(fd_rel <= 1e-5)) failed.push_back("finite differences");

  const double total = seconds_since(suite_start);
  if (!(total < 60.0)) failed.push_back("runtime");
  std::string detail = "idempotence " + sci(idem) + ", expansion " + sci(expand) + ", variational " +
                       sci(variational) + ", hull residual " + sci(hull) + ", min-norm certificate " + sci(cert) +
                       ", prox residual " + sci(prox_res) + ", prox perturbation gain " + sci(prox_gain) + ", prox fixed-point gap " + sci(fixed_gap) +
                       ", FD relative error " + sci(fd_rel) + ", acceptance runtime " + fixed(total, 1) +
                       " s (limit 60 s)";
  for (const auto& f : failed) detail += "; failed " + f;
  report(11, "convex-kernel properties", failed.empty(), detail);
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const std::vector<std::pair<int, std::function<void()>>> criteria{
      {1, criterion_linear_oracle},  {2, criterion_example3},        {3, criterion_lyapunov_suite},
      {4, criterion_pair_suite},     {5, criterion_conservation},    {6, criterion_set_intersection},
      {7, criterion_persistent_mode},      {8, criterion_rotation},        {9, criterion_demipositivity},
      {10, criterion_time_varying},  {11, [&] { criterion_kernel(start); }}};
  for (const auto& [id, check] : criteria) {
    try {
      check();
    } catch (const std::exception& e) {
      report(id, "criterion", false, std::string("threw: ") + e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
