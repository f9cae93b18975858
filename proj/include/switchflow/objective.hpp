#pragma once

#include "switchflow/convex_set.hpp"
#include "switchflow/function.hpp"
#include "switchflow/graph.hpp"
#include "switchflow/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace switchflow {

struct NoCoupling {};
// ‖d‖_p^p, or ‖d‖_p² when squared.
struct PNormCoupling {
  double p = 2.0;
  bool squared = false;
};
struct InfNormSquaredCoupling {};
struct InfNormCoupling {};

using Coupling = std::variant<NoCoupling, PNormCoupling, InfNormSquaredCoupling, InfNormCoupling>;

struct NoLocalTerm {};

// Differentiable convex g_i on R^m.
struct SmoothLocalTerm {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  // When present: g_i >= 0 and g_i vanishes exactly on this set.
  std::optional<ConvexSet> zero_set;
  // When present: g_i is exactly this quadratic.
  std::optional<QuadraticForm> quadratic;
};

// ½ (x_i - c)ᵀ diag(w) (x_i - c), w > 0.
SmoothLocalTerm quadratic_local_term(const Vector& center, const Vector& weights);

// ½ dist(x_i, D_i)², gradient x_i - P_D(x_i).
struct HalfSquaredDistance {
  ConvexSet set;
};

using LocalTerm = std::variant<NoLocalTerm, SmoothLocalTerm, HalfSquaredDistance>;

// f(x, t) = Σ_i g_i(x_i) + ¼ Σ_{i,j} a_ij(t) φ(x_i - x_j)
class ObjectiveDescriptor final : public ConvexFunction {
 public:
  ObjectiveDescriptor(Layout layout, Coupling coupling, WeightedGraph graph,
                      std::vector<LocalTerm> local_terms = {});

  const Layout& layout() const { return layout_; }
  const Coupling& coupling() const { return coupling_; }
  const WeightedGraph& graph() const { return graph_; }
  const std::vector<LocalTerm>& local_terms() const { return local_terms_; }

  std::size_t dim() const override { return layout_.size(); }
  double value(const Vector& x, double t) const override;
  SubdifferentialPolytope subdifferential(const Vector& x, double t) const override;
  std::optional<QuadraticForm> quadratic_form(double t) const override;
  // Certified prox for the pure ‖·‖_1 coupling; nullopt otherwise.
  std::optional<Vector> closed_form_prox(double h, const Vector& x, double t) const override;
  bool is_differentiable() const override;

  bool has_local_terms() const;
  bool is_time_varying() const { return graph_.is_time_varying(); }
  // Same coupling and local terms with constant weight a_* on every active
  // edge; lies below f(·, t) for all t.
  ObjectiveDescriptor envelope() const;

  static constexpr std::size_t kMaxGenerators = 256;

 private:
  void require_layout(const Vector& x) const;

  Layout layout_;
  Coupling coupling_;
  WeightedGraph graph_;
  std::vector<LocalTerm> local_terms_;
};

double evaluate(const ObjectiveDescriptor& objective, const StateVector& x, double t = 0.0);
SubdifferentialPolytope subdifferential(const ObjectiveDescriptor& objective, const StateVector& x,
                                        double t = 0.0);

// M_q = ∂f_q + N_{C_q}
struct ModeDescriptor {
  std::shared_ptr<const ObjectiveDescriptor> objective;
  ConvexSet constraint;

  ModeDescriptor(std::shared_ptr<const ObjectiveDescriptor> objective,
                 std::optional<ConvexSet> constraint = std::nullopt);

  const Layout& layout() const { return objective->layout(); }
  RestrictedFunction restricted() const { return {objective, constraint}; }
};

// -m(∂f_q(x) + N_{C_q}(x)), realized as P_{T_C(x)}(-g*) with g* the min-norm
// subgradient. Throws PointOutsideSet.
Vector dynamics_rhs(const ModeDescriptor& mode, const Vector& x, double t = 0.0);

bool union_graph_connected(std::span<const ModeDescriptor> modes);

// Distance to the consensus subspace x_1 = ... = x_k.
double consensus_error(const StateVector& x);

// {x : x_i = x_j whenever i, j share a component of the graph}
ConvexSet component_consensus_subspace(const Layout& layout, const WeightedGraph& graph);

// The consensus subspace itself, as an affine descriptor.
ConvexSet consensus_subspace(const Layout& layout);

struct MinimizerSet {
  double min_value = 0.0;
  // Exact description of A_q when available.
  std::optional<ConvexSet> set;
  std::vector<Vector> samples;
  bool exact = false;

  // Projection onto A_q when exact, otherwise the closest sample.
  Vector nearest(const Vector& x) const;
};

// Representative minimizers of f_q over C_q. Exact for objectives whose terms
// vanish on a known set (couplings, ½dist² terms, quadratics with declared
// zero set) when those sets meet; otherwise a certified proximal-point fixed
// point for differentiable instances with n <= 6 or quadratic objectives.
// Throws OracleUnavailable.
MinimizerSet argmin_oracle(const ModeDescriptor& mode, std::span<const Vector> seeds = {});

}  // namespace switchflow
