#include "switchflow/objective.hpp"

#include "switchflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace switchflow {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kTieRelTol = 1e-12;

double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

double coupling_value(const Coupling& coupling, const Vector& d) {
  return std::visit(
      Overloaded{
          [](const NoCoupling&) { return 0.0; },
          [&](const PNormCoupling& c) {
            if (c.squared) {
              const double norm = c.p == 1.0 ? d.lpNorm<1>()
                                             : std::pow(d.array().abs().pow(c.p).sum(), 1.0 / c.p);
              return norm * norm;
            }
            return d.array().abs().pow(c.p).sum();
          },
          [&](const InfNormSquaredCoupling&) {
            const double m = d.lpNorm<Eigen::Infinity>();
            return m * m;
          },
          [&](const InfNormCoupling&) { return d.lpNorm<Eigen::Infinity>(); },
      },
      coupling);
}

// Vertices of the product of sign intervals: sign(d_l) off ties, ±1 at ties.
std::vector<Vector> sign_box_vertices(const Vector& d, double tie_tol) {
  std::vector<Eigen::Index> ties;
  Vector base(d.size());
  for (Eigen::Index l = 0; l < d.size(); ++l) {
    if (std::abs(d[l]) <= tie_tol) {
      base[l] = 0.0;
      ties.push_back(l);
    } else {
      base[l] = sign(d[l]);
    }
  }
  std::vector<Vector> out;
  const std::size_t used = std::min<std::size_t>(ties.size(), 8);
  for (std::size_t mask = 0; mask < (std::size_t{1} << used); ++mask) {
    Vector g = base;
    for (std::size_t b = 0; b < used; ++b) g[ties[b]] = (mask >> b & 1U) ? 1.0 : -1.0;
    out.push_back(std::move(g));
  }
  return out;
}

// Generators of ∂φ(d).
std::vector<Vector> coupling_subgradients(const Coupling& coupling, const Vector& d,
                                          double tie_tol) {
  const auto m = d.size();
  return std::visit(
      Overloaded{
          [&](const NoCoupling&) -> std::vector<Vector> { return {Vector::Zero(m)}; },
          [&](const PNormCoupling& c) -> std::vector<Vector> {
            if (c.p == 1.0) {
              auto verts = sign_box_vertices(d, tie_tol);
              if (c.squared) {
                const double scale = 2.0 * d.lpNorm<1>();
                if (scale == 0.0) return {Vector::Zero(m)};
                for (auto& v : verts) v *= scale;
              }
              return verts;
            }
            Vector g(m);
            for (Eigen::Index l = 0; l < m; ++l) {
              g[l] = c.p * std::pow(std::abs(d[l]), c.p - 1.0) * sign(d[l]);
            }
            if (c.squared) {
              const double norm = std::pow(d.array().abs().pow(c.p).sum(), 1.0 / c.p);
              if (norm == 0.0) return {Vector::Zero(m)};
              // ∇‖d‖_p² = 2‖d‖_p^{2-p} |d|^{p-1} sign(d) = (2/p) ‖d‖_p^{2-p} ∇‖d‖_p^p
              g *= (2.0 / c.p) * std::pow(norm, 2.0 - c.p);
            }
            return {g};
          },
          [&](const InfNormSquaredCoupling&) -> std::vector<Vector> {
            const double top = d.lpNorm<Eigen::Infinity>();
            if (top <= tie_tol) return {Vector::Zero(m)};
            std::vector<Vector> out;
            for (Eigen::Index l = 0; l < m; ++l) {
              if (std::abs(d[l]) >= top - kTieRelTol * top) {
                out.push_back(2.0 * top * sign(d[l]) * Vector::Unit(m, l));
              }
            }
            return out;
          },
          [&](const InfNormCoupling&) -> std::vector<Vector> {
            const double top = d.lpNorm<Eigen::Infinity>();
            std::vector<Vector> out;
            if (top <= tie_tol) {
              for (Eigen::Index l = 0; l < m; ++l) {
                out.push_back(Vector::Unit(m, l));
                out.push_back(-Vector::Unit(m, l));
              }
              return out;
            }
            for (Eigen::Index l = 0; l < m; ++l) {
              if (std::abs(d[l]) >= top - kTieRelTol * top) {
                out.push_back(sign(d[l]) * Vector::Unit(m, l));
              }
            }
            return out;
          },
      },
      coupling);
}

bool coupling_is_differentiable(const Coupling& coupling) {
  return std::visit(Overloaded{
                        [](const NoCoupling&) { return true; },
                        [](const PNormCoupling& c) { return c.p > 1.0; },
                        [](const InfNormSquaredCoupling&) { return false; },
                        [](const InfNormCoupling&) { return false; },
                    },
                    coupling);
}

bool coupling_is_quadratic(const Coupling& coupling) {
  if (std::holds_alternative<NoCoupling>(coupling)) return true;
  const auto* c = std::get_if<PNormCoupling>(&coupling);
  return c != nullptr && c->p == 2.0;
}

// One coordinate of the prox of Σ_e w_e |u_i - u_j| on a graph:
// min_u Σ_e w_e |u_i - u_j| + |u - z|² / (2h). Dual projected gradient
// (FISTA) over the box |y_e| <= w_e with u = z - h Dᵀy, then an active-set
// solve: edges with interior multipliers merge their endpoints, saturated
// edges contribute fixed signs. The refined u is accepted only if multipliers
// certifying it exist.
struct TvEdge {
  std::size_t i;
  std::size_t j;
  double w;
};

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = i;
  }
  std::size_t find(std::size_t i) {
    while (parent_[i] != i) i = parent_[i] = parent_[parent_[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

Vector tv_apply_transpose(const std::vector<TvEdge>& edges, const Vector& y, std::size_t k) {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(k));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    out[static_cast<Eigen::Index>(edges[e].i)] += y[static_cast<Eigen::Index>(e)];
    out[static_cast<Eigen::Index>(edges[e].j)] -= y[static_cast<Eigen::Index>(e)];
  }
  return out;
}

// `merge[e]` marks edges whose endpoints fuse; the others carry sign[e] w_e.
std::optional<Vector> tv_refine(const std::vector<TvEdge>& edges, const Vector& z, double h,
                                const Vector& y, const std::vector<bool>& merge,
                                const std::vector<double>& sign) {
  const std::size_t k = static_cast<std::size_t>(z.size());
  UnionFind uf(k);
  Vector fixed = Vector::Zero(static_cast<Eigen::Index>(edges.size()));
  std::vector<std::size_t> interior;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (merge[e]) {
      uf.unite(edges[e].i, edges[e].j);
      interior.push_back(e);
    } else {
      fixed[static_cast<Eigen::Index>(e)] = sign[e] * edges[e].w;
    }
  }
  const Vector shifted = z - h * tv_apply_transpose(edges, fixed, k);
  std::vector<double> sum(k, 0.0);
  std::vector<double> count(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    sum[uf.find(i)] += shifted[static_cast<Eigen::Index>(i)];
    count[uf.find(i)] += 1.0;
  }
  Vector u(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) u[static_cast<Eigen::Index>(i)] = sum[uf.find(i)] / count[uf.find(i)];

  const double scale = 1e-12 * (1.0 + z.lpNorm<Eigen::Infinity>());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double fe = fixed[static_cast<Eigen::Index>(e)];
    if (fe == 0.0) continue;
    const double d = u[static_cast<Eigen::Index>(edges[e].i)] - u[static_cast<Eigen::Index>(edges[e].j)];
    if (fe * d < -scale) return std::nullopt;
  }
  if (interior.empty()) return u;
  // Interior multipliers must reproduce the remaining optimality residual.
  const Vector r = (z - u) / h - tv_apply_transpose(edges, fixed, k);
  Matrix Dt = Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(interior.size()));
  for (std::size_t c = 0; c < interior.size(); ++c) {
    Dt(static_cast<Eigen::Index>(edges[interior[c]].i), static_cast<Eigen::Index>(c)) = 1.0;
    Dt(static_cast<Eigen::Index>(edges[interior[c]].j), static_cast<Eigen::Index>(c)) = -1.0;
  }
  // Bounded multipliers on a fused cluster with cycles form a polytope; find
  // one by projected gradient on ½|Dt y - r|² over the box, from the dual
  // iterate.
  const auto n_int = static_cast<Eigen::Index>(interior.size());
  Vector yi(n_int);
  Vector bound(n_int);
  for (Eigen::Index c = 0; c < n_int; ++c) {
    bound[c] = edges[interior[static_cast<std::size_t>(c)]].w;
    yi[c] = std::clamp(y[static_cast<Eigen::Index>(interior[static_cast<std::size_t>(c)])], -bound[c], bound[c]);
  }
  const double target = 1e-10 * (1.0 + r.norm());
  const double step = 1.0 / std::max(1.0, (Dt.transpose() * Dt).eigenvalues().real().maxCoeff());
  for (int it = 0; it < 20000; ++it) {
    const Vector residual = Dt * yi - r;
    if (residual.norm() <= target) return u;
    yi -= step * (Dt.transpose() * residual);
    yi = yi.cwiseMax(-bound).cwiseMin(bound);
  }
  return std::nullopt;
}

std::optional<Vector> tv_prox(const std::vector<TvEdge>& edges, const Vector& z, double h) {
  if (edges.empty()) return z;
  const std::size_t k = static_cast<std::size_t>(z.size());
  std::vector<double> degree(k, 0.0);
  for (const auto& e : edges) {
    degree[e.i] += 1.0;
    degree[e.j] += 1.0;
  }
  // λ_max(D Dᵀ) <= 2 max degree
  const double lipschitz = 2.0 * h * *std::max_element(degree.begin(), degree.end());
  const auto E = static_cast<Eigen::Index>(edges.size());
  auto clip = [&](Vector v) {
    for (Eigen::Index e = 0; e < E; ++e) v[e] = std::clamp(v[e], -edges[static_cast<std::size_t>(e)].w, edges[static_cast<std::size_t>(e)].w);
    return v;
  };
  auto primal = [&](const Vector& y) -> Vector { return z - h * tv_apply_transpose(edges, y, k); };
  auto dual_step = [&](const Vector& v) {
    const Vector u = primal(v);
    Vector grad(E);
    for (Eigen::Index e = 0; e < E; ++e) {
      const auto& ed = edges[static_cast<std::size_t>(e)];
      grad[e] = u[static_cast<Eigen::Index>(ed.i)] - u[static_cast<Eigen::Index>(ed.j)];
    }
    return clip(v + grad / lipschitz);
  };
  Vector y = Vector::Zero(E);
  Vector v = y;
  double momentum = 1.0;
  for (int it = 1; it <= 20000; ++it) {
    const Vector next = dual_step(v);
    const double m_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    v = next + ((momentum - 1.0) / m_next) * (next - y);
    y = next;
    momentum = m_next;
    if (it % 25 != 0) continue;
    // Candidate active sets from the multipliers and from the primal gaps;
    // cycles in fused clusters leave multipliers at the bound, so the gaps
    // decide those.
    const Vector u = primal(y);
    const double scale = 1.0 + z.lpNorm<Eigen::Infinity>();
    std::vector<bool> merge(edges.size());
    std::vector<double> sign(edges.size());
    for (double tol : {1e-6, 1e-9, 1e-3}) {
      for (std::size_t e = 0; e < edges.size(); ++e) {
        const double ye = y[static_cast<Eigen::Index>(e)];
        merge[e] = std::abs(ye) < edges[e].w * (1.0 - tol);
        sign[e] = ye > 0 ? 1.0 : -1.0;
      }
      if (auto r = tv_refine(edges, z, h, y, merge, sign)) return r;
      for (std::size_t e = 0; e < edges.size(); ++e) {
        const double d = u[static_cast<Eigen::Index>(edges[e].i)] - u[static_cast<Eigen::Index>(edges[e].j)];
        merge[e] = std::abs(d) <= tol * scale;
        sign[e] = d > 0 ? 1.0 : -1.0;
      }
      if (auto r = tv_refine(edges, z, h, y, merge, sign)) return r;
    }
  }
  return std::nullopt;
}

}  // namespace

SmoothLocalTerm quadratic_local_term(const Vector& center, const Vector& weights) {
  if (center.size() != weights.size() || !(weights.array() > 0).all()) {
    fail(ErrorKind::InvalidArgument, "quadratic local term needs positive weights per coordinate");
  }
  SmoothLocalTerm term;
  term.value = [center, weights](const Vector& x) {
    return 0.5 * (weights.array() * (x - center).array().square()).sum();
  };
  term.gradient = [center, weights](const Vector& x) -> Vector {
    return (weights.array() * (x - center).array()).matrix();
  };
  term.zero_set = ConvexSet::box(center, center);
  const Matrix H = weights.asDiagonal();
  term.quadratic = QuadraticForm{H, -(weights.array() * center.array()).matrix(),
                                 0.5 * (weights.array() * center.array().square()).sum()};
  return term;
}

ObjectiveDescriptor::ObjectiveDescriptor(Layout layout, Coupling coupling, WeightedGraph graph,
                                         std::vector<LocalTerm> local_terms)
    : layout_(layout),
      coupling_(std::move(coupling)),
      graph_(std::move(graph)),
      local_terms_(std::move(local_terms)) {
  if (graph_.agents() != layout_.agents) {
    fail(ErrorKind::LayoutMismatch, "graph has " + std::to_string(graph_.agents()) +
                                        " agents, layout has " + std::to_string(layout_.agents));
  }
  if (local_terms_.empty()) local_terms_.assign(layout_.agents, NoLocalTerm{});
  if (local_terms_.size() != layout_.agents) {
    fail(ErrorKind::LayoutMismatch, "one local term per agent required");
  }
  if (const auto* c = std::get_if<PNormCoupling>(&coupling_); c && !(c->p >= 1.0)) {
    fail(ErrorKind::InvalidArgument, "p-norm coupling needs p >= 1");
  }
  for (const auto& term : local_terms_) {
    if (const auto* h = std::get_if<HalfSquaredDistance>(&term); h && h->set.dim() != layout_.dim) {
      fail(ErrorKind::LayoutMismatch, "local set dimension differs from agent dimension");
    }
  }
}

void ObjectiveDescriptor::require_layout(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != layout_.size()) {
    fail(ErrorKind::LayoutMismatch, "state of size " + std::to_string(x.size()) +
                                        ", objective expects " + std::to_string(layout_.size()));
  }
}

bool ObjectiveDescriptor::has_local_terms() const {
  return std::any_of(local_terms_.begin(), local_terms_.end(), [](const LocalTerm& t) {
    return !std::holds_alternative<NoLocalTerm>(t);
  });
}

double ObjectiveDescriptor::value(const Vector& x, double t) const {
  require_layout(x);
  const auto m = static_cast<Eigen::Index>(layout_.dim);
  double total = 0.0;
  for (std::size_t i = 0; i < layout_.agents; ++i) {
    const Vector xi = x.segment(static_cast<Eigen::Index>(i) * m, m);
    total += std::visit(Overloaded{
                            [](const NoLocalTerm&) { return 0.0; },
                            [&](const SmoothLocalTerm& s) { return s.value(xi); },
                            [&](const HalfSquaredDistance& h) {
                              const double dist = distance(h.set, xi);
                              return 0.5 * dist * dist;
                            },
                        },
                        local_terms_[i]);
  }
  for (const auto& e : graph_.edges()) {
    const Vector d = x.segment(static_cast<Eigen::Index>(e.i) * m, m) -
                     x.segment(static_cast<Eigen::Index>(e.j) * m, m);
    // ¼ Σ over ordered pairs counts each undirected edge twice.
    total += 0.5 * e.weight.at(t) * coupling_value(coupling_, d);
  }
  return total;
}

SubdifferentialPolytope ObjectiveDescriptor::subdifferential(const Vector& x, double t) const {
  require_layout(x);
  const auto n = x.size();
  const auto m = static_cast<Eigen::Index>(layout_.dim);
  Vector smooth = Vector::Zero(n);
  for (std::size_t i = 0; i < layout_.agents; ++i) {
    const auto off = static_cast<Eigen::Index>(i) * m;
    const Vector xi = x.segment(off, m);
    std::visit(Overloaded{
                   [](const NoLocalTerm&) {},
                   [&](const SmoothLocalTerm& s) { smooth.segment(off, m) += s.gradient(xi); },
                   [&](const HalfSquaredDistance& h) {
                     smooth.segment(off, m) += xi - project(h.set, xi);
                   },
               },
               local_terms_[i]);
  }

  const double tie_tol = kTieRelTol * (1.0 + x.lpNorm<Eigen::Infinity>());
  std::vector<std::vector<Vector>> edge_sets;
  for (const auto& e : graph_.edges()) {
    const auto oi = static_cast<Eigen::Index>(e.i) * m;
    const auto oj = static_cast<Eigen::Index>(e.j) * m;
    const Vector d = x.segment(oi, m) - x.segment(oj, m);
    const double w = 0.5 * e.weight.at(t);
    auto local = coupling_subgradients(coupling_, d, tie_tol);
    std::vector<Vector> lifted;
    lifted.reserve(local.size());
    for (const auto& s : local) {
      Vector g = Vector::Zero(n);
      g.segment(oi, m) = w * s;
      g.segment(oj, m) = -w * s;
      lifted.push_back(std::move(g));
    }
    if (lifted.size() == 1) {
      smooth += lifted.front();
    } else {
      edge_sets.push_back(std::move(lifted));
    }
  }

  SubdifferentialPolytope poly;
  double combos = 1.0;
  for (const auto& s : edge_sets) combos *= static_cast<double>(s.size());
  if (combos <= static_cast<double>(kMaxGenerators)) {
    poly.generators.push_back(smooth);
    for (const auto& s : edge_sets) {
      std::vector<Vector> next;
      next.reserve(poly.generators.size() * s.size());
      for (const auto& g : poly.generators) {
        for (const auto& h : s) next.push_back(g + h);
      }
      poly.generators = std::move(next);
    }
    return poly;
  }

  // Above the cap: the sum of per-edge min-norm points plus random vertex sums,
  // all inside the true Minkowski sum.
  Vector centre = smooth;
  for (const auto& s : edge_sets) centre += min_norm_point(SubdifferentialPolytope{s});
  poly.generators.push_back(centre);
  std::mt19937_64 rng(0x5ca1ab1eULL);
  while (poly.generators.size() < kMaxGenerators) {
    Vector g = smooth;
    for (const auto& s : edge_sets) {
      std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
      g += s[pick(rng)];
    }
    poly.generators.push_back(std::move(g));
  }
  return poly;
}

std::optional<QuadraticForm> ObjectiveDescriptor::quadratic_form(double t) const {
  if (!coupling_is_quadratic(coupling_)) return std::nullopt;
  const auto n = static_cast<Eigen::Index>(layout_.size());
  const auto m = static_cast<Eigen::Index>(layout_.dim);
  QuadraticForm form{Matrix::Zero(n, n), Vector::Zero(n), 0.0};
  if (!std::holds_alternative<NoCoupling>(coupling_)) {
    const Matrix L = graph_.laplacian(t);
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
      for (Eigen::Index j = 0; j < L.cols(); ++j) {
        form.hessian.block(i * m, j * m, m, m) = L(i, j) * Matrix::Identity(m, m);
      }
    }
  }
  for (std::size_t i = 0; i < layout_.agents; ++i) {
    const auto off = static_cast<Eigen::Index>(i) * m;
    const auto& term = local_terms_[i];
    if (std::holds_alternative<NoLocalTerm>(term)) continue;
    const auto* s = std::get_if<SmoothLocalTerm>(&term);
    if (!s || !s->quadratic) return std::nullopt;
    form.hessian.block(off, off, m, m) += s->quadratic->hessian;
    form.linear.segment(off, m) += s->quadratic->linear;
    form.constant += s->quadratic->constant;
  }
  return form;
}

bool ObjectiveDescriptor::is_differentiable() const {
  return coupling_is_differentiable(coupling_) || graph_.edges().empty();
}

std::optional<Vector> ObjectiveDescriptor::closed_form_prox(double h, const Vector& x,
                                                            double t) const {
  const auto* pnorm = std::get_if<PNormCoupling>(&coupling_);
  if (!pnorm || pnorm->p != 1.0 || pnorm->squared || has_local_terms()) return std::nullopt;
  require_layout(x);
  std::vector<TvEdge> edges;
  for (const auto& e : graph_.edges()) {
    const double w = 0.5 * e.weight.at(t);
    if (w > 0) edges.push_back({e.i, e.j, w});
  }
  // ‖·‖_1 separates over coordinates.
  const auto m = static_cast<Eigen::Index>(layout_.dim);
  const auto k = static_cast<Eigen::Index>(layout_.agents);
  Vector out(x.size());
  for (Eigen::Index l = 0; l < m; ++l) {
    Vector z(k);
    for (Eigen::Index i = 0; i < k; ++i) z[i] = x[i * m + l];
    const auto u = tv_prox(edges, z, h);
    if (!u) return std::nullopt;
    for (Eigen::Index i = 0; i < k; ++i) out[i * m + l] = (*u)[i];
  }
  return out;
}

ObjectiveDescriptor ObjectiveDescriptor::envelope() const {
  const double lower = graph_.weight_bounds().lower;
  std::vector<Edge> edges;
  for (const auto& e : graph_.edges()) edges.push_back({e.i, e.j, WeightProfile::constant(lower)});
  return ObjectiveDescriptor(layout_, coupling_, WeightedGraph(graph_.agents(), std::move(edges)),
                             local_terms_);
}

double evaluate(const ObjectiveDescriptor& objective, const StateVector& x, double t) {
  if (!(x.layout() == objective.layout())) fail(ErrorKind::LayoutMismatch, "layout differs");
  return objective.value(x.values(), t);
}

SubdifferentialPolytope subdifferential(const ObjectiveDescriptor& objective, const StateVector& x,
                                        double t) {
  if (!(x.layout() == objective.layout())) fail(ErrorKind::LayoutMismatch, "layout differs");
  return objective.subdifferential(x.values(), t);
}

ModeDescriptor::ModeDescriptor(std::shared_ptr<const ObjectiveDescriptor> obj,
                               std::optional<ConvexSet> set)
    : objective(std::move(obj)),
      constraint(set ? *set : ConvexSet::whole(objective ? objective->dim() : 0)) {
  if (!objective) fail(ErrorKind::InvalidArgument, "mode without objective");
  if (constraint.dim() != objective->dim()) {
    fail(ErrorKind::LayoutMismatch, "constraint dimension differs from state dimension");
  }
}

Vector dynamics_rhs(const ModeDescriptor& mode, const Vector& x, double t) {
  const Vector g = min_norm_point(mode.objective->subdifferential(x, t));
  return tangent_project(mode.constraint, x, Vector(-g));
}

bool union_graph_connected(std::span<const ModeDescriptor> modes) {
  std::vector<WeightedGraph> graphs;
  for (const auto& m : modes) graphs.push_back(m.objective->graph());
  return union_connected(graphs);
}

double consensus_error(const StateVector& x) {
  const Vector mean = x.agent_mean();
  double sq = 0.0;
  for (std::size_t i = 0; i < x.layout().agents; ++i) sq += (x.block(i) - mean).squaredNorm();
  return std::sqrt(sq);
}

ConvexSet component_consensus_subspace(const Layout& layout, const WeightedGraph& graph) {
  const auto n = static_cast<Eigen::Index>(layout.size());
  const auto m = static_cast<Eigen::Index>(layout.dim);
  const auto comps = graph.components();
  Matrix basis = Matrix::Zero(n, static_cast<Eigen::Index>(comps.size()) * m);
  Eigen::Index col = 0;
  for (const auto& comp : comps) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(comp.size()));
    for (Eigen::Index l = 0; l < m; ++l, ++col) {
      for (auto agent : comp) basis(static_cast<Eigen::Index>(agent) * m + l, col) = scale;
    }
  }
  return ConvexSet::affine_from_basis(Vector::Zero(n), basis);
}

ConvexSet consensus_subspace(const Layout& layout) {
  std::vector<Edge> path;
  for (std::size_t i = 0; i + 1 < layout.agents; ++i) {
    path.push_back({i, i + 1, WeightProfile::constant(1.0)});
  }
  return component_consensus_subspace(layout, WeightedGraph(layout.agents, std::move(path)));
}

Vector MinimizerSet::nearest(const Vector& x) const {
  if (set) return project(*set, x);
  if (samples.empty()) fail(ErrorKind::OracleUnavailable, "no minimizer samples");
  std::size_t best = 0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if ((samples[i] - x).norm() < (samples[best] - x).norm()) best = i;
  }
  return samples[best];
}

namespace {

// Sets on which every term of f vanishes, when known.
std::optional<std::vector<ConvexSet>> zero_level_parts(const ModeDescriptor& mode) {
  const auto& obj = *mode.objective;
  const auto& layout = obj.layout();
  std::vector<ConvexSet> parts;
  if (!std::holds_alternative<NoCoupling>(obj.coupling()) && !obj.graph().edges().empty()) {
    parts.push_back(component_consensus_subspace(layout, obj.graph()));
  }
  bool any_local = false;
  std::vector<ConvexSet> local;
  for (const auto& term : obj.local_terms()) {
    if (std::holds_alternative<NoLocalTerm>(term)) {
      local.push_back(ConvexSet::whole(layout.dim));
    } else if (const auto* h = std::get_if<HalfSquaredDistance>(&term)) {
      local.push_back(h->set);
      any_local = true;
    } else {
      const auto& s = std::get<SmoothLocalTerm>(term);
      if (!s.zero_set) return std::nullopt;
      local.push_back(*s.zero_set);
      any_local = true;
    }
  }
  if (any_local) parts.push_back(ConvexSet::product(std::move(local)));
  if (!mode.constraint.is_whole_space()) parts.push_back(mode.constraint);
  return parts;
}

}  // namespace

MinimizerSet argmin_oracle(const ModeDescriptor& mode, std::span<const Vector> seeds) {
  const auto& obj = *mode.objective;
  const auto n = static_cast<Eigen::Index>(obj.dim());
  std::vector<Vector> starts(seeds.begin(), seeds.end());
  if (starts.empty()) starts.push_back(Vector::Zero(n));

  if (auto parts = zero_level_parts(mode)) {
    MinimizerSet out;
    if (parts->empty()) {
      out.set = ConvexSet::whole(obj.dim());
      out.samples = starts;
      out.exact = true;
      return out;
    }
    std::vector<Projector> projectors;
    for (const auto& p : *parts) {
      projectors.emplace_back([&p](const Vector& z) { return project(p, z); });
    }
    try {
      const Vector candidate = dykstra_project(projectors, starts.front());
      // Unsquared couplings grow linearly off their zero set, so the value test
      // uses the same scale as membership.
      bool feasible = obj.value(candidate, 0.0) <= membership_tolerance(candidate);
      for (const auto& p : *parts) feasible = feasible && contains(p, candidate);
      if (feasible) {
        out.min_value = 0.0;
        out.set = parts->size() == 1 ? parts->front()
                                     : ConvexSet::intersection(*parts, candidate);
        out.samples.push_back(candidate);
        for (std::size_t s = 1; s < starts.size(); ++s) {
          out.samples.push_back(project(*out.set, starts[s]));
        }
        out.exact = true;
        return out;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonConvergence) throw;
    }
  }

  const bool quadratic = obj.quadratic_form(0.0).has_value();
  if (!(obj.is_differentiable() && (n <= 6 || quadratic))) {
    fail(ErrorKind::OracleUnavailable, "no minimizer oracle for this nonsmooth instance");
  }
  // Proximal-point iteration: fixed points of prox are minimizers.
  const auto restricted = mode.restricted();
  Vector u = project(mode.constraint, starts.front());
  for (int it = 0; it < 20000; ++it) {
    const Vector next = prox(restricted, 1.0, u, 0.0);
    const double change = (next - u).norm();
    u = next;
    if (change <= 1e-13 * (1.0 + u.norm())) break;
  }
  const Vector g = min_norm_point(obj.subdifferential(u, 0.0));
  if (tangent_project(mode.constraint, u, Vector(-g)).norm() > 1e-8 * (1.0 + g.norm())) {
    fail(ErrorKind::OracleUnavailable, "proximal-point iteration did not reach a minimizer");
  }
  MinimizerSet out;
  out.min_value = obj.value(u, 0.0);
  out.samples.push_back(u);
  out.exact = false;
  return out;
}

}  // namespace switchflow
