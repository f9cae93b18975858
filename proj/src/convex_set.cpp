#include "switchflow/convex_set.hpp"

#include "switchflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace switchflow {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t variant_dim(const ConvexSet::Variant& v) {
  return std::visit(
      Overloaded{
          [](const WholeSpace& s) { return s.dim; },
          [](const Box& s) { return static_cast<std::size_t>(s.lower.size()); },
          [](const Ball& s) { return static_cast<std::size_t>(s.center.size()); },
          [](const Halfspace& s) { return static_cast<std::size_t>(s.normal.size()); },
          [](const AffineSubspace& s) { return static_cast<std::size_t>(s.point.size()); },
          [](const Product& s) {
            std::size_t n = 0;
            for (const auto& p : s.parts) n += p.dim();
            return n;
          },
          [](const Intersection& s) { return s.parts.empty() ? 0 : s.parts.front().dim(); },
      },
      v);
}

void require_dim(const ConvexSet& set, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != set.dim()) {
    fail(ErrorKind::LayoutMismatch, "vector of size " + std::to_string(x.size()) +
                                        " used with set of dimension " +
                                        std::to_string(set.dim()));
  }
}

void require_inside(const ConvexSet& set, const Vector& x) {
  require_dim(set, x);
  const double d = distance(set, x);
  if (d > membership_tolerance(x)) {
    fail(ErrorKind::PointOutsideSet, "point at distance " + std::to_string(d) + " from set");
  }
}

template <class F>
Vector blockwise(const Product& prod, const Vector& x, F&& f) {
  Vector out(x.size());
  Eigen::Index offset = 0;
  for (const auto& part : prod.parts) {
    const auto len = static_cast<Eigen::Index>(part.dim());
    out.segment(offset, len) = f(part, Vector(x.segment(offset, len)), offset);
    offset += len;
  }
  return out;
}

// Fixed-seed unit directions for probing sets without an exact cone.
std::vector<Vector> probe_directions(Eigen::Index n) {
  std::vector<Vector> dirs;
  for (Eigen::Index i = 0; i < n; ++i) {
    dirs.push_back(Vector::Unit(n, i));
    dirs.push_back(-Vector::Unit(n, i));
  }
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> normal;
  for (int s = 0; s < 64; ++s) {
    Vector d(n);
    for (Eigen::Index i = 0; i < n; ++i) d[i] = normal(rng);
    const double len = d.norm();
    if (len > 0) dirs.push_back(d / len);
  }
  return dirs;
}

bool halfspace_active(const Vector& normal, double offset, const Vector& x) {
  return normal.dot(x) >= offset - membership_tolerance(x) * normal.norm();
}

Vector remove_outward(const Vector& v, const Vector& normal) {
  const double s = v.dot(normal);
  if (s <= 0) return v;
  return v - (s / normal.squaredNorm()) * normal;
}

}  // namespace

ConvexSet::ConvexSet(Variant v)
    : node_(std::make_shared<const Variant>(std::move(v))), dim_(variant_dim(*node_)) {}

ConvexSet ConvexSet::whole(std::size_t dim) { return ConvexSet(WholeSpace{dim}); }

ConvexSet ConvexSet::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size()) fail(ErrorKind::InvalidArgument, "box bounds differ in size");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower[i] <= upper[i])) {
      fail(ErrorKind::InvalidArgument, "box lower bound exceeds upper bound at coordinate " +
                                           std::to_string(i));
    }
  }
  return ConvexSet(Box{std::move(lower), std::move(upper)});
}

ConvexSet ConvexSet::ball(Vector center, double radius) {
  if (!(radius > 0)) fail(ErrorKind::InvalidArgument, "ball radius must be positive");
  return ConvexSet(Ball{std::move(center), radius});
}

ConvexSet ConvexSet::halfspace(Vector normal, double offset) {
  if (!(normal.norm() > 0)) fail(ErrorKind::InvalidArgument, "halfspace normal must be nonzero");
  return ConvexSet(Halfspace{std::move(normal), offset});
}

ConvexSet ConvexSet::affine_from_basis(Vector point, const Matrix& directions) {
  const auto n = point.size();
  if (directions.cols() > 0 && directions.rows() != n) {
    fail(ErrorKind::InvalidArgument, "affine basis rows do not match point dimension");
  }
  Matrix basis(n, 0);
  if (directions.cols() > 0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(directions);
    const auto rank = qr.rank();
    basis = Matrix(qr.householderQ()) .leftCols(rank);
  }
  return ConvexSet(AffineSubspace{std::move(point), std::move(basis)});
}

ConvexSet ConvexSet::affine_from_constraints(const Matrix& A, const Vector& b) {
  if (A.rows() != b.size()) fail(ErrorKind::InvalidArgument, "constraint rows do not match rhs");
  const auto n = A.cols();
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const Vector point = svd.solve(b);
  if ((A * point - b).norm() > 1e-9 * (1.0 + b.norm())) {
    fail(ErrorKind::InvalidArgument, "affine constraints are inconsistent");
  }
  const auto rank = svd.rank();
  Matrix basis = svd.matrixV().rightCols(n - rank);
  return ConvexSet(AffineSubspace{point, std::move(basis)});
}

ConvexSet ConvexSet::product(std::vector<ConvexSet> parts) {
  if (parts.empty()) fail(ErrorKind::InvalidArgument, "product of zero sets");
  return ConvexSet(Product{std::move(parts)});
}

ConvexSet ConvexSet::intersection(std::vector<ConvexSet> parts, Vector interior_point) {
  if (parts.empty()) fail(ErrorKind::InvalidArgument, "intersection of zero sets");
  for (const auto& p : parts) {
    if (p.dim() != static_cast<std::size_t>(interior_point.size())) {
      fail(ErrorKind::InvalidArgument, "intersection parts differ in dimension");
    }
    if (!contains(p, interior_point)) {
      fail(ErrorKind::InvalidArgument, "intersection witness point lies outside a part");
    }
  }
  return ConvexSet(Intersection{std::move(parts), std::move(interior_point)});
}

Vector dykstra_project(std::span<const Projector> projectors, const Vector& x,
                       const DykstraOptions& options) {
  if (projectors.empty()) return x;
  if (projectors.size() == 1) return projectors.front()(x);
  Vector y = x;
  std::vector<Vector> increments(projectors.size(), Vector::Zero(x.size()));
  const double scale = std::max(1.0, x.norm());
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    const Vector previous = y;
    double increment_change = 0.0;
    for (std::size_t i = 0; i < projectors.size(); ++i) {
      const Vector z = y + increments[i];
      y = projectors[i](z);
      const Vector next = z - y;
      increment_change = std::max(increment_change, (next - increments[i]).norm());
      increments[i] = next;
    }
    if ((y - previous).norm() <= options.tolerance * scale &&
        increment_change <= options.tolerance * scale) {
      return y;
    }
  }
  fail(ErrorKind::NonConvergence, "Dykstra projection did not converge in " +
                                      std::to_string(options.max_sweeps) + " sweeps");
}

Vector project(const ConvexSet& set, const Vector& x) {
  require_dim(set, x);
  return std::visit(
      Overloaded{
          [&](const WholeSpace&) -> Vector { return x; },
          [&](const Box& b) -> Vector { return x.cwiseMax(b.lower).cwiseMin(b.upper); },
          [&](const Ball& b) -> Vector {
            const Vector d = x - b.center;
            const double len = d.norm();
            if (len <= b.radius) return x;
            return b.center + (b.radius / len) * d;
          },
          [&](const Halfspace& h) -> Vector {
            const double excess = h.normal.dot(x) - h.offset;
            if (excess <= 0) return x;
            return x - (excess / h.normal.squaredNorm()) * h.normal;
          },
          [&](const AffineSubspace& a) -> Vector {
            return a.point + a.basis * (a.basis.transpose() * (x - a.point));
          },
          [&](const Product& p) -> Vector {
            return blockwise(p, x, [](const ConvexSet& part, const Vector& xi, Eigen::Index) {
              return project(part, xi);
            });
          },
          [&](const Intersection& s) -> Vector {
            std::vector<Projector> projectors;
            for (const auto& part : s.parts) {
              projectors.emplace_back([&part](const Vector& z) { return project(part, z); });
            }
            return dykstra_project(projectors, x);
          },
      },
      set.variant());
}

StateVector project(const ConvexSet& set, const StateVector& x) {
  return StateVector(project(set, x.values()), x.layout());
}

double distance(const ConvexSet& set, const Vector& x) {
  if (set.is_whole_space()) return 0.0;
  return (x - project(set, x)).norm();
}

bool contains(const ConvexSet& set, const Vector& x) {
  return contains(set, x, membership_tolerance(x));
}

bool contains(const ConvexSet& set, const Vector& x, double tolerance) {
  return distance(set, x) <= tolerance;
}

Vector tangent_project(const ConvexSet& set, const Vector& x, const Vector& v) {
  require_inside(set, x);
  require_dim(set, v);
  const double tol = membership_tolerance(x);
  return std::visit(
      Overloaded{
          [&](const WholeSpace&) -> Vector { return v; },
          [&](const Box& b) -> Vector {
            Vector out = v;
            for (Eigen::Index i = 0; i < v.size(); ++i) {
              if (x[i] >= b.upper[i] - tol && out[i] > 0) out[i] = 0;
              if (x[i] <= b.lower[i] + tol && out[i] < 0) out[i] = 0;
            }
            return out;
          },
          [&](const Ball& b) -> Vector {
            const Vector normal = x - b.center;
            if (normal.norm() < b.radius - tol) return v;
            return remove_outward(v, normal);
          },
          [&](const Halfspace& h) -> Vector {
            if (!halfspace_active(h.normal, h.offset, x)) return v;
            return remove_outward(v, h.normal);
          },
          [&](const AffineSubspace& a) -> Vector { return a.basis * (a.basis.transpose() * v); },
          [&](const Product& p) -> Vector {
            return blockwise(p, v, [&](const ConvexSet& part, const Vector& vi, Eigen::Index off) {
              return tangent_project(part, Vector(x.segment(off, vi.size())), vi);
            });
          },
          [&](const Intersection& s) -> Vector {
            std::vector<Projector> projectors;
            for (const auto& part : s.parts) {
              projectors.emplace_back(
                  [&part, &x](const Vector& z) { return tangent_project(part, x, z); });
            }
            return dykstra_project(projectors, v);
          },
      },
      set.variant());
}

double normal_cone_residual(const ConvexSet& set, const Vector& x, const Vector& v) {
  require_inside(set, x);
  require_dim(set, v);
  if (const auto* prod = set.as<Product>()) {
    double sq = 0.0;
    Eigen::Index offset = 0;
    for (const auto& part : prod->parts) {
      const auto len = static_cast<Eigen::Index>(part.dim());
      const double r = normal_cone_residual(part, Vector(x.segment(offset, len)),
                                            Vector(v.segment(offset, len)));
      sq += r * r;
      offset += len;
    }
    return std::sqrt(sq);
  }
  if (const auto* inter = set.as<Intersection>()) {
    double best = 0.0;
    for (const auto& d : probe_directions(x.size())) {
      const Vector probe = project(set, Vector(x + d));
      best = std::max(best, v.dot(probe - x));
    }
    (void)inter;
    return best;
  }
  // Exact cone: the maximizing probe direction is P_T(v) / |P_T(v)|.
  return tangent_project(set, x, v).norm();
}

std::vector<Vector> normal_cone_generators(const ConvexSet& set, const Vector& x) {
  require_inside(set, x);
  const double tol = membership_tolerance(x);
  const auto n = x.size();
  std::vector<Vector> gens;
  std::visit(
      Overloaded{
          [&](const WholeSpace&) {},
          [&](const Box& b) {
            for (Eigen::Index i = 0; i < n; ++i) {
              if (x[i] >= b.upper[i] - tol) gens.push_back(Vector::Unit(n, i));
              if (x[i] <= b.lower[i] + tol) gens.push_back(-Vector::Unit(n, i));
            }
          },
          [&](const Ball& b) {
            const Vector normal = x - b.center;
            if (normal.norm() >= b.radius - tol) gens.push_back(normal.normalized());
          },
          [&](const Halfspace& h) {
            if (halfspace_active(h.normal, h.offset, x)) gens.push_back(h.normal.normalized());
          },
          [&](const AffineSubspace& a) {
            // Orthogonal complement of the direction space, both signs.
            Matrix complement;
            if (a.basis.cols() == 0) {
              complement = Matrix::Identity(n, n);
            } else {
              Eigen::HouseholderQR<Matrix> qr(a.basis);
              complement = Matrix(qr.householderQ()).rightCols(n - a.basis.cols());
            }
            for (Eigen::Index c = 0; c < complement.cols(); ++c) {
              gens.push_back(complement.col(c));
              gens.push_back(-complement.col(c));
            }
          },
          [&](const Product& p) {
            Eigen::Index offset = 0;
            for (const auto& part : p.parts) {
              const auto len = static_cast<Eigen::Index>(part.dim());
              for (const auto& g : normal_cone_generators(part, Vector(x.segment(offset, len)))) {
                Vector full = Vector::Zero(n);
                full.segment(offset, len) = g;
                gens.push_back(std::move(full));
              }
              offset += len;
            }
          },
          [&](const Intersection& s) {
            for (const auto& part : s.parts) {
              for (auto& g : normal_cone_generators(part, x)) gens.push_back(std::move(g));
            }
          },
      },
      set.variant());
  return gens;
}

}  // namespace switchflow
