#pragma once

#include "switchflow/types.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <variant>
#include <vector>

namespace switchflow {

class ConvexSet;

struct WholeSpace {
  std::size_t dim = 0;
};

struct Box {
  Vector lower;
  Vector upper;
};

struct Ball {
  Vector center;
  double radius = 1.0;
};

// { x : normal . x <= offset }
struct Halfspace {
  Vector normal;
  double offset = 0.0;
};

// point + span(basis); basis columns are orthonormal (possibly zero columns).
struct AffineSubspace {
  Vector point;
  Matrix basis;
};

// Cartesian product; parts are laid out consecutively.
struct Product {
  std::vector<ConvexSet> parts;
};

struct Intersection {
  std::vector<ConvexSet> parts;
  Vector interior_point;
};

// Immutable descriptor of a nonempty closed convex subset of R^n. Copies share
// the underlying node.
class ConvexSet {
 public:
  using Variant =
      std::variant<WholeSpace, Box, Ball, Halfspace, AffineSubspace, Product, Intersection>;

  static ConvexSet whole(std::size_t dim);
  static ConvexSet box(Vector lower, Vector upper);
  static ConvexSet ball(Vector center, double radius);
  static ConvexSet halfspace(Vector normal, double offset);
  static ConvexSet affine_from_basis(Vector point, const Matrix& directions);
  // { x : A x = b }; throws InvalidArgument when inconsistent.
  static ConvexSet affine_from_constraints(const Matrix& A, const Vector& b);
  static ConvexSet product(std::vector<ConvexSet> parts);
  // Nonemptiness is certified by a point lying in every part.
  static ConvexSet intersection(std::vector<ConvexSet> parts, Vector interior_point);

  std::size_t dim() const { return dim_; }
  const Variant& variant() const { return *node_; }
  bool is_whole_space() const { return std::holds_alternative<WholeSpace>(*node_); }

  template <class T>
  const T* as() const {
    return std::get_if<T>(node_.get());
  }

 private:
  explicit ConvexSet(Variant v);
  std::shared_ptr<const Variant> node_;
  std::size_t dim_ = 0;
};

struct DykstraOptions {
  int max_sweeps = 10000;
  double tolerance = 1e-10;  // on successive-iterate change
};

using Projector = std::function<Vector(const Vector&)>;

// Dykstra's alternating projections: converges to the projection of x onto
// the intersection of the sets behind `projectors`. Throws NonConvergence.
Vector dykstra_project(std::span<const Projector> projectors, const Vector& x,
                       const DykstraOptions& options = {});

Vector project(const ConvexSet& set, const Vector& x);
StateVector project(const ConvexSet& set, const StateVector& x);

double distance(const ConvexSet& set, const Vector& x);
bool contains(const ConvexSet& set, const Vector& x);
bool contains(const ConvexSet& set, const Vector& x, double tolerance);

// sup of v.(x'-x), clipped at 0, over probe points x' within unit distance of
// x: directions of the tangent cone for sets with exact cones, projections of
// unit perturbations onto the set otherwise. Zero iff v passes the normal-cone
// test. Throws PointOutsideSet.
double normal_cone_residual(const ConvexSet& set, const Vector& x, const Vector& v);

// Projection of v onto the tangent cone of the set at x. Throws PointOutsideSet.
Vector tangent_project(const ConvexSet& set, const Vector& x, const Vector& v);

// Generators of N_set(x) ∩ (unit ball) for the polyhedral variants (Box,
// Halfspace, WholeSpace, AffineSubspace, and Products of those): every normal
// vector is a nonnegative combination of the returned directions. Ball
// contributes its single outward normal when x is on the sphere.
std::vector<Vector> normal_cone_generators(const ConvexSet& set, const Vector& x);

}  // namespace switchflow
