#pragma once

#include "switchflow/convex_set.hpp"
#include "switchflow/polytope.hpp"
#include "switchflow/types.hpp"

#include <memory>
#include <optional>

namespace switchflow {

// f(x) = ½ xᵀ H x + bᵀ x + c
struct QuadraticForm {
  Matrix hessian;
  Vector linear;
  double constant = 0.0;
};

// Finite convex function on R^n, possibly time-dependent, with a
// subdifferential oracle returning exact generator sets.
class ConvexFunction {
 public:
  virtual ~ConvexFunction() = default;

  virtual std::size_t dim() const = 0;
  virtual double value(const Vector& x, double t) const = 0;
  virtual SubdifferentialPolytope subdifferential(const Vector& x, double t) const = 0;

  virtual std::optional<QuadraticForm> quadratic_form(double /*t*/) const { return std::nullopt; }
  // Unconstrained prox in closed form, when known.
  virtual std::optional<Vector> closed_form_prox(double /*h*/, const Vector& /*x*/,
                                                 double /*t*/) const {
    return std::nullopt;
  }
  // Every subdifferential is a singleton.
  virtual bool is_differentiable() const { return false; }
};

class ZeroFunction final : public ConvexFunction {
 public:
  explicit ZeroFunction(std::size_t dim) : dim_(dim) {}
  std::size_t dim() const override { return dim_; }
  double value(const Vector&, double) const override { return 0.0; }
  SubdifferentialPolytope subdifferential(const Vector& x, double) const override;
  std::optional<QuadraticForm> quadratic_form(double) const override;
  std::optional<Vector> closed_form_prox(double, const Vector& x, double) const override {
    return x;
  }
  bool is_differentiable() const override { return true; }

 private:
  std::size_t dim_;
};

class QuadraticFunction final : public ConvexFunction {
 public:
  // Hessian must be symmetric positive semidefinite.
  explicit QuadraticFunction(QuadraticForm form);
  std::size_t dim() const override { return static_cast<std::size_t>(form_.linear.size()); }
  double value(const Vector& x, double) const override;
  SubdifferentialPolytope subdifferential(const Vector& x, double) const override;
  std::optional<QuadraticForm> quadratic_form(double) const override { return form_; }
  std::optional<Vector> closed_form_prox(double h, const Vector& x, double) const override;
  bool is_differentiable() const override { return true; }

 private:
  QuadraticForm form_;
};

// weight * Σ |x_i|; sign(0) is the interval [-1, 1].
class L1Norm final : public ConvexFunction {
 public:
  L1Norm(std::size_t dim, double weight = 1.0);
  std::size_t dim() const override { return dim_; }
  double value(const Vector& x, double) const override;
  SubdifferentialPolytope subdifferential(const Vector& x, double) const override;
  // Soft threshold.
  std::optional<Vector> closed_form_prox(double h, const Vector& x, double) const override;

 private:
  std::size_t dim_;
  double weight_;
};

// g^D: base on the constraint set, +inf off it.
struct RestrictedFunction {
  std::shared_ptr<const ConvexFunction> base;
  ConvexSet constraint;

  double value(const Vector& x, double t = 0.0) const;
};

struct ProxOptions {
  int max_iterations = 200000;
  double step_tolerance = 1e-13;
  // Accepted optimality residual |x - u - h g|, relative to 1 + |x|.
  double residual_tolerance = 1e-8;
};

// argmin_u f(u) + |u - x|² / (2h) over the constraint set. Closed forms are
// used where available, then projected accelerated gradient for quadratic
// bases, then projected gradient with backtracking. Throws NoProxOracle when
// no route certifies the optimality residual.
Vector prox(const RestrictedFunction& f, double h, const Vector& x, double t = 0.0,
            const ProxOptions& options = {});

// dist(x - u, h (∂f(u) + N_C(u))). Exact without constraints; otherwise an
// upper bound from minimizing |P_T(-g)| over the shifted polytope, T the
// tangent cone at u.
double prox_residual(const RestrictedFunction& f, double h, const Vector& x, const Vector& u,
                     double t = 0.0);

}  // namespace switchflow
