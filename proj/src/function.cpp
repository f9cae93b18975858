#include "switchflow/function.hpp"

#include "switchflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>

namespace switchflow {
namespace {

bool is_zero_quadratic(const QuadraticForm& q) {
  return q.hessian.isZero(0.0) && q.linear.isZero(0.0);
}

double quadratic_value(const QuadraticForm& q, const Vector& x) {
  return 0.5 * x.dot(q.hessian * x) + q.linear.dot(x) + q.constant;
}

// Projected accelerated gradient on ½uᵀHu + bᵀu + |u-x|²/(2h) over C.
Vector quadratic_prox_on_set(const QuadraticForm& q, const ConvexSet& set, double h,
                             const Vector& x, const ProxOptions& options) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q.hessian, Eigen::EigenvaluesOnly);
  const double lmax = std::max(eig.eigenvalues().maxCoeff(), 0.0) + 1.0 / h;
  const double lmin = std::max(eig.eigenvalues().minCoeff(), 0.0) + 1.0 / h;
  const double beta = (std::sqrt(lmax) - std::sqrt(lmin)) / (std::sqrt(lmax) + std::sqrt(lmin));
  Vector u = project(set, x);
  Vector y = u;
  for (int it = 0; it < options.max_iterations; ++it) {
    const Vector grad = q.hessian * y + q.linear + (y - x) / h;
    const Vector next = project(set, Vector(y - grad / lmax));
    const double change = (next - u).norm();
    y = next + beta * (next - u);
    u = next;
    if (change <= options.step_tolerance * (1.0 + u.norm())) break;
  }
  return u;
}

// Projected gradient with Armijo backtracking using the min-norm subgradient.
Vector generic_prox(const RestrictedFunction& f, double h, const Vector& x, double t,
                    const ProxOptions& options) {
  auto objective = [&](const Vector& u) {
    return f.base->value(u, t) + (u - x).squaredNorm() / (2.0 * h);
  };
  Vector u = project(f.constraint, x);
  double step = h;
  for (int it = 0; it < options.max_iterations; ++it) {
    auto poly = f.base->subdifferential(u, t);
    for (auto& g : poly.generators) g += (u - x) / h;
    const Vector direction = min_norm_point(poly);
    const double current = objective(u);
    Vector next = u;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      next = project(f.constraint, Vector(u - step * direction));
      const Vector move = next - u;
      if (objective(next) <= current + direction.dot(move) + move.squaredNorm() / (2.0 * step)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double change = (next - u).norm();
    u = next;
    step = std::min(step * 2.0, 1e6 * h);
    if (change <= options.step_tolerance * (1.0 + u.norm())) break;
  }
  return u;
}

// Unconstrained prox of h f: closed form, linear solve, or descent.
Vector unconstrained_prox(const ConvexFunction& base, double h, const Vector& x, double t,
                          const ProxOptions& options);

// Dykstra-like splitting between the unconstrained prox of h f and the
// projection onto C; converges to the prox of f^C. Stops once the iterate
// passes the optimality test.
std::optional<Vector> split_prox(const RestrictedFunction& f, double h, const Vector& x, double t,
                                 const ProxOptions& options, double accept) {
  const auto n = x.size();
  Vector u = x;
  Vector p = Vector::Zero(n), q = Vector::Zero(n);
  for (int it = 1; it <= 20000; ++it) {
    const Vector y = unconstrained_prox(*f.base, h, Vector(u + p), t, options);
    p += u - y;
    const Vector next = project(f.constraint, Vector(y + q));
    q += y - next;
    const double change = (next - u).norm();
    u = next;
    if (it % 25 == 0 || change <= options.step_tolerance * (1.0 + u.norm())) {
      if (prox_residual(f, h, x, u, t) <= accept) return u;
      if (change <= options.step_tolerance * (1.0 + u.norm())) break;
    }
  }
  return std::nullopt;
}

Vector unconstrained_prox(const ConvexFunction& base, double h, const Vector& x, double t,
                          const ProxOptions& options) {
  if (auto closed = base.closed_form_prox(h, x, t)) return *closed;
  if (const auto quadratic = base.quadratic_form(t)) {
    const auto n = quadratic->linear.size();
    const Matrix system = quadratic->hessian + Matrix::Identity(n, n) / h;
    return system.ldlt().solve(x / h - quadratic->linear);
  }
  const RestrictedFunction free{std::shared_ptr<const ConvexFunction>(&base, [](const ConvexFunction*) {}),
                                ConvexSet::whole(base.dim())};
  return generic_prox(free, h, x, t, options);
}

}  // namespace

SubdifferentialPolytope ZeroFunction::subdifferential(const Vector& x, double) const {
  return {{Vector::Zero(x.size())}};
}

std::optional<QuadraticForm> ZeroFunction::quadratic_form(double) const {
  const auto n = static_cast<Eigen::Index>(dim_);
  return QuadraticForm{Matrix::Zero(n, n), Vector::Zero(n), 0.0};
}

QuadraticFunction::QuadraticFunction(QuadraticForm form) : form_(std::move(form)) {
  if (form_.hessian.rows() != form_.linear.size() || form_.hessian.cols() != form_.linear.size()) {
    fail(ErrorKind::InvalidArgument, "quadratic form dimensions disagree");
  }
  if (!form_.hessian.isApprox(form_.hessian.transpose())) {
    fail(ErrorKind::InvalidArgument, "quadratic form hessian is not symmetric");
  }
}

double QuadraticFunction::value(const Vector& x, double) const { return quadratic_value(form_, x); }

SubdifferentialPolytope QuadraticFunction::subdifferential(const Vector& x, double) const {
  return {{form_.hessian * x + form_.linear}};
}

std::optional<Vector> QuadraticFunction::closed_form_prox(double h, const Vector& x,
                                                          double) const {
  const auto n = form_.linear.size();
  const Matrix system = form_.hessian + Matrix::Identity(n, n) / h;
  return Vector(system.ldlt().solve(x / h - form_.linear));
}

L1Norm::L1Norm(std::size_t dim, double weight) : dim_(dim), weight_(weight) {
  if (!(weight >= 0)) fail(ErrorKind::InvalidArgument, "L1 weight must be nonnegative");
}

double L1Norm::value(const Vector& x, double) const { return weight_ * x.lpNorm<1>(); }

SubdifferentialPolytope L1Norm::subdifferential(const Vector& x, double) const {
  Vector base = Vector::Zero(x.size());
  std::vector<Eigen::Index> ties;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] > 0) base[i] = weight_;
    else if (x[i] < 0) base[i] = -weight_;
    else ties.push_back(i);
  }
  SubdifferentialPolytope poly;
  if (ties.empty() || weight_ == 0) {
    poly.generators.push_back(base);
    return poly;
  }
  // Vertices of the tie box, capped at 2^8.
  const std::size_t used = std::min<std::size_t>(ties.size(), 8);
  for (std::size_t mask = 0; mask < (std::size_t{1} << used); ++mask) {
    Vector g = base;
    for (std::size_t b = 0; b < used; ++b) g[ties[b]] = (mask >> b & 1U) ? weight_ : -weight_;
    poly.generators.push_back(std::move(g));
  }
  return poly;
}

std::optional<Vector> L1Norm::closed_form_prox(double h, const Vector& x, double) const {
  const double threshold = h * weight_;
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double mag = std::max(std::abs(x[i]) - threshold, 0.0);
    out[i] = x[i] > 0 ? mag : -mag;
  }
  return out;
}

double RestrictedFunction::value(const Vector& x, double t) const {
  if (!contains(constraint, x)) return std::numeric_limits<double>::infinity();
  return base->value(x, t);
}

double prox_residual(const RestrictedFunction& f, double h, const Vector& x, const Vector& u,
                     double t) {
  auto poly = f.base->subdifferential(u, t);
  for (auto& g : poly.generators) g += (u - x) / h;
  const auto start = solve_min_norm(poly);
  if (f.constraint.is_whole_space()) return h * start.point.norm();
  auto tangent = [&](const Vector& g) { return tangent_project(f.constraint, u, Vector(-g)); };
  double best = tangent(start.point).norm();
  const auto count = static_cast<Eigen::Index>(poly.generators.size());
  if (count == 1 || best == 0.0) return h * best;

  // dist(0, P + N_C(u)) = min over g in P of |P_T(-g)|, which the min-norm g
  // need not attain. Accelerated projected gradient on the convex weights;
  // every iterate is an upper bound.
  Matrix G(start.point.size(), count);
  for (Eigen::Index j = 0; j < count; ++j) G.col(j) = poly.generators[static_cast<std::size_t>(j)];
  const double lipschitz = std::max(G.squaredNorm(), 1e-300);
  Vector w = start.weights, prev = w;
  double momentum = 1.0;
  for (int it = 0; it < 2000 && best > 1e-15 * (1.0 + G.norm()); ++it) {
    const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const Vector y = w + ((momentum - 1.0) / next_momentum) * (w - prev);
    momentum = next_momentum;
    prev = w;
    w = project_simplex(Vector(y + G.transpose() * tangent(G * y) / lipschitz));
    const double value = tangent(G * w).norm();
    if (value > best) momentum = 1.0;  // restart
    best = std::min(best, value);
  }
  return h * best;
}

Vector prox(const RestrictedFunction& f, double h, const Vector& x, double t,
            const ProxOptions& options) {
  if (!(h > 0)) fail(ErrorKind::InvalidArgument, "prox step must be positive");
  if (!f.base) fail(ErrorKind::NoProxOracle, "restricted function has no base");
  const bool unconstrained = f.constraint.is_whole_space();
  const auto quadratic = f.base->quadratic_form(t);

  if (unconstrained) {
    if (f.base->closed_form_prox(h, x, t) || quadratic) return unconstrained_prox(*f.base, h, x, t, options);
  } else if (quadratic) {
    if (is_zero_quadratic(*quadratic)) return project(f.constraint, x);
    return quadratic_prox_on_set(*quadratic, f.constraint, h, x, options);
  }

  const double accept = options.residual_tolerance * (1.0 + x.norm());
  const Vector u = generic_prox(f, h, x, t, options);
  const double residual = prox_residual(f, h, x, u, t);
  if (residual <= accept) return u;
  // Projected descent zig-zags on nonsmooth bases under constraints.
  if (!unconstrained) {
    if (auto split = split_prox(f, h, x, t, options, accept)) return *split;
  }
  fail(ErrorKind::NoProxOracle,
       "inner prox solve stalled with optimality residual " + std::to_string(residual));
}

}  // namespace switchflow
