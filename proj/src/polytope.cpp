#include "switchflow/polytope.hpp"

#include "switchflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace switchflow {
namespace {

constexpr double kOptimalityTol = 1e-12;
constexpr double kWeightTol = 1e-13;

Matrix stack(const std::vector<Vector>& gens) {
  Matrix P(gens.front().size(), static_cast<Eigen::Index>(gens.size()));
  for (std::size_t j = 0; j < gens.size(); ++j) P.col(static_cast<Eigen::Index>(j)) = gens[j];
  return P;
}

// argmin |B alpha| over the affine hull of the columns, sum(alpha) = 1.
Vector affine_minimizer(const Matrix& B) {
  const auto s = B.cols();
  Vector alpha(s);
  if (s == 1) {
    alpha[0] = 1.0;
    return alpha;
  }
  const Vector base = B.col(0);
  const Matrix D = B.rightCols(s - 1).colwise() - base;
  const Vector beta = D.completeOrthogonalDecomposition().solve(-base);
  alpha[0] = 1.0 - beta.sum();
  alpha.tail(s - 1) = beta;
  return alpha;
}

double gap(const Matrix& P, const Vector& x, Eigen::Index* argmin) {
  const Vector dots = P.transpose() * x;
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < dots.size(); ++j) {
    if (dots[j] < dots[best]) best = j;
  }
  if (argmin) *argmin = best;
  return x.squaredNorm() - dots[best];
}

MinNormPoint simplex_fallback(const Matrix& P, Vector w, double scale) {
  const Matrix gram = P.transpose() * P;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lipschitz = std::max(eig.eigenvalues().maxCoeff(), 1e-300);
  Vector y = w;
  double momentum = 1.0;
  MinNormPoint out;
  out.used_fallback = true;
  for (int it = 0; it < 200000; ++it) {
    const Vector next = project_simplex(y - (gram * y) / lipschitz);
    const double m_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    y = next + ((momentum - 1.0) / m_next) * (next - w);
    w = next;
    momentum = m_next;
    out.iterations = it + 1;
    if (gap(P, P * w, nullptr) <= kOptimalityTol * scale) break;
  }
  out.weights = w;
  out.point = P * w;
  return out;
}

}  // namespace

Vector project_simplex(const Vector& y) {
  // Sort-based Euclidean projection onto the probability simplex.
  std::vector<double> u(y.data(), y.data() + y.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cumulative += u[i];
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (u[i] - candidate > 0) theta = candidate;
  }
  return (y.array() - theta).max(0.0).matrix();
}

MinNormPoint solve_min_norm(const SubdifferentialPolytope& polytope) {
  const auto& gens = polytope.generators;
  if (gens.empty()) fail(ErrorKind::InvalidArgument, "empty generator list");
  const auto count = static_cast<Eigen::Index>(gens.size());
  const Matrix P = stack(gens);

  double scale = 0.0;
  Eigen::Index start = 0;
  for (Eigen::Index j = 0; j < count; ++j) {
    const double sq = P.col(j).squaredNorm();
    scale = std::max(scale, sq);
    if (sq < P.col(start).squaredNorm()) start = j;
  }
  scale = std::max(scale, std::numeric_limits<double>::min());

  std::vector<Eigen::Index> active{start};
  std::vector<double> weights{1.0};
  Vector x = P.col(start);

  auto full_weights = [&] {
    Vector w = Vector::Zero(count);
    for (std::size_t i = 0; i < active.size(); ++i) w[active[i]] = weights[i];
    return w;
  };

  MinNormPoint result;
  const int max_major = 50 * static_cast<int>(count) + 50;
  bool cycled = true;
  for (int major = 0; major < max_major; ++major) {
    result.iterations = major + 1;
    Eigen::Index entering = 0;
    if (gap(P, x, &entering) <= kOptimalityTol * scale) {
      cycled = false;
      break;
    }
    if (std::find(active.begin(), active.end(), entering) != active.end()) break;
    active.push_back(entering);
    weights.push_back(0.0);

    for (std::size_t minor = 0; minor <= active.size() + 1; ++minor) {
      Matrix B(P.rows(), static_cast<Eigen::Index>(active.size()));
      for (std::size_t i = 0; i < active.size(); ++i) {
        B.col(static_cast<Eigen::Index>(i)) = P.col(active[i]);
      }
      const Vector alpha = affine_minimizer(B);
      if ((alpha.array() > kWeightTol).all()) {
        weights.assign(alpha.data(), alpha.data() + alpha.size());
        x = B * alpha;
        break;
      }
      double theta = 1.0;
      for (std::size_t i = 0; i < active.size(); ++i) {
        if (alpha[static_cast<Eigen::Index>(i)] <= kWeightTol) {
          const double denom = weights[i] - alpha[static_cast<Eigen::Index>(i)];
          if (denom > 0) theta = std::min(theta, weights[i] / denom);
        }
      }
      std::vector<Eigen::Index> kept;
      std::vector<double> kept_weights;
      for (std::size_t i = 0; i < active.size(); ++i) {
        const double w = theta * alpha[static_cast<Eigen::Index>(i)] + (1.0 - theta) * weights[i];
        if (w > kWeightTol) {
          kept.push_back(active[i]);
          kept_weights.push_back(w);
        }
      }
      if (kept.empty()) {
        kept.push_back(active.back());
        kept_weights.push_back(1.0);
      }
      const double total = std::accumulate(kept_weights.begin(), kept_weights.end(), 0.0);
      for (auto& w : kept_weights) w /= total;
      active = std::move(kept);
      weights = std::move(kept_weights);
      x = Vector::Zero(P.rows());
      for (std::size_t i = 0; i < active.size(); ++i) x += weights[i] * P.col(active[i]);
    }
  }

  if (cycled || gap(P, x, nullptr) > kOptimalityTol * scale * 10.0) {
    auto fallback = simplex_fallback(P, full_weights(), scale);
    fallback.iterations += result.iterations;
    // Keep whichever candidate certifies better.
    if (gap(P, fallback.point, nullptr) <= gap(P, x, nullptr)) return fallback;
  }
  result.weights = full_weights();
  result.point = x;
  return result;
}

Vector min_norm_point(const SubdifferentialPolytope& polytope) {
  return solve_min_norm(polytope).point;
}

double min_norm_certificate(const SubdifferentialPolytope& polytope, const Vector& v) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& g : polytope.generators) worst = std::min(worst, v.dot(g - v));
  return worst;
}

}  // namespace switchflow
