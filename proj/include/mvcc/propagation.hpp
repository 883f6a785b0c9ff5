#pragma once

// Constraint propagation: turns the current clustering into per-cluster
// Gaussians and spreads each given constraint to nearby candidate pairs with a
// product-of-RBF weight shaped by the endpoints' clusters.

#include "mvcc/ckmeans.hpp"
#include "mvcc/constraint_ops.hpp"
#include "mvcc/types.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mvcc {

struct ClusterGaussian {
  Vector centroid;
  Matrix covariance;  // rescaled cluster covariance
  Matrix precision;   // its inverse
  Matrix empirical;   // regularized scatter of the members
  double alpha = 1.0;
  bool diagonal = false;
};

using ClusterGaussians = std::vector<ClusterGaussian>;

struct PropagationParams {
  double threshold = 0.75;
  double gamma = 1e-6;
  MappedSubset candidates;
};

struct PropagationOptions {
  bool memoize = true;
  bool early_stop = true;
};

/// (1/m) sum (x - mean)(x - mean)^T + gamma I over the rows of `points`.
inline Matrix empirical_cov(const Matrix& points, double gamma) {
  if (points.rows() < 1) throw std::invalid_argument("empirical covariance of an empty point set");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  const Eigen::RowVectorXd mean = points.colwise().mean();
  const Matrix centered = points.rowwise() - mean;
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(points.rows());
  cov = 0.5 * (cov + cov.transpose());
  cov.diagonal().array() += gamma;
  return cov;
}

inline double largest_eigenvalue(const Matrix& spd) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(spd, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::domain_error("eigendecomposition failed");
  return solver.eigenvalues().maxCoeff();
}

inline bool is_spd(const Matrix& m) {
  if (m.rows() != m.cols() || !m.isApprox(m.transpose(), 1e-10)) return false;
  Eigen::LLT<Matrix> llt(m);
  return llt.info() == Eigen::Success;
}

struct AlphaScaling {
  double alpha;
  Matrix covariance;
};

/// Scale so that the leading principal variances of the metric inverse and the
/// empirical covariance agree; returns the scale and alpha * metric_inverse.
inline AlphaScaling rescale_alpha(const Matrix& metric_inverse, const Matrix& empirical) {
  if (!is_spd(metric_inverse) || !is_spd(empirical))
    throw std::domain_error("rescale_alpha requires symmetric positive-definite inputs");
  const double alpha = largest_eigenvalue(empirical) / largest_eigenvalue(metric_inverse);
  return {alpha, alpha * metric_inverse};
}

inline bool is_diagonal(const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (r != c && m(r, c) != 0.0) return false;
  return true;
}

/// Gaussian per cluster. PCK-Means uses the empirical covariance directly;
/// MPCK-Means rescales the inverse of the learned metric, falling back to the
/// empirical covariance when the metric inverse is numerically degenerate.
inline ClusterGaussians fit_gaussians(const ViewData& view, const ClusterModel& model, double gamma) {
  if (model.assignment.size() != view.size())
    throw std::invalid_argument("model does not cover view '" + view.id() + "'");
  const std::size_t k = model.k();
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < view.size(); ++i) members[model.assignment[i]].push_back(i);

  ClusterGaussians out(k);
  for (std::size_t h = 0; h < k; ++h) {
    if (members[h].empty()) throw std::invalid_argument("cluster " + std::to_string(h) + " is empty");
    Matrix pts(static_cast<Eigen::Index>(members[h].size()), static_cast<Eigen::Index>(view.dim()));
    for (std::size_t r = 0; r < members[h].size(); ++r)
      pts.row(static_cast<Eigen::Index>(r)) = view.instances().row(static_cast<Eigen::Index>(members[h][r]));

    ClusterGaussian& g = out[h];
    g.centroid = model.centroids[h];
    g.empirical = empirical_cov(pts, gamma);
    g.covariance = g.empirical;
    if (model.variant == Variant::mpck) {
      const Matrix metric_inverse = model.metrics[h].inverse();
      if (largest_eigenvalue(metric_inverse) > 1e-12) {
        auto scaled = rescale_alpha(metric_inverse, g.empirical);
        g.alpha = scaled.alpha;
        g.covariance = std::move(scaled.covariance);
      }
    }
    g.diagonal = is_diagonal(g.covariance);
    if (g.diagonal) {
      g.precision = Matrix::Zero(g.covariance.rows(), g.covariance.cols());
      g.precision.diagonal() = g.covariance.diagonal().cwiseInverse();
    } else {
      g.precision = g.covariance.ldlt().solve(Matrix::Identity(g.covariance.rows(), g.covariance.cols()));
    }
  }
  return out;
}

/// exp(-1/2 (x - mu)^T Sigma^{-1} (x - mu)).
inline double membership_weight(const Vector& x, const ClusterGaussian& g) {
  const Vector diff = x - g.centroid;
  return std::exp(-0.5 * diff.dot(g.precision * diff));
}

namespace detail {

/// RBF centred at one constraint endpoint, with the endpoint's cluster
/// covariance scaled by the endpoint's membership weight.
class EndpointKernel {
 public:
  EndpointKernel(const Vector& center, const ClusterGaussian& cluster)
      : center_(center),
        precision_(cluster.precision),
        diagonal_(cluster.diagonal),
        scale_(membership_weight(center, cluster)) {}

  double scale() const noexcept { return scale_; }

  /// Squared Mahalanobis distance of x under the scaled covariance. Returns
  /// +inf once a diagonal accumulation provably passes `stop_above`.
  double exponent(const Vector& x, double stop_above = std::numeric_limits<double>::infinity()) const {
    double sum = 0.0;
    if (diagonal_) {
      const double limit = stop_above * scale_;
      for (Eigen::Index k = 0; k < center_.size(); ++k) {
        const double diff = x(k) - center_(k);
        sum += diff * diff * precision_(k, k);
        if (sum > limit) return std::numeric_limits<double>::infinity();
      }
    } else {
      const Vector diff = x - center_;
      sum = diff.dot(precision_ * diff);
    }
    if (!(scale_ > 0.0)) return sum == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return sum / scale_;
  }

  double value(const Vector& x, double stop_above = std::numeric_limits<double>::infinity()) const {
    const double q = exponent(x, stop_above);
    return std::isinf(q) ? 0.0 : std::exp(-0.5 * q);
  }

 private:
  Vector center_;
  Matrix precision_;
  bool diagonal_;
  double scale_;
};

inline double combine(double w, double g_iu, double g_jv, double g_ju, double g_iv) {
  return w * std::max(g_iu * g_jv, g_ju * g_iv);
}

}  // namespace detail

/// Weight of propagating constraint <x_u, x_v, w> (endpoints in clusters cu,
/// cv) to the candidate pair <x_i, x_j>: w times the better of the two
/// endpoint pairings of the product of endpoint RBFs.
inline double pair_weight(const Vector& xi, const Vector& xj, const Vector& xu, std::size_t cu,
                          const Vector& xv, std::size_t cv, double w, const ClusterGaussians& gaussians) {
  const detail::EndpointKernel ku(xu, gaussians.at(cu));
  const detail::EndpointKernel kv(xv, gaussians.at(cv));
  return detail::combine(w, ku.value(xi), kv.value(xj), ku.value(xj), kv.value(xi));
}

/// Propagates every source constraint to unordered candidate pairs drawn from
/// `params.candidates`, keeping those with weight >= threshold and merging
/// per (pair, kind) by max weight.
///
/// The default path memoizes endpoint RBF values over candidates x source
/// endpoints and, for diagonal covariances, abandons an evaluation once its
/// exponent exceeds -2 ln(threshold / w). Its output is identical to the
/// plain evaluation selected with `memoize = false`.
inline ConstraintSet propagate(const ViewData& view, const ConstraintSet& sources, const ClusterModel& model,
                               const ClusterGaussians& gaussians, const PropagationParams& params,
                               const PropagationOptions& options = {}) {
  const double t = params.threshold;
  if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("propagation threshold must lie in (0, 1]");
  if (model.assignment.size() != view.size())
    throw std::invalid_argument("model does not cover view '" + view.id() + "'");

  std::vector<std::size_t> cand;  // row indices in ascending id order
  cand.reserve(params.candidates.size());
  for (const auto& id : params.candidates.ids) cand.push_back(view.index_of(id));

  ConstraintSet out;
  if (cand.size() < 2 || sources.empty()) return out;

  const ConstraintIndex index(view, sources);
  std::vector<Vector> cand_x;
  cand_x.reserve(cand.size());
  for (std::size_t r : cand) cand_x.push_back(view.row(r));

  // Endpoint slots: one kernel per distinct source endpoint.
  std::vector<std::size_t> slot_of(view.size(), unassigned);
  std::vector<detail::EndpointKernel> kernels;
  std::vector<double> max_weight;
  auto slot = [&](std::size_t row) {
    if (slot_of[row] == unassigned) {
      slot_of[row] = kernels.size();
      kernels.emplace_back(view.row(row), gaussians.at(model.assignment[row]));
      max_weight.push_back(0.0);
    }
    return slot_of[row];
  };
  for (const auto& c : index.all) {
    const std::size_t su = slot(c.i);
    const std::size_t sv = slot(c.j);
    max_weight[su] = std::max(max_weight[su], c.weight);
    max_weight[sv] = std::max(max_weight[sv], c.weight);
  }

  const std::size_t m = cand.size();
  detail::PairMax best(m);
  auto emit = [&](const IndexedConstraint& c, std::size_t p, std::size_t q, double w) {
    if (w >= t) best.merge(p, q, c.kind, w);
  };
  auto collect = [&] {
    // candidates are in ascending id order, so (p, q) keeps lo/hi order
    best.for_each([&](std::size_t p, std::size_t q, ConstraintKind kind, double w) {
      out.merge_max(ConstraintKey(view.id_at(cand[p]), view.id_at(cand[q]), kind), w);
    });
    return out;
  };

  if (!options.memoize) {
    for (const auto& c : index.all) {
      const auto& ku = kernels[slot_of[c.i]];
      const auto& kv = kernels[slot_of[c.j]];
      for (std::size_t p = 0; p < cand.size(); ++p) {
        for (std::size_t q = p + 1; q < cand.size(); ++q) {
          const double w = detail::combine(c.weight, ku.value(cand_x[p]), kv.value(cand_x[q]),
                                           ku.value(cand_x[q]), kv.value(cand_x[p]));
          emit(c, p, q, w);
        }
      }
    }
    return collect();
  }

  // Memo table G[slot][candidate] plus the candidates that can still reach the
  // threshold through that endpoint.
  std::vector<double> memo(kernels.size() * m, 0.0);
  std::vector<std::vector<std::size_t>> reachable(kernels.size());
  for (std::size_t s = 0; s < kernels.size(); ++s) {
    if (!(max_weight[s] > 0.0)) continue;
    const double floor = t / max_weight[s];
    double stop_above = std::numeric_limits<double>::infinity();
    if (options.early_stop) {
      const double bound = floor >= 1.0 ? 0.0 : -2.0 * std::log(floor);
      stop_above = bound * (1.0 + 1e-9) + 1e-12;
    }
    for (std::size_t p = 0; p < m; ++p) {
      const double g = kernels[s].value(cand_x[p], stop_above);
      memo[s * m + p] = g;
      if (g >= floor * (1.0 - 1e-12)) reachable[s].push_back(p);
    }
  }

  for (const auto& c : index.all) {
    const std::size_t su = slot_of[c.i];
    const std::size_t sv = slot_of[c.j];
    const double* gu = &memo[su * m];
    const double* gv = &memo[sv * m];
    for (std::size_t a : reachable[su]) {
      for (std::size_t b : reachable[sv]) {
        if (a == b) continue;
        const std::size_t p = std::min(a, b);
        const std::size_t q = std::max(a, b);
        emit(c, p, q, detail::combine(c.weight, gu[p], gv[q], gu[q], gv[p]));
      }
    }
  }
  return collect();
}

/// Convenience overload that fits the cluster Gaussians with `params.gamma`.
inline ConstraintSet propagate(const ViewData& view, const ConstraintSet& sources, const ClusterModel& model,
                               const PropagationParams& params, const PropagationOptions& options = {}) {
  return propagate(view, sources, model, fit_gaussians(view, model, params.gamma), params, options);
}

}  // namespace mvcc
