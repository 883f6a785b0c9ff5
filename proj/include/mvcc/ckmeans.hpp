#pragma once

// Soft-constrained K-Means: PCK-Means (identity metric, unit penalties) and
// MPCK-Means (per-cluster diagonal metric learned alongside the partition).

#include "mvcc/constraint_ops.hpp"
#include "mvcc/types.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace mvcc {

enum class Variant { pck, mpck };

inline const char* to_string(Variant v) { return v == Variant::pck ? "pck" : "mpck"; }

inline Variant parse_variant(const std::string& s) {
  if (s == "pck") return Variant::pck;
  if (s == "mpck") return Variant::mpck;
  throw std::invalid_argument("variant must be pck or mpck, got '" + s + "'");
}

struct ClusteringConfig {
  std::size_t k = 2;
  Variant variant = Variant::pck;
  std::size_t max_em_iters = 100;
  double epsilon = 1e-6;
  std::uint64_t seed = 0;
};

inline void validate(const ClusteringConfig& cfg, std::size_t n) {
  if (cfg.k == 0) throw std::invalid_argument("k must be positive");
  if (cfg.k > n) throw std::invalid_argument("k exceeds the number of instances");
  if (cfg.max_em_iters == 0) throw std::invalid_argument("max_em_iters must be positive");
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

/// Pair of members of one cluster with the greatest separation under the
/// cluster's metric.
struct FarthestPair {
  std::size_t first = 0;
  std::size_t second = 0;
  double distance_sq = 0.0;
};

struct ClusterModel {
  Variant variant = Variant::pck;
  std::vector<Vector> centroids;
  std::vector<Matrix> metrics;
  std::vector<std::size_t> assignment;  // row-aligned with the view
  std::vector<FarthestPair> extremes;

  std::size_t k() const noexcept { return centroids.size(); }
  std::size_t cluster_of(const ViewData& view, const InstanceId& id) const {
    return assignment.at(view.index_of(id));
  }
};

struct ReseedEvent {
  std::size_t iteration;
  std::size_t cluster;
  std::size_t instance;
};

struct ClusterResult {
  ClusterModel model;
  std::vector<double> objective_trace;
  std::vector<ReseedEvent> reseeds;
  std::size_t iterations = 0;
  bool converged = false;
  bool stopped_on_increase = false;

  double objective() const {
    return objective_trace.empty() ? std::numeric_limits<double>::quiet_NaN()
                                   : objective_trace.back();
  }
};

inline constexpr std::size_t unassigned = std::numeric_limits<std::size_t>::max();
inline constexpr double metric_ridge = 1e-9;
inline constexpr double metric_min = 1e-9;
inline constexpr double metric_max = 1e9;

inline double sq_mahalanobis(const Vector& diff, const Matrix& metric) {
  return diff.dot(metric * diff);
}

/// log det of a symmetric positive-definite matrix; throws std::domain_error otherwise.
inline double log_det_spd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw std::domain_error("metric is not positive-definite");
  const auto& l = llt.matrixL();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) acc += std::log(l(i, i));
  return 2.0 * acc;
}

/// Must-link violation cost for x_i in cluster ci and x_j in cluster cj.
inline double penalty_ml(const ClusterModel& model, const Vector& xi, std::size_t ci,
                         const Vector& xj, std::size_t cj) {
  if (model.variant == Variant::pck) return 1.0;
  const Vector diff = xi - xj;
  return 0.5 * sq_mahalanobis(diff, model.metrics[ci]) + 0.5 * sq_mahalanobis(diff, model.metrics[cj]);
}

/// Cannot-link violation cost when x_i and x_j share cluster ci. Clamped at 0.
inline double penalty_cl(const ClusterModel& model, const Vector& xi, std::size_t ci, const Vector& xj) {
  if (model.variant == Variant::pck) return 1.0;
  const double spread = model.extremes[ci].distance_sq;
  return std::max(0.0, spread - sq_mahalanobis(xi - xj, model.metrics[ci]));
}

namespace detail {

inline std::vector<FarthestPair> farthest_pairs(const ViewData& view,
                                                const std::vector<std::size_t>& assignment,
                                                const std::vector<Matrix>& metrics) {
  const std::size_t k = metrics.size();
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t idx : view.id_order())
    if (assignment[idx] != unassigned) members[assignment[idx]].push_back(idx);
  std::vector<FarthestPair> out(k);
  for (std::size_t h = 0; h < k; ++h) {
    const auto& m = members[h];
    if (m.empty()) continue;
    out[h] = {m[0], m[0], 0.0};
    for (std::size_t p = 0; p < m.size(); ++p) {
      const Vector xp = view.row(m[p]);
      for (std::size_t q = p + 1; q < m.size(); ++q) {
        const double d = sq_mahalanobis(xp - view.row(m[q]), metrics[h]);
        if (d > out[h].distance_sq) out[h] = {m[p], m[q], d};
      }
    }
  }
  return out;
}

inline FarthestPair global_farthest_pair(const ViewData& view) {
  FarthestPair best{0, 0, 0.0};
  const auto& order = view.id_order();
  for (std::size_t p = 0; p < order.size(); ++p) {
    for (std::size_t q = p + 1; q < order.size(); ++q) {
      const double d = (view.row(order[p]) - view.row(order[q])).squaredNorm();
      if (d > best.distance_sq) best = {order[p], order[q], d};
    }
  }
  return best;
}

inline std::vector<Vector> cluster_means(const ViewData& view, const std::vector<std::size_t>& assignment,
                                         std::size_t k, std::vector<std::size_t>* counts = nullptr) {
  std::vector<Vector> sums(k, Vector::Zero(static_cast<Eigen::Index>(view.dim())));
  std::vector<std::size_t> n(k, 0);
  for (std::size_t i = 0; i < view.size(); ++i) {
    sums[assignment[i]] += view.row(i);
    ++n[assignment[i]];
  }
  for (std::size_t h = 0; h < k; ++h)
    if (n[h] > 0) sums[h] /= static_cast<double>(n[h]);
  if (counts) *counts = std::move(n);
  return sums;
}

inline double objective_value(const ViewData& view, const ConstraintIndex& index, const ClusterModel& model) {
  if (model.assignment.size() != view.size())
    throw std::invalid_argument("model does not cover every instance of view '" + view.id() + "'");
  std::vector<double> log_dets(model.k());
  for (std::size_t h = 0; h < model.k(); ++h) log_dets[h] = log_det_spd(model.metrics[h]);

  double j = 0.0;
  for (std::size_t i = 0; i < view.size(); ++i) {
    const std::size_t h = model.assignment[i];
    if (h >= model.k()) throw std::invalid_argument("assignment references a missing cluster");
    j += sq_mahalanobis(view.row(i) - model.centroids[h], model.metrics[h]) - log_dets[h];
  }
  for (const auto& c : index.all) {
    const std::size_t ci = model.assignment[c.i];
    const std::size_t cj = model.assignment[c.j];
    if (c.kind == ConstraintKind::must_link) {
      if (ci != cj) j += c.weight * penalty_ml(model, view.row(c.i), ci, view.row(c.j), cj);
    } else if (ci == cj) {
      j += c.weight * penalty_cl(model, view.row(c.i), ci, view.row(c.j));
    }
  }
  return j;
}

inline std::vector<std::size_t> assign_step(const ViewData& view, const ConstraintIndex& index,
                                            const ClusterModel& model) {
  const std::size_t k = model.k();
  std::vector<double> log_dets(k);
  for (std::size_t h = 0; h < k; ++h) log_dets[h] = log_det_spd(model.metrics[h]);

  std::vector<std::size_t> assignment = model.assignment;
  if (assignment.size() != view.size()) assignment.assign(view.size(), unassigned);

  std::vector<double> cost(k);
  for (std::size_t i : view.id_order()) {
    const Vector xi = view.row(i);
    for (std::size_t h = 0; h < k; ++h)
      cost[h] = sq_mahalanobis(xi - model.centroids[h], model.metrics[h]) - log_dets[h];
    for (std::size_t ci : index.incident[i]) {
      const auto& c = index.all[ci];
      const std::size_t p = ConstraintIndex::partner(c, i);
      const std::size_t cp = assignment[p];
      if (cp == unassigned) continue;
      const Vector xp = view.row(p);
      if (c.kind == ConstraintKind::must_link) {
        for (std::size_t h = 0; h < k; ++h)
          if (h != cp) cost[h] += c.weight * penalty_ml(model, xi, h, xp, cp);
      } else {
        cost[cp] += c.weight * penalty_cl(model, xi, cp, xp);
      }
    }
    std::size_t best = 0;
    for (std::size_t h = 1; h < k; ++h)
      if (cost[h] < cost[best]) best = h;
    assignment[i] = best;
  }
  return assignment;
}

struct UpdateResult {
  ClusterModel model;
  std::vector<ReseedEvent> reseeds;  // iteration field left 0
};

inline UpdateResult update_step(const ViewData& view, const ConstraintIndex& index,
                                std::vector<std::size_t> assignment, std::size_t k, Variant variant,
                                const std::vector<Matrix>* previous_metrics) {
  const auto d = static_cast<Eigen::Index>(view.dim());
  std::vector<Matrix> current_metrics =
      previous_metrics && previous_metrics->size() == k ? *previous_metrics
                                                        : std::vector<Matrix>(k, Matrix::Identity(d, d));
  UpdateResult out;

  std::vector<std::size_t> counts;
  std::vector<Vector> means = cluster_means(view, assignment, k, &counts);
  for (std::size_t h = 0; h < k; ++h) {
    if (counts[h] != 0) continue;
    std::size_t pick = unassigned;
    double far = -1.0;
    for (std::size_t i : view.id_order()) {
      const std::size_t c = assignment[i];
      if (counts[c] < 2) continue;
      const double dist = sq_mahalanobis(view.row(i) - means[c], current_metrics[c]);
      if (dist > far) {
        far = dist;
        pick = i;
      }
    }
    if (pick == unassigned) throw std::runtime_error("cannot reseed empty cluster: too few instances");
    out.reseeds.push_back({0, h, pick});
    --counts[assignment[pick]];
    assignment[pick] = h;
    counts[h] = 1;
    means = cluster_means(view, assignment, k);
  }

  ClusterModel& model = out.model;
  model.variant = variant;
  model.centroids = std::move(means);
  model.assignment = std::move(assignment);
  model.metrics.assign(k, Matrix::Identity(d, d));

  if (variant == Variant::mpck) {
    const auto pairs_before = farthest_pairs(view, model.assignment, current_metrics);
    std::vector<Vector> scatter(k, Vector::Zero(d));
    for (std::size_t i = 0; i < view.size(); ++i) {
      const std::size_t h = model.assignment[i];
      scatter[h] += (view.row(i) - model.centroids[h]).cwiseAbs2();
    }
    for (const auto& c : index.all) {
      const std::size_t ci = model.assignment[c.i];
      const std::size_t cj = model.assignment[c.j];
      const Vector diff2 = (view.row(c.i) - view.row(c.j)).cwiseAbs2();
      if (c.kind == ConstraintKind::must_link) {
        if (ci == cj) continue;
        scatter[ci] += 0.5 * c.weight * diff2;
        scatter[cj] += 0.5 * c.weight * diff2;
      } else if (ci == cj) {
        const auto& fp = pairs_before[ci];
        const Vector spread2 = (view.row(fp.first) - view.row(fp.second)).cwiseAbs2();
        scatter[ci] += c.weight * (spread2 - diff2);
      }
    }
    for (std::size_t h = 0; h < k; ++h) {
      const double members = static_cast<double>(counts[h]);
      for (Eigen::Index dd = 0; dd < d; ++dd) {
        const double denom = scatter[h](dd) + metric_ridge;
        const double entry = denom > 0.0 ? members / denom : metric_max;
        model.metrics[h](dd, dd) = std::clamp(entry, metric_min, metric_max);
      }
    }
  }
  model.extremes = farthest_pairs(view, model.assignment, model.metrics);
  return out;
}

}  // namespace detail

/// Seeds: centroids of the k largest must-link components, then farthest-point
/// selection from the seeds chosen so far. The first farthest-point seed, when
/// no component exists, is drawn uniformly using `seed`.
inline std::vector<Vector> init_centroids(const ViewData& view, const ConstraintSet& constraints,
                                          std::size_t k, std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  if (k > view.size()) throw std::invalid_argument("k exceeds the number of instances");

  detail::DisjointSets sets(view.size());
  for (const auto& [key, w] : constraints)
    if (key.kind == ConstraintKind::must_link) sets.unite(view.index_of(key.lo), view.index_of(key.hi));

  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i : view.id_order()) groups[sets.find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> components;
  for (auto& [root, members] : groups)
    if (members.size() >= 2) components.push_back(std::move(members));
  // members are in id order, so front() is the smallest id
  std::sort(components.begin(), components.end(), [&](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return view.id_at(a.front()) < view.id_at(b.front());
  });

  std::vector<Vector> seeds;
  for (std::size_t c = 0; c < components.size() && seeds.size() < k; ++c) {
    Vector mean = Vector::Zero(static_cast<Eigen::Index>(view.dim()));
    for (std::size_t i : components[c]) mean += view.row(i);
    seeds.push_back(mean / static_cast<double>(components[c].size()));
  }

  const auto& order = view.id_order();
  if (seeds.empty()) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, view.size() - 1);
    seeds.push_back(view.row(order[pick(rng)]));
  }
  std::vector<double> nearest(view.size(), std::numeric_limits<double>::infinity());
  std::size_t scored = 0;
  while (seeds.size() < k) {
    for (; scored < seeds.size(); ++scored)
      for (std::size_t i = 0; i < view.size(); ++i)
        nearest[i] = std::min(nearest[i], (view.row(i) - seeds[scored]).squaredNorm());
    std::size_t best = order[0];
    for (std::size_t i : order)
      if (nearest[i] > nearest[best]) best = i;
    seeds.push_back(view.row(best));
    nearest[best] = -1.0;
  }
  return seeds;
}

inline double objective_value(const ViewData& view, const ConstraintSet& constraints, const ClusterModel& model) {
  return detail::objective_value(view, ConstraintIndex(view, constraints), model);
}

/// One sequential pass in ascending id order. Each instance takes the cluster
/// minimizing its own objective contribution against the partners' latest
/// assignments; ties go to the lowest cluster index. Partners without an
/// assignment yet contribute no penalty.
inline std::vector<std::size_t> assign_step(const ViewData& view, const ConstraintSet& constraints,
                                            const ClusterModel& model) {
  return detail::assign_step(view, ConstraintIndex(view, constraints), model);
}

inline detail::UpdateResult update_step(const ViewData& view, const ConstraintSet& constraints,
                                        std::vector<std::size_t> assignment, std::size_t k, Variant variant,
                                        const std::vector<Matrix>* previous_metrics = nullptr) {
  return detail::update_step(view, ConstraintIndex(view, constraints), std::move(assignment), k, variant,
                             previous_metrics);
}

/// Alternates assignment and update until |dJ| < epsilon or max_em_iters.
/// An update that raises the objective without a reseed ends the run and the
/// previous model is kept, so the trace only rises at reseed events.
inline ClusterResult cluster(const ViewData& view, const ConstraintSet& constraints, const ClusteringConfig& cfg) {
  validate(cfg, view.size());
  const ConstraintIndex index(view, constraints);
  const auto d = static_cast<Eigen::Index>(view.dim());

  ClusterModel model;
  model.variant = cfg.variant;
  model.centroids = init_centroids(view, constraints, cfg.k, cfg.seed);
  model.metrics.assign(cfg.k, Matrix::Identity(d, d));
  model.extremes.assign(cfg.k, detail::global_farthest_pair(view));

  ClusterResult result;
  std::optional<double> previous;
  for (std::size_t iter = 0; iter < cfg.max_em_iters; ++iter) {
    auto assignment = detail::assign_step(view, index, model);
    auto update = detail::update_step(view, index, std::move(assignment), cfg.k, cfg.variant,
                                      iter == 0 ? nullptr : &model.metrics);
    const double j = detail::objective_value(view, index, update.model);
    result.iterations = iter + 1;
    if (previous && update.reseeds.empty() && j > *previous + 1e-9 * std::max(1.0, std::abs(*previous))) {
      result.stopped_on_increase = true;
      break;
    }
    for (auto& ev : update.reseeds) {
      ev.iteration = iter;
      result.reseeds.push_back(ev);
    }
    model = std::move(update.model);
    result.objective_trace.push_back(j);
    if (previous && std::abs(j - *previous) < cfg.epsilon) {
      result.converged = true;
      break;
    }
    previous = j;
  }
  result.model = std::move(model);
  return result;
}

}  // namespace mvcc
