#pragma once

// Evaluation: pairwise F-measure, weighted precision of propagated
// constraints, the cluster-membership baseline, closed-form propagation
// counts, and overlap/disagreement diagnostics for cluster Gaussians.

#include "mvcc/ckmeans.hpp"
#include "mvcc/propagation.hpp"
#include "mvcc/types.hpp"

#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvcc {

struct PairwiseScore {
  double precision = 1.0;
  double recall = 1.0;
  double f_measure = 1.0;
};

namespace detail {

inline double pairs_of(std::uint64_t n) { return n < 2 ? 0.0 : 0.5 * static_cast<double>(n) * (n - 1); }

inline PairwiseScore score_from_counts(double predicted, double same, double correct) {
  PairwiseScore s;
  s.precision = predicted > 0.0 ? correct / predicted : 1.0;
  s.recall = same > 0.0 ? correct / same : 1.0;
  const double denom = s.precision + s.recall;
  s.f_measure = denom > 0.0 ? 2.0 * s.precision * s.recall / denom : 0.0;
  return s;
}

}  // namespace detail

/// Pair-counting precision/recall/F of a partition against true classes.
/// Empty predicted-pair or same-class-pair sets score 1 on that side.
inline PairwiseScore pairwise_f(std::span<const std::size_t> predicted, std::span<const std::string> truth) {
  if (predicted.size() != truth.size())
    throw std::invalid_argument("assignment and labels cover different instance counts");
  std::map<std::size_t, std::uint64_t> by_cluster;
  std::map<std::string, std::uint64_t> by_label;
  std::map<std::pair<std::size_t, std::string>, std::uint64_t> joint;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    ++by_cluster[predicted[i]];
    ++by_label[truth[i]];
    ++joint[{predicted[i], truth[i]}];
  }
  double pred = 0.0, same = 0.0, correct = 0.0;
  for (const auto& [c, n] : by_cluster) pred += detail::pairs_of(n);
  for (const auto& [l, n] : by_label) same += detail::pairs_of(n);
  for (const auto& [cl, n] : joint) correct += detail::pairs_of(n);
  return detail::score_from_counts(pred, same, correct);
}

/// Id-keyed form; the two maps must cover exactly the same ids.
inline PairwiseScore pairwise_f(const std::map<InstanceId, std::size_t>& assignment,
                                const std::map<InstanceId, std::string>& truth) {
  if (assignment.size() != truth.size())
    throw std::invalid_argument("assignment and labels cover different ids");
  std::vector<std::size_t> pred;
  std::vector<std::string> gold;
  pred.reserve(assignment.size());
  gold.reserve(assignment.size());
  auto t = truth.begin();
  for (const auto& [id, c] : assignment) {
    if (t->first != id) throw std::invalid_argument("id '" + id + "' has no label");
    pred.push_back(c);
    gold.push_back(t->second);
    ++t;
  }
  return pairwise_f(pred, gold);
}

inline PairwiseScore pairwise_f(const ViewData& view, const ClusterModel& model) {
  return pairwise_f(model.assignment, view.labels());
}

inline double mean_f(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean_f needs at least one view");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

// ---------------------------------------------------------------------------

/// Weighted precision per kind. Sums are kept so several views can be pooled.
class WeightedPrecision {
 public:
  void add(const ConstraintSet& propagated, const ViewData& view) {
    const auto& labels = view.labels();
    for (const auto& [key, w] : propagated) {
      const bool same = labels[view.index_of(key.lo)] == labels[view.index_of(key.hi)];
      const int k = key.kind == ConstraintKind::must_link ? 0 : 1;
      const bool correct = k == 0 ? same : !same;
      total_[k] += w;
      if (correct) correct_[k] += w;
      ++count_[k];
    }
  }

  std::optional<double> must_link() const { return ratio(0); }
  std::optional<double> cannot_link() const { return ratio(1); }
  std::optional<double> of(ConstraintKind kind) const { return ratio(kind == ConstraintKind::must_link ? 0 : 1); }

 private:
  std::optional<double> ratio(int k) const {
    if (count_[k] == 0 || !(total_[k] > 0.0)) return std::nullopt;
    return correct_[k] / total_[k];
  }

  double correct_[2] = {0.0, 0.0};
  double total_[2] = {0.0, 0.0};
  std::size_t count_[2] = {0, 0};
};

inline WeightedPrecision weighted_precision(const ConstraintSet& propagated, const ViewData& view) {
  WeightedPrecision wp;
  wp.add(propagated, view);
  return wp;
}

// ---------------------------------------------------------------------------

/// Unit-weight must-link for every co-clustered mapped pair, cannot-link otherwise.
inline ConstraintSet baseline_cluster_membership(const ViewData& view, const ClusterModel& model,
                                                 const MappedSubset& mapped) {
  std::vector<std::pair<InstanceId, std::size_t>> members;
  members.reserve(mapped.size());
  for (const auto& id : mapped.ids) members.emplace_back(id, model.assignment.at(view.index_of(id)));
  ConstraintSet out;
  for (std::size_t p = 0; p < members.size(); ++p) {
    for (std::size_t q = p + 1; q < members.size(); ++q) {
      const auto kind = members[p].second == members[q].second ? ConstraintKind::must_link
                                                                : ConstraintKind::cannot_link;
      out.merge_max(ConstraintKey(members[p].first, members[q].first, kind), 1.0);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

struct PropagationCounts {
  std::int64_t must_link;
  std::int64_t cannot_link;
};

/// Correct propagation targets per given constraint for n points in k equal
/// clusters, clamped at 0.
inline PropagationCounts expected_propagation_counts(std::int64_t n, std::int64_t k) {
  if (n <= 0 || k <= 0) throw std::invalid_argument("n and k must be positive");
  if (n % k != 0) throw std::invalid_argument("k must divide n");
  auto choose2 = [](std::int64_t m) { return m * (m - 1) / 2; };
  const std::int64_t per = n / k;
  const std::int64_t ml = choose2(per) - 1;
  const std::int64_t cl = choose2(n) - k * choose2(per) - 1;
  return {std::max<std::int64_t>(ml, 0), std::max<std::int64_t>(cl, 0)};
}

// ---------------------------------------------------------------------------

struct DiagnosticThresholds {
  double min_symmetric_kl = 1.0;
  double max_disagreement = 0.25;
};

struct OverlapReport {
  Matrix symmetric_kl;  // k x k, zero diagonal
  double disagreement = 0.0;
  std::vector<std::string> warnings;

  bool warned() const noexcept { return !warnings.empty(); }
};

/// KL(p || q) between multivariate normals; throws std::domain_error on a
/// singular covariance.
inline double gaussian_kl(const Vector& mean_p, const Matrix& cov_p, const Vector& mean_q, const Matrix& cov_q) {
  Eigen::LLT<Matrix> lp(cov_p), lq(cov_q);
  if (lp.info() != Eigen::Success || lq.info() != Eigen::Success)
    throw std::domain_error("singular covariance in KL divergence");
  const double logdet_p = 2.0 * lp.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double logdet_q = 2.0 * lq.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const Vector dm = mean_q - mean_p;
  const double trace = lq.solve(cov_p).trace();
  const double maha = dm.dot(lq.solve(dm));
  return 0.5 * (trace + maha - static_cast<double>(mean_p.size()) + logdet_q - logdet_p);
}

/// Flags cluster Gaussians that overlap (small symmetric KL) or disagree with
/// the partition (fraction of instances whose densest cluster is not their
/// assigned one). Warnings never stop a run.
inline OverlapReport overlap_diagnostics(const ClusterGaussians& gaussians, const ViewData& view,
                                         const std::vector<std::size_t>& assignment,
                                         const DiagnosticThresholds& thresholds = {}) {
  const std::size_t k = gaussians.size();
  if (k < 2) throw std::invalid_argument("overlap diagnostics need at least two clusters");
  if (assignment.size() != view.size()) throw std::invalid_argument("assignment does not cover the view");

  OverlapReport report;
  report.symmetric_kl = Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      const auto& ga = gaussians[a];
      const auto& gb = gaussians[b];
      const double skl = gaussian_kl(ga.centroid, ga.covariance, gb.centroid, gb.covariance) +
                         gaussian_kl(gb.centroid, gb.covariance, ga.centroid, ga.covariance);
      report.symmetric_kl(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = skl;
      report.symmetric_kl(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = skl;
      if (skl < thresholds.min_symmetric_kl)
        report.warnings.push_back("clusters " + std::to_string(a) + " and " + std::to_string(b) +
                                  " overlap (symmetric KL " + std::to_string(skl) + ")");
    }
  }

  std::size_t disagree = 0;
  for (std::size_t i = 0; i < view.size(); ++i) {
    const Vector x = view.row(i);
    std::size_t best = 0;
    double best_w = membership_weight(x, gaussians[0]);
    for (std::size_t h = 1; h < k; ++h) {
      const double w = membership_weight(x, gaussians[h]);
      if (w > best_w) {
        best_w = w;
        best = h;
      }
    }
    if (best != assignment[i]) ++disagree;
  }
  report.disagreement = static_cast<double>(disagree) / static_cast<double>(view.size());
  if (report.disagreement > thresholds.max_disagreement)
    report.warnings.push_back("cluster densities disagree with the partition for " +
                              std::to_string(report.disagreement * 100.0) + "% of instances");
  return report;
}

}  // namespace mvcc
