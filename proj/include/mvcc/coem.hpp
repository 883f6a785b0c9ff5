#pragma once

// co-EM drivers. Each outer iteration visits every view once: the view's
// constraints are unified with what the other views propagated (M-step input),
// the view is re-clustered, and its own propagated set is re-estimated
// (E-step). Two-view, D-view and single-view variants share one loop.

#include "mvcc/ckmeans.hpp"
#include "mvcc/constraint_ops.hpp"
#include "mvcc/eval.hpp"
#include "mvcc/propagation.hpp"
#include "mvcc/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvcc {

enum class ViewOrder { fixed, seeded_random };

/// What the E-step infers for the mapped instances.
enum class EStep { propagation, cluster_membership };

struct CoEmConfig {
  /// One threshold per view, or a single value applied to every view.
  std::vector<double> thresholds{0.75};
  ClusteringConfig clustering;
  std::size_t max_outer_iters = 20;
  ViewOrder view_order = ViewOrder::fixed;
  double gamma = 1e-6;
  EStep estep = EStep::propagation;
  PropagationOptions propagation;

  double threshold_for(std::size_t view) const {
    if (thresholds.empty()) throw std::invalid_argument("no propagation thresholds configured");
    return thresholds.size() == 1 ? thresholds.front() : thresholds.at(view);
  }
};

struct ViewState {
  ClusterResult clustering;
  ConstraintSet propagated;
  ConstraintSet unified;
  bool clustered = false;
};

struct CoEmState {
  std::vector<ViewState> views;
  std::size_t iteration = 0;
  bool converged = false;
};

struct OuterIterationTrace {
  std::size_t iteration = 0;
  std::vector<std::size_t> order;
  std::vector<double> objectives;
  std::vector<std::size_t> unified_size;
  std::vector<std::size_t> propagated_ml;
  std::vector<std::size_t> propagated_cl;
  std::vector<std::size_t> propagated_changed;
};

struct CoEmResult {
  std::vector<ViewState> views;
  std::vector<MappedSubset> mapped;
  ClosureResult closure;
  std::vector<OuterIterationTrace> trace;
  std::size_t outer_iterations = 0;
  bool converged = false;
  bool forced_stop = false;
};

inline constexpr double propagated_weight_tolerance = 1e-9;

namespace detail {

inline bool same_weighted_keys(const ConstraintSet& a, const ConstraintSet& b, double tol) {
  if (a.size() != b.size()) return false;
  auto ib = b.begin();
  for (auto ia = a.begin(); ia != a.end(); ++ia, ++ib) {
    if (!(ia->first == ib->first)) return false;
    if (std::abs(ia->second - ib->second) > tol) return false;
  }
  return true;
}

inline std::size_t changed_keys(const ConstraintSet& before, const ConstraintSet& after) {
  std::size_t changed = 0;
  for (const auto& [key, w] : after) {
    auto prev = before.weight(key.lo, key.hi, key.kind);
    if (!prev || std::abs(*prev - w) > propagated_weight_tolerance) ++changed;
  }
  for (const auto& [key, w] : before)
    if (!after.contains(key)) ++changed;
  return changed;
}

}  // namespace detail

/// True once every view's propagated set is unchanged (same keys, weights
/// within 1e-9) and its objective moved by less than epsilon, or once the
/// iteration budget is spent.
inline bool has_converged(const CoEmState& prev, const CoEmState& curr, double epsilon,
                          std::size_t max_outer_iters) {
  if (curr.iteration >= max_outer_iters) return true;
  if (prev.views.size() != curr.views.size()) return false;
  for (std::size_t v = 0; v < curr.views.size(); ++v) {
    const auto& p = prev.views[v];
    const auto& c = curr.views[v];
    if (!p.clustered || !c.clustered) return false;
    if (!detail::same_weighted_keys(p.propagated, c.propagated, propagated_weight_tolerance)) return false;
    if (!(std::abs(c.clustering.objective() - p.clustering.objective()) < epsilon)) return false;
  }
  return true;
}

namespace detail {

struct CoEmProblem {
  const std::vector<ViewData>* views;
  std::vector<ConstraintSet> closed;              // per view, after closure
  std::vector<MappedSubset> mapped;               // candidates per view
  std::vector<std::vector<RelationMap>> transfer;  // transfer[u][v]: relations u -> v
};

inline ConstraintSet estimate(const ViewData& view, const ConstraintSet& sources, const ClusterModel& model,
                              const MappedSubset& candidates, double threshold, const CoEmConfig& cfg) {
  if (cfg.estep == EStep::cluster_membership) return baseline_cluster_membership(view, model, candidates);
  const PropagationParams params{threshold, cfg.gamma, candidates};
  return propagate(view, sources, model, fit_gaussians(view, model, cfg.gamma), params, cfg.propagation);
}

/// The shared outer loop. `self_transfer` unifies a view with its own
/// propagated set (single-view variant).
inline CoEmResult run_loop(const CoEmProblem& problem, const CoEmConfig& cfg, bool self_transfer) {
  const auto& views = *problem.views;
  const std::size_t n_views = views.size();
  if (cfg.max_outer_iters == 0) throw std::invalid_argument("max_outer_iters must be at least 1");
  for (std::size_t v = 0; v < n_views; ++v) {
    const double t = cfg.threshold_for(v);
    if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("thresholds must lie in (0, 1]");
  }

  CoEmResult result;
  result.mapped = problem.mapped;
  CoEmState state;
  state.views.resize(n_views);

  std::vector<std::size_t> order(n_views);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t iter = 1; iter <= cfg.max_outer_iters; ++iter) {
    CoEmState prev = state;
    if (cfg.view_order == ViewOrder::seeded_random) {
      std::mt19937_64 rng(cfg.clustering.seed + iter);
      std::shuffle(order.begin(), order.end(), rng);
    }
    OuterIterationTrace tr;
    tr.iteration = iter;
    tr.order = order;
    for (std::size_t v : order) {
      ConstraintSet unified = problem.closed[v];
      if (self_transfer) {
        unified = max_union(unified, state.views[v].propagated);
      } else {
        for (std::size_t u = 0; u < n_views; ++u) {
          if (u == v) continue;
          unified = max_union(unified, map_constraints(state.views[u].propagated, problem.transfer[u][v]));
        }
      }
      auto& vs = state.views[v];
      vs.clustering = cluster(views[v], unified, cfg.clustering);
      vs.unified = std::move(unified);
      vs.propagated = estimate(views[v], problem.closed[v], vs.clustering.model, problem.mapped[v],
                               cfg.threshold_for(v), cfg);
      vs.clustered = true;
    }
    state.iteration = iter;

    tr.objectives.resize(n_views);
    tr.unified_size.resize(n_views);
    tr.propagated_ml.resize(n_views);
    tr.propagated_cl.resize(n_views);
    tr.propagated_changed.resize(n_views);
    for (std::size_t v = 0; v < n_views; ++v) {
      const auto& vs = state.views[v];
      tr.objectives[v] = vs.clustering.objective();
      tr.unified_size[v] = vs.unified.size();
      tr.propagated_ml[v] = vs.propagated.count(ConstraintKind::must_link);
      tr.propagated_cl[v] = vs.propagated.count(ConstraintKind::cannot_link);
      tr.propagated_changed[v] = changed_keys(prev.views[v].propagated, vs.propagated);
    }
    result.trace.push_back(std::move(tr));

    CoEmState fixed_point_check = state;
    fixed_point_check.iteration = 0;  // test the stability criterion on its own
    if (has_converged(prev, fixed_point_check, cfg.clustering.epsilon, cfg.max_outer_iters)) {
      state.converged = true;
      break;
    }
    if (has_converged(prev, state, cfg.clustering.epsilon, cfg.max_outer_iters)) break;
  }

  result.views = std::move(state.views);
  result.outer_iterations = state.iteration;
  result.converged = state.converged;
  result.forced_stop = !state.converged;
  return result;
}

inline std::vector<std::vector<RelationMap>> transfer_maps(const std::vector<ViewData>& views,
                                                           const std::vector<RelationMap>& relations) {
  const std::size_t n = views.size();
  std::vector<std::vector<RelationMap>> out(n, std::vector<RelationMap>(n));
  std::map<std::string, std::size_t> pos;
  for (std::size_t v = 0; v < n; ++v) pos[views[v].id()] = v;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) out[u][v] = RelationMap{views[u].id(), views[v].id(), {}};
  for (const auto& rel : relations) {
    auto fu = pos.find(rel.from_view);
    auto tv = pos.find(rel.to_view);
    if (fu == pos.end() || tv == pos.end())
      throw std::invalid_argument("relation map " + rel.from_view + "->" + rel.to_view + " names an unknown view");
    if (fu->second == tv->second) throw std::invalid_argument("relation map links a view to itself");
    rel.validate(views[fu->second], views[tv->second]);
    for (const auto& [a, b] : rel.pairs) {
      out[fu->second][tv->second].pairs.emplace(a, b);
      out[tv->second][fu->second].pairs.emplace(b, a);
    }
  }
  return out;
}

}  // namespace detail

/// D-view co-EM. Relations may be given for any subset of view pairs, in
/// either direction; a pair without a map does not exchange constraints.
inline CoEmResult run_multi_view(const std::vector<ViewData>& views, const std::vector<ConstraintSet>& constraints,
                                 const std::vector<RelationMap>& relations, const CoEmConfig& cfg) {
  if (views.size() < 2) throw std::invalid_argument("multi-view co-EM needs at least two views");
  if (constraints.size() != views.size()) throw std::invalid_argument("one constraint set per view is required");
  std::set<std::string> names;
  for (const auto& v : views)
    if (!names.insert(v.id()).second) throw std::invalid_argument("duplicate view id '" + v.id() + "'");

  std::map<std::string, ConstraintSet> by_view;
  for (std::size_t v = 0; v < views.size(); ++v) {
    ConstraintIndex check(views[v], constraints[v]);  // validates ids
    by_view[views[v].id()] = constraints[v];
  }
  // validates relation ids before closure
  (void)detail::transfer_maps(views, relations);

  ClosureResult closure = build_closure(by_view, relations);
  detail::CoEmProblem problem;
  problem.views = &views;
  problem.transfer = detail::transfer_maps(views, closure.relations);
  for (const auto& v : views) {
    problem.closed.push_back(closure.constraints[v.id()]);
    problem.mapped.push_back(mapped_subset(v, closure.relations));
  }
  CoEmResult result = detail::run_loop(problem, cfg, false);
  result.closure = std::move(closure);
  return result;
}

inline CoEmResult run_two_view(const ViewData& a, const ViewData& b, const ConstraintSet& constraints_a,
                               const ConstraintSet& constraints_b, const RelationMap& relations,
                               const CoEmConfig& cfg) {
  return run_multi_view({a, b}, {constraints_a, constraints_b}, {relations}, cfg);
}

/// Constraint propagation within one view: every instance is a candidate and
/// the view's propagated set feeds its own next clustering.
inline CoEmResult run_single_view_cp(const ViewData& view, const ConstraintSet& constraints, const CoEmConfig& cfg) {
  std::vector<ViewData> views{view};
  ClosureResult closure = build_closure({{view.id(), constraints}}, {});
  detail::CoEmProblem problem;
  problem.views = &views;
  problem.closed.push_back(closure.constraints[view.id()]);
  problem.mapped.push_back(MappedSubset{view.id(), {view.ids().begin(), view.ids().end()}});
  problem.transfer.assign(1, std::vector<RelationMap>(1));
  CoEmResult result = detail::run_loop(problem, cfg, true);
  result.closure = std::move(closure);
  return result;
}

}  // namespace mvcc
