#pragma once

// Constraint algebra: transitive closure across views, max-union, transfer of
// constraints through a relation map, and the mapped subset of a view.

#include "mvcc/types.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mvcc {

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n = 0) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t add() {
    parent_.push_back(parent_.size());
    rank_.push_back(0);
    return parent_.size() - 1;
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

  std::size_t size() const noexcept { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> rank_;
};

/// Max-weight accumulator over unordered index pairs (p < q) and the two
/// kinds. Dense for small index ranges, hashed beyond that.
class PairMax {
 public:
  explicit PairMax(std::size_t n) : n_(n), dense_(n <= dense_limit) {
    if (dense_) best_.assign(2 * n * n, -1.0);
  }

  void merge(std::size_t p, std::size_t q, ConstraintKind kind, double w) {
    if (p > q) std::swap(p, q);
    const std::uint64_t key = (static_cast<std::uint64_t>(p) * n_ + q) * 2 + (kind == ConstraintKind::must_link ? 0 : 1);
    if (dense_) {
      double& slot = best_[key];
      if (w > slot) slot = w;
    } else {
      auto [it, inserted] = sparse_.emplace(key, w);
      if (!inserted && w > it->second) it->second = w;
    }
  }

  /// Visits entries as (p, q, kind, weight) in ascending (p, q, kind) order.
  template <class F>
  void for_each(F&& f) const {
    auto visit = [&](std::uint64_t key, double w) {
      const auto kind = key % 2 == 0 ? ConstraintKind::must_link : ConstraintKind::cannot_link;
      const std::uint64_t pq = key / 2;
      f(static_cast<std::size_t>(pq / n_), static_cast<std::size_t>(pq % n_), kind, w);
    };
    if (dense_) {
      for (std::uint64_t key = 0; key < best_.size(); ++key)
        if (best_[key] >= 0.0) visit(key, best_[key]);
    } else {
      std::vector<std::pair<std::uint64_t, double>> sorted(sparse_.begin(), sparse_.end());
      std::sort(sorted.begin(), sorted.end());
      for (const auto& [key, w] : sorted) visit(key, w);
    }
  }

 private:
  static constexpr std::size_t dense_limit = 1024;
  std::size_t n_;
  bool dense_;
  std::vector<double> best_;
  std::unordered_map<std::uint64_t, double> sparse_;
};

}  // namespace detail

/// Graph node in the closure: (view id, instance id).
using ViewInstance = std::pair<std::string, InstanceId>;

/// A cannot-link whose endpoints are joined by a must-link/relation path.
struct ClosureConflict {
  std::string view_id;
  InstanceId a;
  InstanceId b;
  std::vector<ViewInstance> component;
};

struct ClosureResult {
  std::map<std::string, ConstraintSet> constraints;
  std::vector<RelationMap> relations;
  std::vector<ClosureConflict> conflicts;
};

/// Transitive closure of the per-view constraints together with the
/// cross-view relations.
///
/// Must-links and relations are the edges of one graph. Inside each connected
/// component every intra-view pair gains a must-link whose weight is the
/// largest must-link weight in the component (1 when the component is held
/// together by relations only), and every cross-view pair is added to the
/// relation map of that view pair, if one was supplied. A cannot-link between
/// two components lifts to every intra-view pair spanning them. A cannot-link
/// inside one component is reported as a conflict; it is not lifted and no
/// must-link is derived for that pair. Input entries are never modified.
inline ClosureResult build_closure(const std::map<std::string, ConstraintSet>& constraint_sets,
                                   const std::vector<RelationMap>& relations) {
  std::map<ViewInstance, std::size_t> node_of;
  std::vector<ViewInstance> nodes;
  detail::DisjointSets sets;
  auto node = [&](const std::string& view, const InstanceId& id) {
    auto [it, inserted] = node_of.emplace(ViewInstance{view, id}, nodes.size());
    if (inserted) {
      nodes.push_back(it->first);
      sets.add();
    }
    return it->second;
  };

  for (const auto& [view, set] : constraint_sets) {
    for (const auto& [key, w] : set) {
      const std::size_t a = node(view, key.lo);
      const std::size_t b = node(view, key.hi);
      if (key.kind == ConstraintKind::must_link) sets.unite(a, b);
    }
  }
  for (const auto& rel : relations) {
    for (const auto& [u, v] : rel.pairs) sets.unite(node(rel.from_view, u), node(rel.to_view, v));
  }

  // component root -> members grouped by view, and -> max must-link weight
  std::map<std::size_t, std::map<std::string, std::vector<InstanceId>>> members;
  for (std::size_t n = 0; n < nodes.size(); ++n)
    members[sets.find(n)][nodes[n].first].push_back(nodes[n].second);

  std::map<std::size_t, double> ml_weight;
  for (const auto& [view, set] : constraint_sets) {
    for (const auto& [key, w] : set) {
      if (key.kind != ConstraintKind::must_link) continue;
      const std::size_t root = sets.find(node_of.at({view, key.lo}));
      auto [it, inserted] = ml_weight.emplace(root, w);
      if (!inserted && w > it->second) it->second = w;
    }
  }

  ClosureResult result;
  result.constraints = constraint_sets;

  // per-view local indices so lifted pairs can be accumulated densely
  std::map<std::string, std::map<InstanceId, std::size_t>> local;
  for (const auto& node_id : nodes) local[node_id.first].emplace(node_id.second, 0);
  std::map<std::string, std::vector<const InstanceId*>> local_ids;
  for (auto& [view, ids] : local) {
    auto& names = local_ids[view];
    for (auto& [id, idx] : ids) {
      idx = names.size();
      names.push_back(&id);
    }
  }

  // Conflicts first: those pairs receive no derived must-link.
  std::set<std::pair<std::string, std::pair<InstanceId, InstanceId>>> conflicted;
  std::map<std::string, detail::PairMax> lifted;
  for (const auto& [view, set] : constraint_sets) {
    for (const auto& [key, w] : set) {
      if (key.kind != ConstraintKind::cannot_link) continue;
      const std::size_t ra = sets.find(node_of.at({view, key.lo}));
      const std::size_t rb = sets.find(node_of.at({view, key.hi}));
      if (ra == rb) {
        ClosureConflict conflict{view, key.lo, key.hi, {}};
        for (const auto& [v, ids] : members.at(ra))
          for (const auto& id : ids) conflict.component.emplace_back(v, id);
        result.conflicts.push_back(std::move(conflict));
        conflicted.insert({view, {key.lo, key.hi}});
        continue;
      }
      const auto& ma = members.at(ra);
      const auto& mb = members.at(rb);
      for (const auto& [v, ids_a] : ma) {
        auto it = mb.find(v);
        if (it == mb.end()) continue;
        const auto& idx = local.at(v);
        auto acc = lifted.try_emplace(v, idx.size()).first;
        for (const auto& x : ids_a)
          for (const auto& y : it->second) acc->second.merge(idx.at(x), idx.at(y), key.kind, w);
      }
    }
  }

  for (const auto& [root, by_view] : members) {
    auto wit = ml_weight.find(root);
    const double weight = wit == ml_weight.end() ? 1.0 : wit->second;
    for (const auto& [view, ids] : by_view) {
      if (ids.size() < 2) continue;
      auto& out = result.constraints[view];
      for (std::size_t p = 0; p < ids.size(); ++p) {
        for (std::size_t q = p + 1; q < ids.size(); ++q) {
          const ConstraintKey key(ids[p], ids[q], ConstraintKind::must_link);
          if (out.contains(key) || (!conflicted.empty() && conflicted.count({view, {key.lo, key.hi}}))) continue;
          out.merge_max(key, weight);
        }
      }
    }
  }

  for (const auto& [view, acc] : lifted) {
    auto& out = result.constraints[view];
    const auto& names = local_ids.at(view);
    acc.for_each([&](std::size_t p, std::size_t q, ConstraintKind kind, double w) {
      const ConstraintKey key(*names[p], *names[q], kind);
      if (!out.contains(key)) out.merge_max(key, w);
    });
  }

  result.relations = relations;
  for (auto& rel : result.relations) {
    for (const auto& [root, by_view] : members) {
      auto fu = by_view.find(rel.from_view);
      auto tv = by_view.find(rel.to_view);
      if (fu == by_view.end() || tv == by_view.end()) continue;
      for (const auto& u : fu->second)
        for (const auto& v : tv->second) rel.pairs.emplace(u, v);
    }
  }
  return result;
}

/// Per (pair, kind) key, keeps the larger weight; keys present on one side pass through.
inline ConstraintSet max_union(const ConstraintSet& left, const ConstraintSet& right) {
  ConstraintSet out = left;
  for (const auto& [key, w] : right) out.merge_max(key, w);
  return out;
}

/// Transfers constraints over view U into view V: each constraint yields one
/// constraint for every pair of relations touching its two endpoints.
/// Self-pairs are dropped and duplicates merged by max weight.
inline ConstraintSet map_constraints(const ConstraintSet& source, const RelationMap& relations) {
  // local indices for the target ids, in ascending id order
  std::map<InstanceId, std::size_t> target_index;
  for (const auto& [u, v] : relations.pairs) target_index.emplace(v, 0);
  std::vector<const InstanceId*> target_ids;
  for (auto& [id, idx] : target_index) {
    idx = target_ids.size();
    target_ids.push_back(&id);
  }
  std::map<InstanceId, std::vector<std::size_t>> targets;
  for (const auto& [u, v] : relations.pairs) targets[u].push_back(target_index.at(v));

  detail::PairMax best(target_ids.size());
  for (const auto& [key, w] : source) {
    auto ta = targets.find(key.lo);
    auto tb = targets.find(key.hi);
    if (ta == targets.end() || tb == targets.end()) continue;
    for (std::size_t x : ta->second) {
      for (std::size_t y : tb->second) {
        if (x == y) continue;
        best.merge(x, y, key.kind, w);
      }
    }
  }
  ConstraintSet out;
  best.for_each([&](std::size_t p, std::size_t q, ConstraintKind kind, double w) {
    out.merge_max(ConstraintKey(*target_ids[p], *target_ids[q], kind), w);
  });
  return out;
}

/// Ids of `view` appearing on either side of any of the given relation maps.
inline MappedSubset mapped_subset(const ViewData& view, const std::vector<RelationMap>& relations) {
  MappedSubset out{view.id(), {}};
  for (const auto& rel : relations) {
    if (rel.from_view == view.id())
      for (const auto& [u, v] : rel.pairs) out.ids.insert(u);
    if (rel.to_view == view.id())
      for (const auto& [u, v] : rel.pairs) out.ids.insert(v);
  }
  return out;
}

/// The constraints of `set` whose endpoints both lie in `subset`.
inline ConstraintSet restrict_to(const ConstraintSet& set, const MappedSubset& subset) {
  ConstraintSet out;
  for (const auto& [key, w] : set)
    if (subset.contains(key.lo) && subset.contains(key.hi)) out.merge_max(key, w);
  return out;
}

}  // namespace mvcc
