#pragma once

// Domain types shared by every mvcc module: views, pairwise constraints,
// constraint sets keyed by unordered pair, and cross-view relation maps.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mvcc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using InstanceId = std::string;

// Raised for malformed input rows; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// ---------------------------------------------------------------------------
// ViewData
// ---------------------------------------------------------------------------

/// One view of the data: an n x d matrix with a stable identifier per row and
/// optional ground-truth class tokens (used only for sampling and evaluation).
class ViewData {
 public:
  ViewData() = default;

  ViewData(std::string view_id, Matrix instances, std::vector<InstanceId> ids,
           std::optional<std::vector<std::string>> labels = std::nullopt)
      : view_id_(std::move(view_id)),
        instances_(std::move(instances)),
        ids_(std::move(ids)),
        labels_(std::move(labels)) {
    if (instances_.rows() < 1 || instances_.cols() < 1)
      throw std::invalid_argument("view '" + view_id_ + "' must have at least one row and column");
    if (static_cast<std::size_t>(instances_.rows()) != ids_.size())
      throw std::invalid_argument("view '" + view_id_ + "': id count does not match row count");
    if (!instances_.allFinite())
      throw std::invalid_argument("view '" + view_id_ + "' contains non-finite values");
    if (labels_ && labels_->size() != ids_.size())
      throw std::invalid_argument("view '" + view_id_ + "': label count does not match row count");
    index_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      if (!index_.emplace(ids_[i], i).second)
        throw std::invalid_argument("view '" + view_id_ + "': duplicate instance id '" + ids_[i] + "'");
    }
    order_.resize(ids_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    std::sort(order_.begin(), order_.end(),
              [this](std::size_t a, std::size_t b) { return ids_[a] < ids_[b]; });
  }

  const std::string& id() const noexcept { return view_id_; }
  const Matrix& instances() const noexcept { return instances_; }
  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(instances_.cols()); }
  Vector row(std::size_t i) const { return instances_.row(static_cast<Eigen::Index>(i)).transpose(); }

  const std::vector<InstanceId>& ids() const noexcept { return ids_; }
  const InstanceId& id_at(std::size_t i) const { return ids_.at(i); }

  bool has_labels() const noexcept { return labels_.has_value(); }
  const std::vector<std::string>& labels() const {
    if (!labels_) throw std::logic_error("view '" + view_id_ + "' has no labels");
    return *labels_;
  }
  const std::optional<std::vector<std::string>>& maybe_labels() const noexcept { return labels_; }

  std::optional<std::size_t> find(const InstanceId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(const InstanceId& id) const {
    auto it = index_.find(id);
    if (it == index_.end())
      throw std::invalid_argument("unknown instance id '" + id + "' in view '" + view_id_ + "'");
    return it->second;
  }

  bool contains(const InstanceId& id) const { return index_.count(id) != 0; }

  /// Row indices sorted by ascending instance id.
  const std::vector<std::size_t>& id_order() const noexcept { return order_; }

 private:
  std::string view_id_;
  Matrix instances_;
  std::vector<InstanceId> ids_;
  std::optional<std::vector<std::string>> labels_;
  std::unordered_map<InstanceId, std::size_t> index_;
  std::vector<std::size_t> order_;
};

// ---------------------------------------------------------------------------
// Constraints
// ---------------------------------------------------------------------------

enum class ConstraintKind { must_link, cannot_link };

inline const char* to_string(ConstraintKind kind) {
  return kind == ConstraintKind::must_link ? "ML" : "CL";
}

inline ConstraintKind parse_kind(const std::string& token) {
  if (token == "ML") return ConstraintKind::must_link;
  if (token == "CL") return ConstraintKind::cannot_link;
  throw std::invalid_argument("constraint kind must be ML or CL, got '" + token + "'");
}

struct Constraint {
  InstanceId a;
  InstanceId b;
  double weight = 1.0;
  ConstraintKind kind = ConstraintKind::must_link;
};

/// Canonical key: the unordered pair stored as (min id, max id) plus the kind.
struct ConstraintKey {
  InstanceId lo;
  InstanceId hi;
  ConstraintKind kind;

  ConstraintKey(const InstanceId& a, const InstanceId& b, ConstraintKind k)
      : lo(std::min(a, b)), hi(std::max(a, b)), kind(k) {}

  friend auto operator<=>(const ConstraintKey&, const ConstraintKey&) = default;
  friend bool operator==(const ConstraintKey&, const ConstraintKey&) = default;
};

inline void validate(const Constraint& c) {
  if (c.a == c.b) throw std::invalid_argument("constraint endpoints must differ ('" + c.a + "')");
  if (!(c.weight >= 0.0) || !std::isfinite(c.weight))
    throw std::invalid_argument("constraint weight must be finite and non-negative");
}

/// Pairwise constraints over one view, at most one entry per (pair, kind).
/// A pair may carry both a must-link and a cannot-link entry.
class ConstraintSet {
 public:
  using Storage = std::map<ConstraintKey, double>;
  using const_iterator = Storage::const_iterator;

  ConstraintSet() = default;
  ConstraintSet(std::initializer_list<Constraint> init) {
    for (const auto& c : init) merge_max(c);
  }

  /// Inserts if the key is absent. Returns false (and leaves the set alone) otherwise.
  bool insert(const Constraint& c) {
    validate(c);
    return entries_.emplace(ConstraintKey(c.a, c.b, c.kind), c.weight).second;
  }

  /// Inserts or raises the stored weight to max(stored, c.weight).
  void merge_max(const Constraint& c) {
    validate(c);
    merge_max(ConstraintKey(c.a, c.b, c.kind), c.weight);
  }

  void merge_max(const ConstraintKey& key, double weight) {
    auto [it, inserted] = entries_.emplace(key, weight);
    if (!inserted && weight > it->second) it->second = weight;
  }

  /// Overwrites the weight for the key.
  void assign(const Constraint& c) {
    validate(c);
    entries_[ConstraintKey(c.a, c.b, c.kind)] = c.weight;
  }

  bool erase(const InstanceId& a, const InstanceId& b, ConstraintKind kind) {
    return entries_.erase(ConstraintKey(a, b, kind)) != 0;
  }

  std::optional<double> weight(const InstanceId& a, const InstanceId& b, ConstraintKind kind) const {
    auto it = entries_.find(ConstraintKey(a, b, kind));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(const InstanceId& a, const InstanceId& b, ConstraintKind kind) const {
    return entries_.count(ConstraintKey(a, b, kind)) != 0;
  }
  bool contains(const ConstraintKey& key) const { return entries_.count(key) != 0; }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t count(ConstraintKind kind) const {
    return static_cast<std::size_t>(std::count_if(
        entries_.begin(), entries_.end(), [kind](const auto& e) { return e.first.kind == kind; }));
  }

  const_iterator begin() const noexcept { return entries_.begin(); }
  const_iterator end() const noexcept { return entries_.end(); }

  std::vector<Constraint> to_vector() const {
    std::vector<Constraint> out;
    out.reserve(entries_.size());
    for (const auto& [key, w] : entries_) out.push_back({key.lo, key.hi, w, key.kind});
    return out;
  }

  friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;

 private:
  Storage entries_;
};

// ---------------------------------------------------------------------------
// Cross-view relations
// ---------------------------------------------------------------------------

/// Bipartite correspondences between instances of two views. Not necessarily
/// complete or one-to-one.
struct RelationMap {
  std::string from_view;
  std::string to_view;
  std::set<std::pair<InstanceId, InstanceId>> pairs;

  RelationMap reversed() const {
    RelationMap out{to_view, from_view, {}};
    for (const auto& [u, v] : pairs) out.pairs.emplace(v, u);
    return out;
  }

  void validate(const ViewData& from, const ViewData& to) const {
    if (from.id() != from_view || to.id() != to_view)
      throw std::invalid_argument("relation map " + from_view + "->" + to_view +
                                  " applied to views " + from.id() + "->" + to.id());
    for (const auto& [u, v] : pairs) {
      if (!from.contains(u))
        throw std::invalid_argument("relation references unknown id '" + u + "' in view " + from_view);
      if (!to.contains(v))
        throw std::invalid_argument("relation references unknown id '" + v + "' in view " + to_view);
    }
  }

  friend bool operator==(const RelationMap&, const RelationMap&) = default;
};

/// Instances of one view that participate in at least one cross-view relation.
struct MappedSubset {
  std::string view_id;
  std::set<InstanceId> ids;

  bool contains(const InstanceId& id) const { return ids.count(id) != 0; }
  std::size_t size() const noexcept { return ids.size(); }
  bool empty() const noexcept { return ids.empty(); }

  friend bool operator==(const MappedSubset&, const MappedSubset&) = default;
};

// ---------------------------------------------------------------------------
// Index-based constraint view used by the numeric kernels
// ---------------------------------------------------------------------------

struct IndexedConstraint {
  std::size_t i;
  std::size_t j;
  double weight;
  ConstraintKind kind;
};

/// Row-index form of a ConstraintSet over a particular view, with per-row
/// adjacency (indices into `all`).
struct ConstraintIndex {
  std::vector<IndexedConstraint> all;
  std::vector<std::vector<std::size_t>> incident;

  ConstraintIndex() = default;

  ConstraintIndex(const ViewData& view, const ConstraintSet& set) : incident(view.size()) {
    all.reserve(set.size());
    for (const auto& [key, w] : set) {
      const std::size_t i = view.index_of(key.lo);
      const std::size_t j = view.index_of(key.hi);
      incident[i].push_back(all.size());
      incident[j].push_back(all.size());
      all.push_back({i, j, w, key.kind});
    }
  }

  static std::size_t partner(const IndexedConstraint& c, std::size_t self) {
    return c.i == self ? c.j : c.i;
  }
};

}  // namespace mvcc
