#pragma once

// Synthetic data and sampling: the Four Quadrants generator, pairing a
// labelled single view into two views, and seeded sampling of constraints and
// of a relation map.

#include "mvcc/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace mvcc {

/// splitmix64 finalizer; derives independent seeds from (seed, stream).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace detail {

inline std::string padded_id(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%03zu", prefix, i);
  return buf;
}

/// The first `take` elements of a seeded Fisher-Yates shuffle. Because the
/// swaps run front to back, a smaller `take` is always a prefix of a larger one.
template <class T>
std::vector<T> partial_shuffle(std::vector<T> items, std::size_t take, std::mt19937_64& rng) {
  take = std::min(take, items.size());
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, items.size() - 1);
    std::swap(items[i], items[pick(rng)]);
  }
  items.resize(take);
  return items;
}

}  // namespace detail

struct FourQuadrants {
  ViewData a;
  ViewData b;
  RelationMap relations;
  std::vector<int> quadrant_a;  // 1..4 per row of a
  std::vector<int> quadrant_b;
};

/// Quadrant centres, numbered I..IV in the order (3,3), (3,-3), (-3,3), (-3,-3).
inline const std::array<std::pair<double, double>, 4>& quadrant_means() {
  static const std::array<std::pair<double, double>, 4> means{{{3.0, 3.0}, {3.0, -3.0}, {-3.0, 3.0}, {-3.0, -3.0}}};
  return means;
}

/// How quadrants form the two true clusters. `diagonal` puts I and IV, the
/// blobs at (3,3) and (-3,-3), in cluster 0; `half_plane` groups by the sign
/// of the first coordinate instead.
enum class QuadrantGrouping { diagonal, half_plane };

inline const char* quadrant_label(int quadrant, QuadrantGrouping grouping = QuadrantGrouping::diagonal) {
  if (grouping == QuadrantGrouping::diagonal) return quadrant == 1 || quadrant == 4 ? "0" : "1";
  return quadrant == 1 || quadrant == 2 ? "0" : "1";
}

inline QuadrantGrouping parse_grouping(const std::string& s) {
  if (s == "diagonal") return QuadrantGrouping::diagonal;
  if (s == "half-plane") return QuadrantGrouping::half_plane;
  throw std::invalid_argument("quadrant grouping must be diagonal or half-plane, got '" + s + "'");
}

inline const char* to_string(QuadrantGrouping g) { return g == QuadrantGrouping::diagonal ? "diagonal" : "half-plane"; }

inline FourQuadrants gen_four_quadrants(std::uint64_t seed, std::size_t per_quadrant = 50,
                                        QuadrantGrouping grouping = QuadrantGrouping::diagonal) {
  if (per_quadrant < 2) throw std::invalid_argument("per_quadrant must be at least 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<std::array<double, 2>> rows[2];
  std::vector<int> quads[2];
  for (int q = 1; q <= 4; ++q) {
    const auto [mx, my] = quadrant_means()[static_cast<std::size_t>(q - 1)];
    for (std::size_t draw = 0; draw < per_quadrant; ++draw) {
      const double x = mx + noise(rng);
      const double y = my + noise(rng);
      const int side = draw % 2 == 0 ? 0 : 1;
      rows[side].push_back({x, y});
      quads[side].push_back(q);
    }
  }

  auto make_view = [&](int side, const char* view_id, char prefix) {
    const std::size_t n = rows[side].size();
    Matrix m(static_cast<Eigen::Index>(n), 2);
    std::vector<InstanceId> ids;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) {
      m(static_cast<Eigen::Index>(i), 0) = rows[side][i][0];
      m(static_cast<Eigen::Index>(i), 1) = rows[side][i][1];
      ids.push_back(detail::padded_id(prefix, i));
      labels.emplace_back(quadrant_label(quads[side][i], grouping));
    }
    return ViewData(view_id, std::move(m), std::move(ids), std::move(labels));
  };

  FourQuadrants out{make_view(0, "A", 'a'), make_view(1, "B", 'b'), RelationMap{"A", "B", {}}, quads[0], quads[1]};

  // greedy nearest-neighbour matching within each quadrant
  for (int q = 1; q <= 4; ++q) {
    std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
    for (std::size_t i = 0; i < out.quadrant_a.size(); ++i) {
      if (out.quadrant_a[i] != q) continue;
      for (std::size_t j = 0; j < out.quadrant_b.size(); ++j) {
        if (out.quadrant_b[j] != q) continue;
        candidates.emplace_back((out.a.row(i) - out.b.row(j)).squaredNorm(), i, j);
      }
    }
    std::sort(candidates.begin(), candidates.end());
    std::set<std::size_t> used_a, used_b;
    for (const auto& [dist, i, j] : candidates) {
      if (used_a.count(i) || used_b.count(j)) continue;
      used_a.insert(i);
      used_b.insert(j);
      out.relations.pairs.emplace(out.a.id_at(i), out.b.id_at(j));
    }
  }
  return out;
}

struct PairedViews {
  ViewData a;
  ViewData b;
  RelationMap relations;
};

/// Splits a labelled view into two: the first class of every pairing goes to
/// view A and the second to view B, and instances of paired classes are
/// matched at random without replacement. Unmatched instances stay in their
/// view with no relation.
inline PairedViews pair_views(const ViewData& single, const std::vector<std::pair<std::string, std::string>>& pairings,
                              std::uint64_t seed) {
  if (pairings.empty()) throw std::invalid_argument("at least one class pairing is required");
  const auto& labels = single.labels();
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i : single.id_order()) by_class[labels[i]].push_back(i);

  std::set<std::string> seen;
  for (const auto& [x, y] : pairings) {
    for (const auto& c : {x, y}) {
      if (!by_class.count(c)) throw std::invalid_argument("unknown class token '" + c + "' in pairing");
      if (!seen.insert(c).second) throw std::invalid_argument("class '" + c + "' appears in more than one pairing");
    }
  }

  auto make_view = [&](const char* view_id, bool first) {
    std::vector<std::size_t> rows;
    for (const auto& p : pairings) {
      const auto& members = by_class.at(first ? p.first : p.second);
      rows.insert(rows.end(), members.begin(), members.end());
    }
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(single.dim()));
    std::vector<InstanceId> ids;
    std::vector<std::string> lab;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      m.row(static_cast<Eigen::Index>(r)) = single.instances().row(static_cast<Eigen::Index>(rows[r]));
      ids.push_back(single.id_at(rows[r]));
      lab.push_back(labels[rows[r]]);
    }
    return ViewData(view_id, std::move(m), std::move(ids), std::move(lab));
  };

  PairedViews out{make_view("A", true), make_view("B", false), RelationMap{"A", "B", {}}};
  std::mt19937_64 rng(seed);
  for (const auto& [x, y] : pairings) {
    auto left = by_class.at(x);
    auto right = by_class.at(y);
    std::shuffle(left.begin(), left.end(), rng);
    std::shuffle(right.begin(), right.end(), rng);
    const std::size_t m = std::min(left.size(), right.size());
    for (std::size_t p = 0; p < m; ++p) out.relations.pairs.emplace(single.id_at(left[p]), single.id_at(right[p]));
  }
  return out;
}

/// count/2 must-links among same-label pairs and count/2 cannot-links among
/// different-label pairs, all weight 1. The two kinds use separate streams,
/// so the sample for a smaller count is contained in the one for a larger.
inline ConstraintSet sample_constraints(const ViewData& view, std::size_t count, std::uint64_t seed) {
  if (count % 2 != 0) throw std::invalid_argument("constraint count must be even, got " + std::to_string(count));
  const auto& labels = view.labels();
  const auto& order = view.id_order();
  std::vector<std::pair<std::size_t, std::size_t>> same, diff;
  for (std::size_t p = 0; p < order.size(); ++p) {
    for (std::size_t q = p + 1; q < order.size(); ++q) {
      (labels[order[p]] == labels[order[q]] ? same : diff).emplace_back(order[p], order[q]);
    }
  }
  const std::size_t half = count / 2;
  if (same.size() < half || diff.size() < half) {
    throw std::invalid_argument("cannot sample " + std::to_string(half) + " of each kind from view '" + view.id() +
                                "': only " + std::to_string(same.size()) + " same-label and " +
                                std::to_string(diff.size()) + " different-label pairs exist");
  }
  std::mt19937_64 ml_rng(mix_seed(seed, 0));
  std::mt19937_64 cl_rng(mix_seed(seed, 1));
  ConstraintSet out;
  for (const auto& [i, j] : detail::partial_shuffle(std::move(same), half, ml_rng))
    out.insert(Constraint{view.id_at(i), view.id_at(j), 1.0, ConstraintKind::must_link});
  for (const auto& [i, j] : detail::partial_shuffle(std::move(diff), half, cl_rng))
    out.insert(Constraint{view.id_at(i), view.id_at(j), 1.0, ConstraintKind::cannot_link});
  return out;
}

inline std::size_t mapping_sample_size(double fraction, std::size_t total) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("mapping fraction must lie in [0, 1]");
  // the small offset keeps 0.7 * 100 from rounding up to 71
  const double raw = std::ceil(fraction * static_cast<double>(total) - 1e-9);
  return std::min(total, static_cast<std::size_t>(std::max(0.0, raw)));
}

/// Uniform sample without replacement of ceil(fraction * |pairs|) pairs. For a
/// fixed seed, the sample at a smaller fraction is a subset of a larger one.
inline RelationMap sample_mapping(const RelationMap& relations, double fraction, std::uint64_t seed) {
  const std::size_t take = mapping_sample_size(fraction, relations.pairs.size());
  std::vector<std::pair<InstanceId, InstanceId>> all(relations.pairs.begin(), relations.pairs.end());
  std::mt19937_64 rng(seed);
  RelationMap out{relations.from_view, relations.to_view, {}};
  for (auto& p : detail::partial_shuffle(std::move(all), take, rng)) out.pairs.insert(std::move(p));
  return out;
}

}  // namespace mvcc
