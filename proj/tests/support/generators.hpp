#pragma once

// Random inputs shared by the unit tests and the acceptance binary.

#include "support/oracles.hpp"

#include <random>

namespace gen {

using namespace mvcc;

struct RandomGraph {
  std::map<std::string, ConstraintSet> sets;
  std::vector<RelationMap> relations;
};

// Two views A and B with `per_view` ids each.
inline RandomGraph random_graph(std::mt19937_64& rng, std::size_t per_view, std::size_t n_ml, std::size_t n_cl,
                                std::size_t n_rel) {
  RandomGraph g;
  std::uniform_int_distribution<std::size_t> id(0, per_view - 1);
  std::uniform_int_distribution<int> view(0, 1);
  std::uniform_real_distribution<double> w(0.1, 1.0);
  auto name = [](int v, std::size_t i) { return std::string(1, v ? 'b' : 'a') + std::to_string(i); };
  auto add = [&](ConstraintKind kind) {
    for (;;) {
      const int v = view(rng);
      const auto i = id(rng), j = id(rng);
      if (i == j) continue;
      auto& s = g.sets[v ? "B" : "A"];
      if (s.contains(name(v, i), name(v, j), kind)) continue;
      s.insert({name(v, i), name(v, j), w(rng), kind});
      return;
    }
  };
  for (std::size_t c = 0; c < n_ml; ++c) add(ConstraintKind::must_link);
  for (std::size_t c = 0; c < n_cl; ++c) add(ConstraintKind::cannot_link);
  RelationMap r{"A", "B", {}};
  while (r.pairs.size() < n_rel) r.pairs.emplace(name(0, id(rng)), name(1, id(rng)));
  g.relations.push_back(r);
  return g;
}

inline ConstraintSet random_set(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> id(0, 9), kind(0, 1);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  ConstraintSet s;
  while (s.size() < n) {
    const int a = id(rng), b = id(rng);
    if (a == b) continue;
    const auto k = kind(rng) ? ConstraintKind::must_link : ConstraintKind::cannot_link;
    s.merge_max({"p" + std::to_string(a), "p" + std::to_string(b), w(rng), k});
  }
  return s;
}

struct Config {
  ViewData view;
  ConstraintSet sources;
  ClusterModel model;
  MappedSubset candidates;
  double threshold;
};

inline Config random_config(std::mt19937_64& rng, Variant variant) {
  std::uniform_int_distribution<std::size_t> n(6, 24), d(1, 3), count(1, 4);
  std::uniform_real_distribution<double> t(0.3, 1.0), coin(0, 1);
  Config c;
  c.view = oracle::random_view("V", n(rng), d(rng), rng, 2);
  c.sources = sample_constraints(c.view, 2 * count(rng), rng());
  // soften some weights so the threshold bound varies per endpoint
  ConstraintSet soft;
  for (const auto& [key, w] : c.sources) soft.merge_max(key, coin(rng) < 0.5 ? w : 0.5 + 0.5 * coin(rng));
  c.sources = soft;
  c.model = cluster(c.view, c.sources, ClusteringConfig{2, variant, 30, 1e-6, 0}).model;
  c.candidates.view_id = "V";
  for (const auto& id : c.view.ids())
    if (coin(rng) < 0.7) c.candidates.ids.insert(id);
  c.threshold = t(rng);
  return c;
}

}  // namespace gen
