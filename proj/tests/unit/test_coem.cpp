#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mvcc;

namespace {

constexpr auto ML = ConstraintKind::must_link;
constexpr auto CL = ConstraintKind::cannot_link;

CoEmState state_with(const ConstraintSet& propagated, double objective, std::size_t iteration = 1) {
  CoEmState s;
  s.iteration = iteration;
  ViewState v;
  v.clustered = true;
  v.propagated = propagated;
  v.clustering.objective_trace = {objective};
  s.views = {v, v};
  return s;
}

// A third Four Quadrants view, matched to `b` by quadrant and draw order.
struct Chain {
  ViewData a, b, c;
  RelationMap ab, bc;
};

Chain chain(std::uint64_t seed) {
  auto first = gen_four_quadrants(seed);
  auto second = gen_four_quadrants(seed + 7919);
  std::vector<InstanceId> ids;
  for (std::size_t i = 0; i < second.b.size(); ++i) ids.push_back("c" + second.b.id_at(i).substr(1));
  ViewData c("C", second.b.instances(), ids, second.b.labels());
  RelationMap bc{"B", "C", {}};
  for (int q = 1; q <= 4; ++q) {
    std::vector<std::size_t> left, right;
    for (std::size_t i = 0; i < first.b.size(); ++i)
      if (first.quadrant_b[i] == q) left.push_back(i);
    for (std::size_t i = 0; i < second.b.size(); ++i)
      if (second.quadrant_b[i] == q) right.push_back(i);
    for (std::size_t k = 0; k < std::min(left.size(), right.size()); ++k)
      bc.pairs.emplace(first.b.id_at(left[k]), c.id_at(right[k]));
  }
  return {first.a, first.b, c, first.relations, bc};
}

}  // namespace

TEST(HasConverged, IdenticalStates) {
  ConstraintSet p{{"a", "b", 0.8, ML}};
  EXPECT_TRUE(has_converged(state_with(p, 10), state_with(p, 10), 1e-6, 20));
}

TEST(HasConverged, WeightChangeBlocks) {
  ConstraintSet p{{"a", "b", 0.8, ML}}, q{{"a", "b", 0.9, ML}};
  EXPECT_FALSE(has_converged(state_with(p, 10), state_with(q, 10), 1e-6, 20));
}

TEST(HasConverged, WithinTolerance) {
  ConstraintSet p{{"a", "b", 0.8, ML}}, q{{"a", "b", 0.8 + 1e-12, ML}};
  EXPECT_TRUE(has_converged(state_with(p, 10), state_with(q, 10), 1e-6, 20));
}

TEST(HasConverged, ObjectiveChangeAndKeyChangeBlock) {
  ConstraintSet p{{"a", "b", 0.8, ML}}, q{{"a", "b", 0.8, CL}};
  EXPECT_FALSE(has_converged(state_with(p, 10), state_with(p, 11), 1e-6, 20));
  EXPECT_FALSE(has_converged(state_with(p, 10), state_with(q, 10), 1e-6, 20));
}

TEST(HasConverged, IterationBudgetForcesStop) {
  ConstraintSet p{{"a", "b", 0.8, ML}}, q{{"a", "b", 0.9, ML}};
  EXPECT_TRUE(has_converged(state_with(p, 10), state_with(q, 10, 20), 1e-6, 20));
}

TEST(RunTwoView, EmptyInputsDegenerateToIndependentClustering) {
  auto fq = gen_four_quadrants(0);
  CoEmConfig cfg;
  auto res = run_two_view(fq.a, fq.b, {}, {}, RelationMap{"A", "B", {}}, cfg);
  EXPECT_EQ(res.views[0].clustering.model.assignment, cluster(fq.a, {}, cfg.clustering).model.assignment);
  EXPECT_EQ(res.views[1].clustering.model.assignment, cluster(fq.b, {}, cfg.clustering).model.assignment);
  EXPECT_TRUE(res.views[0].propagated.empty());
  EXPECT_TRUE(res.converged);
}

TEST(RunTwoView, ThresholdOneWithCompleteMappingIsDirectMapping) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto fq = gen_four_quadrants(seed);
    auto ca = sample_constraints(fq.a, 20, mix_seed(seed, 0));
    auto cb = sample_constraints(fq.b, 20, mix_seed(seed, 1));
    CoEmConfig cfg;
    cfg.thresholds = {1.0};
    auto res = run_two_view(fq.a, fq.b, ca, cb, fq.relations, cfg);

    auto closure = build_closure({{"A", ca}, {"B", cb}}, {fq.relations});
    const auto& rel = closure.relations.at(0);
    auto ua = max_union(closure.constraints["A"], map_constraints(closure.constraints["B"], rel.reversed()));
    auto ub = max_union(closure.constraints["B"], map_constraints(closure.constraints["A"], rel));
    EXPECT_EQ(res.views[0].unified, ua) << seed;
    EXPECT_EQ(res.views[1].unified, ub) << seed;
    EXPECT_EQ(res.views[0].clustering.model.assignment, cluster(fq.a, ua, cfg.clustering).model.assignment);
    EXPECT_EQ(res.views[1].clustering.model.assignment, cluster(fq.b, ub, cfg.clustering).model.assignment);
  }
}

TEST(RunTwoView, FourQuadrantsFortyConstraintsFullMapping) {
  double total = 0;
  const int seeds = 25;
  for (int s = 0; s < seeds; ++s) {
    auto fq = gen_four_quadrants(0);
    const auto seed = static_cast<std::uint64_t>(s);
    auto ca = sample_constraints(fq.a, 40, mix_seed(seed, 0));
    auto cb = sample_constraints(fq.b, 40, mix_seed(seed, 1));
    CoEmConfig cfg;
    cfg.clustering.seed = seed;
    auto res = run_two_view(fq.a, fq.b, ca, cb, fq.relations, cfg);
    total += 0.5 * (pairwise_f(fq.a, res.views[0].clustering.model).f_measure +
                    pairwise_f(fq.b, res.views[1].clustering.model).f_measure);
  }
  EXPECT_GE(total / seeds, 0.9);
}

TEST(RunTwoView, DeterministicTraces) {
  auto fq = gen_four_quadrants(2);
  auto ca = sample_constraints(fq.a, 30 - 10, 5);
  auto cb = sample_constraints(fq.b, 20, 6);
  auto rel = sample_mapping(fq.relations, 0.4, 7);
  for (auto order : {ViewOrder::fixed, ViewOrder::seeded_random}) {
    CoEmConfig cfg;
    cfg.view_order = order;
    auto x = run_two_view(fq.a, fq.b, ca, cb, rel, cfg);
    auto y = run_two_view(fq.a, fq.b, ca, cb, rel, cfg);
    ASSERT_EQ(x.trace.size(), y.trace.size());
    for (std::size_t i = 0; i < x.trace.size(); ++i) {
      EXPECT_EQ(x.trace[i].objectives, y.trace[i].objectives);
      EXPECT_EQ(x.trace[i].order, y.trace[i].order);
      EXPECT_EQ(x.trace[i].propagated_ml, y.trace[i].propagated_ml);
      EXPECT_EQ(x.trace[i].propagated_changed, y.trace[i].propagated_changed);
    }
    EXPECT_EQ(x.views[0].propagated, y.views[0].propagated);
  }
}

TEST(RunTwoView, TraceAndStoppingFlags) {
  auto fq = gen_four_quadrants(1);
  auto ca = sample_constraints(fq.a, 20, 1);
  auto cb = sample_constraints(fq.b, 20, 2);
  CoEmConfig cfg;
  cfg.max_outer_iters = 1;
  auto one = run_two_view(fq.a, fq.b, ca, cb, fq.relations, cfg);
  EXPECT_EQ(one.outer_iterations, 1u);
  EXPECT_TRUE(one.forced_stop);
  EXPECT_FALSE(one.converged);
  cfg.max_outer_iters = 20;
  auto full = run_two_view(fq.a, fq.b, ca, cb, fq.relations, cfg);
  EXPECT_EQ(full.trace.size(), full.outer_iterations);
  if (full.converged) {
    EXPECT_EQ(full.trace.back().propagated_changed, (std::vector<std::size_t>{0, 0}));
  }
  for (const auto& tr : full.trace) EXPECT_EQ(tr.order, (std::vector<std::size_t>{0, 1}));
  // the unified set always holds the closed originals
  for (std::size_t v = 0; v < 2; ++v)
    for (const auto& [key, w] : full.closure.constraints.at(v ? "B" : "A")) {
      ASSERT_TRUE(full.views[v].unified.contains(key));
      EXPECT_GE(*full.views[v].unified.weight(key.lo, key.hi, key.kind), w);
    }
}

TEST(RunTwoView, InvalidInputsThrow) {
  auto fq = gen_four_quadrants(0);
  CoEmConfig cfg;
  cfg.thresholds = {0.0};
  EXPECT_THROW(run_two_view(fq.a, fq.b, {}, {}, fq.relations, cfg), std::invalid_argument);
  cfg.thresholds = {0.75};
  cfg.max_outer_iters = 0;
  EXPECT_THROW(run_two_view(fq.a, fq.b, {}, {}, fq.relations, cfg), std::invalid_argument);
  cfg.max_outer_iters = 5;
  EXPECT_THROW(run_two_view(fq.a, fq.b, {}, {}, RelationMap{"A", "Z", {}}, cfg), std::invalid_argument);
  EXPECT_THROW(run_two_view(fq.a, fq.b, {}, {}, RelationMap{"A", "B", {{"a000", "nope"}}}, cfg),
               std::invalid_argument);
  EXPECT_THROW(run_two_view(fq.a, fq.b, {{"a000", "zz", 1, ML}}, {}, fq.relations, cfg), std::invalid_argument);
}

TEST(RunTwoView, ClusterMembershipEStep) {
  auto fq = gen_four_quadrants(0);
  auto rel = sample_mapping(fq.relations, 0.2, 1);
  CoEmConfig cfg;
  cfg.estep = EStep::cluster_membership;
  auto res = run_two_view(fq.a, fq.b, sample_constraints(fq.a, 20, 1), sample_constraints(fq.b, 20, 2), rel, cfg);
  for (std::size_t v = 0; v < 2; ++v) {
    const std::size_t m = res.mapped[v].size();
    EXPECT_EQ(res.views[v].propagated.size(), m * (m - 1) / 2);
  }
}

TEST(RunMultiView, TwoViewsMatchTwoViewDriver) {
  auto fq = gen_four_quadrants(4);
  auto ca = sample_constraints(fq.a, 40, 1), cb = sample_constraints(fq.b, 40, 2);
  auto rel = sample_mapping(fq.relations, 0.4, 3);
  CoEmConfig cfg;
  auto x = run_two_view(fq.a, fq.b, ca, cb, rel, cfg);
  auto y = run_multi_view({fq.a, fq.b}, {ca, cb}, {rel}, cfg);
  // a reversed relation map describes the same correspondence
  auto z = run_multi_view({fq.a, fq.b}, {ca, cb}, {rel.reversed()}, cfg);
  for (std::size_t v = 0; v < 2; ++v) {
    EXPECT_EQ(x.views[v].clustering.model.assignment, y.views[v].clustering.model.assignment);
    EXPECT_EQ(x.views[v].propagated, y.views[v].propagated);
    EXPECT_EQ(x.views[v].propagated, z.views[v].propagated);
  }
}

TEST(RunMultiView, IsolatedViewEqualsSingleViewClustering) {
  auto ch = chain(0);
  auto ca = sample_constraints(ch.a, 20, 1), cb = sample_constraints(ch.b, 20, 2), cc = sample_constraints(ch.c, 20, 3);
  CoEmConfig cfg;
  auto res = run_multi_view({ch.a, ch.b, ch.c}, {ca, cb, cc}, {ch.ab}, cfg);
  auto closed_c = build_closure({{"C", cc}}, {}).constraints.at("C");
  EXPECT_EQ(res.views[2].clustering.model.assignment, cluster(ch.c, closed_c, cfg.clustering).model.assignment);
  EXPECT_TRUE(res.views[2].propagated.empty());
  EXPECT_EQ(res.views[2].unified, closed_c);
}

TEST(RunMultiView, ChainCarriesConstraintsToTheFarView) {
  std::vector<double> gain;
  for (std::uint64_t s = 0; s < 25; ++s) {
    auto ch = chain(s);
    CoEmConfig cfg;
    cfg.clustering.seed = s;
    auto res = run_multi_view({ch.a, ch.b, ch.c}, {sample_constraints(ch.a, 60, s), {}, {}}, {ch.ab, ch.bc}, cfg);
    const double with = pairwise_f(ch.c, res.views[2].clustering.model).f_measure;
    const double alone = pairwise_f(ch.c, cluster(ch.c, {}, cfg.clustering).model).f_measure;
    gain.push_back(with - alone);
  }
  double mean = 0, ss = 0;
  for (double g : gain) mean += g / static_cast<double>(gain.size());
  for (double g : gain) ss += (g - mean) * (g - mean);
  const double se = std::sqrt(ss / static_cast<double>(gain.size() - 1)) / std::sqrt(static_cast<double>(gain.size()));
  EXPECT_GT(mean, 2 * se);
  EXPECT_GT(mean, 0.0);
}

TEST(RunSingleViewCp, ThresholdOneIsPlainConstrainedClustering) {
  auto fq = gen_four_quadrants(0);
  // endpoints pairwise disjoint, so the closure adds nothing
  ConstraintSet cs;
  for (std::size_t i = 0; i + 1 < 24; i += 2)
    cs.insert({fq.a.id_at(i), fq.a.id_at(i + 1), 1.0,
               fq.a.labels()[i] == fq.a.labels()[i + 1] ? ML : CL});
  CoEmConfig cfg;
  cfg.thresholds = {1.0};
  auto res = run_single_view_cp(fq.a, cs, cfg);
  EXPECT_EQ(res.views[0].clustering.model.assignment, cluster(fq.a, cs, cfg.clustering).model.assignment);
  EXPECT_EQ(res.views[0].propagated, cs);
}

TEST(RunSingleViewCp, ZeroConstraintsIsUnconstrained) {
  auto fq = gen_four_quadrants(3);
  CoEmConfig cfg;
  auto res = run_single_view_cp(fq.b, {}, cfg);
  EXPECT_EQ(res.views[0].clustering.model.assignment, cluster(fq.b, {}, cfg.clustering).model.assignment);
  EXPECT_TRUE(res.views[0].propagated.empty());
}

TEST(RunSingleViewCp, ModerateConstraintsDoNotHurt) {
  double cp = 0, plain = 0;
  auto fq = gen_four_quadrants(0);
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto cs = sample_constraints(fq.a, 40, s);
    CoEmConfig cfg;
    cfg.clustering.seed = s;
    cp += pairwise_f(fq.a, run_single_view_cp(fq.a, cs, cfg).views[0].clustering.model).f_measure;
    plain += pairwise_f(fq.a, cluster(fq.a, cs, cfg.clustering).model).f_measure;
  }
  EXPECT_GE(cp, plain);
}
