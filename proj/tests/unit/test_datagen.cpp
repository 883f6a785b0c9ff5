#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace mvcc;

TEST(FourQuadrants, Shape) {
  auto fq = gen_four_quadrants(0);
  EXPECT_EQ(fq.a.size(), 100u);
  EXPECT_EQ(fq.b.size(), 100u);
  EXPECT_EQ(fq.relations.pairs.size(), 100u);
  fq.relations.validate(fq.a, fq.b);
  std::set<InstanceId> left, right;
  for (const auto& [u, v] : fq.relations.pairs) {
    EXPECT_TRUE(left.insert(u).second);
    EXPECT_TRUE(right.insert(v).second);
    EXPECT_EQ(fq.quadrant_a[fq.a.index_of(u)], fq.quadrant_b[fq.b.index_of(v)]);
  }
}

TEST(FourQuadrants, MeansAndLabels) {
  auto fq = gen_four_quadrants(1);
  for (const auto* view : {&fq.a, &fq.b}) {
    const auto& quads = view == &fq.a ? fq.quadrant_a : fq.quadrant_b;
    for (int q = 1; q <= 4; ++q) {
      Vector sum = Vector::Zero(2);
      int n = 0;
      for (std::size_t i = 0; i < view->size(); ++i) {
        if (quads[i] != q) continue;
        sum += view->row(i);
        ++n;
        EXPECT_EQ(view->labels()[i], (q == 1 || q == 4) ? "0" : "1");
      }
      EXPECT_EQ(n, 25);
      const auto [mx, my] = quadrant_means()[q - 1];
      EXPECT_NEAR(sum(0) / n, mx, 0.5);
      EXPECT_NEAR(sum(1) / n, my, 0.5);
    }
  }
  auto hp = gen_four_quadrants(1, 50, QuadrantGrouping::half_plane);
  for (std::size_t i = 0; i < hp.a.size(); ++i)
    EXPECT_EQ(hp.a.labels()[i], hp.quadrant_a[i] <= 2 ? "0" : "1");
}

TEST(FourQuadrants, Deterministic) {
  auto x = gen_four_quadrants(7), y = gen_four_quadrants(7), z = gen_four_quadrants(8);
  EXPECT_EQ(x.a.instances(), y.a.instances());
  EXPECT_EQ(x.relations.pairs, y.relations.pairs);
  EXPECT_NE(x.a.instances(), z.a.instances());
  EXPECT_THROW(gen_four_quadrants(0, 1), std::invalid_argument);
  EXPECT_THROW(parse_grouping("rows"), std::invalid_argument);
}

TEST(PairViews, UnequalClassesLeaveIsolatedInstances) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  for (int i = 0; i < 10; ++i) rows.push_back({double(i)}), labels.push_back("p");
  for (int i = 0; i < 7; ++i) rows.push_back({double(100 + i)}), labels.push_back("q");
  auto single = oracle::make_view("S", rows, labels);
  auto pv = pair_views(single, {{"p", "q"}}, 3);
  EXPECT_EQ(pv.a.size(), 10u);
  EXPECT_EQ(pv.b.size(), 7u);
  EXPECT_EQ(pv.relations.pairs.size(), 7u);
  pv.relations.validate(pv.a, pv.b);
  std::set<InstanceId> related;
  for (const auto& [u, v] : pv.relations.pairs) related.insert(u);
  EXPECT_EQ(pv.a.size() - related.size(), 3u);
}

TEST(PairViews, EqualClassesAndErrors) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  for (const char* c : {"w", "x", "y", "z"})
    for (int i = 0; i < 5; ++i) rows.push_back({double(i)}), labels.push_back(c);
  auto single = oracle::make_view("S", rows, labels);
  auto pv = pair_views(single, {{"w", "x"}, {"y", "z"}}, 1);
  EXPECT_EQ(pv.relations.pairs.size(), 10u);
  for (const auto& [u, v] : pv.relations.pairs) {
    const auto lu = pv.a.labels()[pv.a.index_of(u)], lv = pv.b.labels()[pv.b.index_of(v)];
    EXPECT_TRUE((lu == "w" && lv == "x") || (lu == "y" && lv == "z"));
  }
  EXPECT_THROW(pair_views(single, {{"w", "nope"}}, 1), std::invalid_argument);
  EXPECT_THROW(pair_views(single, {{"w", "x"}, {"x", "y"}}, 1), std::invalid_argument);
  EXPECT_THROW(pair_views(single, {}, 1), std::invalid_argument);
}

TEST(SampleConstraints, CountsKindsAndCorrectness) {
  auto fq = gen_four_quadrants(0);
  EXPECT_TRUE(sample_constraints(fq.a, 0, 1).empty());
  auto cs = sample_constraints(fq.a, 40, 1);
  EXPECT_EQ(cs.count(ConstraintKind::must_link), 20u);
  EXPECT_EQ(cs.count(ConstraintKind::cannot_link), 20u);
  for (const auto& [key, w] : cs) {
    EXPECT_DOUBLE_EQ(w, 1.0);
    const bool same = fq.a.labels()[fq.a.index_of(key.lo)] == fq.a.labels()[fq.a.index_of(key.hi)];
    EXPECT_EQ(same, key.kind == ConstraintKind::must_link);
  }
  EXPECT_THROW(sample_constraints(fq.a, 3, 1), std::invalid_argument);
  auto tiny = oracle::make_view("T", {{0}, {1}, {2}}, std::vector<std::string>{"a", "a", "b"});
  EXPECT_THROW(sample_constraints(tiny, 4, 1), std::invalid_argument);
}

TEST(SampleConstraints, NestedAcrossCounts) {
  auto fq = gen_four_quadrants(0);
  auto small = sample_constraints(fq.a, 20, 9), large = sample_constraints(fq.a, 60, 9);
  for (const auto& [key, w] : small) EXPECT_TRUE(large.contains(key));
}

TEST(SampleMapping, FractionsAndNesting) {
  auto fq = gen_four_quadrants(0);
  EXPECT_EQ(sample_mapping(fq.relations, 1.0, 2).pairs, fq.relations.pairs);
  EXPECT_TRUE(sample_mapping(fq.relations, 0.0, 2).pairs.empty());
  auto part = sample_mapping(fq.relations, 0.4, 2), more = sample_mapping(fq.relations, 0.7, 2);
  EXPECT_EQ(part.pairs.size(), 40u);
  EXPECT_EQ(more.pairs.size(), 70u);
  for (const auto& p : part.pairs) {
    EXPECT_TRUE(fq.relations.pairs.count(p));
    EXPECT_TRUE(more.pairs.count(p));
  }
  EXPECT_EQ(mapping_sample_size(0.33, 10), 4u);
  EXPECT_THROW(sample_mapping(fq.relations, 1.5, 2), std::invalid_argument);
}

TEST(MixSeed, StreamsDiffer) {
  EXPECT_NE(mix_seed(0, 0), mix_seed(0, 1));
  EXPECT_NE(mix_seed(0, 0), mix_seed(1, 0));
  EXPECT_EQ(mix_seed(5, 3), mix_seed(5, 3));
}
