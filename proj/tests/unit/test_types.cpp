#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace mvcc;

TEST(ViewData, RejectsMalformedInput) {
  Matrix m(2, 1);
  m << 1, 2;
  EXPECT_THROW(ViewData("A", m, {"a", "a"}), std::invalid_argument);
  EXPECT_THROW(ViewData("A", m, {"a"}), std::invalid_argument);
  EXPECT_THROW(ViewData("A", m, {"a", "b"}, std::vector<std::string>{"x"}), std::invalid_argument);
  Matrix bad(1, 1);
  bad << std::numeric_limits<double>::infinity();
  EXPECT_THROW(ViewData("A", bad, {"a"}), std::invalid_argument);
  EXPECT_THROW(ViewData("A", Matrix(0, 2), {}), std::invalid_argument);
}

TEST(ViewData, IdOrderIsLexicographic) {
  Matrix m(3, 1);
  m << 1, 2, 3;
  ViewData v("A", m, {"c", "a", "b"});
  EXPECT_EQ(v.id_order(), (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_EQ(v.index_of("b"), 2u);
  EXPECT_FALSE(v.find("z").has_value());
  EXPECT_THROW(v.index_of("z"), std::invalid_argument);
  EXPECT_THROW(v.labels(), std::logic_error);
}

TEST(ConstraintSet, KeysAreUnordered) {
  ConstraintSet s;
  EXPECT_TRUE(s.insert({"b", "a", 0.5, ConstraintKind::must_link}));
  EXPECT_FALSE(s.insert({"a", "b", 0.9, ConstraintKind::must_link}));
  EXPECT_DOUBLE_EQ(*s.weight("a", "b", ConstraintKind::must_link), 0.5);
  s.merge_max({"a", "b", 0.9, ConstraintKind::must_link});
  EXPECT_DOUBLE_EQ(*s.weight("b", "a", ConstraintKind::must_link), 0.9);
  s.merge_max({"a", "b", 0.1, ConstraintKind::must_link});
  EXPECT_DOUBLE_EQ(*s.weight("a", "b", ConstraintKind::must_link), 0.9);
  // the same pair may carry both kinds
  s.insert({"a", "b", 0.3, ConstraintKind::cannot_link});
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.count(ConstraintKind::cannot_link), 1u);
  s.assign({"a", "b", 0.2, ConstraintKind::must_link});
  EXPECT_DOUBLE_EQ(*s.weight("a", "b", ConstraintKind::must_link), 0.2);
  EXPECT_TRUE(s.erase("b", "a", ConstraintKind::cannot_link));
  EXPECT_EQ(s.size(), 1u);
}

TEST(ConstraintSet, ValidatesEntries) {
  ConstraintSet s;
  EXPECT_THROW(s.insert({"a", "a", 1, ConstraintKind::must_link}), std::invalid_argument);
  EXPECT_THROW(s.insert({"a", "b", -1, ConstraintKind::must_link}), std::invalid_argument);
  EXPECT_THROW(s.insert({"a", "b", std::nan(""), ConstraintKind::must_link}), std::invalid_argument);
  EXPECT_THROW(parse_kind("XL"), std::invalid_argument);
  EXPECT_EQ(parse_kind("CL"), ConstraintKind::cannot_link);
}

TEST(RelationMap, ReverseAndValidate) {
  auto a = oracle::make_view("A", {{0}, {1}}, std::nullopt, 'a');
  auto b = oracle::make_view("B", {{0}, {1}}, std::nullopt, 'b');
  RelationMap r{"A", "B", {{"a00", "b01"}}};
  EXPECT_NO_THROW(r.validate(a, b));
  EXPECT_THROW(r.validate(b, a), std::invalid_argument);
  auto rev = r.reversed();
  EXPECT_EQ(rev.from_view, "B");
  EXPECT_TRUE(rev.pairs.count({"b01", "a00"}));
  RelationMap bad{"A", "B", {{"a00", "zz"}}};
  EXPECT_THROW(bad.validate(a, b), std::invalid_argument);
}

TEST(ConstraintIndex, IncidenceAndPartner) {
  auto v = oracle::make_view("A", {{0}, {1}, {2}});
  ConstraintSet s{{"x00", "x02", 1, ConstraintKind::must_link}, {"x01", "x02", 2, ConstraintKind::cannot_link}};
  ConstraintIndex idx(v, s);
  ASSERT_EQ(idx.all.size(), 2u);
  EXPECT_EQ(idx.incident[2].size(), 2u);
  EXPECT_EQ(ConstraintIndex::partner(idx.all[0], 2), 0u);
  ConstraintSet unknown{{"x00", "q", 1, ConstraintKind::must_link}};
  EXPECT_THROW(ConstraintIndex(v, unknown), std::invalid_argument);
}
