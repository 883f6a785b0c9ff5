#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

using namespace mvcc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("mvcc_csv_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::size_t parse_error_line(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(ViewCsv, RoundTripIsExact) {
  std::mt19937_64 rng(1);
  auto v = oracle::random_view("V", 15, 3, rng, 2);
  std::stringstream s;
  write_view_csv(s, v);
  auto back = parse_view_csv(s, "V");
  EXPECT_EQ(back.ids(), v.ids());
  EXPECT_EQ(back.labels(), v.labels());
  EXPECT_EQ(back.instances(), v.instances());
}

TEST(ViewCsv, UnlabelledAndErrors) {
  std::istringstream ok("id,f1,f2\nx,1,2\ny,3.5,-4\n");
  auto v = parse_view_csv(ok, "V");
  EXPECT_FALSE(v.has_labels());
  EXPECT_EQ(v.size(), 2u);
  EXPECT_DOUBLE_EQ(v.instances()(1, 0), 3.5);

  EXPECT_EQ(parse_error_line([] {
              std::istringstream in("id,f1,f2\nx,1,2\ny,3\n");
              parse_view_csv(in, "V");
            }),
            3u);
  EXPECT_EQ(parse_error_line([] {
              std::istringstream in("id,f1\nx,abc\n");
              parse_view_csv(in, "V");
            }),
            2u);
  EXPECT_EQ(parse_error_line([] {
              std::istringstream in("id,f1\nx,1\nx,2\n");
              parse_view_csv(in, "V");
            }),
            3u);
  EXPECT_THROW(
      [] {
        std::istringstream in("name,f1\nx,1\n");
        parse_view_csv(in, "V");
      }(),
      ParseError);
}

TEST(ConstraintsCsv, ParsesRow) {
  std::istringstream in("id_a,id_b,weight,kind\np1,p2,1.0,ML\n");
  auto cs = parse_constraints_csv(in);
  EXPECT_EQ(cs, (ConstraintSet{{"p1", "p2", 1.0, ConstraintKind::must_link}}));
}

TEST(ConstraintsCsv, ErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line([] {
              std::istringstream in("id_a,id_b,weight,kind\np1,p2,1.0,ML\np1,p3,1.0\n");
              parse_constraints_csv(in);
            }),
            3u);
  EXPECT_EQ(parse_error_line([] {
              std::istringstream in("id_a,id_b,weight,kind\np1,p2,-1,CL\n");
              parse_constraints_csv(in);
            }),
            2u);
  EXPECT_EQ(parse_error_line([] {
              std::istringstream in("id_a,id_b,weight,kind\np1,p2,1,XX\n");
              parse_constraints_csv(in);
            }),
            2u);
  auto v = oracle::make_view("V", {{0}, {1}});
  EXPECT_EQ(parse_error_line([&] {
              std::istringstream in("id_a,id_b,weight,kind\nx00,x01,1,ML\nx00,zz,1,CL\n");
              parse_constraints_csv(in, &v);
            }),
            3u);
}

TEST(ConstraintsCsv, RoundTrip) {
  ConstraintSet cs{{"a", "b", 0.1 + 0.2, ConstraintKind::must_link}, {"c", "a", 1.0 / 3, ConstraintKind::cannot_link}};
  std::stringstream s;
  write_constraints_csv(s, cs);
  EXPECT_EQ(parse_constraints_csv(s), cs);
}

TEST(RelationsCsv, RoundTripAndUnknownIds) {
  RelationMap r{"A", "B", {{"a1", "b1"}, {"a1", "b2"}, {"a2", "b2"}}};
  std::stringstream s;
  write_relations_csv(s, r);
  EXPECT_EQ(parse_relations_csv(s, "A", "B").pairs, r.pairs);
  auto a = oracle::make_view("A", {{0}}, {}, 'a');
  EXPECT_EQ(parse_error_line([&] {
              std::istringstream in("id_u,id_v\na00,b1\nzz,b1\n");
              parse_relations_csv(in, "A", "B", &a);
            }),
            3u);
}

TEST(KeyValues, CommentsAndOverrides) {
  std::istringstream in("# c\na = 1\n\nb=x # trailing\na=2\n");
  auto kv = parse_key_values(in);
  EXPECT_EQ(kv.at("a"), "2");
  EXPECT_EQ(kv.at("b"), "x");
  std::istringstream bad("a=1\nnokey\n");
  EXPECT_EQ(parse_error_line([&] { parse_key_values(bad); }), 2u);
}

TEST(DatasetSpec, ParsesKeys) {
  auto spec = dataset_spec_from({{"generator", "paired-views"}, {"source", "s.csv"}, {"pairings", "c1:c4,c2:c5"}, {"seed", "3"}},
                                "/base");
  EXPECT_EQ(spec.generator, Generator::paired_views);
  EXPECT_EQ(spec.source, fs::path("/base/s.csv"));
  ASSERT_EQ(spec.pairings.size(), 2u);
  EXPECT_EQ(spec.pairings[1], (std::pair<std::string, std::string>{"c2", "c5"}));
  EXPECT_TRUE(spec.embed_by_default());
  EXPECT_FALSE(dataset_spec_from({}).embed_by_default());
  EXPECT_THROW(dataset_spec_from({{"colour", "red"}}), std::invalid_argument);
  EXPECT_THROW(dataset_spec_from({{"generator", "paired-views"}}), std::invalid_argument);
  EXPECT_THROW(dataset_spec_from({{"pairings", "c1-c4"}}), std::invalid_argument);
  EXPECT_THROW(dataset_spec_from({{"seed", "-1"}}), std::invalid_argument);
}

TEST(Dataset, WriteThenReadBack) {
  auto dir = scratch("dataset");
  auto fq = gen_four_quadrants(2);
  Dataset ds;
  ds.name = "fq";
  ds.views = {fq.a, fq.b};
  ds.relations = {fq.relations};
  ds.constraints["A"] = sample_constraints(fq.a, 10, 1);
  auto spec_path = write_dataset(ds, dir);
  auto back = read_dataset(spec_path);
  EXPECT_EQ(back.name, "fq");
  ASSERT_EQ(back.views.size(), 2u);
  EXPECT_EQ(back.views[0].instances(), fq.a.instances());
  EXPECT_EQ(back.views[1].labels(), fq.b.labels());
  EXPECT_EQ(back.relations.at(0).pairs, fq.relations.pairs);
  EXPECT_EQ(back.constraints.at("A"), ds.constraints["A"]);
  EXPECT_FALSE(back.embed);
}

TEST(Dataset, PairedViewsFromSourceFile) {
  auto dir = scratch("paired");
  std::mt19937_64 rng(3);
  auto single = oracle::random_view("S", 12, 2, rng, 4);
  write_view_csv(dir / "source.csv", single);
  {
    auto out = detail::open_out(dir / "d.spec");
    out << "generator=paired-views\nsource=source.csv\npairings=c0:c1,c2:c3\nseed=4\n";
  }
  auto ds = read_dataset(dir / "d.spec");
  EXPECT_EQ(ds.views[0].size() + ds.views[1].size(), 12u);
  EXPECT_TRUE(ds.embed);
  ds.relations.at(0).validate(ds.views[0], ds.views[1]);
}
