#pragma once

// Text formats: view, constraint and relation CSV files, the key=value
// dataset spec, and loading/writing a whole dataset.
//
// Numbers are written with 17 significant digits so a write/read cycle
// reproduces every double exactly.

#include "mvcc/datagen.hpp"
#include "mvcc/types.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mvcc {

namespace fs = std::filesystem;

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
  return v;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Reads non-empty lines with their 1-based numbers.
inline std::vector<std::pair<std::size_t, std::string>> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::vector<std::pair<std::size_t, std::string>> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    out.emplace_back(number, line);
  }
  return out;
}

inline std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Views
// ---------------------------------------------------------------------------

/// Header `id,<f1>,...[,label]`; a trailing column named `label` holds class tokens.
inline ViewData parse_view_csv(std::istream& in, const std::string& view_id, const std::string& source = "<view>") {
  std::string line;
  std::size_t number = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++number;
    if (!detail::trim(line).empty()) header = detail::split(line, ',');
  }
  if (header.empty()) throw ParseError(source, number, "missing header");
  if (header.front() != "id") throw ParseError(source, number, "first header column must be 'id'");
  const bool has_label = header.size() >= 2 && header.back() == "label";
  const std::size_t dims = header.size() - 1 - (has_label ? 1 : 0);
  if (dims == 0) throw ParseError(source, number, "no feature columns");

  std::vector<InstanceId> ids;
  std::vector<std::string> labels;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split(line, ',');
    if (fields.size() != header.size())
      throw ParseError(source, number, "expected " + std::to_string(header.size()) + " fields, got " +
                                           std::to_string(fields.size()));
    if (fields[0].empty()) throw ParseError(source, number, "empty id");
    ids.push_back(fields[0]);
    for (std::size_t c = 1; c <= dims; ++c) {
      auto v = detail::parse_double(fields[c]);
      if (!v) throw ParseError(source, number, "bad number '" + fields[c] + "' in column " + header[c]);
      values.push_back(*v);
    }
    if (has_label) labels.push_back(fields.back());
  }
  if (ids.empty()) throw ParseError(source, number, "no instances");
  Matrix m(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(dims));
  for (std::size_t r = 0; r < ids.size(); ++r)
    for (std::size_t c = 0; c < dims; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * dims + c];
  try {
    return ViewData(view_id, std::move(m), std::move(ids),
                    has_label ? std::optional<std::vector<std::string>>(std::move(labels)) : std::nullopt);
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, number, e.what());
  }
}

inline ViewData read_view_csv(const fs::path& path, const std::string& view_id) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return parse_view_csv(in, view_id, path.string());
}

inline void write_view_csv(std::ostream& out, const ViewData& view) {
  out << "id";
  for (std::size_t c = 0; c < view.dim(); ++c) out << ",f" << (c + 1);
  if (view.has_labels()) out << ",label";
  out << '\n';
  for (std::size_t r = 0; r < view.size(); ++r) {
    out << view.id_at(r);
    for (std::size_t c = 0; c < view.dim(); ++c)
      out << ',' << detail::format_double(view.instances()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    if (view.has_labels()) out << ',' << view.labels()[r];
    out << '\n';
  }
}

inline void write_view_csv(const fs::path& path, const ViewData& view) {
  auto out = detail::open_out(path);
  write_view_csv(out, view);
}

// ---------------------------------------------------------------------------
// Constraints and relations
// ---------------------------------------------------------------------------

/// Header `id_a,id_b,weight,kind`. When `view` is given, unknown ids are errors.
inline ConstraintSet parse_constraints_csv(std::istream& in, const ViewData* view = nullptr,
                                           const std::string& source = "<constraints>") {
  std::string line;
  std::size_t number = 0;
  bool header = false;
  ConstraintSet out;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    auto f = detail::split(line, ',');
    if (!header) {
      if (f != std::vector<std::string>{"id_a", "id_b", "weight", "kind"})
        throw ParseError(source, number, "header must be id_a,id_b,weight,kind");
      header = true;
      continue;
    }
    if (f.size() != 4) throw ParseError(source, number, "expected 4 fields, got " + std::to_string(f.size()));
    auto w = detail::parse_double(f[2]);
    if (!w) throw ParseError(source, number, "bad weight '" + f[2] + "'");
    Constraint c{f[0], f[1], *w, ConstraintKind::must_link};
    try {
      c.kind = parse_kind(f[3]);
      validate(c);
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, number, e.what());
    }
    if (view) {
      for (const auto& id : {c.a, c.b})
        if (!view->contains(id)) throw ParseError(source, number, "unknown id '" + id + "' in view " + view->id());
    }
    if (!out.insert(c)) throw ParseError(source, number, "duplicate constraint " + c.a + "," + c.b);
  }
  if (!header) throw ParseError(source, number, "missing header");
  return out;
}

inline ConstraintSet read_constraints_csv(const fs::path& path, const ViewData* view = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return parse_constraints_csv(in, view, path.string());
}

inline void write_constraints_csv(std::ostream& out, const ConstraintSet& set) {
  out << "id_a,id_b,weight,kind\n";
  for (const auto& [key, w] : set)
    out << key.lo << ',' << key.hi << ',' << detail::format_double(w) << ',' << to_string(key.kind) << '\n';
}

inline void write_constraints_csv(const fs::path& path, const ConstraintSet& set) {
  auto out = detail::open_out(path);
  write_constraints_csv(out, set);
}

/// Header `id_u,id_v`; `from`/`to`, when given, must contain the ids.
inline RelationMap parse_relations_csv(std::istream& in, const std::string& from_view, const std::string& to_view,
                                       const ViewData* from = nullptr, const ViewData* to = nullptr,
                                       const std::string& source = "<relations>") {
  std::string line;
  std::size_t number = 0;
  bool header = false;
  RelationMap out{from_view, to_view, {}};
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    auto f = detail::split(line, ',');
    if (!header) {
      if (f != std::vector<std::string>{"id_u", "id_v"}) throw ParseError(source, number, "header must be id_u,id_v");
      header = true;
      continue;
    }
    if (f.size() != 2) throw ParseError(source, number, "expected 2 fields, got " + std::to_string(f.size()));
    if (from && !from->contains(f[0])) throw ParseError(source, number, "unknown id '" + f[0] + "' in view " + from_view);
    if (to && !to->contains(f[1])) throw ParseError(source, number, "unknown id '" + f[1] + "' in view " + to_view);
    out.pairs.emplace(f[0], f[1]);
  }
  if (!header) throw ParseError(source, number, "missing header");
  return out;
}

inline RelationMap read_relations_csv(const fs::path& path, const std::string& from_view, const std::string& to_view,
                                      const ViewData* from = nullptr, const ViewData* to = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return parse_relations_csv(in, from_view, to_view, from, to, path.string());
}

inline void write_relations_csv(std::ostream& out, const RelationMap& rel) {
  out << "id_u,id_v\n";
  for (const auto& [u, v] : rel.pairs) out << u << ',' << v << '\n';
}

inline void write_relations_csv(const fs::path& path, const RelationMap& rel) {
  auto out = detail::open_out(path);
  write_relations_csv(out, rel);
}

// ---------------------------------------------------------------------------
// key=value files and dataset specs
// ---------------------------------------------------------------------------

/// One `key=value` per line; `#` starts a comment. Later keys override earlier.
inline std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& source = "<spec>") {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(source, number, "expected key=value");
    const std::string key = detail::trim(t.substr(0, eq));
    if (key.empty()) throw ParseError(source, number, "empty key");
    out[key] = detail::trim(t.substr(eq + 1));
  }
  return out;
}

inline std::map<std::string, std::string> read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return parse_key_values(in, path.string());
}

enum class Generator { four_quadrants, paired_views, file };

inline Generator parse_generator(const std::string& s) {
  if (s == "four-quadrants") return Generator::four_quadrants;
  if (s == "paired-views") return Generator::paired_views;
  if (s == "file") return Generator::file;
  throw std::invalid_argument("unknown generator '" + s + "' (four-quadrants, paired-views, file)");
}

inline const char* to_string(Generator g) {
  switch (g) {
    case Generator::four_quadrants: return "four-quadrants";
    case Generator::paired_views: return "paired-views";
    case Generator::file: return "file";
  }
  return "?";
}

/// Keys: name, generator, seed, per_quadrant and grouping (four-quadrants); source and
/// pairings=c1:c4,c2:c5 (paired-views); view.<ID>, constraints.<ID>,
/// relations.<FROM>.<TO> (file); embed=true|false. Relative paths resolve
/// against the spec file's directory.
struct DatasetSpec {
  std::string name = "dataset";
  Generator generator = Generator::four_quadrants;
  std::uint64_t seed = 0;
  std::size_t per_quadrant = 50;
  QuadrantGrouping grouping = QuadrantGrouping::diagonal;
  fs::path source;
  std::vector<std::pair<std::string, std::string>> pairings;
  std::vector<std::pair<std::string, fs::path>> views;  // in declaration order by id
  std::map<std::string, fs::path> constraints;
  std::vector<std::tuple<std::string, std::string, fs::path>> relations;
  std::optional<bool> embed;

  /// Four Quadrants is used in its original two dimensions.
  bool embed_by_default() const { return embed.value_or(generator != Generator::four_quadrants); }
};

namespace detail {

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw std::invalid_argument("key '" + key + "' needs a non-negative integer, got '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw std::invalid_argument("key '" + key + "' needs true or false, got '" + v + "'");
}

}  // namespace detail

inline DatasetSpec dataset_spec_from(const std::map<std::string, std::string>& kv, const fs::path& base_dir = {}) {
  DatasetSpec spec;
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  for (const auto& [key, value] : kv) {
    if (key == "name") {
      spec.name = value;
    } else if (key == "generator") {
      spec.generator = parse_generator(value);
    } else if (key == "seed") {
      spec.seed = detail::parse_u64(key, value);
    } else if (key == "per_quadrant") {
      spec.per_quadrant = detail::parse_u64(key, value);
    } else if (key == "grouping") {
      spec.grouping = parse_grouping(value);
    } else if (key == "source") {
      spec.source = resolve(value);
    } else if (key == "pairings") {
      for (const auto& item : detail::split(value, ',')) {
        auto parts = detail::split(item, ':');
        if (parts.size() != 2 || parts[0].empty() || parts[1].empty())
          throw std::invalid_argument("pairing '" + item + "' must look like classA:classB");
        spec.pairings.emplace_back(parts[0], parts[1]);
      }
    } else if (key == "embed") {
      spec.embed = detail::parse_bool(key, value);
    } else if (key.rfind("view.", 0) == 0) {
      spec.views.emplace_back(key.substr(5), resolve(value));
    } else if (key.rfind("constraints.", 0) == 0) {
      spec.constraints[key.substr(12)] = resolve(value);
    } else if (key.rfind("relations.", 0) == 0) {
      auto parts = detail::split(key.substr(10), '.');
      if (parts.size() != 2) throw std::invalid_argument("relation key '" + key + "' must be relations.<FROM>.<TO>");
      spec.relations.emplace_back(parts[0], parts[1], resolve(value));
    } else {
      throw std::invalid_argument("unknown dataset key '" + key + "'");
    }
  }
  if (spec.generator == Generator::paired_views && (spec.source.empty() || spec.pairings.empty()))
    throw std::invalid_argument("paired-views needs 'source' and 'pairings'");
  if (spec.generator == Generator::file && spec.views.empty())
    throw std::invalid_argument("file datasets need at least one view.<ID> entry");
  return spec;
}

inline DatasetSpec read_dataset_spec(const fs::path& path) {
  return dataset_spec_from(read_key_values(path), path.parent_path());
}

struct Dataset {
  std::string name;
  std::vector<ViewData> views;
  std::map<std::string, ConstraintSet> constraints;  // optional fixed constraints
  std::vector<RelationMap> relations;
  bool embed = false;

  const ViewData& view(const std::string& id) const {
    for (const auto& v : views)
      if (v.id() == id) return v;
    throw std::invalid_argument("dataset has no view '" + id + "'");
  }
};

inline Dataset read_dataset(const DatasetSpec& spec) {
  Dataset ds;
  ds.name = spec.name;
  ds.embed = spec.embed_by_default();
  switch (spec.generator) {
    case Generator::four_quadrants: {
      auto fq = gen_four_quadrants(spec.seed, spec.per_quadrant, spec.grouping);
      ds.views = {std::move(fq.a), std::move(fq.b)};
      ds.relations = {std::move(fq.relations)};
      break;
    }
    case Generator::paired_views: {
      auto single = read_view_csv(spec.source, "source");
      auto pv = pair_views(single, spec.pairings, spec.seed);
      ds.views = {std::move(pv.a), std::move(pv.b)};
      ds.relations = {std::move(pv.relations)};
      break;
    }
    case Generator::file: {
      for (const auto& [id, path] : spec.views) ds.views.push_back(read_view_csv(path, id));
      for (const auto& [id, path] : spec.constraints) {
        const auto& v = ds.view(id);
        ds.constraints[id] = read_constraints_csv(path, &v);
      }
      for (const auto& [from, to, path] : spec.relations)
        ds.relations.push_back(read_relations_csv(path, from, to, &ds.view(from), &ds.view(to)));
      break;
    }
  }
  return ds;
}

inline Dataset read_dataset(const fs::path& spec_path) { return read_dataset(read_dataset_spec(spec_path)); }

/// Writes every view, constraint set and relation map as CSV plus a
/// `dataset.spec` that reads them back (generator=file).
inline fs::path write_dataset(const Dataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  std::ostringstream spec;
  spec << "# written by mvcc\nname=" << ds.name << "\ngenerator=file\nembed=" << (ds.embed ? "true" : "false") << '\n';
  for (const auto& v : ds.views) {
    const std::string file = "view_" + v.id() + ".csv";
    write_view_csv(dir / file, v);
    spec << "view." << v.id() << '=' << file << '\n';
  }
  for (const auto& [id, set] : ds.constraints) {
    const std::string file = "constraints_" + id + ".csv";
    write_constraints_csv(dir / file, set);
    spec << "constraints." << id << '=' << file << '\n';
  }
  for (const auto& rel : ds.relations) {
    const std::string file = "relations_" + rel.from_view + "_" + rel.to_view + ".csv";
    write_relations_csv(dir / file, rel);
    spec << "relations." << rel.from_view << '.' << rel.to_view << '=' << file << '\n';
  }
  const fs::path spec_path = dir / "dataset.spec";
  auto out = detail::open_out(spec_path);
  out << spec.str();
  return spec_path;
}

}  // namespace mvcc
