#pragma once

// Experiment harness: resamples constraints and mappings per trial, runs the
// selected methods on identical inputs, and writes raw rows, per-cell means
// with standard errors, and a text summary.

#include "mvcc/ckmeans.hpp"
#include "mvcc/coem.hpp"
#include "mvcc/constraint_ops.hpp"
#include "mvcc/csv_io.hpp"
#include "mvcc/datagen.hpp"
#include "mvcc/embedding.hpp"
#include "mvcc/eval.hpp"
#include "mvcc/types.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mvcc {

enum class Method { cp, direct, cluster_membership, single_view, single_view_cp };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::cp: return "cp";
    case Method::direct: return "direct";
    case Method::cluster_membership: return "cluster-membership";
    case Method::single_view: return "single-view";
    case Method::single_view_cp: return "single-view-cp";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  for (Method m : {Method::cp, Method::direct, Method::cluster_membership, Method::single_view, Method::single_view_cp})
    if (s == to_string(m)) return m;
  throw std::invalid_argument("unknown method '" + s + "' (cp, direct, cluster-membership, single-view, single-view-cp)");
}

/// Single-view methods ignore the mapping, so they get one cell per count.
inline bool uses_mapping(Method m) { return m == Method::cp || m == Method::direct || m == Method::cluster_membership; }

enum class EmbedMode { automatic, on, off };

struct ExperimentConfig {
  DatasetSpec dataset;
  std::vector<Method> methods{Method::cp, Method::direct};
  std::vector<std::size_t> constraint_counts{0, 20, 40, 60, 80, 100};
  std::vector<double> mapping_fractions{0.2, 0.4, 1.0};
  std::size_t trials = 25;
  std::uint64_t base_seed = 0;
  std::size_t k = 2;
  Variant variant = Variant::pck;
  std::vector<double> thresholds{0.75};
  EmbedMode embed = EmbedMode::automatic;
  std::size_t embed_dims = 0;  // 0: ceil(sqrt(d))
  double sigma = 1.0;
  std::size_t max_outer_iters = 20;
  std::size_t max_em_iters = 100;
  double epsilon = 1e-6;
  double gamma = 1e-6;
  ViewOrder view_order = ViewOrder::fixed;
  std::size_t threads = 1;
  std::filesystem::path out;

  void validate() const {
    if (methods.empty()) throw std::invalid_argument("at least one method is required");
    if (constraint_counts.empty()) throw std::invalid_argument("at least one constraint count is required");
    if (mapping_fractions.empty()) throw std::invalid_argument("at least one mapping fraction is required");
    if (trials == 0) throw std::invalid_argument("trials must be at least 1");
    for (auto c : constraint_counts)
      if (c % 2 != 0) throw std::invalid_argument("constraint counts must be even, got " + std::to_string(c));
    for (auto f : mapping_fractions)
      if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("mapping fractions must lie in [0, 1]");
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    if (thresholds.empty()) throw std::invalid_argument("at least one threshold is required");
    for (auto t : thresholds)
      if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("thresholds must lie in (0, 1]");
    if (max_outer_iters == 0) throw std::invalid_argument("max_outer_iters must be at least 1");
  }
};

namespace detail {

template <class T, class F>
std::vector<T> parse_list(const std::string& value, F&& parse) {
  std::vector<T> out;
  for (const auto& item : split(value, ',')) {
    if (item.empty()) continue;
    out.push_back(parse(item));
  }
  return out;
}

inline double parse_real(const std::string& key, const std::string& v) {
  auto d = parse_double(v);
  if (!d) throw std::invalid_argument("key '" + key + "' needs a number, got '" + v + "'");
  return *d;
}

}  // namespace detail

/// Applies `key=value` settings on top of `cfg`. Dataset settings come either
/// from `dataset=<spec file>` or from inline `dataset.<key>` entries.
inline void apply_settings(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv,
                           const std::filesystem::path& base_dir = {}) {
  std::map<std::string, std::string> inline_dataset;
  for (const auto& [key, value] : kv) {
    if (key.rfind("dataset.", 0) == 0) {
      inline_dataset[key.substr(8)] = value;
    } else if (key == "dataset") {
      std::filesystem::path p(value);
      cfg.dataset = read_dataset_spec(p.is_absolute() || base_dir.empty() ? p : base_dir / p);
    } else if (key == "methods") {
      cfg.methods = detail::parse_list<Method>(value, parse_method);
    } else if (key == "constraint_counts") {
      cfg.constraint_counts =
          detail::parse_list<std::size_t>(value, [&](const std::string& s) { return detail::parse_u64(key, s); });
    } else if (key == "mapping_fractions") {
      cfg.mapping_fractions =
          detail::parse_list<double>(value, [&](const std::string& s) { return detail::parse_real(key, s); });
    } else if (key == "trials") {
      cfg.trials = detail::parse_u64(key, value);
    } else if (key == "base_seed") {
      cfg.base_seed = detail::parse_u64(key, value);
    } else if (key == "k") {
      cfg.k = detail::parse_u64(key, value);
    } else if (key == "variant") {
      cfg.variant = parse_variant(value);
    } else if (key == "thresholds") {
      cfg.thresholds = detail::parse_list<double>(value, [&](const std::string& s) { return detail::parse_real(key, s); });
    } else if (key == "embed") {
      if (value == "auto") {
        cfg.embed = EmbedMode::automatic;
      } else {
        cfg.embed = detail::parse_bool(key, value) ? EmbedMode::on : EmbedMode::off;
      }
    } else if (key == "embed_dims") {
      cfg.embed_dims = detail::parse_u64(key, value);
    } else if (key == "sigma") {
      cfg.sigma = detail::parse_real(key, value);
    } else if (key == "max_outer_iters") {
      cfg.max_outer_iters = detail::parse_u64(key, value);
    } else if (key == "max_em_iters") {
      cfg.max_em_iters = detail::parse_u64(key, value);
    } else if (key == "epsilon") {
      cfg.epsilon = detail::parse_real(key, value);
    } else if (key == "gamma") {
      cfg.gamma = detail::parse_real(key, value);
    } else if (key == "view_order") {
      if (value == "fixed") {
        cfg.view_order = ViewOrder::fixed;
      } else if (value == "seeded-random") {
        cfg.view_order = ViewOrder::seeded_random;
      } else {
        throw std::invalid_argument("view_order must be fixed or seeded-random");
      }
    } else if (key == "threads") {
      cfg.threads = std::max<std::size_t>(1, detail::parse_u64(key, value));
    } else if (key == "out") {
      std::filesystem::path p(value);
      cfg.out = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    } else {
      throw std::invalid_argument("unknown experiment key '" + key + "'");
    }
  }
  if (!inline_dataset.empty()) cfg.dataset = dataset_spec_from(inline_dataset, base_dir);
}

inline ExperimentConfig read_experiment_config(const std::filesystem::path& path) {
  ExperimentConfig cfg;
  apply_settings(cfg, read_key_values(path), path.parent_path());
  return cfg;
}

// ---------------------------------------------------------------------------

struct ExperimentRow {
  Method method = Method::cp;
  std::optional<double> mapping_fraction;  // absent for single-view methods
  std::size_t constraint_count = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  std::vector<double> view_f;
  double mean_f = 0.0;
  std::size_t propagated_ml = 0;
  std::size_t propagated_cl = 0;
  std::optional<double> precision_ml;
  std::optional<double> precision_cl;
  std::size_t outer_iterations = 0;
  double runtime_seconds = 0.0;  // not written to raw.csv
};

struct Aggregate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

inline Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  a.n = values.size();
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(a.n);
  if (a.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.se = std::sqrt(ss / static_cast<double>(a.n - 1)) / std::sqrt(static_cast<double>(a.n));
  }
  return a;
}

struct CellSummary {
  Method method = Method::cp;
  std::optional<double> mapping_fraction;
  std::size_t constraint_count = 0;
  std::size_t failed = 0;
  Aggregate mean_f;
  Aggregate propagated_ml;
  Aggregate propagated_cl;
  Aggregate precision_ml;
  Aggregate precision_cl;
  Aggregate outer_iterations;
};

struct ExperimentReport {
  std::string dataset;
  std::vector<std::string> view_ids;
  bool embedded = false;
  std::vector<ExperimentRow> rows;
  std::vector<CellSummary> cells;
  std::vector<std::string> warnings;
  double runtime_seconds = 0.0;

  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.ok; }));
  }

  const CellSummary* cell(Method m, std::optional<double> fraction, std::size_t count) const {
    for (const auto& c : cells)
      if (c.method == m && c.mapping_fraction == fraction && c.constraint_count == count) return &c;
    return nullptr;
  }
};

inline std::vector<CellSummary> summarize(const std::vector<ExperimentRow>& rows) {
  std::vector<CellSummary> cells;
  std::vector<std::vector<const ExperimentRow*>> members;
  for (const auto& r : rows) {
    auto it = std::find_if(cells.begin(), cells.end(), [&](const CellSummary& c) {
      return c.method == r.method && c.mapping_fraction == r.mapping_fraction && c.constraint_count == r.constraint_count;
    });
    std::size_t idx;
    if (it == cells.end()) {
      CellSummary c;
      c.method = r.method;
      c.mapping_fraction = r.mapping_fraction;
      c.constraint_count = r.constraint_count;
      cells.push_back(c);
      members.emplace_back();
      idx = cells.size() - 1;
    } else {
      idx = static_cast<std::size_t>(it - cells.begin());
    }
    members[idx].push_back(&r);
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<double> f, pml, pcl, wml, wcl, iters;
    for (const auto* r : members[c]) {
      if (!r->ok) {
        ++cells[c].failed;
        continue;
      }
      f.push_back(r->mean_f);
      pml.push_back(static_cast<double>(r->propagated_ml));
      pcl.push_back(static_cast<double>(r->propagated_cl));
      if (r->precision_ml) wml.push_back(*r->precision_ml);
      if (r->precision_cl) wcl.push_back(*r->precision_cl);
      iters.push_back(static_cast<double>(r->outer_iterations));
    }
    cells[c].mean_f = aggregate(f);
    cells[c].propagated_ml = aggregate(pml);
    cells[c].propagated_cl = aggregate(pcl);
    cells[c].precision_ml = aggregate(wml);
    cells[c].precision_cl = aggregate(wcl);
    cells[c].outer_iterations = aggregate(iters);
  }
  return cells;
}

// ---------------------------------------------------------------------------

/// Inputs shared by every method of one (trial, fraction, count) cell.
struct TrialInputs {
  std::vector<ConstraintSet> constraints;  // per view
  std::vector<RelationMap> relations;      // sampled
};

inline TrialInputs sample_trial(const Dataset& ds, std::size_t count, std::optional<double> fraction,
                                std::uint64_t trial_seed) {
  TrialInputs in;
  for (std::size_t v = 0; v < ds.views.size(); ++v) {
    // unlabelled views fall back to the dataset's own constraint file
    if (ds.views[v].has_labels()) {
      in.constraints.push_back(sample_constraints(ds.views[v], count, mix_seed(trial_seed, v)));
    } else {
      auto fixed = ds.constraints.find(ds.views[v].id());
      in.constraints.push_back(fixed == ds.constraints.end() ? ConstraintSet{} : fixed->second);
    }
  }
  if (fraction) {
    for (std::size_t r = 0; r < ds.relations.size(); ++r)
      in.relations.push_back(sample_mapping(ds.relations[r], *fraction, mix_seed(trial_seed, 1000 + r)));
  }
  return in;
}

namespace detail {

inline void fill_scores(ExperimentRow& row, const std::vector<ViewData>& views,
                        const std::vector<const ClusterModel*>& models) {
  for (std::size_t v = 0; v < views.size(); ++v) row.view_f.push_back(pairwise_f(views[v], *models[v]).f_measure);
  row.mean_f = mean_f(row.view_f);
}

inline void fill_propagated(ExperimentRow& row, const std::vector<ViewData>& views, const CoEmResult& res) {
  WeightedPrecision wp;
  for (std::size_t v = 0; v < views.size(); ++v) {
    row.propagated_ml += res.views[v].propagated.count(ConstraintKind::must_link);
    row.propagated_cl += res.views[v].propagated.count(ConstraintKind::cannot_link);
    wp.add(res.views[v].propagated, views[v]);
  }
  row.precision_ml = wp.must_link();
  row.precision_cl = wp.cannot_link();
  row.outer_iterations = res.outer_iterations;
  std::vector<const ClusterModel*> models;
  for (const auto& vs : res.views) models.push_back(&vs.clustering.model);
  fill_scores(row, views, models);
}

}  // namespace detail

inline CoEmConfig coem_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  CoEmConfig c;
  c.thresholds = cfg.thresholds;
  c.clustering.k = cfg.k;
  c.clustering.variant = cfg.variant;
  c.clustering.max_em_iters = cfg.max_em_iters;
  c.clustering.epsilon = cfg.epsilon;
  c.clustering.seed = seed;
  c.max_outer_iters = cfg.max_outer_iters;
  c.view_order = cfg.view_order;
  c.gamma = cfg.gamma;
  return c;
}

/// Runs one method on the sampled inputs; fills the metric fields of `row`.
inline void run_method(ExperimentRow& row, const Dataset& ds, const TrialInputs& in, const ExperimentConfig& cfg) {
  const auto& views = ds.views;
  CoEmConfig cc = coem_config(cfg, row.seed);
  switch (row.method) {
    case Method::cp:
    case Method::cluster_membership: {
      cc.estep = row.method == Method::cp ? EStep::propagation : EStep::cluster_membership;
      detail::fill_propagated(row, views, run_multi_view(views, in.constraints, in.relations, cc));
      break;
    }
    case Method::direct: {
      if (views.size() < 2) throw std::invalid_argument("direct mapping needs at least two views");
      std::map<std::string, ConstraintSet> by_view;
      for (std::size_t v = 0; v < views.size(); ++v) by_view[views[v].id()] = in.constraints[v];
      const ClosureResult closure = build_closure(by_view, in.relations);
      const auto transfer = detail::transfer_maps(views, closure.relations);
      std::vector<ClusterResult> results;
      std::vector<const ClusterModel*> models;
      for (std::size_t v = 0; v < views.size(); ++v) {
        ConstraintSet unified = closure.constraints.at(views[v].id());
        for (std::size_t u = 0; u < views.size(); ++u)
          if (u != v) unified = max_union(unified, map_constraints(closure.constraints.at(views[u].id()), transfer[u][v]));
        results.push_back(cluster(views[v], unified, cc.clustering));
      }
      for (const auto& r : results) models.push_back(&r.model);
      detail::fill_scores(row, views, models);
      break;
    }
    case Method::single_view: {
      std::vector<ClusterResult> results;
      std::vector<const ClusterModel*> models;
      for (std::size_t v = 0; v < views.size(); ++v) results.push_back(cluster(views[v], in.constraints[v], cc.clustering));
      for (const auto& r : results) models.push_back(&r.model);
      detail::fill_scores(row, views, models);
      break;
    }
    case Method::single_view_cp: {
      std::vector<CoEmResult> results;
      WeightedPrecision wp;
      std::vector<const ClusterModel*> models;
      for (std::size_t v = 0; v < views.size(); ++v) {
        CoEmConfig one = cc;
        one.thresholds = {cc.threshold_for(v)};
        results.push_back(run_single_view_cp(views[v], in.constraints[v], one));
        const auto& p = results.back().views[0].propagated;
        row.propagated_ml += p.count(ConstraintKind::must_link);
        row.propagated_cl += p.count(ConstraintKind::cannot_link);
        wp.add(p, views[v]);
        row.outer_iterations = std::max(row.outer_iterations, results.back().outer_iterations);
      }
      for (const auto& r : results) models.push_back(&r.views[0].clustering.model);
      row.precision_ml = wp.must_link();
      row.precision_cl = wp.cannot_link();
      detail::fill_scores(row, views, models);
      break;
    }
  }
}

/// Loads the dataset and embeds it when configured.
inline Dataset prepare_dataset(const ExperimentConfig& cfg, std::vector<std::string>* warnings = nullptr) {
  Dataset ds = read_dataset(cfg.dataset);
  const bool embed = cfg.embed == EmbedMode::on || (cfg.embed == EmbedMode::automatic && ds.embed);
  ds.embed = embed;
  if (embed) {
    for (auto& v : ds.views) {
      EmbeddingConfig ec{cfg.sigma, cfg.embed_dims, true};
      auto e = spectral_embed(v, ec);
      if (warnings)
        for (const auto& n : e.notes) warnings->push_back("view " + v.id() + ": " + n);
      v = std::move(e.view);
    }
  }
  return ds;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg, const Dataset& ds) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.dataset = ds.name;
  report.embedded = ds.embed;
  for (const auto& v : ds.views) report.view_ids.push_back(v.id());

  // model-appropriateness check on the unconstrained clustering of each view
  if (cfg.k >= 2) {
    for (const auto& v : ds.views) {
      try {
        ClusteringConfig cc{cfg.k, cfg.variant, cfg.max_em_iters, cfg.epsilon, cfg.base_seed};
        auto res = cluster(v, ConstraintSet{}, cc);
        auto diag = overlap_diagnostics(fit_gaussians(v, res.model, cfg.gamma), v, res.model.assignment);
        for (const auto& w : diag.warnings) report.warnings.push_back("view " + v.id() + ": " + w);
      } catch (const std::exception& e) {
        report.warnings.push_back("view " + v.id() + ": diagnostics unavailable (" + e.what() + ")");
      }
    }
  }

  // rows in output order: method, fraction, count, trial
  std::vector<ExperimentRow> rows;
  for (Method m : cfg.methods) {
    std::vector<std::optional<double>> fractions;
    if (uses_mapping(m)) {
      for (double f : cfg.mapping_fractions) fractions.emplace_back(f);
    } else {
      fractions.emplace_back(std::nullopt);
    }
    for (const auto& f : fractions)
      for (std::size_t count : cfg.constraint_counts)
        for (std::size_t t = 0; t < cfg.trials; ++t) {
          ExperimentRow r;
          r.method = m;
          r.mapping_fraction = f;
          r.constraint_count = count;
          r.trial = t;
          r.seed = cfg.base_seed + t;
          rows.push_back(std::move(r));
        }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      auto& row = rows[i];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const TrialInputs in = sample_trial(ds, row.constraint_count, row.mapping_fraction, row.seed);
        run_method(row, ds, in, cfg);
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
        row.view_f.clear();
        row.mean_f = 0.0;
      }
      row.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(cfg.threads, rows.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  report.rows = std::move(rows);
  report.cells = summarize(report.rows);
  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  std::vector<std::string> notes;
  Dataset ds = prepare_dataset(cfg, &notes);
  ExperimentReport report = run_experiment(cfg, ds);
  report.warnings.insert(report.warnings.begin(), notes.begin(), notes.end());
  return report;
}

// ---------------------------------------------------------------------------

namespace detail {

inline std::string na_or(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

inline std::string csv_safe(std::string s) {
  for (auto& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ';';
  return s;
}

}  // namespace detail

/// raw.csv columns: method, mapping_fraction (NA for single-view methods),
/// constraint_count, trial, seed, status, mean_f, f_<view>..., propagated_ml,
/// propagated_cl, precision_ml, precision_cl (NA when nothing of that kind was
/// propagated), outer_iterations, error.
inline void write_raw_csv(std::ostream& out, const ExperimentReport& report) {
  out << "method,mapping_fraction,constraint_count,trial,seed,status,mean_f";
  for (const auto& id : report.view_ids) out << ",f_" << id;
  out << ",propagated_ml,propagated_cl,precision_ml,precision_cl,outer_iterations,error\n";
  for (const auto& r : report.rows) {
    out << to_string(r.method) << ',' << detail::na_or(r.mapping_fraction) << ',' << r.constraint_count << ','
        << r.trial << ',' << r.seed << ',' << (r.ok ? "ok" : "error") << ',';
    if (r.ok) {
      out << detail::format_double(r.mean_f);
      for (double f : r.view_f) out << ',' << detail::format_double(f);
      out << ',' << r.propagated_ml << ',' << r.propagated_cl << ',' << detail::na_or(r.precision_ml) << ','
          << detail::na_or(r.precision_cl) << ',' << r.outer_iterations << ',';
    } else {
      out << "NA";
      for (std::size_t v = 0; v < report.view_ids.size(); ++v) out << ",NA";
      out << ",NA,NA,NA,NA,NA," << detail::csv_safe(r.error);
    }
    out << '\n';
  }
}

/// summary.csv: one row per cell with mean and standard error of each metric
/// over the successful trials.
inline void write_summary_csv(std::ostream& out, const ExperimentReport& report) {
  out << "method,mapping_fraction,constraint_count,trials_ok,trials_failed,mean_f,se_f,mean_propagated_ml,"
         "se_propagated_ml,mean_propagated_cl,se_propagated_cl,mean_precision_ml,se_precision_ml,"
         "mean_precision_cl,se_precision_cl,mean_outer_iterations\n";
  auto agg = [](const Aggregate& a) {
    if (a.n == 0) return std::string("NA,NA");
    return detail::format_double(a.mean) + "," + detail::format_double(a.se);
  };
  for (const auto& c : report.cells) {
    out << to_string(c.method) << ',' << detail::na_or(c.mapping_fraction) << ',' << c.constraint_count << ','
        << c.mean_f.n << ',' << c.failed << ',' << agg(c.mean_f) << ',' << agg(c.propagated_ml) << ','
        << agg(c.propagated_cl) << ',' << agg(c.precision_ml) << ',' << agg(c.precision_cl) << ','
        << (c.outer_iterations.n ? detail::format_double(c.outer_iterations.mean) : std::string("NA")) << '\n';
  }
}

inline void write_summary_txt(std::ostream& out, const ExperimentReport& report) {
  char buf[256];
  out << "dataset: " << report.dataset << "\nviews: ";
  for (std::size_t v = 0; v < report.view_ids.size(); ++v) out << (v ? ", " : "") << report.view_ids[v];
  out << "\nspectral embedding: " << (report.embedded ? "on" : "off") << "\nrows: " << report.rows.size()
      << " (" << report.failures() << " failed)\n";
  std::snprintf(buf, sizeof buf, "wall time: %.2f s\n\n", report.runtime_seconds);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-20s %9s %6s %8s %8s %10s %10s %8s %8s\n", "method", "fraction", "count", "mean_f",
                "se_f", "prop_ml", "prop_cl", "prec_ml", "prec_cl");
  out << buf;
  for (const auto& c : report.cells) {
    const std::string frac = c.mapping_fraction ? std::to_string(*c.mapping_fraction).substr(0, 4) : "-";
    auto prec = [](const Aggregate& a) { return a.n ? std::to_string(a.mean).substr(0, 6) : std::string("-"); };
    std::snprintf(buf, sizeof buf, "%-20s %9s %6zu %8.4f %8.4f %10.1f %10.1f %8s %8s%s\n", to_string(c.method),
                  frac.c_str(), c.constraint_count, c.mean_f.mean, c.mean_f.se, c.propagated_ml.mean,
                  c.propagated_cl.mean, prec(c.precision_ml).c_str(), prec(c.precision_cl).c_str(),
                  c.failed ? "  (failures)" : "");
    out << buf;
  }
  if (!report.warnings.empty()) {
    out << "\nwarnings:\n";
    for (const auto& w : report.warnings) out << "  " << w << '\n';
  }
  bool header = false;
  for (const auto& r : report.rows) {
    if (r.ok) continue;
    if (!header) out << "\nfailed cells:\n";
    header = true;
    out << "  " << to_string(r.method) << " fraction=" << detail::na_or(r.mapping_fraction)
        << " count=" << r.constraint_count << " trial=" << r.trial << ": " << r.error << '\n';
  }
}

inline void write_results(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = detail::open_out(dir / "raw.csv");
    write_raw_csv(out, report);
  }
  {
    auto out = detail::open_out(dir / "summary.csv");
    write_summary_csv(out, report);
  }
  auto out = detail::open_out(dir / "summary.txt");
  write_summary_txt(out, report);
}

}  // namespace mvcc
