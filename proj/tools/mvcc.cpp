// mvcc command-line tool: generate, embed, cluster, coem, experiment.

#include "mvcc/mvcc.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace mvcc;

namespace {

void write_assignment(const fs::path& path, const ViewData& view, const ClusterModel& model) {
  auto out = detail::open_out(path);
  out << "id,cluster\n";
  for (std::size_t i : view.id_order()) out << view.id_at(i) << ',' << model.assignment[i] << '\n';
}

void print_scores(const ViewData& view, const ClusterModel& model) {
  if (!view.has_labels()) return;
  const auto s = pairwise_f(view, model);
  std::printf("  pairwise precision %.4f  recall %.4f  F %.4f\n", s.precision, s.recall, s.f_measure);
}

struct GenerateArgs {
  std::string spec;
  std::string generator = "four-quadrants";
  std::uint64_t seed = 0;
  std::size_t per_quadrant = 50;
  std::string grouping = "diagonal";
  std::string source;
  std::string pairings;
  std::size_t constraints = 0;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  DatasetSpec spec;
  if (!a.spec.empty()) {
    spec = read_dataset_spec(a.spec);
  } else {
    std::map<std::string, std::string> kv{{"generator", a.generator},
                                          {"seed", std::to_string(a.seed)},
                                          {"per_quadrant", std::to_string(a.per_quadrant)},
                                          {"grouping", a.grouping},
                                          {"name", a.generator}};
    if (!a.source.empty()) kv["source"] = a.source;
    if (!a.pairings.empty()) kv["pairings"] = a.pairings;
    spec = dataset_spec_from(kv);
  }
  Dataset ds = read_dataset(spec);
  if (a.constraints > 0) {
    for (std::size_t v = 0; v < ds.views.size(); ++v)
      if (ds.views[v].has_labels())
        ds.constraints[ds.views[v].id()] = sample_constraints(ds.views[v], a.constraints, mix_seed(spec.seed, v));
  }
  const auto path = write_dataset(ds, a.out);
  std::printf("wrote %s\n", path.string().c_str());
  for (const auto& v : ds.views) std::printf("  view %s: %zu x %zu\n", v.id().c_str(), v.size(), v.dim());
  for (const auto& r : ds.relations)
    std::printf("  relations %s->%s: %zu pairs\n", r.from_view.c_str(), r.to_view.c_str(), r.pairs.size());
  return 0;
}

struct EmbedArgs {
  std::string view;
  std::string id = "V";
  double sigma = 1.0;
  std::size_t dims = 0;
  bool no_standardize = false;
  std::string out;
};

int run_embed(const EmbedArgs& a) {
  const ViewData v = read_view_csv(a.view, a.id);
  auto e = spectral_embed(v, EmbeddingConfig{a.sigma, a.dims, !a.no_standardize});
  write_view_csv(fs::path(a.out), e.view);
  std::printf("embedded %zu x %zu -> %zu x %zu\n", v.size(), v.dim(), e.view.size(), e.view.dim());
  for (const auto& n : e.notes) std::fprintf(stderr, "note: %s\n", n.c_str());
  return 0;
}

struct ClusterArgs {
  std::string view;
  std::string id = "V";
  std::string constraints;
  std::size_t k = 2;
  std::string variant = "pck";
  std::uint64_t seed = 0;
  std::size_t max_iters = 100;
  double epsilon = 1e-6;
  std::string out;
};

int run_cluster(const ClusterArgs& a) {
  const ViewData v = read_view_csv(a.view, a.id);
  ConstraintSet cs;
  if (!a.constraints.empty()) cs = read_constraints_csv(a.constraints, &v);
  const ClusteringConfig cfg{a.k, parse_variant(a.variant), a.max_iters, a.epsilon, a.seed};
  const auto res = cluster(v, cs, cfg);
  std::printf("view %s: %zu instances, %zu constraints, k=%zu, %s\n", v.id().c_str(), v.size(), cs.size(), a.k,
              to_string(cfg.variant));
  std::printf("  objective %.6f after %zu iterations (%s)\n", res.objective(), res.iterations,
              res.converged ? "converged" : "iteration limit");
  if (!res.reseeds.empty()) std::printf("  %zu empty-cluster reseeds\n", res.reseeds.size());
  print_scores(v, res.model);
  if (!a.out.empty()) write_assignment(a.out, v, res.model);
  return 0;
}

struct CoEmArgs {
  std::string dataset;
  std::size_t constraints = 0;
  double fraction = 1.0;
  std::uint64_t seed = 0;
  std::size_t k = 2;
  std::string variant = "pck";
  std::vector<double> thresholds{0.75};
  std::size_t max_outer_iters = 20;
  std::string view_order = "fixed";
  std::string out;
};

int run_coem(const CoEmArgs& a) {
  ExperimentConfig ec;
  ec.dataset = read_dataset_spec(a.dataset);
  std::vector<std::string> notes;
  const Dataset ds = prepare_dataset(ec, &notes);
  for (const auto& n : notes) std::fprintf(stderr, "note: %s\n", n.c_str());

  TrialInputs in;
  if (a.constraints > 0) {
    in = sample_trial(ds, a.constraints, a.fraction, a.seed);
  } else {
    for (const auto& v : ds.views) {
      auto it = ds.constraints.find(v.id());
      in.constraints.push_back(it == ds.constraints.end() ? ConstraintSet{} : it->second);
    }
    for (std::size_t r = 0; r < ds.relations.size(); ++r)
      in.relations.push_back(sample_mapping(ds.relations[r], a.fraction, mix_seed(a.seed, 1000 + r)));
  }

  CoEmConfig cfg;
  cfg.thresholds = a.thresholds;
  cfg.clustering = ClusteringConfig{a.k, parse_variant(a.variant), 100, 1e-6, a.seed};
  cfg.max_outer_iters = a.max_outer_iters;
  if (a.view_order == "fixed") {
    cfg.view_order = ViewOrder::fixed;
  } else if (a.view_order == "seeded-random") {
    cfg.view_order = ViewOrder::seeded_random;
  } else {
    throw std::invalid_argument("view order must be fixed or seeded-random");
  }

  const auto res = run_multi_view(ds.views, in.constraints, in.relations, cfg);
  std::printf("co-EM over %zu views: %zu outer iterations (%s)\n", ds.views.size(), res.outer_iterations,
              res.converged ? "converged" : "iteration limit");
  if (!res.closure.conflicts.empty()) std::printf("  %zu closure conflicts\n", res.closure.conflicts.size());
  for (std::size_t v = 0; v < ds.views.size(); ++v) {
    const auto& view = ds.views[v];
    const auto& st = res.views[v];
    std::printf("view %s: %zu constraints, %zu mapped, propagated %zu ML / %zu CL\n", view.id().c_str(),
                in.constraints[v].size(), res.mapped[v].size(), st.propagated.count(ConstraintKind::must_link),
                st.propagated.count(ConstraintKind::cannot_link));
    print_scores(view, st.clustering.model);
    if (view.has_labels()) {
      const auto wp = weighted_precision(st.propagated, view);
      if (wp.must_link()) std::printf("  weighted precision ML %.4f\n", *wp.must_link());
      if (wp.cannot_link()) std::printf("  weighted precision CL %.4f\n", *wp.cannot_link());
    }
    if (!a.out.empty()) {
      fs::create_directories(a.out);
      write_assignment(fs::path(a.out) / ("assignment_" + view.id() + ".csv"), view, st.clustering.model);
      write_constraints_csv(fs::path(a.out) / ("propagated_" + view.id() + ".csv"), st.propagated);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-view constrained clustering with constraint propagation"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "generate or load a dataset and write it as CSV files");
  g->add_option("--spec", gen.spec, "dataset spec file (overrides the generator flags)");
  g->add_option("--generator", gen.generator, "four-quadrants or paired-views");
  g->add_option("--seed", gen.seed, "generator seed");
  g->add_option("--per-quadrant", gen.per_quadrant, "draws per quadrant (four-quadrants)");
  g->add_option("--grouping", gen.grouping, "diagonal or half-plane (four-quadrants)");
  g->add_option("--source", gen.source, "labelled single-view CSV (paired-views)");
  g->add_option("--pairings", gen.pairings, "class pairings such as c1:c4,c2:c5 (paired-views)");
  g->add_option("--constraints", gen.constraints, "also sample this many constraints per labelled view");
  g->add_option("--out", gen.out, "output directory")->required();

  EmbedArgs emb;
  auto* e = app.add_subcommand("embed", "spectral embedding of one view");
  e->add_option("--view", emb.view, "view CSV")->required();
  e->add_option("--id", emb.id, "view id");
  e->add_option("--sigma", emb.sigma, "RBF width");
  e->add_option("--dims", emb.dims, "output dimensions (0: ceil(sqrt(d)))");
  e->add_flag("--no-standardize", emb.no_standardize, "keep raw eigenvector columns");
  e->add_option("--out", emb.out, "output view CSV")->required();

  ClusterArgs cl;
  auto* c = app.add_subcommand("cluster", "constrained clustering of one view");
  c->add_option("--view", cl.view, "view CSV")->required();
  c->add_option("--id", cl.id, "view id");
  c->add_option("--constraints", cl.constraints, "constraints CSV");
  c->add_option("--k", cl.k, "number of clusters");
  c->add_option("--variant", cl.variant, "pck or mpck");
  c->add_option("--seed", cl.seed, "seed");
  c->add_option("--max-iters", cl.max_iters, "EM iteration limit");
  c->add_option("--epsilon", cl.epsilon, "objective convergence tolerance");
  c->add_option("--out", cl.out, "assignment CSV");

  CoEmArgs co;
  auto* m = app.add_subcommand("coem", "multi-view co-EM with constraint propagation");
  m->add_option("--dataset", co.dataset, "dataset spec file")->required();
  m->add_option("--constraints", co.constraints, "sample this many constraints per labelled view (0: use the dataset's)");
  m->add_option("--fraction", co.fraction, "fraction of the relation map to use");
  m->add_option("--seed", co.seed, "seed for sampling and clustering");
  m->add_option("--k", co.k, "number of clusters");
  m->add_option("--variant", co.variant, "pck or mpck");
  m->add_option("--thresholds", co.thresholds, "propagation threshold, one value or one per view")->delimiter(',');
  m->add_option("--max-outer-iters", co.max_outer_iters, "outer iteration limit");
  m->add_option("--view-order", co.view_order, "fixed or seeded-random");
  m->add_option("--out", co.out, "directory for assignments and propagated constraints");

  std::string config_path;
  std::map<std::string, std::string> overrides;
  auto* x = app.add_subcommand("experiment", "run a full experiment grid");
  x->add_option("--config", config_path, "experiment config file");
  const std::vector<std::pair<std::string, std::string>> keys{
      {"dataset", "dataset spec file"},
      {"methods", "cp,direct,cluster-membership,single-view,single-view-cp"},
      {"constraint_counts", "even constraint counts per view"},
      {"mapping_fractions", "mapping fractions in [0,1]"},
      {"trials", "trials per cell"},
      {"base_seed", "base seed"},
      {"k", "number of clusters"},
      {"variant", "pck or mpck"},
      {"thresholds", "propagation thresholds"},
      {"embed", "auto, true or false"},
      {"embed_dims", "embedding dimensions"},
      {"sigma", "embedding RBF width"},
      {"max_outer_iters", "co-EM outer iteration limit"},
      {"max_em_iters", "EM iteration limit"},
      {"epsilon", "objective convergence tolerance"},
      {"gamma", "covariance regularizer"},
      {"view_order", "fixed or seeded-random"},
      {"threads", "worker threads"},
      {"out", "output directory"}};
  std::map<std::string, std::string> flag_values;
  for (const auto& [key, help] : keys) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    x->add_option(flag, flag_values[key], help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  }

  try {
    if (*g) return run_generate(gen);
    if (*e) return run_embed(emb);
    if (*c) return run_cluster(cl);
    if (*m) return run_coem(co);
    if (*x) {
      ExperimentConfig cfg;
      if (!config_path.empty()) cfg = read_experiment_config(config_path);
      for (const auto& [key, help] : keys) {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        if (x->count(flag)) overrides[key] = flag_values[key];
      }
      apply_settings(cfg, overrides);
      if (cfg.out.empty()) throw std::invalid_argument("no output directory: pass --out or set out= in the config");
      const auto report = run_experiment(cfg);
      write_results(report, cfg.out);
      write_summary_txt(std::cout, report);
      return report.failures() ? 2 : 0;
    }
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 0;
}
