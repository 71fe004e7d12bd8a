#include "setemb/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "setemb/benchmark.hpp"
#include "setemb/checkpoint.hpp"
#include "setemb/errors.hpp"
#include "setemb/evalharness.hpp"
#include "setemb/hash.hpp"
#include "setemb/io.hpp"
#include "setemb/training.hpp"

namespace setemb {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string format;  // empty: command default
};

/// Provenance record written next to every output file.
class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

  void input(const fs::path& p) { inputs_[p.string()] = hex64(hash_file(p)); }
  void set_config(json c) { config_ = std::move(c); }
  void set_seed(std::uint64_t s) { seed_ = s; }
  void set(const std::string& key, json value) { extra_[key] = std::move(value); }

  void write(const fs::path& artifact) const {
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::time_t now = std::time(nullptr);
    std::ostringstream stamp;
    stamp << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
    json m = {{"command", command_},
              {"tool", "setemb"},
              {"version", std::string(kVersion)},
              {"config", config_},
              {"inputs", inputs_},
              {"output", {{"path", artifact.string()}, {"hash", hex64(hash_file(artifact))}}},
              {"seed", seed_ ? json(*seed_) : json(nullptr)},
              {"wall_time_seconds", elapsed},
              {"finished_at", stamp.str()}};
    for (const auto& [k, v] : extra_.items()) m[k] = v;
    std::ofstream out(artifact.string() + ".manifest.json");
    out << m.dump(2) << '\n';
    if (!out) throw DataError("cannot write manifest for " + artifact.string());
  }

 private:
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  json config_ = json::object();
  json inputs_ = json::object();
  json extra_ = json::object();
  std::optional<std::uint64_t> seed_;
};

std::ofstream open_output(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot open " + p.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& p) {
  out.close();
  if (!out) throw DataError("failed writing " + p.string());
}

std::string format_or(const Globals& g, std::string_view fallback, std::initializer_list<std::string_view> allowed,
                      std::string_view what) {
  std::string f = g.format.empty() ? std::string(fallback) : g.format;
  for (auto a : allowed)
    if (f == a) return f;
  std::string list;
  for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  throw UsageError(std::string(what) + " supports --format " + list + ", not '" + f + "'");
}

MatrixKind parse_matrix_kind(const std::string& s) {
  if (s == "ground_truth") return MatrixKind::GroundTruth;
  if (s == "noisy") return MatrixKind::Noisy;
  throw UsageError("matrix kind must be ground_truth or noisy, not '" + s + "'");
}

json config_json(const TrainConfig& cfg) {
  json j = json::object();
  std::istringstream in(format_train_config(cfg));
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq != std::string::npos) j[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return j;
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string observations, hierarchy, kind = "noisy", out;
};

int cmd_ingest(const IngestArgs& a, const Globals&, std::ostream& out, std::ostream& err) {
  Manifest manifest("ingest");
  manifest.input(a.observations);
  std::optional<fs::path> hierarchy;
  if (!a.hierarchy.empty()) {
    hierarchy = a.hierarchy;
    manifest.input(*hierarchy);
  }
  IngestStats stats;
  auto data = read_observations(a.observations, parse_matrix_kind(a.kind), hierarchy, &stats);
  if (stats.duplicate_pairs > 0)
    err << "warning: " << stats.duplicate_pairs << " duplicate item/attribute pairs merged (weights summed)\n";
  write_dataset(a.out, data);
  out << "items\t" << data.matrix.num_items() << '\n'
      << "attributes\t" << data.matrix.num_attributes() << '\n'
      << "nonzeros\t" << data.matrix.nnz() << '\n';
  manifest.set_config({{"kind", a.kind}, {"hierarchy_edges", stats.hierarchy_edges}});
  manifest.set("counts", {{"items", data.matrix.num_items()},
                          {"attributes", data.matrix.num_attributes()},
                          {"nonzeros", data.matrix.nnz()}});
  manifest.write(a.out);
  return kExitOk;
}

struct TrainArgs {
  std::string data, config, kind, out, log;
};

int cmd_train(const TrainArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  auto format = parse_number_format(format_or(g, "text", {"text", "binary"}, "train"));
  Manifest manifest("train");
  manifest.input(a.data);
  manifest.input(a.config);
  std::ifstream cfg_in(a.config);
  if (!cfg_in) throw DataError("cannot open " + a.config);
  TrainConfig cfg = parse_train_config(cfg_in);
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  ModelKind kind = parse_model_kind(a.kind);
  check_config(cfg, kind);
  if (cfg.learning_rate == 0.0) err << "warning: learning_rate is 0; parameters stay at their initial values\n";

  auto data = read_dataset(fs::path(a.data));
  fs::path log_path = a.log.empty() ? fs::path(a.out + ".log.tsv") : fs::path(a.log);
  auto log = open_output(log_path);
  log << "epoch\tmeanLoss\n";
  auto trained = fit(data.matrix, cfg, kind, [&](std::size_t epoch, double loss) {
    log << epoch << '\t' << format_double(loss) << '\n';
  });
  finish(log, log_path);
  write_checkpoint(a.out, Checkpoint{data.catalog, std::move(trained.model)}, format);
  if (!trained.epoch_losses.empty())
    out << "final_loss\t" << format_double(trained.epoch_losses.back()) << '\n';
  manifest.set_config(config_json(cfg));
  manifest.set_seed(cfg.seed);
  manifest.set("model_kind", a.kind);
  manifest.write(a.out);
  manifest.write(log_path);
  return kExitOk;
}

struct SearchArgs {
  std::string data, grid, kind, validation, out;
  double val_fraction = 0.2;
  bool all_singletons = false;
};

int cmd_search(const SearchArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  auto format = parse_number_format(format_or(g, "text", {"text", "binary"}, "search"));
  Manifest manifest("search");
  manifest.input(a.data);
  manifest.input(a.grid);
  manifest.input(a.validation);
  std::ifstream grid_in(a.grid);
  if (!grid_in) throw DataError("cannot open " + a.grid);
  HyperGrid grid = parse_grid(grid_in);
  if (g.seed) grid.seed = *g.seed;
  if (g.threads) grid.threads = *g.threads;
  ModelKind kind = parse_model_kind(a.kind);

  auto data = read_dataset(fs::path(a.data));
  auto bench = bind_benchmark(read_benchmark_jsonl(fs::path(a.validation)), data.catalog);
  std::vector<const BenchmarkQuery*> chosen;
  if (a.all_singletons)
    chosen = bench.task(TaskKind::Singleton);
  else
    chosen = split_singletons(bench, a.val_fraction, grid.seed).first;
  std::vector<ValidationQuery> val;
  for (const auto* bq : chosen)
    if (bq->query) val.push_back({*bq->query, bq->truth});
  if (val.empty()) throw DataError("no resolvable singleton validation queries in " + a.validation);

  auto result = random_search(data.matrix, grid, val, kind);
  fs::path trials_path = a.out + ".trials.tsv";
  auto trials = open_output(trials_path);
  trials << "trial\tprecisionAt1\tstatus\tconfig\n";
  for (std::size_t t = 0; t < result.trials.size(); ++t) {
    const auto& tr = result.trials[t];
    std::string flat = format_train_config(tr.config);
    for (auto& c : flat)
      if (c == '\n') c = ' ';
    trials << t << '\t' << format_double(tr.precision_at_1) << '\t' << (tr.failed ? "failed: " + tr.error : "ok")
           << '\t' << flat << '\n';
    if (tr.failed) err << "warning: trial " << t << " failed: " << tr.error << '\n';
  }
  finish(trials, trials_path);
  write_checkpoint(a.out, Checkpoint{data.catalog, std::move(result.best_model)}, format);
  fs::path best_path = a.out + ".config";
  auto best = open_output(best_path);
  best << format_train_config(result.best_config);
  finish(best, best_path);
  out << "validation_queries\t" << val.size() << '\n' << "best_config\t" << best_path.string() << '\n';

  json grid_json = json::object();
  std::istringstream grid_text(format_grid(grid));
  std::string line;
  while (std::getline(grid_text, line))
    if (auto eq = line.find('='); eq != std::string::npos) grid_json[line.substr(0, eq)] = line.substr(eq + 1);
  manifest.set_config(grid_json);
  manifest.set_seed(grid.seed);
  manifest.set("best_config", config_json(result.best_config));
  manifest.set("validation", {{"queries", val.size()}, {"all_singletons", a.all_singletons},
                              {"fraction", a.val_fraction}});
  manifest.write(a.out);
  manifest.write(trials_path);
  manifest.write(best_path);
  return kExitOk;
}

struct QueryArgs {
  std::string checkpoint, query, strategy;
  std::size_t k = 10;
};

int cmd_query(const QueryArgs& a, const Globals&, std::ostream& out, std::ostream&) {
  auto ckpt = read_checkpoint(fs::path(a.checkpoint));
  Query q = parse_query(a.query, ckpt.catalog);
  std::string strategy = a.strategy;
  if (strategy.empty())
    strategy = ckpt.is_box() ? "box"
               : ckpt.vector().transform() == Transform::Sigmoid ? "probabilistic"
                                                                  : "algebraic";
  if (a.k == 0) return kExitOk;
  std::vector<RankedItem> ranked;
  std::size_t m = 0;
  if (strategy == "box") {
    if (!ckpt.is_box()) throw UsageError("strategy 'box' needs a box checkpoint");
    m = ckpt.box().num_items();
    ranked = rank_items_box(ckpt.box(), q, std::min(a.k, m));
  } else if (strategy == "probabilistic" || strategy == "algebraic") {
    if (ckpt.is_box()) throw UsageError("strategy '" + strategy + "' needs a vector checkpoint");
    m = ckpt.vector().num_items();
    auto s = strategy == "probabilistic" ? VectorStrategy::Probabilistic : VectorStrategy::Algebraic;
    ranked = rank_items_vec(ckpt.vector(), q, s, std::min(a.k, m));
  } else {
    throw UsageError("strategy must be probabilistic, algebraic or box, not '" + strategy + "'");
  }
  for (std::size_t r = 0; r < ranked.size(); ++r)
    out << r + 1 << '\t' << ckpt.catalog.item(ranked[r].item) << '\t' << format_double(ranked[r].score) << '\n';
  return kExitOk;
}

struct GenbenchArgs {
  std::string truth, out;
  GenCriteria criteria;
  std::size_t max_result = 0;  // 0: default
};

int cmd_genbench(const GenbenchArgs& a, const Globals&, std::ostream& out, std::ostream&) {
  Manifest manifest("genbench");
  manifest.input(a.truth);
  auto data = read_dataset(fs::path(a.truth));
  if (data.matrix.kind() != MatrixKind::GroundTruth)
    throw UsageError("genbench needs a ground_truth dataset, got a noisy one");
  GenCriteria criteria = a.criteria;
  if (a.max_result > 0) criteria.max_result = a.max_result;
  auto bench = generate_queries(data.matrix, data.catalog, criteria);
  BenchmarkFile file = to_benchmark_file(bench, data.catalog);
  json crit = {{"lift_min", criteria.lift_min},
               {"contain_max", criteria.contain_max},
               {"min_result", criteria.min_result},
               {"max_result", criteria.max_result_for(data.matrix.num_items())}};
  json counts = json::object();
  for (TaskKind t : kAllTasks) counts[std::string(task_name(t))] = bench.count(t);
  file.header = json{{"generator", "setemb genbench"},
                     {"criteria", crit},
                     {"source_hash", hex64(hash_file(a.truth))},
                     {"catalog_hash", hex64(data.catalog.hash())},
                     {"counts", counts}};
  auto f = open_output(a.out);
  write_benchmark_jsonl(f, file);
  finish(f, a.out);
  auto rhos = mean_rho(bench);
  out << "task\tqueries\tmeanRho\n";
  for (TaskKind t : kAllTasks) {
    out << task_name(t) << '\t' << bench.count(t) << '\t';
    if (auto it = rhos.find(t); it != rhos.end())
      out << format_double(it->second);
    else
      out << "-";
    out << '\n';
  }
  manifest.set_config(crit);
  manifest.write(a.out);
  return kExitOk;
}

/// Ranker under a caller-chosen display name.
class RenamedRanker : public Ranker {
 public:
  RenamedRanker(std::unique_ptr<Ranker> inner, std::string name) : inner_(std::move(inner)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  const EntityCatalog& catalog() const override { return inner_->catalog(); }
  std::vector<Index> rank(const Query& q, std::size_t k) const override { return inner_->rank(q, k); }

 private:
  std::unique_ptr<Ranker> inner_;
  std::string name_;
};

struct EvalArgs {
  std::string benchmark, data, out;
  std::vector<std::string> checkpoints;
  std::vector<std::size_t> ks{std::begin(kDefaultKs), std::end(kDefaultKs)};
  bool details = false;
  bool no_lookup = false;
};

int cmd_eval(const EvalArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  std::string format = format_or(g, "text", {"text", "tsv"}, "eval");
  Manifest manifest("eval");
  manifest.input(a.benchmark);
  manifest.input(a.data);
  auto data = read_dataset(fs::path(a.data));
  auto bench = bind_benchmark(read_benchmark_jsonl(fs::path(a.benchmark)), data.catalog);

  std::vector<Checkpoint> ckpts;
  ckpts.reserve(a.checkpoints.size());
  for (const auto& c : a.checkpoints) {
    manifest.input(c);
    ckpts.push_back(read_checkpoint(fs::path(c)));
    if (!(ckpts.back().catalog == data.catalog))
      throw UsageError("checkpoint " + c + " was trained on a different catalog than " + a.data);
  }
  std::vector<std::unique_ptr<Ranker>> rankers;
  if (!a.no_lookup) rankers.push_back(std::make_unique<LookupRanker>(data.catalog, data.matrix));
  for (std::size_t c = 0; c < ckpts.size(); ++c) {
    std::vector<std::unique_ptr<Ranker>> mine;
    if (ckpts[c].is_box()) {
      mine.push_back(std::make_unique<BoxRanker>(data.catalog, ckpts[c].box()));
    } else {
      if (ckpts[c].vector().transform() == Transform::Sigmoid)
        mine.push_back(std::make_unique<VectorRanker>(data.catalog, ckpts[c].vector(), VectorStrategy::Probabilistic));
      mine.push_back(std::make_unique<VectorRanker>(data.catalog, ckpts[c].vector(), VectorStrategy::Algebraic));
    }
    for (auto& r : mine) {
      std::string name = r->name();
      bool taken = std::any_of(rankers.begin(), rankers.end(), [&](const auto& x) { return x->name() == name; });
      if (taken) name += " [" + fs::path(a.checkpoints[c]).filename().string() + "]";
      rankers.push_back(std::make_unique<RenamedRanker>(std::move(r), name));
    }
  }
  if (rankers.empty()) throw UsageError("nothing to evaluate: give --checkpoint or drop --no-lookup");

  EvalOptions options;
  options.ks = a.ks;
  options.details = a.details;
  options.threads = g.threads.value_or(1);
  std::vector<const Ranker*> methods;
  for (const auto& r : rankers) methods.push_back(r.get());
  auto report = evaluate(methods, bench, data.catalog, options);
  for (const auto& [task, n] : report.unresolved)
    err << "warning: " << n << " " << task_name(task) << " queries name unknown attributes; scored as 0\n";

  auto f = open_output(a.out);
  if (format == "tsv")
    write_report_tsv(f, report);
  else
    write_report_text(f, report);
  finish(f, a.out);
  if (a.details) {
    fs::path details_path = a.out + ".details.tsv";
    auto d = open_output(details_path);
    d << "task\tmethod\tquery";
    for (auto k : report.ks) d << "\tP@" << k;
    d << '\n';
    for (const auto& row : report.details) {
      d << task_name(row.task) << '\t' << row.method << '\t' << row.query;
      for (double p : row.precision) d << '\t' << format_double(p);
      d << '\n';
    }
    finish(d, details_path);
    manifest.write(details_path);
  }
  write_report_text(out, report);
  manifest.set_config({{"ks", a.ks}, {"details", a.details}, {"lookup", !a.no_lookup}, {"format", format}});
  manifest.set("methods", report.methods);
  manifest.write(a.out);
  return kExitOk;
}

struct CompletenessArgs {
  std::string truth, noisy, out;
  std::size_t min_overlap = 5;
};

int cmd_completeness(const CompletenessArgs& a, const Globals&, std::ostream& out, std::ostream&) {
  Manifest manifest("completeness");
  manifest.input(a.truth);
  manifest.input(a.noisy);
  auto truth = read_dataset(fs::path(a.truth));
  auto noisy = read_dataset(fs::path(a.noisy));
  auto report = estimate_completeness(truth, noisy, a.min_overlap);
  auto f = open_output(a.out);
  write_completeness_tsv(f, report);
  finish(f, a.out);
  out << "completeness_o\t" << format_double(report.completeness_o) << '\n'
      << "completeness_o_prime\t" << format_double(report.completeness_o_prime) << '\n'
      << "attributes_included\t" << report.attributes_included << '/' << report.attributes_total << '\n'
      << "pairs_included\t" << report.pairs_included << '/' << report.pairs_total << '\n';
  manifest.set_config({{"min_overlap", a.min_overlap}});
  manifest.set("aggregates", {{"completeness_o", report.completeness_o},
                              {"completeness_o_prime", report.completeness_o_prime},
                              {"attribute_coverage", report.attribute_coverage()},
                              {"pair_coverage", report.pair_coverage()}});
  manifest.write(a.out);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Set-theoretic retrieval with box and vector embeddings"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kVersion));

  Globals g;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  auto* seed_opt = app.add_option("--seed", seed, "Override the seed of the config or grid file");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "Output encoding")->check(CLI::IsMember({"text", "tsv", "binary"}));

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Read item/attribute TSV into the internal dataset format");
  c_ingest->add_option("observations", ingest.observations, "item<TAB>attribute[<TAB>weight] file")->required();
  c_ingest->add_option("--hierarchy", ingest.hierarchy, "child<TAB>parent attribute file");
  c_ingest->add_option("--kind", ingest.kind, "ground_truth or noisy")->capture_default_str();
  c_ingest->add_option("-o,--out", ingest.out)->required();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train one model from a config file");
  c_train->add_option("data", train.data)->required();
  c_train->add_option("-c,--config", train.config, "key=value training config")->required();
  c_train->add_option("--kind", train.kind, "vector or box")->required();
  c_train->add_option("-o,--out", train.out, "checkpoint path")->required();
  c_train->add_option("--log", train.log, "epoch loss log (default <out>.log.tsv)");

  SearchArgs search;
  auto* c_search = app.add_subcommand("search", "Random hyperparameter search");
  c_search->add_option("data", search.data)->required();
  c_search->add_option("-g,--grid", search.grid, "grid file")->required();
  c_search->add_option("--kind", search.kind, "vector or box")->required();
  c_search->add_option("--validation", search.validation, "benchmark file supplying singleton queries")->required();
  c_search->add_option("--val-fraction", search.val_fraction, "share of singletons used for validation")
      ->capture_default_str();
  c_search->add_flag("--all-singletons", search.all_singletons, "validate on every singleton query");
  c_search->add_option("-o,--out", search.out, "checkpoint path of the best model")->required();

  QueryArgs query;
  auto* c_query = app.add_subcommand("query", "Rank items for a query");
  c_query->add_option("checkpoint", query.checkpoint)->required();
  c_query->add_option("query", query.query, "e.g. 'comedy & !romance'")->required();
  c_query->add_option("-k", query.k)->capture_default_str();
  c_query->add_option("--strategy", query.strategy, "probabilistic, algebraic or box");

  GenbenchArgs genbench;
  auto* c_gen = app.add_subcommand("genbench", "Generate compositional queries from ground truth");
  c_gen->add_option("truth", genbench.truth)->required();
  c_gen->add_option("-o,--out", genbench.out)->required();
  c_gen->add_option("--lift-min", genbench.criteria.lift_min)->capture_default_str();
  c_gen->add_option("--contain-max", genbench.criteria.contain_max)->capture_default_str();
  c_gen->add_option("--min-result", genbench.criteria.min_result)->capture_default_str();
  c_gen->add_option("--max-result", genbench.max_result, "default: half the items");

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Precision@k of the lookup baseline and trained models");
  c_eval->add_option("benchmark", eval.benchmark)->required();
  c_eval->add_option("--data", eval.data, "noisy dataset (lookup baseline and catalog)")->required();
  c_eval->add_option("--checkpoint", eval.checkpoints);
  c_eval->add_option("-k", eval.ks)->delimiter(',')->check(CLI::PositiveNumber);
  c_eval->add_flag("--details", eval.details, "also write per-query precision");
  c_eval->add_flag("--no-lookup", eval.no_lookup, "skip the lookup baseline");
  c_eval->add_option("-o,--out", eval.out)->required();

  CompletenessArgs compl_args;
  auto* c_compl = app.add_subcommand("completeness", "Estimate annotation completeness from two sources");
  c_compl->add_option("truth", compl_args.truth)->required();
  c_compl->add_option("noisy", compl_args.noisy)->required();
  c_compl->add_option("--min-overlap", compl_args.min_overlap)->capture_default_str();
  c_compl->add_option("-o,--out", compl_args.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }
  if (*seed_opt) g.seed = seed;
  if (*threads_opt) g.threads = threads;

  try {
    if (*c_ingest) return cmd_ingest(ingest, g, out, err);
    if (*c_train) return cmd_train(train, g, out, err);
    if (*c_search) return cmd_search(search, g, out, err);
    if (*c_query) return cmd_query(query, g, out, err);
    if (*c_gen) return cmd_genbench(genbench, g, out, err);
    if (*c_eval) return cmd_eval(eval, g, out, err);
    if (*c_compl) return cmd_completeness(compl_args, g, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace setemb
