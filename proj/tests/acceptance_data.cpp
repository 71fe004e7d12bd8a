// Criteria that need the released data. Expected layout of the data directory:
//   benchmark.jsonl        released query set, one {"query", "items"} object per line
//   wikidata.tsv           ground-truth genre annotation O (item, genre)
//   genre_hierarchy.tsv    optional child/parent genre edges applied to O
//   movielens.tsv          tag data O' (item, tag, count)
// The full reproduction run is long and only starts with --full.
//
// Exit codes: 0 all run criteria pass, 1 some criterion fails, 77 nothing ran.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "acceptance_line.hpp"
#include "setemb/benchmark.hpp"
#include "setemb/errors.hpp"
#include "setemb/evalharness.hpp"
#include "setemb/io.hpp"
#include "setemb/training.hpp"

using namespace setemb;
namespace fs = std::filesystem;
using acceptance::Outcome;

namespace {

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

struct Counts {
  std::size_t items, attributes, nnz;
};

bool has_counts(const Dataset& d, Counts c) {
  return d.catalog.num_items() == c.items && d.catalog.num_attributes() == c.attributes && d.matrix.nnz() == c.nnz;
}

std::string counts_of(const Dataset& d) {
  return std::to_string(d.catalog.num_items()) + "/" + std::to_string(d.catalog.num_attributes()) + "/" +
         std::to_string(d.matrix.nnz());
}

HyperGrid shipped_grid(ModelKind kind) {
  fs::path p = fs::path(SETEMB_SOURCE_DIR) / "configs" / (kind == ModelKind::Box ? "grid_box.txt" : "grid_vector.txt");
  std::ifstream in(p);
  if (!in) throw DataError("cannot open " + p.string());
  return parse_grid(in);
}

/// Random search for both model kinds, then orderings of the compositional
/// P@10 cells and the spread of singleton P@1.
void full_reproduction(acceptance::Tally& tally, const Dataset& o, const Dataset& op, const BenchmarkFile& file) {
  Counts want_op{19545, 35169, 195878}, want_o{25878, 218, 83670};
  if (!has_counts(op, want_op) || !has_counts(o, want_o)) {
    tally.line("full reproduction", false, "ingest counts O' " + counts_of(op) + ", O " + counts_of(o));
    return;
  }
  auto bench = bind_benchmark(file, op.catalog);
  auto [val_queries, rest] = split_singletons(bench, 0.2, 1);
  std::vector<ValidationQuery> val;
  for (const auto* bq : val_queries)
    if (bq->query) val.push_back({*bq->query, bq->truth});
  auto vec = random_search(op.matrix, shipped_grid(ModelKind::Vector), val, ModelKind::Vector);
  auto box = random_search(op.matrix, shipped_grid(ModelKind::Box), val, ModelKind::Box);
  const auto& vm = std::get<VectorModel>(vec.best_model);
  const auto& bm = std::get<BoxModel>(box.best_model);

  std::vector<std::unique_ptr<Ranker>> rankers;
  rankers.push_back(std::make_unique<LookupRanker>(op.catalog, op.matrix));
  if (vm.transform() == Transform::Sigmoid)
    rankers.push_back(std::make_unique<VectorRanker>(op.catalog, vm, VectorStrategy::Probabilistic));
  rankers.push_back(std::make_unique<VectorRanker>(op.catalog, vm, VectorStrategy::Algebraic));
  rankers.push_back(std::make_unique<BoxRanker>(op.catalog, bm));
  std::vector<const Ranker*> methods;
  for (const auto& r : rankers) methods.push_back(r.get());
  auto report = evaluate(methods, bench, op.catalog);

  bool ok = true;
  std::string detail;
  for (TaskKind t : {TaskKind::Intersection, TaskKind::Difference, TaskKind::TripleIntersection,
                     TaskKind::TripleDifference}) {
    double b = report.mean(t, "Box", 10);
    for (const auto& r : rankers)
      if (r->name() != "Box" && report.mean(t, r->name(), 10) > b) {
        ok = false;
        detail += std::string(task_name(t)) + ": " + r->name() + " above Box; ";
      }
  }
  double lo = 1, hi = 0;
  for (const auto& r : rankers) {
    double p = report.mean(TaskKind::Singleton, r->name(), 1);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  if (hi - lo > 0.05) ok = false;
  tally.line("full reproduction", ok, detail + fmt("singleton P@1 spread %.3f (max 0.05)", hi - lo));
}

}  // namespace

int main(int argc, char** argv) {
  acceptance::Tally tally;
  fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::path();
  bool full = argc > 2 && std::string(argv[2]) == "--full";
  auto file = [&](const char* name) -> std::optional<fs::path> {
    if (dir.empty()) return std::nullopt;
    fs::path p = dir / name;
    return fs::is_regular_file(p) ? std::optional(p) : std::nullopt;
  };
  auto bench_path = file("benchmark.jsonl");
  auto o_path = file("wikidata.tsv");
  auto op_path = file("movielens.tsv");
  auto hier_path = file("genre_hierarchy.tsv");
  auto missing = [&](const std::string& what) {
    return dir.empty() ? std::string("no data directory configured") : dir.string() + " lacks " + what;
  };

  try {
    std::optional<Dataset> o, op;
    std::optional<BenchmarkFile> released;
    if (o_path) o = read_observations(*o_path, MatrixKind::GroundTruth, hier_path);
    if (op_path) op = read_observations(*op_path, MatrixKind::Noisy);
    if (bench_path) released = read_benchmark_jsonl(*bench_path);

    if (released && o) {
      auto bench = bind_benchmark(*released, o->catalog);
      std::size_t mismatches = attach_rho(bench, o->matrix);
      auto rho = mean_rho(bench);
      const std::map<TaskKind, std::pair<std::size_t, double>> table{
          {TaskKind::Singleton, {218, 1.0}},
          {TaskKind::Intersection, {556, 0.142}},
          {TaskKind::Difference, {149, 0.785}},
          {TaskKind::TripleIntersection, {1604, 0.054}},
          {TaskKind::TripleDifference, {302, 0.277}}};
      bool ok = true;
      std::string detail;
      for (const auto& [task, want] : table) {
        std::size_t n = bench.count(task);
        double r = rho.count(task) ? rho.at(task) : std::nan("");
        ok = ok && n == want.first && std::abs(r - want.second) <= 0.01;
        detail += std::string(task_name(task)) + " " + std::to_string(n) + fmt(" rho %.3f; ", r);
      }
      detail += std::to_string(mismatches) + " truth-list mismatches";
      tally.line("released benchmark statistics", ok, detail);
    } else {
      tally.line("released benchmark statistics", Outcome::NotRun, missing("benchmark.jsonl or wikidata.tsv"));
    }

    if (!(released && o && op))
      tally.line("full reproduction", Outcome::NotRun, missing("benchmark.jsonl, wikidata.tsv or movielens.tsv"));
    else if (!full)
      tally.line("full reproduction", Outcome::NotRun, "long run; pass --full after the data directory");
    else
      full_reproduction(tally, *o, *op, *released);

    if (o && op) {
      auto report = estimate_completeness(*o, *op, 5);
      double c = report.completeness_o;
      tally.line("completeness on real data", c >= 0.5 && c <= 0.7,
                 fmt("O completeness %.3f (want [0.5, 0.7]), O' %.3f", c, report.completeness_o_prime));
    } else {
      tally.line("completeness on real data", Outcome::NotRun, missing("wikidata.tsv or movielens.tsv"));
    }
  } catch (const Error& e) {
    tally.line("data load", false, e.what());
  }

  std::printf("summary: %d pass, %d fail, %d not run\n", tally.pass, tally.fail, tally.not_run);
  if (tally.fail > 0) return 1;
  return tally.pass == 0 ? 77 : 0;
}
