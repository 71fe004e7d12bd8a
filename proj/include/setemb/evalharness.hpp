#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "setemb/benchmark.hpp"
#include "setemb/boxmodel.hpp"
#include "setemb/core.hpp"
#include "setemb/io.hpp"
#include "setemb/ranking.hpp"
#include "setemb/vecmodel.hpp"

namespace setemb {

inline constexpr std::size_t kDefaultKs[] = {1, 10, 20, 50};

/// |top-min(k, len) ∩ truth| / k. `truth` must be sorted. Throws on duplicates in `ranked`.
double precision_at_k(std::span<const Index> ranked, std::span<const Index> truth, std::size_t k);

/// Items with a nonzero entry for every positive literal and none for any
/// negated literal, by descending summed positive weight, ties by index.
std::vector<RankedItem> lookup_rank(const ObservationMatrix& noisy, const Query& q, std::size_t k);

/// A retrieval method scored by the harness.
class Ranker {
 public:
  virtual ~Ranker() = default;
  virtual std::string name() const = 0;
  virtual const EntityCatalog& catalog() const = 0;
  virtual std::vector<Index> rank(const Query& q, std::size_t k) const = 0;
};

class LookupRanker : public Ranker {
 public:
  LookupRanker(const EntityCatalog& catalog, const ObservationMatrix& noisy)
      : catalog_(catalog), noisy_(noisy) {}
  std::string name() const override { return "Attribute Lookup"; }
  const EntityCatalog& catalog() const override { return catalog_; }
  std::vector<Index> rank(const Query& q, std::size_t k) const override;

 private:
  const EntityCatalog& catalog_;
  const ObservationMatrix& noisy_;
};

class VectorRanker : public Ranker {
 public:
  VectorRanker(const EntityCatalog& catalog, const VectorModel& model, VectorStrategy strategy)
      : catalog_(catalog), model_(model), strategy_(strategy) {}
  std::string name() const override;
  const EntityCatalog& catalog() const override { return catalog_; }
  std::vector<Index> rank(const Query& q, std::size_t k) const override;

 private:
  const EntityCatalog& catalog_;
  const VectorModel& model_;
  VectorStrategy strategy_;
};

class BoxRanker : public Ranker {
 public:
  BoxRanker(const EntityCatalog& catalog, const BoxModel& model) : catalog_(catalog), model_(model) {}
  std::string name() const override { return "Box"; }
  const EntityCatalog& catalog() const override { return catalog_; }
  std::vector<Index> rank(const Query& q, std::size_t k) const override;

 private:
  const EntityCatalog& catalog_;
  const BoxModel& model_;
};

/// Seeded split of the singleton queries into (validation, rest).
std::pair<std::vector<const BenchmarkQuery*>, std::vector<const BenchmarkQuery*>> split_singletons(
    const QueryBenchmark& bench, double validation_fraction, std::uint64_t seed);

struct ReportCell {
  TaskKind task;
  std::string method;
  std::size_t k;
  double mean_precision;
  std::size_t num_queries;
};

struct QueryDetail {
  TaskKind task;
  std::string method;
  std::string query;
  std::vector<double> precision;  // one per k
};

struct EvalReport {
  std::vector<std::size_t> ks;
  std::vector<std::string> methods;
  std::vector<ReportCell> cells;
  std::vector<QueryDetail> details;
  std::map<TaskKind, std::size_t> unresolved;

  /// Throws UsageError if absent.
  double mean(TaskKind task, std::string_view method, std::size_t k) const;
};

struct EvalOptions {
  std::vector<std::size_t> ks{std::begin(kDefaultKs), std::end(kDefaultKs)};
  bool details = false;
  std::size_t threads = 1;
};

/// Every method must use `catalog`. Queries that could not be resolved
/// count as empty rankings.
EvalReport evaluate(std::span<const Ranker* const> methods, const QueryBenchmark& bench,
                    const EntityCatalog& catalog, const EvalOptions& options = {});

/// `task<TAB>method<TAB>k<TAB>meanPrecision<TAB>numQueries`.
void write_report_tsv(std::ostream& out, const EvalReport& report);
/// Aligned table, one block per task, precision in percent.
void write_report_text(std::ostream& out, const EvalReport& report);

}  // namespace setemb
