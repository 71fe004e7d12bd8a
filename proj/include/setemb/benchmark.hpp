#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "setemb/core.hpp"
#include "setemb/io.hpp"

namespace setemb {

/// Benchmark queries resolved against one catalog.
struct BenchmarkQuery {
  std::string text;
  TaskKind task = TaskKind::Singleton;
  /// Nullopt when some attribute name is missing from the catalog.
  std::optional<Query> query;
  /// Truth items present in the catalog, sorted.
  ItemSet truth;
  /// Size of the truth list as given in the file.
  std::size_t truth_size = 0;
  /// Filled when the benchmark is built from, or checked against, ground truth.
  std::optional<double> rho;
};

struct QueryBenchmark {
  std::vector<BenchmarkQuery> queries;

  std::vector<const BenchmarkQuery*> task(TaskKind kind) const;
  std::size_t count(TaskKind kind) const;
};

/// Resolves each line against `catalog`. Lines whose shape fits none of the
/// five tasks throw DataError. Unknown names leave `query` empty.
QueryBenchmark bind_benchmark(const BenchmarkFile& file, const EntityCatalog& catalog);

/// Recomputes rho for every query from ground truth (which must share `catalog`)
/// and checks that the file's truth lists match. Returns the number of mismatches.
std::size_t attach_rho(QueryBenchmark& bench, const ObservationMatrix& truth);

/// Mean rho per task over queries with a defined rho.
std::map<TaskKind, double> mean_rho(const QueryBenchmark& bench);

/// Writes queries back to the line format, truth as item ids.
BenchmarkFile to_benchmark_file(const QueryBenchmark& bench, const EntityCatalog& catalog);

// ---------------------------------------------------------------------------
// Generation

/// Relative slack under which a criterion counts as met with equality.
inline constexpr double kTieSlack = 1e-12;

/// Thresholds deciding which compositional queries are interesting.
struct GenCriteria {
  /// Result must be at least this multiple of its size under independence.
  double lift_min = 1.5;
  /// Result must be at most this fraction of the smallest atom.
  double contain_max = 0.8;
  std::size_t min_result = 10;
  /// Defaults to half the number of items.
  std::optional<std::size_t> max_result;

  std::size_t max_result_for(std::size_t num_items) const {
    return max_result.value_or(num_items / 2);
  }
};

/// Throws UsageError unless lift_min > 0, 0 < contain_max < 1, min_result >= 1.
void check_criteria(const GenCriteria& c);

/// counts(a, b) = |I(a) ∩ I(b)|; the diagonal holds |I(a)|.
class CooccurrenceStats {
 public:
  explicit CooccurrenceStats(std::size_t n) : n_(n), counts_(n * n, 0) {}
  std::size_t num_attributes() const { return n_; }
  std::size_t operator()(Index a, Index b) const { return counts_[a * n_ + b]; }
  std::size_t& at(Index a, Index b) { return counts_[a * n_ + b]; }
  std::size_t count(Index a) const { return (*this)(a, a); }

 private:
  std::size_t n_;
  std::vector<std::size_t> counts_;
};

CooccurrenceStats cooccurrence_stats(const ObservationMatrix& truth);

/// Outcome of the three generation tests for one query.
struct CriteriaCheck {
  std::size_t result_size = 0;
  double expected_size = 0.0;
  std::size_t smallest_atom = 0;
  bool meaningful = false;
  bool non_trivial = false;
  bool size_ok = false;

  bool accepted() const { return meaningful && non_trivial && size_ok; }
};

/// Expected size under independence is prod(atom sizes) / m^(k-1), where a
/// negated atom has size m - |I(a)|.
CriteriaCheck check_query_criteria(const Query& q, const ObservationMatrix& truth,
                                   const GenCriteria& criteria);

/// Singletons with |I(a)| >= min_result, then every pair/triple passing
/// the criteria. Triples only extend intersection pairs that passed. Output
/// is grouped by task and ordered lexicographically by attribute index.
QueryBenchmark generate_queries(const ObservationMatrix& truth, const EntityCatalog& catalog,
                                const GenCriteria& criteria);

// ---------------------------------------------------------------------------
// Completeness

struct CompletenessRow {
  std::string attribute;
  std::size_t count_o = 0;
  std::size_t count_o_prime = 0;
  std::size_t overlap = 0;
  double estimated_true = 0.0;
  double completeness_o = 0.0;
  double completeness_o_prime = 0.0;
};

struct CompletenessReport {
  std::vector<CompletenessRow> rows;
  /// Sum of counts over sum of estimated true sizes, included attributes only.
  double completeness_o = 0.0;
  double completeness_o_prime = 0.0;
  std::size_t attributes_total = 0;
  std::size_t attributes_included = 0;
  std::size_t pairs_total = 0;
  std::size_t pairs_included = 0;

  double attribute_coverage() const;
  double pair_coverage() const;
};

/// Capture-recapture estimate of the hidden annotation size per attribute:
/// countO * countO' / overlap. Attributes with overlap < min_overlap are
/// skipped. Both matrices share one catalog.
CompletenessReport estimate_completeness(const ObservationMatrix& truth,
                                         const ObservationMatrix& noisy,
                                         const EntityCatalog& catalog, std::size_t min_overlap = 5);

/// Same, matching attributes and items by name across two catalogs.
CompletenessReport estimate_completeness(const Dataset& truth, const Dataset& noisy,
                                         std::size_t min_overlap = 5);

/// `attribute<TAB>countO<TAB>countOPrime<TAB>overlap<TAB>estTrue<TAB>complO<TAB>complOPrime`.
void write_completeness_tsv(std::ostream& out, const CompletenessReport& report);

}  // namespace setemb
