#include "setemb/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "setemb/errors.hpp"

namespace setemb {

// ---------------------------------------------------------------------------
// Benchmark files

std::vector<const BenchmarkQuery*> QueryBenchmark::task(TaskKind kind) const {
  std::vector<const BenchmarkQuery*> out;
  for (const auto& q : queries)
    if (q.task == kind) out.push_back(&q);
  return out;
}

std::size_t QueryBenchmark::count(TaskKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(queries.begin(), queries.end(), [&](const BenchmarkQuery& q) { return q.task == kind; }));
}

namespace {

/// Task from the literal signs alone, without resolving names.
TaskKind shape_of(const std::string& text) {
  std::size_t pos = 0, neg = 0;
  std::size_t start = 0;
  while (true) {
    auto amp = text.find('&', start);
    auto tok = text.substr(start, amp == std::string::npos ? std::string::npos : amp - start);
    auto first = tok.find_first_not_of(" \t");
    if (first == std::string::npos) throw DataError("empty literal in benchmark query '" + text + "'");
    (tok[first] == '!' ? neg : pos)++;
    if (amp == std::string::npos) break;
    start = amp + 1;
  }
  if (pos == 0) throw DataError("benchmark query without a positive literal: '" + text + "'");
  std::vector<Literal> lits;
  for (std::size_t j = 0; j < pos; ++j) lits.push_back({static_cast<Index>(j), false});
  for (std::size_t j = 0; j < neg; ++j) lits.push_back({static_cast<Index>(pos + j), true});
  auto kind = classify(Query(std::move(lits)));
  if (!kind) throw DataError("benchmark query fits no task: '" + text + "'");
  return *kind;
}

}  // namespace

QueryBenchmark bind_benchmark(const BenchmarkFile& file, const EntityCatalog& catalog) {
  QueryBenchmark bench;
  bench.queries.reserve(file.lines.size());
  for (const auto& line : file.lines) {
    BenchmarkQuery bq;
    bq.text = line.query;
    bq.task = shape_of(line.query);
    try {
      bq.query = parse_query(line.query, catalog);
    } catch (const QueryError&) {
      bq.query.reset();
    }
    for (const auto& id : line.items)
      if (auto i = catalog.find_item(id)) bq.truth.push_back(*i);
    std::sort(bq.truth.begin(), bq.truth.end());
    bq.truth.erase(std::unique(bq.truth.begin(), bq.truth.end()), bq.truth.end());
    bq.truth_size = line.items.size();
    bench.queries.push_back(std::move(bq));
  }
  return bench;
}

std::size_t attach_rho(QueryBenchmark& bench, const ObservationMatrix& truth) {
  if (truth.kind() != MatrixKind::GroundTruth) throw UsageError("rho needs a ground-truth matrix");
  std::size_t mismatches = 0;
  for (auto& bq : bench.queries) {
    if (!bq.query) {
      ++mismatches;
      continue;
    }
    if (ground_truth_match(*bq.query, truth) != bq.truth || bq.truth.size() != bq.truth_size) ++mismatches;
    try {
      bq.rho = rho(*bq.query, truth);
    } catch (const DataError&) {
      bq.rho.reset();
    }
  }
  return mismatches;
}

std::map<TaskKind, double> mean_rho(const QueryBenchmark& bench) {
  std::map<TaskKind, double> sum;
  std::map<TaskKind, std::size_t> n;
  for (const auto& bq : bench.queries) {
    if (!bq.rho) continue;
    sum[bq.task] += *bq.rho;
    ++n[bq.task];
  }
  for (auto& [task, s] : sum) s /= static_cast<double>(n[task]);
  return sum;
}

BenchmarkFile to_benchmark_file(const QueryBenchmark& bench, const EntityCatalog& catalog) {
  BenchmarkFile file;
  for (const auto& bq : bench.queries) {
    BenchmarkLine line;
    line.query = bq.query ? format_query(*bq.query, catalog) : bq.text;
    for (Index i : bq.truth) line.items.push_back(catalog.item(i));
    file.lines.push_back(std::move(line));
  }
  return file;
}

// ---------------------------------------------------------------------------
// Generation

void check_criteria(const GenCriteria& c) {
  if (!(c.lift_min > 0)) throw UsageError("lift_min must be positive");
  if (!(c.contain_max > 0 && c.contain_max < 1)) throw UsageError("contain_max must lie in (0, 1)");
  if (c.min_result < 1) throw UsageError("min_result must be at least 1");
  if (c.max_result && *c.max_result < c.min_result) throw UsageError("max_result below min_result");
}

CooccurrenceStats cooccurrence_stats(const ObservationMatrix& truth) {
  const std::size_t n = truth.num_attributes();
  CooccurrenceStats stats(n);
  for (Index i = 0; i < truth.num_items(); ++i) {
    auto row = truth.row(i);
    for (std::size_t x = 0; x < row.size(); ++x)
      for (std::size_t y = 0; y < row.size(); ++y) ++stats.at(row[x].attribute, row[y].attribute);
  }
  return stats;
}

CriteriaCheck check_query_criteria(const Query& q, const ObservationMatrix& truth,
                                   const GenCriteria& criteria) {
  const double m = static_cast<double>(truth.num_items());
  CriteriaCheck out;
  out.result_size = ground_truth_match(q, truth).size();
  out.smallest_atom = truth.num_items();
  double atoms = 1.0;  // product of atom sizes; exact below 2^53
  for (const auto& l : q.literals()) {
    std::size_t size = truth.items_with(l.attribute).size();
    if (l.negated) size = truth.num_items() - size;
    out.smallest_atom = std::min(out.smallest_atom, size);
    atoms *= static_cast<double>(size);
  }
  const double scale = std::pow(m, static_cast<double>(q.size() - 1));
  out.expected_size = atoms / scale;
  const double r = static_cast<double>(out.result_size);
  // Thresholds are inclusive. Comparing r * m^(k-1) with lift * prod(sizes)
  // rounds once; the slack keeps decimal ties such as 1.1 * 1200 = 1320 inside.
  out.meaningful = r * scale >= criteria.lift_min * atoms * (1.0 - kTieSlack);
  out.non_trivial = r <= criteria.contain_max * static_cast<double>(out.smallest_atom) * (1.0 + kTieSlack);
  out.size_ok = out.result_size >= criteria.min_result &&
                out.result_size <= criteria.max_result_for(truth.num_items());
  return out;
}

QueryBenchmark generate_queries(const ObservationMatrix& truth, const EntityCatalog& catalog,
                                const GenCriteria& criteria) {
  check_criteria(criteria);
  if (truth.kind() != MatrixKind::GroundTruth) throw UsageError("generation needs a ground-truth matrix");
  if (catalog.num_attributes() != truth.num_attributes() || catalog.num_items() != truth.num_items())
    throw UsageError("catalog does not match the ground-truth matrix");
  const auto n = static_cast<Index>(truth.num_attributes());

  QueryBenchmark bench;
  auto emit = [&](Query q, TaskKind task) {
    BenchmarkQuery bq;
    bq.text = format_query(q, catalog);
    bq.task = task;
    bq.truth = ground_truth_match(q, truth);
    bq.truth_size = bq.truth.size();
    bq.rho = rho(q, truth);
    bq.query = std::move(q);
    bench.queries.push_back(std::move(bq));
  };
  auto accepted = [&](const Query& q) { return check_query_criteria(q, truth, criteria).accepted(); };

  for (Index a = 0; a < n; ++a)
    if (truth.items_with(a).size() >= criteria.min_result) emit(Query::single(a), TaskKind::Singleton);

  // Pairs a < b that pass as intersections seed the triples.
  std::vector<std::pair<Index, Index>> pairs;
  for (Index a = 0; a < n; ++a)
    for (Index b = a + 1; b < n; ++b) {
      Query q({{a, false}, {b, false}});
      if (accepted(q)) {
        pairs.emplace_back(a, b);
        emit(std::move(q), TaskKind::Intersection);
      }
    }
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b) {
      if (a == b) continue;
      Query q({{a, false}, {b, true}});
      if (accepted(q)) emit(std::move(q), TaskKind::Difference);
    }
  for (auto [a, b] : pairs)
    for (Index c = b + 1; c < n; ++c) {
      Query q({{a, false}, {b, false}, {c, false}});
      if (accepted(q)) emit(std::move(q), TaskKind::TripleIntersection);
    }
  for (auto [a, b] : pairs)
    for (Index c = 0; c < n; ++c) {
      if (c == a || c == b) continue;
      Query q({{a, false}, {b, false}, {c, true}});
      if (accepted(q)) emit(std::move(q), TaskKind::TripleDifference);
    }
  return bench;
}

// ---------------------------------------------------------------------------
// Completeness

double CompletenessReport::attribute_coverage() const {
  return attributes_total ? static_cast<double>(attributes_included) / static_cast<double>(attributes_total) : 0.0;
}

double CompletenessReport::pair_coverage() const {
  return pairs_total ? static_cast<double>(pairs_included) / static_cast<double>(pairs_total) : 0.0;
}

namespace {

/// Shared estimator over per-attribute column sets already mapped into one item space.
struct ColumnPair {
  std::string attribute;
  std::vector<Index> truth_items;  // sorted
  std::vector<Index> noisy_items;  // sorted; empty if the attribute is absent from O'
};

CompletenessReport estimate(const std::vector<ColumnPair>& columns, std::size_t min_overlap) {
  CompletenessReport report;
  double sum_o = 0.0, sum_o_prime = 0.0, sum_true = 0.0;
  for (const auto& col : columns) {
    ++report.attributes_total;
    report.pairs_total += col.truth_items.size();
    std::vector<Index> both;
    std::set_intersection(col.truth_items.begin(), col.truth_items.end(), col.noisy_items.begin(),
                          col.noisy_items.end(), std::back_inserter(both));
    if (both.empty() || both.size() < min_overlap) continue;
    CompletenessRow row;
    row.attribute = col.attribute;
    row.count_o = col.truth_items.size();
    row.count_o_prime = col.noisy_items.size();
    row.overlap = both.size();
    row.estimated_true = static_cast<double>(row.count_o) * static_cast<double>(row.count_o_prime) /
                         static_cast<double>(row.overlap);
    row.completeness_o = static_cast<double>(row.count_o) / row.estimated_true;
    row.completeness_o_prime = static_cast<double>(row.count_o_prime) / row.estimated_true;
    sum_o += static_cast<double>(row.count_o);
    sum_o_prime += static_cast<double>(row.count_o_prime);
    sum_true += row.estimated_true;
    ++report.attributes_included;
    report.pairs_included += row.count_o;
    report.rows.push_back(std::move(row));
  }
  if (sum_true > 0) {
    report.completeness_o = sum_o / sum_true;
    report.completeness_o_prime = sum_o_prime / sum_true;
  }
  return report;
}

}  // namespace

CompletenessReport estimate_completeness(const ObservationMatrix& truth, const ObservationMatrix& noisy,
                                         const EntityCatalog& catalog, std::size_t min_overlap) {
  if (truth.num_items() != noisy.num_items() || truth.num_attributes() != noisy.num_attributes() ||
      catalog.num_attributes() != truth.num_attributes())
    throw UsageError("completeness matrices must share a catalog");
  std::vector<ColumnPair> columns;
  for (Index a = 0; a < truth.num_attributes(); ++a) {
    auto t = truth.items_with(a);
    if (t.empty()) continue;
    auto o = noisy.items_with(a);
    columns.push_back({catalog.attribute(a), {t.begin(), t.end()}, {o.begin(), o.end()}});
  }
  return estimate(columns, min_overlap);
}

CompletenessReport estimate_completeness(const Dataset& truth, const Dataset& noisy, std::size_t min_overlap) {
  // Map the noisy catalog's items into the truth catalog's item space; items
  // unknown to the truth catalog get fresh indices past its end.
  std::vector<Index> item_map(noisy.catalog.num_items());
  Index next = static_cast<Index>(truth.catalog.num_items());
  for (Index i = 0; i < item_map.size(); ++i) {
    auto t = truth.catalog.find_item(noisy.catalog.item(i));
    item_map[i] = t ? *t : next++;
  }
  std::vector<ColumnPair> columns;
  for (Index a = 0; a < truth.matrix.num_attributes(); ++a) {
    auto t = truth.matrix.items_with(a);
    if (t.empty()) continue;
    ColumnPair col{truth.catalog.attribute(a), {t.begin(), t.end()}, {}};
    if (auto b = noisy.catalog.find_attribute(col.attribute)) {
      for (Index i : noisy.matrix.items_with(*b)) col.noisy_items.push_back(item_map[i]);
      std::sort(col.noisy_items.begin(), col.noisy_items.end());
    }
    columns.push_back(std::move(col));
  }
  return estimate(columns, min_overlap);
}

void write_completeness_tsv(std::ostream& out, const CompletenessReport& report) {
  out << "attribute\tcountO\tcountOPrime\toverlap\testTrue\tcomplO\tcomplOPrime\n";
  for (const auto& r : report.rows)
    out << r.attribute << '\t' << r.count_o << '\t' << r.count_o_prime << '\t' << r.overlap << '\t'
        << format_double(r.estimated_true) << '\t' << format_double(r.completeness_o) << '\t'
        << format_double(r.completeness_o_prime) << '\n';
}

}  // namespace setemb
