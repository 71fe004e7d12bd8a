#include "setemb/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "setemb/errors.hpp"

namespace setemb {

double precision_at_k(std::span<const Index> ranked, std::span<const Index> truth, std::size_t k) {
  if (k == 0) throw UsageError("precision@k needs k >= 1");
  const std::size_t top = std::min(k, ranked.size());
  std::vector<Index> seen(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top));
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw UsageError("ranking contains a duplicate item");
  std::size_t hits = 0;
  for (Index i : seen)
    if (std::binary_search(truth.begin(), truth.end(), i)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(k);
}

std::vector<RankedItem> lookup_rank(const ObservationMatrix& noisy, const Query& q, std::size_t k) {
  check_query_range(q, noisy.num_attributes());
  auto positives = q.positives();
  auto negatives = q.negatives();
  // Start from the shortest positive column and filter the rest by point lookups.
  auto seed = *std::min_element(positives.begin(), positives.end(), [&](Index a, Index b) {
    return noisy.items_with(a).size() < noisy.items_with(b).size();
  });
  std::vector<RankedItem> hits;
  for (Index i : noisy.items_with(seed)) {
    double total = 0.0;
    bool keep = true;
    for (Index a : positives) {
      double w = noisy.weight(i, a);
      if (w == 0.0) {
        keep = false;
        break;
      }
      total += w;
    }
    for (Index a : negatives)
      if (keep && noisy.weight(i, a) != 0.0) keep = false;
    if (keep) hits.push_back({i, total});
  }
  return top_k(std::move(hits), k);
}

std::vector<Index> LookupRanker::rank(const Query& q, std::size_t k) const {
  auto r = lookup_rank(noisy_, q, k);
  return item_ids(r);
}

std::string VectorRanker::name() const {
  return strategy_ == VectorStrategy::Probabilistic ? "Vector (Probabilistic)" : "Vector (Algebraic)";
}

std::vector<Index> VectorRanker::rank(const Query& q, std::size_t k) const {
  auto r = rank_items_vec(model_, q, strategy_, std::min(k, model_.num_items()));
  return item_ids(r);
}

std::vector<Index> BoxRanker::rank(const Query& q, std::size_t k) const {
  auto r = rank_items_box(model_, q, std::min(k, model_.num_items()));
  return item_ids(r);
}

std::pair<std::vector<const BenchmarkQuery*>, std::vector<const BenchmarkQuery*>> split_singletons(
    const QueryBenchmark& bench, double validation_fraction, std::uint64_t seed) {
  if (!(validation_fraction > 0.0 && validation_fraction <= 1.0))
    throw UsageError("validation fraction must lie in (0, 1]");
  auto singles = bench.task(TaskKind::Singleton);
  std::mt19937_64 rng(seed);
  std::shuffle(singles.begin(), singles.end(), rng);
  auto n_val = static_cast<std::size_t>(
      std::ceil(validation_fraction * static_cast<double>(singles.size())));
  std::vector<const BenchmarkQuery*> val(singles.begin(), singles.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<const BenchmarkQuery*> rest(singles.begin() + static_cast<std::ptrdiff_t>(n_val), singles.end());
  auto by_position = [&](const BenchmarkQuery* a, const BenchmarkQuery* b) { return a < b; };
  std::sort(val.begin(), val.end(), by_position);
  std::sort(rest.begin(), rest.end(), by_position);
  return {std::move(val), std::move(rest)};
}

double EvalReport::mean(TaskKind task, std::string_view method, std::size_t k) const {
  for (const auto& c : cells)
    if (c.task == task && c.method == method && c.k == k) return c.mean_precision;
  throw UsageError("no report cell for " + std::string(task_name(task)) + "/" + std::string(method) + "@" +
                   std::to_string(k));
}

EvalReport evaluate(std::span<const Ranker* const> methods, const QueryBenchmark& bench,
                    const EntityCatalog& catalog, const EvalOptions& options) {
  if (options.ks.empty()) throw UsageError("evaluation needs at least one k");
  for (auto k : options.ks)
    if (k == 0) throw UsageError("k must be at least 1");
  for (const auto* m : methods)
    if (!(m->catalog() == catalog)) throw UsageError("method '" + m->name() + "' uses a different catalog");
  const std::size_t kmax = *std::max_element(options.ks.begin(), options.ks.end());

  EvalReport report;
  report.ks = options.ks;
  for (const auto* m : methods) report.methods.push_back(m->name());
  for (const auto& bq : bench.queries)
    if (!bq.query) ++report.unresolved[bq.task];

  // precision[method][query][k]
  const std::size_t nq = bench.queries.size();
  const std::size_t nk = options.ks.size();
  std::vector<std::vector<double>> precision(methods.size(), std::vector<double>(nq * nk, 0.0));
  auto work = [&](std::size_t mi, std::size_t begin, std::size_t end) {
    for (std::size_t qi = begin; qi < end; ++qi) {
      const auto& bq = bench.queries[qi];
      if (!bq.query) continue;
      auto ranked = methods[mi]->rank(*bq.query, kmax);
      for (std::size_t ki = 0; ki < nk; ++ki)
        precision[mi][qi * nk + ki] = precision_at_k(ranked, bq.truth, options.ks[ki]);
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, options.threads);
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    if (threads == 1 || nq < 2) {
      work(mi, 0, nq);
      continue;
    }
    std::vector<std::thread> pool;
    const std::size_t step = (nq + threads - 1) / threads;
    for (std::size_t b = 0; b < nq; b += step) pool.emplace_back(work, mi, b, std::min(nq, b + step));
    for (auto& t : pool) t.join();
  }

  for (TaskKind task : kAllTasks) {
    std::vector<std::size_t> idx;
    for (std::size_t qi = 0; qi < nq; ++qi)
      if (bench.queries[qi].task == task) idx.push_back(qi);
    if (idx.empty()) continue;
    for (std::size_t mi = 0; mi < methods.size(); ++mi)
      for (std::size_t ki = 0; ki < nk; ++ki) {
        double sum = 0.0;
        for (auto qi : idx) sum += precision[mi][qi * nk + ki];
        report.cells.push_back(
            {task, report.methods[mi], options.ks[ki], sum / static_cast<double>(idx.size()), idx.size()});
      }
    if (options.details)
      for (std::size_t mi = 0; mi < methods.size(); ++mi)
        for (auto qi : idx) {
          QueryDetail d{task, report.methods[mi], bench.queries[qi].text, {}};
          for (std::size_t ki = 0; ki < nk; ++ki) d.precision.push_back(precision[mi][qi * nk + ki]);
          report.details.push_back(std::move(d));
        }
  }
  return report;
}

void write_report_tsv(std::ostream& out, const EvalReport& report) {
  out << "task\tmethod\tk\tmeanPrecision\tnumQueries\n";
  for (const auto& c : report.cells)
    out << task_name(c.task) << '\t' << c.method << '\t' << c.k << '\t' << format_double(c.mean_precision) << '\t'
        << c.num_queries << '\n';
}

void write_report_text(std::ostream& out, const EvalReport& report) {
  std::size_t width = 6;
  for (const auto& m : report.methods) width = std::max(width, m.size());
  for (TaskKind task : kAllTasks) {
    bool any = std::any_of(report.cells.begin(), report.cells.end(), [&](const ReportCell& c) { return c.task == task; });
    if (!any) continue;
    std::size_t n = 0;
    for (const auto& c : report.cells)
      if (c.task == task) n = c.num_queries;
    out << task_name(task) << " (" << n << " queries)\n";
    out << "  " << std::left << std::setw(static_cast<int>(width)) << "method";
    for (auto k : report.ks) out << std::right << std::setw(9) << ("P@" + std::to_string(k));
    out << '\n';
    for (const auto& m : report.methods) {
      out << "  " << std::left << std::setw(static_cast<int>(width)) << m;
      for (auto k : report.ks) {
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(2) << 100.0 * report.mean(task, m, k);
        out << std::right << std::setw(9) << cell.str();
      }
      out << '\n';
    }
    if (auto it = report.unresolved.find(task); it != report.unresolved.end())
      out << "  (" << it->second << " queries with unknown attributes scored as 0)\n";
    out << '\n';
  }
}

}  // namespace setemb
