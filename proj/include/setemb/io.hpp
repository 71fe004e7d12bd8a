#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "setemb/core.hpp"

namespace setemb {

struct Dataset {
  EntityCatalog catalog;
  ObservationMatrix matrix;
};

struct IngestStats {
  std::size_t lines = 0;
  std::size_t duplicate_pairs = 0;
  std::size_t hierarchy_edges = 0;
};

/// Reads `item<TAB>attribute[<TAB>weight]` lines (weight defaults to 1).
/// Blank lines are skipped; malformed lines throw DataError naming the line.
/// When a hierarchy stream is given, its `child<TAB>parent` lines are
/// interned into the catalog and the ground truth is expanded through it.
Dataset read_observations(std::istream& observations, MatrixKind kind,
                          std::istream* hierarchy = nullptr, IngestStats* stats = nullptr);
Dataset read_observations(const std::filesystem::path& observations, MatrixKind kind,
                          const std::optional<std::filesystem::path>& hierarchy = {},
                          IngestStats* stats = nullptr);

/// Internal dataset format: one JSON header line with the catalog, then
/// `item_index<TAB>attribute_index<TAB>weight` lines.
void write_dataset(std::ostream& out, const Dataset& data);
Dataset read_dataset(std::istream& in);
void write_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset(const std::filesystem::path& path);

/// One line of a query benchmark file.
struct BenchmarkLine {
  std::string query;
  std::vector<std::string> items;
};

struct BenchmarkFile {
  /// Optional generator header (criteria, source hashes).
  std::optional<nlohmann::json> header;
  std::vector<BenchmarkLine> lines;
};

BenchmarkFile read_benchmark_jsonl(std::istream& in);
BenchmarkFile read_benchmark_jsonl(const std::filesystem::path& path);
void write_benchmark_jsonl(std::ostream& out, const BenchmarkFile& file);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double x);
double parse_double(std::string_view text);

}  // namespace setemb
