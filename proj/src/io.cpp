#include "setemb/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "setemb/errors.hpp"

namespace setemb {

namespace {

using nlohmann::json;

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::string where(std::string_view source, std::size_t line_no) {
  return std::string(source) + " line " + std::to_string(line_no);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::string_view kind_name(MatrixKind k) { return k == MatrixKind::GroundTruth ? "ground_truth" : "noisy"; }

MatrixKind parse_kind(std::string_view s) {
  if (s == "ground_truth") return MatrixKind::GroundTruth;
  if (s == "noisy") return MatrixKind::Noisy;
  throw DataError("unknown matrix kind '" + std::string(s) + "'");
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw DataError("not a number: '" + std::string(text) + "'");
  return v;
}

Dataset read_observations(std::istream& observations, MatrixKind kind, std::istream* hierarchy,
                          IngestStats* stats) {
  EntityCatalog catalog;
  std::vector<Entry> entries;
  IngestStats local;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(observations, line)) {
    ++line_no;
    std::string_view text = chomp(line);
    if (text.empty()) continue;
    auto fields = split_tabs(text);
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty())
      throw DataError("malformed observation at " + where("observations", line_no));
    double w = 1.0;
    if (fields.size() == 3) {
      try {
        w = parse_double(fields[2]);
      } catch (const DataError&) {
        throw DataError("malformed weight at " + where("observations", line_no));
      }
      if (!std::isfinite(w) || w < 0)
        throw DataError("weight must be non-negative at " + where("observations", line_no));
    }
    Index i = catalog.intern_item(fields[0]);
    Index a = catalog.intern_attribute(fields[1]);
    entries.push_back({i, a, w});
    ++local.lines;
  }
  if (local.lines == 0) throw DataError("observation file is empty");

  std::vector<std::pair<Index, Index>> edges;
  if (hierarchy != nullptr) {
    line_no = 0;
    while (std::getline(*hierarchy, line)) {
      ++line_no;
      std::string_view text = chomp(line);
      if (text.empty()) continue;
      auto fields = split_tabs(text);
      if (fields.size() != 2 || fields[0].empty() || fields[1].empty())
        throw DataError("malformed edge at " + where("hierarchy", line_no));
      edges.emplace_back(catalog.intern_attribute(fields[0]), catalog.intern_attribute(fields[1]));
    }
    local.hierarchy_edges = edges.size();
  }

  ObservationMatrix matrix(kind, catalog.num_items(), catalog.num_attributes(), std::move(entries));
  local.duplicate_pairs = matrix.duplicates_merged();
  if (!edges.empty()) {
    if (kind != MatrixKind::GroundTruth) throw UsageError("hierarchy expansion needs ground truth");
    HierarchyEdges h(std::move(edges), catalog.num_attributes());
    matrix = expand_with_hierarchy(matrix, h);
  }
  if (stats) *stats = local;
  return Dataset{std::move(catalog), std::move(matrix)};
}

Dataset read_observations(const std::filesystem::path& observations, MatrixKind kind,
                          const std::optional<std::filesystem::path>& hierarchy,
                          IngestStats* stats) {
  auto in = open_in(observations);
  if (hierarchy) {
    auto h = open_in(*hierarchy);
    return read_observations(in, kind, &h, stats);
  }
  return read_observations(in, kind, nullptr, stats);
}

void write_dataset(std::ostream& out, const Dataset& data) {
  json header = {{"format", "setemb-dataset"},
                 {"version", 1},
                 {"kind", kind_name(data.matrix.kind())},
                 {"nnz", data.matrix.nnz()},
                 {"items", data.catalog.items()},
                 {"attributes", data.catalog.attributes()}};
  out << header.dump() << '\n';
  for (const auto& e : data.matrix.entries())
    out << e.item << '\t' << e.attribute << '\t' << format_double(e.weight) << '\n';
  if (!out) throw DataError("failed writing dataset");
}

Dataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("dataset file is empty");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("bad dataset header: ") + e.what());
  }
  if (header.value("format", "") != "setemb-dataset") throw DataError("not a dataset file");
  EntityCatalog catalog(header.at("items").get<std::vector<std::string>>(),
                        header.at("attributes").get<std::vector<std::string>>());
  MatrixKind kind = parse_kind(header.at("kind").get<std::string>());
  std::vector<Entry> entries;
  entries.reserve(header.value("nnz", std::size_t{0}));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = chomp(line);
    if (text.empty()) continue;
    auto fields = split_tabs(text);
    if (fields.size() != 3) throw DataError("malformed entry at " + where("dataset", line_no));
    Index i = 0, a = 0;
    auto r1 = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), i);
    auto r2 = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), a);
    if (r1.ec != std::errc() || r2.ec != std::errc())
      throw DataError("malformed entry at " + where("dataset", line_no));
    entries.push_back({i, a, parse_double(fields[2])});
  }
  ObservationMatrix matrix(kind, catalog.num_items(), catalog.num_attributes(), std::move(entries));
  return Dataset{std::move(catalog), std::move(matrix)};
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  auto out = open_out(path);
  write_dataset(out, data);
}

Dataset read_dataset(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_dataset(in);
}

BenchmarkFile read_benchmark_jsonl(std::istream& in) {
  BenchmarkFile file;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = chomp(line);
    if (text.find_first_not_of(" \t") == std::string_view::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::exception&) {
      throw DataError("malformed JSON at " + where("benchmark", line_no));
    }
    if (obj.contains("header")) {
      file.header = obj.at("header");
      continue;
    }
    if (!obj.contains("query") || !obj.contains("items") || !obj.at("query").is_string() ||
        !obj.at("items").is_array())
      throw DataError("benchmark record needs 'query' and 'items' at " + where("benchmark", line_no));
    BenchmarkLine rec;
    rec.query = obj.at("query").get<std::string>();
    for (const auto& item : obj.at("items")) {
      if (item.is_string())
        rec.items.push_back(item.get<std::string>());
      else if (item.is_number_integer())
        rec.items.push_back(std::to_string(item.get<long long>()));
      else
        throw DataError("item ids must be strings at " + where("benchmark", line_no));
    }
    file.lines.push_back(std::move(rec));
  }
  return file;
}

BenchmarkFile read_benchmark_jsonl(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_benchmark_jsonl(in);
}

void write_benchmark_jsonl(std::ostream& out, const BenchmarkFile& file) {
  if (file.header) out << json{{"header", *file.header}}.dump() << '\n';
  for (const auto& rec : file.lines) out << json{{"query", rec.query}, {"items", rec.items}}.dump() << '\n';
  if (!out) throw DataError("failed writing benchmark");
}

}  // namespace setemb
