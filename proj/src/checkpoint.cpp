#include "setemb/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "setemb/errors.hpp"
#include "setemb/hash.hpp"
#include "setemb/io.hpp"

namespace setemb {

namespace {

using nlohmann::json;

static_assert(sizeof(double) == 8);

void write_table(std::ostream& out, const ParamTable& table, NumberFormat format) {
  if (format == NumberFormat::Text) {
    for (std::size_t r = 0; r < table.rows(); ++r) {
      auto row = table.row(r);
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (k) out << ' ';
        out << format_double(row[k]);
      }
      out << '\n';
    }
    return;
  }
  for (double v : table.data()) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    out.write(bytes, 8);
  }
}

ParamTable read_table(std::istream& in, std::size_t rows, std::size_t width, NumberFormat format) {
  std::vector<double> data(rows * width);
  if (format == NumberFormat::Text) {
    std::string line;
    for (std::size_t r = 0; r < rows; ++r) {
      if (!std::getline(in, line)) throw DataError("checkpoint truncated");
      std::size_t pos = 0;
      for (std::size_t k = 0; k < width; ++k) {
        std::size_t end = line.find(' ', pos);
        std::string_view tok(line.data() + pos,
                             (end == std::string::npos ? line.size() : end) - pos);
        data[r * width + k] = parse_double(tok);
        pos = end == std::string::npos ? line.size() : end + 1;
      }
      if (pos < line.size()) throw DataError("checkpoint row has extra values");
    }
  } else {
    char bytes[8];
    for (double& v : data) {
      if (!in.read(bytes, 8)) throw DataError("checkpoint truncated");
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= std::uint64_t(static_cast<unsigned char>(bytes[b])) << (8 * b);
      v = std::bit_cast<double>(bits);
    }
  }
  return ParamTable(rows, width, std::move(data));
}

json base_header(const EntityCatalog& catalog, std::string_view kind, std::size_t d,
                 std::size_t m, std::size_t n, NumberFormat format) {
  if (catalog.num_items() != m || catalog.num_attributes() != n)
    throw UsageError("model shape does not match catalog");
  return json{{"format", "setemb-checkpoint"},
              {"version", 1},
              {"model_kind", kind},
              {"d", d},
              {"m", m},
              {"n", n},
              {"catalog_hash", hex64(catalog.hash())},
              {"encoding", number_format_name(format)},
              {"items", catalog.items()},
              {"attributes", catalog.attributes()}};
}

}  // namespace

std::string_view number_format_name(NumberFormat f) { return f == NumberFormat::Text ? "text" : "binary"; }

NumberFormat parse_number_format(std::string_view name) {
  if (name == "text") return NumberFormat::Text;
  if (name == "binary") return NumberFormat::Binary;
  throw UsageError("unknown number format '" + std::string(name) + "'");
}

void write_checkpoint(std::ostream& out, const EntityCatalog& catalog, const VectorModel& model,
                      NumberFormat format) {
  json h = base_header(catalog, "vector", model.dim(), model.num_items(), model.num_attributes(), format);
  h["transform"] = transform_name(model.transform());
  out << h.dump() << '\n';
  write_table(out, model.item_table(), format);
  write_table(out, model.attribute_table(), format);
  if (!out) throw DataError("failed writing checkpoint");
}

void write_checkpoint(std::ostream& out, const EntityCatalog& catalog, const BoxModel& model,
                      NumberFormat format) {
  json h = base_header(catalog, "box", model.dim(), model.num_items(), model.num_attributes(), format);
  h["beta"] = model.temps().beta;
  h["tau"] = model.temps().tau;
  out << h.dump() << '\n';
  write_table(out, model.item_table(), format);
  write_table(out, model.attribute_table(), format);
  if (!out) throw DataError("failed writing checkpoint");
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt, NumberFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  std::visit([&](const auto& m) { write_checkpoint(out, ckpt.catalog, m, format); }, ckpt.model);
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("checkpoint is empty");
  json h;
  try {
    h = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("bad checkpoint header: ") + e.what());
  }
  if (h.value("format", "") != "setemb-checkpoint") throw DataError("not a checkpoint file");
  try {
    EntityCatalog catalog(h.at("items").get<std::vector<std::string>>(),
                          h.at("attributes").get<std::vector<std::string>>());
    if (hex64(catalog.hash()) != h.at("catalog_hash").get<std::string>())
      throw DataError("checkpoint catalog hash mismatch");
    auto d = h.at("d").get<std::size_t>();
    auto m = h.at("m").get<std::size_t>();
    auto n = h.at("n").get<std::size_t>();
    if (m != catalog.num_items() || n != catalog.num_attributes())
      throw DataError("checkpoint shape does not match its catalog");
    auto format = parse_number_format(h.at("encoding").get<std::string>());
    auto kind = h.at("model_kind").get<std::string>();
    if (kind == "vector") {
      auto items = read_table(in, m, d, format);
      auto attrs = read_table(in, n, d, format);
      VectorModel model(std::move(items), std::move(attrs),
                        parse_transform(h.at("transform").get<std::string>()));
      return Checkpoint{std::move(catalog), std::move(model)};
    }
    if (kind == "box") {
      auto items = read_table(in, m, 2 * d, format);
      auto attrs = read_table(in, n, 2 * d, format);
      GumbelParams temps{h.at("beta").get<double>(), h.at("tau").get<double>()};
      return Checkpoint{std::move(catalog), BoxModel(std::move(items), std::move(attrs), temps)};
    }
    throw DataError("unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw DataError(std::string("bad checkpoint header: ") + e.what());
  }
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace setemb
