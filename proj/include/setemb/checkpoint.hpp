#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <variant>

#include "setemb/boxmodel.hpp"
#include "setemb/core.hpp"
#include "setemb/vecmodel.hpp"

namespace setemb {

/// Encoding of the parameter blocks that follow the checkpoint header.
enum class NumberFormat { Text, Binary };

std::string_view number_format_name(NumberFormat f);
NumberFormat parse_number_format(std::string_view name);

/// A trained model together with the catalog it indexes.
struct Checkpoint {
  EntityCatalog catalog;
  std::variant<VectorModel, BoxModel> model;

  bool is_box() const { return std::holds_alternative<BoxModel>(model); }
  const VectorModel& vector() const { return std::get<VectorModel>(model); }
  const BoxModel& box() const { return std::get<BoxModel>(model); }
};

/// Layout: one JSON header line {format, version, model_kind, d, m, n,
/// transform | beta+tau, catalog_hash, encoding, items, attributes}, then the
/// item table followed by the attribute table. Text encoding writes one row
/// per line as shortest round-trip decimals; binary writes little-endian
/// 64-bit floats.
void write_checkpoint(std::ostream& out, const EntityCatalog& catalog, const VectorModel& model,
                      NumberFormat format);
void write_checkpoint(std::ostream& out, const EntityCatalog& catalog, const BoxModel& model,
                      NumberFormat format);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt, NumberFormat format);

Checkpoint read_checkpoint(std::istream& in);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace setemb
