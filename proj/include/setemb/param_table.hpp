#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "setemb/errors.hpp"

namespace setemb {

/// Dense row-major table of model parameters, one row per entity.
class ParamTable {
 public:
  ParamTable() = default;
  ParamTable(std::size_t rows, std::size_t width) : rows_(rows), width_(width), data_(rows * width, 0.0) {}
  ParamTable(std::size_t rows, std::size_t width, std::vector<double> data)
      : rows_(rows), width_(width), data_(std::move(data)) {
    if (data_.size() != rows_ * width_) throw UsageError("parameter table size mismatch");
  }

  std::size_t rows() const { return rows_; }
  std::size_t width() const { return width_; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * width_, width_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * width_, width_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const ParamTable&, const ParamTable&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

}  // namespace setemb
