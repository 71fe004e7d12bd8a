#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "setemb/core.hpp"
#include "setemb/param_table.hpp"
#include "setemb/ranking.hpp"

namespace setemb {

/// Function applied to the item/attribute dot product.
enum class Transform { Identity, Sigmoid };

std::string_view transform_name(Transform t);
Transform parse_transform(std::string_view name);

double apply_transform(Transform t, double x);

/// Matrix-factorization embedding: one d-vector per item and per attribute.
class VectorModel {
 public:
  VectorModel() = default;
  VectorModel(std::size_t num_items, std::size_t num_attributes, std::size_t dim, Transform t);
  VectorModel(ParamTable items, ParamTable attributes, Transform t);

  std::size_t num_items() const { return items_.rows(); }
  std::size_t num_attributes() const { return attrs_.rows(); }
  std::size_t dim() const { return items_.width(); }
  Transform transform() const { return transform_; }

  std::span<const double> item(Index i) const;
  std::span<const double> attribute(Index a) const;

  ParamTable& item_table() { return items_; }
  ParamTable& attribute_table() { return attrs_; }
  const ParamTable& item_table() const { return items_; }
  const ParamTable& attribute_table() const { return attrs_; }

  friend bool operator==(const VectorModel&, const VectorModel&) = default;

 private:
  ParamTable items_;
  ParamTable attrs_;
  Transform transform_ = Transform::Sigmoid;
};

double dot(std::span<const double> a, std::span<const double> b);

/// Phi(<u_i, v_a>).
double score_single(const VectorModel& model, Index a, Index i);

/// Product over literals of y(a,i) or 1 - y(a,i). Requires the sigmoid transform.
double score_probabilistic(const VectorModel& model, const Query& q, Index i);

/// Phi(<u_i, sum of positive v_a - sum of negated v_a>). No normalization.
double score_algebraic(const VectorModel& model, const Query& q, Index i);

enum class VectorStrategy { Probabilistic, Algebraic };

std::vector<RankedItem> rank_items_vec(const VectorModel& model, const Query& q,
                                       VectorStrategy strategy, std::size_t k);

/// Items whose singleton score exceeds `threshold`; defaults to 0.5 under
/// sigmoid and 0 under identity.
ItemSet predict_set(const VectorModel& model, Index a, std::optional<double> threshold = {});

}  // namespace setemb
