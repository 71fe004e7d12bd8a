#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "setemb/boxgeom.hpp"
#include "setemb/core.hpp"
#include "setemb/param_table.hpp"
#include "setemb/ranking.hpp"

namespace setemb {

/// Largest number of negated literals scored by inclusion-exclusion (2^12 terms).
inline constexpr std::size_t kMaxNegatedLiterals = 12;

/// Gumbel box per item and per attribute. Each table row holds the d lower
/// corners followed by the d upper corners.
class BoxModel {
 public:
  BoxModel() = default;
  BoxModel(std::size_t num_items, std::size_t num_attributes, std::size_t dim, GumbelParams temps);
  BoxModel(ParamTable items, ParamTable attributes, GumbelParams temps);

  std::size_t num_items() const { return items_.rows(); }
  std::size_t num_attributes() const { return attrs_.rows(); }
  std::size_t dim() const { return items_.width() / 2; }
  const GumbelParams& temps() const { return temps_; }

  BoxView item(Index i) const;
  BoxView attribute(Index a) const;

  ParamTable& item_table() { return items_; }
  ParamTable& attribute_table() { return attrs_; }
  const ParamTable& item_table() const { return items_; }
  const ParamTable& attribute_table() const { return attrs_; }

  friend bool operator==(const BoxModel&, const BoxModel&) = default;

 private:
  ParamTable items_;
  ParamTable attrs_;
  GumbelParams temps_;
};

inline bool operator==(const GumbelParams& a, const GumbelParams& b) {
  return a.beta == b.beta && a.tau == b.tau;
}

/// Row view helper shared with training: splits a [mins | maxs] row.
inline BoxView box_row(std::span<const double> row) {
  std::size_t d = row.size() / 2;
  return BoxView(row.first(d), row.subspan(d));
}

/// Containment of the item box in the attribute box, clamped to [eps, 1 - eps].
double score_single_box(const BoxModel& model, Index a, Index i);

/// Inclusion-exclusion score before clamping:
/// sum over subsets S of the negated attributes of (-1)^|S| |B ∩ S ∩ box(i)| / |box(i)|,
/// where B intersects the positive attribute boxes. Attribute boxes are folded in
/// ascending index order and the item box is intersected last.
double score_compositional_box_raw(const BoxModel& model, const Query& q, Index i);

/// score_compositional_box_raw clamped into [0, 1].
double score_compositional_box(const BoxModel& model, const Query& q, Index i);

std::vector<RankedItem> rank_items_box(const BoxModel& model, const Query& q, std::size_t k);

/// Items whose singleton score exceeds `threshold` (default 0.5).
ItemSet predict_set(const BoxModel& model, Index a, std::optional<double> threshold = {});

}  // namespace setemb
