#include "setemb/vecmodel.hpp"

#include <cmath>
#include <string>

#include "setemb/boxgeom.hpp"
#include "setemb/errors.hpp"

namespace setemb {

std::string_view transform_name(Transform t) {
  return t == Transform::Identity ? "identity" : "sigmoid";
}

Transform parse_transform(std::string_view name) {
  if (name == "identity") return Transform::Identity;
  if (name == "sigmoid") return Transform::Sigmoid;
  throw DataError("unknown transform '" + std::string(name) + "'");
}

double apply_transform(Transform t, double x) { return t == Transform::Identity ? x : sigmoid(x); }

VectorModel::VectorModel(std::size_t num_items, std::size_t num_attributes, std::size_t dim,
                         Transform t)
    : items_(num_items, dim), attrs_(num_attributes, dim), transform_(t) {}

VectorModel::VectorModel(ParamTable items, ParamTable attributes, Transform t)
    : items_(std::move(items)), attrs_(std::move(attributes)), transform_(t) {
  if (items_.width() != attrs_.width()) throw UsageError("item and attribute dimensions differ");
}

std::span<const double> VectorModel::item(Index i) const {
  if (i >= num_items()) throw UsageError("item index out of range");
  return items_.row(i);
}

std::span<const double> VectorModel::attribute(Index a) const {
  if (a >= num_attributes()) throw UsageError("attribute index out of range");
  return attrs_.row(a);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double score_single(const VectorModel& model, Index a, Index i) {
  return apply_transform(model.transform(), dot(model.item(i), model.attribute(a)));
}

double score_probabilistic(const VectorModel& model, const Query& q, Index i) {
  if (model.transform() != Transform::Sigmoid)
    throw UsageError("probabilistic aggregation requires the sigmoid transform");
  double p = 1.0;
  for (const auto& l : q.literals()) {
    double y = score_single(model, l.attribute, i);
    p *= l.negated ? 1.0 - y : y;
  }
  return p;
}

namespace {

std::vector<double> composed_vector(const VectorModel& model, const Query& q) {
  std::vector<double> v(model.dim(), 0.0);
  for (const auto& l : q.literals()) {
    auto row = model.attribute(l.attribute);
    double sign = l.negated ? -1.0 : 1.0;
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += sign * row[k];
  }
  return v;
}

}  // namespace

double score_algebraic(const VectorModel& model, const Query& q, Index i) {
  auto v = composed_vector(model, q);
  return apply_transform(model.transform(), dot(model.item(i), v));
}

std::vector<RankedItem> rank_items_vec(const VectorModel& model, const Query& q,
                                       VectorStrategy strategy, std::size_t k) {
  if (k > model.num_items()) throw UsageError("k exceeds the number of items");
  check_query_range(q, model.num_attributes());
  std::vector<double> scores(model.num_items());
  if (strategy == VectorStrategy::Probabilistic) {
    for (Index i = 0; i < scores.size(); ++i) scores[i] = score_probabilistic(model, q, i);
  } else {
    auto v = composed_vector(model, q);
    for (Index i = 0; i < scores.size(); ++i)
      scores[i] = apply_transform(model.transform(), dot(model.item(i), v));
  }
  return top_k(scores, k);
}

ItemSet predict_set(const VectorModel& model, Index a, std::optional<double> threshold) {
  double t = threshold.value_or(model.transform() == Transform::Sigmoid ? 0.5 : 0.0);
  ItemSet out;
  for (Index i = 0; i < model.num_items(); ++i)
    if (score_single(model, a, i) > t) out.push_back(i);
  return out;
}

}  // namespace setemb
