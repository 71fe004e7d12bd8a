#include "setemb/boxmodel.hpp"

#include <algorithm>
#include <cmath>

#include "setemb/errors.hpp"

namespace setemb {

BoxModel::BoxModel(std::size_t num_items, std::size_t num_attributes, std::size_t dim,
                   GumbelParams temps)
    : items_(num_items, 2 * dim), attrs_(num_attributes, 2 * dim), temps_(temps) {
  check_params(temps_);
}

BoxModel::BoxModel(ParamTable items, ParamTable attributes, GumbelParams temps)
    : items_(std::move(items)), attrs_(std::move(attributes)), temps_(temps) {
  check_params(temps_);
  if (items_.width() != attrs_.width() || items_.width() % 2 != 0)
    throw UsageError("box tables must share an even row width");
}

BoxView BoxModel::item(Index i) const {
  if (i >= num_items()) throw UsageError("item index out of range");
  return box_row(items_.row(i));
}

BoxView BoxModel::attribute(Index a) const {
  if (a >= num_attributes()) throw UsageError("attribute index out of range");
  return box_row(attrs_.row(a));
}

double score_single_box(const BoxModel& model, Index a, Index i) {
  return containment_prob(model.attribute(a), model.item(i), model.temps());
}

namespace {

/// Query-dependent part of the inclusion-exclusion sum: one folded
/// attribute box and sign per subset of the negated literals.
class CompositionalScorer {
 public:
  CompositionalScorer(const BoxModel& model, const Query& q) : model_(model) {
    check_query_range(q, model.num_attributes());
    auto pos = q.positives();
    auto neg = q.negatives();
    if (neg.size() > kMaxNegatedLiterals)
      throw UsageError("too many negated literals for inclusion-exclusion");
    const std::size_t subsets = std::size_t{1} << neg.size();
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      std::vector<Index> members = pos;
      int sign = 1;
      for (std::size_t j = 0; j < neg.size(); ++j) {
        if (mask & (std::size_t{1} << j)) {
          members.push_back(neg[j]);
          sign = -sign;
        }
      }
      std::sort(members.begin(), members.end());
      auto first = model.attribute(members.front());
      BoxTensor acc;
      acc.mins.assign(first.mins.begin(), first.mins.end());
      acc.maxs.assign(first.maxs.begin(), first.maxs.end());
      for (std::size_t j = 1; j < members.size(); ++j)
        intersect_gumbel_into(acc, model.attribute(members[j]), model.temps().beta, acc.mins, acc.maxs);
      folded_.push_back(std::move(acc));
      signs_.push_back(sign);
    }
  }

  double raw(Index i) const {
    BoxView item = model_.item(i);
    const auto& t = model_.temps();
    double log_item = log_gumbel_volume(item, t);
    double total = 0.0;
    for (std::size_t s = 0; s < folded_.size(); ++s) {
      const auto& f = folded_[s];
      double log_vol = 0.0;
      for (std::size_t k = 0; k < item.dim(); ++k) {
        double lo = smooth_max(f.mins[k], item.mins[k], t.beta);
        double hi = smooth_min(f.maxs[k], item.maxs[k], t.beta);
        log_vol += log_softplus(hi - lo, t.tau);
      }
      total += signs_[s] * std::exp(log_vol - log_item);
    }
    return total;
  }

 private:
  const BoxModel& model_;
  std::vector<BoxTensor> folded_;
  std::vector<int> signs_;
};

}  // namespace

double score_compositional_box_raw(const BoxModel& model, const Query& q, Index i) {
  return CompositionalScorer(model, q).raw(i);
}

double score_compositional_box(const BoxModel& model, const Query& q, Index i) {
  return std::clamp(score_compositional_box_raw(model, q, i), 0.0, 1.0);
}

std::vector<RankedItem> rank_items_box(const BoxModel& model, const Query& q, std::size_t k) {
  if (k > model.num_items()) throw UsageError("k exceeds the number of items");
  CompositionalScorer scorer(model, q);
  std::vector<double> scores(model.num_items());
  for (Index i = 0; i < scores.size(); ++i) scores[i] = std::clamp(scorer.raw(i), 0.0, 1.0);
  return top_k(scores, k);
}

ItemSet predict_set(const BoxModel& model, Index a, std::optional<double> threshold) {
  double t = threshold.value_or(0.5);
  ItemSet out;
  for (Index i = 0; i < model.num_items(); ++i)
    if (score_single_box(model, a, i) > t) out.push_back(i);
  return out;
}

}  // namespace setemb
