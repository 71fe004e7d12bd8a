#include "setemb/ranking.hpp"

#include <algorithm>

namespace setemb {

namespace {

bool ranks_before(const RankedItem& a, const RankedItem& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.item < b.item;
}

}  // namespace

std::vector<RankedItem> top_k(std::vector<RankedItem> candidates, std::size_t k) {
  k = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                    candidates.end(), ranks_before);
  candidates.resize(k);
  return candidates;
}

std::vector<RankedItem> top_k(std::span<const double> scores, std::size_t k) {
  std::vector<RankedItem> all(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) all[i] = {static_cast<Index>(i), scores[i]};
  return top_k(std::move(all), k);
}

std::vector<Index> item_ids(std::span<const RankedItem> ranked) {
  std::vector<Index> out;
  out.reserve(ranked.size());
  for (const auto& r : ranked) out.push_back(r.item);
  return out;
}

}  // namespace setemb
