#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "setemb/core.hpp"

namespace setemb {

struct RankedItem {
  Index item = 0;
  double score = 0.0;

  friend bool operator==(const RankedItem&, const RankedItem&) = default;
};

/// Top-k of a dense score vector: descending score, ties by ascending item index.
std::vector<RankedItem> top_k(std::span<const double> scores, std::size_t k);

/// Same ordering over an explicit candidate list.
std::vector<RankedItem> top_k(std::vector<RankedItem> candidates, std::size_t k);

std::vector<Index> item_ids(std::span<const RankedItem> ranked);

}  // namespace setemb
