#pragma once

// Independent reference implementations used by the tests. They share no
// code with the library: geometry is evaluated in 50-digit floating point
// straight from the defining formulas, set semantics on dense boolean tables.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cstddef>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using Big = boost::multiprecision::cpp_bin_float_50;

struct Box {
  std::vector<double> lo, hi;
};

inline Big hard_volume(const Box& b) {
  Big v = 1;
  for (std::size_t k = 0; k < b.lo.size(); ++k) {
    Big side = Big(b.hi[k]) - Big(b.lo[k]);
    v *= side > 0 ? side : Big(0);
  }
  return v;
}

inline Big softplus(const Big& x, const Big& t) { return t * boost::multiprecision::log1p(boost::multiprecision::exp(x / t)); }

inline Big gumbel_volume(const std::vector<Big>& lo, const std::vector<Big>& hi, double tau) {
  Big v = 1;
  for (std::size_t k = 0; k < lo.size(); ++k) v *= softplus(hi[k] - lo[k], Big(tau));
  return v;
}

inline Big gumbel_volume(const Box& b, double tau) {
  std::vector<Big> lo(b.lo.begin(), b.lo.end()), hi(b.hi.begin(), b.hi.end());
  return gumbel_volume(lo, hi, tau);
}

/// beta * ln(sum exp(x / beta)).
inline Big lse(const std::vector<Big>& xs, double beta) {
  Big s = 0;
  for (const auto& x : xs) s += boost::multiprecision::exp(x / Big(beta));
  return Big(beta) * boost::multiprecision::log(s);
}

/// n-ary Gumbel intersection: corners are log-sum-exp smoothed max/min.
inline std::pair<std::vector<Big>, std::vector<Big>> gumbel_intersection(const std::vector<const Box*>& boxes,
                                                                           double beta) {
  std::size_t d = boxes.front()->lo.size();
  std::vector<Big> lo(d), hi(d);
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<Big> los, neg_his;
    for (const auto* b : boxes) {
      los.emplace_back(b->lo[k]);
      neg_his.emplace_back(-b->hi[k]);
    }
    lo[k] = lse(los, beta);
    hi[k] = -lse(neg_his, beta);
  }
  return {lo, hi};
}

inline Box hard_intersection(const Box& a, const Box& b) {
  Box out{a.lo, a.hi};
  for (std::size_t k = 0; k < a.lo.size(); ++k) {
    out.lo[k] = std::max(a.lo[k], b.lo[k]);
    out.hi[k] = std::min(a.hi[k], b.hi[k]);
  }
  return out;
}

/// |a ∩ i| / |i| without clamping.
inline Big containment(const Box& a, const Box& item, double beta, double tau) {
  auto [lo, hi] = gumbel_intersection({&a, &item}, beta);
  return gumbel_volume(lo, hi, tau) / gumbel_volume(item, tau);
}

/// Signed sum over subsets of the negated boxes.
inline Big inclusion_exclusion(const std::vector<const Box*>& positives, const std::vector<const Box*>& negatives,
                               const Box& item, double beta, double tau) {
  Big total = 0;
  Big item_vol = gumbel_volume(item, tau);
  for (std::size_t mask = 0; mask < (std::size_t{1} << negatives.size()); ++mask) {
    std::vector<const Box*> parts = positives;
    int sign = 1;
    for (std::size_t j = 0; j < negatives.size(); ++j)
      if (mask >> j & 1) {
        parts.push_back(negatives[j]);
        sign = -sign;
      }
    parts.push_back(&item);
    auto [lo, hi] = gumbel_intersection(parts, beta);
    total += sign * gumbel_volume(lo, hi, tau) / item_vol;
  }
  return total;
}

inline double rel_err(double got, const Big& want) {
  Big w = boost::multiprecision::abs(want);
  Big denom = w > 1 ? w : Big(1);
  return static_cast<double>(boost::multiprecision::abs(Big(got) - want) / denom);
}

// ---------------------------------------------------------------------------
// Set semantics on a dense table: has[i][a].

using Table = std::vector<std::vector<bool>>;

struct Lit {
  unsigned attribute;
  bool negated;
};

inline bool satisfies(const Table& has, std::size_t i, const std::vector<Lit>& q) {
  for (const auto& l : q)
    if (has[i][l.attribute] == l.negated) return false;
  return true;
}

inline std::vector<unsigned> match(const Table& has, const std::vector<Lit>& q) {
  std::vector<unsigned> out;
  for (std::size_t i = 0; i < has.size(); ++i)
    if (satisfies(has, i, q)) out.push_back(static_cast<unsigned>(i));
  return out;
}

inline std::size_t atom_size(const Table& has, const Lit& l) {
  std::size_t n = 0;
  for (const auto& row : has)
    if (row[l.attribute] != l.negated) ++n;
  return n;
}

inline double rho(const Table& has, const std::vector<Lit>& q) {
  std::size_t smallest = has.size();
  for (const auto& l : q) smallest = std::min(smallest, atom_size(has, l));
  return static_cast<double>(match(has, q).size()) / static_cast<double>(smallest);
}

inline double precision(const std::vector<unsigned>& ranked, const std::set<unsigned>& truth, std::size_t k) {
  std::set<unsigned> top;
  for (std::size_t r = 0; r < ranked.size() && r < k; ++r) top.insert(ranked[r]);
  std::size_t hits = 0;
  for (auto i : top) hits += truth.count(i);
  return static_cast<double>(hits) / static_cast<double>(k);
}

/// The three generation tests, straight from their definitions, compared in
/// 50-digit arithmetic. Thresholds are inclusive up to a relative slack.
inline bool accepted(const Table& has, const std::vector<Lit>& q, double lift_min, double contain_max,
                     std::size_t min_result, std::size_t max_result, double slack = 1e-12) {
  const Big m = static_cast<double>(has.size());
  const std::size_t r = match(has, q).size();
  Big expected = m;
  Big smallest = m;
  for (const auto& l : q) {
    Big s = static_cast<double>(atom_size(has, l));
    expected *= s / m;
    smallest = s < smallest ? s : smallest;
  }
  const Big rb = static_cast<double>(r);
  bool meaningful = rb >= Big(lift_min) * expected * (1 - Big(slack));
  bool non_trivial = rb <= Big(contain_max) * smallest * (1 + Big(slack));
  return meaningful && non_trivial && r >= min_result && r <= max_result;
}

inline Table random_table(std::size_t m, std::size_t n, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(density);
  Table t(m, std::vector<bool>(n));
  for (auto& row : t)
    for (std::size_t a = 0; a < n; ++a) row[a] = coin(rng);
  return t;
}

}  // namespace oracle
