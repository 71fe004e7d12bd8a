#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "setemb/boxgeom.hpp"
#include "setemb/core.hpp"

namespace support {

using setemb::Index;

/// Lower corners in [-2, 2], side lengths in [side_lo, side_hi].
inline setemb::BoxTensor random_box(std::size_t d, std::mt19937_64& rng, double side_lo = 0.05,
                                    double side_hi = 3.0) {
  std::uniform_real_distribution<double> corner(-2.0, 2.0), side(side_lo, side_hi);
  std::vector<double> lo(d), hi(d);
  for (std::size_t k = 0; k < d; ++k) {
    lo[k] = corner(rng);
    hi[k] = lo[k] + side(rng);
  }
  return {lo, hi};
}

inline oracle::Box to_oracle(const setemb::BoxTensor& b) { return {b.mins, b.maxs}; }

inline setemb::ObservationMatrix from_table(const oracle::Table& t,
                                            setemb::MatrixKind kind = setemb::MatrixKind::GroundTruth) {
  std::vector<setemb::Entry> e;
  for (Index i = 0; i < t.size(); ++i)
    for (Index a = 0; a < t[i].size(); ++a)
      if (t[i][a]) e.push_back({i, a, 1.0});
  return setemb::ObservationMatrix(kind, t.size(), t.empty() ? 0 : t[0].size(), std::move(e));
}

inline setemb::Query to_query(const std::vector<oracle::Lit>& lits) {
  std::vector<setemb::Literal> out;
  for (const auto& l : lits) out.push_back({l.attribute, l.negated});
  return setemb::Query(out);
}

/// Central difference of f with respect to x[k], restoring x[k].
inline double central_difference(const std::function<double()>& f, double& x, double h = 1e-6) {
  const double saved = x;
  x = saved + h;
  double up = f();
  x = saved - h;
  double down = f();
  x = saved;
  return (up - down) / (2 * h);
}

/// |a - b| / max(|a|, |b|, floor).
inline double grad_rel_err(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// ||a - b|| / max(||a||, ||b||, floor): the usual whole-gradient check.
inline double vec_rel_err(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-12) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff += (a[k] - b[k]) * (a[k] - b[k]);
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), floor});
}

}  // namespace support
