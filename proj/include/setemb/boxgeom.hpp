#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace setemb {

/// Lower bound/upper bound used when a probability feeds a logarithm.
inline constexpr double kProbEpsilon = 1e-6;

/// Axis-aligned box stored as free lower/upper corners. Inverted sides are
/// allowed; the hard volume clamps them to zero and the softplus volume
/// keeps them positive.
struct BoxTensor {
  std::vector<double> mins;
  std::vector<double> maxs;

  BoxTensor() = default;
  BoxTensor(std::vector<double> lo, std::vector<double> hi);
  std::size_t dim() const { return mins.size(); }
};

/// Non-owning view over a box, e.g. a row of a model's parameter table.
struct BoxView {
  std::span<const double> mins;
  std::span<const double> maxs;

  BoxView(std::span<const double> lo, std::span<const double> hi) : mins(lo), maxs(hi) {}
  BoxView(const BoxTensor& b) : mins(b.mins), maxs(b.maxs) {}  // NOLINT(implicit)
  std::size_t dim() const { return mins.size(); }
};

/// beta: Gumbel scale for intersection and membership. tau: volume softplus temperature.
struct GumbelParams {
  double beta = 1.0;
  double tau = 1.0;
};

/// Throws UsageError unless both temperatures are finite and positive.
void check_params(const GumbelParams& p);

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

/// t * ln(1 + exp(x / t)), evaluated without overflow.
inline double softplus(double x, double t) {
  double z = x / t;
  if (z > 0) return x + t * std::log1p(std::exp(-z));
  return t * std::log1p(std::exp(z));
}

/// ln softplus(x, t), finite for any finite x. Below z = -30 the
/// approximation ln(1 + e^z) = e^z is exact to double precision.
inline double log_softplus(double x, double t) {
  double z = x / t;
  if (z < -30) return std::log(t) + z;
  return std::log(softplus(x, t));
}

/// d/dx ln softplus(x, t).
inline double dlog_softplus(double x, double t) {
  double z = x / t;
  if (z < -30) return 1.0 / t;
  return sigmoid(z) / softplus(x, t);
}

/// Smooth max: beta * ln(exp(a/beta) + exp(b/beta)).
inline double smooth_max(double a, double b, double beta) {
  double hi = std::max(a, b);
  return hi + beta * std::log1p(std::exp(-std::abs(a - b) / beta));
}

/// Smooth min: -beta * ln(exp(-a/beta) + exp(-b/beta)).
inline double smooth_min(double a, double b, double beta) {
  double lo = std::min(a, b);
  return lo - beta * std::log1p(std::exp(-std::abs(a - b) / beta));
}

double hard_volume(BoxView b);
double gumbel_volume(BoxView b, const GumbelParams& p);
/// Sum of log softplus side lengths; finite even when the volume underflows.
double log_gumbel_volume(BoxView b, const GumbelParams& p);

BoxTensor intersect_hard(BoxView a, BoxView b);
BoxTensor intersect_gumbel(BoxView a, BoxView b, const GumbelParams& p);
/// Writes the Gumbel intersection into caller storage of matching dimension.
/// Output spans may alias `a`'s storage (in-place fold).
void intersect_gumbel_into(BoxView a, BoxView b, double beta, std::span<double> out_mins,
                           std::span<double> out_maxs);

/// ln(|outer ∩ inner| / |inner|) with Gumbel intersection and softplus volume.
double log_containment(BoxView outer, BoxView inner, const GumbelParams& p);
/// |outer ∩ inner| / |inner| clamped into [eps, 1 - eps].
double containment_prob(BoxView outer, BoxView inner, const GumbelParams& p);

/// Probability that point z lies inside the Gumbel box: per dimension a
/// max-Gumbel CDF located at the lower corner times a min-Gumbel survival
/// function located at the upper corner, both with scale beta.
double membership_prob(std::span<const double> z, BoxView b, const GumbelParams& p);

// ---------------------------------------------------------------------------
// Analytic derivatives. Gradient buffers have the box dimension and are
// accumulated into (+=), never overwritten.

struct BoxGrad {
  std::vector<double> mins;
  std::vector<double> maxs;

  explicit BoxGrad(std::size_t d = 0) : mins(d, 0.0), maxs(d, 0.0) {}
};

/// d gumbel_volume / d corners.
void gumbel_volume_grad(BoxView b, const GumbelParams& p, BoxGrad& grad);

/// Per-dimension partials of the Gumbel intersection corners:
/// d out_min / d a_min, d out_min / d b_min, d out_max / d a_max, d out_max / d b_max.
/// Cross terms (min w.r.t. max) are zero.
struct IntersectPartials {
  std::vector<double> dmin_da, dmin_db, dmax_da, dmax_db;
};
IntersectPartials intersect_gumbel_partials(BoxView a, BoxView b, const GumbelParams& p);

/// Returns log_containment(outer, inner) and adds its gradient, scaled by
/// `scale`, into the two buffers.
double log_containment_grad(BoxView outer, BoxView inner, const GumbelParams& p, double scale,
                            BoxGrad& outer_grad, BoxGrad& inner_grad);

/// Same, accumulating into raw corner spans (used on parameter-table rows).
double log_containment_grad(BoxView outer, BoxView inner, const GumbelParams& p, double scale,
                            std::span<double> outer_mins_grad, std::span<double> outer_maxs_grad,
                            std::span<double> inner_mins_grad, std::span<double> inner_maxs_grad);

/// Returns containment_prob(outer, inner) and adds the gradient of the
/// clamped value (zero where the clamp is active).
double containment_prob_grad(BoxView outer, BoxView inner, const GumbelParams& p,
                             BoxGrad& outer_grad, BoxGrad& inner_grad);

}  // namespace setemb
