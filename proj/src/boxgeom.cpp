#include "setemb/boxgeom.hpp"

#include <algorithm>

#include "setemb/errors.hpp"

namespace setemb {

namespace {

void check_same_dim(BoxView a, BoxView b) {
  if (a.mins.size() != a.maxs.size() || b.mins.size() != b.maxs.size())
    throw UsageError("box has mismatched corner lengths");
  if (a.dim() != b.dim()) throw UsageError("box dimension mismatch");
}

void check_box(BoxView b) {
  if (b.mins.size() != b.maxs.size()) throw UsageError("box has mismatched corner lengths");
}

void check_grad(const BoxGrad& g, std::size_t d) {
  if (g.mins.size() != d || g.maxs.size() != d) throw UsageError("gradient buffer dimension mismatch");
}

/// log_softplus and dlog_softplus sharing one exponential.
void log_softplus_and_slope(double x, double t, double& value, double& slope) {
  double z = x / t;
  if (z < -30) {
    value = std::log(t) + z;
    slope = 1.0 / t;
    return;
  }
  double e = std::exp(-std::abs(z));
  double sp = z > 0 ? x + t * std::log1p(e) : t * std::log1p(e);
  value = std::log(sp);
  slope = (z >= 0 ? 1.0 / (1.0 + e) : e / (1.0 + e)) / sp;
}

}  // namespace

BoxTensor::BoxTensor(std::vector<double> lo, std::vector<double> hi)
    : mins(std::move(lo)), maxs(std::move(hi)) {
  if (mins.size() != maxs.size()) throw UsageError("box corners differ in dimension");
  for (std::size_t k = 0; k < mins.size(); ++k)
    if (!std::isfinite(mins[k]) || !std::isfinite(maxs[k])) throw UsageError("non-finite box corner");
}

void check_params(const GumbelParams& p) {
  if (!(p.beta > 0) || !(p.tau > 0) || !std::isfinite(p.beta) || !std::isfinite(p.tau))
    throw UsageError("box temperatures must be positive and finite");
}

double hard_volume(BoxView b) {
  check_box(b);
  double v = 1.0;
  for (std::size_t k = 0; k < b.dim(); ++k) v *= std::max(0.0, b.maxs[k] - b.mins[k]);
  return v;
}

double gumbel_volume(BoxView b, const GumbelParams& p) {
  check_box(b);
  double v = 1.0;
  for (std::size_t k = 0; k < b.dim(); ++k) v *= softplus(b.maxs[k] - b.mins[k], p.tau);
  return v;
}

double log_gumbel_volume(BoxView b, const GumbelParams& p) {
  check_box(b);
  double s = 0.0;
  for (std::size_t k = 0; k < b.dim(); ++k) s += log_softplus(b.maxs[k] - b.mins[k], p.tau);
  return s;
}

BoxTensor intersect_hard(BoxView a, BoxView b) {
  check_same_dim(a, b);
  BoxTensor out;
  out.mins.resize(a.dim());
  out.maxs.resize(a.dim());
  for (std::size_t k = 0; k < a.dim(); ++k) {
    out.mins[k] = std::max(a.mins[k], b.mins[k]);
    out.maxs[k] = std::min(a.maxs[k], b.maxs[k]);
  }
  return out;
}

void intersect_gumbel_into(BoxView a, BoxView b, double beta, std::span<double> out_mins,
                           std::span<double> out_maxs) {
  check_same_dim(a, b);
  if (out_mins.size() != a.dim() || out_maxs.size() != a.dim())
    throw UsageError("intersection output dimension mismatch");
  for (std::size_t k = 0; k < a.dim(); ++k) {
    double lo = smooth_max(a.mins[k], b.mins[k], beta);
    double hi = smooth_min(a.maxs[k], b.maxs[k], beta);
    out_mins[k] = lo;
    out_maxs[k] = hi;
  }
}

BoxTensor intersect_gumbel(BoxView a, BoxView b, const GumbelParams& p) {
  BoxTensor out;
  out.mins.resize(a.dim());
  out.maxs.resize(a.dim());
  intersect_gumbel_into(a, b, p.beta, out.mins, out.maxs);
  return out;
}

double log_containment(BoxView outer, BoxView inner, const GumbelParams& p) {
  check_same_dim(outer, inner);
  double s = 0.0;
  for (std::size_t k = 0; k < outer.dim(); ++k) {
    double lo = smooth_max(outer.mins[k], inner.mins[k], p.beta);
    double hi = smooth_min(outer.maxs[k], inner.maxs[k], p.beta);
    s += log_softplus(hi - lo, p.tau) - log_softplus(inner.maxs[k] - inner.mins[k], p.tau);
  }
  return s;
}

double containment_prob(BoxView outer, BoxView inner, const GumbelParams& p) {
  return std::clamp(std::exp(log_containment(outer, inner, p)), kProbEpsilon, 1.0 - kProbEpsilon);
}

double membership_prob(std::span<const double> z, BoxView b, const GumbelParams& p) {
  check_box(b);
  if (z.size() != b.dim()) throw UsageError("point dimension mismatch");
  // Accumulate the log of the product: each factor is exp(-exp(-t)).
  double log_p = 0.0;
  for (std::size_t k = 0; k < b.dim(); ++k) {
    log_p -= std::exp(-(z[k] - b.mins[k]) / p.beta);
    log_p -= std::exp(-(b.maxs[k] - z[k]) / p.beta);
  }
  return std::exp(log_p);
}

// ---------------------------------------------------------------------------
// Gradients

void gumbel_volume_grad(BoxView b, const GumbelParams& p, BoxGrad& grad) {
  check_box(b);
  check_grad(grad, b.dim());
  const std::size_t d = b.dim();
  std::vector<double> sides(d);
  for (std::size_t k = 0; k < d; ++k) sides[k] = softplus(b.maxs[k] - b.mins[k], p.tau);
  for (std::size_t k = 0; k < d; ++k) {
    // Product of the other sides; recomputed directly so that zero-width
    // sides do not require a division.
    double others = 1.0;
    for (std::size_t j = 0; j < d; ++j)
      if (j != k) others *= sides[j];
    double g = others * sigmoid((b.maxs[k] - b.mins[k]) / p.tau);
    grad.maxs[k] += g;
    grad.mins[k] -= g;
  }
}

IntersectPartials intersect_gumbel_partials(BoxView a, BoxView b, const GumbelParams& p) {
  check_same_dim(a, b);
  const std::size_t d = a.dim();
  IntersectPartials out{std::vector<double>(d), std::vector<double>(d), std::vector<double>(d),
                        std::vector<double>(d)};
  for (std::size_t k = 0; k < d; ++k) {
    out.dmin_da[k] = sigmoid((a.mins[k] - b.mins[k]) / p.beta);
    out.dmin_db[k] = sigmoid((b.mins[k] - a.mins[k]) / p.beta);
    out.dmax_da[k] = sigmoid((b.maxs[k] - a.maxs[k]) / p.beta);
    out.dmax_db[k] = sigmoid((a.maxs[k] - b.maxs[k]) / p.beta);
  }
  return out;
}

double log_containment_grad(BoxView outer, BoxView inner, const GumbelParams& p, double scale,
                            BoxGrad& outer_grad, BoxGrad& inner_grad) {
  check_grad(outer_grad, outer.dim());
  check_grad(inner_grad, inner.dim());
  return log_containment_grad(outer, inner, p, scale, outer_grad.mins, outer_grad.maxs,
                              inner_grad.mins, inner_grad.maxs);
}

double log_containment_grad(BoxView outer, BoxView inner, const GumbelParams& p, double scale,
                            std::span<double> outer_mins_grad, std::span<double> outer_maxs_grad,
                            std::span<double> inner_mins_grad, std::span<double> inner_maxs_grad) {
  check_same_dim(outer, inner);
  const std::size_t d = outer.dim();
  if (outer_mins_grad.size() != d || outer_maxs_grad.size() != d || inner_mins_grad.size() != d ||
      inner_maxs_grad.size() != d)
    throw UsageError("gradient buffer dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    // One exponential per smooth corner serves both the corner and its two sigmoids.
    double dm = outer.mins[k] - inner.mins[k];
    double em = std::exp(-std::abs(dm) / p.beta);
    double lo = std::max(outer.mins[k], inner.mins[k]) + p.beta * std::log1p(em);
    double big_m = 1.0 / (1.0 + em), small_m = em / (1.0 + em);
    double outer_lo_share = dm >= 0 ? big_m : small_m;
    double inner_lo_share = dm >= 0 ? small_m : big_m;

    double dx = inner.maxs[k] - outer.maxs[k];
    double ex = std::exp(-std::abs(dx) / p.beta);
    double hi = std::min(outer.maxs[k], inner.maxs[k]) - p.beta * std::log1p(ex);
    double big_x = 1.0 / (1.0 + ex), small_x = ex / (1.0 + ex);
    double outer_hi_share = dx >= 0 ? big_x : small_x;
    double inner_hi_share = dx >= 0 ? small_x : big_x;

    double ls_side, dls_side, ls_inner, dls_inner;
    log_softplus_and_slope(hi - lo, p.tau, ls_side, dls_side);
    log_softplus_and_slope(inner.maxs[k] - inner.mins[k], p.tau, ls_inner, dls_inner);
    s += ls_side - ls_inner;

    double g = scale * dls_side;
    double h = scale * dls_inner;
    outer_mins_grad[k] -= g * outer_lo_share;
    inner_mins_grad[k] -= g * inner_lo_share;
    outer_maxs_grad[k] += g * outer_hi_share;
    inner_maxs_grad[k] += g * inner_hi_share;
    inner_maxs_grad[k] -= h;
    inner_mins_grad[k] += h;
  }
  return s;
}

double containment_prob_grad(BoxView outer, BoxView inner, const GumbelParams& p,
                             BoxGrad& outer_grad, BoxGrad& inner_grad) {
  double raw = std::exp(log_containment(outer, inner, p));
  if (raw < kProbEpsilon) return kProbEpsilon;
  if (raw > 1.0 - kProbEpsilon) return 1.0 - kProbEpsilon;
  log_containment_grad(outer, inner, p, raw, outer_grad, inner_grad);
  return raw;
}

}  // namespace setemb
