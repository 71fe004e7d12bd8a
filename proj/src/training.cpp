#include "setemb/training.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>
#include <thread>

#include "setemb/errors.hpp"
#include "setemb/evalharness.hpp"
#include "setemb/io.hpp"

namespace setemb {

namespace {

// Examples per gradient chunk. Chunks are reduced in order, so the result
// does not depend on how many threads computed them.
constexpr std::size_t kChunk = 256;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::size_t parse_count(std::string_view v) {
  double d = parse_double(v);
  if (d < 0 || d != std::floor(d)) throw UsageError("expected a non-negative integer, got '" + std::string(v) + "'");
  return static_cast<std::size_t>(d);
}

std::uint64_t parse_u64(std::string_view v) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw UsageError("expected an unsigned integer, got '" + std::string(v) + "'");
  return out;
}

template <typename F>
void for_each_line_kv(std::istream& in, F&& on_pair) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = line;
    if (auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    auto eq = text.find('=');
    if (eq == std::string_view::npos)
      throw UsageError("expected key=value on line " + std::to_string(line_no));
    on_pair(trim(text.substr(0, eq)), trim(text.substr(eq + 1)), line_no);
  }
}

std::vector<std::string_view> split_commas(std::string_view v) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto comma = v.find(',', start);
    auto tok = trim(v.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (tok.empty()) throw UsageError("empty value in list");
    out.push_back(tok);
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view v, Parse parse) {
  std::vector<T> out;
  for (auto tok : split_commas(v)) out.push_back(parse(tok));
  return out;
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& xs, Fmt fmt) {
  std::string out;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (j) out += ',';
    out += fmt(xs[j]);
  }
  return out;
}

Index draw_other(Index exclude, std::size_t count, Rng& rng) {
  std::uniform_int_distribution<std::size_t> dist(0, count - 2);
  auto v = static_cast<Index>(dist(rng));
  return v >= exclude ? v + 1 : v;
}

/// Runs `work(c)` for every chunk index, on up to `threads` threads.
template <typename Work>
void parallel_chunks(std::size_t num_chunks, std::size_t threads, Work&& work) {
  threads = std::max<std::size_t>(1, std::min(threads, num_chunks));
  if (threads == 1) {
    for (std::size_t c = 0; c < num_chunks; ++c) work(c);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t c = t; c < num_chunks; c += threads) work(c);
    });
  for (auto& th : pool) th.join();
}

/// Per-example loss and gradient written into a chunk-local SparseGradient.
template <typename PerExample>
LossAndGrads batch_loss(std::span<const TrainingExample> batch, std::size_t width,
                        const TrainConfig& cfg, const ParamTable& items, const ParamTable& attrs,
                        PerExample&& per_example) {
  if (batch.empty()) return {0.0, SparseGradient(width)};
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  const std::size_t num_chunks = (batch.size() + kChunk - 1) / kChunk;
  std::vector<LossAndGrads> parts(num_chunks, LossAndGrads{0.0, SparseGradient(width)});
  parallel_chunks(num_chunks, cfg.threads, [&](std::size_t c) {
    auto& part = parts[c];
    std::size_t end = std::min(batch.size(), (c + 1) * kChunk);
    for (std::size_t j = c * kChunk; j < end; ++j) part.loss += per_example(batch[j], inv_n, part.grads);
  });

  LossAndGrads total{0.0, SparseGradient(width)};
  for (const auto& part : parts) {
    total.loss += part.loss;
    total.grads.add(part.grads);
  }
  total.loss *= inv_n;

  if (cfg.reg_coeff > 0) {
    // Each example carries reg * (|u_i|^2 + |v_a|^2), so a row's penalty
    // weight is its share of the batch.
    std::unordered_map<Index, std::size_t> item_uses, attr_uses;
    for (const auto& ex : batch) {
      ++item_uses[ex.item];
      ++attr_uses[ex.attribute];
    }
    auto penalize = [&](const ParamTable& table, Index r, std::size_t uses, std::span<double> g) {
      const double w = cfg.reg_coeff * static_cast<double>(uses) * inv_n;
      auto row = table.row(r);
      for (std::size_t k = 0; k < width; ++k) {
        total.loss += w * row[k] * row[k];
        g[k] += 2.0 * w * row[k];
      }
    };
    for (Index i : total.grads.touched_items()) penalize(items, i, item_uses[i], total.grads.item(i));
    for (Index a : total.grads.touched_attributes()) penalize(attrs, a, attr_uses[a], total.grads.attribute(a));
  }
  return total;
}

void apply_update(ParamTable& items, ParamTable& attrs, const SparseGradient& grads, double lr) {
  if (lr == 0.0) return;
  for (Index i : grads.touched_items()) {
    auto row = items.row(i);
    auto g = grads.item_grad(i);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] -= lr * g[k];
  }
  for (Index a : grads.touched_attributes()) {
    auto row = attrs.row(a);
    auto g = grads.attribute_grad(a);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] -= lr * g[k];
  }
}

template <typename Model, typename LossFn>
std::vector<double> run_sgd(Model& model, const ObservationMatrix& data, const TrainConfig& cfg,
                            Rng& rng, const EpochCallback& on_epoch, LossFn&& loss_fn) {
  if (data.nnz() == 0) throw DataError("training data is empty");
  if (data.num_items() != model.num_items() || data.num_attributes() != model.num_attributes())
    throw UsageError("model shape does not match training data");
  if ((cfg.neg_items > 0 && data.num_items() < 2) || (cfg.neg_attrs > 0 && data.num_attributes() < 2))
    throw UsageError("negative sampling needs at least two items and two attributes");
  auto positives = data.entries();
  std::vector<std::size_t> order(positives.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> losses;
  std::vector<TrainingExample> batch;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t example_count = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t j = start; j < end; ++j) {
        const auto& e = positives[order[j]];
        batch.push_back({e.item, e.attribute, 1, e.weight});
        auto negs = sample_negatives(e.item, e.attribute, data.num_items(), data.num_attributes(), cfg, rng);
        batch.insert(batch.end(), negs.begin(), negs.end());
      }
      auto result = loss_fn(model, batch, cfg);
      if (!std::isfinite(result.loss))
        throw DivergenceError("training loss became non-finite in epoch " + std::to_string(epoch + 1));
      apply_update(model.item_table(), model.attribute_table(), result.grads, cfg.learning_rate);
      loss_sum += result.loss * static_cast<double>(batch.size());
      example_count += batch.size();
    }
    double mean = loss_sum / static_cast<double>(example_count);
    losses.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  return losses;
}

}  // namespace

// ---------------------------------------------------------------------------
// Names and configuration

std::string_view model_kind_name(ModelKind k) { return k == ModelKind::Vector ? "vector" : "box"; }

ModelKind parse_model_kind(std::string_view name) {
  if (name == "vector") return ModelKind::Vector;
  if (name == "box") return ModelKind::Box;
  throw UsageError("unknown model kind '" + std::string(name) + "'");
}

std::string_view loss_kind_name(LossKind k) {
  switch (k) {
    case LossKind::Hinge: return "hinge";
    case LossKind::CrossEntropy: return "cross_entropy";
    case LossKind::BoxBce: return "box_bce";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "hinge") return LossKind::Hinge;
  if (name == "cross_entropy") return LossKind::CrossEntropy;
  if (name == "box_bce") return LossKind::BoxBce;
  throw UsageError("unknown loss '" + std::string(name) + "'");
}

Transform transform_for(LossKind loss) {
  switch (loss) {
    case LossKind::Hinge: return Transform::Identity;
    case LossKind::CrossEntropy: return Transform::Sigmoid;
    case LossKind::BoxBce: break;
  }
  throw UsageError("box loss has no vector transform");
}

void check_config(const TrainConfig& cfg, ModelKind kind) {
  if (cfg.batch_size == 0) throw UsageError("batch_size must be positive");
  if (!(cfg.learning_rate >= 0) || !std::isfinite(cfg.learning_rate))
    throw UsageError("learning_rate must be finite and non-negative");
  if (!(cfg.reg_coeff >= 0) || !std::isfinite(cfg.reg_coeff)) throw UsageError("reg_coeff must be non-negative");
  if (cfg.epochs == 0) throw UsageError("epochs must be set");
  if (cfg.dims == 0) throw UsageError("dims must be positive");
  if (!std::isfinite(cfg.margin)) throw UsageError("margin must be finite");
  if (kind == ModelKind::Vector && cfg.loss == LossKind::BoxBce)
    throw UsageError("vector models train with hinge or cross_entropy");
  if (kind == ModelKind::Box) {
    if (cfg.loss != LossKind::BoxBce) throw UsageError("box models train with box_bce");
    check_params(cfg.temps);
  }
}

TrainConfig parse_train_config(std::istream& in) {
  TrainConfig cfg;
  for_each_line_kv(in, [&](std::string_view key, std::string_view value, std::size_t line_no) {
    if (key == "batch_size") cfg.batch_size = parse_count(value);
    else if (key == "learning_rate") cfg.learning_rate = parse_double(value);
    else if (key == "reg_coeff") cfg.reg_coeff = parse_double(value);
    else if (key == "neg_items") cfg.neg_items = parse_count(value);
    else if (key == "neg_attrs") cfg.neg_attrs = parse_count(value);
    else if (key == "epochs") cfg.epochs = parse_count(value);
    else if (key == "loss") cfg.loss = parse_loss_kind(value);
    else if (key == "margin") cfg.margin = parse_double(value);
    else if (key == "seed") cfg.seed = parse_u64(value);
    else if (key == "dims") cfg.dims = parse_count(value);
    else if (key == "beta") cfg.temps.beta = parse_double(value);
    else if (key == "tau") cfg.temps.tau = parse_double(value);
    else if (key == "threads") cfg.threads = parse_count(value);
    else throw UsageError("unknown config key '" + std::string(key) + "' on line " + std::to_string(line_no));
  });
  return cfg;
}

std::string format_train_config(const TrainConfig& cfg) {
  std::ostringstream out;
  out << "batch_size=" << cfg.batch_size << '\n'
      << "learning_rate=" << format_double(cfg.learning_rate) << '\n'
      << "reg_coeff=" << format_double(cfg.reg_coeff) << '\n'
      << "neg_items=" << cfg.neg_items << '\n'
      << "neg_attrs=" << cfg.neg_attrs << '\n'
      << "epochs=" << cfg.epochs << '\n'
      << "loss=" << loss_kind_name(cfg.loss) << '\n'
      << "margin=" << format_double(cfg.margin) << '\n'
      << "seed=" << cfg.seed << '\n'
      << "dims=" << cfg.dims << '\n'
      << "beta=" << format_double(cfg.temps.beta) << '\n'
      << "tau=" << format_double(cfg.temps.tau) << '\n'
      << "threads=" << cfg.threads << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Sampling and gradients

std::vector<TrainingExample> sample_negatives(Index item, Index attribute, std::size_t num_items,
                                              std::size_t num_attributes, const TrainConfig& cfg,
                                              Rng& rng) {
  std::vector<TrainingExample> out;
  out.reserve(cfg.neg_items + cfg.neg_attrs);
  if (cfg.neg_items > 0 && num_items < 2) throw UsageError("item corruption needs two items");
  if (cfg.neg_attrs > 0 && num_attributes < 2) throw UsageError("attribute corruption needs two attributes");
  for (std::size_t j = 0; j < cfg.neg_items; ++j)
    out.push_back({draw_other(item, num_items, rng), attribute, 0, 0.0});
  for (std::size_t j = 0; j < cfg.neg_attrs; ++j)
    out.push_back({item, draw_other(attribute, num_attributes, rng), 0, 0.0});
  return out;
}

std::span<double> SparseGradient::slot(std::unordered_map<Index, std::size_t>& slots,
                                       std::vector<Index>& order, Index key) {
  auto [it, inserted] = slots.try_emplace(key, rows_.size());
  if (inserted) {
    rows_.emplace_back(width_, 0.0);
    order.push_back(key);
  }
  return rows_[it->second];
}

std::span<const double> SparseGradient::find(const std::unordered_map<Index, std::size_t>& slots,
                                             Index key) const {
  auto it = slots.find(key);
  if (it == slots.end()) return {};
  return rows_[it->second];
}

void SparseGradient::add(const SparseGradient& other) {
  if (other.width_ != width_) throw UsageError("gradient width mismatch");
  for (Index i : other.item_order_) {
    auto src = other.item_grad(i);
    auto dst = item(i);
    for (std::size_t k = 0; k < width_; ++k) dst[k] += src[k];
  }
  for (Index a : other.attr_order_) {
    auto src = other.attribute_grad(a);
    auto dst = attribute(a);
    for (std::size_t k = 0; k < width_; ++k) dst[k] += src[k];
  }
}

LossAndGrads loss_and_grads_vector(const VectorModel& model, std::span<const TrainingExample> batch,
                                   const TrainConfig& cfg) {
  if (cfg.loss == LossKind::BoxBce) throw UsageError("box loss applied to a vector model");
  if (transform_for(cfg.loss) != model.transform())
    throw UsageError("loss does not match the model transform");
  const std::size_t d = model.dim();
  return batch_loss(batch, d, cfg, model.item_table(), model.attribute_table(),
                    [&](const TrainingExample& ex, double inv_n, SparseGradient& grads) {
                      auto u = model.item(ex.item);
                      auto v = model.attribute(ex.attribute);
                      double s = dot(u, v);
                      double loss = 0.0;
                      double dloss_ds = 0.0;
                      if (cfg.loss == LossKind::Hinge) {
                        double sign = ex.label ? 1.0 : -1.0;
                        double slack = cfg.margin - sign * s;
                        if (slack > 0) {
                          loss = slack;
                          dloss_ds = -sign;
                        }
                      } else {
                        // -ln sigmoid(s) = softplus(-s); -ln(1 - sigmoid(s)) = softplus(s).
                        loss = ex.label ? softplus(-s, 1.0) : softplus(s, 1.0);
                        dloss_ds = sigmoid(s) - (ex.label ? 1.0 : 0.0);
                      }
                      if (dloss_ds != 0.0) {
                        double g = dloss_ds * inv_n;
                        auto gu = grads.item(ex.item);
                        auto gv = grads.attribute(ex.attribute);
                        for (std::size_t k = 0; k < d; ++k) {
                          gu[k] += g * v[k];
                          gv[k] += g * u[k];
                        }
                      } else {
                        // Touch the rows so that regularization covers them.
                        grads.item(ex.item);
                        grads.attribute(ex.attribute);
                      }
                      return loss;
                    });
}

LossAndGrads loss_and_grads_box(const BoxModel& model, std::span<const TrainingExample> batch,
                                const TrainConfig& cfg) {
  if (cfg.loss != LossKind::BoxBce) throw UsageError("box models train with box_bce");
  const std::size_t d = model.dim();
  const auto& temps = model.temps();
  return batch_loss(batch, 2 * d, cfg, model.item_table(), model.attribute_table(),
                    [&](const TrainingExample& ex, double inv_n, SparseGradient& grads) {
                      BoxView outer = model.attribute(ex.attribute);
                      BoxView inner = model.item(ex.item);
                      auto ga = grads.attribute(ex.attribute);
                      auto gi = grads.item(ex.item);
                      // unit-scale gradient first; the loss slope depends on log P
                      thread_local std::vector<double> unit;
                      unit.assign(4 * d, 0.0);
                      std::span<double> u(unit);
                      double log_p = log_containment_grad(outer, inner, temps, 1.0, u.first(d), u.subspan(d, d),
                                                          u.subspan(2 * d, d), u.subspan(3 * d));
                      double loss = 0.0;
                      double dloss_dlogp = 0.0;
                      if (ex.label) {
                        loss = -log_p;
                        dloss_dlogp = -1.0;
                      } else {
                        double p = std::exp(log_p);
                        if (p >= 1.0 - kProbEpsilon) {
                          loss = -std::log(kProbEpsilon);
                        } else {
                          loss = -std::log1p(-p);
                          dloss_dlogp = p / (1.0 - p);
                        }
                      }
                      if (dloss_dlogp != 0.0) {
                        double c = dloss_dlogp * inv_n;
                        for (std::size_t k = 0; k < 2 * d; ++k) {
                          ga[k] += c * unit[k];
                          gi[k] += c * unit[2 * d + k];
                        }
                      }
                      return loss;
                    });
}

// ---------------------------------------------------------------------------
// Initialization and fitting

VectorModel init_vector_model(std::size_t num_items, std::size_t num_attributes, std::size_t dim,
                              Transform t, Rng& rng) {
  VectorModel model(num_items, num_attributes, dim, t);
  double r = 0.5 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> dist(-r, r);
  for (double& x : model.item_table().data()) x = dist(rng);
  for (double& x : model.attribute_table().data()) x = dist(rng);
  return model;
}

BoxModel init_box_model(std::size_t num_items, std::size_t num_attributes, std::size_t dim,
                        GumbelParams temps, Rng& rng) {
  BoxModel model(num_items, num_attributes, dim, temps);
  std::uniform_real_distribution<double> lo(-0.4, 0.1);
  std::uniform_real_distribution<double> width(0.2, 0.6);
  auto fill = [&](ParamTable& table) {
    for (std::size_t r = 0; r < table.rows(); ++r) {
      auto row = table.row(r);
      for (std::size_t k = 0; k < dim; ++k) {
        row[k] = lo(rng);
        row[dim + k] = row[k] + width(rng);
      }
    }
  };
  fill(model.item_table());
  fill(model.attribute_table());
  return model;
}

std::vector<double> train_in_place(VectorModel& model, const ObservationMatrix& data,
                                   const TrainConfig& cfg, Rng& rng, const EpochCallback& on_epoch) {
  check_config(cfg, ModelKind::Vector);
  return run_sgd(model, data, cfg, rng, on_epoch,
                 [](const VectorModel& m, std::span<const TrainingExample> b, const TrainConfig& c) {
                   return loss_and_grads_vector(m, b, c);
                 });
}

std::vector<double> train_in_place(BoxModel& model, const ObservationMatrix& data,
                                   const TrainConfig& cfg, Rng& rng, const EpochCallback& on_epoch) {
  check_config(cfg, ModelKind::Box);
  return run_sgd(model, data, cfg, rng, on_epoch,
                 [](const BoxModel& m, std::span<const TrainingExample> b, const TrainConfig& c) {
                   return loss_and_grads_box(m, b, c);
                 });
}

TrainedModel fit(const ObservationMatrix& data, const TrainConfig& cfg, ModelKind kind,
                 const EpochCallback& on_epoch) {
  check_config(cfg, kind);
  if (data.nnz() == 0) throw DataError("training data is empty");
  Rng rng(cfg.seed);
  if (kind == ModelKind::Vector) {
    auto model = init_vector_model(data.num_items(), data.num_attributes(), cfg.dims,
                                   transform_for(cfg.loss), rng);
    auto losses = train_in_place(model, data, cfg, rng, on_epoch);
    return {std::move(model), std::move(losses)};
  }
  auto model = init_box_model(data.num_items(), data.num_attributes(), cfg.dims, cfg.temps, rng);
  auto losses = train_in_place(model, data, cfg, rng, on_epoch);
  return {std::move(model), std::move(losses)};
}

// ---------------------------------------------------------------------------
// Random search

HyperGrid HyperGrid::published(ModelKind kind, std::size_t epochs, std::size_t trials) {
  HyperGrid g;
  g.batch_sizes = {128, 256, 512, 1024};
  g.learning_rates = {1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  g.reg_coeffs = {1e-4, 1e-3, 1e-2};
  g.neg_items = {50};
  g.neg_attrs = {20};
  g.epochs = {epochs};
  g.trials = trials;
  if (kind == ModelKind::Vector) {
    g.dims = {100};
    g.losses = {LossKind::Hinge, LossKind::CrossEntropy};
    g.betas = {1.0};
    g.taus = {1.0};
  } else {
    g.dims = {50};
    g.losses = {LossKind::BoxBce};
    g.betas = {1e-4, 1e-3, 1e-2, 1.0};
    g.taus = {0.1, 0.5, 1.0};
  }
  return g;
}

void check_grid(const HyperGrid& g) {
  if (g.trials == 0) throw UsageError("grid needs at least one trial");
  if (g.batch_sizes.empty() || g.learning_rates.empty() || g.reg_coeffs.empty() || g.neg_items.empty() ||
      g.neg_attrs.empty() || g.epochs.empty() || g.dims.empty() || g.losses.empty() || g.betas.empty() ||
      g.taus.empty() || g.margins.empty())
    throw UsageError("every grid candidate list must be nonempty");
}

HyperGrid parse_grid(std::istream& in) {
  HyperGrid g;
  g.margins.clear();
  auto counts = [](std::string_view v) { return parse_list<std::size_t>(v, parse_count); };
  auto reals = [](std::string_view v) { return parse_list<double>(v, parse_double); };
  for_each_line_kv(in, [&](std::string_view key, std::string_view value, std::size_t line_no) {
    if (key == "batch_size") g.batch_sizes = counts(value);
    else if (key == "learning_rate") g.learning_rates = reals(value);
    else if (key == "reg_coeff") g.reg_coeffs = reals(value);
    else if (key == "neg_items") g.neg_items = counts(value);
    else if (key == "neg_attrs") g.neg_attrs = counts(value);
    else if (key == "epochs") g.epochs = counts(value);
    else if (key == "dims") g.dims = counts(value);
    else if (key == "loss") g.losses = parse_list<LossKind>(value, parse_loss_kind);
    else if (key == "beta") g.betas = reals(value);
    else if (key == "tau") g.taus = reals(value);
    else if (key == "margin") g.margins = reals(value);
    else if (key == "trials") g.trials = parse_count(value);
    else if (key == "seed") g.seed = parse_u64(value);
    else if (key == "threads") g.threads = parse_count(value);
    else throw UsageError("unknown grid key '" + std::string(key) + "' on line " + std::to_string(line_no));
  });
  if (g.margins.empty()) g.margins = {1.0};
  if (g.betas.empty()) g.betas = {1.0};
  if (g.taus.empty()) g.taus = {1.0};
  check_grid(g);
  return g;
}

std::string format_grid(const HyperGrid& g) {
  auto c = [](std::size_t v) { return std::to_string(v); };
  auto r = [](double v) { return format_double(v); };
  auto l = [](LossKind k) { return std::string(loss_kind_name(k)); };
  std::ostringstream out;
  out << "batch_size=" << join(g.batch_sizes, c) << '\n'
      << "learning_rate=" << join(g.learning_rates, r) << '\n'
      << "reg_coeff=" << join(g.reg_coeffs, r) << '\n'
      << "neg_items=" << join(g.neg_items, c) << '\n'
      << "neg_attrs=" << join(g.neg_attrs, c) << '\n'
      << "epochs=" << join(g.epochs, c) << '\n'
      << "dims=" << join(g.dims, c) << '\n'
      << "loss=" << join(g.losses, l) << '\n'
      << "beta=" << join(g.betas, r) << '\n'
      << "tau=" << join(g.taus, r) << '\n'
      << "margin=" << join(g.margins, r) << '\n'
      << "trials=" << g.trials << '\n'
      << "seed=" << g.seed << '\n'
      << "threads=" << g.threads << '\n';
  return out.str();
}

double singleton_precision_at_1(const std::variant<VectorModel, BoxModel>& model,
                                std::span<const ValidationQuery> queries) {
  if (queries.empty()) throw UsageError("no validation queries");
  double sum = 0.0;
  for (const auto& vq : queries) {
    if (classify(vq.query) != TaskKind::Singleton) throw UsageError("validation queries must be singletons");
    std::vector<RankedItem> ranked;
    if (const auto* vm = std::get_if<VectorModel>(&model)) {
      Index a = vq.query.literals()[0].attribute;
      std::vector<double> scores(vm->num_items());
      for (Index i = 0; i < scores.size(); ++i) scores[i] = score_single(*vm, a, i);
      ranked = top_k(scores, 1);
    } else {
      ranked = rank_items_box(std::get<BoxModel>(model), vq.query, std::min<std::size_t>(1, std::get<BoxModel>(model).num_items()));
    }
    sum += precision_at_k(item_ids(ranked), vq.truth, 1);
  }
  return sum / static_cast<double>(queries.size());
}

SearchResult random_search(const ObservationMatrix& data, const HyperGrid& grid,
                           std::span<const ValidationQuery> val_queries, ModelKind kind) {
  check_grid(grid);
  if (val_queries.empty()) throw UsageError("random search needs validation queries");
  Rng rng(grid.seed);
  auto pick = [&](const auto& xs) {
    std::uniform_int_distribution<std::size_t> dist(0, xs.size() - 1);
    return xs[dist(rng)];
  };

  std::optional<SearchResult> best;
  std::vector<TrialResult> trials;
  double best_score = -1.0;
  for (std::size_t t = 0; t < grid.trials; ++t) {
    TrainConfig cfg;
    cfg.batch_size = pick(grid.batch_sizes);
    cfg.learning_rate = pick(grid.learning_rates);
    cfg.reg_coeff = pick(grid.reg_coeffs);
    cfg.neg_items = pick(grid.neg_items);
    cfg.neg_attrs = pick(grid.neg_attrs);
    cfg.epochs = pick(grid.epochs);
    cfg.dims = pick(grid.dims);
    cfg.loss = pick(grid.losses);
    cfg.temps.beta = pick(grid.betas);
    cfg.temps.tau = pick(grid.taus);
    cfg.margin = pick(grid.margins);
    cfg.seed = rng();
    cfg.threads = grid.threads;

    TrialResult trial{cfg, 0.0, false, {}};
    try {
      auto trained = fit(data, cfg, kind);
      trial.precision_at_1 = singleton_precision_at_1(trained.model, val_queries);
      if (trial.precision_at_1 > best_score) {
        best_score = trial.precision_at_1;
        best = SearchResult{cfg, std::move(trained.model), {}};
      }
    } catch (const Error& e) {
      trial.failed = true;
      trial.error = e.what();
    }
    trials.push_back(std::move(trial));
  }
  if (!best) throw DivergenceError("every random-search trial failed");
  best->trials = std::move(trials);
  return std::move(*best);
}

}  // namespace setemb
