#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "setemb/boxgeom.hpp"
#include "setemb/boxmodel.hpp"
#include "setemb/core.hpp"
#include "setemb/vecmodel.hpp"

namespace setemb {

using Rng = std::mt19937_64;

enum class ModelKind { Vector, Box };
enum class LossKind { Hinge, CrossEntropy, BoxBce };

std::string_view model_kind_name(ModelKind k);
ModelKind parse_model_kind(std::string_view name);
std::string_view loss_kind_name(LossKind k);
LossKind parse_loss_kind(std::string_view name);

/// Transform implied by a vector loss: hinge pairs with identity, cross-entropy with sigmoid.
Transform transform_for(LossKind loss);

struct TrainConfig {
  std::size_t batch_size = 1024;
  double learning_rate = 0.1;
  double reg_coeff = 0.0;
  std::size_t neg_items = 1;
  std::size_t neg_attrs = 1;
  /// Required; there is no meaningful default.
  std::size_t epochs = 0;
  LossKind loss = LossKind::CrossEntropy;
  double margin = 1.0;
  std::uint64_t seed = 0;
  std::size_t dims = 16;
  GumbelParams temps{};
  /// Worker threads for batch gradients. Results do not depend on it.
  std::size_t threads = 1;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Throws UsageError on invalid values or a loss that does not fit `kind`.
void check_config(const TrainConfig& cfg, ModelKind kind);

/// Flat `key=value` text, one key per line, `#` comments allowed.
TrainConfig parse_train_config(std::istream& in);
std::string format_train_config(const TrainConfig& cfg);

struct TrainingExample {
  Index item = 0;
  Index attribute = 0;
  int label = 1;
  double weight = 1.0;

  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

/// Corrupts one side of a positive pair: `neg_items` draws of i' != i, then
/// `neg_attrs` draws of a' != a, uniform with replacement. Collisions with
/// observed positives are kept.
std::vector<TrainingExample> sample_negatives(Index item, Index attribute, std::size_t num_items,
                                              std::size_t num_attributes, const TrainConfig& cfg,
                                              Rng& rng);

/// Row gradients for the entities touched by a batch, in first-touch order.
class SparseGradient {
 public:
  explicit SparseGradient(std::size_t width = 0) : width_(width) {}

  std::size_t width() const { return width_; }
  /// Zero-initialized on first access. Returned spans stay valid for the
  /// lifetime of the gradient.
  std::span<double> item(Index i) { return slot(item_slots_, item_order_, i); }
  std::span<double> attribute(Index a) { return slot(attr_slots_, attr_order_, a); }

  const std::vector<Index>& touched_items() const { return item_order_; }
  const std::vector<Index>& touched_attributes() const { return attr_order_; }
  /// Empty span when the row was not touched.
  std::span<const double> item_grad(Index i) const { return find(item_slots_, i); }
  std::span<const double> attribute_grad(Index a) const { return find(attr_slots_, a); }

  void add(const SparseGradient& other);

 private:
  std::span<double> slot(std::unordered_map<Index, std::size_t>& slots, std::vector<Index>& order,
                         Index key);
  std::span<const double> find(const std::unordered_map<Index, std::size_t>& slots, Index key) const;

  std::size_t width_;
  std::vector<std::vector<double>> rows_;  // one buffer per row, never reallocated
  std::unordered_map<Index, std::size_t> item_slots_, attr_slots_;
  std::vector<Index> item_order_, attr_order_;
};

struct LossAndGrads {
  double loss = 0.0;
  SparseGradient grads;
};

/// Batch mean of the per-example loss plus reg_coeff * (|u_i|^2 + |v_a|^2)
/// for that example's rows; untouched rows are not regularized.
/// Hinge: max(0, margin - s<u,v>) with s = +1/-1 for positives/negatives.
/// Cross-entropy: -[y ln sigmoid(<u,v>) + (1-y) ln(1 - sigmoid(<u,v>))].
LossAndGrads loss_and_grads_vector(const VectorModel& model, std::span<const TrainingExample> batch,
                                   const TrainConfig& cfg);

/// Binary cross-entropy against P(a|i) = |box(a) ∩ box(i)| / |box(i)|.
/// Positives use -ln P computed from log volumes; negatives use
/// -ln(1 - P) with P capped at 1 - eps.
LossAndGrads loss_and_grads_box(const BoxModel& model, std::span<const TrainingExample> batch,
                                const TrainConfig& cfg);

/// Uniform in +-0.5/sqrt(d).
VectorModel init_vector_model(std::size_t num_items, std::size_t num_attributes, std::size_t dim,
                              Transform t, Rng& rng);
/// mins ~ U[-0.4, 0.1], maxs = mins + U[0.2, 0.6] per dimension.
BoxModel init_box_model(std::size_t num_items, std::size_t num_attributes, std::size_t dim,
                        GumbelParams temps, Rng& rng);

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// SGD over shuffled nonzero entries, `epochs` passes. Returns the per-epoch
/// mean loss. Throws DivergenceError on a non-finite batch loss.
std::vector<double> train_in_place(VectorModel& model, const ObservationMatrix& data,
                                   const TrainConfig& cfg, Rng& rng, const EpochCallback& on_epoch = {});
std::vector<double> train_in_place(BoxModel& model, const ObservationMatrix& data,
                                   const TrainConfig& cfg, Rng& rng, const EpochCallback& on_epoch = {});

struct TrainedModel {
  std::variant<VectorModel, BoxModel> model;
  std::vector<double> epoch_losses;
};

/// Initializes from cfg.seed and trains. Fully determined by (data, cfg, kind).
TrainedModel fit(const ObservationMatrix& data, const TrainConfig& cfg, ModelKind kind,
                 const EpochCallback& on_epoch = {});

/// Candidate values for random search. Each trial draws every field uniformly.
struct HyperGrid {
  std::vector<std::size_t> batch_sizes;
  std::vector<double> learning_rates;
  std::vector<double> reg_coeffs;
  std::vector<std::size_t> neg_items;
  std::vector<std::size_t> neg_attrs;
  std::vector<std::size_t> epochs;
  std::vector<std::size_t> dims;
  std::vector<LossKind> losses;
  std::vector<double> betas;
  std::vector<double> taus;
  std::vector<double> margins{1.0};
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  /// The published search space: batch {128..1024}, lr {1e-5..1}, reg {1e-4..1e-2},
  /// beta {1e-4, 1e-3, 1e-2, 1}, tau {0.1, 0.5, 1}; 100-d vectors, 50-d boxes.
  static HyperGrid published(ModelKind kind, std::size_t epochs, std::size_t trials);
};

/// Throws UsageError on an empty candidate list or zero trials.
void check_grid(const HyperGrid& grid);

/// `key=v1,v2,...` lines; keys match the HyperGrid fields.
HyperGrid parse_grid(std::istream& in);
std::string format_grid(const HyperGrid& grid);

struct ValidationQuery {
  Query query;
  ItemSet truth;
};

struct TrialResult {
  TrainConfig config;
  double precision_at_1 = 0.0;
  bool failed = false;
  std::string error;
};

struct SearchResult {
  TrainConfig best_config;
  std::variant<VectorModel, BoxModel> best_model;
  std::vector<TrialResult> trials;
};

/// Mean precision@1 of singleton scores over the validation queries.
double singleton_precision_at_1(const std::variant<VectorModel, BoxModel>& model,
                                std::span<const ValidationQuery> queries);

/// Trains `grid.trials` sampled configurations and keeps the best by
/// singleton precision@1 (earliest trial wins ties). Failed trials are
/// recorded; throws only if every trial fails.
SearchResult random_search(const ObservationMatrix& data, const HyperGrid& grid,
                           std::span<const ValidationQuery> val_queries, ModelKind kind);

}  // namespace setemb
