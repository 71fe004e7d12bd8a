#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace setemb {

using Index = std::uint32_t;

/// Sorted, duplicate-free list of item indices.
using ItemSet = std::vector<Index>;

/// Items and attributes with dense indices assigned in insertion order.
class EntityCatalog {
 public:
  EntityCatalog() = default;
  /// Throws DataError if a name repeats within its namespace.
  EntityCatalog(std::vector<std::string> items, std::vector<std::string> attributes);

  /// Returns the index of `name`, adding it if absent.
  Index intern_item(std::string_view name);
  Index intern_attribute(std::string_view name);

  std::optional<Index> find_item(std::string_view name) const;
  std::optional<Index> find_attribute(std::string_view name) const;

  const std::string& item(Index i) const { return items_.at(i); }
  const std::string& attribute(Index a) const { return attributes_.at(a); }
  const std::vector<std::string>& items() const { return items_; }
  const std::vector<std::string>& attributes() const { return attributes_; }

  std::size_t num_items() const { return items_.size(); }
  std::size_t num_attributes() const { return attributes_.size(); }

  /// FNV-1a over both name lists; identifies a catalog inside checkpoints.
  std::uint64_t hash() const;

  friend bool operator==(const EntityCatalog& a, const EntityCatalog& b) {
    return a.items_ == b.items_ && a.attributes_ == b.attributes_;
  }

 private:
  std::vector<std::string> items_;
  std::vector<std::string> attributes_;
  std::map<std::string, Index, std::less<>> item_index_;
  std::map<std::string, Index, std::less<>> attribute_index_;
};

enum class MatrixKind { GroundTruth, Noisy };

struct Entry {
  Index item = 0;
  Index attribute = 0;
  double weight = 1.0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

struct AttributeWeight {
  Index attribute = 0;
  double weight = 0.0;
};

/// Sparse item x attribute matrix, immutable after construction.
///
/// Keeps both a row view (item -> attributes, used by training and lookup)
/// and a column view (attribute -> sorted items, used by set semantics).
/// Duplicate pairs are merged by summing weights and zero weights are
/// dropped. Ground-truth matrices store every weight as 1.
class ObservationMatrix {
 public:
  ObservationMatrix() = default;
  ObservationMatrix(MatrixKind kind, std::size_t num_items, std::size_t num_attributes,
                    std::vector<Entry> entries);

  MatrixKind kind() const { return kind_; }
  std::size_t num_items() const { return num_items_; }
  std::size_t num_attributes() const { return num_attributes_; }
  std::size_t nnz() const { return entries_.size(); }
  /// Number of input entries folded into an earlier identical pair.
  std::size_t duplicates_merged() const { return duplicates_merged_; }

  /// Entries sorted by (item, attribute).
  std::span<const Entry> entries() const { return entries_; }
  std::span<const AttributeWeight> row(Index item) const;
  std::span<const Index> items_with(Index attribute) const;
  /// 0 when the pair is absent.
  double weight(Index item, Index attribute) const;

 private:
  MatrixKind kind_ = MatrixKind::GroundTruth;
  std::size_t num_items_ = 0;
  std::size_t num_attributes_ = 0;
  std::size_t duplicates_merged_ = 0;
  std::vector<Entry> entries_;
  std::vector<AttributeWeight> row_data_;
  std::vector<std::size_t> row_offsets_;
  std::vector<Index> col_data_;
  std::vector<std::size_t> col_offsets_;
};

struct Literal {
  Index attribute = 0;
  bool negated = false;

  friend auto operator<=>(const Literal&, const Literal&) = default;
};

/// Conjunction of signed attribute literals. At least one literal is
/// positive and no attribute appears twice.
class Query {
 public:
  explicit Query(std::vector<Literal> literals);
  static Query single(Index attribute) { return Query({Literal{attribute, false}}); }

  std::span<const Literal> literals() const { return literals_; }
  std::size_t size() const { return literals_.size(); }
  std::vector<Index> positives() const;
  std::vector<Index> negatives() const;

  friend bool operator==(const Query&, const Query&) = default;

 private:
  std::vector<Literal> literals_;
};

/// Throws QueryError if any literal refers to an attribute >= num_attributes.
void check_query_range(const Query& q, std::size_t num_attributes);

/// Grammar: lit ('&' lit)*, lit := ['!'] name. Whitespace around tokens is ignored,
/// so names may contain inner spaces but not '&'.
Query parse_query(std::string_view text, const EntityCatalog& catalog);
std::string format_query(const Query& q, const EntityCatalog& catalog);

enum class TaskKind { Singleton, Intersection, Difference, TripleIntersection, TripleDifference };

inline constexpr TaskKind kAllTasks[] = {TaskKind::Singleton, TaskKind::Intersection,
                                         TaskKind::Difference, TaskKind::TripleIntersection,
                                         TaskKind::TripleDifference};

/// Task of a query by shape (positives, negatives); nullopt for shapes outside the five tasks.
std::optional<TaskKind> classify(const Query& q);
std::string_view task_name(TaskKind kind);
std::optional<TaskKind> parse_task_name(std::string_view name);

/// Items matching every positive literal and no negated literal.
ItemSet ground_truth_match(const Query& q, const ObservationMatrix& truth);

/// Result size relative to the most restrictive atom. A negated atom !a has
/// size m - |I(a)|. Throws DataError when that minimum is zero.
double rho(const Query& q, const ObservationMatrix& truth);

/// Acyclic (child, parent) isA relation between attributes.
class HierarchyEdges {
 public:
  HierarchyEdges() = default;
  /// Throws DataError on a cycle or an out-of-range attribute.
  HierarchyEdges(std::vector<std::pair<Index, Index>> is_a, std::size_t num_attributes);

  std::span<const std::pair<Index, Index>> edges() const { return is_a_; }
  bool empty() const { return is_a_.empty(); }
  /// Strict ancestors of every attribute under the transitive closure, sorted.
  const std::vector<std::vector<Index>>& ancestors() const { return ancestors_; }

 private:
  std::vector<std::pair<Index, Index>> is_a_;
  std::vector<std::vector<Index>> ancestors_;
};

/// Adds (i, a') for every ancestor a' of every observed (i, a).
ObservationMatrix expand_with_hierarchy(const ObservationMatrix& truth, const HierarchyEdges& h);

}  // namespace setemb
