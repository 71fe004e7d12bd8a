#include "setemb/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "setemb/errors.hpp"
#include "setemb/hash.hpp"

namespace setemb {

namespace {

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

Index intern(std::vector<std::string>& names, std::map<std::string, Index, std::less<>>& index,
             std::string_view name) {
  if (auto it = index.find(name); it != index.end()) return it->second;
  if (names.size() >= std::numeric_limits<Index>::max()) throw DataError("catalog overflow");
  auto id = static_cast<Index>(names.size());
  names.emplace_back(name);
  index.emplace(std::string(name), id);
  return id;
}

void intersect_into(ItemSet& acc, std::span<const Index> other) {
  ItemSet out;
  out.reserve(std::min(acc.size(), other.size()));
  std::set_intersection(acc.begin(), acc.end(), other.begin(), other.end(),
                        std::back_inserter(out));
  acc.swap(out);
}

void subtract_into(ItemSet& acc, std::span<const Index> other) {
  ItemSet out;
  out.reserve(acc.size());
  std::set_difference(acc.begin(), acc.end(), other.begin(), other.end(),
                      std::back_inserter(out));
  acc.swap(out);
}

}  // namespace

// ---------------------------------------------------------------------------
// EntityCatalog

EntityCatalog::EntityCatalog(std::vector<std::string> items, std::vector<std::string> attributes) {
  for (const auto& name : items) {
    if (item_index_.count(name)) throw DataError("duplicate item id: " + name);
    intern(items_, item_index_, name);
  }
  for (const auto& name : attributes) {
    if (attribute_index_.count(name)) throw DataError("duplicate attribute id: " + name);
    intern(attributes_, attribute_index_, name);
  }
}

Index EntityCatalog::intern_item(std::string_view name) {
  return intern(items_, item_index_, name);
}

Index EntityCatalog::intern_attribute(std::string_view name) {
  return intern(attributes_, attribute_index_, name);
}

std::optional<Index> EntityCatalog::find_item(std::string_view name) const {
  if (auto it = item_index_.find(name); it != item_index_.end()) return it->second;
  return std::nullopt;
}

std::optional<Index> EntityCatalog::find_attribute(std::string_view name) const {
  if (auto it = attribute_index_.find(name); it != attribute_index_.end()) return it->second;
  return std::nullopt;
}

std::uint64_t EntityCatalog::hash() const {
  std::uint64_t h = kFnvOffset;
  // Separators keep ("ab","c") and ("a","bc") apart.
  for (const auto& s : items_) h = fnv1a(std::string_view("\x1f", 1), fnv1a(s, h));
  h = fnv1a(std::string_view("\x1e", 1), h);
  for (const auto& s : attributes_) h = fnv1a(std::string_view("\x1f", 1), fnv1a(s, h));
  return h;
}

// ---------------------------------------------------------------------------
// ObservationMatrix

ObservationMatrix::ObservationMatrix(MatrixKind kind, std::size_t num_items,
                                     std::size_t num_attributes, std::vector<Entry> entries)
    : kind_(kind), num_items_(num_items), num_attributes_(num_attributes) {
  for (const auto& e : entries) {
    if (e.item >= num_items || e.attribute >= num_attributes)
      throw DataError("observation entry out of range");
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight))
      throw DataError("observation weight must be finite and non-negative");
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.item != b.item ? a.item < b.item : a.attribute < b.attribute;
  });

  entries_.reserve(entries.size());
  for (const auto& e : entries) {
    if (!entries_.empty() && entries_.back().item == e.item &&
        entries_.back().attribute == e.attribute) {
      entries_.back().weight += e.weight;
      ++duplicates_merged_;
    } else {
      entries_.push_back(e);
    }
  }
  std::erase_if(entries_, [](const Entry& e) { return e.weight == 0.0; });
  if (kind_ == MatrixKind::GroundTruth)
    for (auto& e : entries_) e.weight = 1.0;

  row_offsets_.assign(num_items_ + 1, 0);
  col_offsets_.assign(num_attributes_ + 1, 0);
  for (const auto& e : entries_) {
    ++row_offsets_[e.item + 1];
    ++col_offsets_[e.attribute + 1];
  }
  for (std::size_t i = 0; i < num_items_; ++i) row_offsets_[i + 1] += row_offsets_[i];
  for (std::size_t a = 0; a < num_attributes_; ++a) col_offsets_[a + 1] += col_offsets_[a];

  row_data_.reserve(entries_.size());
  for (const auto& e : entries_) row_data_.push_back({e.attribute, e.weight});

  // Entries are item-sorted, so each column receives its items in ascending order.
  col_data_.resize(entries_.size());
  std::vector<std::size_t> cursor(col_offsets_.begin(), col_offsets_.end() - 1);
  for (const auto& e : entries_) col_data_[cursor[e.attribute]++] = e.item;
}

std::span<const AttributeWeight> ObservationMatrix::row(Index item) const {
  if (item >= num_items_) throw UsageError("item index out of range");
  return std::span<const AttributeWeight>(row_data_).subspan(
      row_offsets_[item], row_offsets_[item + 1] - row_offsets_[item]);
}

std::span<const Index> ObservationMatrix::items_with(Index attribute) const {
  if (attribute >= num_attributes_) throw UsageError("attribute index out of range");
  return std::span<const Index>(col_data_).subspan(
      col_offsets_[attribute], col_offsets_[attribute + 1] - col_offsets_[attribute]);
}

double ObservationMatrix::weight(Index item, Index attribute) const {
  auto r = row(item);
  auto it = std::lower_bound(r.begin(), r.end(), attribute,
                             [](const AttributeWeight& aw, Index a) { return aw.attribute < a; });
  return (it != r.end() && it->attribute == attribute) ? it->weight : 0.0;
}

// ---------------------------------------------------------------------------
// Query

Query::Query(std::vector<Literal> literals) : literals_(std::move(literals)) {
  if (literals_.empty()) throw QueryError("query has no literals");
  if (std::none_of(literals_.begin(), literals_.end(), [](const Literal& l) { return !l.negated; }))
    throw QueryError("query needs at least one positive literal");
  std::vector<Index> seen;
  for (const auto& l : literals_) seen.push_back(l.attribute);
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw QueryError("attribute appears twice in query");
}

std::vector<Index> Query::positives() const {
  std::vector<Index> out;
  for (const auto& l : literals_)
    if (!l.negated) out.push_back(l.attribute);
  return out;
}

std::vector<Index> Query::negatives() const {
  std::vector<Index> out;
  for (const auto& l : literals_)
    if (l.negated) out.push_back(l.attribute);
  return out;
}

void check_query_range(const Query& q, std::size_t num_attributes) {
  for (const auto& l : q.literals())
    if (l.attribute >= num_attributes) throw QueryError("query attribute index out of range");
}

Query parse_query(std::string_view text, const EntityCatalog& catalog) {
  if (trim(text).empty()) throw QueryError("empty query");
  std::vector<Literal> literals;
  std::size_t start = 0;
  while (true) {
    std::size_t amp = text.find('&', start);
    std::string_view token =
        trim(text.substr(start, amp == std::string_view::npos ? std::string_view::npos : amp - start));
    bool negated = false;
    if (!token.empty() && token.front() == '!') {
      negated = true;
      token = trim(token.substr(1));
    }
    if (token.empty()) throw QueryError("empty literal in query '" + std::string(text) + "'");
    auto a = catalog.find_attribute(token);
    if (!a) throw QueryError("unknown attribute '" + std::string(token) + "'");
    literals.push_back({*a, negated});
    if (amp == std::string_view::npos) break;
    start = amp + 1;
  }
  return Query(std::move(literals));
}

std::string format_query(const Query& q, const EntityCatalog& catalog) {
  std::string out;
  for (const auto& l : q.literals()) {
    if (!out.empty()) out += " & ";
    if (l.negated) out += '!';
    out += catalog.attribute(l.attribute);
  }
  return out;
}

std::optional<TaskKind> classify(const Query& q) {
  std::size_t pos = q.positives().size();
  std::size_t neg = q.size() - pos;
  if (pos == 1 && neg == 0) return TaskKind::Singleton;
  if (pos == 2 && neg == 0) return TaskKind::Intersection;
  if (pos == 1 && neg == 1) return TaskKind::Difference;
  if (pos == 3 && neg == 0) return TaskKind::TripleIntersection;
  if (pos == 2 && neg == 1) return TaskKind::TripleDifference;
  return std::nullopt;
}

std::string_view task_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::Singleton: return "singleton";
    case TaskKind::Intersection: return "intersection";
    case TaskKind::Difference: return "difference";
    case TaskKind::TripleIntersection: return "triple_intersection";
    case TaskKind::TripleDifference: return "triple_difference";
  }
  return "unknown";
}

std::optional<TaskKind> parse_task_name(std::string_view name) {
  for (auto k : kAllTasks)
    if (task_name(k) == name) return k;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Set semantics

ItemSet ground_truth_match(const Query& q, const ObservationMatrix& truth) {
  check_query_range(q, truth.num_attributes());
  auto pos = q.positives();
  // Start from the smallest positive column.
  std::sort(pos.begin(), pos.end(), [&](Index a, Index b) {
    return truth.items_with(a).size() < truth.items_with(b).size();
  });
  auto first = truth.items_with(pos.front());
  ItemSet acc(first.begin(), first.end());
  for (std::size_t j = 1; j < pos.size() && !acc.empty(); ++j) intersect_into(acc, truth.items_with(pos[j]));
  for (Index a : q.negatives()) {
    if (acc.empty()) break;
    subtract_into(acc, truth.items_with(a));
  }
  return acc;
}

double rho(const Query& q, const ObservationMatrix& truth) {
  check_query_range(q, truth.num_attributes());
  std::size_t smallest = std::numeric_limits<std::size_t>::max();
  for (const auto& l : q.literals()) {
    std::size_t size = truth.items_with(l.attribute).size();
    if (l.negated) size = truth.num_items() - size;
    smallest = std::min(smallest, size);
  }
  if (smallest == 0) throw DataError("rho undefined: most restrictive atom is empty");
  return static_cast<double>(ground_truth_match(q, truth).size()) / static_cast<double>(smallest);
}

// ---------------------------------------------------------------------------
// Hierarchy

HierarchyEdges::HierarchyEdges(std::vector<std::pair<Index, Index>> is_a,
                               std::size_t num_attributes)
    : is_a_(std::move(is_a)) {
  std::vector<std::vector<Index>> parents(num_attributes);
  for (auto [child, parent] : is_a_) {
    if (child >= num_attributes || parent >= num_attributes)
      throw DataError("hierarchy edge out of range");
    if (child == parent) throw DataError("hierarchy cycle: attribute is its own parent");
    parents[child].push_back(parent);
  }

  // Iterative DFS; state 1 = on stack, 2 = done.
  ancestors_.assign(num_attributes, {});
  std::vector<int> state(num_attributes, 0);
  for (Index root = 0; root < num_attributes; ++root) {
    if (state[root] != 0) continue;
    std::vector<std::pair<Index, std::size_t>> stack{{root, 0}};
    state[root] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < parents[node].size()) {
        Index p = parents[node][next++];
        if (state[p] == 1) throw DataError("hierarchy contains a cycle");
        if (state[p] == 0) {
          state[p] = 1;
          stack.emplace_back(p, 0);
        }
        continue;
      }
      auto& anc = ancestors_[node];
      for (Index p : parents[node]) {
        anc.push_back(p);
        anc.insert(anc.end(), ancestors_[p].begin(), ancestors_[p].end());
      }
      std::sort(anc.begin(), anc.end());
      anc.erase(std::unique(anc.begin(), anc.end()), anc.end());
      state[node] = 2;
      stack.pop_back();
    }
  }
}

ObservationMatrix expand_with_hierarchy(const ObservationMatrix& truth, const HierarchyEdges& h) {
  if (truth.kind() != MatrixKind::GroundTruth)
    throw UsageError("hierarchy expansion applies to ground-truth matrices");
  const auto& anc = h.ancestors();
  if (anc.size() > truth.num_attributes())
    throw DataError("hierarchy references attributes outside the matrix");
  std::vector<Entry> out(truth.entries().begin(), truth.entries().end());
  for (const auto& e : truth.entries()) {
    if (e.attribute >= anc.size()) continue;
    for (Index p : anc[e.attribute]) out.push_back({e.item, p, 1.0});
  }
  return ObservationMatrix(MatrixKind::GroundTruth, truth.num_items(), truth.num_attributes(),
                           std::move(out));
}

}  // namespace setemb
