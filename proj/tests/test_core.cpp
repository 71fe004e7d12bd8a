#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "setemb/core.hpp"
#include "setemb/errors.hpp"

using namespace setemb;

namespace {

EntityCatalog abc_catalog() { return EntityCatalog({"m0", "m1", "m2", "m3"}, {"a", "b", "c"}); }

// a = {0,1,2}, b = {1,2}, c = {3}
ObservationMatrix abc_truth() {
  return ObservationMatrix(MatrixKind::GroundTruth, 4, 3,
                           {{0, 0, 1}, {1, 0, 1}, {2, 0, 1}, {1, 1, 1}, {2, 1, 1}, {3, 2, 1}});
}

ObservationMatrix from_table(const oracle::Table& t, MatrixKind kind = MatrixKind::GroundTruth) {
  std::vector<Entry> e;
  for (Index i = 0; i < t.size(); ++i)
    for (Index a = 0; a < t[i].size(); ++a)
      if (t[i][a]) e.push_back({i, a, 1.0});
  return ObservationMatrix(kind, t.size(), t.empty() ? 0 : t[0].size(), std::move(e));
}

}  // namespace

TEST_CASE("catalog interns names densely and rejects duplicates") {
  EntityCatalog c;
  CHECK(c.intern_item("x") == 0);
  CHECK(c.intern_item("y") == 1);
  CHECK(c.intern_item("x") == 0);
  CHECK(c.intern_attribute("x") == 0);
  CHECK(c.find_item("y") == Index{1});
  CHECK_FALSE(c.find_attribute("y"));
  CHECK_THROWS_AS(EntityCatalog({"a", "a"}, {}), DataError);
  CHECK(EntityCatalog({"a"}, {"b"}).hash() != EntityCatalog({"b"}, {"a"}).hash());
  CHECK(EntityCatalog({"ab"}, {}).hash() != EntityCatalog({"a", "b"}, {}).hash());
}

TEST_CASE("observation matrix merges duplicates and keeps both views") {
  ObservationMatrix o(MatrixKind::Noisy, 3, 2, {{2, 1, 3}, {0, 0, 1}, {2, 1, 4}, {1, 0, 0}});
  CHECK(o.nnz() == 2);
  CHECK(o.duplicates_merged() == 1);
  CHECK(o.weight(2, 1) == 7);
  CHECK(o.weight(1, 0) == 0);
  CHECK(o.items_with(0).size() == 1);
  CHECK(o.row(2).size() == 1);

  ObservationMatrix g(MatrixKind::GroundTruth, 2, 1, {{0, 0, 5}});
  CHECK(g.weight(0, 0) == 1);

  CHECK_THROWS_AS(ObservationMatrix(MatrixKind::Noisy, 1, 1, {{1, 0, 1}}), DataError);
  CHECK_THROWS_AS(ObservationMatrix(MatrixKind::Noisy, 1, 1, {{0, 0, -1}}), DataError);
}

TEST_CASE("query construction validates literals") {
  CHECK_THROWS_AS(Query({}), QueryError);
  CHECK_THROWS_AS(Query({{0, true}}), QueryError);
  CHECK_THROWS_AS(Query({{0, false}, {0, true}}), QueryError);
  Query q({{0, false}, {1, true}});
  CHECK(q.positives() == std::vector<Index>{0});
  CHECK(q.negatives() == std::vector<Index>{1});
  CHECK_THROWS_AS(check_query_range(q, 1), QueryError);
}

TEST_CASE("query text round trip") {
  EntityCatalog c({"m"}, {"science fiction", "comedy", "war"});
  Query q = parse_query("  science fiction &!comedy& war ", c);
  CHECK(q.size() == 3);
  CHECK(format_query(q, c) == "science fiction & !comedy & war");
  CHECK(parse_query(format_query(q, c), c) == q);
  CHECK_THROWS_AS(parse_query("", c), QueryError);
  CHECK_THROWS_AS(parse_query("comedy & ", c), QueryError);
  try {
    parse_query("comedy & !western", c);
    FAIL("expected a QueryError");
  } catch (const QueryError& e) {
    CHECK(std::string(e.what()).find("western") != std::string::npos);
  }
}

TEST_CASE("task classification by literal shape") {
  CHECK(classify(Query::single(0)) == TaskKind::Singleton);
  CHECK(classify(Query({{0, false}, {1, false}})) == TaskKind::Intersection);
  CHECK(classify(Query({{0, false}, {1, true}})) == TaskKind::Difference);
  CHECK(classify(Query({{0, false}, {1, false}, {2, false}})) == TaskKind::TripleIntersection);
  CHECK(classify(Query({{0, false}, {1, false}, {2, true}})) == TaskKind::TripleDifference);
  CHECK_FALSE(classify(Query({{0, false}, {1, true}, {2, true}})));
  for (auto t : kAllTasks) CHECK(parse_task_name(task_name(t)) == t);
}

TEST_CASE("ground truth match on a hand example") {
  auto o = abc_truth();
  CHECK(ground_truth_match(Query::single(0), o) == ItemSet{0, 1, 2});
  CHECK(ground_truth_match(Query({{0, false}, {1, false}}), o) == ItemSet{1, 2});
  CHECK(ground_truth_match(Query({{0, false}, {1, true}}), o) == ItemSet{0});
  CHECK(ground_truth_match(Query({{0, false}, {2, false}}), o).empty());
}

TEST_CASE("rho") {
  auto o = abc_truth();
  CHECK(rho(Query::single(0), o) == 1.0);
  CHECK(rho(Query({{0, false}, {1, false}}), o) == doctest::Approx(1.0));  // {1,2} / |b|
  // a & !b: result {0}; atoms |a|=3, |!b|=2
  CHECK(rho(Query({{0, false}, {1, true}}), o) == doctest::Approx(0.5));
  ObservationMatrix empty_col(MatrixKind::GroundTruth, 2, 2, {{0, 0, 1}});
  CHECK_THROWS_AS(rho(Query::single(1), empty_col), DataError);
}

TEST_CASE("ground truth match and rho agree with a dense brute force") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> pick_m(1, 100), pick_n(3, 10);
  for (int trial = 0; trial < 200; ++trial) {
    auto t = oracle::random_table(pick_m(rng), pick_n(rng), 0.4, rng);
    auto o = from_table(t);
    std::uniform_int_distribution<unsigned> attr(0, t[0].size() - 1);
    std::set<unsigned> used;
    std::vector<oracle::Lit> lits;
    std::vector<Literal> ours;
    std::size_t len = 1 + trial % 3;
    while (lits.size() < len) {
      unsigned a = attr(rng);
      if (!used.insert(a).second) continue;
      bool neg = !lits.empty() && (rng() & 1);
      lits.push_back({a, neg});
      ours.push_back({a, neg});
    }
    Query q(ours);
    auto want = oracle::match(t, lits);
    CHECK(ground_truth_match(q, o) == ItemSet(want.begin(), want.end()));
    std::size_t smallest = t.size();
    for (const auto& l : lits) smallest = std::min(smallest, oracle::atom_size(t, l));
    if (smallest == 0)
      CHECK_THROWS_AS(rho(q, o), DataError);
    else
      CHECK(rho(q, o) == doctest::Approx(oracle::rho(t, lits)).epsilon(1e-12));
  }
}

TEST_CASE("hierarchy expansion adds ancestors") {
  // sci-fi -> fiction -> media
  HierarchyEdges h({{0, 1}, {1, 2}}, 3);
  CHECK(h.ancestors()[0] == std::vector<Index>{1, 2});
  ObservationMatrix o(MatrixKind::GroundTruth, 1, 3, {{0, 0, 1}});
  auto e = expand_with_hierarchy(o, h);
  CHECK(e.nnz() == 3);
  CHECK(e.weight(0, 1) == 1);
  CHECK(e.weight(0, 2) == 1);
  CHECK_THROWS_AS(HierarchyEdges({{0, 1}, {1, 0}}, 2), DataError);
  CHECK_THROWS_AS(HierarchyEdges({{0, 0}}, 1), DataError);
  CHECK_THROWS_AS(expand_with_hierarchy(ObservationMatrix(MatrixKind::Noisy, 1, 3, {}), h), UsageError);
}
