#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "setemb/benchmark.hpp"
#include "setemb/boxmodel.hpp"
#include "setemb/training.hpp"
#include "setemb/vecmodel.hpp"
#include "suites.hpp"
#include "support.hpp"

using namespace setemb;

namespace {

VectorModel random_vectors(std::size_t m, std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 0.7);
  std::vector<double> u(m * d), v(n * d);
  for (auto& x : u) x = g(rng);
  for (auto& x : v) x = g(rng);
  return VectorModel(ParamTable(m, d, u), ParamTable(n, d, v), Transform::Sigmoid);
}

BoxModel random_boxes(std::size_t m, std::size_t n, std::size_t d, GumbelParams p, std::mt19937_64& rng) {
  auto fill = [&](std::size_t rows) {
    std::vector<double> data;
    for (std::size_t r = 0; r < rows; ++r) {
      auto b = support::random_box(d, rng, 0.3, 2.5);
      data.insert(data.end(), b.mins.begin(), b.mins.end());
      data.insert(data.end(), b.maxs.begin(), b.maxs.end());
    }
    return ParamTable(rows, 2 * d, data);
  };
  auto items = fill(m);
  auto attrs = fill(n);
  return BoxModel(std::move(items), std::move(attrs), p);
}

Query random_query(std::size_t n, std::mt19937_64& rng) {
  std::vector<Index> attrs(n);
  std::iota(attrs.begin(), attrs.end(), Index{0});
  std::shuffle(attrs.begin(), attrs.end(), rng);
  std::size_t len = 1 + rng() % std::min<std::size_t>(4, n);
  std::vector<Literal> lits;
  for (std::size_t j = 0; j < len; ++j) lits.push_back({attrs[j], j > 0 && rng() % 3 == 0});
  return Query(lits);
}

Query shuffled(const Query& q, std::mt19937_64& rng) {
  std::vector<Literal> lits(q.literals().begin(), q.literals().end());
  std::shuffle(lits.begin(), lits.end(), rng);
  if (lits.front().negated)
    std::iter_swap(lits.begin(), std::find_if(lits.begin(), lits.end(), [](auto& l) { return !l.negated; }));
  return Query(lits);
}

}  // namespace

TEST_CASE("vector scores are invariant under literal order") {
  std::mt19937_64 rng(101);
  auto model = random_vectors(20, 6, 5, rng);
  for (int t = 0; t < 200; ++t) {
    auto q = random_query(6, rng);
    auto p = shuffled(q, rng);
    for (Index i = 0; i < 20; ++i) {
      CHECK(score_probabilistic(model, p, i) == doctest::Approx(score_probabilistic(model, q, i)).epsilon(1e-14));
      CHECK(score_algebraic(model, p, i) == doctest::Approx(score_algebraic(model, q, i)).epsilon(1e-14));
    }
  }
}

TEST_CASE("raising one positive literal never lowers a probabilistic conjunction") {
  std::mt19937_64 rng(102);
  auto model = random_vectors(10, 5, 4, rng);
  for (int t = 0; t < 200; ++t) {
    auto q = random_query(5, rng);
    Index i = rng() % 10;
    Index a = q.positives()[rng() % q.positives().size()];
    double before = score_probabilistic(model, q, i);
    // move v_a toward u_i: only <u_i, v_a> changes among the literals of q at item i
    auto u = model.item(i);
    auto v = model.attribute_table().row(a);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += 0.3 * u[k];
    CHECK(score_probabilistic(model, q, i) >= before);
  }
}

TEST_CASE("a constant shift of all dot products keeps the ranking") {
  std::mt19937_64 rng(103);
  const std::size_t m = 50, n = 6, d = 4;
  auto base = random_vectors(m, n, d, rng);
  // an extra coordinate, 1 for every item and c for every attribute, shifts each <u_i, v_a> by c
  std::vector<double> u, v;
  for (Index i = 0; i < m; ++i) {
    auto r = base.item(i);
    u.insert(u.end(), r.begin(), r.end());
    u.push_back(1.0);
  }
  for (double c : {-2.0, 0.5, 1.5}) {
    v.clear();
    for (Index a = 0; a < n; ++a) {
      auto r = base.attribute(a);
      v.insert(v.end(), r.begin(), r.end());
      v.push_back(c);
    }
    VectorModel shifted(ParamTable(m, d + 1, u), ParamTable(n, d + 1, v), Transform::Sigmoid);
    for (Index a = 0; a < n; ++a) {
      auto q = Query::single(a);
      CHECK(score_single(shifted, a, 0) != score_single(base, a, 0));
      for (auto s : {VectorStrategy::Probabilistic, VectorStrategy::Algebraic})
        CHECK(item_ids(rank_items_vec(shifted, q, s, m)) == item_ids(rank_items_vec(base, q, s, m)));
    }
    // algebraic scores shift every item by c * (positives - negatives)
    for (int t = 0; t < 20; ++t) {
      auto q = random_query(n, rng);
      CHECK(item_ids(rank_items_vec(shifted, q, VectorStrategy::Algebraic, m)) ==
            item_ids(rank_items_vec(base, q, VectorStrategy::Algebraic, m)));
    }
  }
}

TEST_CASE("box scores are invariant under literal order and stay in the unit interval") {
  std::mt19937_64 rng(104);
  for (GumbelParams p : {GumbelParams{1e-3, 0.1}, GumbelParams{0.1, 0.5}, GumbelParams{1.0, 1.0}}) {
    auto model = random_boxes(8, 6, 3, p, rng);
    for (int t = 0; t < 100; ++t) {
      auto q = random_query(6, rng);
      auto r = shuffled(q, rng);
      for (Index i = 0; i < 8; ++i) {
        double a = score_compositional_box_raw(model, q, i);
        double b = score_compositional_box_raw(model, r, i);
        CHECK(std::abs(a - b) <= 1e-9);
        double s = score_compositional_box(model, q, i);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
      }
    }
  }
}

TEST_CASE("enlarging the outer box never lowers containment") {
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> grow(0.0, 0.5);
  for (int t = 0; t < 500; ++t) {
    std::size_t d = 1 + rng() % 5;
    GumbelParams p{std::pow(10.0, -static_cast<double>(rng() % 4)), 0.1 + 0.45 * static_cast<double>(rng() % 3)};
    auto outer = support::random_box(d, rng);
    auto inner = support::random_box(d, rng);
    double before = containment_prob(outer, inner, p);
    CHECK(before >= kProbEpsilon);
    CHECK(before <= 1 - kProbEpsilon);
    std::size_t k = rng() % d;
    if (rng() % 2)
      outer.mins[k] -= grow(rng);
    else
      outer.maxs[k] += grow(rng);
    CHECK(containment_prob(outer, inner, p) >= before);
  }
}

TEST_CASE("growing an attribute box never lowers a positive score") {
  std::mt19937_64 rng(106);
  auto model = random_boxes(6, 4, 2, {0.01, 0.5}, rng);
  for (int t = 0; t < 100; ++t) {
    Index a = rng() % 4;
    Query q = Query::single(a);
    std::vector<double> before(6);
    for (Index i = 0; i < 6; ++i) before[i] = score_compositional_box(model, q, i);
    auto row = model.attribute_table().row(a);
    std::size_t d = row.size() / 2;
    for (std::size_t k = 0; k < d; ++k) {
      row[k] -= 0.05;
      row[d + k] += 0.05;
    }
    for (Index i = 0; i < 6; ++i) CHECK(score_compositional_box(model, q, i) >= before[i]);
  }
}

TEST_CASE("analytic gradients match central differences") {
  auto v = suites::gradients(7, 25);
  INFO(v.detail);
  CHECK(v.pass);
}

TEST_CASE("Gumbel operations approach their hard counterparts at small temperature") {
  auto v = suites::limits(8, 200);
  INFO(v.detail);
  CHECK(v.pass);
}

TEST_CASE("training drives the loss down on a noiseless 5 x 3 dataset") {
  ObservationMatrix data(MatrixKind::Noisy, 5, 3,
                         {{0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {2, 1, 1}, {3, 2, 1}, {4, 2, 1}, {4, 0, 1}});
  TrainConfig c;
  c.epochs = 500;
  c.batch_size = 7;
  c.neg_items = 0;
  c.neg_attrs = 0;
  c.learning_rate = 0.5;
  c.dims = 4;
  SUBCASE("vector") {
    c.loss = LossKind::CrossEntropy;
    auto out = fit(data, c, ModelKind::Vector);
    CHECK(out.epoch_losses.back() < 0.1);
  }
  SUBCASE("box") {
    c.loss = LossKind::BoxBce;
    c.dims = 2;
    c.temps = {0.1, 0.1};
    auto out = fit(data, c, ModelKind::Box);
    CHECK(out.epoch_losses.back() < 0.1);
  }
}

TEST_CASE("completeness estimates lie in (0, 1]") {
  std::mt19937_64 rng(109);
  for (int t = 0; t < 50; ++t) {
    std::size_t m = 30 + rng() % 40, n = 1 + rng() % 6;
    std::vector<std::string> items, attrs;
    for (std::size_t i = 0; i < m; ++i) items.push_back("i" + std::to_string(i));
    for (std::size_t a = 0; a < n; ++a) attrs.push_back("a" + std::to_string(a));
    EntityCatalog cat(items, attrs);
    std::vector<Entry> eo, en;
    for (Index i = 0; i < m; ++i)
      for (Index a = 0; a < n; ++a) {
        if (rng() % 2) eo.push_back({i, a, 1});
        if (rng() % 3 == 0) en.push_back({i, a, 1});
      }
    ObservationMatrix o(MatrixKind::GroundTruth, m, n, eo);
    ObservationMatrix op(MatrixKind::Noisy, m, n, en);
    auto report = estimate_completeness(o, op, cat, 1);
    for (const auto& row : report.rows) {
      if (row.overlap == 0) continue;
      CHECK(row.completeness_o > 0.0);
      CHECK(row.completeness_o <= 1.0);
      CHECK(row.completeness_o_prime > 0.0);
      CHECK(row.completeness_o_prime <= 1.0);
    }
  }
}
