#include <doctest.h>

#include <cmath>
#include <sstream>

#include "premsel/learner.hpp"
#include "premsel/rng.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace premsel;
using namespace premsel::testing;

namespace {

TrainingSet dense_1d(std::vector<double> values, std::vector<int> labels) {
  TrainingSet ts;
  for (std::size_t i = 0; i < values.size(); ++i) {
    ts.examples.push_back(sv({{0, values[i]}}, 1));
    ts.labels.push_back(labels[i]);
    ts.provenance.emplace_back("t", "p" + std::to_string(i));
  }
  return ts;
}

std::vector<BruteRow> to_brute(const TrainingSet& ts, std::span<const GradientPair> grad) {
  std::vector<BruteRow> rows(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    for (const auto& e : ts.examples[i].entries) rows[i].values[e.col] = e.value;
    rows[i].g = grad[i].g;
    rows[i].h = grad[i].h;
  }
  return rows;
}

double training_log_loss(const Model& model, const TrainingSet& ts) {
  double total = 0;
  for (std::size_t i = 0; i < ts.size(); ++i)
    total += log_loss(model.base_score, ts.labels[i]);
  return total;  // only used for the empty-forest baseline
}

}  // namespace

TEST_CASE("logistic gradient and hessian at zero") {
  auto [g1, h1] = logistic_grad_hess(0.0, 1);
  CHECK(g1 == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(h1 == doctest::Approx(0.25).epsilon(1e-12));
  auto [g0, h0] = logistic_grad_hess(0.0, 0);
  CHECK(g0 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(h0 == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("gradients match finite differences of the log loss") {
  Rng rng(404);
  for (int i = 0; i < 200; ++i) {
    double z = rng.unit() * 20.0 - 10.0;
    int label = static_cast<int>(rng.below(2));
    auto [g, h] = logistic_grad_hess(z, label);
    CHECK(std::abs(g - fd_gradient(z, label, 1e-4)) < 1e-6);
    CHECK(std::abs(h - fd_hessian(z, label, 1e-4)) < 1e-4);
  }
}

TEST_CASE("best split on the separable 1-D fixture") {
  TrainingSet ts = dense_1d({1, 2, 3, 4}, {1, 1, 0, 0});
  std::vector<GradientPair> grad(4);
  for (std::size_t i = 0; i < 4; ++i) grad[i] = logistic_grad_hess(0.0, ts.labels[i]);
  ColumnMatrix matrix = ColumnMatrix::build(ts.examples);
  std::vector<std::uint32_t> rows{0, 1, 2, 3};
  auto split = best_split(matrix, rows, grad, 0.0, 0.0);
  REQUIRE(split.has_value());
  CHECK(split->column == 0);
  CHECK(split->threshold == doctest::Approx(2.5).epsilon(1e-12));
  // brute force agrees over all three candidate thresholds
  auto brute = brute_best_split(to_brute(ts, grad), 1, 0.0, 0.0);
  REQUIRE(brute.has_value());
  CHECK(brute->threshold == split->threshold);
  CHECK(brute->gain == split->gain);
}

TEST_CASE("no split when labels agree or points coincide") {
  {
    TrainingSet ts = dense_1d({1, 2, 3}, {1, 1, 1});
    std::vector<GradientPair> grad(3);
    for (std::size_t i = 0; i < 3; ++i) grad[i] = logistic_grad_hess(0.0, 1);
    ColumnMatrix matrix = ColumnMatrix::build(ts.examples);
    std::vector<std::uint32_t> rows{0, 1, 2};
    CHECK(!best_split(matrix, rows, grad, 0.0, 0.0).has_value());
  }
  {
    TrainingSet ts = dense_1d({2, 2}, {1, 0});
    std::vector<GradientPair> grad(2);
    grad[0] = logistic_grad_hess(0.0, 1);
    grad[1] = logistic_grad_hess(0.0, 0);
    ColumnMatrix matrix = ColumnMatrix::build(ts.examples);
    std::vector<std::uint32_t> rows{0, 1};
    CHECK(!best_split(matrix, rows, grad, 0.0, 0.0).has_value());
  }
}

TEST_CASE("split search equals brute force on random sparse data") {
  Rng rng(777);
  for (int iteration = 0; iteration < 120; ++iteration) {
    std::size_t n_rows = 2 + rng.below(30);
    std::uint32_t n_cols = 1 + static_cast<std::uint32_t>(rng.below(8));
    TrainingSet ts;
    std::vector<GradientPair> grad(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
      std::vector<SvEntry> entries;
      for (std::uint32_t c = 0; c < n_cols; ++c)
        if (rng.unit() < 0.7)
          entries.push_back({c, static_cast<double>(1 + rng.below(5))});
      ts.examples.push_back(sv(std::move(entries), n_cols));
      int label = static_cast<int>(rng.below(2));
      ts.labels.push_back(label);
      double margin = rng.unit() * 4.0 - 2.0;
      grad[r] = logistic_grad_hess(margin, label);
    }
    double lambda = rng.unit() < 0.5 ? 0.0 : 1.0;
    double mcw = rng.unit() < 0.5 ? 0.0 : 0.3;
    ColumnMatrix matrix = ColumnMatrix::build(ts.examples);
    std::vector<std::uint32_t> rows(n_rows);
    for (std::uint32_t r = 0; r < n_rows; ++r) rows[r] = r;
    auto got = best_split(matrix, rows, grad, lambda, mcw);
    auto expected = brute_best_split(to_brute(ts, grad), n_cols, lambda, mcw);
    REQUIRE(got.has_value() == expected.has_value());
    if (got) {
      CHECK(got->column == expected->column);
      CHECK(got->threshold == expected->threshold);
      CHECK(got->default_left == expected->default_left);
      CHECK(got->gain == expected->gain);
    }
  }
}

TEST_CASE("closed-form Newton step on the all-positive fixture") {
  TrainingSet ts;
  for (int i = 0; i < 4; ++i) {
    ts.examples.push_back(sv({{0, 1.0}}, 1));
    ts.labels.push_back(1);
    ts.provenance.emplace_back("t", "p");
  }
  ModelParams params;
  params.number_of_trees = 1;
  params.max_depth = 0;
  params.eta = 0.2;
  params.lambda = 1.0;
  params.base_score = 0.0;
  Model model = train_gbdt(ts, params);
  REQUIRE(model.trees.size() == 1);
  REQUIRE(model.trees[0].nodes.size() == 1);
  // leaf weight -G/(H+lambda) = -(-0.5*4)/(0.25*4+1) = 1.0, scaled by eta
  CHECK(model.trees[0].nodes[0].weight == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(model.predict(ts.examples[0]) == doctest::Approx(sigmoid(0.2)).epsilon(1e-12));
}

TEST_CASE("degenerate trainings") {
  TrainingSet ts;
  ts.examples.push_back(sv({{0, 1.0}}, 1));
  ts.labels.push_back(1);
  ts.provenance.emplace_back("t", "p");

  ModelParams none;
  none.number_of_trees = 0;
  Model base_only = train_gbdt(ts, none);
  CHECK(base_only.trees.empty());
  CHECK(base_only.predict(ts.examples[0]) == doctest::Approx(sigmoid(10.0)));

  // single-class without an override trains no trees
  ModelParams some;
  some.number_of_trees = 5;
  Model still_base = train_gbdt(ts, some);
  CHECK(still_base.trees.empty());

  TrainingSet empty;
  CHECK_THROWS_AS(train_gbdt(empty, none), Error);
}

TEST_CASE("base score is the clamped log odds") {
  TrainingSet ts;
  for (int i = 0; i < 3; ++i) {
    ts.examples.push_back(sv({{0, 1.0}}, 1));
    ts.labels.push_back(i < 1 ? 1 : 0);
    ts.provenance.emplace_back("t", "p");
  }
  ModelParams params;
  params.number_of_trees = 0;
  Model model = train_gbdt(ts, params);
  CHECK(model.base_score == doctest::Approx(std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("separable fixture halves its log loss and mostly descends") {
  // two disjoint columns mark the classes
  TrainingSet ts;
  Rng rng(11);
  for (int i = 0; i < 40; ++i) {
    bool positive = i % 2 == 0;
    std::vector<SvEntry> entries;
    entries.push_back(positive ? SvEntry{0, 1.0 + rng.below(3)} : SvEntry{1, 1.0 + rng.below(3)});
    ts.examples.push_back(sv(std::move(entries), 2));
    ts.labels.push_back(positive ? 1 : 0);
    ts.provenance.emplace_back("t", "p" + std::to_string(i));
  }
  ModelParams params;
  params.number_of_trees = 50;
  params.max_depth = 3;
  params.eta = 0.2;
  params.lambda = 1.0;
  params.min_child_weight = 0.5;
  Model model = train_gbdt(ts, params);

  // replay margins tree by tree to watch the loss trajectory
  std::vector<double> margins(ts.size(), model.base_score);
  auto loss_now = [&] {
    double total = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) total += log_loss(margins[i], ts.labels[i]);
    return total;
  };
  double initial = loss_now();
  double previous = initial;
  int non_increasing = 0;
  for (const auto& tree : model.trees) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      std::int32_t node = 0;
      while (!tree.nodes[node].leaf) {
        auto v = ts.examples[i].find(tree.nodes[node].column);
        node = (v ? *v < tree.nodes[node].threshold : tree.nodes[node].default_left)
                   ? tree.nodes[node].left
                   : tree.nodes[node].right;
      }
      margins[i] += tree.nodes[node].weight;
    }
    double now = loss_now();
    if (now <= previous) ++non_increasing;
    previous = now;
  }
  CHECK(previous < 0.5 * initial);
  CHECK(non_increasing >= static_cast<int>(0.95 * model.trees.size()));
}

TEST_CASE("training is deterministic across worker counts") {
  Rng rng(55);
  TrainingSet ts;
  for (int i = 0; i < 60; ++i) {
    std::vector<SvEntry> entries;
    for (std::uint32_t c = 0; c < 6; ++c)
      if (rng.unit() < 0.6) entries.push_back({c, static_cast<double>(1 + rng.below(4))});
    ts.examples.push_back(sv(std::move(entries), 6));
    ts.labels.push_back(static_cast<int>(rng.below(2)));
    ts.provenance.emplace_back("t", "p" + std::to_string(i));
  }
  ModelParams one;
  one.number_of_trees = 20;
  one.max_depth = 4;
  one.min_child_weight = 0.0;
  ModelParams four = one;
  four.workers = 4;
  Model m1 = train_gbdt(ts, one);
  Model m4 = train_gbdt(ts, four);
  std::ostringstream s1, s4;
  m1.save(s1);
  m4.save(s4);
  CHECK(s1.str() == s4.str());
}

TEST_CASE("prediction stays in the unit interval and respects defaults") {
  Model empty;
  CHECK(empty.predict(sv({}, 0)) == doctest::Approx(0.5));

  Rng rng(606);
  TrainingSet ts;
  for (int i = 0; i < 30; ++i) {
    std::vector<SvEntry> entries;
    for (std::uint32_t c = 0; c < 4; ++c)
      if (rng.unit() < 0.5) entries.push_back({c, static_cast<double>(1 + rng.below(3))});
    ts.examples.push_back(sv(std::move(entries), 4));
    ts.labels.push_back(static_cast<int>(rng.below(2)));
    ts.provenance.emplace_back("t", "p");
  }
  ModelParams params;
  params.number_of_trees = 10;
  params.max_depth = 3;
  params.min_child_weight = 0.0;
  Model model = train_gbdt(ts, params);
  for (int i = 0; i < 100; ++i) {
    std::vector<SvEntry> entries;
    for (std::uint32_t c = 0; c < 4; ++c)
      if (rng.unit() < 0.5) entries.push_back({c, static_cast<double>(rng.below(6))});
    double p = model.predict(sv(std::move(entries), 4));
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
  CHECK_THROWS_AS(model.predict(sv({}, 9)), Error);
}

TEST_CASE("model files round-trip bit-exactly") {
  Rng rng(99);
  TrainingSet ts;
  for (int i = 0; i < 50; ++i) {
    std::vector<SvEntry> entries;
    for (std::uint32_t c = 0; c < 5; ++c)
      if (rng.unit() < 0.6) entries.push_back({c, rng.unit() * 7.0});
    ts.examples.push_back(sv(std::move(entries), 5));
    ts.labels.push_back(static_cast<int>(rng.below(2)));
    ts.provenance.emplace_back("t", "p");
  }
  ModelParams params;
  params.number_of_trees = 15;
  params.max_depth = 4;
  params.min_child_weight = 0.0;
  Model model = train_gbdt(ts, params);

  std::ostringstream out;
  model.save(out);
  std::istringstream in(out.str());
  Model loaded = Model::load(in);
  std::ostringstream again;
  loaded.save(again);
  CHECK(out.str() == again.str());
  for (const auto& row : ts.examples) CHECK(model.predict(row) == loaded.predict(row));

  // predict_pair agrees with predict on the materialized concatenation
  TrainingSet pair_ts;
  Corpus corpus = chain_corpus(4, 1);
  pair_ts.examples.push_back(corpus.pair_vector("a3", "a0"));
  pair_ts.examples.push_back(corpus.pair_vector("a3", "a1"));
  pair_ts.labels = {1, 0};
  pair_ts.provenance = {{"a3", "a0"}, {"a3", "a1"}};
  ModelParams pp;
  pp.number_of_trees = 4;
  pp.max_depth = 2;
  pp.min_child_weight = 0.0;
  Model pair_model = train_gbdt(pair_ts, pp);
  CHECK(pair_model.predict_pair(corpus.feature_vector("a3"), corpus.feature_vector("a0")) ==
        pair_model.predict(corpus.pair_vector("a3", "a0")));
}

TEST_CASE("knn votes follow the nearest proved theorems") {
  // t4 duplicates t1's statement; t2 and t3 are unrelated proved theorems
  std::string text =
      "fof(p1, axiom, w(k)).\n"
      "fof(p2, axiom, v(k)).\n"
      "fof(p3, axiom, y(k)).\n"
      "fof(t1, axiom, u(k, k)).\n"
      "fof(t2, axiom, w(w2(k))).\n"
      "fof(t3, axiom, v(v2(k))).\n"
      "fof(t4, axiom, u(k, k)).\n";
  Corpus corpus = Corpus::build(parse_statements(text),
                                {"p1", "p2", "p3", "t1", "t2", "t3", "t4"},
                                {"t1", "t2", "t3", "t4"});
  ProofDb db;
  db.update(std::vector<Proof>{{"t1", {"p1"}}, {"t2", {"p2"}}, {"t3", {"p3"}}});

  auto scores = knn_rank("t4", corpus, db, 1);
  REQUIRE(scores.count("p1"));  // the duplicate's premises get the votes
  CHECK(scores.at("p1") > 0.5);
  CHECK(!scores.count("p2"));
  CHECK(!scores.count("p3"));

  CHECK(knn_rank("t4", corpus, ProofDb{}, 1).empty());
  // k larger than the db behaves as k = |proved|
  CHECK(knn_rank("t4", corpus, db, 50) == knn_rank("t4", corpus, db, 3));
}

TEST_CASE("grown trees agree with recursive best_split application") {
  Rng rng(2718);
  TrainingSet ts;
  std::uint32_t n_cols = 5;
  for (int i = 0; i < 80; ++i) {
    std::vector<SvEntry> entries;
    for (std::uint32_t c = 0; c < n_cols; ++c)
      if (rng.unit() < 0.55) entries.push_back({c, static_cast<double>(1 + rng.below(6))});
    ts.examples.push_back(sv(std::move(entries), n_cols));
    ts.labels.push_back(static_cast<int>(rng.below(2)));
    ts.provenance.emplace_back("t", "p");
  }
  ModelParams params;
  params.number_of_trees = 1;
  params.max_depth = 3;
  params.lambda = 1.0;
  params.min_child_weight = 0.5;
  Model model = train_gbdt(ts, params);
  REQUIRE(model.trees.size() == 1);
  const Tree& tree = model.trees[0];

  std::vector<GradientPair> grad(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i)
    grad[i] = logistic_grad_hess(model.base_score, ts.labels[i]);
  ColumnMatrix matrix = ColumnMatrix::build(ts.examples);

  // Re-derive every internal node with the public single-node kernel.
  std::function<void(std::int32_t, std::vector<std::uint32_t>, std::uint32_t)> walk =
      [&](std::int32_t index, std::vector<std::uint32_t> rows, std::uint32_t depth) {
        const TreeNode& node = tree.nodes[index];
        auto split = rows.size() >= 2 && depth < params.max_depth
                         ? best_split(matrix, rows, grad, params.lambda, params.min_child_weight)
                         : std::nullopt;
        if (node.leaf) {
          CHECK((!split.has_value() || depth >= params.max_depth));
          double g = 0, h = 0;
          for (std::uint32_t r : rows) {
            g += grad[r].g;
            h += grad[r].h;
          }
          CHECK(node.weight == params.eta * (-g / (h + params.lambda)));
          return;
        }
        REQUIRE(split.has_value());
        CHECK(node.column == split->column);
        CHECK(node.threshold == split->threshold);
        CHECK(node.default_left == split->default_left);
        std::vector<std::uint32_t> left, right;
        for (std::uint32_t r : rows) {
          auto v = ts.examples[r].find(node.column);
          bool go_left = v ? *v < node.threshold : node.default_left;
          (go_left ? left : right).push_back(r);
        }
        walk(node.left, std::move(left), depth + 1);
        walk(node.right, std::move(right), depth + 1);
      };
  std::vector<std::uint32_t> all(ts.size());
  for (std::uint32_t r = 0; r < all.size(); ++r) all[r] = r;
  walk(0, std::move(all), 0);
}

TEST_CASE("prediction is monotone in the base score") {
  Rng rng(707);
  TrainingSet ts;
  for (int i = 0; i < 20; ++i) {
    std::vector<SvEntry> entries;
    for (std::uint32_t c = 0; c < 3; ++c)
      if (rng.unit() < 0.6) entries.push_back({c, static_cast<double>(1 + rng.below(4))});
    ts.examples.push_back(sv(std::move(entries), 3));
    ts.labels.push_back(static_cast<int>(rng.below(2)));
    ts.provenance.emplace_back("t", "p");
  }
  ModelParams params;
  params.number_of_trees = 6;
  params.max_depth = 2;
  params.min_child_weight = 0.0;
  Model low = train_gbdt(ts, params);
  Model high = low;
  high.base_score += 1.0;
  for (const auto& row : ts.examples) CHECK(high.predict(row) > low.predict(row));
}

TEST_CASE("empty-forest loss helper sanity") {
  TrainingSet ts = dense_1d({1, 2}, {1, 0});
  Model model;
  model.base_score = 0;
  CHECK(training_log_loss(model, ts) == doctest::Approx(2 * std::log(2.0)));
}
