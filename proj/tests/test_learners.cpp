#include "doctest.h"

#include <cmath>
#include <random>

#include "iebsm/learners.hpp"
#include "support.hpp"

using namespace iebsm;
using namespace iebsm::learners;
using testing_support::gaussian_blobs;
using testing_support::numeric_schema;

TEST_CASE("online GNB running moments") {
  const auto schema = numeric_schema(1, 2);
  OnlineGaussianNB nb(schema);
  nb.learn_one({{1.0}, 0, 0});
  CHECK(nb.stats().moments(0, 0).mean == 1.0);
  CHECK(nb.stats().class_count(0) == 1);
  nb.learn_one({{3.0}, 0, 1});
  CHECK(nb.stats().moments(0, 0).mean == 2.0);
  CHECK(nb.stats().moments(0, 0).variance() == 2.0);
}

TEST_CASE("GNB variance floor keeps constant features finite") {
  const auto schema = numeric_schema(2, 2);
  std::vector<Instance> batch;
  for (int i = 0; i < 10; ++i) batch.push_back({{1.0, double(i)}, ClassIndex(i % 2), std::uint64_t(i)});
  BatchGaussianNB nb(schema);
  nb.fit(batch);
  CHECK(nb.stats().floored_variance(0, 0) > 0.0);
  const auto p = nb.predict(std::vector<double>{1.0, 3.0});
  for (double s : p.scores) CHECK(std::isfinite(s));
  const auto q = nb.predict(std::vector<double>{1.5, 3.0});
  for (double s : q.scores) CHECK(std::isfinite(s));
}

TEST_CASE("batch and online GNB agree on moments") {
  const auto schema = numeric_schema(10, 5);
  std::mt19937_64 rng(31);
  std::vector<Instance> data(10000);
  std::uniform_int_distribution<ClassIndex> cls(0, 4);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i].y = cls(rng);
    data[i].x.resize(10);
    for (std::size_t f = 0; f < 10; ++f) data[i].x[f] = 1e3 * f + 10.0 * data[i].y + (f + 1) * noise(rng);
  }
  OnlineGaussianNB online(schema);
  for (const auto& inst : data) online.learn_one(inst);
  BatchGaussianNB batch(schema);
  batch.fit(data);
  for (ClassIndex c = 0; c < 5; ++c) {
    for (std::size_t f = 0; f < 10; ++f) {
      CHECK(std::abs(online.stats().moments(c, f).mean - batch.stats().moments(c, f).mean) < 1e-9);
      CHECK(std::abs(online.stats().moments(c, f).variance() - batch.stats().moments(c, f).variance()) < 1e-6);
    }
  }
}

TEST_CASE("softmax gradient matches central differences") {
  std::mt19937_64 rng(32);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + trial % 5, d = 1 + trial % 7;
    LinearParams p(k, d);
    for (auto& w : p.weights) w = n(rng);
    for (auto& b : p.intercepts) b = n(rng);
    std::vector<double> x(d);
    for (auto& v : x) v = 2.0 * n(rng);
    const ClassIndex y = trial % k;
    const auto g = softmax_gradient(p, x, y, 1.0);
    const double h = 1e-5;
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
      auto up = p, down = p;
      up.weights[i] += h;
      down.weights[i] -= h;
      const double fd = (softmax_loss(up, x, y, 1.0) - softmax_loss(down, x, y, 1.0)) / (2 * h);
      CHECK(std::abs(fd - g.weights[i]) / std::max(1.0, std::abs(fd)) < 1e-5);
    }
    for (std::size_t c = 0; c < k; ++c) {
      auto up = p, down = p;
      up.intercepts[c] += h;
      down.intercepts[c] -= h;
      const double fd = (softmax_loss(up, x, y, 1.0) - softmax_loss(down, x, y, 1.0)) / (2 * h);
      CHECK(std::abs(fd - g.intercepts[c]) / std::max(1.0, std::abs(fd)) < 1e-5);
    }
  }
}

TEST_CASE("OLR first step moves the true class toward x") {
  const auto schema = numeric_schema(2, 3);
  OnlineLogisticRegression lr(schema);
  CHECK(lr.predict(std::vector<double>{1.0, 2.0}).scores[0] == doctest::Approx(1.0 / 3));
  lr.learn_one({{1.0, 2.0}, 1, 0});
  lr.learn_one({{3.0, -1.0}, 1, 1});
  const auto& p = lr.params();
  const auto xs = lr.scaler().transform(std::vector<double>{3.0, -1.0});
  // the class-1 row gained along x-hat relative to the others
  double along1 = 0, along0 = 0;
  for (std::size_t f = 0; f < 2; ++f) {
    along1 += p.w(1, f) * xs[f];
    along0 += p.w(0, f) * xs[f];
  }
  CHECK(along1 > along0);
  CHECK(p.intercepts[1] > p.intercepts[0]);
}

TEST_CASE("OLR is scale-free once the scaler has two points") {
  const auto schema = numeric_schema(3, 3);
  const auto data = gaussian_blobs(800, 3, 3, 1.0, 33);
  OnlineLogisticRegression a(schema), b(schema);
  std::size_t i = 0;
  for (const auto& inst : data) {
    Instance scaled = inst;
    for (auto& v : scaled.x) v *= 10.0;
    if (i >= 2) CHECK(a.predict(inst.x).label == b.predict(scaled.x).label);
    a.learn_one(inst);
    b.learn_one(scaled);
    ++i;
  }
}

TEST_CASE("batch LR standardizes its batch") {
  const auto schema = numeric_schema(3, 3);
  const auto data = gaussian_blobs(600, 3, 3, 1.0, 34);
  auto scaled = data;
  for (auto& inst : scaled) {
    for (auto& v : inst.x) v *= 100.0;
  }
  BatchLogisticRegression a(schema), b(schema);
  a.fit(data);
  b.fit(scaled);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(a.predict(data[i].x).label == b.predict(scaled[i].x).label);
    correct += a.predict(data[i].x).label == data[i].y;
  }
  CHECK(correct > 400);
}

TEST_CASE("hoeffding bound") {
  CHECK(hoeffding_bound(1.0, 0.05, 100) == doctest::Approx(0.12239).epsilon(1e-4));
  CHECK(hoeffding_bound(1.0, 0.01, 400) == doctest::Approx(hoeffding_bound(1.0, 0.01, 100) / 2));
  CHECK(hoeffding_bound(1.0, 1.0, 10) == 0.0);
  // the tie rule applies from n = 922 on for R = 1, delta = 0.01
  CHECK(hoeffding_bound(1.0, 0.01, 921) >= 0.05);
  CHECK(hoeffding_bound(1.0, 0.01, 922) < 0.05);
}

TEST_CASE("hoeffding split decisions") {
  LeafStats pure(2, 1);
  for (int i = 0; i < 200; ++i) pure.add(std::vector<double>{double(i)}, 0);
  const auto none = ht_attempt_split(pure);
  CHECK_FALSE(none.split);
  CHECK(none.best_gain == 0.0);

  LeafStats sep(2, 1);
  std::mt19937_64 rng(35);
  std::normal_distribution<double> n(0.0, 0.1);
  for (int i = 0; i < 200; ++i) sep.add(std::vector<double>{(i % 2 ? 10.0 : 0.0) + n(rng)}, ClassIndex(i % 2));
  const auto yes = ht_attempt_split(sep);
  CHECK(yes.split);
  CHECK(yes.best_gain == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(yes.second_gain == 0.0);
  CHECK(yes.epsilon == doctest::Approx(hoeffding_bound(1.0, 0.01, 200)));
  CHECK(yes.threshold > 0.5);
  CHECK(yes.threshold < 9.5);

  // two identical informative features: gains tie, only the tie rule splits
  auto twin = [&](int count) {
    LeafStats leaf(2, 2);
    std::normal_distribution<double> m(0.0, 1.0);
    std::mt19937_64 r(36);
    for (int i = 0; i < count; ++i) {
      const double v = (i % 2 ? 1.0 : 0.0) + m(r);
      leaf.add(std::vector<double>{v, v}, ClassIndex(i % 2));
    }
    return ht_attempt_split(leaf);
  };
  CHECK_FALSE(twin(900).split);
  CHECK(twin(922).split);
}

TEST_CASE("hoeffding leaf prediction") {
  LeafStats few(2, 1);
  for (int i = 0; i < 3; ++i) few.add(std::vector<double>{100.0}, 0);
  few.add(std::vector<double>{-100.0}, 1);
  CHECK(ht_leaf_predict(few, std::vector<double>{-100.0}).label == 0);  // majority below nb_threshold

  LeafStats many(2, 1);
  for (int i = 0; i < 50; ++i) many.add(std::vector<double>{i % 2 ? 5.0 + 0.01 * i : -5.0 - 0.01 * i}, ClassIndex(i % 2));
  CHECK(ht_leaf_predict(many, std::vector<double>{4.0}).label == 1);
  CHECK(ht_leaf_predict(many, std::vector<double>{-4.0}).label == 0);

  LeafStats empty(3, 1);
  empty.inherited_counts = {1, 5, 2};
  CHECK(ht_leaf_predict(empty, std::vector<double>{0.0}).label == 1);
}

TEST_CASE("hoeffding tree grows monotonically within the grace-period bound") {
  const auto schema = numeric_schema(4, 3);
  const auto data = gaussian_blobs(20000, 4, 3, 1.5, 37);
  HoeffdingTree tree(schema);
  std::size_t prev = tree.node_count();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (i >= 10000) correct += tree.predict(data[i].x).label == data[i].y;
    tree.learn_one(data[i]);
    CHECK(tree.node_count() >= prev);
    prev = tree.node_count();
    CHECK(tree.leaf_count() <= (i + 1) / 100 + 1);
  }
  CHECK(tree.node_count() > 1);
  CHECK(correct > 7000);
}

TEST_CASE("CART separates four points with one split") {
  const Schema schema({{"x", FeatureKind::Numeric}}, {"A", "B"});
  const std::vector<Instance> batch{{{0}, 0, 0}, {{1}, 0, 1}, {{10}, 1, 2}, {{11}, 1, 3}};
  DecisionTree tree(schema);
  tree.fit(batch);
  CHECK(tree.node_count() == 3);
  for (const auto& inst : batch) CHECK(tree.predict_label(inst.x) == inst.y);
  CHECK(tree.predict_label(std::vector<double>{5.4}) == 0);
  CHECK(tree.predict_label(std::vector<double>{5.6}) == 1);
}

TEST_CASE("unbounded CART fits any consistent batch exactly") {
  const auto schema = numeric_schema(3, 4);
  const auto data = gaussian_blobs(1500, 3, 4, 0.3, 38);
  DecisionTree tree(schema);
  tree.fit(data);
  for (const auto& inst : data) CHECK(tree.predict_label(inst.x) == inst.y);
}

TEST_CASE("random forest: degenerate forest, determinism, serial equivalence") {
  const auto schema = numeric_schema(4, 3);
  const auto data = gaussian_blobs(1200, 4, 3, 1.0, 39);

  RandomForest single(schema, {1, false, 4, 42});
  single.fit(data);
  DecisionTree tree(schema);
  tree.fit(data);
  for (const auto& inst : data) CHECK(single.predict(inst.x).label == tree.predict_label(inst.x));

  RandomForest a(schema, {25, true, 0, 7}), b(schema, {25, true, 0, 7}), c(schema, {25, true, 0, 7});
  a.fit(data);
  b.fit(data);
  c.fit_serial(data);
  CHECK(a.predict_labels(data) == b.predict_labels(data));
  CHECK(a.predict_labels(data) == c.predict_labels_serial(data));
  CHECK(a.predict_labels(data) == a.predict_labels_serial(data));

  std::size_t forest_ok = 0, tree_ok = 0;
  const auto test = gaussian_blobs(600, 4, 3, 1.0, 40);
  for (const auto& inst : test) {
    forest_ok += a.predict(inst.x).label == inst.y;
    tree_ok += tree.predict_label(inst.x) == inst.y;
  }
  CHECK(forest_ok + 6 >= tree_ok);
}

TEST_CASE("forest training accuracy on a separable batch") {
  const auto schema = numeric_schema(2, 2);
  const auto data = gaussian_blobs(500, 2, 2, 8.0, 41);
  RandomForest forest(schema, {20, true, 0, 3});
  forest.fit(data);
  DecisionTree tree(schema);
  tree.fit(data);
  std::size_t f = 0, t = 0;
  for (const auto& inst : data) {
    f += forest.predict(inst.x).label == inst.y;
    t += tree.predict_label(inst.x) == inst.y;
  }
  CHECK(double(f) / data.size() >= double(t) / data.size() - 0.01);
}

TEST_CASE("majority class") {
  const std::vector<ClassIndex> aab{0, 0, 1};
  CHECK(majority_class(aab, 2) == 0);
  const std::vector<ClassIndex> ab{0, 1};
  CHECK(majority_class(ab, 2) == 0);
  CHECK(majority_class(std::span<const ClassIndex>{}, 3) == 0);
  const std::vector<ClassIndex> cc{2, 2, 1};
  CHECK(majority_class(cc, 3) == 2);
}

TEST_CASE("factory names") {
  CHECK(parse_online_kind("HAT") == OnlineKind::HoeffdingTree);
  CHECK(parse_online_kind("ONB") == OnlineKind::GaussianNB);
  CHECK(parse_batch_kind("CART") == BatchKind::DecisionTree);
  CHECK(short_name(BatchKind::RandomForest) == "RF");
  CHECK_THROWS_AS(parse_batch_kind("LGBM"), ConfigError);
}
