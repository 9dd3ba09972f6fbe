// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
// failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "iebsm/drift.hpp"
#include "iebsm/ensemble.hpp"
#include "iebsm/eval.hpp"
#include "iebsm/experiment.hpp"
#include "iebsm/learners.hpp"
#include "iebsm/stattests.hpp"
#include "oracles.hpp"

using namespace iebsm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---------------------------------------------------------------- criterion 1
Outcome stat_oracles() {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> n01(0.0, 1.0);
  auto sample = [&](std::size_t n, double mu, double sd) {
    std::vector<double> v(n);
    for (auto& x : v) x = mu + sd * n01(rng);
    return v;
  };
  auto cats = [&](std::size_t n, std::vector<double> w) {
    std::discrete_distribution<int> d(w.begin(), w.end());
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
  };
  double worst_stat = 0.0, worst_p = 0.0;
  auto stat_err = [&](double got, double want) { worst_stat = std::max(worst_stat, std::abs(got - want)); };
  auto p_err = [&](double got, double want) { worst_p = std::max(worst_p, std::abs(got - want)); };
  const int pairs = 100;
  for (int t = 0; t < pairs; ++t) {
    const auto a = sample(50 + 3 * t, 0.0, 1.0);
    const auto b = sample(40 + 4 * t, 0.01 * t, 1.0 + 0.005 * t);
    const auto ks = stattests::ks_two_sample(a, b);
    stat_err(ks.statistic, oracle::ks_statistic(a, b));
    p_err(*ks.p_value, oracle::ks_p_value(a, b));

    const double sd = oracle::population_std(a);
    const auto w = stattests::wasserstein_1d(a, b, sd);
    stat_err(w.statistic, oracle::wasserstein(a, b));
    stat_err(w.drift_score, oracle::wasserstein(a, b) / sd);

    stat_err(stattests::js_divergence(a, b, FeatureKind::Numeric).drift_score, oracle::js_numeric_score(a, b));
    const auto ca = cats(300, {1, 2, 3, 4, 5});
    const auto cb = cats(260, {1, 2 + 0.03 * t, 3, 4, 5 - 0.04 * t});
    stat_err(stattests::js_divergence(ca, cb, FeatureKind::Categorical).drift_score,
             oracle::js_categorical_score(ca, cb));

    std::vector<double> wa(2 + t % 7, 1.0);
    if (t % 4 == 0) wa.back() = 0.0;
    const auto xa = cats(250, wa);
    const auto xb = cats(230, std::vector<double>(wa.size(), 1.0));
    const auto chi = stattests::chi_squared(xa, xb);
    const auto chi_ref = oracle::chi_squared(xa, xb);
    stat_err(chi.statistic, chi_ref.statistic);
    p_err(*chi.p_value, chi_ref.p);

    std::uniform_int_distribution<std::size_t> nn(1, 500);
    const std::size_t na = nn(rng), nb = nn(rng);
    const std::size_t sa = std::uniform_int_distribution<std::size_t>(0, na)(rng);
    const std::size_t sb = std::uniform_int_distribution<std::size_t>(0, nb)(rng);
    const auto z = stattests::z_proportion(sa, na, sb, nb);
    const auto z_ref = oracle::z_test(double(sa), double(na), double(sb), double(nb));
    stat_err(z.statistic, z_ref.z);
    p_err(*z.p_value, z_ref.p);
  }
  const bool ok = worst_stat <= 1e-9 && worst_p <= 1e-6;
  return {ok, std::to_string(pairs) + " pairs per test, max stat err " + fmt("%.2e", worst_stat) + ", max p err " +
                  fmt("%.2e", worst_p)};
}

// ---------------------------------------------------------------- criterion 2
Outcome f1_oracle() {
  std::mt19937_64 rng(102);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = 1 + std::uniform_int_distribution<std::size_t>(0, 20)(rng);
    eval::ConfusionMatrix cm(k);
    std::vector<std::vector<long long>> raw(k, std::vector<long long>(k, 0));
    std::uniform_int_distribution<int> c(0, t % 2 ? 3 : 60);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        raw[i][j] = c(rng);
        cm.add(i, j, raw[i][j]);
      }
    }
    if (cm.total() == 0) {
      cm.add(0, 0);
      raw[0][0] = 1;
    }
    worst = std::max(worst, std::abs(eval::f1_macro(cm) - oracle::f1_macro(raw)));
  }
  return {worst <= 1e-12, "1000 matrices, max err " + fmt("%.2e", worst)};
}

// ---------------------------------------------------------------- criterion 3
Outcome gnb_equivalence() {
  std::vector<FeatureDescriptor> f;
  for (int i = 0; i < 10; ++i) f.push_back({"f" + std::to_string(i), FeatureKind::Numeric});
  const Schema schema(f, {"a", "b", "c", "d", "e"});
  std::mt19937_64 rng(103);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Instance> data(10000);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i].y = i % 5;
    data[i].x.resize(10);
    for (std::size_t j = 0; j < 10; ++j) data[i].x[j] = 100.0 * j + 3.0 * data[i].y + (1 + j) * n(rng);
  }
  learners::OnlineGaussianNB online(schema);
  for (const auto& inst : data) online.learn_one(inst);
  learners::BatchGaussianNB batch(schema);
  batch.fit(data);
  double dm = 0.0, dv = 0.0;
  for (ClassIndex c = 0; c < 5; ++c) {
    for (std::size_t j = 0; j < 10; ++j) {
      dm = std::max(dm, std::abs(online.stats().moments(c, j).mean - batch.stats().moments(c, j).mean));
      dv = std::max(dv, std::abs(online.stats().moments(c, j).variance() - batch.stats().moments(c, j).variance()));
    }
  }
  return {dm <= 1e-9 && dv <= 1e-6, "max mean diff " + fmt("%.2e", dm) + ", max variance diff " + fmt("%.2e", dv)};
}

// ---------------------------------------------------------------- criterion 4
Outcome olr_gradient() {
  std::mt19937_64 rng(104);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t k = 2 + t % 6, d = 1 + t % 9;
    learners::LinearParams p(k, d);
    for (auto& w : p.weights) w = n(rng);
    for (auto& b : p.intercepts) b = n(rng);
    std::vector<double> x(d);
    for (auto& v : x) v = 1.5 * n(rng);
    const ClassIndex y = t % k;
    const auto g = learners::softmax_gradient(p, x, y, 1.0);
    // fourth-order central difference of the loss along one coordinate
    auto fd = [&](double* coord) {
      const double h = 1e-4, keep = *coord;
      double f[4];
      const double offsets[4] = {-2 * h, -h, h, 2 * h};
      for (int i = 0; i < 4; ++i) {
        *coord = keep + offsets[i];
        f[i] = learners::softmax_loss(p, x, y, 1.0);
      }
      *coord = keep;
      return (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h);
    };
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    auto add = [&](double analytic, double numeric) {
      diff2 += (analytic - numeric) * (analytic - numeric);
      a2 += analytic * analytic;
      n2 += numeric * numeric;
    };
    for (std::size_t i = 0; i < p.weights.size(); ++i) add(g.weights[i], fd(&p.weights[i]));
    for (std::size_t c = 0; c < k; ++c) add(g.intercepts[c], fd(&p.intercepts[c]));
    worst = std::max(worst, std::sqrt(diff2) / std::max(std::sqrt(std::max(a2, n2)), 1e-12));
  }
  return {worst < 1e-5, "50 states, max relative error (gradient norm) " + fmt("%.2e", worst)};
}

// ------------------------------------------------------- shared drift stream
experiment::ExperimentConfig drift_run(const std::string& method) {
  nlohmann::json j = {{"stream",
                       {{"synthetic",
                         {{"n_instances", 40000}, {"n_features", 5}, {"n_classes", 3}, {"drift_points", {20000}},
                          {"drift_kind", "abrupt"}, {"seed", 42}}}}},
                      {"stream_id", "abrupt40k"},
                      {"method", method},
                      {"seed", 42}};
  return experiment::parse_experiment_config(j);
}

std::map<std::string, experiment::RunResult> cache;

const experiment::RunResult& run_cached(const std::string& method) {
  auto it = cache.find(method);
  if (it == cache.end()) it = cache.emplace(method, experiment::run_experiment(drift_run(method))).first;
  return it->second;
}

// ---------------------------------------------------------------- criterion 5
Outcome drift_adaptation() {
  const auto& s3 = run_cached("RF S3").report;
  const auto& b1 = run_cached("RF B1").report;
  const bool ok = s3.final_f1 >= b1.final_f1 + 0.05 && s3.drift_count >= 1 && s3.replacement_count >= 1 &&
                  cache.at("RF S3").wall_seconds + cache.at("RF B1").wall_seconds < 180.0;
  return {ok, "RF S3 F1 " + fmt("%.4f", s3.final_f1) + " (drifts " + std::to_string(s3.drift_count) +
                  ", replacements " + std::to_string(s3.replacement_count) + ") vs RF B1 F1 " +
                  fmt("%.4f", b1.final_f1)};
}

// ---------------------------------------------------------------- criterion 6
Outcome baseline_counters() {
  std::string detail;
  bool ok = true;
  for (const char* m : {"RF B1", "RF B2", "ONB", "HT", "OLR", "DS-ONLINE"}) {
    const auto& r = run_cached(m).report;
    ok = ok && r.drift_count == 0 && r.replacement_count == 0;
    detail += std::string(detail.empty() ? "" : ", ") + m + " " + std::to_string(r.drift_count) + "/" +
              std::to_string(r.replacement_count);
  }
  return {ok, "drifts/replacements: " + detail};
}

// ---------------------------------------------------------------- criterion 7
Outcome ensemble_sanity() {
  const std::string ds_spec = "DS-RF";
  auto config = drift_run(ds_spec);
  config.method.online_members = {learners::OnlineKind::GaussianNB, learners::OnlineKind::HoeffdingTree};
  config.method.id = "DS-RF(GNB,HT)";
  const auto ds = experiment::run_experiment(config);
  double best = 0.0;
  std::string best_name;
  for (const char* m : {"RF S4", "RF S5", "RF S6", "RF S7", "ONB", "HT"}) {
    const double f1 = run_cached(m).report.final_f1;
    if (f1 > best) best = f1, best_name = m;
  }
  const double b1 = run_cached("RF B1").report.final_f1;
  const double f1 = ds.report.final_f1;
  const bool ok = f1 >= b1 && f1 >= best - 0.03 && ds.wall_seconds < 300.0;
  return {ok, "DS F1 " + fmt("%.4f", f1) + ", B1 " + fmt("%.4f", b1) + ", best member alone " + best_name + " " +
                  fmt("%.4f", best) + ", DS run " + fmt("%.1f s", ds.wall_seconds)};
}

// ---------------------------------------------------------------- criterion 8
Outcome shadow_gating() {
  // y = [x > 0.5] on a grid of nine x values; positions 1001..1250 carry
  // random labels. The shadow trained on that slice cannot beat the perfect
  // incumbent on the clean comparison window.
  const Schema schema({{"x", FeatureKind::Numeric}}, {"low", "high"});
  std::mt19937_64 rng(108);
  std::bernoulli_distribution coin(0.5);
  std::vector<Instance> stream(3000);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const double x = static_cast<double>((i * 7) % 9 + 1) / 10.0;
    const std::size_t position = i + 1;
    const bool noisy = position > 1000 && position <= 1250;
    stream[i] = {{x}, noisy ? ClassIndex(coin(rng)) : ClassIndex(x > 0.5), i};
  }
  auto strategy = drift::strategy_by_id("S5");
  strategy.window_s = 250;
  ensemble::MemberSpec spec;
  spec.id = "DT S5";
  spec.kind = ensemble::MemberKind::Batch;
  spec.batch = learners::BatchKind::DecisionTree;
  spec.strategy = strategy;
  ensemble::EnsembleConfig config;
  config.members = {spec};
  config.n_first_fit = 500;
  config.n_comp = 100;
  ensemble::Ensemble ens(schema, config);
  for (const auto& inst : stream) ens.process_instance(inst);
  std::size_t discards = 0;
  for (const auto& e : ens.events()) discards += e.kind == ensemble::EventKind::Discard;
  const bool ok = ens.drift_count() >= 1 && ens.replacement_count() == 0 && discards == ens.drift_count();
  return {ok, "drifts " + std::to_string(ens.drift_count()) + ", replacements " +
                  std::to_string(ens.replacement_count()) + ", discarded shadows " + std::to_string(discards)};
}

// ---------------------------------------------------------------- criterion 9
Outcome test_then_train() {
  ingest::SynthConfig sc;
  sc.n_instances = 5000;
  sc.n_features = 4;
  sc.n_classes = 3;
  sc.drift_points = {2500};
  sc.seed = 109;
  const auto stream = ingest::synthesize(sc);
  ensemble::EnsembleConfig config;
  auto batch = [](const std::string& id, std::size_t s) {
    ensemble::MemberSpec m;
    m.id = "RF " + id;
    m.kind = ensemble::MemberKind::Batch;
    m.batch = learners::BatchKind::RandomForest;
    m.strategy = drift::strategy_by_id(id);
    m.strategy.window_s = s;
    return m;
  };
  auto online = [](learners::OnlineKind k) {
    ensemble::MemberSpec m;
    m.id = learners::short_name(k);
    m.kind = ensemble::MemberKind::Online;
    m.online = k;
    return m;
  };
  config.members = {batch("S4", 500), batch("S5", 500), online(learners::OnlineKind::GaussianNB),
                    online(learners::OnlineKind::HoeffdingTree), online(learners::OnlineKind::LogisticRegression)};
  config.n_first_fit = 500;
  config.n_comp = 200;
  config.n_trees = 10;

  std::vector<ClassIndex> reference;
  {
    ensemble::Ensemble ens(stream.schema, config);
    for (const auto& inst : stream.instances) reference.push_back(ens.process_instance(inst));
    if (ens.drift_count() == 0) return {false, "harness stream produced no drift"};
  }
  // For each mutation point i: replay the prefix, reveal a wrong y_i after the
  // predict phase, and confirm predictions up to and including i are unchanged.
  std::size_t checked = 0, mismatches = 0;
  for (std::size_t i = 499; i < stream.instances.size(); i += 250) {
    ensemble::Ensemble ens(stream.schema, config);
    for (std::size_t t = 0; t <= i; ++t) {
      Instance inst = stream.instances[t];
      const auto step = ens.predict_phase(inst.x);
      if (t == i) inst.y = (inst.y + 1) % stream.schema.n_classes();
      ens.learn_phase(step, inst);
      mismatches += step.final_label != reference[t];
      ++checked;
    }
  }
  return {mismatches == 0, std::to_string(checked) + " replayed predictions over 5000-instance stream, " +
                               std::to_string(mismatches) + " changed"};
}

// --------------------------------------------------------------- criterion 10
Outcome determinism() {
  const std::vector<nlohmann::json> configs{
      {{"stream", {{"synthetic", {{"n_instances", 8000}, {"drift_points", {4000}}, {"seed", 5}}}}},
       {"method", {{"name", "DS-RF"}, {"window_s", 1000}, {"n_first_fit", 1000}}},
       {"n_trees", 20},
       {"seed", 11}},
      {{"stream", {{"synthetic", {{"n_instances", 8000}, {"drift_points", {3000}}, {"drift_kind", "gradual"}}}}},
       {"method", "WV-NB"},
       {"n_first_fit", 1000},
       {"window_s", 1000},
       {"seed", 12}},
      {{"stream", {{"synthetic", {{"n_instances", 6000}, {"n_classes", 4}, {"drift_points", {2000, 4000}}}}}},
       {"method", {{"name", "DT S1"}, {"theta", 0.05}, {"window_s", 500}, {"n_first_fit", 500}}},
       {"seed", 13}},
  };
  std::size_t identical = 0;
  for (const auto& j : configs) {
    const auto c = experiment::parse_experiment_config(j);
    const auto a = experiment::run_experiment(c);
    const auto b = experiment::run_experiment(c);
    bool same = eval::serialize_report(a.report) == eval::serialize_report(b.report) && a.events.size() == b.events.size();
    for (std::size_t e = 0; same && e < a.events.size(); ++e) {
      same = a.events[e].seq == b.events[e].seq && a.events[e].score == b.events[e].score;
    }
    identical += same;
  }
  return {identical == configs.size(), std::to_string(identical) + "/" + std::to_string(configs.size()) +
                                           " configs byte-identical across two runs"};
}

// --------------------------------------------------------------- criterion 11
Outcome ranking_check() {
  std::ifstream in(std::string(IEBSM_TEST_DATA) + "/reference_ranks.csv");
  std::ifstream pub(std::string(IEBSM_TEST_DATA) + "/published_scores.csv");
  if (!in || !pub) return {false, "reference data missing"};
  std::string line;
  std::getline(in, line);
  std::map<std::string, std::vector<eval::MethodScore>> grid;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string method, cell;
    std::getline(ss, method, ',');
    for (int s = 1; std::getline(ss, cell, ','); ++s) grid["stream" + std::to_string(s)].push_back({method, std::stod(cell)});
  }
  const auto rows = eval::rank_methods(grid);
  std::map<std::string, double> got;
  for (const auto& r : rows) got[r.method] = r.ranking_score;
  std::getline(pub, line);
  double worst = 0.0;
  std::size_t n = 0;
  while (std::getline(pub, line)) {
    const auto comma = line.find(',');
    worst = std::max(worst, std::abs(got[line.substr(0, comma)] - std::stod(line.substr(comma + 1))));
    ++n;
  }
  const bool ok = rows.front().method == "DS-RF" && rows.front().position == 1 &&
                  std::abs(rows.front().ranking_score - 4.33) < 0.005 && worst < 0.006 && n == rows.size();
  return {ok, "DS-RF score " + fmt("%.4f", rows.front().ranking_score) + " at position " +
                  std::to_string(rows.front().position) + "; max deviation from published scores over " +
                  std::to_string(n) + " methods " + fmt("%.4f", worst)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;  // 0 = no limit
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "statistical-test oracles", 10.0, stat_oracles},
      {2, "F1-macro oracle", 5.0, f1_oracle},
      {3, "GNB batch/online equivalence", 0.0, gnb_equivalence},
      {4, "OLR gradient check", 0.0, olr_gradient},
      {5, "drift adaptation beats frozen baseline", 180.0, drift_adaptation},
      {6, "baseline counters stay zero", 0.0, baseline_counters},
      {7, "DS ensemble sanity", 300.0, ensemble_sanity},
      {8, "shadow gating", 0.0, shadow_gating},
      {9, "test-then-train integrity", 0.0, test_then_train},
      {10, "determinism", 0.0, determinism},
      {11, "ranking procedure", 0.0, ranking_check},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0.0 && secs >= c.limit_seconds) {
      out.pass = false;
      out.detail += " (over the " + fmt("%.0f s", c.limit_seconds) + " limit)";
    }
    std::printf("%s [%d] %s: %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !out.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
