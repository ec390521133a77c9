#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "adc/bench.hpp"
#include "adc/evalrun.hpp"
#include "adc/metrics.hpp"
#include "adc/rng.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace adc;
using nlohmann::json;

namespace {

// O(n^2) pair count, ties worth one half: the definition, written naively.
double pairwise_auc(const std::vector<ScoredExample>& ex) {
  double wins = 0.0;
  long pairs = 0;
  for (const auto& p : ex) {
    if (p.label != 1) continue;
    for (const auto& n : ex) {
      if (n.label != 0) continue;
      pairs += 1;
      if (p.score > n.score) wins += 1.0;
      else if (p.score == n.score) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

std::vector<ScoredExample> make(std::initializer_list<double> scores,
                                std::initializer_list<int> labels) {
  std::vector<ScoredExample> ex;
  auto s = scores.begin();
  auto l = labels.begin();
  for (; s != scores.end(); ++s, ++l) ex.push_back({*s, *l, ""});
  return ex;
}

}  // namespace

TEST_CASE("roc auc equals the pairwise definition on small random sets") {
  Rng rng(55);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + rng.uniform_int(11);  // up to 12 examples
    std::vector<ScoredExample> ex;
    bool has0 = false, has1 = false;
    for (int i = 0; i < n; ++i) {
      // Coarse score grid so ties actually happen.
      const double score = rng.uniform_int(5) / 4.0;
      const int label = rng.uniform_int(2);
      has0 |= label == 0;
      has1 |= label == 1;
      ex.push_back({score, label, ""});
    }
    if (!has0 || !has1) continue;
    CHECK(roc_auc(ex) == doctest::Approx(pairwise_auc(ex)).epsilon(1e-12));
  }
}

TEST_CASE("roc auc textbook cases") {
  CHECK(roc_auc(make({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0})) == doctest::Approx(1.0));
  CHECK(roc_auc(make({0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1})) == doctest::Approx(0.0));
  // positives {0.9, 0.4}, negatives {0.6, 0.1}: 3 of 4 pairs ordered correctly
  CHECK(roc_auc(make({0.9, 0.4, 0.6, 0.1}, {1, 1, 0, 0})) == doctest::Approx(0.75));
  CHECK(roc_auc(make({0.5, 0.5, 0.5}, {1, 0, 1})) == doctest::Approx(0.5));
  CHECK_THROWS(roc_auc(make({0.5, 0.6}, {1, 1})));  // one class missing
  CHECK_THROWS(roc_auc({}));
}

TEST_CASE("auc is invariant under strictly monotone score transforms") {
  Rng rng(66);
  std::vector<ScoredExample> ex;
  for (int i = 0; i < 20; ++i) ex.push_back({rng.normal(), i % 2, ""});
  const double base = roc_auc(ex);

  auto transformed = ex;
  for (auto& e : transformed) e.score = std::exp(2.0 * e.score + 3.0);
  CHECK(roc_auc(transformed) == doctest::Approx(base).epsilon(1e-12));

  // Negating scores flips every pair: the two runs must sum to one.
  auto negated = ex;
  for (auto& e : negated) e.score = -e.score;
  CHECK(roc_auc(ex) + roc_auc(negated) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("macro one-vs-rest averages per-class aucs") {
  std::vector<MultiScoredExample> ex;
  auto add = [&](std::initializer_list<double> p, int label) {
    Vec v(static_cast<long>(p.size()));
    long i = 0;
    for (double x : p) v[i++] = x;
    ex.push_back({v, label, ""});
  };
  // Uniform probabilities: no ranking information, every class AUC is 0.5.
  add({1 / 3.0, 1 / 3.0, 1 / 3.0}, 0);
  add({1 / 3.0, 1 / 3.0, 1 / 3.0}, 1);
  add({1 / 3.0, 1 / 3.0, 1 / 3.0}, 2);
  add({1 / 3.0, 1 / 3.0, 1 / 3.0}, 0);
  CHECK(macro_ovr_auc(ex) == doctest::Approx(0.5));

  ex.clear();
  add({0.8, 0.1, 0.1}, 0);
  add({0.1, 0.8, 0.1}, 1);
  add({0.1, 0.1, 0.8}, 2);
  CHECK(macro_ovr_auc(ex) == doctest::Approx(1.0));

  ex.pop_back();  // class 2 disappears
  CHECK_THROWS(macro_ovr_auc(ex));
}

TEST_CASE("recording auc dispatches on class count") {
  std::vector<MultiScoredExample> ex;
  Vec a(2), b(2);
  a << 0.3, 0.7;
  b << 0.6, 0.4;
  ex.push_back({a, 1, "x"});
  ex.push_back({b, 0, "y"});
  CHECK(recording_auc(ex) == doctest::Approx(1.0));  // binary: probs[1] ranks

  std::swap(ex[0].label, ex[1].label);
  CHECK(recording_auc(ex) == doctest::Approx(0.0));
}

TEST_CASE("log-log slope fitting recovers exact power laws") {
  std::vector<double> x = {1024, 2048, 4096, 8192};
  std::vector<double> lin, quad;
  for (double v : x) {
    lin.push_back(3.5e-6 * v);
    quad.push_back(1e-9 * v * v);
  }
  CHECK(fit_loglog_slope(x, lin) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit_loglog_slope(x, quad) == doctest::Approx(2.0).epsilon(1e-12));

  CHECK_THROWS(fit_loglog_slope({1024.0}, {1.0}));
  CHECK_THROWS(fit_loglog_slope({1024.0, 2048.0}, {0.0, 1.0}));  // needs positives
}

TEST_CASE("bench options are validated before any timing") {
  BenchOptions opt;
  opt.runs = 0;
  CHECK_THROWS(bench_scaling(opt));
  opt = BenchOptions{};
  opt.ssm_lengths = {2048, 1024};  // must increase
  CHECK_THROWS(bench_scaling(opt));
}

TEST_CASE("eval tables serialize to csv and json") {
  namespace fs = std::filesystem;
  fs::create_directories("eval_tmp");

  EvalReport rep;
  rep.split = "test";
  rep.n_classes = 2;
  rep.audio_auc = 0.9;
  rep.best_k = 3;
  EvalRow row;
  row.series = "headline";
  row.system = "audio";
  row.roles = "both";
  row.include_silence = true;
  row.duration_cap = 360.0;
  row.top_k = 0;
  row.auc = 0.9;
  row.n_recordings = 8;
  rep.rows.push_back(row);
  row.series = "duration";
  row.duration_cap = 30.0;
  row.auc = 0.85;
  row.best_auc = 0.85;
  rep.rows.push_back(row);

  write_eval_csv("eval_tmp/t.csv", rep);
  std::ifstream csv("eval_tmp/t.csv");
  std::string header, line1, line2, extra;
  REQUIRE(std::getline(csv, header));
  CHECK(header ==
        "series,system,roles,include_silence,duration_cap,top_k,lambda,auc,best_auc,"
        "n_recordings");
  REQUIRE(std::getline(csv, line1));
  CHECK(line1.find("headline,audio,both,on,360") == 0);
  CHECK(line1.find(",,") != std::string::npos);  // nan lambda prints empty
  REQUIRE(std::getline(csv, line2));
  CHECK(!std::getline(csv, extra));

  write_eval_json("eval_tmp/t.json", rep);
  std::ifstream jf("eval_tmp/t.json");
  const json j = json::parse(jf);
  CHECK(j.at("split") == "test");
  CHECK(j.at("rows").size() == 2);
  CHECK(j.at("rows")[0].at("lambda").is_null());
  CHECK(j.at("rows")[1].at("best_auc").get<double>() == doctest::Approx(0.85));
  CHECK(j.at("text_auc").is_null());  // nan headline stays null

  fs::remove_all("eval_tmp");
}
