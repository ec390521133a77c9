#include <benchmark/benchmark.h>

#include <cmath>

#include "adc/fbank.hpp"
#include "adc/model.hpp"
#include "adc/rng.hpp"
#include "adc/scan.hpp"

namespace {

adc::Mat random_mat(long rows, long cols, adc::Rng& rng, double scale = 1.0) {
  adc::Mat m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  }
  return m;
}

void BM_SelectiveScan(benchmark::State& state) {
  const long L = state.range(0);
  const int d = 64, n = 16;
  adc::Rng rng(1);
  const adc::Mat x = random_mat(L, d, rng);
  adc::Mat dt = random_mat(L, d, rng, 0.05);
  dt = dt.array().abs();
  const adc::Mat A = (-random_mat(d, n, rng).array().abs() - 0.1).matrix();
  const adc::Mat B = random_mat(L, n, rng);
  const adc::Mat C = random_mat(L, n, rng);
  const adc::Vec D = adc::Vec::Ones(d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(adc::selective_scan(x, dt, A, B, C, D).sum());
  }
  state.SetItemsProcessed(state.iterations() * L);
}
BENCHMARK(BM_SelectiveScan)->RangeMultiplier(4)->Range(256, 16384);

void BM_BackboneForward(benchmark::State& state) {
  const long T = state.range(0);
  const adc::ModelConfig cfg = adc::model_preset("tiny");
  const adc::ModelParams m = adc::init_model(cfg, 1);
  adc::Rng rng(2);
  const adc::Mat f = random_mat(T, cfg.input_dim, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(adc::backbone_forward(f, m).sum());
  }
  state.SetItemsProcessed(state.iterations() * T);
}
BENCHMARK(BM_BackboneForward)->RangeMultiplier(4)->Range(1024, 16384);

// The quadratic kernel the scan replaces: one softmax-attention layer that
// materializes the full L x L score matrix.
void BM_AttentionLayer(benchmark::State& state) {
  const long L = state.range(0);
  const int d = 64;
  adc::Rng rng(3);
  const adc::Mat x = random_mat(L, d, rng);
  const adc::Mat Wq = random_mat(d, d, rng, 1.0 / std::sqrt(d));
  const adc::Mat Wk = random_mat(d, d, rng, 1.0 / std::sqrt(d));
  const adc::Mat Wv = random_mat(d, d, rng, 1.0 / std::sqrt(d));
  for (auto _ : state) {
    const adc::Mat Q = x * Wq, K = x * Wk, V = x * Wv;
    adc::Mat S = (Q * K.transpose()) / std::sqrt(static_cast<double>(d));
    for (long i = 0; i < L; ++i) {
      auto row = S.row(i).array();
      row -= row.maxCoeff();
      row = row.exp();
      row /= row.sum();
    }
    benchmark::DoNotOptimize((S * V).sum());
  }
  state.SetItemsProcessed(state.iterations() * L);
}
BENCHMARK(BM_AttentionLayer)->RangeMultiplier(4)->Range(256, 4096);

void BM_Fbank(benchmark::State& state) {
  const double seconds = static_cast<double>(state.range(0));
  adc::Waveform w;
  w.sample_rate = 16000;
  w.samples.resize(static_cast<size_t>(seconds * w.sample_rate));
  for (size_t i = 0; i < w.samples.size(); ++i) {
    w.samples[i] = 0.4f * std::sin(2.0 * M_PI * 220.0 * i / w.sample_rate);
  }
  const adc::FbankConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(adc::compute_fbank(w, cfg).values.sum());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<long>(seconds * w.sample_rate));
}
BENCHMARK(BM_Fbank)->Arg(10)->Arg(60);

}  // namespace

BENCHMARK_MAIN();
