#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "adc/model.hpp"

namespace adc {

struct BenchPoint {
  long length = 0;
  double seconds = std::nan("");  // median over timed runs
  long state_bytes = 0;      // resident per-step state (SSM) / score matrix (attention)
  long workspace_peak = 0;   // peak tracked transient allocation during one run
  bool failed = false;       // allocation failure at this length
};

struct BenchSeries {
  std::string model;  // "ssm" | "attention"
  std::vector<BenchPoint> points;
  double slope = std::nan("");  // log-log least-squares fit over usable points
};

struct BenchReport {
  std::vector<BenchSeries> series;
};

struct BenchOptions {
  std::vector<long> ssm_lengths = {1024, 2048, 4096, 8192, 16384, 32768, 65536};
  std::vector<long> attention_lengths = {1024, 2048, 4096, 8192};
  int runs = 5;    // timed repetitions per length; the median is reported
  int warmup = 1;  // untimed repetitions per length
  uint64_t seed = 0;
  ModelConfig model = model_preset("tiny");
  int attention_dim = 64;  // width of the quadratic baseline layer
};

// Least-squares slope of ln(y) against ln(x); needs >= 2 points.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Times backbone_forward across sequence lengths and a single softmax
// attention layer (which materializes the L x L score matrix) across its own
// lengths, then fits log-log runtime slopes. Allocation failures on the
// baseline are recorded as failed points and the run continues. Single
// threaded by design so the timings are stable.
BenchReport bench_scaling(const BenchOptions& opt);

void write_bench_json(const std::string& path, const BenchReport& report);
// Gnuplot-compatible: one index block per series, columns
// "length seconds state_bytes workspace_peak failed".
void write_bench_dat(const std::string& path, const BenchReport& report);

}  // namespace adc
