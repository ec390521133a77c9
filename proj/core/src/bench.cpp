#include "adc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <new>
#include <stdexcept>

#include <json.hpp>

#include "adc/rng.hpp"
#include "adc/workspace.hpp"

namespace adc {

namespace {

using nlohmann::json;

Mat random_input(long rows, int cols, Rng& rng) {
  Mat x(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) x(i, j) = rng.normal();
  }
  return x;
}

// Runs fn once per warmup then `runs` timed repetitions; returns the median.
template <typename Fn>
double time_median(int warmup, int runs, Fn&& fn) {
  for (int i = 0; i < warmup; ++i) fn();
  std::vector<double> times(runs);
  for (int i = 0; i < runs; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    times[i] = std::chrono::duration<double>(t1 - t0).count();
  }
  std::sort(times.begin(), times.end());
  const int n = runs;
  return n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
}

long ssm_state_bytes(const ModelConfig& cfg) {
  long total = 0;
  for (int s = 0; s < 4; ++s) {
    total += cfg.depths[s] * scan_state_bytes(cfg.stage_inner(s), cfg.n_state);
  }
  return total;
}

BenchSeries bench_ssm(const BenchOptions& opt) {
  BenchSeries series;
  series.model = "ssm";
  const ModelParams m = init_model(opt.model, opt.seed);
  Rng rng(Rng::mix(opt.seed, 0x62656e6368ull));
  for (long L : opt.ssm_lengths) {
    BenchPoint pt;
    pt.length = L;
    pt.state_bytes = ssm_state_bytes(opt.model);
    const Mat x = random_input(L, opt.model.input_dim, rng);
    workspace_meter().reset();
    pt.seconds = time_median(opt.warmup, opt.runs, [&] {
      const Vec logits = backbone_forward(x, m);
      if (!logits.allFinite()) throw std::runtime_error("non-finite bench logits");
    });
    pt.workspace_peak = static_cast<long>(workspace_meter().peak);
    series.points.push_back(pt);
  }
  return series;
}

// One softmax-attention layer of width d: Q = xWq, K = xWk, V = xWv, then
// softmax(Q K^T / sqrt(d)) V with the full L x L score matrix materialized.
double attention_forward(const Mat& x, const Mat& Wq, const Mat& Wk, const Mat& Wv) {
  const long L = x.rows();
  const long d = Wq.cols();
  const Mat Q = x * Wq;
  const Mat K = x * Wk;
  const Mat V = x * Wv;
  TrackedAlloc scores_alloc(static_cast<size_t>(L) * L * sizeof(double));
  Mat S = (Q * K.transpose()) / std::sqrt(static_cast<double>(d));
  for (long i = 0; i < L; ++i) {
    auto row = S.row(i).array();
    row -= row.maxCoeff();
    row = row.exp();
    row /= row.sum();
  }
  const Mat Y = S * V;
  return Y.sum();  // consume the result so the pass cannot be elided
}

BenchSeries bench_attention(const BenchOptions& opt) {
  BenchSeries series;
  series.model = "attention";
  Rng rng(Rng::mix(opt.seed, 0x6174746eull));
  const int d = opt.attention_dim;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Mat Wq = random_input(d, d, rng) * scale;
  Mat Wk = random_input(d, d, rng) * scale;
  Mat Wv = random_input(d, d, rng) * scale;
  for (long L : opt.attention_lengths) {
    BenchPoint pt;
    pt.length = L;
    pt.state_bytes = static_cast<long>(L) * L * static_cast<long>(sizeof(double));
    try {
      const Mat x = random_input(L, d, rng);
      workspace_meter().reset();
      double sink = 0.0;
      pt.seconds = time_median(opt.warmup, opt.runs,
                               [&] { sink += attention_forward(x, Wq, Wk, Wv); });
      if (!std::isfinite(sink)) throw std::runtime_error("non-finite attention output");
      pt.workspace_peak = static_cast<long>(workspace_meter().peak);
    } catch (const std::bad_alloc&) {
      pt.failed = true;
      pt.seconds = std::nan("");
    }
    series.points.push_back(pt);
  }
  return series;
}

void fit_series(BenchSeries& series) {
  std::vector<double> xs, ys;
  for (const BenchPoint& p : series.points) {
    if (!p.failed && std::isfinite(p.seconds) && p.seconds > 0.0) {
      xs.push_back(static_cast<double>(p.length));
      ys.push_back(p.seconds);
    }
  }
  if (xs.size() >= 2) series.slope = fit_loglog_slope(xs, ys);
}

json point_json(const BenchPoint& p) {
  json j{{"length", p.length},
         {"state_bytes", p.state_bytes},
         {"workspace_peak", p.workspace_peak},
         {"failed", p.failed}};
  j["seconds"] = std::isfinite(p.seconds) ? json(p.seconds) : json(nullptr);
  return j;
}

}  // namespace

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("slope fit needs at least two (x, y) points");
  }
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw std::invalid_argument("slope fit needs positive values");
    }
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("slope fit is degenerate");
  return (n * sxy - sx * sy) / denom;
}

BenchReport bench_scaling(const BenchOptions& opt) {
  if (opt.runs < 1) throw std::invalid_argument("bench needs at least one timed run");
  for (const auto& lengths : {opt.ssm_lengths, opt.attention_lengths}) {
    if (!std::is_sorted(lengths.begin(), lengths.end()) ||
        std::adjacent_find(lengths.begin(), lengths.end()) != lengths.end()) {
      throw std::invalid_argument("bench lengths must be strictly increasing");
    }
  }
  BenchReport report;
  if (!opt.ssm_lengths.empty()) report.series.push_back(bench_ssm(opt));
  if (!opt.attention_lengths.empty()) report.series.push_back(bench_attention(opt));
  for (BenchSeries& s : report.series) fit_series(s);
  return report;
}

void write_bench_json(const std::string& path, const BenchReport& report) {
  json j{{"series", json::array()}};
  for (const BenchSeries& s : report.series) {
    json js{{"model", s.model}, {"points", json::array()}};
    js["slope"] = std::isfinite(s.slope) ? json(s.slope) : json(nullptr);
    for (const BenchPoint& p : s.points) js["points"].push_back(point_json(p));
    j["series"].push_back(js);
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("short write: " + path);
}

void write_bench_dat(const std::string& path, const BenchReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  bool first = true;
  for (const BenchSeries& s : report.series) {
    if (!first) out << "\n\n";
    first = false;
    out << "# series: " << s.model << " slope: " << s.slope << '\n';
    out << "# length seconds state_bytes workspace_peak failed\n";
    for (const BenchPoint& p : s.points) {
      out << p.length << ' ' << p.seconds << ' ' << p.state_bytes << ' '
          << p.workspace_peak << ' ' << (p.failed ? 1 : 0) << '\n';
    }
  }
  if (!out) throw std::runtime_error("short write: " + path);
}

}  // namespace adc
