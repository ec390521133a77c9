#include "adc/fbank.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "adc/audio_io.hpp"
#include "adc/rng.hpp"
#include "doctest.h"

using namespace adc;

namespace {

Waveform sine(double freq, double seconds, int sr = 16000, double amp = 0.3) {
  Waveform w;
  w.sample_rate = sr;
  const long n = static_cast<long>(seconds * sr);
  w.samples.resize(n);
  for (long i = 0; i < n; ++i) {
    w.samples[i] = amp * std::sin(2.0 * M_PI * freq * i / sr);
  }
  return w;
}

}  // namespace

TEST_CASE("frame count matches the dropped-tail formula") {
  FbankConfig cfg;
  const int sr = 16000;
  const long win = std::lround(cfg.frame_length * sr);  // 400
  const long hop = std::lround(cfg.frame_shift * sr);   // 160
  for (long n : {400L, 401L, 559L, 560L, 561L, 16000L, 48000L}) {
    const long expect = n < win ? 0 : 1 + (n - win) / hop;
    CHECK(fbank_frame_count(n, sr, cfg) == expect);
  }
  CHECK(fbank_frame_count(399, sr, cfg) == 0);
  CHECK(fbank_frame_count(16000, sr, cfg) == 98);
}

TEST_CASE("mel scale round-trips and hits the textbook anchor") {
  CHECK(hz_to_mel(1000.0) == doctest::Approx(2595.0 * std::log10(1.0 + 1000.0 / 700.0)));
  CHECK(hz_to_mel(0.0) == doctest::Approx(0.0));
  for (double f : {50.0, 440.0, 3200.0, 7999.0}) {
    CHECK(mel_to_hz(hz_to_mel(f)) == doctest::Approx(f).epsilon(1e-10));
  }
}

TEST_CASE("filterbank has the right shape and positive filters") {
  const int n_fft = 512;
  const Mat fb = mel_filterbank(16000, n_fft, 128, 0.0, 8000.0);
  REQUIRE(fb.rows() == n_fft / 2 + 1);
  REQUIRE(fb.cols() == 128);
  CHECK(fb.minCoeff() >= 0.0);
  // At 31.25 Hz bin spacing the narrowest low-frequency triangle may miss
  // every bin center; anything beyond that would be a real defect.
  int empty = 0;
  for (int m = 0; m < fb.cols(); ++m) {
    if (fb.col(m).maxCoeff() <= 0.0) ++empty;
  }
  CHECK(empty <= 1);

  const Mat fine = mel_filterbank(16000, 2048, 128, 0.0, 8000.0);
  for (int m = 0; m < fine.cols(); ++m) {
    CHECK(fine.col(m).maxCoeff() > 0.0);  // enough resolution: no empty filter
  }
}

TEST_CASE("fft size is the next power of two above the window") {
  FbankConfig cfg;  // 25 ms at 16 kHz = 400 samples
  CHECK(fft_size_for(cfg, 16000) == 512);
  CHECK(fft_size_for(cfg, 8000) == 256);  // 200-sample window
}

TEST_CASE("a pure tone concentrates energy in the filter that owns its bin") {
  FbankConfig cfg;
  const Waveform w = sine(1000.0, 1.0);
  const FbankMatrix fb = compute_fbank(w, cfg);
  REQUIRE(fb.frames() == fbank_frame_count(static_cast<long>(w.samples.size()), 16000, cfg));
  REQUIRE(fb.bins() == cfg.n_mels);
  CHECK(fb.values.allFinite());

  // Independent expectation: the mel column with the largest weight at the
  // tone's FFT bin should be the argmax of the averaged spectrum.
  const int n_fft = fft_size_for(cfg, w.sample_rate);
  const Mat filters = mel_filterbank(16000, n_fft, cfg.n_mels, cfg.fmin, 8000.0);
  const long tone_bin = std::lround(1000.0 * n_fft / 16000.0);
  long expect_col;
  filters.row(tone_bin).maxCoeff(&expect_col);

  Eigen::Index got;
  Vec mean = fb.values.colwise().mean();
  mean.maxCoeff(&got);
  CHECK(std::abs(static_cast<long>(got) - expect_col) <= 1);
}

TEST_CASE("silence hits the log floor everywhere") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.assign(16000, 0.0);
  const FbankMatrix fb = compute_fbank(w, {});
  const double floor_val = std::log(1e-10);
  CHECK(fb.values.maxCoeff() == doctest::Approx(floor_val));
  CHECK(fb.values.minCoeff() == doctest::Approx(floor_val));
}

TEST_CASE("frame times advance by the frame shift") {
  const FbankMatrix fb = compute_fbank(sine(440.0, 0.5), {});
  REQUIRE(static_cast<int>(fb.frame_times.size()) == fb.frames());
  for (size_t i = 1; i < fb.frame_times.size(); ++i) {
    CHECK(fb.frame_times[i] - fb.frame_times[i - 1] == doctest::Approx(0.010));
  }
}

TEST_CASE("too-short input and bad configs are rejected") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.assign(100, 0.1);  // shorter than one 400-sample frame
  CHECK_THROWS(compute_fbank(w, {}));

  FbankConfig bad;
  bad.n_mels = 0;
  CHECK_THROWS(compute_fbank(sine(440.0, 1.0), bad));
}

TEST_CASE("wav files round-trip within quantization error") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path("fbank_tmp");
  fs::create_directories(dir);
  const std::string path = (dir / "tone.wav").string();

  const Waveform w = sine(440.0, 0.25);
  write_wav(path, w);
  const Waveform r = read_wav(path);
  REQUIRE(r.sample_rate == w.sample_rate);
  REQUIRE(r.samples.size() == w.samples.size());
  double max_err = 0.0;
  for (size_t i = 0; i < r.samples.size(); ++i) {
    max_err = std::max(max_err, std::abs(r.samples[i] - w.samples[i]));
  }
  CHECK(max_err <= 0.5 / 32768.0 + 1e-12);

  CHECK_THROWS(read_wav((dir / "missing.wav").string()));
  fs::remove_all(dir);
}

TEST_CASE("feature cache round-trips as float32") {
  namespace fs = std::filesystem;
  fs::create_directories("fbank_tmp");
  const std::string path = "fbank_tmp/feat.bin";

  const FbankMatrix fb = compute_fbank(sine(700.0, 0.3), {});
  save_fbank_cache(path, fb);
  const FbankMatrix r = load_fbank_cache(path);
  REQUIRE(r.frames() == fb.frames());
  REQUIRE(r.bins() == fb.bins());
  for (int t = 0; t < fb.frames(); ++t) {
    for (int b = 0; b < fb.bins(); ++b) {
      CHECK(r.values(t, b) == static_cast<double>(static_cast<float>(fb.values(t, b))));
    }
  }
  fs::remove_all("fbank_tmp");
}

TEST_CASE("features are deterministic") {
  const Waveform w = sine(350.0, 0.4);
  const FbankMatrix a = compute_fbank(w, {});
  const FbankMatrix b = compute_fbank(w, {});
  CHECK((a.values.array() == b.values.array()).all());
}
