#include "adc/fbank.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace adc {

namespace {

// In-place iterative radix-2 FFT.
void fft_radix2(std::vector<std::complex<double>>& a) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

void validate(const Waveform& w, const FbankConfig& cfg) {
  if (w.samples.empty()) throw std::invalid_argument("empty waveform");
  if (w.sample_rate <= 0) throw std::invalid_argument("sample rate must be positive");
  if (cfg.n_mels < 1) throw std::invalid_argument("n_mels must be >= 1");
  if (cfg.frame_shift <= 0.0 || cfg.frame_length < cfg.frame_shift) {
    throw std::invalid_argument("require frame_length >= frame_shift > 0");
  }
  if (cfg.window != "hann") throw std::invalid_argument("unsupported window: " + cfg.window);
  const double fmax = cfg.fmax > 0.0 ? cfg.fmax : w.sample_rate / 2.0;
  if (!(cfg.fmin < fmax) || fmax > w.sample_rate / 2.0 + 1e-9) {
    throw std::invalid_argument("require fmin < fmax <= sample_rate/2");
  }
  if (cfg.log_floor <= 0.0) throw std::invalid_argument("log_floor must be positive");
}

}  // namespace

int fbank_frame_count(long n_samples, int sample_rate, const FbankConfig& cfg) {
  const long flen = std::lround(cfg.frame_length * sample_rate);
  const long shift = std::lround(cfg.frame_shift * sample_rate);
  if (n_samples < flen) return 0;
  return static_cast<int>((n_samples - flen) / shift) + 1;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Mat mel_filterbank(int sample_rate, int n_fft, int n_mels, double fmin, double fmax) {
  const int n_bins = n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);

  std::vector<double> corner_hz(static_cast<size_t>(n_mels) + 2);
  for (int i = 0; i < n_mels + 2; ++i) {
    corner_hz[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1));
  }

  Mat fb = Mat::Zero(n_bins, n_mels);
  for (int m = 0; m < n_mels; ++m) {
    const double left = corner_hz[m];
    const double center = corner_hz[m + 1];
    const double right = corner_hz[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      if (f <= left || f >= right) continue;
      fb(k, m) = f < center ? (f - left) / (center - left) : (right - f) / (right - center);
    }
  }
  return fb;
}

int fft_size_for(const FbankConfig& cfg, int sample_rate) {
  const int flen = static_cast<int>(std::lround(cfg.frame_length * sample_rate));
  int n = 1;
  while (n < flen) n <<= 1;
  return n;
}

FbankMatrix compute_fbank(const Waveform& w, const FbankConfig& cfg) {
  validate(w, cfg);
  const int flen = static_cast<int>(std::lround(cfg.frame_length * w.sample_rate));
  const int shift = static_cast<int>(std::lround(cfg.frame_shift * w.sample_rate));
  const int T = fbank_frame_count(static_cast<long>(w.samples.size()), w.sample_rate, cfg);
  if (T < 1) throw std::invalid_argument("waveform shorter than one frame");

  const int n_fft = fft_size_for(cfg, w.sample_rate);
  const int n_bins = n_fft / 2 + 1;
  const double fmax = cfg.fmax > 0.0 ? cfg.fmax : w.sample_rate / 2.0;
  const Mat fb = mel_filterbank(w.sample_rate, n_fft, cfg.n_mels, cfg.fmin, fmax);

  Vec window(flen);
  for (int i = 0; i < flen; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (flen - 1));
  }

  Mat power(T, n_bins);
  std::vector<std::complex<double>> buf(static_cast<size_t>(n_fft));
  for (int t = 0; t < T; ++t) {
    const double* frame = w.samples.data() + static_cast<long>(t) * shift;
    for (int i = 0; i < flen; ++i) buf[i] = frame[i] * window[i];
    std::fill(buf.begin() + flen, buf.end(), std::complex<double>(0.0, 0.0));
    fft_radix2(buf);
    for (int k = 0; k < n_bins; ++k) power(t, k) = std::norm(buf[k]);
  }

  FbankMatrix out;
  out.values.noalias() = power * fb;
  out.values = out.values.array().max(cfg.log_floor).log();
  out.frame_times.resize(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) out.frame_times[t] = t * cfg.frame_shift;
  return out;
}

namespace {
constexpr char kCacheMagic[4] = {'A', 'D', 'C', 'F'};
constexpr uint32_t kCacheVersion = 1;
}  // namespace

void save_fbank_cache(const std::string& path, const FbankMatrix& fb) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(kCacheMagic, 4);
  const uint32_t version = kCacheVersion;
  const uint32_t T = static_cast<uint32_t>(fb.values.rows());
  const uint32_t n_mels = static_cast<uint32_t>(fb.values.cols());
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&T), 4);
  out.write(reinterpret_cast<const char*>(&n_mels), 4);
  std::vector<float> row(n_mels);
  for (uint32_t t = 0; t < T; ++t) {
    for (uint32_t m = 0; m < n_mels; ++m) row[m] = static_cast<float>(fb.values(t, m));
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(n_mels * 4));
  }
  if (!out) throw std::runtime_error("short write: " + path);
}

FbankMatrix load_fbank_cache(const std::string& path, double frame_shift) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open feature cache: " + path);
  char magic[4];
  uint32_t version = 0, T = 0, n_mels = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&T), 4);
  in.read(reinterpret_cast<char*>(&n_mels), 4);
  if (!in || std::memcmp(magic, kCacheMagic, 4) != 0) {
    throw std::runtime_error("bad feature cache header: " + path);
  }
  if (version != kCacheVersion) throw std::runtime_error("unsupported cache version: " + path);

  FbankMatrix fb;
  fb.values.resize(T, n_mels);
  std::vector<float> row(n_mels);
  for (uint32_t t = 0; t < T; ++t) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(n_mels * 4));
    if (!in) throw std::runtime_error("truncated feature cache: " + path);
    for (uint32_t m = 0; m < n_mels; ++m) fb.values(t, m) = row[m];
  }
  fb.frame_times.resize(T);
  for (uint32_t t = 0; t < T; ++t) fb.frame_times[t] = t * frame_shift;
  return fb;
}

}  // namespace adc
