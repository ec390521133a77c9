#pragma once

#include <string>
#include <vector>

#include "adc/audio_io.hpp"
#include "adc/linalg.hpp"

namespace adc {

/// Log-mel filterbank settings. Defaults follow the common speech recipe:
/// 128 bins, 25 ms Hann-windowed frames every 10 ms, HTK mel scale.
struct FbankConfig {
  int n_mels = 128;
  double frame_shift = 0.010;   // seconds
  double frame_length = 0.025;  // seconds
  std::string window = "hann";
  double fmin = 0.0;
  double fmax = 0.0;  // 0 means sample_rate / 2
  double log_floor = 1e-10;
};

struct FbankMatrix {
  Mat values;  // T x n_mels, natural-log energies
  std::vector<double> frame_times;

  int frames() const { return static_cast<int>(values.rows()); }
  int bins() const { return static_cast<int>(values.cols()); }
};

/// Number of complete frames for a signal of n_samples: incomplete tail
/// frames are dropped.
int fbank_frame_count(long n_samples, int sample_rate, const FbankConfig& cfg);

/// HTK mel scale: m = 2595 * log10(1 + f/700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular, area-unnormalized mel filters evaluated at FFT bin centers.
/// Returns an (n_fft/2 + 1) x n_mels weight matrix.
Mat mel_filterbank(int sample_rate, int n_fft, int n_mels, double fmin, double fmax);

/// Power-of-two DFT size for the configured frame length.
int fft_size_for(const FbankConfig& cfg, int sample_rate);

/// Hann window -> power spectrum -> mel filterbank -> ln(max(e, log_floor)).
/// Throws if the waveform is shorter than one frame or the config is invalid.
FbankMatrix compute_fbank(const Waveform& w, const FbankConfig& cfg);

/// Binary feature cache: "ADCF" magic, version, T, n_mels header followed by
/// row-major float32 values.
void save_fbank_cache(const std::string& path, const FbankMatrix& fb);
FbankMatrix load_fbank_cache(const std::string& path, double frame_shift = 0.010);

}  // namespace adc
