#pragma once

#include <string>
#include <vector>

namespace adc {

/// Mono audio signal, samples in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Reads a PCM 16-bit mono WAV file. Samples are scaled by 1/32768.
/// Throws std::runtime_error on missing files, non-mono or non-PCM data,
/// and truncated headers or payloads.
Waveform read_wav(const std::string& path);

/// Writes a PCM 16-bit mono WAV file; samples are clamped to [-1, 1] and
/// quantized with round-to-nearest.
void write_wav(const std::string& path, const Waveform& w);

}  // namespace adc
