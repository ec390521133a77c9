#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adc/audio_io.hpp"
#include "adc/manifest.hpp"

namespace adc {

// Planted per-class markers. Pause fraction and pitch shape the audio; the
// filler rate shapes the transcripts; prompt_rate (< 1 = slower interviewer)
// leaks a weak class signal into the interviewer's turns.
struct ClassMarkers {
  double pause_fraction = 0.10;
  double pitch_hz = 170.0;
  double filler_rate = 0.05;
  double prompt_rate = 1.0;
};

std::vector<ClassMarkers> default_markers(int classes);

struct GenConfig {
  int classes = 2;
  int per_class = 40;
  double duration = 120.0;  // seconds per recording
  int sample_rate = 16000;
  uint64_t seed = 0;
  double turn_period = 20.0;  // interviewer/participant alternation scale
  std::vector<ClassMarkers> markers;  // one per class; defaults when empty
  std::string out_dir;
};

struct GeneratedRecording {
  Waveform wav;
  ManifestEntry entry;  // wav path left empty; filled by generate_dataset
};

// Synthesizes one labeled interview: alternating interviewer/participant
// turns; speech is a 5-harmonic tone complex at the class pitch with Gaussian
// noise, silences are exact zeros at the class pause fraction; transcripts
// draw fillers at the class rate. Deterministic in (label, seed, index).
GeneratedRecording generate_recording(int label, uint64_t seed, int index,
                                      const GenConfig& cfg);

// Balanced dataset: writes wav/ and manifest.jsonl under cfg.out_dir, splits
// 80/10/10 by participant id, returns the manifest entries.
std::vector<ManifestEntry> generate_dataset(const GenConfig& cfg, int workers = 1);

}  // namespace adc
