#include "adc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <stdexcept>

#include "adc/parallel.hpp"
#include "adc/rng.hpp"

namespace adc {

namespace {

constexpr double kBurstMin = 0.5;
constexpr double kBurstMax = 1.5;
constexpr double kToneAmp = 0.22;
constexpr double kNoiseSigma = 0.02;
constexpr double kFadeSec = 0.010;
constexpr double kTokensPerSec = 2.0;
constexpr double kInterviewerPitch = 210.0;
constexpr double kInterviewerFillerRate = 0.02;

const std::vector<std::string>& content_words() {
  static const std::vector<std::string> words = {
      "yesterday", "morning",  "kitchen", "window",  "garden", "children",
      "walking",   "cooking",  "dinner",  "sister",  "brother", "holiday",
      "picture",   "remember", "always",  "sometimes", "water", "running",
      "outside",   "reading",  "stories", "weather", "market",  "flowers",
      "neighbor",  "evening",  "coffee",  "table",   "little",  "house"};
  return words;
}

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words = {"um", "uh", "er",
                                                 "ah", "hmm", "mmm"};
  return words;
}

const std::vector<std::string>& prompt_words() {
  static const std::vector<std::string> words = {
      "tell", "me",  "more", "about", "that",     "please", "describe",
      "what", "you", "see",  "here",  "anything", "else"};
  return words;
}

// One voiced burst: harmonic tone complex plus in-burst noise, with short
// linear fades so chunk boundaries stay free of clicks.
void add_burst(Waveform& w, Rng& rng, double start, double dur, double pitch) {
  const int sr = w.sample_rate;
  const long i0 = std::lround(start * sr);
  const long i1 = std::min<long>(std::lround((start + dur) * sr),
                                 static_cast<long>(w.samples.size()));
  if (i1 <= i0) return;
  double phase[5];
  for (double& p : phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double amp = kToneAmp + rng.uniform(-0.03, 0.03);
  for (long i = i0; i < i1; ++i) {
    const double tau = static_cast<double>(i - i0) / sr;
    double s = 0.0;
    for (int k = 1; k <= 5; ++k) {
      s += std::sin(2.0 * std::numbers::pi * k * pitch * tau + phase[k - 1]) / k;
    }
    s = amp * s + kNoiseSigma * rng.normal();
    const double fade =
        std::min({1.0, tau / kFadeSec, (dur - tau) / kFadeSec});
    w.samples[i] = static_cast<float>(s * std::max(fade, 0.0));
  }
}

// Fills [t0, t0+dur) with alternating bursts and exact-zero pauses sized so
// the expected silence share matches pause_fraction. Returns voiced seconds.
double synth_turn(Waveform& w, Rng& rng, double t0, double dur,
                  double pause_fraction, double pitch) {
  const double pf = std::clamp(pause_fraction, 0.02, 0.90);
  double t = t0;
  const double end = t0 + dur;
  bool speech = true;
  double voiced = 0.0;
  while (t < end - 1e-9) {
    double d = rng.uniform(kBurstMin, kBurstMax);
    if (!speech) d *= pf / (1.0 - pf);
    d = std::min(d, end - t);
    if (speech && d > 0.02) {
      add_burst(w, rng, t, d, pitch);
      voiced += d;
    }
    t += d;
    speech = !speech;
  }
  return voiced;
}

std::string make_text(Rng& rng, double voiced_secs, double filler_rate,
                      const std::vector<std::string>& vocab) {
  const int n_tokens =
      std::max(3, static_cast<int>(std::lround(voiced_secs * kTokensPerSec)));
  std::string text;
  for (int i = 0; i < n_tokens; ++i) {
    const bool filler = rng.uniform() < filler_rate;
    const auto& pool = filler ? filler_words() : vocab;
    const std::string& word = pool[static_cast<int>(rng.uniform_int(
        static_cast<uint64_t>(pool.size())))];
    if (!text.empty()) text += ' ';
    text += word;
  }
  return text;
}

std::string pad3(int v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", v);
  return buf;
}

const ClassMarkers& markers_for(const GenConfig& cfg,
                                const std::vector<ClassMarkers>& fallback,
                                int label) {
  const auto& m = cfg.markers.empty() ? fallback : cfg.markers;
  if (label < 0 || label >= static_cast<int>(m.size())) {
    throw std::invalid_argument("generate_recording: label out of range");
  }
  return m[label];
}

}  // namespace

std::vector<ClassMarkers> default_markers(int classes) {
  const std::vector<ClassMarkers> three = {
      {.pause_fraction = 0.10, .pitch_hz = 170.0, .filler_rate = 0.05, .prompt_rate = 1.0},
      {.pause_fraction = 0.25, .pitch_hz = 140.0, .filler_rate = 0.25, .prompt_rate = 0.80},
      {.pause_fraction = 0.40, .pitch_hz = 115.0, .filler_rate = 0.45, .prompt_rate = 0.65},
  };
  if (classes == 2) return {three[0], three[2]};
  if (classes == 3) return three;
  throw std::invalid_argument("default_markers: classes must be 2 or 3");
}

GeneratedRecording generate_recording(int label, uint64_t seed, int index,
                                      const GenConfig& cfg) {
  if (cfg.duration < 10.0) {
    throw std::invalid_argument("generate_recording: duration must be >= 10 s");
  }
  const auto fallback = default_markers(cfg.classes);
  const ClassMarkers& mk = markers_for(cfg, fallback, label);

  const uint64_t stream = static_cast<uint64_t>(label) * 1000003ull +
                          static_cast<uint64_t>(index) * 7919ull + 1ull;
  Rng rng(Rng::mix(seed, stream));

  Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples.assign(
      static_cast<size_t>(std::lround(cfg.duration * cfg.sample_rate)), 0.0f);

  const double part_pitch = mk.pitch_hz + rng.uniform(-10.0, 10.0);
  const double inter_pitch = kInterviewerPitch + rng.uniform(-5.0, 5.0);
  const double part_pf =
      std::clamp(mk.pause_fraction + rng.uniform(-0.02, 0.02), 0.02, 0.90);
  // Interviewer pauses drift only part of the way toward the class marker so
  // the participant stays the dominant signal.
  const double inter_pf = 0.10 + 0.75 * (part_pf - 0.10);

  std::vector<SpeakerTurn> turns;
  double t = 0.0;
  bool interviewer = true;  // interviewer always opens the session
  while (cfg.duration - t >= 2.0) {
    double dur = interviewer
                     ? rng.uniform(0.15, 0.25) * cfg.turn_period / mk.prompt_rate
                     : rng.uniform(0.60, 0.90) * cfg.turn_period;
    dur = std::min(dur, cfg.duration - t);
    const double pf = interviewer ? inter_pf : part_pf;
    const double pitch = interviewer ? inter_pitch : part_pitch;
    const double voiced = synth_turn(w, rng, t, dur, pf, pitch);
    SpeakerTurn turn;
    turn.start = t;
    turn.end = t + dur;
    turn.speaker_id = interviewer ? "spk0" : "spk1";
    turn.text = make_text(rng, voiced,
                          interviewer ? kInterviewerFillerRate : mk.filler_rate,
                          interviewer ? prompt_words() : content_words());
    turns.push_back(std::move(turn));
    t += dur + rng.uniform(0.15, 0.35);
    interviewer = !interviewer;
  }

  const auto names = class_label_names(cfg.classes);
  GeneratedRecording out;
  out.wav = std::move(w);
  out.entry.recording_id = "rec_" + names[label] + "_" + pad3(index);
  out.entry.participant_id = "p_" + names[label] + "_" + pad3(index);
  out.entry.label = label;
  out.entry.label_name = names[label];
  out.entry.turns = std::move(turns);
  return out;
}

std::vector<ManifestEntry> generate_dataset(const GenConfig& cfg, int workers) {
  if (cfg.out_dir.empty()) {
    throw std::invalid_argument("generate_dataset: out_dir is required");
  }
  if (cfg.per_class < 3) {
    throw std::invalid_argument(
        "generate_dataset: need at least 3 recordings per class for "
        "train/validation/test splits");
  }
  if (!cfg.markers.empty() &&
      static_cast<int>(cfg.markers.size()) != cfg.classes) {
    throw std::invalid_argument(
        "generate_dataset: markers size must match classes");
  }
  namespace fs = std::filesystem;
  const fs::path root(cfg.out_dir);
  fs::create_directories(root / "wav");

  // 80/10/10 by index, but validation and test always get at least one
  // recording per class.
  const int n_val = std::max(1, cfg.per_class / 10);
  const int n_test = std::max(1, cfg.per_class / 10);
  const int n_train = cfg.per_class - n_val - n_test;

  const int total = cfg.classes * cfg.per_class;
  std::vector<ManifestEntry> entries(total);
  parallel_for(total, workers, [&](int job) {
    const int label = job / cfg.per_class;
    const int index = job % cfg.per_class;
    GeneratedRecording rec = generate_recording(label, cfg.seed, index, cfg);
    const std::string rel = "wav/" + rec.entry.recording_id + ".wav";
    write_wav((root / rel).string(), rec.wav);
    rec.entry.wav = rel;
    rec.entry.split = index < n_train             ? "train"
                      : index < n_train + n_val   ? "validation"
                                                  : "test";
    entries[job] = std::move(rec.entry);
  });

  save_manifest((root / "manifest.jsonl").string(), entries);
  return entries;
}

}  // namespace adc
