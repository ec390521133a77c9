#include "adc/synthetic.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

#include "adc/audio_io.hpp"
#include "adc/manifest.hpp"
#include "adc/metrics.hpp"
#include "adc/textclf.hpp"
#include "doctest.h"

using namespace adc;

namespace {

double zero_fraction(const Waveform& w) {
  long zeros = 0;
  for (double s : w.samples) zeros += s == 0.0;
  return static_cast<double>(zeros) / static_cast<double>(w.samples.size());
}

GenConfig quick_cfg(double duration, int classes = 2) {
  GenConfig cfg;
  cfg.classes = classes;
  cfg.duration = duration;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("recordings are deterministic in (label, seed, index)") {
  const GenConfig cfg = quick_cfg(12.0);
  const GeneratedRecording a = generate_recording(1, 5, 2, cfg);
  const GeneratedRecording b = generate_recording(1, 5, 2, cfg);
  REQUIRE(a.wav.samples.size() == b.wav.samples.size());
  CHECK(a.wav.samples == b.wav.samples);
  REQUIRE(a.entry.turns.size() == b.entry.turns.size());
  for (size_t i = 0; i < a.entry.turns.size(); ++i) {
    CHECK(a.entry.turns[i].text == b.entry.turns[i].text);
    CHECK(a.entry.turns[i].start == b.entry.turns[i].start);
  }

  const GeneratedRecording c = generate_recording(1, 5, 3, cfg);
  CHECK(a.wav.samples != c.wav.samples);
  const GeneratedRecording d = generate_recording(1, 6, 2, cfg);
  CHECK(a.wav.samples != d.wav.samples);
}

TEST_CASE("labels outside the configured classes are rejected") {
  const GenConfig cfg = quick_cfg(12.0);
  CHECK_THROWS(generate_recording(2, 1, 0, cfg));
  CHECK_THROWS(generate_recording(-1, 1, 0, cfg));

  GenConfig three = quick_cfg(12.0, 3);
  CHECK_NOTHROW(generate_recording(2, 1, 0, three));
}

TEST_CASE("very short durations are rejected") {
  CHECK_THROWS(generate_recording(0, 1, 0, quick_cfg(5.0)));
}

TEST_CASE("planted pause fractions show up in the waveform") {
  const GenConfig cfg = quick_cfg(120.0);
  // Class 1 of the binary setup carries the 0.40 pause marker; class 0 0.10.
  for (int idx : {0, 1, 2}) {
    CHECK(zero_fraction(generate_recording(1, 7, idx, cfg).wav) ==
          doctest::Approx(0.40).epsilon(0.125));
    CHECK(zero_fraction(generate_recording(0, 7, idx, cfg).wav) ==
          doctest::Approx(0.10).epsilon(0.5));
  }
  // And with tighter absolute bounds: within 0.05 of the marker.
  CHECK(std::abs(zero_fraction(generate_recording(1, 7, 0, cfg).wav) - 0.40) < 0.05);
  CHECK(std::abs(zero_fraction(generate_recording(0, 7, 0, cfg).wav) - 0.10) < 0.05);
}

TEST_CASE("filler usage tracks the class marker on long recordings") {
  const GenConfig cfg = quick_cfg(120.0);
  const std::set<std::string> fillers = {"um", "uh", "er", "ah", "hmm", "mmm"};
  for (int label : {0, 1}) {
    const GeneratedRecording rec = generate_recording(label, 3, 0, cfg);
    long filler_count = 0, total = 0;
    // Participant turns only: interviewer speech has its own fixed rate.
    for (size_t i = 1; i < rec.entry.turns.size(); i += 2) {
      for (const std::string& tok : tokenize(rec.entry.turns[i].text)) {
        total += 1;
        filler_count += fillers.count(tok) > 0;
      }
    }
    REQUIRE(total > 50);
    const double rate = static_cast<double>(filler_count) / total;
    const double marker = label == 0 ? 0.05 : 0.45;
    CHECK(std::abs(rate - marker) < 0.05);
  }
}

TEST_CASE("the interviewer prompts more slowly for the impaired class") {
  const GenConfig cfg = quick_cfg(120.0);
  auto mean_interviewer_turn = [&](int label) {
    const GeneratedRecording rec = generate_recording(label, 9, 0, cfg);
    double sum = 0.0;
    int count = 0;
    for (size_t i = 0; i < rec.entry.turns.size(); i += 2) {
      sum += rec.entry.turns[i].duration();
      count += 1;
    }
    return sum / count;
  };
  // prompt_rate 0.65 stretches prompts by ~1/0.65.
  CHECK(mean_interviewer_turn(1) / mean_interviewer_turn(0) > 1.2);
}

TEST_CASE("turns alternate, start with the interviewer, and stay in bounds") {
  const GenConfig cfg = quick_cfg(60.0);
  const GeneratedRecording rec = generate_recording(1, 21, 4, cfg);
  REQUIRE(rec.entry.turns.size() >= 4);
  double prev_end = 0.0;
  for (size_t i = 0; i < rec.entry.turns.size(); ++i) {
    const SpeakerTurn& t = rec.entry.turns[i];
    CHECK(t.start >= prev_end);
    CHECK(t.end <= cfg.duration + 1e-9);
    CHECK(t.speaker_id == (i % 2 == 0 ? "spk0" : "spk1"));
    CHECK(!t.text.empty());
    prev_end = t.end;
  }
}

TEST_CASE("a pause-fraction threshold alone separates the classes") {
  GenConfig cfg = quick_cfg(60.0);
  cfg.per_class = 6;
  std::vector<ScoredExample> ex;
  for (int label : {0, 1}) {
    for (int idx = 0; idx < cfg.per_class; ++idx) {
      ex.push_back({zero_fraction(generate_recording(label, cfg.seed, idx, cfg).wav),
                    label, "r"});
    }
  }
  CHECK(roc_auc(ex) >= 0.95);
}

TEST_CASE("generated datasets land on disk with an 80/10/10 split") {
  namespace fs = std::filesystem;
  const std::string root = "synth_tmp";
  fs::remove_all(root);

  GenConfig cfg = quick_cfg(10.0);
  cfg.per_class = 10;
  cfg.out_dir = root;
  const auto entries = generate_dataset(cfg);
  REQUIRE(entries.size() == 20);

  std::map<std::string, int> split_count;
  std::set<std::string> participants;
  int label1 = 0;
  for (const auto& e : entries) {
    split_count[e.split] += 1;
    participants.insert(e.participant_id);
    label1 += e.label == 1;
    CHECK(fs::exists(resolve_wav_path(root + "/manifest.jsonl", e.wav)));
  }
  CHECK(label1 == 10);
  CHECK(participants.size() == 20);  // one recording per participant
  CHECK(split_count["train"] == 16);
  CHECK(split_count["validation"] == 2);
  CHECK(split_count["test"] == 2);

  // The manifest on disk round-trips to the returned entries.
  const auto loaded = load_manifest(root + "/manifest.jsonl");
  REQUIRE(loaded.size() == entries.size());
  CHECK(loaded[3].recording_id == entries[3].recording_id);
  CHECK(loaded[3].turns.size() == entries[3].turns.size());

  const Waveform w = read_wav(resolve_wav_path(root + "/manifest.jsonl", entries[0].wav));
  CHECK(w.sample_rate == 16000);
  CHECK(w.duration() == doctest::Approx(10.0).epsilon(0.01));

  fs::remove_all(root);
}

TEST_CASE("dataset generation validates its configuration") {
  GenConfig cfg = quick_cfg(10.0);
  cfg.per_class = 2;  // too few for a 3-way split
  cfg.out_dir = "synth_bad";
  CHECK_THROWS(generate_dataset(cfg));

  cfg = quick_cfg(10.0);
  cfg.per_class = 4;
  cfg.classes = 4;  // only 2 or 3 supported by the default markers
  cfg.out_dir = "synth_bad";
  CHECK_THROWS(generate_dataset(cfg));
  std::filesystem::remove_all("synth_bad");
}

TEST_CASE("default markers order the classes by severity") {
  const auto two = default_markers(2);
  REQUIRE(two.size() == 2);
  CHECK(two[0].pause_fraction < two[1].pause_fraction);
  CHECK(two[0].pitch_hz > two[1].pitch_hz);
  CHECK(two[0].filler_rate < two[1].filler_rate);
  CHECK(two[1].prompt_rate < two[0].prompt_rate);

  const auto three = default_markers(3);
  REQUIRE(three.size() == 3);
  CHECK(three[0].pause_fraction < three[1].pause_fraction);
  CHECK(three[1].pause_fraction < three[2].pause_fraction);
  CHECK_THROWS(default_markers(4));
}
