#include "adc/inference.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "adc/audio_io.hpp"
#include "adc/metrics.hpp"
#include "adc/parallel.hpp"

namespace adc {

using nlohmann::json;

std::vector<RecordingSegments> prepare_segments(const std::vector<ManifestEntry>& entries,
                                                const std::string& manifest_path,
                                                const SegmentOptions& opt,
                                                const FbankConfig& fb, int workers) {
  std::vector<RecordingSegments> out(entries.size());
  parallel_for(static_cast<int>(entries.size()), workers, [&](int i) {
    const ManifestEntry& e = entries[i];
    RecordingSegments rs;
    rs.recording_id = e.recording_id;
    rs.participant_id = e.participant_id;
    rs.label = e.label;

    const Waveform w = read_wav(resolve_wav_path(manifest_path, e.wav));
    const std::vector<Chunk> chunks = energy_vad(w, opt.vad);
    rs.turns = assign_roles(oracle_diarize(e.turns));
    const std::vector<Span> spans = annotate_roles(chunks, rs.turns);
    const std::vector<Segment> merged =
        merge_segments(spans, opt.max_segment_dur, make_span_filter(opt.roles, opt.include_silence));

    for (const Segment& seg : merged) {
      const Waveform spliced = splice_segment(w, seg);
      if (spliced.duration() < opt.min_segment_sec) continue;
      FbankMatrix feats = compute_fbank(spliced, fb);
      if (feats.frames() < kBackboneMinFrames) continue;
      rs.segments.push_back(seg);
      rs.features.push_back(feats.values.cast<float>());
    }
    out[i] = std::move(rs);
  });
  return out;
}

std::vector<SegmentPrediction> segment_probs(const RecordingSegments& rs,
                                             const ModelParams& m, int workers) {
  std::vector<SegmentPrediction> preds(rs.features.size());
  parallel_for(static_cast<int>(rs.features.size()), workers, [&](int i) {
    const Mat f = rs.features[i].cast<double>();
    const Vec p = softmax(backbone_forward(f, m));
    preds[i] = {i, rs.segments[i].start, rs.segments[i].end, p, p.maxCoeff()};
  });
  return preds;
}

VoteResult selective_vote_detail(const std::vector<SegmentPrediction>& preds, int k) {
  if (preds.empty()) throw std::invalid_argument("no segment predictions to vote over");
  const int n = static_cast<int>(preds.size());
  std::vector<int> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (preds[a].peak != preds[b].peak) return preds[a].peak > preds[b].peak;
    if (preds[a].start != preds[b].start) return preds[a].start < preds[b].start;
    return a < b;
  });
  const int kk = k <= 0 ? n : std::min(k, n);

  VoteResult vr;
  vr.selected.assign(order.begin(), order.begin() + kk);
  vr.probs = Vec::Zero(preds.front().probs.size());
  for (int idx : vr.selected) vr.probs += preds[idx].probs;
  vr.probs /= static_cast<double>(kk);
  return vr;
}

Vec selective_vote(const std::vector<SegmentPrediction>& preds, int k) {
  return selective_vote_detail(preds, k).probs;
}

Vec merge_3to2(const Vec& p3) {
  if (p3.size() != 3) throw std::invalid_argument("expected a 3-class probability vector");
  if (!is_probability_vector(p3)) throw std::invalid_argument("not a probability vector");
  Vec p2(2);
  p2 << p3[0], p3[1] + p3[2];
  return p2;
}

namespace {

std::string role_display(Role role) {
  switch (role) {
    case Role::interviewer: return "Interviewer";
    case Role::participant: return "Participant";
    default: return "Speaker";
  }
}

}  // namespace

Transcript build_transcript(const std::vector<SpeakerTurn>& turns) {
  Transcript t;
  for (const SpeakerTurn& turn : turns) {
    if (turn.role == Role::unassigned) {
      throw std::invalid_argument("transcript turn without an assigned role");
    }
    t.lines.push_back({turn.role, turn.text});
  }
  return t;
}

Transcript transcript_for_segment(const std::vector<SpeakerTurn>& turns, const Segment& seg) {
  Transcript t;
  for (const SpeakerTurn& turn : turns) {
    bool overlaps = false;
    for (const Span& s : seg.sources) {
      if (std::min(turn.end, s.end) - std::max(turn.start, s.start) > 0.0) {
        overlaps = true;
        break;
      }
    }
    if (!overlaps) continue;
    if (turn.role == Role::unassigned) {
      throw std::invalid_argument("transcript turn without an assigned role");
    }
    t.lines.push_back({turn.role, turn.text});
  }
  return t;
}

std::string build_prompt(const Transcript& t, const std::vector<std::string>& labels) {
  if (labels.empty()) throw std::invalid_argument("label set must not be empty");
  std::ostringstream os;
  os << "You are a helpful assistant that classifies if a participant in an interview "
        "has dementia\n";
  for (const Transcript::Line& line : t.lines) {
    os << role_display(line.role) << ": " << line.text << '\n';
  }
  for (size_t i = 0; i < labels.size(); ++i) os << (i ? ", " : "") << labels[i];
  os << "\nAnswer:";
  return os.str();
}

Vec fuse(const Vec& p_audio, const Vec& p_text, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("fusion weight must be in [0, 1]");
  }
  if (p_audio.size() != p_text.size()) {
    throw std::invalid_argument("fusion inputs disagree on class count");
  }
  return (1.0 - lambda) * p_audio + lambda * p_text;
}

RecordingDecision decide_recording(const RecordingSegments& rs, const ModelParams& m,
                                   const TextClassifier* text, int top_k, double lambda) {
  RecordingDecision d;
  d.recording_id = rs.recording_id;
  d.label = rs.label;

  const std::vector<SegmentPrediction> preds = segment_probs(rs, m);
  VoteResult vr = selective_vote_detail(preds, top_k);
  d.p_audio = std::move(vr.probs);
  d.selected_segments = std::move(vr.selected);

  if (text) {
    std::vector<SegmentPrediction> text_preds(rs.segments.size());
    for (size_t i = 0; i < rs.segments.size(); ++i) {
      const Vec p = text->score(transcript_for_segment(rs.turns, rs.segments[i]));
      text_preds[i] = {static_cast<int>(i), rs.segments[i].start, rs.segments[i].end, p,
                       p.maxCoeff()};
    }
    d.p_text = selective_vote(text_preds, top_k);
    d.lambda = lambda;
    d.p_fused = fuse(d.p_audio, d.p_text, lambda);
  } else {
    d.lambda = 0.0;
    d.p_fused = d.p_audio;
  }
  return d;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid(11);
  for (int i = 0; i <= 10; ++i) grid[i] = i / 10.0;
  return grid;
}

LambdaSweepResult sweep_lambda(const std::vector<RecordingDecision>& decisions,
                               const std::vector<double>& grid) {
  if (decisions.empty()) throw std::invalid_argument("no decisions to sweep over");
  if (grid.empty()) throw std::invalid_argument("empty lambda grid");
  for (const RecordingDecision& d : decisions) {
    if (d.p_text.size() == 0) {
      throw std::invalid_argument("lambda sweep needs text probabilities for every recording");
    }
  }

  LambdaSweepResult result;
  bool first = true;
  for (double lambda : grid) {
    std::vector<MultiScoredExample> fused;
    fused.reserve(decisions.size());
    for (const RecordingDecision& d : decisions) {
      fused.push_back({fuse(d.p_audio, d.p_text, lambda), d.label, d.recording_id});
    }
    const double auc = recording_auc(fused);
    result.rows.push_back({lambda, auc});
    if (first || auc > result.best_auc) {
      result.best_auc = auc;
      result.best_lambda = lambda;
      first = false;
    }
  }
  return result;
}

void write_decisions(const std::string& path,
                     const std::vector<RecordingDecision>& decisions) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const RecordingDecision& d : decisions) {
    json j{{"recording_id", d.recording_id},
           {"label", d.label},
           {"p_audio", std::vector<double>(d.p_audio.begin(), d.p_audio.end())},
           {"lambda", d.lambda},
           {"p_fused", std::vector<double>(d.p_fused.begin(), d.p_fused.end())},
           {"selected_segments", d.selected_segments}};
    if (d.p_text.size() > 0) {
      j["p_text"] = std::vector<double>(d.p_text.begin(), d.p_text.end());
    } else {
      j["p_text"] = nullptr;
    }
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("short write: " + path);
}

}  // namespace adc
