#pragma once

#include <optional>
#include <string>
#include <vector>

#include "adc/fbank.hpp"
#include "adc/manifest.hpp"
#include "adc/model.hpp"
#include "adc/segmentation.hpp"
#include "adc/textclf.hpp"

namespace adc {

// Segmentation policy applied when turning a recording into model inputs.
struct SegmentOptions {
  double max_segment_dur = 360.0;
  RoleFilter roles = RoleFilter::both;
  bool include_silence = true;
  VadConfig vad;
  // Spliced segments shorter than this are dropped (too short for the
  // backbone's three time halvings).
  double min_segment_sec = 0.25;
};

// One recording ready for the model: bounded segments plus their features
// (float32 to keep a whole dataset resident), and role-assigned turns for the
// text branch.
struct RecordingSegments {
  std::string recording_id;
  std::string participant_id;
  int label = 0;
  std::vector<SpeakerTurn> turns;
  std::vector<Segment> segments;
  std::vector<MatF> features;  // per segment: frames x n_mels
};

// Full front half of the pipeline per recording: read wav, activity
// detection, oracle diarization + role assignment, role annotation, bounded
// merge, per-segment features of the spliced audio. Parallel across
// recordings; output order follows `entries`.
std::vector<RecordingSegments> prepare_segments(const std::vector<ManifestEntry>& entries,
                                                const std::string& manifest_path,
                                                const SegmentOptions& opt,
                                                const FbankConfig& fb = {},
                                                int workers = 1);

struct SegmentPrediction {
  int segment_index = 0;
  double start = 0.0;
  double end = 0.0;
  Vec probs;
  double peak = 0.0;
};

// softmax(backbone_forward) per segment, order preserved.
std::vector<SegmentPrediction> segment_probs(const RecordingSegments& rs,
                                             const ModelParams& m, int workers = 1);

struct VoteResult {
  Vec probs;
  std::vector<int> selected;  // segment indices, highest peak first
};

// Average the probabilities of the top min(k, N) segments by peak probability
// (ties broken by earlier start). k <= 0 means all segments.
VoteResult selective_vote_detail(const std::vector<SegmentPrediction>& preds, int k);
Vec selective_vote(const std::vector<SegmentPrediction>& preds, int k);

// (normal, mci, dementia) -> (normal, mci + dementia).
Vec merge_3to2(const Vec& p3);

// Time-ordered "[role]: [text]" lines; all roles must be assigned.
Transcript build_transcript(const std::vector<SpeakerTurn>& turns);

// Lines of the turns overlapping the segment's source spans.
Transcript transcript_for_segment(const std::vector<SpeakerTurn>& turns, const Segment& seg);

// Task description, transcript lines, label-set line, "Answer:".
std::string build_prompt(const Transcript& t, const std::vector<std::string>& labels);

// p = (1 - lambda) * p_audio + lambda * p_text.
Vec fuse(const Vec& p_audio, const Vec& p_text, double lambda);

struct RecordingDecision {
  std::string recording_id;
  int label = 0;
  Vec p_audio;
  Vec p_text;  // size 0 when no text branch ran
  double lambda = 0.0;
  Vec p_fused;
  std::vector<int> selected_segments;
};

// Per-segment audio probabilities + selective voting; when a text classifier
// is given, per-segment transcripts are scored and voted the same way, then
// fused with the given weight.
RecordingDecision decide_recording(const RecordingSegments& rs, const ModelParams& m,
                                   const TextClassifier* text, int top_k, double lambda);

struct LambdaSweepRow {
  double lambda = 0.0;
  double auc = 0.0;
};

struct LambdaSweepResult {
  std::vector<LambdaSweepRow> rows;
  double best_lambda = 0.0;
  double best_auc = 0.0;
};

std::vector<double> default_lambda_grid();  // 0.0, 0.1, ..., 1.0

// Fused AUC per grid value; argmax ties resolve to the smaller lambda.
// Every decision must carry p_text.
LambdaSweepResult sweep_lambda(const std::vector<RecordingDecision>& decisions,
                               const std::vector<double>& grid);

void write_decisions(const std::string& path,
                     const std::vector<RecordingDecision>& decisions);

}  // namespace adc
