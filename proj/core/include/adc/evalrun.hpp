#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "adc/inference.hpp"
#include "adc/manifest.hpp"
#include "adc/metrics.hpp"
#include "adc/model.hpp"
#include "adc/textclf.hpp"

namespace adc {

struct EvalOptions {
  SegmentOptions seg;  // headline segmentation policy (also used by sweeps)
  int top_k = 0;       // headline voting k; 0 = all segments
  std::vector<int> k_grid = {1, 3, 5, 9, 0};
  std::vector<double> lambda_grid;  // empty -> default_lambda_grid()
  std::vector<double> duration_caps = {30.0, 60.0, 120.0, 240.0, 360.0};
  bool ablations = true;  // role / silence segment-filter rows (audio system)
  int workers = 1;
};

// One metrics-table row. `series` states which sweep produced it: "headline",
// "k" (voting size), "lambda" (fusion weight), "duration" (segment cap, with
// the running best), or "ablation" (role/silence filters).
struct EvalRow {
  std::string series;
  std::string system;  // audio | text | fused
  std::string roles;
  bool include_silence = true;
  double duration_cap = 0.0;
  int top_k = 0;
  double lambda = std::nan("");  // set on fused rows only
  double auc = std::nan("");
  double best_auc = std::nan("");  // duration series: best AUC so far
  int n_recordings = 0;
};

struct EvalReport {
  std::string split;
  int n_classes = 0;
  double audio_auc = std::nan("");
  double text_auc = std::nan("");
  double fused_auc = std::nan("");  // at best_lambda
  double best_lambda = std::nan("");
  int best_k = 0;
  std::vector<EvalRow> rows;
};

// Recording-level AUC table over one split: headline audio/text/fused rows, a
// voting-k sweep, a fusion-weight sweep (ties -> smaller lambda), duration
// caps with a best-so-far column, and role/silence ablations (audio only).
// `text` may be null, which skips the text and fused systems. Recordings left
// with no usable segments by a filter score as the uniform distribution.
EvalReport eval_run(const std::vector<ManifestEntry>& all_entries,
                    const std::string& manifest_path, const std::string& split,
                    const ModelParams& model, const TextClassifier* text,
                    const EvalOptions& opt);

void write_eval_csv(const std::string& path, const EvalReport& report);
void write_eval_json(const std::string& path, const EvalReport& report);

}  // namespace adc
