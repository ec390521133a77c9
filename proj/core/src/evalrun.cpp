#include "adc/evalrun.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "adc/parallel.hpp"

namespace adc {

namespace {

using nlohmann::json;

std::vector<std::vector<SegmentPrediction>> all_segment_probs(
    const std::vector<RecordingSegments>& rss, const ModelParams& m, int workers) {
  std::vector<std::vector<SegmentPrediction>> preds(rss.size());
  parallel_for(static_cast<int>(rss.size()), workers,
               [&](int i) { preds[i] = segment_probs(rss[i], m); });
  return preds;
}

Vec vote_or_uniform(const std::vector<SegmentPrediction>& preds, int k, int n_classes) {
  if (preds.empty()) return Vec::Constant(n_classes, 1.0 / n_classes);
  return selective_vote(preds, k);
}

std::vector<MultiScoredExample> voted_examples(
    const std::vector<RecordingSegments>& rss,
    const std::vector<std::vector<SegmentPrediction>>& preds, int k, int n_classes) {
  std::vector<MultiScoredExample> ex(rss.size());
  for (size_t i = 0; i < rss.size(); ++i) {
    ex[i] = {vote_or_uniform(preds[i], k, n_classes), rss[i].label, rss[i].recording_id};
  }
  return ex;
}

// Per-recording text-branch predictions: one scored transcript per segment,
// voted exactly like the audio branch.
std::vector<std::vector<SegmentPrediction>> all_text_probs(
    const std::vector<RecordingSegments>& rss, const TextClassifier& text, int workers) {
  std::vector<std::vector<SegmentPrediction>> preds(rss.size());
  parallel_for(static_cast<int>(rss.size()), workers, [&](int i) {
    const RecordingSegments& rs = rss[i];
    preds[i].resize(rs.segments.size());
    for (size_t s = 0; s < rs.segments.size(); ++s) {
      const Vec p = text.score(transcript_for_segment(rs.turns, rs.segments[s]));
      preds[i][s] = {static_cast<int>(s), rs.segments[s].start, rs.segments[s].end, p,
                     p.maxCoeff()};
    }
  });
  return preds;
}

std::string csv_num(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

json row_json(const EvalRow& r) {
  json j{{"series", r.series},
         {"system", r.system},
         {"roles", r.roles},
         {"include_silence", r.include_silence},
         {"duration_cap", r.duration_cap},
         {"top_k", r.top_k},
         {"auc", r.auc},
         {"n_recordings", r.n_recordings}};
  j["lambda"] = std::isnan(r.lambda) ? json(nullptr) : json(r.lambda);
  j["best_auc"] = std::isnan(r.best_auc) ? json(nullptr) : json(r.best_auc);
  return j;
}

}  // namespace

EvalReport eval_run(const std::vector<ManifestEntry>& all_entries,
                    const std::string& manifest_path, const std::string& split,
                    const ModelParams& model, const TextClassifier* text,
                    const EvalOptions& opt) {
  const std::vector<ManifestEntry> entries = entries_for_split(all_entries, split);
  if (entries.empty()) {
    throw std::invalid_argument("eval split is empty: " + split);
  }
  const int n_classes = model.cfg.n_classes;
  if (text && text->n_classes() != n_classes) {
    throw std::invalid_argument("text classifier class count does not match the model");
  }

  EvalReport report;
  report.split = split;
  report.n_classes = n_classes;

  const std::string roles_name = to_string(opt.seg.roles);
  const int n_rec = static_cast<int>(entries.size());
  EvalRow base;
  base.roles = roles_name;
  base.include_silence = opt.seg.include_silence;
  base.duration_cap = opt.seg.max_segment_dur;
  base.top_k = opt.top_k;
  base.n_recordings = n_rec;

  // Headline configuration: segment once, score once, reuse across sweeps.
  const std::vector<RecordingSegments> rss =
      prepare_segments(entries, manifest_path, opt.seg, {}, opt.workers);
  const auto audio_preds = all_segment_probs(rss, model, opt.workers);

  const auto audio_at_k = [&](int k) {
    return recording_auc(voted_examples(rss, audio_preds, k, n_classes));
  };

  report.audio_auc = audio_at_k(opt.top_k);
  {
    EvalRow r = base;
    r.series = "headline";
    r.system = "audio";
    r.auc = report.audio_auc;
    report.rows.push_back(r);
  }

  bool first_k = true;
  double best_k_auc = 0.0;
  for (int k : opt.k_grid) {
    EvalRow r = base;
    r.series = "k";
    r.system = "audio";
    r.top_k = k;
    r.auc = audio_at_k(k);
    report.rows.push_back(r);
    if (first_k || r.auc > best_k_auc) {
      best_k_auc = r.auc;
      report.best_k = k;
      first_k = false;
    }
  }

  if (text) {
    const auto text_preds = all_text_probs(rss, *text, opt.workers);
    const auto text_examples = voted_examples(rss, text_preds, opt.top_k, n_classes);
    report.text_auc = recording_auc(text_examples);
    {
      EvalRow r = base;
      r.series = "headline";
      r.system = "text";
      r.auc = report.text_auc;
      report.rows.push_back(r);
    }

    std::vector<RecordingDecision> decisions(rss.size());
    for (size_t i = 0; i < rss.size(); ++i) {
      decisions[i].recording_id = rss[i].recording_id;
      decisions[i].label = rss[i].label;
      decisions[i].p_audio = vote_or_uniform(audio_preds[i], opt.top_k, n_classes);
      decisions[i].p_text = text_examples[i].probs;
    }
    const std::vector<double> grid =
        opt.lambda_grid.empty() ? default_lambda_grid() : opt.lambda_grid;
    const LambdaSweepResult sweep = sweep_lambda(decisions, grid);
    for (const LambdaSweepRow& s : sweep.rows) {
      EvalRow r = base;
      r.series = "lambda";
      r.system = "fused";
      r.lambda = s.lambda;
      r.auc = s.auc;
      report.rows.push_back(r);
    }
    report.best_lambda = sweep.best_lambda;
    report.fused_auc = sweep.best_auc;
    {
      EvalRow r = base;
      r.series = "headline";
      r.system = "fused";
      r.lambda = sweep.best_lambda;
      r.auc = sweep.best_auc;
      report.rows.push_back(r);
    }
  }

  std::vector<double> caps = opt.duration_caps;
  std::sort(caps.begin(), caps.end());
  double best_so_far = std::nan("");
  for (double cap : caps) {
    double auc;
    if (cap == opt.seg.max_segment_dur) {
      auc = report.audio_auc;
    } else {
      SegmentOptions seg = opt.seg;
      seg.max_segment_dur = cap;
      const auto rss_cap = prepare_segments(entries, manifest_path, seg, {}, opt.workers);
      const auto preds_cap = all_segment_probs(rss_cap, model, opt.workers);
      auc = recording_auc(voted_examples(rss_cap, preds_cap, opt.top_k, n_classes));
    }
    best_so_far = std::isnan(best_so_far) ? auc : std::max(best_so_far, auc);
    EvalRow r = base;
    r.series = "duration";
    r.system = "audio";
    r.duration_cap = cap;
    r.auc = auc;
    r.best_auc = best_so_far;
    report.rows.push_back(r);
  }

  if (opt.ablations) {
    for (RoleFilter roles :
         {RoleFilter::both, RoleFilter::participant, RoleFilter::interviewer}) {
      for (bool silence : {true, false}) {
        EvalRow r = base;
        r.series = "ablation";
        r.system = "audio";
        r.roles = to_string(roles);
        r.include_silence = silence;
        if (roles == opt.seg.roles && silence == opt.seg.include_silence) {
          r.auc = report.audio_auc;
        } else {
          SegmentOptions seg = opt.seg;
          seg.roles = roles;
          seg.include_silence = silence;
          const auto rss_ab = prepare_segments(entries, manifest_path, seg, {}, opt.workers);
          const auto preds_ab = all_segment_probs(rss_ab, model, opt.workers);
          r.auc = recording_auc(voted_examples(rss_ab, preds_ab, opt.top_k, n_classes));
        }
        report.rows.push_back(r);
      }
    }
  }

  return report;
}

void write_eval_csv(const std::string& path, const EvalReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "series,system,roles,include_silence,duration_cap,top_k,lambda,auc,"
         "best_auc,n_recordings\n";
  for (const EvalRow& r : report.rows) {
    out << r.series << ',' << r.system << ',' << r.roles << ','
        << (r.include_silence ? "on" : "off") << ',' << csv_num(r.duration_cap) << ','
        << r.top_k << ',' << csv_num(r.lambda) << ',' << csv_num(r.auc) << ','
        << csv_num(r.best_auc) << ',' << r.n_recordings << '\n';
  }
  if (!out) throw std::runtime_error("short write: " + path);
}

void write_eval_json(const std::string& path, const EvalReport& report) {
  json j{{"split", report.split},
         {"n_classes", report.n_classes},
         {"audio_auc", report.audio_auc},
         {"best_k", report.best_k}};
  j["text_auc"] = std::isnan(report.text_auc) ? json(nullptr) : json(report.text_auc);
  j["fused_auc"] = std::isnan(report.fused_auc) ? json(nullptr) : json(report.fused_auc);
  j["best_lambda"] =
      std::isnan(report.best_lambda) ? json(nullptr) : json(report.best_lambda);
  j["rows"] = json::array();
  for (const EvalRow& r : report.rows) j["rows"].push_back(row_json(r));

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("short write: " + path);
}

}  // namespace adc
