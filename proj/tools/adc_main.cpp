// Command-line front end: every pipeline stage as a subcommand. Options come
// from a declarative key=value config file plus flag overrides; unknown keys
// are rejected before any work starts.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adc/bench.hpp"
#include "adc/checkpoint.hpp"
#include "adc/evalrun.hpp"
#include "adc/gradcheck.hpp"
#include "adc/inference.hpp"
#include "adc/manifest.hpp"
#include "adc/metrics.hpp"
#include "adc/model.hpp"
#include "adc/parallel.hpp"
#include "adc/synthetic.hpp"
#include "adc/textclf.hpp"
#include "adc/train.hpp"

namespace {

using nlohmann::json;

// Merged view of every tunable the subcommands understand. Config-file keys
// and override flags both funnel through apply(), which validates key names
// and value syntax in one place.
struct RunConfig {
  uint64_t seed = 0;
  int workers = 1;

  // segmentation
  double max_segment_dur = 360.0;
  std::string roles = "both";
  bool include_silence = true;
  double min_segment_sec = 0.25;
  double vad_frame = 0.03;
  double vad_energy_threshold = 0.5;
  int vad_hangover = 5;
  double vad_min_speech = 0.2;
  double duration_cap = 0.0;  // > 0 caps max_segment_dur for this run

  // features / model
  int n_mels = 128;
  std::string preset = "tiny";
  int n_classes = 0;  // 0 = derive from the manifest

  // training
  std::string loss;  // empty = class-weighted cross-entropy default
  double lr0 = 1e-5;
  double beta1 = 0.95;
  double beta2 = 0.999;
  double weight_decay = 5e-7;
  int batch_size = 1;
  int epochs = 40;
  int warmup_steps = 1000;
  double decay_factor = 0.5;
  int decay_start_epoch = 10;
  int val_top_k = 0;

  // voting / fusion / evaluation
  int top_k = 0;
  double lambda = 0.5;
  std::string duration_caps = "30,60,120,240,360";
  std::string k_grid = "1,3,5,9,0";
  bool ablations = true;

  // synthetic generation
  int classes = 2;
  int per_class = 40;
  double duration = 120.0;
  int sample_rate = 16000;
  double turn_period = 20.0;

  // text branch
  int text_iterations = 200;
  double text_lr = 0.5;
  double text_l2 = 1e-4;

  // benchmark
  std::string ssm_lengths = "1024..65536";
  std::string attention_lengths = "1024..8192";
  int bench_runs = 5;
  int bench_warmup = 1;
  int attention_dim = 64;

  // gradient check
  int gradcheck_samples = 200;
  double gradcheck_epsilon = 1e-5;

  void apply(const std::string& key, const std::string& value);
};

int parse_int(const std::string& key, const std::string& value) {
  size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(value, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not an integer: " + value);
  }
  if (pos != value.size()) {
    throw std::invalid_argument("config key '" + key + "': not an integer: " + value);
  }
  return v;
}

double parse_double(const std::string& key, const std::string& value) {
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not a number: " + value);
  }
  if (pos != value.size()) {
    throw std::invalid_argument("config key '" + key + "': not a number: " + value);
  }
  return v;
}

bool parse_on_off(const std::string& key, const std::string& value) {
  if (value == "on") return true;
  if (value == "off") return false;
  throw std::invalid_argument("config key '" + key + "': expected on|off, got " + value);
}

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "seed") seed = static_cast<uint64_t>(std::stoull(value));
  else if (key == "workers") workers = parse_int(key, value);
  else if (key == "max_segment_dur") max_segment_dur = parse_double(key, value);
  else if (key == "roles") {
    adc::parse_role_filter(value);  // validate now, fail before any work
    roles = value;
  }
  else if (key == "include_silence") include_silence = parse_on_off(key, value);
  else if (key == "min_segment_sec") min_segment_sec = parse_double(key, value);
  else if (key == "vad_frame") vad_frame = parse_double(key, value);
  else if (key == "vad_energy_threshold") vad_energy_threshold = parse_double(key, value);
  else if (key == "vad_hangover") vad_hangover = parse_int(key, value);
  else if (key == "vad_min_speech") vad_min_speech = parse_double(key, value);
  else if (key == "duration_cap") duration_cap = parse_double(key, value);
  else if (key == "n_mels") n_mels = parse_int(key, value);
  else if (key == "preset") preset = value;
  else if (key == "n_classes") n_classes = parse_int(key, value);
  else if (key == "loss") loss = value;
  else if (key == "lr0") lr0 = parse_double(key, value);
  else if (key == "beta1") beta1 = parse_double(key, value);
  else if (key == "beta2") beta2 = parse_double(key, value);
  else if (key == "weight_decay") weight_decay = parse_double(key, value);
  else if (key == "batch_size") batch_size = parse_int(key, value);
  else if (key == "epochs") epochs = parse_int(key, value);
  else if (key == "warmup_steps") warmup_steps = parse_int(key, value);
  else if (key == "decay_factor") decay_factor = parse_double(key, value);
  else if (key == "decay_start_epoch") decay_start_epoch = parse_int(key, value);
  else if (key == "val_top_k") val_top_k = parse_int(key, value);
  else if (key == "top_k") top_k = parse_int(key, value);
  else if (key == "lambda") lambda = parse_double(key, value);
  else if (key == "duration_caps") duration_caps = value;
  else if (key == "k_grid") k_grid = value;
  else if (key == "ablations") ablations = parse_on_off(key, value);
  else if (key == "classes") classes = parse_int(key, value);
  else if (key == "per_class") per_class = parse_int(key, value);
  else if (key == "duration") duration = parse_double(key, value);
  else if (key == "sample_rate") sample_rate = parse_int(key, value);
  else if (key == "turn_period") turn_period = parse_double(key, value);
  else if (key == "text_iterations") text_iterations = parse_int(key, value);
  else if (key == "text_lr") text_lr = parse_double(key, value);
  else if (key == "text_l2") text_l2 = parse_double(key, value);
  else if (key == "ssm_lengths") ssm_lengths = value;
  else if (key == "attention_lengths") attention_lengths = value;
  else if (key == "bench_runs") bench_runs = parse_int(key, value);
  else if (key == "bench_warmup") bench_warmup = parse_int(key, value);
  else if (key == "attention_dim") attention_dim = parse_int(key, value);
  else if (key == "gradcheck_samples") gradcheck_samples = parse_int(key, value);
  else if (key == "gradcheck_epsilon") gradcheck_epsilon = parse_double(key, value);
  else throw std::invalid_argument("unknown config key: " + key);
}

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

void apply_config_file(RunConfig& rc, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected key = value");
    }
    try {
      rc.apply(key, value);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

// "1024..65536" (doubling) or a comma-separated list.
std::vector<long> parse_lengths(const std::string& spec) {
  std::vector<long> out;
  const size_t dots = spec.find("..");
  if (dots != std::string::npos) {
    const long lo = std::stol(spec.substr(0, dots));
    const long hi = std::stol(spec.substr(dots + 2));
    if (lo < 1 || hi < lo) throw std::invalid_argument("bad length range: " + spec);
    for (long v = lo; v <= hi; v *= 2) out.push_back(v);
    return out;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(std::stol(item));
  }
  if (out.empty()) throw std::invalid_argument("empty length list: " + spec);
  return out;
}

std::vector<double> parse_double_list(const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) throw std::invalid_argument("empty list: " + spec);
  return out;
}

std::vector<int> parse_int_list(const std::string& spec) {
  std::vector<int> out;
  for (double v : parse_double_list(spec)) out.push_back(static_cast<int>(v));
  return out;
}

adc::SegmentOptions segment_options(const RunConfig& rc) {
  adc::SegmentOptions opt;
  opt.max_segment_dur = rc.max_segment_dur;
  if (rc.duration_cap > 0.0) {
    opt.max_segment_dur = std::min(opt.max_segment_dur, rc.duration_cap);
  }
  opt.roles = adc::parse_role_filter(rc.roles);
  opt.include_silence = rc.include_silence;
  opt.min_segment_sec = rc.min_segment_sec;
  opt.vad.frame = rc.vad_frame;
  opt.vad.energy_threshold = rc.vad_energy_threshold;
  opt.vad.hangover = rc.vad_hangover;
  opt.vad.min_speech = rc.vad_min_speech;
  return opt;
}

adc::ModelConfig model_config(const RunConfig& rc, int manifest_classes) {
  adc::ModelConfig cfg = adc::model_preset(rc.preset);
  cfg.input_dim = rc.n_mels;
  if (rc.n_classes > 0) {
    cfg.n_classes = rc.n_classes;
  } else if (manifest_classes > 0) {
    cfg.n_classes = manifest_classes;
  }
  return cfg;
}

adc::FbankConfig fbank_config(const RunConfig& rc) {
  adc::FbankConfig fb;
  fb.n_mels = rc.n_mels;
  return fb;
}

std::ostream& log_line() { return std::cout; }

// ---------------------------------------------------------------- generate

int run_generate(const RunConfig& rc, const std::string& out_dir) {
  adc::GenConfig gc;
  gc.classes = rc.classes;
  gc.per_class = rc.per_class;
  gc.duration = rc.duration;
  gc.sample_rate = rc.sample_rate;
  gc.seed = rc.seed;
  gc.turn_period = rc.turn_period;
  gc.out_dir = out_dir;
  const auto entries = adc::generate_dataset(gc, rc.workers);
  int train = 0, val = 0, test = 0;
  for (const auto& e : entries) {
    if (e.split == "train") ++train;
    else if (e.split == "validation") ++val;
    else ++test;
  }
  log_line() << "generated " << entries.size() << " recordings (" << gc.classes
             << " classes x " << gc.per_class << ") under " << out_dir << "\n";
  log_line() << "splits: train " << train << ", validation " << val << ", test " << test
             << "\n";
  return 0;
}

// ----------------------------------------------------------------- segment

json span_json(const adc::Span& s) {
  return json{{"start", s.start},
              {"end", s.end},
              {"kind", adc::to_string(s.kind)},
              {"role", adc::to_string(s.role)}};
}

int run_segment(const RunConfig& rc, const std::string& manifest_path,
                const std::string& out_path) {
  const auto entries = adc::load_manifest(manifest_path);
  const adc::SegmentOptions opt = segment_options(rc);
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + out_path);

  std::vector<std::string> lines(entries.size());
  adc::parallel_for(static_cast<int>(entries.size()), rc.workers, [&](int i) {
    const adc::ManifestEntry& e = entries[i];
    const adc::Waveform wav =
        adc::read_wav(adc::resolve_wav_path(manifest_path, e.wav));
    const std::vector<adc::Chunk> chunks = adc::energy_vad(wav, opt.vad);
    const auto turns = adc::assign_roles(adc::oracle_diarize(e.turns));
    const auto spans = adc::annotate_roles(chunks, turns);
    const auto segments =
        adc::merge_segments(spans, opt.max_segment_dur,
                            adc::make_span_filter(opt.roles, opt.include_silence));
    json j{{"recording_id", e.recording_id}, {"segments", json::array()}};
    for (const adc::Segment& s : segments) {
      json js{{"start", s.start},
              {"end", s.end},
              {"kind", adc::to_string(s.kind())},
              {"sources", json::array()}};
      js["roles"] = json::array();
      for (adc::Role r : s.roles_included()) js["roles"].push_back(adc::to_string(r));
      for (const adc::Span& sp : s.sources) js["sources"].push_back(span_json(sp));
      j["segments"].push_back(js);
    }
    lines[i] = j.dump();
  });
  for (const std::string& line : lines) out << line << '\n';
  if (!out) throw std::runtime_error("short write: " + out_path);
  log_line() << "segmented " << entries.size() << " recordings -> " << out_path << "\n";
  return 0;
}

// ------------------------------------------------------------------- train

adc::LossConfig loss_config(const RunConfig& rc, int n_classes) {
  adc::LossConfig lcfg = adc::default_loss_config(n_classes);
  if (rc.loss == "ce") lcfg.kind = adc::LossKind::ce;
  else if (rc.loss == "weighted_ce") lcfg.kind = adc::LossKind::weighted_ce;
  else if (rc.loss == "bce") lcfg.kind = adc::LossKind::bce;
  else if (!rc.loss.empty()) throw std::invalid_argument("unknown loss: " + rc.loss);
  return lcfg;
}

adc::Transcript recording_transcript(const adc::ManifestEntry& e) {
  return adc::build_transcript(adc::assign_roles(adc::oracle_diarize(e.turns)));
}

int run_train_text(const RunConfig& rc, const std::vector<adc::ManifestEntry>& entries,
                   const std::string& out_path) {
  const int n_classes = rc.n_classes > 0 ? rc.n_classes : adc::manifest_num_classes(entries);
  const auto train_entries = adc::entries_for_split(entries, "train");
  if (train_entries.empty()) throw std::runtime_error("train split is empty");
  std::vector<adc::Transcript> transcripts;
  std::vector<int> labels;
  for (const auto& e : train_entries) {
    transcripts.push_back(recording_transcript(e));
    labels.push_back(e.label);
  }
  adc::BagOfWordsClassifier clf(n_classes);
  adc::BagOfWordsClassifier::FitConfig fit;
  fit.iterations = rc.text_iterations;
  fit.lr = rc.text_lr;
  fit.l2 = rc.text_l2;
  clf.fit(transcripts, labels, fit);
  clf.save(out_path);
  log_line() << "text model fitted on " << train_entries.size() << " recordings -> "
             << out_path << "\n";

  const auto val = adc::entries_for_split(entries, "validation");
  if (!val.empty()) {
    std::vector<adc::MultiScoredExample> scored;
    for (const auto& e : val) {
      scored.push_back({clf.score(recording_transcript(e)), e.label, e.recording_id});
    }
    try {
      log_line() << "validation auc " << std::setprecision(4)
                 << adc::recording_auc(scored) << "\n";
    } catch (const std::exception& e) {
      log_line() << "validation auc unavailable: " << e.what() << "\n";
    }
  }
  return 0;
}

int run_train(const RunConfig& rc, const std::string& manifest_path,
              const std::string& out_path, const std::string& metrics_path,
              const std::string& branch) {
  const auto entries = adc::load_manifest(manifest_path);
  if (branch == "text") return run_train_text(rc, entries, out_path);
  if (branch != "audio") throw std::invalid_argument("unknown branch: " + branch);

  const adc::ModelConfig mcfg = model_config(rc, adc::manifest_num_classes(entries));
  const adc::LossConfig lcfg = loss_config(rc, mcfg.n_classes);
  adc::OptimConfig ocfg;
  ocfg.lr0 = rc.lr0;
  ocfg.beta1 = rc.beta1;
  ocfg.beta2 = rc.beta2;
  ocfg.weight_decay = rc.weight_decay;
  ocfg.batch_size = rc.batch_size;
  ocfg.epochs = rc.epochs;
  ocfg.warmup_steps = rc.warmup_steps;
  ocfg.decay_factor = rc.decay_factor;
  ocfg.decay_start_epoch = rc.decay_start_epoch;

  adc::TrainOptions topt;
  topt.seed = rc.seed;
  topt.workers = rc.workers;
  topt.val_top_k = rc.val_top_k;
  topt.checkpoint_path = out_path;
  topt.metrics_path = metrics_path;

  const adc::TrainResult result =
      adc::train(entries, manifest_path, mcfg, lcfg, ocfg, segment_options(rc), topt);
  log_line() << "trained " << param_count(mcfg) << " parameters, " << result.steps
             << " steps\n";
  log_line() << "best validation auc " << std::setprecision(4) << result.best_val_auc
             << " at epoch " << result.best_epoch << " -> " << out_path << "\n";
  return 0;
}

// ------------------------------------------------------------- infer / eval

std::unique_ptr<adc::BagOfWordsClassifier> load_text_model(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_unique<adc::BagOfWordsClassifier>(adc::BagOfWordsClassifier::load(path));
}

int run_infer(const RunConfig& rc, const std::string& manifest_path,
              const std::string& checkpoint_path, const std::string& out_path,
              const std::string& split, const std::string& text_model_path) {
  const auto all = adc::load_manifest(manifest_path);
  const auto entries = adc::entries_for_split(all, split);
  if (entries.empty()) throw std::runtime_error("split is empty: " + split);

  const adc::ModelConfig mcfg = model_config(rc, adc::manifest_num_classes(all));
  const adc::ModelParams model = adc::load_checkpoint(checkpoint_path, mcfg);
  const auto text = load_text_model(text_model_path);

  const auto rss =
      adc::prepare_segments(entries, manifest_path, segment_options(rc), fbank_config(rc),
                            rc.workers);
  std::vector<adc::RecordingDecision> decisions(rss.size());
  adc::parallel_for(static_cast<int>(rss.size()), rc.workers, [&](int i) {
    if (rss[i].segments.empty()) {
      // Nothing usable after filtering: fall back to an uninformative vote.
      adc::RecordingDecision d;
      d.recording_id = rss[i].recording_id;
      d.label = rss[i].label;
      d.p_audio = adc::Vec::Constant(mcfg.n_classes, 1.0 / mcfg.n_classes);
      d.lambda = text ? rc.lambda : 0.0;
      d.p_fused = d.p_audio;
      decisions[i] = std::move(d);
      return;
    }
    decisions[i] =
        adc::decide_recording(rss[i], model, text.get(), rc.top_k, rc.lambda);
  });
  adc::write_decisions(out_path, decisions);
  log_line() << "wrote " << decisions.size() << " decisions -> " << out_path << "\n";

  std::vector<adc::MultiScoredExample> fused;
  for (const auto& d : decisions) fused.push_back({d.p_fused, d.label, d.recording_id});
  try {
    log_line() << (text ? "fused" : "audio") << " auc " << std::setprecision(4)
               << adc::recording_auc(fused) << "\n";
  } catch (const std::exception& e) {
    log_line() << "auc unavailable: " << e.what() << "\n";
  }
  return 0;
}

int run_eval(const RunConfig& rc, const std::string& manifest_path,
             const std::string& checkpoint_path, const std::string& out_prefix,
             const std::string& split, const std::string& text_model_path) {
  const auto all = adc::load_manifest(manifest_path);
  const adc::ModelConfig mcfg = model_config(rc, adc::manifest_num_classes(all));
  const adc::ModelParams model = adc::load_checkpoint(checkpoint_path, mcfg);
  const auto text = load_text_model(text_model_path);

  adc::EvalOptions opt;
  opt.seg = segment_options(rc);
  opt.top_k = rc.top_k;
  opt.k_grid = parse_int_list(rc.k_grid);
  opt.duration_caps = parse_double_list(rc.duration_caps);
  opt.ablations = rc.ablations;
  opt.workers = rc.workers;

  const adc::EvalReport report =
      adc::eval_run(all, manifest_path, split, model, text.get(), opt);
  adc::write_eval_csv(out_prefix + ".csv", report);
  adc::write_eval_json(out_prefix + ".json", report);

  log_line() << "split " << report.split << ": audio auc " << std::setprecision(4)
             << report.audio_auc;
  if (text) {
    log_line() << ", text auc " << report.text_auc << ", fused auc " << report.fused_auc
               << " at lambda " << report.best_lambda;
  }
  log_line() << " (best k " << report.best_k << ")\n";
  log_line() << "wrote " << out_prefix << ".csv and " << out_prefix << ".json\n";
  return 0;
}

// ------------------------------------------------------- bench / gradcheck

int run_bench(const RunConfig& rc, const std::string& out_prefix) {
  adc::BenchOptions opt;
  opt.ssm_lengths = parse_lengths(rc.ssm_lengths);
  opt.attention_lengths = parse_lengths(rc.attention_lengths);
  opt.runs = rc.bench_runs;
  opt.warmup = rc.bench_warmup;
  opt.seed = rc.seed;
  opt.model = adc::model_preset(rc.preset);
  opt.model.input_dim = rc.n_mels;
  opt.attention_dim = rc.attention_dim;

  const adc::BenchReport report = adc::bench_scaling(opt);
  adc::write_bench_json(out_prefix + ".json", report);
  adc::write_bench_dat(out_prefix + ".dat", report);
  for (const adc::BenchSeries& s : report.series) {
    log_line() << s.model << " slope " << std::setprecision(3) << s.slope << " over "
               << s.points.size() << " lengths\n";
  }
  log_line() << "wrote " << out_prefix << ".json and " << out_prefix << ".dat\n";
  return 0;
}

int run_gradcheck(const RunConfig& rc, bool corrupt) {
  adc::ModelConfig cfg = adc::model_preset(rc.preset);
  if (rc.n_classes > 0) cfg.n_classes = rc.n_classes;
  const adc::GradCheckReport report = adc::grad_check(
      cfg, rc.seed, rc.gradcheck_samples, rc.gradcheck_epsilon, corrupt);
  log_line() << "checked " << report.n_checked << " parameters of preset '" << rc.preset
             << "'\n";
  log_line() << "max relative error " << std::scientific << std::setprecision(3)
             << report.max_rel_err << " (tensor " << report.worst_tensor << ", analytic "
             << report.worst_analytic << ", numeric " << report.worst_numeric << ")\n";
  if (corrupt) {
    const bool detected = report.max_rel_err > 1e-2;
    log_line() << (detected ? "corrupted backward detected as expected\n"
                            : "corrupted backward NOT detected\n");
    return detected ? 0 : 1;
  }
  const bool ok = report.passed(1e-4);
  log_line() << (ok ? "gradient check passed\n" : "gradient check FAILED\n");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"automatic dementia-style interview classification pipeline"};
  app.require_subcommand(1);

  RunConfig rc;
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  int exit_code = 0;

  // Every flag override funnels into the same key set as the config file.
  const auto add_kv = [&overrides](CLI::App* cmd, const std::string& flag,
                                   const std::string& key, const std::string& desc) {
    cmd->add_option_function<std::string>(
        flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); },
        desc);
  };
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key = value config file");
    add_kv(cmd, "--seed", "seed", "global seed");
    add_kv(cmd, "--workers", "workers", "max concurrent recordings");
  };
  const auto add_segmentation = [&](CLI::App* cmd) {
    add_kv(cmd, "--max-segment-dur", "max_segment_dur", "segment length bound, seconds");
    add_kv(cmd, "--roles", "roles", "segment role filter: both|participant|interviewer");
    add_kv(cmd, "--include-silence", "include_silence", "keep silence spans: on|off");
    add_kv(cmd, "--duration-cap", "duration_cap", "cap segment duration, seconds");
  };
  const auto finalize = [&](const RunConfig& defaults) {
    RunConfig merged = defaults;
    if (!config_path.empty()) apply_config_file(merged, config_path);
    for (const auto& [key, value] : overrides) merged.apply(key, value);
    return merged;
  };

  // generate
  auto* generate = app.add_subcommand("generate", "write a synthetic labeled dataset");
  std::string gen_out;
  generate->add_option("--out", gen_out, "output directory")->required();
  add_common(generate);
  add_kv(generate, "--classes", "classes", "number of classes (2 or 3)");
  add_kv(generate, "--per-class", "per_class", "recordings per class");
  add_kv(generate, "--duration", "duration", "seconds per recording");
  generate->callback([&] { exit_code = run_generate(finalize(rc), gen_out); });

  // segment
  auto* segment = app.add_subcommand("segment", "activity detection, roles, bounded merge");
  std::string seg_manifest, seg_out;
  segment->add_option("--manifest", seg_manifest, "manifest JSONL")->required();
  segment->add_option("--out", seg_out, "segment JSONL output")->required();
  add_common(segment);
  add_segmentation(segment);
  segment->callback([&] { exit_code = run_segment(finalize(rc), seg_manifest, seg_out); });

  // train
  auto* train = app.add_subcommand("train", "train the audio model or fit the text model");
  std::string train_manifest, train_out, train_metrics, train_branch = "audio";
  train->add_option("--manifest", train_manifest, "manifest JSONL")->required();
  train->add_option("--out", train_out, "checkpoint (audio) or model JSON (text)")
      ->required();
  train->add_option("--metrics", train_metrics, "per-epoch metrics JSONL");
  train->add_option("--branch", train_branch, "audio|text");
  add_common(train);
  add_segmentation(train);
  add_kv(train, "--preset", "preset", "model preset: gradcheck|tiny|small|medium");
  add_kv(train, "--epochs", "epochs", "training epochs");
  add_kv(train, "--top-k", "val_top_k", "validation voting size, 0 = all");
  train->callback([&] {
    exit_code = run_train(finalize(rc), train_manifest, train_out, train_metrics,
                          train_branch);
  });

  // infer
  auto* infer = app.add_subcommand("infer", "per-recording decisions JSONL");
  std::string inf_manifest, inf_ckpt, inf_out, inf_split = "test", inf_text;
  infer->add_option("--manifest", inf_manifest, "manifest JSONL")->required();
  infer->add_option("--checkpoint", inf_ckpt, "audio model checkpoint")->required();
  infer->add_option("--out", inf_out, "decisions JSONL output")->required();
  infer->add_option("--split", inf_split, "manifest split (default test)");
  infer->add_option("--text-model", inf_text, "text model JSON for fusion");
  add_common(infer);
  add_segmentation(infer);
  add_kv(infer, "--preset", "preset", "model preset used at train time");
  add_kv(infer, "--top-k", "top_k", "voting size, 0 = all");
  add_kv(infer, "--lambda", "lambda", "fusion weight toward the text branch");
  infer->callback([&] {
    exit_code = run_infer(finalize(rc), inf_manifest, inf_ckpt, inf_out, inf_split,
                          inf_text);
  });

  // eval
  auto* eval = app.add_subcommand("eval", "metrics table with sweeps and ablations");
  std::string ev_manifest, ev_ckpt, ev_prefix, ev_split = "test", ev_text;
  eval->add_option("--manifest", ev_manifest, "manifest JSONL")->required();
  eval->add_option("--checkpoint", ev_ckpt, "audio model checkpoint")->required();
  eval->add_option("--out-prefix", ev_prefix, "writes <prefix>.csv and <prefix>.json")
      ->required();
  eval->add_option("--split", ev_split, "manifest split (default test)");
  eval->add_option("--text-model", ev_text, "text model JSON for fusion rows");
  add_common(eval);
  add_segmentation(eval);
  add_kv(eval, "--preset", "preset", "model preset used at train time");
  add_kv(eval, "--top-k", "top_k", "voting size, 0 = all");
  add_kv(eval, "--lambda", "lambda", "fusion weight toward the text branch");
  add_kv(eval, "--k-grid", "k_grid", "voting sizes to sweep, comma separated");
  add_kv(eval, "--duration-caps", "duration_caps", "cap sweep values, comma separated");
  add_kv(eval, "--ablations", "ablations", "role/silence ablation rows: on|off");
  eval->callback([&] {
    exit_code = run_eval(finalize(rc), ev_manifest, ev_ckpt, ev_prefix, ev_split, ev_text);
  });

  // bench
  auto* bench = app.add_subcommand("bench", "sequence-length scaling report");
  std::string bench_prefix;
  bench->add_option("--out-prefix", bench_prefix, "writes <prefix>.json and <prefix>.dat")
      ->required();
  add_common(bench);
  add_kv(bench, "--lengths", "ssm_lengths", "lengths, e.g. 1024..65536 or 1024,4096");
  add_kv(bench, "--attention-lengths", "attention_lengths", "baseline lengths");
  add_kv(bench, "--runs", "bench_runs", "timed repetitions per length");
  add_kv(bench, "--preset", "preset", "model preset to time");
  bench->callback([&] { exit_code = run_bench(finalize(rc), bench_prefix); });

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  bool gc_corrupt = false;
  gradcheck->add_flag("--corrupt", gc_corrupt,
                      "flip analytic gradient signs (harness self-test)");
  add_common(gradcheck);
  add_kv(gradcheck, "--preset", "preset", "model preset to check");
  add_kv(gradcheck, "--samples", "gradcheck_samples", "sampled parameter count");
  add_kv(gradcheck, "--epsilon", "gradcheck_epsilon", "finite-difference step");
  gradcheck->callback([&] { exit_code = run_gradcheck(finalize(rc), gc_corrupt); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return exit_code;
}
