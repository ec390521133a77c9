#include "adc/train.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "adc/checkpoint.hpp"
#include "adc/metrics.hpp"
#include "adc/rng.hpp"

namespace adc {

using nlohmann::json;

LossConfig default_loss_config(int n_classes) {
  LossConfig cfg;
  cfg.kind = LossKind::weighted_ce;
  if (n_classes == 3) {
    cfg.class_weights = Vec(3);
    cfg.class_weights << 1.0, 3.0, 3.0;
  } else {
    cfg.class_weights = Vec::Ones(n_classes);
  }
  return cfg;
}

LossResult loss(const Vec& logits, int label, const LossConfig& cfg) {
  const long C = logits.size();
  if (label < 0 || label >= C) throw std::invalid_argument("label out of range");
  if (cfg.class_weights.size() != C) {
    throw std::invalid_argument("class weight count mismatch");
  }
  if ((cfg.class_weights.array() <= 0.0).any()) {
    throw std::invalid_argument("class weights must be positive");
  }
  const double w = cfg.class_weights[label];

  LossResult r;
  if (cfg.kind == LossKind::bce) {
    if (C != 2) throw std::invalid_argument("BCE needs exactly 2 classes");
    const double z = logits[1];
    const double y = label == 1 ? 1.0 : 0.0;
    // -[y log p + (1-y) log(1-p)] for p = sigmoid(z), in a stable form.
    r.value = w * (std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z))));
    r.dlogits = Vec::Zero(2);
    r.dlogits[1] = w * (sigmoid(z) - y);
    return r;
  }

  const Vec p = softmax(logits);
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  r.value = w * (lse - logits[label]);
  r.dlogits = w * p;
  r.dlogits[label] -= w;
  return r;
}

double lr_at(long step, int epoch, const OptimConfig& cfg) {
  if (step < cfg.warmup_steps) {
    return cfg.lr0 * static_cast<double>(step + 1) / static_cast<double>(cfg.warmup_steps);
  }
  const int halvings = std::max(0, epoch - cfg.decay_start_epoch + 1);
  return cfg.lr0 * std::pow(cfg.decay_factor, halvings);
}

AdamState make_adam_state(ModelParams& params) {
  AdamState st;
  for (const TensorRef& t : model_tensors(params)) {
    st.m.push_back(Vec::Zero(t.size));
    st.v.push_back(Vec::Zero(t.size));
  }
  return st;
}

bool adam_step(ModelParams& params, ModelParams& grads, AdamState& state, double lr,
               const OptimConfig& cfg) {
  const std::vector<TensorRef> ps = model_tensors(params);
  const std::vector<TensorRef> gs = model_tensors(grads);
  if (ps.size() != gs.size() || ps.size() != state.m.size()) {
    throw std::invalid_argument("optimizer state does not match model");
  }

  for (size_t i = 0; i < gs.size(); ++i) {
    Eigen::Map<const Vec> g(gs[i].data, gs[i].size);
    if (!g.allFinite()) return false;
  }

  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < ps.size(); ++i) {
    Eigen::Map<Vec> theta(ps[i].data, ps[i].size);
    Eigen::Map<const Vec> g(gs[i].data, gs[i].size);
    theta -= (lr * cfg.weight_decay) * theta;
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    theta.array() -=
        lr * (state.m[i].array() / bc1) / ((state.v[i].array() / bc2).sqrt() + cfg.eps);
  }
  return true;
}

namespace {

void set_zero(ModelParams& grads) {
  for (const TensorRef& t : model_tensors(grads)) {
    Eigen::Map<Vec>(t.data, t.size).setZero();
  }
}

double validation_auc(const std::vector<RecordingSegments>& val, const ModelParams& m,
                      int top_k) {
  std::vector<MultiScoredExample> examples;
  for (const RecordingSegments& rs : val) {
    if (rs.features.empty()) continue;
    const Vec p = selective_vote(segment_probs(rs, m), top_k);
    examples.push_back({p, rs.label, rs.recording_id});
  }
  return recording_auc(examples);
}

void check_split(const std::vector<ManifestEntry>& entries, const std::string& name) {
  if (entries.empty()) throw std::invalid_argument("empty " + name + " split");
  std::set<int> labels;
  for (const ManifestEntry& e : entries) labels.insert(e.label);
  if (labels.size() < 2) {
    throw std::invalid_argument(name + " split contains a single class");
  }
}

}  // namespace

TrainResult train(const std::vector<ManifestEntry>& entries, const std::string& manifest_path,
                  const ModelConfig& mcfg, const LossConfig& lcfg, const OptimConfig& ocfg,
                  const SegmentOptions& seg, const TrainOptions& opt) {
  const std::vector<ManifestEntry> train_entries = entries_for_split(entries, "train");
  const std::vector<ManifestEntry> val_entries = entries_for_split(entries, "validation");
  check_split(train_entries, "train");
  check_split(val_entries, "validation");
  {
    std::set<std::string> train_pids;
    for (const ManifestEntry& e : train_entries) train_pids.insert(e.participant_id);
    for (const ManifestEntry& e : val_entries) {
      if (train_pids.count(e.participant_id)) {
        throw std::invalid_argument("participant " + e.participant_id +
                                    " appears in both train and validation");
      }
    }
  }

  const std::vector<RecordingSegments> train_set =
      prepare_segments(train_entries, manifest_path, seg, {}, opt.workers);
  const std::vector<RecordingSegments> val_set =
      prepare_segments(val_entries, manifest_path, seg, {}, opt.workers);

  struct Item {
    const MatF* features;
    int label;
  };
  std::vector<Item> items;
  for (const RecordingSegments& rs : train_set) {
    for (const MatF& f : rs.features) items.push_back({&f, rs.label});
  }
  if (items.empty()) throw std::invalid_argument("no trainable segments after filtering");

  ModelParams model = init_model(mcfg, opt.seed);
  ModelParams grads = zeros_like(model);
  AdamState adam = make_adam_state(model);

  std::ofstream metrics;
  if (!opt.metrics_path.empty()) {
    metrics.open(opt.metrics_path, std::ios::trunc);
    if (!metrics) throw std::runtime_error("cannot open metrics log: " + opt.metrics_path);
  }

  TrainResult result;
  long global_step = 0;
  std::vector<int> order(items.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < ocfg.epochs; ++epoch) {
    Rng rng(Rng::mix(opt.seed, 0x657000 + static_cast<uint64_t>(epoch)));
    rng.shuffle(order);

    double epoch_loss = 0.0;
    long epoch_items = 0;
    double last_lr = lr_at(global_step, epoch, ocfg);

    size_t pos = 0;
    while (pos < order.size()) {
      const size_t batch_end = std::min(order.size(), pos + static_cast<size_t>(ocfg.batch_size));
      set_zero(grads);
      double batch_loss = 0.0;
      for (size_t b = pos; b < batch_end; ++b) {
        const Item& item = items[order[b]];
        const Mat f = item.features->cast<double>();
        Activation act;
        const Vec logits = backbone_forward(f, model, &act);
        LossResult lr_res = loss(logits, item.label, lcfg);
        batch_loss += lr_res.value;
        backbone_backward(model, act, lr_res.dlogits, grads);
      }
      const double inv = 1.0 / static_cast<double>(batch_end - pos);
      if (inv != 1.0) {
        for (const TensorRef& t : model_tensors(grads)) {
          Eigen::Map<Vec>(t.data, t.size) *= inv;
        }
      }

      last_lr = lr_at(global_step, epoch, ocfg);
      if (!adam_step(model, grads, adam, last_lr, ocfg)) {
        std::cerr << "warning: skipping step " << global_step
                  << ": non-finite gradient\n";
      }
      ++global_step;
      epoch_loss += batch_loss;
      epoch_items += static_cast<long>(batch_end - pos);
      pos = batch_end;
    }

    const double train_loss = epoch_loss / static_cast<double>(epoch_items);
    const double val_auc = validation_auc(val_set, model, opt.val_top_k);

    if (metrics.is_open()) {
      json j{{"epoch", epoch},
             {"step", global_step},
             {"lr", last_lr},
             {"train_loss", train_loss},
             {"val_auc", val_auc}};
      metrics << j.dump() << '\n';
      metrics.flush();
    }

    if (result.best_epoch < 0 || val_auc > result.best_val_auc) {
      result.best_val_auc = val_auc;
      result.best_epoch = epoch;
      if (!opt.checkpoint_path.empty()) save_checkpoint(opt.checkpoint_path, model);
    }
  }
  result.steps = global_step;
  return result;
}

}  // namespace adc
