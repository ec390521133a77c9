#pragma once

#include <string>
#include <vector>

#include "adc/inference.hpp"
#include "adc/manifest.hpp"
#include "adc/model.hpp"

namespace adc {

enum class LossKind { ce, weighted_ce, bce };

struct LossConfig {
  LossKind kind = LossKind::weighted_ce;
  Vec class_weights;  // per class; (1, 3, 3) for 3 classes, (1, 1) for 2
};

LossConfig default_loss_config(int n_classes);

struct LossResult {
  double value = 0.0;
  Vec dlogits;
};

// weighted CE: -w[label] * log softmax(logits)[label].
// BCE (2 classes): binary cross-entropy on sigmoid(logits[1]).
LossResult loss(const Vec& logits, int label, const LossConfig& cfg);

struct OptimConfig {
  double lr0 = 1e-5;
  double beta1 = 0.95;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 5e-7;
  int batch_size = 1;
  int epochs = 40;
  int warmup_steps = 1000;
  double decay_factor = 0.5;
  int decay_start_epoch = 10;
};

// Linear warmup to lr0, then lr0 * decay^max(0, epoch - decay_start + 1)
// (first halving applied during decay_start_epoch; epochs 0-indexed).
double lr_at(long step, int epoch, const OptimConfig& cfg);

struct AdamState {
  std::vector<Vec> m, v;  // aligned with model_tensors order
  long t = 0;
};

AdamState make_adam_state(ModelParams& params);

// Decoupled weight decay, then Adam with bias correction. Returns false (and
// leaves everything untouched) when any gradient is non-finite.
bool adam_step(ModelParams& params, ModelParams& grads, AdamState& state, double lr,
               const OptimConfig& cfg);

struct TrainOptions {
  uint64_t seed = 0;
  int workers = 1;
  int val_top_k = 0;  // 0 = vote over all segments
  std::string checkpoint_path;
  std::string metrics_path;  // JSONL: {epoch, step, lr, train_loss, val_auc}
};

struct TrainResult {
  double best_val_auc = 0.0;
  int best_epoch = -1;
  long steps = 0;
};

// Segment-level training: per-epoch seeded shuffle, forward/backward/Adam at
// batch size cfg.batch_size, per-epoch validation AUC, best-validation
// checkpointing.
TrainResult train(const std::vector<ManifestEntry>& entries, const std::string& manifest_path,
                  const ModelConfig& mcfg, const LossConfig& lcfg, const OptimConfig& ocfg,
                  const SegmentOptions& seg, const TrainOptions& opt);

}  // namespace adc
