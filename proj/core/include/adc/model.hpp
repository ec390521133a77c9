#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "adc/linalg.hpp"
#include "adc/scan.hpp"

namespace adc {

// Backbone geometry: 4 stages of bidirectional selective-scan blocks with
// widths (d0, 2*d0, 4*d0, 8*d0), time halved between stages, mean pooling,
// linear class head.
struct ModelConfig {
  int input_dim = 128;
  int d0 = 32;
  int n_state = 16;
  int expansion = 2;
  int conv_width = 4;
  std::array<int, 4> depths{1, 1, 2, 1};
  int n_classes = 2;
  double norm_eps = 1e-6;

  int stage_dim(int s) const { return d0 << s; }
  int stage_inner(int s) const { return expansion * stage_dim(s); }
  std::string canonical() const;
  uint64_t hash() const;
};

// Named presets: gradcheck (finite-difference scale), tiny, small, medium.
ModelConfig model_preset(const std::string& name);

struct BlockParams {
  Vec norm_g;          // d
  Mat W_in_x, W_in_z;  // d x d_inner
  Mat conv_w;          // conv_width x d_inner (depthwise, causal)
  ScanParams scan;
  Mat W_out;  // d_inner x d
};

struct Downsampler {
  Mat W;  // 2*d_in x d_out (concatenates two adjacent steps)
  Vec b;  // d_out
};

struct ModelParams {
  ModelConfig cfg;
  Mat patch_W;  // input_dim x d0
  Vec patch_b;
  std::vector<std::vector<BlockParams>> stages;
  std::array<Downsampler, 3> down;
  Mat head_W;  // 8*d0 x n_classes
  Vec head_b;
};

ModelParams init_model(const ModelConfig& cfg, uint64_t seed);
ModelParams zeros_like(const ModelParams& m);
long param_count(const ModelConfig& cfg);

// Flat, stably-ordered view of every learnable tensor; the order defines the
// checkpoint layout and the optimizer state alignment.
struct TensorRef {
  std::string name;
  double* data;
  std::vector<long> shape;
  long size;
};
std::vector<TensorRef> model_tensors(ModelParams& m);

// Forward caches one block's backward pass needs.
struct BlockCache {
  Mat u, v;
  Vec inv_rms;
  Mat xc, xa, x, z;
  Mat dt_pre, dt;
  Mat Bm, Cm;
  Mat y;
};

struct Activation {
  Mat input;
  std::vector<std::vector<BlockCache>> stages;
  std::array<Mat, 4> stage_out;
  Vec pooled;
  Vec logits;
};

// 3 halvings need 2^3 * 2 = 16 frames so the pooled stage is non-empty.
inline constexpr int kBackboneMinFrames = 16;

// Pre-norm residual block: v = rmsnorm(u); x = silu(conv(v W_in_x));
// z = v W_in_z; dt = softplus(x W_dt + b_dt); B = x W_B; C = x W_C;
// y = scan(x, dt, -exp(A_log), B, C) summed over both directions + D .* x;
// out = u + (y .* silu(z)) W_out.
Mat block_forward(const Mat& u, const BlockParams& p, double norm_eps,
                  BlockCache* cache = nullptr);

// Returns du; accumulates parameter gradients into `grads`.
Mat block_backward(const BlockParams& p, const BlockCache& c, const Mat& dout,
                   double norm_eps, BlockParams& grads);

// features: T x input_dim, T >= kBackboneMinFrames. Fills `act` when given
// (training mode); inference passes nullptr and keeps no caches.
Vec backbone_forward(const Mat& features, const ModelParams& m, Activation* act = nullptr);

// Accumulates exact reverse-mode gradients of <logits, dlogits> into `grads`
// (same shapes as `m`, pre-zeroed by the caller).
void backbone_backward(const ModelParams& m, const Activation& act, const Vec& dlogits,
                       ModelParams& grads);

}  // namespace adc
