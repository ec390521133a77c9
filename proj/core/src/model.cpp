#include "adc/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "adc/rng.hpp"

namespace adc {

namespace {

using Arr = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Mat silu_mat(const Mat& m) {
  return (m.array() / (1.0 + (-m.array()).exp())).matrix();
}

Mat silu_grad_mat(const Mat& m) {
  Arr s = 1.0 / (1.0 + (-m.array()).exp());
  return (s * (1.0 + m.array() * (1.0 - s))).matrix();
}

Mat sigmoid_mat(const Mat& m) {
  return (1.0 / (1.0 + (-m.array()).exp())).matrix();
}

Mat softplus_mat(const Mat& m) {
  return (m.array().max(0.0) + (1.0 + (-m.array().abs()).exp()).log()).matrix();
}

void fill_uniform(Mat& m, Rng& rng, double bound) {
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-bound, bound);
  }
}

// Allocates all tensors for cfg, zero-filled.
ModelParams make_zero_model(const ModelConfig& cfg) {
  if (cfg.d0 < 1 || cfg.n_state < 1 || cfg.expansion < 1 || cfg.conv_width < 1 ||
      cfg.input_dim < 1 || cfg.n_classes < 2) {
    throw std::invalid_argument("invalid model config");
  }
  for (int d : cfg.depths) {
    if (d < 1) throw std::invalid_argument("stage depth must be >= 1");
  }
  ModelParams m;
  m.cfg = cfg;
  m.patch_W = Mat::Zero(cfg.input_dim, cfg.d0);
  m.patch_b = Vec::Zero(cfg.d0);
  m.stages.resize(4);
  for (int s = 0; s < 4; ++s) {
    const int d = cfg.stage_dim(s);
    const int di = cfg.stage_inner(s);
    for (int b = 0; b < cfg.depths[s]; ++b) {
      BlockParams blk;
      blk.norm_g = Vec::Zero(d);
      blk.W_in_x = Mat::Zero(d, di);
      blk.W_in_z = Mat::Zero(d, di);
      blk.conv_w = Mat::Zero(cfg.conv_width, di);
      blk.scan.A_log = Mat::Zero(di, cfg.n_state);
      blk.scan.W_B = Mat::Zero(di, cfg.n_state);
      blk.scan.W_C = Mat::Zero(di, cfg.n_state);
      blk.scan.W_dt = Mat::Zero(di, di);
      blk.scan.b_dt = Vec::Zero(di);
      blk.scan.D = Vec::Zero(di);
      blk.W_out = Mat::Zero(di, d);
      m.stages[s].push_back(std::move(blk));
    }
    if (s < 3) {
      m.down[s].W = Mat::Zero(2 * d, cfg.stage_dim(s + 1));
      m.down[s].b = Vec::Zero(cfg.stage_dim(s + 1));
    }
  }
  m.head_W = Mat::Zero(cfg.stage_dim(3), cfg.n_classes);
  m.head_b = Vec::Zero(cfg.n_classes);
  return m;
}

}  // namespace

std::string ModelConfig::canonical() const {
  std::ostringstream os;
  os << "input_dim=" << input_dim << ";d0=" << d0 << ";n_state=" << n_state
     << ";expansion=" << expansion << ";conv_width=" << conv_width << ";depths=";
  for (int i = 0; i < 4; ++i) os << (i ? "," : "") << depths[i];
  os << ";n_classes=" << n_classes;
  return os.str();
}

uint64_t ModelConfig::hash() const {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

ModelConfig model_preset(const std::string& name) {
  ModelConfig cfg;
  if (name == "gradcheck") {
    cfg.input_dim = 8;
    cfg.d0 = 2;
    cfg.n_state = 2;
    cfg.depths = {1, 1, 1, 1};
  } else if (name == "tiny") {
    cfg.d0 = 16;
    cfg.depths = {1, 1, 1, 1};
  } else if (name == "small") {
    cfg.d0 = 32;
    cfg.depths = {1, 1, 2, 1};
  } else if (name == "medium") {
    cfg.d0 = 48;
    cfg.depths = {2, 2, 4, 2};
  } else {
    throw std::invalid_argument("unknown model preset: " + name);
  }
  return cfg;
}

ModelParams init_model(const ModelConfig& cfg, uint64_t seed) {
  ModelParams m = make_zero_model(cfg);
  Rng rng(Rng::mix(seed, 0x6d6f64656cull));  // "model" stream

  fill_uniform(m.patch_W, rng, 1.0 / std::sqrt(double(cfg.input_dim)));
  for (int s = 0; s < 4; ++s) {
    const int d = cfg.stage_dim(s);
    const int di = cfg.stage_inner(s);
    for (BlockParams& blk : m.stages[s]) {
      blk.norm_g.setOnes();
      fill_uniform(blk.W_in_x, rng, 1.0 / std::sqrt(double(d)));
      fill_uniform(blk.W_in_z, rng, 1.0 / std::sqrt(double(d)));
      fill_uniform(blk.conv_w, rng, 1.0 / std::sqrt(double(cfg.conv_width)));
      fill_uniform(blk.scan.W_dt, rng, 1.0 / std::sqrt(double(di)));
      for (long i = 0; i < di; ++i) {
        const double dt = std::exp(rng.uniform(std::log(1e-3), std::log(1e-1)));
        blk.scan.b_dt[i] = softplus_inverse(dt);
      }
      fill_uniform(blk.scan.W_B, rng, 1.0 / std::sqrt(double(di)));
      fill_uniform(blk.scan.W_C, rng, 1.0 / std::sqrt(double(di)));
      for (long i = 0; i < di; ++i) {
        for (int j = 0; j < cfg.n_state; ++j) {
          blk.scan.A_log(i, j) = std::log(rng.uniform(1.0, double(cfg.n_state) + 1e-12));
        }
      }
      blk.scan.D.setOnes();
      fill_uniform(blk.W_out, rng, 1.0 / std::sqrt(double(di)));
    }
    if (s < 3) fill_uniform(m.down[s].W, rng, 1.0 / std::sqrt(2.0 * d));
  }
  fill_uniform(m.head_W, rng, 1.0 / std::sqrt(double(cfg.stage_dim(3))));
  return m;
}

ModelParams zeros_like(const ModelParams& m) { return make_zero_model(m.cfg); }

long param_count(const ModelConfig& cfg) {
  ModelParams m = make_zero_model(cfg);
  long total = 0;
  for (const TensorRef& t : model_tensors(m)) total += t.size;
  return total;
}

std::vector<TensorRef> model_tensors(ModelParams& m) {
  std::vector<TensorRef> refs;
  auto add_mat = [&](const std::string& name, Mat& t) {
    refs.push_back({name, t.data(), {t.rows(), t.cols()}, t.size()});
  };
  auto add_vec = [&](const std::string& name, Vec& t) {
    refs.push_back({name, t.data(), {t.size()}, t.size()});
  };
  add_mat("patch.W", m.patch_W);
  add_vec("patch.b", m.patch_b);
  for (size_t s = 0; s < m.stages.size(); ++s) {
    for (size_t b = 0; b < m.stages[s].size(); ++b) {
      const std::string p = "stage" + std::to_string(s) + ".block" + std::to_string(b) + ".";
      BlockParams& blk = m.stages[s][b];
      add_vec(p + "norm_g", blk.norm_g);
      add_mat(p + "W_in_x", blk.W_in_x);
      add_mat(p + "W_in_z", blk.W_in_z);
      add_mat(p + "conv_w", blk.conv_w);
      add_mat(p + "scan.A_log", blk.scan.A_log);
      add_mat(p + "scan.W_B", blk.scan.W_B);
      add_mat(p + "scan.W_C", blk.scan.W_C);
      add_mat(p + "scan.W_dt", blk.scan.W_dt);
      add_vec(p + "scan.b_dt", blk.scan.b_dt);
      add_vec(p + "scan.D", blk.scan.D);
      add_mat(p + "W_out", blk.W_out);
    }
  }
  for (int s = 0; s < 3; ++s) {
    const std::string p = "down" + std::to_string(s) + ".";
    add_mat(p + "W", m.down[s].W);
    add_vec(p + "b", m.down[s].b);
  }
  add_mat("head.W", m.head_W);
  add_vec("head.b", m.head_b);
  return refs;
}

Mat block_forward(const Mat& u, const BlockParams& p, double norm_eps, BlockCache* cache) {
  const long L = u.rows();
  const long d = u.cols();
  const long di = p.W_in_x.cols();
  const long w = p.conv_w.rows();
  if (p.W_in_x.rows() != d || p.W_out.cols() != d || p.norm_g.size() != d) {
    throw std::invalid_argument("block width mismatch");
  }

  Vec inv_rms = (u.array().square().rowwise().mean() + norm_eps).rsqrt().matrix();
  Mat v = ((u.array().colwise() * inv_rms.array()).rowwise() *
           p.norm_g.transpose().array())
              .matrix();

  Mat xc = v * p.W_in_x;
  Mat xa = Mat::Zero(L, di);
  for (long k = 0; k < w; ++k) {
    const long shift = w - 1 - k;
    if (shift >= L) continue;
    xa.bottomRows(L - shift).array() +=
        xc.topRows(L - shift).array().rowwise() * p.conv_w.row(k).array();
  }
  Mat x = silu_mat(xa);
  Mat z = v * p.W_in_z;

  Mat dt_pre = (x * p.scan.W_dt).rowwise() + p.scan.b_dt.transpose();
  Mat dt = softplus_mat(dt_pre);
  Mat Bm = x * p.scan.W_B;
  Mat Cm = x * p.scan.W_C;
  const Mat A = (-p.scan.A_log.array().exp()).matrix();

  Mat y = scan_core(x, dt, A, Bm, Cm, false);
  y += scan_core(x, dt, A, Bm, Cm, true);
  y.array() += x.array().rowwise() * p.scan.D.transpose().array();

  Mat out = u + (y.array() * silu_mat(z).array()).matrix() * p.W_out;

  if (cache) {
    cache->u = u;
    cache->v = std::move(v);
    cache->inv_rms = std::move(inv_rms);
    cache->xc = std::move(xc);
    cache->xa = std::move(xa);
    cache->x = std::move(x);
    cache->z = std::move(z);
    cache->dt_pre = std::move(dt_pre);
    cache->dt = std::move(dt);
    cache->Bm = std::move(Bm);
    cache->Cm = std::move(Cm);
    cache->y = std::move(y);
  }
  return out;
}

Mat block_backward(const BlockParams& p, const BlockCache& c, const Mat& dout,
                   double norm_eps, BlockParams& g) {
  (void)norm_eps;  // the cached inv_rms already folds the epsilon in
  const long L = c.u.rows();
  const long d = c.u.cols();
  const long di = c.x.cols();
  const long w = p.conv_w.rows();
  if (dout.rows() != L || dout.cols() != d) {
    throw std::invalid_argument("block gradient shape mismatch");
  }

  const Mat sz = silu_mat(c.z);
  const Mat gated = (c.y.array() * sz.array()).matrix();
  g.W_out.noalias() += gated.transpose() * dout;
  const Mat dgated = dout * p.W_out.transpose();

  const Mat dy = (dgated.array() * sz.array()).matrix();
  const Mat dz = (dgated.array() * c.y.array() * silu_grad_mat(c.z).array()).matrix();

  g.scan.D += (dy.array() * c.x.array()).colwise().sum().matrix().transpose();
  Mat dx = (dy.array().rowwise() * p.scan.D.transpose().array()).matrix();

  const Mat A = (-p.scan.A_log.array().exp()).matrix();
  Mat ddt = Mat::Zero(L, di);
  Mat dA = Mat::Zero(di, p.scan.A_log.cols());
  Mat dBm = Mat::Zero(L, c.Bm.cols());
  Mat dCm = Mat::Zero(L, c.Cm.cols());
  for (const bool reverse : {false, true}) {
    ScanGrads sg = scan_core_backward(c.x, c.dt, A, c.Bm, c.Cm, dy, reverse);
    dx += sg.dx;
    ddt += sg.ddt;
    dA += sg.dA;
    dBm += sg.dB;
    dCm += sg.dC;
  }
  g.scan.A_log.array() += dA.array() * A.array();

  g.scan.W_B.noalias() += c.x.transpose() * dBm;
  dx.noalias() += dBm * p.scan.W_B.transpose();
  g.scan.W_C.noalias() += c.x.transpose() * dCm;
  dx.noalias() += dCm * p.scan.W_C.transpose();

  const Mat ddt_pre = (ddt.array() * sigmoid_mat(c.dt_pre).array()).matrix();
  g.scan.b_dt += ddt_pre.colwise().sum().matrix().transpose();
  g.scan.W_dt.noalias() += c.x.transpose() * ddt_pre;
  dx.noalias() += ddt_pre * p.scan.W_dt.transpose();

  const Mat dxa = (dx.array() * silu_grad_mat(c.xa).array()).matrix();
  Mat dxc = Mat::Zero(L, di);
  for (long k = 0; k < w; ++k) {
    const long shift = w - 1 - k;
    if (shift >= L) continue;
    dxc.topRows(L - shift).array() +=
        dxa.bottomRows(L - shift).array().rowwise() * p.conv_w.row(k).array();
    g.conv_w.row(k) +=
        (c.xc.topRows(L - shift).array() * dxa.bottomRows(L - shift).array())
            .colwise()
            .sum()
            .matrix();
  }

  Mat dv = dxc * p.W_in_x.transpose();
  dv.noalias() += dz * p.W_in_z.transpose();
  g.W_in_x.noalias() += c.v.transpose() * dxc;
  g.W_in_z.noalias() += c.v.transpose() * dz;

  const Mat normed = (c.u.array().colwise() * c.inv_rms.array()).matrix();
  g.norm_g += (dv.array() * normed.array()).colwise().sum().matrix().transpose();
  const Mat dn = (dv.array().rowwise() * p.norm_g.transpose().array()).matrix();
  const Vec dot = (dn.array() * c.u.array()).rowwise().sum().matrix();
  Mat du = (dn.array().colwise() * c.inv_rms.array() -
            c.u.array().colwise() *
                (dot.array() * c.inv_rms.array().cube() / double(d)))
               .matrix();
  du += dout;
  return du;
}

Vec backbone_forward(const Mat& features, const ModelParams& m, Activation* act) {
  const long T = features.rows();
  if (features.cols() != m.cfg.input_dim) {
    throw std::invalid_argument("feature dimension mismatch");
  }
  if (T < kBackboneMinFrames) {
    throw std::invalid_argument("input too short: need at least " +
                                std::to_string(kBackboneMinFrames) + " frames");
  }

  Mat h = (features * m.patch_W).rowwise() + m.patch_b.transpose();
  if (act) {
    act->input = features;
    act->stages.assign(4, {});
  }

  for (int s = 0; s < 4; ++s) {
    for (size_t b = 0; b < m.stages[s].size(); ++b) {
      BlockCache* bc = nullptr;
      if (act) {
        act->stages[s].emplace_back();
        bc = &act->stages[s].back();
      }
      h = block_forward(h, m.stages[s][b], m.cfg.norm_eps, bc);
    }
    if (act) act->stage_out[s] = h;
    if (s < 3) {
      const long L2 = h.rows() / 2;
      // Row-major rows are contiguous, so two adjacent steps concatenate for
      // free by reinterpreting the buffer as L2 x 2d (odd tail row dropped).
      Eigen::Map<const Mat> cat(h.data(), L2, 2 * h.cols());
      Mat next = (cat * m.down[s].W).rowwise() + m.down[s].b.transpose();
      h = std::move(next);
    }
  }

  Vec pooled = h.colwise().mean().transpose();
  Vec logits = m.head_W.transpose() * pooled + m.head_b;
  if (act) {
    act->pooled = pooled;
    act->logits = logits;
  }
  return logits;
}

void backbone_backward(const ModelParams& m, const Activation& act, const Vec& dlogits,
                       ModelParams& grads) {
  if (act.stages.size() != 4 || act.pooled.size() != m.cfg.stage_dim(3)) {
    throw std::invalid_argument("activation cache does not match model");
  }
  for (int s = 0; s < 4; ++s) {
    if (act.stages[s].size() != m.stages[s].size()) {
      throw std::invalid_argument("activation cache does not match model depth");
    }
  }

  grads.head_b += dlogits;
  grads.head_W.noalias() += act.pooled * dlogits.transpose();
  const Vec dpooled = m.head_W * dlogits;

  const long L4 = act.stage_out[3].rows();
  Mat dh = (Vec::Ones(L4) * dpooled.transpose()) / double(L4);

  for (int s = 3; s >= 0; --s) {
    for (int b = int(m.stages[s].size()) - 1; b >= 0; --b) {
      dh = block_backward(m.stages[s][b], act.stages[s][b], dh, m.cfg.norm_eps,
                          grads.stages[s][b]);
    }
    if (s > 0) {
      const Mat& prev = act.stage_out[s - 1];
      const long L2 = prev.rows() / 2;
      Eigen::Map<const Mat> cat(prev.data(), L2, 2 * prev.cols());
      grads.down[s - 1].b += dh.colwise().sum().matrix().transpose();
      grads.down[s - 1].W.noalias() += cat.transpose() * dh;
      const Mat dcat = dh * m.down[s - 1].W.transpose();
      Mat dprev = Mat::Zero(prev.rows(), prev.cols());
      Eigen::Map<Mat>(dprev.data(), L2, 2 * prev.cols()) = dcat;
      dh = std::move(dprev);
    }
  }

  grads.patch_b += dh.colwise().sum().matrix().transpose();
  grads.patch_W.noalias() += act.input.transpose() * dh;
}

}  // namespace adc
