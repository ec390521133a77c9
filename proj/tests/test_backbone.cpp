#include "adc/model.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "adc/checkpoint.hpp"
#include "adc/gradcheck.hpp"
#include "adc/rng.hpp"
#include "adc/scan.hpp"
#include "doctest.h"

using namespace adc;

namespace {

Mat random_mat(Rng& rng, long r, long c, double scale = 1.0) {
  Mat m(r, c);
  for (long i = 0; i < r; ++i)
    for (long j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
  return m;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("presets have the documented geometry") {
  const ModelConfig tiny = model_preset("tiny");
  CHECK(tiny.d0 == 16);
  CHECK(tiny.depths == std::array<int, 4>{1, 1, 1, 1});
  CHECK(tiny.n_state == 16);
  CHECK(tiny.stage_dim(0) == 16);
  CHECK(tiny.stage_dim(3) == 128);
  CHECK(tiny.stage_inner(2) == 2 * 64);

  const ModelConfig small = model_preset("small");
  CHECK(small.d0 == 32);
  CHECK(small.depths == std::array<int, 4>{1, 1, 2, 1});

  const ModelConfig med = model_preset("medium");
  CHECK(med.d0 == 48);
  CHECK(med.depths == std::array<int, 4>{2, 2, 4, 2});

  const ModelConfig gc = model_preset("gradcheck");
  CHECK(gc.input_dim == 8);
  CHECK(param_count(gc) <= 10000);

  CHECK_THROWS(model_preset("huge"));
}

TEST_CASE("parameter count matches the tensor inventory") {
  for (const char* name : {"gradcheck", "tiny", "small"}) {
    const ModelConfig cfg = model_preset(name);
    ModelParams m = init_model(cfg, 1);
    long total = 0;
    for (const TensorRef& t : model_tensors(m)) total += t.size;
    CHECK(total == param_count(cfg));
  }
  CHECK(param_count(model_preset("tiny")) == 267810);
}

TEST_CASE("initialization is seed-deterministic") {
  const ModelConfig cfg = model_preset("gradcheck");
  ModelParams a = init_model(cfg, 42);
  ModelParams b = init_model(cfg, 42);
  ModelParams c = init_model(cfg, 43);
  const auto ta = model_tensors(a), tb = model_tensors(b), tc = model_tensors(c);
  bool all_equal = true, any_diff = false;
  for (size_t i = 0; i < ta.size(); ++i) {
    for (long j = 0; j < ta[i].size; ++j) {
      all_equal &= ta[i].data[j] == tb[i].data[j];
      any_diff |= ta[i].data[j] != tc[i].data[j];
    }
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("block forward agrees with a step-by-step recomputation") {
  ModelConfig cfg;
  cfg.input_dim = 8;
  cfg.d0 = 4;
  cfg.n_state = 3;
  cfg.depths = {1, 1, 1, 1};
  ModelParams m = init_model(cfg, 5);
  const BlockParams& p = m.stages[0][0];

  Rng rng(11);
  const long L = 10, d = cfg.d0;
  const Mat u = random_mat(rng, L, d);

  BlockCache cache;
  const Mat out = block_forward(u, p, cfg.norm_eps, &cache);

  // rms norm, scale only
  for (long t = 0; t < L; ++t) {
    const double ms = u.row(t).squaredNorm() / d;
    const double inv = 1.0 / std::sqrt(ms + cfg.norm_eps);
    for (long c = 0; c < d; ++c) {
      CHECK(cache.v(t, c) == doctest::Approx(u(t, c) * inv * p.norm_g[c]).epsilon(1e-12));
    }
  }

  // causal depthwise conv over the projected input
  const Mat xc = cache.v * p.W_in_x;
  CHECK((xc - cache.xc).cwiseAbs().maxCoeff() < 1e-12);
  const long w = p.conv_w.rows();
  const long di = p.W_in_x.cols();
  for (long t = 0; t < L; ++t) {
    for (long c = 0; c < di; ++c) {
      double acc = 0.0;
      for (long k = 0; k < w; ++k) {
        const long src = t - (w - 1 - k);
        if (src >= 0) acc += p.conv_w(k, c) * xc(src, c);
      }
      CHECK(cache.xa(t, c) == doctest::Approx(acc).epsilon(1e-10));
      CHECK(cache.x(t, c) == doctest::Approx(silu(acc)).epsilon(1e-10));
    }
  }

  // gate projections feeding the recurrence
  const Mat dt_pre = (cache.x * p.scan.W_dt).rowwise() + p.scan.b_dt.transpose();
  for (long t = 0; t < L; ++t)
    for (long c = 0; c < di; ++c)
      CHECK(cache.dt(t, c) == doctest::Approx(softplus(dt_pre(t, c))).epsilon(1e-12));
  CHECK((cache.Bm - cache.x * p.scan.W_B).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((cache.Cm - cache.x * p.scan.W_C).cwiseAbs().maxCoeff() < 1e-12);

  // both scan directions share one parameter set; the skip applies once
  const Mat A = (-p.scan.A_log.array().exp()).matrix();
  Mat y = scan_core(cache.x, cache.dt, A, cache.Bm, cache.Cm, false) +
          scan_core(cache.x, cache.dt, A, cache.Bm, cache.Cm, true);
  y.array() += cache.x.array().rowwise() * p.scan.D.transpose().array();
  CHECK((y - cache.y).cwiseAbs().maxCoeff() < 1e-10);

  // gated residual output
  Mat gate = cache.z;
  for (long t = 0; t < L; ++t)
    for (long c = 0; c < di; ++c) gate(t, c) = silu(cache.z(t, c));
  const Mat expect = u + (y.array() * gate.array()).matrix() * p.W_out;
  CHECK((out - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pooling and head follow the cached stage output") {
  const ModelConfig cfg = model_preset("gradcheck");
  ModelParams m = init_model(cfg, 9);
  Rng rng(21);
  const Mat features = random_mat(rng, 40, cfg.input_dim);

  Activation act;
  const Vec logits = backbone_forward(features, m, &act);
  REQUIRE(logits.size() == cfg.n_classes);

  const Vec pooled = act.stage_out[3].colwise().mean().transpose();
  CHECK((pooled - act.pooled).cwiseAbs().maxCoeff() < 1e-12);
  const Vec expect = m.head_W.transpose() * pooled + m.head_b;
  CHECK((logits - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((logits - act.logits).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("time halves between stages and short inputs are rejected") {
  const ModelConfig cfg = model_preset("gradcheck");
  ModelParams m = init_model(cfg, 2);
  Rng rng(33);

  Activation act;
  backbone_forward(random_mat(rng, 35, cfg.input_dim), m, &act);
  CHECK(act.stage_out[0].rows() == 35);
  CHECK(act.stage_out[1].rows() == 17);  // odd tails drop
  CHECK(act.stage_out[2].rows() == 8);
  CHECK(act.stage_out[3].rows() == 4);

  CHECK_NOTHROW(backbone_forward(random_mat(rng, kBackboneMinFrames, cfg.input_dim), m));
  CHECK_THROWS(backbone_forward(random_mat(rng, kBackboneMinFrames - 1, cfg.input_dim), m));
  CHECK_THROWS(backbone_forward(random_mat(rng, 40, cfg.input_dim + 1), m));
}

TEST_CASE("the full backbone gradient passes a finite-difference audit") {
  // Independent of the bundled checker's sampling: dense check of a small
  // slice of parameters through the public API.
  const GradCheckReport rep = grad_check(model_preset("gradcheck"), 12, 120, 1e-5);
  CHECK(rep.n_checked == 120);
  CHECK(rep.max_rel_err < 1e-4);
  CHECK(rep.passed(1e-4));
}

TEST_CASE("a corrupted backward is caught by the checker") {
  const GradCheckReport rep = grad_check(model_preset("gradcheck"), 12, 40, 1e-5, true);
  CHECK(rep.max_rel_err > 1e-2);
  CHECK(!rep.passed(1e-4));
}

TEST_CASE("checkpoints round-trip bit-exactly at float32") {
  namespace fs = std::filesystem;
  fs::create_directories("ckpt_tmp");
  const ModelConfig cfg = model_preset("gradcheck");
  ModelParams m = init_model(cfg, 77);

  save_checkpoint("ckpt_tmp/a.ckpt", m);
  ModelParams r = load_checkpoint("ckpt_tmp/a.ckpt", cfg);
  const auto tm = model_tensors(m), tr = model_tensors(r);
  REQUIRE(tm.size() == tr.size());
  for (size_t i = 0; i < tm.size(); ++i) {
    CHECK(tm[i].name == tr[i].name);
    REQUIRE(tm[i].size == tr[i].size);
    for (long j = 0; j < tm[i].size; ++j) {
      CHECK(tr[i].data[j] == static_cast<double>(static_cast<float>(tm[i].data[j])));
    }
  }

  // Serializing what was just loaded reproduces the file byte for byte.
  save_checkpoint("ckpt_tmp/b.ckpt", r);
  CHECK(read_file("ckpt_tmp/a.ckpt") == read_file("ckpt_tmp/b.ckpt"));

  ModelConfig other = cfg;
  other.d0 *= 2;
  CHECK_THROWS(load_checkpoint("ckpt_tmp/a.ckpt", other));
  CHECK_THROWS(load_checkpoint("ckpt_tmp/missing.ckpt", cfg));
  fs::remove_all("ckpt_tmp");
}

TEST_CASE("config hashes separate geometries") {
  ModelConfig a = model_preset("tiny");
  ModelConfig b = a;
  b.d0 = 17;
  ModelConfig c = a;
  c.n_classes = 3;
  CHECK(a.hash() != b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a.hash() == model_preset("tiny").hash());
}

TEST_CASE("zeros_like copies shapes only") {
  ModelParams m = init_model(model_preset("gradcheck"), 3);
  ModelParams z = zeros_like(m);
  const auto tm = model_tensors(m), tz = model_tensors(z);
  REQUIRE(tm.size() == tz.size());
  for (size_t i = 0; i < tz.size(); ++i) {
    CHECK(tz[i].size == tm[i].size);
    for (long j = 0; j < tz[i].size; ++j) CHECK(tz[i].data[j] == 0.0);
  }
}

TEST_CASE("softmax of equal logits is uniform") {
  Vec two(2);
  two << 0.0, 0.0;
  const Vec p = softmax(two);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));
  CHECK(is_probability_vector(p));

  Vec shifted(3);
  shifted << 1000.0, 1001.0, 999.0;  // stability under large offsets
  CHECK(is_probability_vector(softmax(shifted)));
}
