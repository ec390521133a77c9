#include "adc/gradcheck.hpp"

#include <algorithm>
#include <stdexcept>

#include "adc/rng.hpp"
#include "adc/train.hpp"

namespace adc {

GradCheckReport grad_check(const ModelConfig& cfg, uint64_t seed, int n_samples,
                           double epsilon, bool corrupt_backward) {
  if (n_samples < 1) throw std::invalid_argument("grad_check: n_samples must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("grad_check: epsilon must be > 0");

  ModelParams m = init_model(cfg, seed);
  Rng rng(Rng::mix(seed, 0x67636865636bull));

  const int T = 20;
  Mat input(T, cfg.input_dim);
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < cfg.input_dim; ++j) input(t, j) = rng.normal();
  }
  const int label = static_cast<int>(rng.uniform_int(cfg.n_classes));
  LossConfig lcfg;
  lcfg.kind = LossKind::ce;
  lcfg.class_weights = Vec::Ones(cfg.n_classes);

  const auto loss_value = [&] {
    const Vec logits = backbone_forward(input, m);
    return loss(logits, label, lcfg).value;
  };

  // Analytic gradients once at the unperturbed point.
  ModelParams grads = zeros_like(m);
  {
    Activation act;
    const Vec logits = backbone_forward(input, m, &act);
    const LossResult lr = loss(logits, label, lcfg);
    backbone_backward(m, act, lr.dlogits, grads);
  }
  std::vector<TensorRef> params = model_tensors(m);
  std::vector<TensorRef> grad_view = model_tensors(grads);
  if (corrupt_backward) {
    for (TensorRef& g : grad_view) {
      for (long i = 0; i < g.size; ++i) g.data[i] = -g.data[i];
    }
  }

  long total = 0;
  for (const TensorRef& p : params) total += p.size;

  GradCheckReport report;
  for (int s = 0; s < n_samples; ++s) {
    long flat = static_cast<long>(rng.uniform_int(static_cast<uint64_t>(total)));
    size_t ti = 0;
    while (flat >= params[ti].size) {
      flat -= params[ti].size;
      ++ti;
    }
    double* theta = params[ti].data + flat;
    const double saved = *theta;

    *theta = saved + epsilon;
    const double up = loss_value();
    *theta = saved - epsilon;
    const double down = loss_value();
    *theta = saved;

    const double numeric = (up - down) / (2.0 * epsilon);
    const double analytic = grad_view[ti].data[flat];
    const double rel =
        std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), 1e-6);
    ++report.n_checked;
    if (rel > report.max_rel_err) {
      report.max_rel_err = rel;
      report.worst_tensor = params[ti].name;
      report.worst_analytic = analytic;
      report.worst_numeric = numeric;
    }
  }
  return report;
}

}  // namespace adc
