#include "adc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace adc {

double roc_auc(const std::vector<ScoredExample>& examples) {
  const size_t n = examples.size();
  long n_pos = 0;
  for (const ScoredExample& e : examples) {
    if (!std::isfinite(e.score)) throw std::invalid_argument("non-finite score");
    if (e.label != 0 && e.label != 1) throw std::invalid_argument("label must be 0 or 1");
    n_pos += e.label;
  }
  const long n_neg = static_cast<long>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("AUC needs both classes present");
  }

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return examples[a].score < examples[b].score;
  });

  // Midranks over tied scores; ranks are 1-based.
  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && examples[order[j]].score == examples[order[i]].score) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (size_t k = i; k < j; ++k) {
      if (examples[order[k]].label == 1) pos_rank_sum += midrank;
    }
    i = j;
  }

  const double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double macro_ovr_auc(const std::vector<MultiScoredExample>& examples) {
  if (examples.empty()) throw std::invalid_argument("empty example list");
  const long C = examples.front().probs.size();
  if (C < 2) throw std::invalid_argument("need at least 2 classes");

  std::vector<long> counts(C, 0);
  for (const MultiScoredExample& e : examples) {
    if (e.probs.size() != C) throw std::invalid_argument("inconsistent class count");
    if (e.label < 0 || e.label >= C) throw std::invalid_argument("label out of range");
    ++counts[e.label];
  }
  for (long c = 0; c < C; ++c) {
    if (counts[c] == 0) {
      throw std::invalid_argument("class " + std::to_string(c) + " absent from examples");
    }
  }

  double total = 0.0;
  for (long c = 0; c < C; ++c) {
    std::vector<ScoredExample> binary;
    binary.reserve(examples.size());
    for (const MultiScoredExample& e : examples) {
      binary.push_back({e.probs[c], e.label == c ? 1 : 0, e.recording_id});
    }
    total += roc_auc(binary);
  }
  return total / static_cast<double>(C);
}

double recording_auc(const std::vector<MultiScoredExample>& examples) {
  if (examples.empty()) throw std::invalid_argument("empty example list");
  if (examples.front().probs.size() == 2) {
    std::vector<ScoredExample> binary;
    binary.reserve(examples.size());
    for (const MultiScoredExample& e : examples) {
      binary.push_back({e.probs[1], e.label, e.recording_id});
    }
    return roc_auc(binary);
  }
  return macro_ovr_auc(examples);
}

}  // namespace adc
