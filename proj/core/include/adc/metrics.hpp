#pragma once

#include <string>
#include <vector>

#include "adc/linalg.hpp"

namespace adc {

struct ScoredExample {
  double score = 0.0;
  int label = 0;  // binary: 1 = positive
  std::string recording_id;
};

// Mann-Whitney AUC with midranks: the probability a random positive outscores
// a random negative, ties counted one half. Throws if a class is missing.
double roc_auc(const std::vector<ScoredExample>& examples);

struct MultiScoredExample {
  Vec probs;
  int label = 0;
  std::string recording_id;
};

// Macro one-vs-rest AUC: mean over classes c of roc_auc(score = probs[c],
// label = 1[label == c]). Every class must be present.
double macro_ovr_auc(const std::vector<MultiScoredExample>& examples);

// AUC from per-recording probability vectors: binary uses probs[1] as the
// positive-class score, 3 and more classes use macro one-vs-rest.
double recording_auc(const std::vector<MultiScoredExample>& examples);

}  // namespace adc
