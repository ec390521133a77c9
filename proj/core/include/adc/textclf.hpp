#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "adc/linalg.hpp"
#include "adc/segmentation.hpp"

namespace adc {

// Time-ordered role-labeled transcript lines of one recording (or segment).
struct Transcript {
  struct Line {
    Role role = Role::unassigned;
    std::string text;
  };
  std::vector<Line> lines;
};

// Text-branch scoring interface: any implementation maps a transcript to a
// probability vector over the classes.
class TextClassifier {
 public:
  virtual ~TextClassifier() = default;
  virtual int n_classes() const = 0;
  virtual Vec score(const Transcript& t) const = 0;
};

// Lowercases and splits on anything that is not a letter or digit.
std::vector<std::string> tokenize(const std::string& text);

// Logistic regression over unigram counts; the self-contained stand-in for a
// pretrained language model.
class BagOfWordsClassifier : public TextClassifier {
 public:
  struct FitConfig {
    int iterations = 200;
    double lr = 0.5;
    double l2 = 1e-4;
  };

  explicit BagOfWordsClassifier(int n_classes);

  // Full-batch gradient descent; vocabulary is built from the given corpus.
  void fit(const std::vector<Transcript>& transcripts, const std::vector<int>& labels,
           const FitConfig& cfg);
  void fit(const std::vector<Transcript>& transcripts, const std::vector<int>& labels) {
    fit(transcripts, labels, FitConfig{});
  }

  int n_classes() const override { return n_classes_; }
  bool trained() const { return trained_; }

  // Probability vector; a transcript with no known tokens scores uniform.
  // Throws if the classifier has not been fitted or loaded.
  Vec score(const Transcript& t) const override;

  void save(const std::string& path) const;
  static BagOfWordsClassifier load(const std::string& path);

 private:
  Vec featurize(const Transcript& t) const;  // normalized counts, or empty

  int n_classes_;
  bool trained_ = false;
  std::map<std::string, int> vocab_;
  Mat W_;  // vocab x classes
  Vec b_;  // classes
};

// Client for an external completion endpoint: sends the prompt plus the label
// list, receives one log-score per label, and normalizes with a softmax.
// Transport failures propagate; there is no silent fallback.
class ExternalScoreClient : public TextClassifier {
 public:
  // request: JSON {"prompt": ..., "labels": [...]}; expected response:
  // JSON {"scores": [...]} aligned with the label list.
  using Transport = std::function<std::string(const std::string& request_json)>;

  ExternalScoreClient(std::vector<std::string> labels, Transport transport);

  int n_classes() const override { return static_cast<int>(labels_.size()); }
  Vec score(const Transcript& t) const override;

 private:
  std::vector<std::string> labels_;
  Transport transport_;
};

// HTTP POST adapter (e.g. make_http_transport("localhost", 8080, "/score")).
ExternalScoreClient::Transport make_http_transport(const std::string& host, int port,
                                                   const std::string& path);

}  // namespace adc
