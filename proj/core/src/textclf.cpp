#include "adc/textclf.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

#include "adc/inference.hpp"

namespace adc {

using nlohmann::json;

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

BagOfWordsClassifier::BagOfWordsClassifier(int n_classes) : n_classes_(n_classes) {
  if (n_classes < 2) throw std::invalid_argument("need at least 2 classes");
}

Vec BagOfWordsClassifier::featurize(const Transcript& t) const {
  Vec x = Vec::Zero(static_cast<long>(vocab_.size()));
  long total = 0;
  for (const Transcript::Line& line : t.lines) {
    for (const std::string& tok : tokenize(line.text)) {
      ++total;
      auto it = vocab_.find(tok);
      if (it != vocab_.end()) x[it->second] += 1.0;
    }
  }
  if (total > 0) x /= static_cast<double>(total);
  return x;
}

void BagOfWordsClassifier::fit(const std::vector<Transcript>& transcripts,
                               const std::vector<int>& labels, const FitConfig& cfg) {
  if (transcripts.size() != labels.size() || transcripts.empty()) {
    throw std::invalid_argument("need one label per transcript");
  }
  for (int y : labels) {
    if (y < 0 || y >= n_classes_) throw std::invalid_argument("label out of range");
  }

  vocab_.clear();
  for (const Transcript& t : transcripts) {
    for (const Transcript::Line& line : t.lines) {
      for (const std::string& tok : tokenize(line.text)) {
        vocab_.emplace(tok, 0);
      }
    }
  }
  int idx = 0;
  for (auto& [tok, id] : vocab_) id = idx++;

  const long V = static_cast<long>(vocab_.size());
  const long N = static_cast<long>(transcripts.size());
  Mat X(N, V);
  for (long i = 0; i < N; ++i) X.row(i) = featurize(transcripts[i]).transpose();

  W_ = Mat::Zero(V, n_classes_);
  b_ = Vec::Zero(n_classes_);
  for (int it = 0; it < cfg.iterations; ++it) {
    Mat logits = (X * W_).rowwise() + b_.transpose();
    // Row-wise softmax minus one-hot: the cross-entropy gradient.
    Mat p = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp().matrix();
    p.array().colwise() /= p.rowwise().sum().array();
    for (long i = 0; i < N; ++i) p(i, labels[i]) -= 1.0;
    p /= static_cast<double>(N);
    W_ -= cfg.lr * (X.transpose() * p + cfg.l2 * W_);
    b_ -= cfg.lr * p.colwise().sum().transpose();
  }
  trained_ = true;
}

Vec BagOfWordsClassifier::score(const Transcript& t) const {
  if (!trained_) throw std::runtime_error("text classifier has not been trained");
  const Vec x = featurize(t);
  if (x.size() == 0 || x.sum() == 0.0) {
    return Vec::Constant(n_classes_, 1.0 / n_classes_);
  }
  return softmax(W_.transpose() * x + b_);
}

void BagOfWordsClassifier::save(const std::string& path) const {
  if (!trained_) throw std::runtime_error("cannot save an untrained text classifier");
  std::vector<std::string> tokens(vocab_.size());
  for (const auto& [tok, id] : vocab_) tokens[id] = tok;
  json j;
  j["n_classes"] = n_classes_;
  j["vocab"] = tokens;
  j["b"] = std::vector<double>(b_.data(), b_.data() + b_.size());
  json rows = json::array();
  for (long i = 0; i < W_.rows(); ++i) {
    rows.push_back(std::vector<double>(W_.row(i).begin(), W_.row(i).end()));
  }
  j["W"] = std::move(rows);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump() << '\n';
  if (!out) throw std::runtime_error("short write: " + path);
}

BagOfWordsClassifier BagOfWordsClassifier::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open text model: " + path);
  json j;
  in >> j;
  BagOfWordsClassifier clf(j.at("n_classes").get<int>());
  const auto tokens = j.at("vocab").get<std::vector<std::string>>();
  for (size_t i = 0; i < tokens.size(); ++i) {
    clf.vocab_[tokens[i]] = static_cast<int>(i);
  }
  const auto b = j.at("b").get<std::vector<double>>();
  clf.b_ = Eigen::Map<const Vec>(b.data(), static_cast<long>(b.size()));
  const json& rows = j.at("W");
  clf.W_ = Mat::Zero(static_cast<long>(tokens.size()), clf.n_classes_);
  if (rows.size() != tokens.size()) throw std::runtime_error("text model shape mismatch");
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto row = rows[i].get<std::vector<double>>();
    if (row.size() != static_cast<size_t>(clf.n_classes_)) {
      throw std::runtime_error("text model shape mismatch");
    }
    for (int c = 0; c < clf.n_classes_; ++c) clf.W_(static_cast<long>(i), c) = row[c];
  }
  clf.trained_ = true;
  return clf;
}

ExternalScoreClient::ExternalScoreClient(std::vector<std::string> labels, Transport transport)
    : labels_(std::move(labels)), transport_(std::move(transport)) {
  if (labels_.size() < 2) throw std::invalid_argument("need at least 2 labels");
  if (!transport_) throw std::invalid_argument("null transport");
}

Vec ExternalScoreClient::score(const Transcript& t) const {
  json request{{"prompt", build_prompt(t, labels_)}, {"labels", labels_}};
  const std::string raw = transport_(request.dump());
  json response;
  try {
    response = json::parse(raw);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed endpoint response: ") + e.what());
  }
  const auto scores = response.at("scores").get<std::vector<double>>();
  if (scores.size() != labels_.size()) {
    throw std::runtime_error("endpoint returned wrong number of scores");
  }
  return softmax(Eigen::Map<const Vec>(scores.data(), static_cast<long>(scores.size())));
}

ExternalScoreClient::Transport make_http_transport(const std::string& host, int port,
                                                   const std::string& path) {
  return [host, port, path](const std::string& request_json) {
    httplib::Client client(host, port);
    auto res = client.Post(path, request_json, "application/json");
    if (!res) {
      throw std::runtime_error("text endpoint unreachable: " + host + ":" +
                               std::to_string(port));
    }
    if (res->status != 200) {
      throw std::runtime_error("text endpoint error: HTTP " + std::to_string(res->status));
    }
    return res->body;
  };
}

}  // namespace adc
