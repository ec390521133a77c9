#include "adc/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace adc {

using nlohmann::json;

std::vector<std::string> class_label_names(int n_classes) {
  if (n_classes == 2) return {"normal", "dementia"};
  if (n_classes == 3) return {"normal", "mci", "dementia"};
  throw std::invalid_argument("supported class counts are 2 and 3");
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  std::vector<ManifestEntry> entries;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error("manifest parse error at line " + std::to_string(line_no) +
                               ": " + e.what());
    }
    ManifestEntry e;
    e.recording_id = j.at("recording_id").get<std::string>();
    e.participant_id = j.value("participant_id", e.recording_id);
    e.wav = j.at("wav").get<std::string>();
    e.label = j.at("label").get<int>();
    e.label_name = j.value("label_name", std::string());
    e.split = j.at("split").get<std::string>();
    if (e.split != "train" && e.split != "validation" && e.split != "test") {
      throw std::runtime_error("unknown split '" + e.split + "' in " + e.recording_id);
    }
    for (const json& jt : j.value("turns", json::array())) {
      SpeakerTurn t;
      t.start = jt.at("start").get<double>();
      t.end = jt.at("end").get<double>();
      t.speaker_id = jt.at("speaker").get<std::string>();
      t.text = jt.value("text", std::string());
      e.turns.push_back(std::move(t));
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

void save_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open manifest for writing: " + path);
  for (const ManifestEntry& e : entries) {
    json turns = json::array();
    for (const SpeakerTurn& t : e.turns) {
      turns.push_back({{"start", t.start},
                       {"end", t.end},
                       {"speaker", t.speaker_id},
                       {"text", t.text}});
    }
    json j{{"recording_id", e.recording_id},
           {"participant_id", e.participant_id},
           {"wav", e.wav},
           {"label", e.label},
           {"label_name", e.label_name},
           {"split", e.split},
           {"turns", std::move(turns)}};
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("short write: " + path);
}

std::vector<ManifestEntry> entries_for_split(const std::vector<ManifestEntry>& entries,
                                             const std::string& split) {
  std::vector<ManifestEntry> out;
  for (const ManifestEntry& e : entries) {
    if (e.split == split) out.push_back(e);
  }
  return out;
}

int manifest_num_classes(const std::vector<ManifestEntry>& entries) {
  int max_label = -1;
  for (const ManifestEntry& e : entries) max_label = std::max(max_label, e.label);
  return max_label + 1;
}

std::string resolve_wav_path(const std::string& manifest_path, const std::string& wav) {
  std::filesystem::path p(wav);
  if (p.is_absolute()) return wav;
  return (std::filesystem::path(manifest_path).parent_path() / p).string();
}

}  // namespace adc
