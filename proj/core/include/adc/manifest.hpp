#pragma once

#include <string>
#include <vector>

#include "adc/segmentation.hpp"

namespace adc {

// One dataset recording: audio location, class label, split membership, and
// ground-truth turn annotations (with per-turn transcript text).
struct ManifestEntry {
  std::string recording_id;
  std::string participant_id;
  std::string wav;  // path, relative to the manifest's directory or absolute
  int label = 0;
  std::string label_name;
  std::string split;  // train | validation | test
  std::vector<SpeakerTurn> turns;
};

// Canonical class names: {normal, dementia} or {normal, mci, dementia}.
std::vector<std::string> class_label_names(int n_classes);

std::vector<ManifestEntry> load_manifest(const std::string& path);
void save_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);

std::vector<ManifestEntry> entries_for_split(const std::vector<ManifestEntry>& entries,
                                             const std::string& split);

int manifest_num_classes(const std::vector<ManifestEntry>& entries);

// Resolves a (possibly relative) wav path against the manifest's directory.
std::string resolve_wav_path(const std::string& manifest_path, const std::string& wav);

}  // namespace adc
