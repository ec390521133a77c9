#include "adc/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>

namespace adc {

namespace {
constexpr double kTimeEps = 1e-9;
}

std::string to_string(ChunkKind kind) {
  return kind == ChunkKind::speech ? "speech" : "silence";
}

std::string to_string(Role role) {
  switch (role) {
    case Role::interviewer: return "interviewer";
    case Role::participant: return "participant";
    default: return "unassigned";
  }
}

RoleFilter parse_role_filter(const std::string& name) {
  if (name == "both") return RoleFilter::both;
  if (name == "participant") return RoleFilter::participant;
  if (name == "interviewer") return RoleFilter::interviewer;
  throw std::invalid_argument("unknown role filter: " + name);
}

std::string to_string(RoleFilter roles) {
  switch (roles) {
    case RoleFilter::participant: return "participant";
    case RoleFilter::interviewer: return "interviewer";
    default: return "both";
  }
}

std::vector<Role> Segment::roles_included() const {
  std::set<Role> uniq;
  for (const Span& s : sources) uniq.insert(s.role);
  return {uniq.begin(), uniq.end()};
}

ChunkKind Segment::kind() const {
  for (const Span& s : sources) {
    if (s.kind == ChunkKind::speech) return ChunkKind::speech;
  }
  return ChunkKind::silence;
}

std::vector<Chunk> energy_vad(const Waveform& w, const VadConfig& cfg) {
  if (w.samples.empty()) throw std::invalid_argument("empty waveform");
  if (cfg.frame <= 0.0 || cfg.energy_threshold <= 0.0 || cfg.hangover < 0 ||
      cfg.min_speech <= 0.0) {
    throw std::invalid_argument("invalid VAD config");
  }
  const long n = static_cast<long>(w.samples.size());
  const double duration = w.duration();
  const int frame_samples =
      std::max(1, static_cast<int>(std::lround(cfg.frame * w.sample_rate)));
  const int n_frames = static_cast<int>((n + frame_samples - 1) / frame_samples);

  std::vector<double> energy(n_frames, 0.0);
  for (int i = 0; i < n_frames; ++i) {
    const long lo = static_cast<long>(i) * frame_samples;
    const long hi = std::min(n, lo + frame_samples);
    double acc = 0.0;
    for (long s = lo; s < hi; ++s) acc += w.samples[s] * w.samples[s];
    energy[i] = acc / static_cast<double>(hi - lo);
  }

  std::vector<double> sorted = energy;
  std::nth_element(sorted.begin(), sorted.begin() + n_frames / 2, sorted.end());
  const double median = sorted[n_frames / 2];
  const double threshold = std::max(cfg.energy_threshold * median, 1e-8);

  std::vector<char> speech(n_frames);
  for (int i = 0; i < n_frames; ++i) speech[i] = energy[i] > threshold;

  auto frame_time = [&](int i) {
    return i >= n_frames ? duration : i * cfg.frame;
  };

  // Bridge short silence gaps that sit between speech runs.
  for (int i = 0; i < n_frames;) {
    int j = i;
    while (j < n_frames && speech[j] == speech[i]) ++j;
    if (!speech[i] && i > 0 && j < n_frames && j - i < cfg.hangover) {
      std::fill(speech.begin() + i, speech.begin() + j, char(1));
    }
    i = j;
  }
  // Demote speech runs shorter than min_speech.
  for (int i = 0; i < n_frames;) {
    int j = i;
    while (j < n_frames && speech[j] == speech[i]) ++j;
    if (speech[i] && frame_time(j) - frame_time(i) < cfg.min_speech) {
      std::fill(speech.begin() + i, speech.begin() + j, char(0));
    }
    i = j;
  }

  std::vector<Chunk> chunks;
  for (int i = 0; i < n_frames;) {
    int j = i;
    while (j < n_frames && speech[j] == speech[i]) ++j;
    chunks.push_back({frame_time(i), frame_time(j),
                      speech[i] ? ChunkKind::speech : ChunkKind::silence});
    i = j;
  }
  return chunks;
}

std::vector<SpeakerTurn> oracle_diarize(const std::vector<SpeakerTurn>& annotated) {
  std::vector<SpeakerTurn> turns = annotated;
  for (size_t i = 0; i < turns.size(); ++i) {
    if (!(turns[i].start < turns[i].end)) {
      throw std::invalid_argument("turn with non-positive duration");
    }
    if (i > 0 && turns[i].start < turns[i - 1].end - kTimeEps) {
      throw std::invalid_argument("overlapping or unordered turn annotations");
    }
    turns[i].role = Role::unassigned;
  }
  return turns;
}

std::vector<SpeakerTurn> assign_roles(std::vector<SpeakerTurn> turns) {
  std::optional<std::string> interviewer_id;
  for (const SpeakerTurn& t : turns) {
    if (t.duration() > 0.020) {
      interviewer_id = t.speaker_id;
      break;
    }
  }
  for (SpeakerTurn& t : turns) {
    t.role = (interviewer_id && t.speaker_id == *interviewer_id) ? Role::interviewer
                                                                 : Role::participant;
  }
  return turns;
}

std::vector<Span> annotate_roles(const std::vector<Chunk>& chunks,
                                 const std::vector<SpeakerTurn>& turns) {
  std::vector<Span> spans;
  spans.reserve(chunks.size());
  for (const Chunk& c : chunks) {
    Role best_role = Role::unassigned;
    double best_overlap = 0.0;
    for (const SpeakerTurn& t : turns) {
      if (t.start >= c.end) break;
      const double overlap = std::min(c.end, t.end) - std::max(c.start, t.start);
      if (overlap > best_overlap + kTimeEps) {
        best_overlap = overlap;
        best_role = t.role;
      }
    }
    spans.push_back({c.start, c.end, c.kind, best_role});
  }
  return spans;
}

std::vector<Span> spans_from_chunks(const std::vector<Chunk>& chunks) {
  std::vector<Span> spans;
  spans.reserve(chunks.size());
  for (const Chunk& c : chunks) spans.push_back({c.start, c.end, c.kind, Role::unassigned});
  return spans;
}

std::vector<Span> spans_from_turns(const std::vector<SpeakerTurn>& turns) {
  std::vector<Span> spans;
  spans.reserve(turns.size());
  for (const SpeakerTurn& t : turns) {
    spans.push_back({t.start, t.end, ChunkKind::speech, t.role});
  }
  return spans;
}

SpanFilter make_span_filter(RoleFilter roles, bool include_silence) {
  return [roles, include_silence](const Span& s) {
    if (!include_silence && s.kind == ChunkKind::silence) return false;
    switch (roles) {
      case RoleFilter::participant: return s.role == Role::participant;
      case RoleFilter::interviewer: return s.role == Role::interviewer;
      default: return true;
    }
  };
}

std::vector<Segment> merge_segments(const std::vector<Span>& spans, double max_dur,
                                    const SpanFilter& filter) {
  if (max_dur <= 0.0) throw std::invalid_argument("max_dur must be positive");
  std::vector<Segment> out;
  Segment cur;
  bool open = false;
  auto flush = [&] {
    if (open) out.push_back(cur);
    open = false;
  };

  for (const Span& span : spans) {
    if (filter && !filter(span)) continue;

    // An over-long span is hard-split: each full max_dur piece becomes its
    // own segment, the remainder re-enters the packing below.
    double s = span.start;
    while (span.end - s > max_dur + kTimeEps) {
      flush();
      const Span piece{s, s + max_dur, span.kind, span.role};
      out.push_back({piece.start, piece.end, {piece}});
      s += max_dur;
    }
    if (span.end - s <= kTimeEps) continue;
    const Span rest{s, span.end, span.kind, span.role};

    if (open && rest.end - cur.start <= max_dur + kTimeEps) {
      cur.sources.push_back(rest);
      cur.end = rest.end;
    } else {
      flush();
      cur = {rest.start, rest.end, {rest}};
      open = true;
    }
  }
  flush();
  return out;
}

Waveform splice_segment(const Waveform& w, const Segment& seg) {
  Waveform out;
  out.sample_rate = w.sample_rate;
  const long n = static_cast<long>(w.samples.size());
  for (const Span& s : seg.sources) {
    const long lo = std::clamp(static_cast<long>(std::lround(s.start * w.sample_rate)), 0L, n);
    const long hi = std::clamp(static_cast<long>(std::lround(s.end * w.sample_rate)), lo, n);
    out.samples.insert(out.samples.end(), w.samples.begin() + lo, w.samples.begin() + hi);
  }
  return out;
}

}  // namespace adc
