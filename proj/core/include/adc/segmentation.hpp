#pragma once

#include <functional>
#include <string>
#include <vector>

#include "adc/audio_io.hpp"

namespace adc {

enum class ChunkKind { speech, silence };
enum class Role { unassigned, interviewer, participant };

std::string to_string(ChunkKind kind);
std::string to_string(Role role);

// Contiguous span of one acoustic kind, produced by the activity detector.
struct Chunk {
  double start = 0.0;
  double end = 0.0;
  ChunkKind kind = ChunkKind::silence;

  double duration() const { return end - start; }
};

// One speaker's turn, optionally carrying its transcript text.
struct SpeakerTurn {
  double start = 0.0;
  double end = 0.0;
  std::string speaker_id;
  Role role = Role::unassigned;
  std::string text;

  double duration() const { return end - start; }
};

struct VadConfig {
  double frame = 0.03;           // analysis frame, seconds
  double energy_threshold = 0.5; // fraction of the recording's median frame energy
  int hangover = 5;              // silence gaps shorter than this many frames are bridged
  double min_speech = 0.2;       // speech runs shorter than this are demoted, seconds
};

// Unified merge input: a chunk or turn piece with kind and (possibly) a role.
struct Span {
  double start = 0.0;
  double end = 0.0;
  ChunkKind kind = ChunkKind::speech;
  Role role = Role::unassigned;

  double duration() const { return end - start; }
};

// Bounded-length model input assembled from consecutive spans.
struct Segment {
  double start = 0.0;
  double end = 0.0;
  std::vector<Span> sources;

  double duration() const { return end - start; }
  std::vector<Role> roles_included() const;  // sorted, unique
  ChunkKind kind() const;                    // speech if any source is speech
};

using SpanFilter = std::function<bool(const Span&)>;

enum class RoleFilter { both, participant, interviewer };

RoleFilter parse_role_filter(const std::string& name);
std::string to_string(RoleFilter roles);

// Short-time-energy activity detection. Output chunks alternate in kind and
// cover [0, duration] exactly; an all-zero waveform yields a single silence
// chunk.
std::vector<Chunk> energy_vad(const Waveform& w, const VadConfig& cfg = {});

// Returns the annotated turns with roles cleared, validating that they are
// time-ordered and non-overlapping. Stand-in for a real diarizer.
std::vector<SpeakerTurn> oracle_diarize(const std::vector<SpeakerTurn>& annotated);

// The earliest speaker with a turn longer than 20 ms becomes the interviewer
// (on all their turns); every other speaker becomes the participant.
std::vector<SpeakerTurn> assign_roles(std::vector<SpeakerTurn> turns);

// Tags each chunk with the role of the turn it overlaps most; chunks with no
// overlapping turn stay unassigned.
std::vector<Span> annotate_roles(const std::vector<Chunk>& chunks,
                                 const std::vector<SpeakerTurn>& turns);

std::vector<Span> spans_from_chunks(const std::vector<Chunk>& chunks);
std::vector<Span> spans_from_turns(const std::vector<SpeakerTurn>& turns);

// True for spans passing the role restriction and, unless include_silence,
// excluding silence spans. RoleFilter::both accepts unassigned roles.
SpanFilter make_span_filter(RoleFilter roles, bool include_silence);

// Greedy left-to-right packing of filtered spans into segments whose
// wall-clock span (end - start) stays within max_dur; a single span longer
// than max_dur is split at max_dur boundaries.
std::vector<Segment> merge_segments(const std::vector<Span>& spans, double max_dur,
                                    const SpanFilter& filter);

// Concatenates the audio of the segment's source spans.
Waveform splice_segment(const Waveform& w, const Segment& seg);

}  // namespace adc
