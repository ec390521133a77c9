#include "adc/segmentation.hpp"

#include <cmath>

#include "doctest.h"

using namespace adc;

namespace {

// Square bursts are enough for the energy detector; frequency content is
// irrelevant to it.
Waveform tone_and_silence(const std::vector<std::pair<double, double>>& voiced,
                          double total, int sr = 16000) {
  Waveform w;
  w.sample_rate = sr;
  w.samples.assign(static_cast<size_t>(total * sr), 0.0);
  for (const auto& [s, e] : voiced) {
    for (long i = std::lround(s * sr); i < std::lround(e * sr); ++i) {
      w.samples[static_cast<size_t>(i)] = (i % 2 == 0) ? 0.2 : -0.2;
    }
  }
  return w;
}

void check_alternating_cover(const std::vector<Chunk>& chunks, double total) {
  REQUIRE(!chunks.empty());
  CHECK(chunks.front().start == doctest::Approx(0.0));
  CHECK(chunks.back().end == doctest::Approx(total));
  for (size_t i = 1; i < chunks.size(); ++i) {
    CHECK(chunks[i].start == doctest::Approx(chunks[i - 1].end));
    CHECK(chunks[i].kind != chunks[i - 1].kind);
  }
}

SpeakerTurn turn(const std::string& id, double s, double e, const std::string& text = "") {
  SpeakerTurn t;
  t.speaker_id = id;
  t.start = s;
  t.end = e;
  t.text = text;
  return t;
}

}  // namespace

TEST_CASE("energy vad finds a speech island with frame-level precision") {
  const Waveform w = tone_and_silence({{0.51, 1.71}}, 2.4);
  const auto chunks = energy_vad(w);
  check_alternating_cover(chunks, 2.4);
  REQUIRE(chunks.size() == 3);
  CHECK(chunks[0].kind == ChunkKind::silence);
  CHECK(chunks[1].kind == ChunkKind::speech);
  CHECK(chunks[2].kind == ChunkKind::silence);
  // 30 ms frames: boundaries land on the frame grid next to the true edges.
  CHECK(chunks[1].start == doctest::Approx(0.51).epsilon(0.07));
  CHECK(chunks[1].end == doctest::Approx(1.71).epsilon(0.07));
}

TEST_CASE("hangover bridges short gaps but not long ones") {
  // 0.12 s gap: under the 5-frame (0.15 s) hangover, bridged.
  auto chunks = energy_vad(tone_and_silence({{0.3, 0.8}, {0.92, 1.5}}, 2.0));
  int speech_count = 0;
  for (const auto& c : chunks) speech_count += c.kind == ChunkKind::speech;
  CHECK(speech_count == 1);

  // 0.4 s gap: two separate speech chunks.
  chunks = energy_vad(tone_and_silence({{0.3, 0.8}, {1.2, 1.8}}, 2.2));
  speech_count = 0;
  for (const auto& c : chunks) speech_count += c.kind == ChunkKind::speech;
  CHECK(speech_count == 2);
}

TEST_CASE("speech runs shorter than the minimum are demoted") {
  const auto chunks = energy_vad(tone_and_silence({{1.0, 1.1}}, 2.0));  // 0.1 s < 0.2 s
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].kind == ChunkKind::silence);
  CHECK(chunks[0].start == doctest::Approx(0.0));
  CHECK(chunks[0].end == doctest::Approx(2.0));
}

TEST_CASE("an all-zero waveform is one silence chunk") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.assign(16000, 0.0);
  const auto chunks = energy_vad(w);
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].kind == ChunkKind::silence);
}

TEST_CASE("oracle diarization validates and strips roles") {
  std::vector<SpeakerTurn> turns = {turn("a", 0.0, 1.0, "hi"), turn("b", 1.5, 2.0, "yes")};
  turns[0].role = Role::interviewer;
  const auto out = oracle_diarize(turns);
  REQUIRE(out.size() == 2);
  CHECK(out[0].role == Role::unassigned);
  CHECK(out[0].speaker_id == "a");
  CHECK(out[0].text == "hi");

  CHECK_THROWS(oracle_diarize({turn("a", 1.0, 2.0), turn("b", 0.0, 0.5)}));  // unordered
  CHECK_THROWS(oracle_diarize({turn("a", 0.0, 2.0), turn("b", 1.0, 3.0)}));  // overlap
}

TEST_CASE("earliest speaker with a turn over 20 ms becomes the interviewer") {
  // a's opening blip is only 10 ms, so b is the first real speaker.
  const auto roles = assign_roles(
      {turn("a", 0.0, 0.01), turn("b", 0.05, 3.0), turn("a", 3.1, 4.0)});
  REQUIRE(roles.size() == 3);
  CHECK(roles[0].role == Role::participant);
  CHECK(roles[1].role == Role::interviewer);
  CHECK(roles[2].role == Role::participant);

  // With a long opener the first speaker takes the interviewer role.
  const auto roles2 = assign_roles({turn("a", 0.0, 0.5), turn("b", 0.6, 3.0)});
  CHECK(roles2[0].role == Role::interviewer);
  CHECK(roles2[1].role == Role::participant);
}

TEST_CASE("chunks take the role of the turn they overlap most") {
  std::vector<Chunk> chunks = {{0.0, 1.0, ChunkKind::speech},
                               {1.0, 2.0, ChunkKind::silence},
                               {2.0, 3.0, ChunkKind::speech},
                               {5.0, 6.0, ChunkKind::speech}};
  auto turns = assign_roles({turn("a", 0.0, 0.6), turn("b", 0.6, 3.0)});
  const auto spans = annotate_roles(chunks, turns);
  REQUIRE(spans.size() == 4);
  CHECK(spans[0].role == Role::interviewer);  // 0.6 of a vs 0.4 of b
  CHECK(spans[1].role == Role::participant);
  CHECK(spans[2].role == Role::participant);
  CHECK(spans[3].role == Role::unassigned);  // no overlapping turn
  CHECK(spans[1].kind == ChunkKind::silence);
  CHECK(spans[0].start == chunks[0].start);
  CHECK(spans[0].end == chunks[0].end);
}

TEST_CASE("span filters combine role and silence policies") {
  Span speech_part{0, 1, ChunkKind::speech, Role::participant};
  Span speech_int{1, 2, ChunkKind::speech, Role::interviewer};
  Span sil_part{2, 3, ChunkKind::silence, Role::participant};
  Span sil_none{3, 4, ChunkKind::silence, Role::unassigned};

  auto all = make_span_filter(RoleFilter::both, true);
  CHECK(all(speech_part));
  CHECK(all(speech_int));
  CHECK(all(sil_part));
  CHECK(all(sil_none));

  auto no_sil = make_span_filter(RoleFilter::both, false);
  CHECK(no_sil(speech_part));
  CHECK(!no_sil(sil_part));

  auto part_only = make_span_filter(RoleFilter::participant, true);
  CHECK(part_only(speech_part));
  CHECK(!part_only(speech_int));
  CHECK(part_only(sil_part));
  CHECK(!part_only(sil_none));
}

TEST_CASE("greedy merge walkthrough: 100 + 150 + 200 packs into 250 + 200") {
  std::vector<Span> spans = {{0, 100, ChunkKind::speech, Role::participant},
                             {100, 250, ChunkKind::speech, Role::participant},
                             {250, 450, ChunkKind::speech, Role::participant}};
  const auto segs = merge_segments(spans, 360.0, make_span_filter(RoleFilter::both, true));
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].duration() == doctest::Approx(250.0));
  CHECK(segs[0].sources.size() == 2);
  CHECK(segs[1].duration() == doctest::Approx(200.0));
  CHECK(segs[1].sources.size() == 1);
}

TEST_CASE("a single over-long span splits at the bound") {
  std::vector<Span> spans = {{0, 400, ChunkKind::speech, Role::participant}};
  const auto segs = merge_segments(spans, 360.0, make_span_filter(RoleFilter::both, true));
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].duration() == doctest::Approx(360.0));
  CHECK(segs[1].duration() == doctest::Approx(40.0));
}

TEST_CASE("the merge bound is wall-clock time, not summed span time") {
  // The silence in the middle is filtered out, but the segment still spans it.
  std::vector<Span> spans = {{0, 100, ChunkKind::speech, Role::participant},
                             {100, 200, ChunkKind::silence, Role::participant},
                             {200, 300, ChunkKind::speech, Role::participant}};
  const auto segs = merge_segments(spans, 360.0, make_span_filter(RoleFilter::both, false));
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].start == doctest::Approx(0.0));
  CHECK(segs[0].end == doctest::Approx(300.0));
  CHECK(segs[0].sources.size() == 2);  // only the speech spans are kept

  // 100 + gap + 290 exceeds the bound even though the kept audio is 390 - 100.
  std::vector<Span> wide = {{0, 100, ChunkKind::speech, Role::participant},
                            {100, 200, ChunkKind::silence, Role::participant},
                            {200, 490, ChunkKind::speech, Role::participant}};
  const auto segs2 = merge_segments(wide, 360.0, make_span_filter(RoleFilter::both, false));
  REQUIRE(segs2.size() == 2);
  CHECK(segs2[0].sources.size() == 1);
}

TEST_CASE("segments never exceed the bound on random inputs") {
  std::vector<Span> spans;
  double t = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double dur = 1.0 + (i * 37 % 113);
    spans.push_back({t, t + dur,
                     i % 3 == 0 ? ChunkKind::silence : ChunkKind::speech,
                     i % 2 == 0 ? Role::participant : Role::interviewer});
    t += dur;
  }
  for (double cap : {30.0, 120.0, 360.0}) {
    for (const auto& seg :
         merge_segments(spans, cap, make_span_filter(RoleFilter::both, true))) {
      CHECK(seg.duration() <= cap + 1e-9);
      CHECK(!seg.sources.empty());
    }
  }
}

TEST_CASE("segment metadata reflects its sources") {
  std::vector<Span> spans = {{0, 10, ChunkKind::silence, Role::participant},
                             {10, 20, ChunkKind::speech, Role::interviewer}};
  const auto segs = merge_segments(spans, 360.0, make_span_filter(RoleFilter::both, true));
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].kind() == ChunkKind::speech);  // speech wins if any source has it
  const auto roles = segs[0].roles_included();
  REQUIRE(roles.size() == 2);

  const auto sil_only = merge_segments({{0, 5, ChunkKind::silence, Role::unassigned}}, 360.0,
                                       make_span_filter(RoleFilter::both, true));
  REQUIRE(sil_only.size() == 1);
  CHECK(sil_only[0].kind() == ChunkKind::silence);
}

TEST_CASE("splicing concatenates exactly the source sample ranges") {
  Waveform w;
  w.sample_rate = 1000;
  w.samples.resize(4000);
  for (size_t i = 0; i < w.samples.size(); ++i) w.samples[i] = static_cast<double>(i);

  Segment seg;
  seg.sources = {{0.5, 1.0, ChunkKind::speech, Role::participant},
                 {1.5, 2.0, ChunkKind::speech, Role::participant}};
  seg.start = 0.5;
  seg.end = 2.0;
  const Waveform out = splice_segment(w, seg);
  REQUIRE(out.samples.size() == 1000);
  CHECK(out.samples.front() == doctest::Approx(500.0));
  CHECK(out.samples[499] == doctest::Approx(999.0));
  CHECK(out.samples[500] == doctest::Approx(1500.0));
  CHECK(out.samples.back() == doctest::Approx(1999.0));
}

TEST_CASE("role filter names parse and print") {
  CHECK(parse_role_filter("both") == RoleFilter::both);
  CHECK(parse_role_filter("participant") == RoleFilter::participant);
  CHECK(parse_role_filter("interviewer") == RoleFilter::interviewer);
  CHECK_THROWS(parse_role_filter("speaker"));
  CHECK(to_string(RoleFilter::participant) == "participant");
  CHECK(to_string(parse_role_filter(to_string(RoleFilter::interviewer))) == "interviewer");
}

TEST_CASE("spans_from_chunks and spans_from_turns carry fields over") {
  const auto cs = spans_from_chunks({{0.0, 1.5, ChunkKind::speech}});
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].kind == ChunkKind::speech);
  CHECK(cs[0].role == Role::unassigned);

  auto turns = assign_roles({turn("a", 0.0, 1.0), turn("b", 1.2, 2.0)});
  const auto ts = spans_from_turns(turns);
  REQUIRE(ts.size() == 2);
  CHECK(ts[0].role == Role::interviewer);
  CHECK(ts[0].kind == ChunkKind::speech);
  CHECK(ts[1].role == Role::participant);
}
