#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "lowra/error.hpp"
#include "lowra/manifest.hpp"
#include "testutil.hpp"

using lowra::Error;
using lowra::ErrorCode;
using lowra::load_manifest;
using lowra::Manifest;
using lowra::save_manifest;
using lowra::split_manifest;
using testutil::TempDir;

namespace {

lowra::ErrorCode load_error(const std::filesystem::path& p) {
  try {
    load_manifest(p);
  } catch (const Error& e) {
    return e.code();
  }
  throw std::runtime_error("no error raised");
}

Manifest numbered_manifest(std::size_t n) {
  Manifest m;
  for (std::size_t i = 0; i < n; ++i) {
    lowra::Utterance u;
    u.id = "u" + std::to_string(i);
    u.audio_path = u.id + ".wav";
    u.transcript = {"p1"};
    m.utterances.push_back(u);
  }
  m.inventory = {"p1"};
  return m;
}

}  // namespace

TEST_CASE("loads utterances and builds a sorted inventory") {
  TempDir d;
  const auto p = d / "m.tsv";
  testutil::write_text(p, "u1\ta.wav\tp1 p2\nu2\tb.wav\tp2 p3\n");
  const auto m = load_manifest(p);
  REQUIRE(m.utterances.size() == 2);
  REQUIRE(m.utterances[0].id == "u1");
  REQUIRE(m.utterances[1].transcript ==
          std::vector<std::string>{"p2", "p3"});
  REQUIRE(m.inventory == std::vector<std::string>{"p1", "p2", "p3"});
  REQUIRE(m.root_dir == d.path);
  REQUIRE(m.resolve(m.utterances[0]) == d.path / "a.wav");
}

TEST_CASE("malformed lines are rejected") {
  TempDir d;
  const auto p = d / "m.tsv";

  testutil::write_text(p, "u1\ta.wav\n");
  REQUIRE(load_error(p) == ErrorCode::ParseError);

  testutil::write_text(p, "u1\ta.wav\tp1\nu1\tb.wav\tp2\n");
  REQUIRE(load_error(p) == ErrorCode::DuplicateId);

  testutil::write_text(p, "u1\ta.wav\t \n");
  REQUIRE(load_error(p) == ErrorCode::EmptyTranscript);

  testutil::write_text(p, "u1\ta.wav\tp1 <blank> p2\n");
  REQUIRE(load_error(p) == ErrorCode::ParseError);
}

TEST_CASE("save then load round-trips") {
  TempDir d;
  const auto p = d / "m.tsv";
  testutil::write_text(p, "u1\ta.wav\tp1 p2\nu2\tb.wav\tp3\n");
  const auto m = load_manifest(p);
  const auto q = d / "copy.tsv";
  save_manifest(m, q);
  const auto m2 = load_manifest(q);
  REQUIRE(m2.utterances.size() == m.utterances.size());
  for (std::size_t i = 0; i < m.utterances.size(); ++i) {
    REQUIRE(m2.utterances[i].id == m.utterances[i].id);
    REQUIRE(m2.utterances[i].audio_path == m.utterances[i].audio_path);
    REQUIRE(m2.utterances[i].transcript == m.utterances[i].transcript);
  }
  REQUIRE(m2.inventory == m.inventory);
}

TEST_CASE("split sizes follow floor rounding") {
  const auto m = numbered_manifest(10);
  const auto parts = split_manifest(m, 0.5, 0.2, 1);
  REQUIRE(parts[0].utterances.size() == 5);
  REQUIRE(parts[1].utterances.size() == 2);
  REQUIRE(parts[2].utterances.size() == 3);
}

TEST_CASE("split partitions the utterance set for any seed") {
  const auto m = numbered_manifest(23);
  for (std::uint64_t seed : {0ULL, 1ULL, 7ULL, 99ULL, 12345ULL}) {
    const auto parts = split_manifest(m, 0.6, 0.2, seed);
    std::multiset<std::string> all;
    for (const auto& p : parts)
      for (const auto& u : p.utterances) all.insert(u.id);
    REQUIRE(all.size() == 23);
    std::multiset<std::string> orig;
    for (const auto& u : m.utterances) orig.insert(u.id);
    REQUIRE(all == orig);
  }
}

TEST_CASE("split is deterministic in the seed") {
  const auto m = numbered_manifest(17);
  const auto a = split_manifest(m, 0.5, 0.25, 42);
  const auto b = split_manifest(m, 0.5, 0.25, 42);
  for (int i = 0; i < 3; ++i) {
    REQUIRE(a[i].utterances.size() == b[i].utterances.size());
    for (std::size_t j = 0; j < a[i].utterances.size(); ++j)
      REQUIRE(a[i].utterances[j].id == b[i].utterances[j].id);
  }
}

TEST_CASE("empty parts raise EmptySplit") {
  const auto m = numbered_manifest(2);
  try {
    split_manifest(m, 0.5, 0.4, 3);
    FAIL("expected EmptySplit");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::EmptySplit);
  }
}

TEST_CASE("split parts inherit the parent inventory") {
  TempDir d;
  const auto p = d / "m.tsv";
  testutil::write_text(p,
                       "u1\ta.wav\tp1\nu2\tb.wav\tp2\nu3\tc.wav\tp3\n"
                       "u4\td.wav\tp1\nu5\te.wav\tp1\n");
  const auto m = load_manifest(p);
  const auto parts = split_manifest(m, 0.4, 0.2, 5);
  for (const auto& part : parts) REQUIRE(part.inventory == m.inventory);
}
