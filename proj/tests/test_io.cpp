#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>

#include <shrutisense/seqfile.hpp>
#include <shrutisense/wav.hpp>

using namespace shruti;

namespace {

std::uint32_t u32_at(const std::string& s, size_t off) {
  return (std::uint32_t)(unsigned char)s[off] |
         ((std::uint32_t)(unsigned char)s[off + 1] << 8) |
         ((std::uint32_t)(unsigned char)s[off + 2] << 16) |
         ((std::uint32_t)(unsigned char)s[off + 3] << 24);
}

std::uint16_t u16_at(const std::string& s, size_t off) {
  return (std::uint16_t)((unsigned char)s[off] | ((unsigned char)s[off + 1] << 8));
}

}  // namespace

TEST_CASE("sequence file round-trip is byte-stable") {
  SequenceFile f;
  f.tonic_hz = 261.63;
  f.raga_hint = "yaman";
  f.sequence.items = {0.0, 204.0, std::nullopt, 386.5, 1110.0};
  std::ostringstream first;
  write_sequence(first, f);
  std::istringstream back(first.str());
  const SequenceFile g = read_sequence(back);
  CHECK(g.tonic_hz == doctest::Approx(261.63));
  CHECK(g.raga_hint == "yaman");
  REQUIRE(g.sequence.size() == 5);
  CHECK_FALSE(g.sequence.items[2].has_value());
  CHECK(*g.sequence.items[3] == doctest::Approx(386.5));
  std::ostringstream second;
  write_sequence(second, g);
  CHECK(first.str() == second.str());
}

TEST_CASE("a440 reference rebases observations onto the tonic") {
  // A pitch written as 0 cents against A4=440 sits -offset cents above a
  // 261.63 Hz tonic, where offset = -1200*log2(tonic/440).
  std::istringstream in(
      "shruti-seq 1\ntonic_hz 261.63\nreference a440\n\n0\n1200\n");
  const SequenceFile f = read_sequence(in);
  const double offset = -1200.0 * std::log2(261.63 / 440.0);
  CHECK(*f.sequence.items[0] == doctest::Approx(-offset));
  CHECK(*f.sequence.items[1] == doctest::Approx(1200.0 - offset));
  // explicit tonic reference is a no-op
  std::istringstream tn("shruti-seq 1\nreference tonic\n\n204\n");
  CHECK(*read_sequence(tn).sequence.items[0] == doctest::Approx(204.0));
}

TEST_CASE("sequence file rejects malformed input") {
  auto fails = [](const std::string& text) {
    std::istringstream in(text);
    CHECK_THROWS_AS(read_sequence(in), ConfigError);
  };
  fails("");                                        // empty
  fails("not-a-header\n\n0\n");                     // bad magic
  fails("shruti-seq 2\n\n0\n");                     // unsupported version
  fails("shruti-seq 1\ntonic_hz -5\n\n0\n");        // bad tonic
  fails("shruti-seq 1\nbogus_key 1\n\n0\n");        // unknown header key
  fails("shruti-seq 1\nreference b441\n\n0\n");     // unknown reference
  fails("shruti-seq 1\n\nabc\n");                   // bad observation
  fails("shruti-seq 1\n\n12x\n");                   // trailing garbage
  fails("shruti-seq 1\n\n");                        // no observations
  fails("shruti-seq 1\ntonic_hz 261.63\n");         // header only
}

TEST_CASE("MISSING token and whitespace tolerance") {
  std::istringstream in("shruti-seq 1\n\n  204  \nMISSING\n\t90\r\n");
  const SequenceFile f = read_sequence(in);
  REQUIRE(f.sequence.size() == 3);
  CHECK(*f.sequence.items[0] == doctest::Approx(204.0));
  CHECK_FALSE(f.sequence.items[1].has_value());
  CHECK(*f.sequence.items[2] == doctest::Approx(90.0));
}

TEST_CASE("read_sequence_file reports missing paths") {
  CHECK_THROWS_AS(read_sequence_file("/nonexistent/path/seq.txt"), ConfigError);
}

TEST_CASE("wav header layout") {
  std::vector<std::int16_t> samples(1000, 0);  // 500 stereo frames
  std::ostringstream out(std::ios::binary);
  write_wav(out, samples);
  const std::string b = out.str();
  REQUIRE(b.size() == 44 + 2000);
  CHECK(b.substr(0, 4) == "RIFF");
  CHECK(u32_at(b, 4) == 36 + 2000);
  CHECK(b.substr(8, 4) == "WAVE");
  CHECK(b.substr(12, 4) == "fmt ");
  CHECK(u32_at(b, 16) == 16);       // fmt chunk size
  CHECK(u16_at(b, 20) == 1);        // PCM
  CHECK(u16_at(b, 22) == 2);        // stereo
  CHECK(u32_at(b, 24) == 44100);    // sample rate
  CHECK(u32_at(b, 28) == 44100 * 4);  // byte rate
  CHECK(u16_at(b, 32) == 4);        // block align
  CHECK(u16_at(b, 34) == 16);       // bits per sample
  CHECK(b.substr(36, 4) == "data");
  CHECK(u32_at(b, 40) == 2000);
}

TEST_CASE("wav payload is little-endian int16") {
  std::ostringstream out(std::ios::binary);
  write_wav(out, {0x1234, -2});
  const std::string b = out.str();
  CHECK((unsigned char)b[44] == 0x34);
  CHECK((unsigned char)b[45] == 0x12);
  CHECK((unsigned char)b[46] == 0xfe);
  CHECK((unsigned char)b[47] == 0xff);
}

TEST_CASE("synthesize_notes frame counts and amplitude") {
  SynthParams p;
  const auto samples = synthesize_notes({0.0, 702.0}, 261.63, p);
  CHECK(samples.size() == 2u * 22050u * 2u);  // notes x frames x channels
  // stereo interleave duplicates each frame
  for (size_t i = 0; i + 1 < 200; i += 2) CHECK(samples[i] == samples[i + 1]);
  std::int16_t peak = 0;
  for (std::int16_t s : samples) peak = std::max(peak, (std::int16_t)std::abs((int)s));
  CHECK(peak <= (std::int16_t)std::lround(0.8 * 32767.0));
  CHECK(peak >= (std::int16_t)std::lround(0.75 * 32767.0));
  CHECK_THROWS_AS(synthesize_notes({}, 261.63), ConfigError);
}

TEST_CASE("fades ramp the note edges") {
  SynthParams p;  // 5 ms fade = 220 frames (rounded)
  const auto samples = synthesize_notes({702.0}, 261.63, p);
  const int fade_frames = (int)std::lround(p.fade_seconds * p.sample_rate);
  // first frame silent, envelope below full scale across the ramp
  CHECK(samples[0] == 0);
  const double amp = 0.8 * 32767.0;
  for (int k = 0; k < fade_frames; ++k) {
    const double env = (double)k / fade_frames;
    CHECK(std::abs((int)samples[(size_t)k * 2]) <= (int)std::ceil(amp * env) + 1);
  }
  // last frame fades back out to zero
  CHECK(samples[samples.size() - 2] == 0);

  SynthParams nofade = p;
  nofade.fade_seconds = 0.0;
  const auto raw = synthesize_notes({702.0}, 261.63, nofade);
  CHECK(raw[0] == 0);  // sin(0), not the envelope
  // second frame already at full sine amplitude (no ramp)
  const double w = 2.0 * M_PI * cents_to_hz(261.63, 702.0) / 44100.0;
  CHECK(raw[2] == (std::int16_t)std::lround(amp * std::sin(w)));
}

TEST_CASE("write_wav_file rejects unwritable paths") {
  CHECK_THROWS_AS(write_wav_file("/nonexistent/dir/x.wav", {0, 0}), ConfigError);
}
