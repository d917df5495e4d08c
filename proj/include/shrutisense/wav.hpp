#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "shrutisense/errors.hpp"
#include "shrutisense/scale.hpp"

namespace shruti {

struct SynthParams {
  int sample_rate = 44100;
  double note_seconds = 0.5;
  double amplitude = 0.8;      // of int16 full scale
  double fade_seconds = 0.005; // linear fade in/out per note; 0 disables
};

// Renders each cent value as a fixed-length stereo sine note and
// concatenates them. Returns interleaved L/R samples.
inline std::vector<std::int16_t> synthesize_notes(const std::vector<double>& cents,
                                                  double tonic_hz,
                                                  const SynthParams& p = {}) {
  if (cents.empty()) throw ConfigError("synthesize_notes: no notes");
  const int frames_per_note = (int)std::lround(p.note_seconds * p.sample_rate);
  const int fade_frames = (int)std::lround(p.fade_seconds * p.sample_rate);
  std::vector<std::int16_t> samples;
  samples.reserve(cents.size() * frames_per_note * 2);
  for (double c : cents) {
    const double freq = cents_to_hz(tonic_hz, c);
    const double w = 2.0 * std::numbers::pi * freq / p.sample_rate;
    for (int k = 0; k < frames_per_note; ++k) {
      double env = 1.0;
      if (fade_frames > 0) {
        if (k < fade_frames) env = (double)k / fade_frames;
        const int from_end = frames_per_note - 1 - k;
        if (from_end < fade_frames) env = std::min(env, (double)from_end / fade_frames);
      }
      const double v = p.amplitude * env * std::sin(w * k);
      const auto s = (std::int16_t)std::lround(v * 32767.0);
      samples.push_back(s);  // L
      samples.push_back(s);  // R
    }
  }
  return samples;
}

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4] = {(char)(v & 0xff), (char)((v >> 8) & 0xff), (char)((v >> 16) & 0xff),
               (char)((v >> 24) & 0xff)};
  out.write(b, 4);
}

inline void put_u16(std::ostream& out, std::uint16_t v) {
  char b[2] = {(char)(v & 0xff), (char)((v >> 8) & 0xff)};
  out.write(b, 2);
}

}  // namespace detail

// Canonical 44-byte RIFF/WAVE header + PCM16 payload, little-endian.
inline void write_wav(std::ostream& out, const std::vector<std::int16_t>& interleaved,
                      int sample_rate = 44100, int channels = 2) {
  const std::uint32_t data_bytes = (std::uint32_t)(interleaved.size() * 2);
  const std::uint16_t block_align = (std::uint16_t)(channels * 2);
  out.write("RIFF", 4);
  detail::put_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);  // PCM
  detail::put_u16(out, (std::uint16_t)channels);
  detail::put_u32(out, (std::uint32_t)sample_rate);
  detail::put_u32(out, (std::uint32_t)(sample_rate * block_align));
  detail::put_u16(out, block_align);
  detail::put_u16(out, 16);  // bits per sample
  out.write("data", 4);
  detail::put_u32(out, data_bytes);
  for (std::int16_t s : interleaved) detail::put_u16(out, (std::uint16_t)s);
}

inline void write_wav_file(const std::string& path, const std::vector<std::int16_t>& interleaved,
                           int sample_rate = 44100, int channels = 2) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("wav: cannot write " + path);
  write_wav(out, interleaved, sample_rate, channels);
}

}  // namespace shruti
