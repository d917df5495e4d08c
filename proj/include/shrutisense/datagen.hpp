#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "shrutisense/raga.hpp"
#include "shrutisense/rng.hpp"
#include "shrutisense/scale.hpp"

namespace shruti {

struct CorruptionConfig {
  double substitution_rate = 0.0;   // chance a note is replaced outright
  double noise_cents = 0.0;         // uniform half-width applied to every note
  double westernize_fraction = 0.0; // of substitutions: snap to the 12-TET grid
                                    // instead of a random full-scale Shruti
  std::uint64_t seed = 0;
};

enum class MissingPattern { Random, Clustered, Structured };

struct MissingConfig {
  double missing_rate = 0.0;
  MissingPattern pattern = MissingPattern::Random;
  std::uint64_t seed = 0;
};

inline const char* missing_pattern_name(MissingPattern p) {
  switch (p) {
    case MissingPattern::Random: return "random";
    case MissingPattern::Clustered: return "clustered";
    case MissingPattern::Structured: return "structured";
  }
  return "?";
}

namespace detail {

// Variant groups: runs of active Shrutis a single scale step (22 cents)
// apart belong to the same swara.
inline std::vector<int> swara_group(const RagaSpec& raga, const ShrutiScale& scale) {
  std::vector<int> group(raga.active_count(), 0);
  int g = 0;
  for (int r = 1; r < raga.active_count(); ++r) {
    const double gap = scale.cent(raga.active_at_rank(r)) -
                       scale.cent(raga.active_at_rank(r - 1));
    if (gap > min_interval(scale) + 1e-9) ++g;
    group[r] = g;
  }
  return group;
}

}  // namespace detail

// One weighted step on the raga graph in the given direction. Returns the
// next shruti id; throws if the row is empty.
inline int sample_next(const RagaSpec& raga, int current, Direction dir, Rng& rng) {
  std::vector<int> succ;
  std::vector<double> weight;
  double total = 0.0;
  for (int id : raga.active()) {
    const double w = transition_weight(raga, current, id, dir);
    if (w > 0.0) {
      succ.push_back(id);
      weight.push_back(w);
      total += w;
    }
  }
  if (succ.empty())
    throw std::invalid_argument("sample_next: no outgoing edges from state");
  double u = rng.uniform() * total;
  for (size_t i = 0; i < succ.size(); ++i) {
    u -= weight[i];
    if (u <= 0.0) return succ[i];
  }
  return succ.back();
}

namespace detail {

// Walk step that keeps the melodic line moving with the phrase direction.
// Direction rows contain mirrored turnaround edges (needed so decoded paths
// stay legal); sampling them mid-phrase would stall the walk into two-note
// oscillation, so they are skipped while consistent successors exist.
inline int sample_step(const RagaSpec& raga, int current, Direction dir, Rng& rng,
                       const ShrutiScale& scale) {
  std::vector<int> succ;
  std::vector<double> weight;
  double total = 0.0;
  for (int id : raga.active()) {
    const double w = transition_weight(raga, current, id, dir);
    if (w > 0.0 && move_direction(scale, current, id) == dir) {
      succ.push_back(id);
      weight.push_back(w);
      total += w;
    }
  }
  if (succ.empty()) return sample_next(raga, current, dir, rng);
  double u = rng.uniform() * total;
  for (size_t i = 0; i < succ.size(); ++i) {
    u -= weight[i];
    if (u <= 0.0) return succ[i];
  }
  return succ.back();
}

}  // namespace detail

// Ground-truth generator: a weighted random walk on the raga graph that
// reverses at the range extremes, with a 20% chance per step of splicing a
// full pakad motif when it is legal at that point. Output is always
// grammar-compliant.
inline std::vector<int> generate_sequence(const RagaSpec& raga, int length,
                                          std::uint64_t seed,
                                          const ShrutiScale& scale = default_scale()) {
  if (length < 2) throw std::invalid_argument("generate_sequence: length must be >= 2");
  Rng rng(seed);
  const std::vector<int> group = detail::swara_group(raga, scale);
  const int top_group = group.back();

  std::vector<int> seq;
  seq.reserve(length);
  int current = raga.active_at_rank(rng.index(raga.active_count()));
  Direction dir = Direction::Ascending;
  seq.push_back(current);

  while ((int)seq.size() < length) {
    // Turn around at the extremes of the active range.
    const int g = group[raga.rank(current)];
    if (dir == Direction::Ascending && g == top_group) dir = Direction::Descending;
    else if (dir == Direction::Descending && g == 0) dir = Direction::Ascending;

    bool spliced = false;
    if (!raga.pakad().empty() && rng.bernoulli(0.2)) {
      const auto& motif = raga.pakad()[rng.index((int)raga.pakad().size())];
      const int room = length - (int)seq.size();
      if ((int)motif.size() <= room &&
          allowed(raga, current, motif.front(),
                  move_direction(scale, current, motif.front()))) {
        for (int id : motif) seq.push_back(id);
        current = motif.back();
        dir = move_direction(scale, motif[motif.size() - 2], motif.back());
        spliced = true;
      }
    }
    if (!spliced) {
      current = detail::sample_step(raga, current, dir, rng, scale);
      seq.push_back(current);
    }
  }
  return seq;
}

// Controlled corruption: optional substitution of each note (uniform draw
// over the full 22-entry scale, or a snap to the nearest 100-cent 12-TET
// value), then uniform pitch noise on every note. Output is cents.
inline PitchSequence corrupt(const std::vector<int>& seq, const CorruptionConfig& cfg,
                             const ShrutiScale& scale = default_scale()) {
  if (cfg.substitution_rate < 0.0 || cfg.substitution_rate > 1.0 ||
      cfg.noise_cents < 0.0 || cfg.westernize_fraction < 0.0 ||
      cfg.westernize_fraction > 1.0)
    throw ConfigError("corrupt: rates out of range");
  Rng rng(cfg.seed);
  PitchSequence out;
  out.items.reserve(seq.size());
  for (int id : seq) {
    double cents = scale.cent(id);
    if (cfg.substitution_rate > 0.0 && rng.bernoulli(cfg.substitution_rate)) {
      if (cfg.westernize_fraction > 0.0 && rng.bernoulli(cfg.westernize_fraction))
        cents = fold_to_octave(std::round(cents / 100.0) * 100.0);
      else
        cents = scale.cent(rng.index(scale.size()));
    }
    if (cfg.noise_cents > 0.0)
      cents += rng.uniform(-cfg.noise_cents, cfg.noise_cents);
    out.items.push_back(fold_to_octave(cents));
  }
  return out;
}

// Blank positions per the configured pattern; observed positions carry the
// exact scale cents of the input.
inline PitchSequence apply_missing(const std::vector<int>& seq, const MissingConfig& cfg,
                                   const ShrutiScale& scale = default_scale()) {
  if (cfg.missing_rate < 0.0 || cfg.missing_rate > 1.0)
    throw ConfigError("apply_missing: missing_rate out of range");
  const int len = (int)seq.size();
  std::vector<bool> missing(len, false);
  if (cfg.missing_rate > 0.0) {
    Rng rng(cfg.seed);
    switch (cfg.pattern) {
      case MissingPattern::Random:
        for (int t = 0; t < len; ++t) missing[t] = rng.bernoulli(cfg.missing_rate);
        break;
      case MissingPattern::Clustered: {
        const int gap = (int)std::lround(cfg.missing_rate * len);
        if (gap >= len) throw ConfigError("apply_missing: gap would blank the sequence");
        const int offset = rng.index(len - gap + 1);
        for (int t = offset; t < offset + gap; ++t) missing[t] = true;
        break;
      }
      case MissingPattern::Structured: {
        const int k = (int)std::lround(1.0 / cfg.missing_rate);
        if (k <= 1) throw ConfigError("apply_missing: rate too high for structured pattern");
        for (int t = 0; t < len; t += k) missing[t] = true;
        break;
      }
    }
  }
  PitchSequence out;
  out.items.reserve(seq.size());
  for (int t = 0; t < len; ++t) {
    if (missing[t]) out.items.push_back(std::nullopt);
    else out.items.push_back(scale.cent(seq[t]));
  }
  if (out.observed_count() == 0)
    throw ConfigError("apply_missing: configuration blanked the whole sequence");
  return out;
}

}  // namespace shruti
