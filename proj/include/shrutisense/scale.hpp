#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "shrutisense/errors.hpp"

namespace shruti {

inline constexpr int kShrutiCount = 22;
inline constexpr double kOctaveCents = 1200.0;

// The 22-Shruti octave: ordered cent positions plus the tonic reference used
// for absolute frequency conversion. Immutable after construction.
class ShrutiScale {
public:
  ShrutiScale(std::vector<double> cents, double tonic_hz)
      : cents_(std::move(cents)), tonic_hz_(tonic_hz) {
    if (cents_.empty()) throw ConfigError("scale: empty cent table");
    if (cents_.front() != 0.0) throw ConfigError("scale: first entry must be 0");
    for (std::size_t i = 1; i < cents_.size(); ++i) {
      if (!(cents_[i] > cents_[i - 1]))
        throw ConfigError("scale: cent values must be strictly increasing");
    }
    if (cents_.back() >= kOctaveCents)
      throw ConfigError("scale: cent values must lie in [0, 1200)");
    if (!(tonic_hz_ > 0.0)) throw ConfigError("scale: tonic_hz must be positive");
  }

  const std::vector<double>& cents() const { return cents_; }
  double cent(int i) const { return cents_.at(static_cast<std::size_t>(i)); }
  int size() const { return static_cast<int>(cents_.size()); }
  double tonic_hz() const { return tonic_hz_; }

private:
  std::vector<double> cents_;
  double tonic_hz_;
};

inline const std::vector<double>& default_cents() {
  static const std::vector<double> table = {
      0,   90,  112, 182, 204, 294, 316, 386, 408, 498, 520,
      590, 612, 702, 792, 814, 884, 906, 996, 1018, 1088, 1110};
  return table;
}

// Default 22-entry table with C4 as tonic; build a ShrutiScale from
// default_cents() to use another tonic.
inline const ShrutiScale& default_scale() {
  static const ShrutiScale scale(default_cents(), 261.63);
  return scale;
}

// Index into a 22-Shruti table.
struct ShrutiId {
  int index = 0;
  friend bool operator==(ShrutiId a, ShrutiId b) { return a.index == b.index; }
};

// An observed pitch in cents relative to the tonic, or a gap.
using Observation = std::optional<double>;

struct PitchSequence {
  std::vector<Observation> items;

  std::size_t size() const { return items.size(); }
  bool has_missing() const {
    return std::any_of(items.begin(), items.end(),
                       [](const Observation& o) { return !o.has_value(); });
  }
  std::size_t observed_count() const {
    std::size_t n = 0;
    for (const auto& o : items) n += o.has_value() ? 1 : 0;
    return n;
  }
};

inline void require_finite(double cents, const char* what) {
  if (!std::isfinite(cents))
    throw std::invalid_argument(std::string(what) + ": non-finite cent value");
}

// cents mod 1200 normalized into [0, 1200).
inline double fold_to_octave(double cents) {
  require_finite(cents, "fold_to_octave");
  double r = std::fmod(cents, kOctaveCents);
  if (r < 0.0) r += kOctaveCents;
  // fmod can return 1200.0 - epsilon rounding back up; clamp the exact octave.
  if (r >= kOctaveCents) r = 0.0;
  return r;
}

// Shortest signed distance a - b on the octave circle, in (-600, 600].
inline double circular_delta(double a_cents, double b_cents) {
  double d = fold_to_octave(a_cents - b_cents);
  if (d > kOctaveCents / 2.0) d -= kOctaveCents;
  return d;
}

inline double circular_distance(double a_cents, double b_cents) {
  return std::abs(circular_delta(a_cents, b_cents));
}

// Nearest scale entry under octave-wrapped distance. Ties resolve to the
// lower index. Returned deviation is signed: input minus shruti.
inline std::pair<ShrutiId, double> nearest_shruti(const ShrutiScale& scale,
                                                  double cents) {
  require_finite(cents, "nearest_shruti");
  const double folded = fold_to_octave(cents);
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < scale.size(); ++i) {
    double d = circular_distance(folded, scale.cent(i));
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return {ShrutiId{best}, circular_delta(folded, scale.cent(best))};
}

// Minimum pairwise gap between distinct entries (22 for the default table).
inline double min_interval(const ShrutiScale& scale) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 1; i < scale.size(); ++i)
    m = std::min(m, scale.cent(i) - scale.cent(i - 1));
  return m;
}

inline double cents_to_hz(const ShrutiScale& scale, double cents) {
  require_finite(cents, "cents_to_hz");
  return scale.tonic_hz() * std::exp2(cents / kOctaveCents);
}

inline double cents_to_hz(double tonic_hz, double cents) {
  require_finite(cents, "cents_to_hz");
  return tonic_hz * std::exp2(cents / kOctaveCents);
}

}  // namespace shruti
