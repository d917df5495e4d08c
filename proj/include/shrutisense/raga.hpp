#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "shrutisense/errors.hpp"
#include "shrutisense/scale.hpp"

namespace shruti {

enum class Direction { Ascending, Descending };

// A raga grammar: the active Shrutis, direction-specific transition edge
// sets, pakad motifs, and the weighting knobs of the transition model.
// Immutable after load; all queries are pure.
class RagaSpec {
public:
  RagaSpec(std::string name, std::vector<int> active,
           std::set<std::pair<int, int>> ascent_edges,
           std::set<std::pair<int, int>> descent_edges,
           std::vector<std::vector<int>> pakad, int vadi, int samvadi,
           double alpha = 0.1, double pakad_bonus_factor = 1.5)
      : name_(std::move(name)),
        active_(std::move(active)),
        ascent_(std::move(ascent_edges)),
        descent_(std::move(descent_edges)),
        pakad_(std::move(pakad)),
        vadi_(vadi),
        samvadi_(samvadi),
        alpha_(alpha),
        pakad_bonus_(pakad_bonus_factor) {
    std::sort(active_.begin(), active_.end());
    rank_.fill(-1);
    for (int r = 0; r < static_cast<int>(active_.size()); ++r) {
      int id = active_[static_cast<std::size_t>(r)];
      if (id < 0 || id >= kShrutiCount)
        throw ConfigError(name_ + ": shruti index " + std::to_string(id) +
                          " out of range");
      if (rank_[static_cast<std::size_t>(id)] != -1)
        throw ConfigError(name_ + ": duplicate active shruti " + std::to_string(id));
      rank_[static_cast<std::size_t>(id)] = r;
    }
    for (const auto& motif : pakad_)
      for (std::size_t i = 1; i < motif.size(); ++i)
        bigrams_.insert({motif[i - 1], motif[i]});
  }

  const std::string& name() const { return name_; }
  const std::vector<int>& active() const { return active_; }
  int active_count() const { return static_cast<int>(active_.size()); }
  const std::set<std::pair<int, int>>& ascent_edges() const { return ascent_; }
  const std::set<std::pair<int, int>>& descent_edges() const { return descent_; }
  const std::vector<std::vector<int>>& pakad() const { return pakad_; }
  int vadi() const { return vadi_; }
  int samvadi() const { return samvadi_; }
  double alpha() const { return alpha_; }
  double pakad_bonus_factor() const { return pakad_bonus_; }

  bool is_active(int id) const {
    return id >= 0 && id < kShrutiCount && rank_[static_cast<std::size_t>(id)] >= 0;
  }
  // Position of a shruti within the sorted active set.
  int rank(int id) const {
    if (!is_active(id))
      throw std::invalid_argument(name_ + ": shruti " + std::to_string(id) +
                                  " not in active set");
    return rank_[static_cast<std::size_t>(id)];
  }
  int active_at_rank(int r) const { return active_.at(static_cast<std::size_t>(r)); }

  bool is_pakad_bigram(int from, int to) const {
    return bigrams_.count({from, to}) > 0;
  }

private:
  std::string name_;
  std::vector<int> active_;
  std::set<std::pair<int, int>> ascent_;
  std::set<std::pair<int, int>> descent_;
  std::vector<std::vector<int>> pakad_;
  int vadi_;
  int samvadi_;
  double alpha_;
  double pakad_bonus_;
  std::array<int, kShrutiCount> rank_{};
  std::set<std::pair<int, int>> bigrams_;
};

inline bool allowed(const RagaSpec& raga, int from, int to, Direction dir) {
  if (!raga.is_active(from) || !raga.is_active(to))
    throw std::invalid_argument(raga.name() + ": transition endpoint outside active set");
  const auto& edges =
      dir == Direction::Ascending ? raga.ascent_edges() : raga.descent_edges();
  return edges.count({from, to}) > 0;
}

// Eq-style edge weight: 0 when forbidden, otherwise exp(-alpha * d) times the
// pakad bonus, with d the rank distance within the active set.
inline double transition_weight(const RagaSpec& raga, int from, int to,
                                Direction dir) {
  if (!allowed(raga, from, to, dir)) return 0.0;
  int d = std::abs(raga.rank(from) - raga.rank(to));
  double w = std::exp(-raga.alpha() * static_cast<double>(d));
  if (raga.is_pakad_bigram(from, to)) w *= raga.pakad_bonus_factor();
  return w;
}

// Direction of a move between two scale positions; equal pitch counts as
// ascending (matches infer_direction's tie rule).
inline Direction move_direction(const ShrutiScale& scale, int from, int to) {
  return scale.cent(to) >= scale.cent(from) ? Direction::Ascending
                                            : Direction::Descending;
}

// Fraction of consecutive transitions permitted by the grammar under the
// direction implied by the moves themselves. Out-of-raga notes count as
// violations. Sequences shorter than 2 have no transitions: 1.0.
inline double grammar_compliance(const std::vector<int>& seq, const RagaSpec& raga,
                                 const ShrutiScale& scale = default_scale()) {
  if (seq.size() < 2) return 1.0;
  int ok = 0;
  int total = static_cast<int>(seq.size()) - 1;
  for (std::size_t t = 1; t < seq.size(); ++t) {
    int a = seq[t - 1], b = seq[t];
    if (!raga.is_active(a) || !raga.is_active(b)) continue;
    if (allowed(raga, a, b, move_direction(scale, a, b))) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(total);
}

// Fraction of the raga's pakad motifs occurring verbatim as contiguous
// subsequences. A raga without motifs scores 1.0.
inline double pakad_recognition(const std::vector<int>& seq, const RagaSpec& raga) {
  if (seq.empty()) throw std::invalid_argument("pakad_recognition: empty sequence");
  if (raga.pakad().empty()) return 1.0;
  int found = 0;
  for (const auto& motif : raga.pakad()) {
    bool hit = false;
    if (motif.size() <= seq.size()) {
      for (std::size_t start = 0; start + motif.size() <= seq.size() && !hit; ++start) {
        hit = std::equal(motif.begin(), motif.end(), seq.begin() + static_cast<long>(start));
      }
    }
    if (hit) ++found;
  }
  return static_cast<double>(found) / static_cast<double>(raga.pakad().size());
}

namespace detail {

inline void validate_raga(const RagaSpec& raga, const ShrutiScale& scale) {
  const int n = raga.active_count();
  if (n < 7 || n > 10)
    throw ConfigError(raga.name() + ": active set size must be between 7 and 10");
  if (!raga.is_active(raga.vadi()) || !raga.is_active(raga.samvadi()))
    throw ConfigError(raga.name() + ": vadi/samvadi must be active");
  if (raga.vadi() == raga.samvadi())
    throw ConfigError(raga.name() + ": vadi and samvadi must differ");
  auto check_edges = [&](const std::set<std::pair<int, int>>& edges, const char* which) {
    for (const auto& [a, b] : edges)
      if (!raga.is_active(a) || !raga.is_active(b))
        throw ConfigError(raga.name() + ": " + which + " edge references inactive shruti");
  };
  check_edges(raga.ascent_edges(), "ascent");
  check_edges(raga.descent_edges(), "descent");
  // Non-degenerate: every active note has in/out edges in each direction set.
  for (int id : raga.active()) {
    for (const auto* edges : {&raga.ascent_edges(), &raga.descent_edges()}) {
      bool out = false, in = false;
      for (const auto& [a, b] : *edges) {
        out |= (a == id);
        in |= (b == id);
      }
      if (!out || !in)
        throw ConfigError(raga.name() + ": degenerate grammar, shruti " +
                          std::to_string(id) + " lacks edges in one direction");
    }
  }
  // An edge listed against its melodic direction (a turnaround) must exist in
  // the direction set its move implies, so decoded paths always pass the
  // compliance check.
  for (const auto& [a, b] : raga.ascent_edges())
    if (move_direction(scale, a, b) == Direction::Descending &&
        raga.descent_edges().count({a, b}) == 0)
      throw ConfigError(raga.name() + ": descending move in ascent set missing from descent set");
  for (const auto& [a, b] : raga.descent_edges())
    if (move_direction(scale, a, b) == Direction::Ascending &&
        raga.ascent_edges().count({a, b}) == 0)
      throw ConfigError(raga.name() + ": ascending move in descent set missing from ascent set");
  for (const auto& motif : raga.pakad()) {
    if (motif.size() < 3 || motif.size() > 6)
      throw ConfigError(raga.name() + ": pakad motif length out of range");
    for (int id : motif)
      if (!raga.is_active(id))
        throw ConfigError(raga.name() + ": pakad references inactive shruti");
    for (std::size_t i = 1; i < motif.size(); ++i)
      if (!allowed(raga, motif[i - 1], motif[i],
                   move_direction(scale, motif[i - 1], motif[i])))
        throw ConfigError(raga.name() + ": pakad motif is not a legal path");
  }
  if (!(raga.pakad_bonus_factor() > 1.0))
    throw ConfigError(raga.name() + ": pakad_bonus_factor must exceed 1");
}

}  // namespace detail

inline constexpr int kRagaSchemaVersion = 1;

// Parse a raga config (JSON text, schema_version 1) and validate it.
inline RagaSpec load_raga(std::istream& in,
                          const ShrutiScale& scale = default_scale()) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("raga config: parse failure: ") + e.what());
  }
  try {
    if (j.at("schema_version").get<int>() != kRagaSchemaVersion)
      throw ConfigError("raga config: unsupported schema_version");
    auto edges = [&](const char* key) {
      std::set<std::pair<int, int>> out;
      for (const auto& e : j.at(key)) {
        if (!e.is_array() || e.size() != 2)
          throw ConfigError("raga config: edge must be a [from, to] pair");
        out.insert({e[0].get<int>(), e[1].get<int>()});
      }
      return out;
    };
    RagaSpec raga(j.at("name").get<std::string>(),
                  j.at("active").get<std::vector<int>>(), edges("ascent_edges"),
                  edges("descent_edges"),
                  j.at("pakad").get<std::vector<std::vector<int>>>(),
                  j.at("vadi").get<int>(), j.at("samvadi").get<int>(),
                  j.value("alpha", 0.1), j.value("pakad_bonus_factor", 1.5));
    detail::validate_raga(raga, scale);
    return raga;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("raga config: ") + e.what());
  }
}

inline RagaSpec load_raga(const std::string& text,
                          const ShrutiScale& scale = default_scale()) {
  std::istringstream in(text);
  return load_raga(in, scale);
}

inline RagaSpec load_raga_file(const std::string& path,
                               const ShrutiScale& scale = default_scale()) {
  std::ifstream in(path);
  if (!in) throw ConfigError("raga config: cannot open " + path);
  return load_raga(in, scale);
}

}  // namespace shruti
