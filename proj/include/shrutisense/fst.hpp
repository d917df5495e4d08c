#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "shrutisense/raga.hpp"
#include "shrutisense/scale.hpp"

namespace shruti {

// Blend of the three cost components, higher is better.
struct CostWeights {
  double lambda_pitch = 0.6;
  double lambda_grammar = 0.3;
  double lambda_edit = 0.1;
};

enum class EditKind { Match, Insert, Delete, Substitute };

// One lattice arc of the alignment. Match/Substitute carry both an input
// position and an output state; Insert carries only a state, Delete only a
// position.
struct EditOp {
  EditKind kind = EditKind::Match;
  std::optional<int> obs_index;
  std::optional<int> state;  // shruti id
};

inline const char* edit_kind_name(EditKind k) {
  switch (k) {
    case EditKind::Match: return "MATCH";
    case EditKind::Insert: return "INSERT";
    case EditKind::Delete: return "DELETE";
    case EditKind::Substitute: return "SUBSTITUTE";
  }
  return "?";
}

// Log of the direction-normalized transition probability, sharing the HMM's
// normalization Z_i. Returns -inf when the edge is forbidden.
inline double log_transition_prob(const RagaSpec& raga, int from, int to,
                                  Direction dir) {
  const double w = transition_weight(raga, from, to, dir);
  if (w <= 0.0) return -std::numeric_limits<double>::infinity();
  double z = 0.0;
  for (int id : raga.active()) z += transition_weight(raga, from, id, dir);
  return std::log(w / z);
}

// Nearest raga-active Shruti to a cent value (octave-wrapped, lower id on ties).
inline int nearest_active_shruti(const RagaSpec& raga, double cents,
                                 const ShrutiScale& scale = default_scale()) {
  require_finite(cents, "nearest_active_shruti");
  const double folded = fold_to_octave(cents);
  int best = raga.active().front();
  double best_d = std::numeric_limits<double>::infinity();
  for (int id : raga.active()) {
    double d = circular_distance(folded, scale.cent(id));
    if (d < best_d) {
      best_d = d;
      best = id;
    }
  }
  return best;
}

// Score of a single edit arc. Grammar-forbidden arcs return -inf: they are
// pruned, never stored in a lattice. prev_state is empty at the start of the
// path, where no grammar term applies.
inline double op_cost(const EditOp& op, std::optional<double> obs_cents,
                      std::optional<int> prev_state, const RagaSpec& raga,
                      const CostWeights& weights, Direction dir,
                      const ShrutiScale& scale = default_scale()) {
  const bool needs_obs =
      op.kind == EditKind::Match || op.kind == EditKind::Substitute || op.kind == EditKind::Delete;
  const bool needs_state = op.kind != EditKind::Delete;
  if (needs_obs && (!op.obs_index.has_value() || !obs_cents.has_value()))
    throw std::invalid_argument("op_cost: operation requires an observation");
  if (needs_state != op.state.has_value())
    throw std::invalid_argument("op_cost: inconsistent state field for op kind");
  if (op.kind == EditKind::Insert && op.obs_index.has_value())
    throw std::invalid_argument("op_cost: INSERT must not carry an observation index");

  if (op.kind == EditKind::Delete) return weights.lambda_edit * -1.0;

  const int s = *op.state;
  if (!raga.is_active(s)) throw std::invalid_argument("op_cost: state outside active set");
  double grammar = 0.0;
  if (prev_state.has_value()) {
    const double lp = log_transition_prob(raga, *prev_state, s, dir);
    if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
    grammar = weights.lambda_grammar * lp;
  }
  double pitch = 0.0;
  if (op.kind != EditKind::Insert)
    pitch = weights.lambda_pitch *
            (-circular_distance(fold_to_octave(*obs_cents), scale.cent(s)) / 50.0);
  const double edit = op.kind == EditKind::Match ? 0.0 : weights.lambda_edit * -1.0;
  return pitch + grammar + edit;
}

struct FstResult {
  std::vector<int> output;  // shruti ids, same length as the input
  std::vector<EditOp> ops;
  double score = 0.0;
};

// Precompiled per-raga search tables, the FST analog of build_model: state
// centers plus a flat adjacency of grammar arcs with their weighted log-cost.
// Building this is the "lattice construction" half of the timing split; the
// search half is fst_correct over a prebuilt model.
struct FstModel {
  RagaSpec raga;
  CostWeights weights;
  std::vector<double> mu;      // state centers in cents, rank order
  std::vector<int> arc_off;    // n+1 offsets into arc_to/arc_cost
  std::vector<int> arc_to;     // successor rank
  std::vector<double> arc_cost;  // lambda_grammar * log(w / z)
  // Transposed adjacency (incoming arcs per state, sources in rank order);
  // the search sweep gathers over these.
  std::vector<int> in_off;
  std::vector<int> in_from;
  std::vector<double> in_cost;

  int states() const { return (int)mu.size(); }
};

inline FstModel build_fst(const RagaSpec& raga, const CostWeights& weights = {},
                          const ShrutiScale& scale = default_scale()) {
  const int n = raga.active_count();
  FstModel m{raga, weights, {}, {}, {}, {}};
  m.mu.reserve(n);
  for (int id : raga.active()) m.mu.push_back(scale.cent(id));
  m.arc_off.reserve(n + 1);
  // Arcs take the direction their own movement implies, normalized by that
  // direction's full row weight (the HMM's Z_i).
  for (int i = 0; i < n; ++i) {
    m.arc_off.push_back((int)m.arc_to.size());
    for (Direction dir : {Direction::Ascending, Direction::Descending}) {
      double z = 0.0;
      for (int j = 0; j < n; ++j)
        z += transition_weight(raga, raga.active_at_rank(i), raga.active_at_rank(j), dir);
      if (z <= 0.0) continue;
      for (int j = 0; j < n; ++j) {
        if (move_direction(scale, raga.active_at_rank(i), raga.active_at_rank(j)) != dir)
          continue;
        double w = transition_weight(raga, raga.active_at_rank(i), raga.active_at_rank(j), dir);
        if (w > 0.0) {
          m.arc_to.push_back(j);
          m.arc_cost.push_back(weights.lambda_grammar * std::log(w / z));
        }
      }
    }
  }
  m.arc_off.push_back((int)m.arc_to.size());
  // Transpose: incoming arcs per destination, sources in ascending rank order
  // so gather ties resolve exactly as a source-major scan would.
  m.in_off.assign(n + 1, 0);
  for (int j : m.arc_to) ++m.in_off[j + 1];
  for (int j = 0; j < n; ++j) m.in_off[j + 1] += m.in_off[j];
  m.in_from.resize(m.arc_to.size());
  m.in_cost.resize(m.arc_to.size());
  std::vector<int> fill(m.in_off.begin(), m.in_off.end() - 1);
  for (int i = 0; i < n; ++i) {
    for (int a = m.arc_off[i]; a < m.arc_off[i + 1]; ++a) {
      const int slot = fill[m.arc_to[a]]++;
      m.in_from[slot] = i;
      m.in_cost[slot] = m.arc_cost[a];
    }
  }
  return m;
}

// Best-path correction through the edit lattice. The search runs over
// (position, last output state, phase). INSERT and DELETE only occur as
// adjacent pairs — one note consumed, one state emitted with no pitch
// anchor — each followed by a MATCH/SUBSTITUTE, so indel runs never exceed 2
// consecutive ops and the output keeps one state per input note. The pairing
// matters: a lone DELETE shifts the rest of the alignment, and an unbounded
// lattice can ping-pong epsilon moves through a cheap grammar 2-cycle to
// rewrite whole passages without ever paying a pitch cost. Exact score ties
// resolve deterministically: lowest-rank predecessor, phase 0 preferred.
//
// The sweep keeps two rolling slices of (state, phase) cells. A phase-1 cell
// whose score does not beat its phase-0 sibling is skipped outright: the
// phase-0 cell reaches a superset of the same futures, so the skip is exact.
inline FstResult fst_correct(const FstModel& model, const PitchSequence& seq) {
  if (seq.items.empty()) throw std::invalid_argument("fst_correct: empty sequence");
  if (seq.has_missing())
    throw TaskError("fst_correct: sequence has MISSING observations; use completion");

  const RagaSpec& raga = model.raga;
  const int n = model.states();
  const int len = (int)seq.size();
  const double neg_inf = -std::numeric_limits<double>::infinity();
  const double indel_edit = model.weights.lambda_edit * -1.0;
  const double pair_edit = indel_edit + indel_edit;

  // Per-note emission cost: lambda1 * c_pitch plus the edit charge a
  // SUBSTITUTE carries; the nearest active rank identifies the MATCH state.
  std::vector<double> em((size_t)len * n);
  std::vector<int> nearest(len);
  const double pitch_scale = model.weights.lambda_pitch / -50.0;
  for (int t = 0; t < len; ++t) {
    const double raw = *seq.items[t];
    // Fast path for already-folded input; fold_to_octave validates the rest
    // (and rejects non-finite values).
    const double folded =
        raw >= 0.0 && raw < kOctaveCents ? raw : fold_to_octave(raw);
    int best_j = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      double d = std::abs(folded - model.mu[j]);
      if (d > 600.0) d = 1200.0 - d;  // octave-circular distance
      em[t * n + j] = pitch_scale * d + indel_edit;
      if (d < best_d) {
        best_d = d;
        best_j = j;
      }
    }
    em[t * n + best_j] -= indel_edit;  // a MATCH pays no edit cost
    nearest[t] = best_j;
  }

  // Phase 0: free. Phase 1: an indel pair just closed, MATCH/SUBSTITUTE must
  // follow. Parent encoding per (t, state, phase): state * 4 + phase * 2 + 1;
  // 0 marks the path root.
  const int slice = n * 2;
  std::vector<double> dp_prev(slice), dp_cur(slice);
  std::vector<signed char> parent((size_t)len * slice, 0);

  // First note: MATCH/SUBSTITUTE from the start node, no grammar term.
  for (int j = 0; j < n; ++j) {
    dp_prev[j * 2] = em[j];
    dp_prev[j * 2 + 1] = neg_inf;
  }

  // Per-source effective predecessor for MATCH/SUBSTITUTE relaxation: the
  // better of the two phases, phase 0 on ties. The indel-pair production
  // reads the phase-0 cell directly — a pair must be followed by
  // MATCH/SUBSTITUTE, so it never chains from phase 1.
  std::vector<double> eff(n);
  std::vector<signed char> eff_p(n);

  for (int t = 1; t < len; ++t) {
    signed char* par = parent.data() + (size_t)t * slice;
    const double* emt = em.data() + (size_t)t * n;
    for (int s = 0; s < n; ++s) {
      const double c0 = dp_prev[s * 2];
      const double c1 = dp_prev[s * 2 + 1];
      // Exact dominance: phase 0 reaches every future phase 1 does, so a
      // phase-1 cell that does not strictly beat its sibling is dead.
      const bool live1 = c1 > c0;
      eff[s] = live1 ? c1 : c0;
      eff_p[s] = (signed char)(s * 4 + 1 + 2 * live1);
    }
    for (int j = 0; j < n; ++j) {
      // Gather over incoming arcs, sources in ascending rank order; strict
      // improvement keeps the lowest-rank argmax on exact ties. The per-note
      // emission term is a constant across the gather, so it is added after.
      double bm = neg_inf, b0 = neg_inf;
      signed char bmp = 0, b0p = 0;
      for (int a = model.in_off[j]; a < model.in_off[j + 1]; ++a) {
        const int i = model.in_from[a];
        const double g = model.in_cost[a];
        // MATCH / SUBSTITUTE: consume note t, emit state j.
        const double v = eff[i] + g;
        if (v > bm) {
          bm = v;
          bmp = eff_p[i];
        }
        // Indel pair (INSERT + DELETE): consume note t, emit state j with no
        // pitch anchor; the next op must be MATCH/SUBSTITUTE.
        const double r = dp_prev[i * 2] + g;
        if (r > b0) {
          b0 = r;
          b0p = (signed char)(i * 4 + 1);
        }
      }
      dp_cur[j * 2] = bm + emt[j];
      par[j * 2] = bmp;
      dp_cur[j * 2 + 1] = b0 + pair_edit;
      par[j * 2 + 1] = b0p;
    }
    dp_prev.swap(dp_cur);
  }

  double best = neg_inf;
  int best_s = -1, best_phase = 0;
  for (int phase = 0; phase < 2; ++phase) {
    for (int s = 0; s < n; ++s) {
      const double v = dp_prev[s * 2 + phase];
      if (v > best) {
        best = v;
        best_s = s;
        best_phase = phase;
      }
    }
  }
  if (best_s < 0 || best == neg_inf)
    throw std::runtime_error("fst_correct: no feasible path");

  FstResult result;
  result.score = best;
  std::vector<EditOp> rev;
  rev.reserve((size_t)len + 8);
  int t = len, s = best_s, phase = best_phase;
  while (t >= 1) {
    const int id = raga.active_at_rank(s);
    if (phase == 1) {
      // The note at t-1 was consumed by a DELETE paired with an INSERT of s.
      rev.push_back({EditKind::Delete, t - 1, std::nullopt});
      rev.push_back({EditKind::Insert, std::nullopt, id});
    } else {
      rev.push_back({s == nearest[t - 1] ? EditKind::Match : EditKind::Substitute, t - 1, id});
    }
    const int p = parent[(size_t)(t - 1) * slice + s * 2 + phase];
    --t;
    if (p == 0) break;
    s = (p - 1) / 4;
    phase = ((p - 1) / 2) % 2;
  }
  result.ops.assign(rev.rbegin(), rev.rend());
  result.output.reserve(len);
  for (const EditOp& op : result.ops)
    if (op.kind != EditKind::Delete) result.output.push_back(*op.state);
  return result;
}

// Convenience form: builds the search tables and runs one correction.
inline FstResult fst_correct(const PitchSequence& seq, const RagaSpec& raga,
                             const CostWeights& weights = {},
                             const ShrutiScale& scale = default_scale()) {
  return fst_correct(build_fst(raga, weights, scale), seq);
}

// Completion scoring context: up to three already-resolved neighbors of the
// position being filled.
struct CompletionContext {
  std::optional<int> prev2;
  std::optional<int> prev;
  std::optional<int> next;
};

struct CompletionParams {
  int tala_cycle = 16;
  double position_bonus = 0.5;
  double pakad_bonus = 1.0;
};

inline bool is_strong_beat(int position, int tala_cycle) {
  if (tala_cycle < 4) return position % std::max(tala_cycle, 1) == 0;
  const int beat = position % tala_cycle;
  return beat % (tala_cycle / 4) == 0;
}

// score = w_base + w_transition + w_pakad + w_position. Transition terms are
// summed over the context neighbors whose connecting edge is allowed;
// forbidden connections simply contribute nothing.
inline double candidate_score(int candidate, const CompletionContext& ctx,
                              const RagaSpec& raga, int position, int tala_cycle,
                              const CompletionParams& params = {},
                              const ShrutiScale& scale = default_scale()) {
  if (!raga.is_active(candidate))
    throw std::invalid_argument("candidate_score: candidate outside active set");
  double score = 1.0;  // w_base: raga membership

  auto trans = [&](int from, int to) {
    const double lp = log_transition_prob(raga, from, to, move_direction(scale, from, to));
    return std::isfinite(lp) ? lp : 0.0;  // forbidden edge: term absent
  };
  if (ctx.prev.has_value()) score += trans(*ctx.prev, candidate);
  if (ctx.next.has_value()) score += trans(candidate, *ctx.next);

  bool pakad_hit = false;
  if (ctx.prev.has_value() && raga.is_pakad_bigram(*ctx.prev, candidate)) pakad_hit = true;
  if (ctx.next.has_value() && raga.is_pakad_bigram(candidate, *ctx.next)) pakad_hit = true;
  for (const auto& motif : raga.pakad()) {
    for (size_t i = 0; i + 2 < motif.size() && !pakad_hit; ++i) {
      const bool tri_before = ctx.prev2.has_value() && ctx.prev.has_value() &&
                              motif[i] == *ctx.prev2 && motif[i + 1] == *ctx.prev &&
                              motif[i + 2] == candidate;
      const bool tri_around = ctx.prev.has_value() && ctx.next.has_value() &&
                              motif[i] == *ctx.prev && motif[i + 1] == candidate &&
                              motif[i + 2] == *ctx.next;
      if (tri_before || tri_around) pakad_hit = true;
    }
    if (pakad_hit) break;
  }
  if (pakad_hit) score += params.pakad_bonus;

  if ((candidate == raga.vadi() || candidate == raga.samvadi()) &&
      is_strong_beat(position, tala_cycle))
    score += params.position_bonus;
  return score;
}

// Fill MISSING positions: observed notes are quantized to the nearest active
// Shruti; gaps take the argmax-scoring candidate, preferring grammar-connected
// candidates. Sweeps alternate left-to-right / right-to-left until stable
// (at most 3 sweeps).
inline std::vector<int> fst_complete(const PitchSequence& seq, const RagaSpec& raga,
                                     const CostWeights& weights = {},
                                     int tala_cycle = 16,
                                     const CompletionParams& params_in = {},
                                     const ShrutiScale& scale = default_scale()) {
  (void)weights;
  if (seq.items.empty()) throw std::invalid_argument("fst_complete: empty sequence");
  if (seq.observed_count() == 0)
    throw TaskError("fst_complete: all observations MISSING, no anchor");
  CompletionParams params = params_in;
  params.tala_cycle = tala_cycle;

  const int len = (int)seq.size();
  std::vector<int> out(len, -1);
  std::vector<bool> missing(len, false);
  for (int t = 0; t < len; ++t) {
    if (seq.items[t].has_value())
      out[t] = nearest_active_shruti(raga, *seq.items[t], scale);
    else
      missing[t] = true;
  }

  auto resolve = [&](int t) -> bool {
    CompletionContext ctx;
    if (t >= 1 && out[t - 1] >= 0) ctx.prev = out[t - 1];
    if (t >= 2 && out[t - 2] >= 0) ctx.prev2 = out[t - 2];
    if (t + 1 < len && out[t + 1] >= 0) ctx.next = out[t + 1];

    // Prefer candidates the grammar actually connects to the context.
    std::vector<int> pool;
    auto connected = [&](int cand) {
      bool any = ctx.prev.has_value() || ctx.next.has_value();
      if (!any) return true;
      bool ok = true;
      if (ctx.prev.has_value())
        ok = allowed(raga, *ctx.prev, cand, move_direction(scale, *ctx.prev, cand));
      if (ok && ctx.next.has_value())
        ok = allowed(raga, cand, *ctx.next, move_direction(scale, cand, *ctx.next));
      return ok;
    };
    for (int id : raga.active())
      if (connected(id)) pool.push_back(id);
    if (pool.empty()) {
      // Fall back to one-sided connectivity, then to the whole active set.
      for (int id : raga.active()) {
        bool one = (ctx.prev.has_value() &&
                    allowed(raga, *ctx.prev, id, move_direction(scale, *ctx.prev, id))) ||
                   (ctx.next.has_value() &&
                    allowed(raga, id, *ctx.next, move_direction(scale, id, *ctx.next)));
        if (one) pool.push_back(id);
      }
    }
    if (pool.empty()) pool = raga.active();

    int best = pool.front();
    double best_score = -std::numeric_limits<double>::infinity();
    for (int cand : pool) {
      const double s = candidate_score(cand, ctx, raga, t, tala_cycle, params, scale);
      if (s > best_score) {
        best_score = s;
        best = cand;
      }
    }
    const bool changed = out[t] != best;
    out[t] = best;
    return changed;
  };

  for (int sweep = 0; sweep < 3; ++sweep) {
    bool changed = false;
    if (sweep % 2 == 0) {
      for (int t = 0; t < len; ++t)
        if (missing[t]) changed |= resolve(t);
    } else {
      for (int t = len - 1; t >= 0; --t)
        if (missing[t]) changed |= resolve(t);
    }
    if (!changed) break;
  }
  return out;
}

}  // namespace shruti
