#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "shrutisense/raga.hpp"
#include "shrutisense/scale.hpp"

namespace shruti {

// Grammar-constrained Shruti HMM. States are the raga's active Shrutis in
// scale order; transitions are the normalized grammar weights, split by
// melodic direction. Immutable after build_model.
struct HmmModel {
  RagaSpec raga;
  std::vector<double> mu;     // state centers in cents
  double sigma = 25.0;        // emission std-dev in cents
  std::vector<double> a_up;   // row-major N x N, row-stochastic
  std::vector<double> a_down;
  std::vector<double> pi;     // uniform initial distribution

  int states() const { return (int)mu.size(); }
  double a(Direction dir, int i, int j) const {
    const auto& m = dir == Direction::Ascending ? a_up : a_down;
    return m[(size_t)(i * states() + j)];
  }
};

inline HmmModel build_model(const RagaSpec& raga, double sigma = 25.0,
                            const ShrutiScale& scale = default_scale()) {
  if (!(sigma > 0.0)) throw std::invalid_argument("build_model: sigma must be positive");
  const int n = raga.active_count();
  HmmModel m{raga, {}, sigma, {}, {}, {}};
  m.mu.reserve(n);
  for (int id : raga.active()) m.mu.push_back(scale.cent(id));
  m.pi.assign(n, 1.0 / n);
  for (Direction dir : {Direction::Ascending, Direction::Descending}) {
    std::vector<double>& a = dir == Direction::Ascending ? m.a_up : m.a_down;
    a.assign((size_t)n * n, 0.0);
    for (int i = 0; i < n; ++i) {
      double z = 0.0;
      for (int j = 0; j < n; ++j) {
        double w = transition_weight(raga, raga.active_at_rank(i),
                                     raga.active_at_rank(j), dir);
        a[i * n + j] = w;
        z += w;
      }
      if (z > 0.0) {
        for (int j = 0; j < n; ++j) a[i * n + j] /= z;
      } else {
        a[i * n + i] = 1.0;  // dead-end row: self-loop keeps the matrix stochastic
      }
    }
  }
  return m;
}

// Log Gaussian density at the circular cent distance between the observation
// and the state center.
inline double emission_logprob(const HmmModel& model, double obs_cents, int state) {
  require_finite(obs_cents, "emission_logprob");
  const double d = circular_distance(fold_to_octave(obs_cents), model.mu[state]);
  const double s2 = model.sigma * model.sigma;
  return -0.5 * std::log(2.0 * M_PI * s2) - d * d / (2.0 * s2);
}

// Per-step melodic direction from pitch gradients: ascending when the pitch
// does not fall. MISSING observations inherit; t = 0 defaults to ascending.
inline std::vector<Direction> infer_direction(const PitchSequence& seq) {
  if (seq.items.empty()) throw std::invalid_argument("infer_direction: empty sequence");
  std::vector<Direction> dirs(seq.size(), Direction::Ascending);
  double prev = 0.0;
  bool have_prev = false;
  for (size_t t = 0; t < seq.size(); ++t) {
    const Observation& o = seq.items[t];
    if (t > 0) dirs[t] = dirs[t - 1];
    if (o.has_value()) {
      if (have_prev) dirs[t] = (*o >= prev) ? Direction::Ascending : Direction::Descending;
      prev = *o;
      have_prev = true;
    }
  }
  return dirs;
}

// Viterbi decode of a fully observed sequence: arg-max state path under the
// direction-selected transition matrix at each step, with its log-likelihood.
// Ties break to the lowest state index.
//
// This is the reference decoder: at every step it materializes the selected
// direction's normalized transition row straight from the grammar weights
// (w / Z, exactly as build_model does), so the decode is a line-for-line
// transcription of the defining equations rather than a dispatch into cached
// state. The FST path is the performance-tuned decoder.
inline std::pair<std::vector<int>, double> viterbi_correct(const HmmModel& model,
                                                           const PitchSequence& seq) {
  if (seq.items.empty()) throw std::invalid_argument("viterbi_correct: empty sequence");
  if (seq.has_missing())
    throw TaskError("viterbi_correct: sequence has MISSING observations; use completion");
  const RagaSpec& raga = model.raga;
  const int n = model.states();
  const int len = (int)seq.size();
  const double neg_inf = -std::numeric_limits<double>::infinity();
  const std::vector<Direction> dirs = infer_direction(seq);

  std::vector<std::vector<double>> delta(len, std::vector<double>(n, neg_inf));
  std::vector<std::vector<int>> back(len, std::vector<int>(n, -1));

  std::vector<double> w((size_t)n * n);  // per-step grammar weights and row sums
  std::vector<double> z(n);

  for (int j = 0; j < n; ++j)
    delta[0][j] = std::log(model.pi[j]) + emission_logprob(model, *seq.items[0], j);
  for (int t = 1; t < len; ++t) {
    const Direction dir = dirs[t];
    for (int i = 0; i < n; ++i) {
      z[i] = 0.0;
      for (int k = 0; k < n; ++k) {
        w[i * n + k] = transition_weight(raga, raga.active_at_rank(i),
                                         raga.active_at_rank(k), dir);
        z[i] += w[i * n + k];
      }
    }
    for (int j = 0; j < n; ++j) {
      double best = neg_inf;
      int arg = -1;
      for (int i = 0; i < n; ++i) {
        // log(0) = -inf drops forbidden transitions out of the max. A row
        // with no allowed successor is the self-loop build_model assigns.
        const double cand = z[i] > 0.0
                                ? delta[t - 1][i] + std::log(w[i * n + j] / z[i])
                                : (i == j ? delta[t - 1][i] : neg_inf);
        if (cand > best) {
          best = cand;
          arg = i;
        }
      }
      if (arg >= 0) {
        delta[t][j] = best + emission_logprob(model, *seq.items[t], j);
        back[t][j] = arg;
      }
    }
  }

  int best_state = 0;
  double best_ll = neg_inf;
  for (int j = 0; j < n; ++j) {
    if (delta[len - 1][j] > best_ll) {
      best_ll = delta[len - 1][j];
      best_state = j;
    }
  }
  std::vector<int> path(len);
  for (int t = len - 1, s = best_state; t >= 0; --t) {
    path[t] = model.raga.active_at_rank(s);
    s = back[t][s];
  }
  return {path, best_ll};
}

// Scaled forward-backward. At MISSING positions every state gets emission
// factor 1, so inference there is carried entirely by the grammar. Returns
// the per-position argmax states and the posterior vectors (each sums to 1).
inline std::pair<std::vector<int>, std::vector<std::vector<double>>>
forward_backward_complete(const HmmModel& model, const PitchSequence& seq) {
  if (seq.items.empty())
    throw std::invalid_argument("forward_backward_complete: empty sequence");
  if (seq.observed_count() == 0)
    throw TaskError("forward_backward_complete: all observations MISSING, no anchor");
  const int n = model.states();
  const int len = (int)seq.size();
  const std::vector<Direction> dirs = infer_direction(seq);

  auto emission = [&](int t, int j) -> double {
    const Observation& o = seq.items[t];
    if (!o.has_value()) return 1.0;
    return std::exp(emission_logprob(model, *o, j));
  };

  std::vector<std::vector<double>> alpha(len, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> beta = alpha;
  std::vector<double> scale_factor(len, 0.0);

  for (int j = 0; j < n; ++j) alpha[0][j] = model.pi[j] * emission(0, j);
  for (int t = 0; t < len; ++t) {
    if (t > 0) {
      const Direction dir = dirs[t];
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += alpha[t - 1][i] * model.a(dir, i, j);
        alpha[t][j] = s * emission(t, j);
      }
    }
    double c = 0.0;
    for (int j = 0; j < n; ++j) c += alpha[t][j];
    if (c <= 0.0)
      throw std::runtime_error("forward_backward_complete: zero-probability prefix");
    scale_factor[t] = c;
    for (int j = 0; j < n; ++j) alpha[t][j] /= c;
  }

  for (int j = 0; j < n; ++j) beta[len - 1][j] = 1.0;
  for (int t = len - 2; t >= 0; --t) {
    const Direction dir = dirs[t + 1];
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        s += model.a(dir, i, j) * emission(t + 1, j) * beta[t + 1][j];
      beta[t][i] = s / scale_factor[t + 1];
    }
  }

  std::vector<std::vector<double>> gamma(len, std::vector<double>(n, 0.0));
  std::vector<int> path(len);
  for (int t = 0; t < len; ++t) {
    double z = 0.0;
    for (int j = 0; j < n; ++j) {
      gamma[t][j] = alpha[t][j] * beta[t][j];
      z += gamma[t][j];
    }
    int arg = 0;
    double best = -1.0;
    for (int j = 0; j < n; ++j) {
      gamma[t][j] /= z;
      if (gamma[t][j] > best) {
        best = gamma[t][j];
        arg = j;
      }
    }
    path[t] = model.raga.active_at_rank(arg);
  }
  return {path, gamma};
}

}  // namespace shruti
