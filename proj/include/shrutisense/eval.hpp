#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shrutisense/datagen.hpp"
#include "shrutisense/fst.hpp"
#include "shrutisense/hmm.hpp"
#include "shrutisense/raga.hpp"
#include "shrutisense/scale.hpp"

namespace shruti {

enum class Task { Correction, Completion };

struct EvalRecord {
  std::string model;
  std::string raga;
  Task task = Task::Correction;
  double rate = 0.0;  // corruption or missing rate
  std::string pattern;  // missing pattern for completion runs, else empty
  int length = 0;
  std::uint64_t seed = 0;
  double shruti_accuracy = 0.0;
  double mean_pitch_error = 0.0;    // circular cents
  double linear_pitch_error = 0.0;  // non-wrapped |difference| in cents
  double grammar_compliance = 0.0;
  double pakad_recognition = 0.0;
  double wall_time_ms = 0.0;
};

inline double shruti_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("shruti_accuracy: length mismatch");
  if (pred.empty()) throw std::invalid_argument("shruti_accuracy: empty input");
  int hits = 0;
  for (size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i] ? 1 : 0;
  return (double)hits / (double)pred.size();
}

inline double shruti_accuracy_masked(const std::vector<int>& pred,
                                     const std::vector<int>& truth,
                                     const std::vector<bool>& mask) {
  if (pred.size() != truth.size() || pred.size() != mask.size())
    throw std::invalid_argument("shruti_accuracy_masked: length mismatch");
  int hits = 0, total = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (!mask[i]) continue;
    ++total;
    hits += pred[i] == truth[i] ? 1 : 0;
  }
  if (total == 0) throw std::invalid_argument("shruti_accuracy_masked: empty mask");
  return (double)hits / (double)total;
}

// Mean deviation in cents between predicted and true Shruti centers.
// Circular by default; the linear variant measures the plain absolute
// difference of the folded centers (both are reported, they disagree for
// errors past the half-octave).
inline double avg_pitch_error(const std::vector<int>& pred, const std::vector<int>& truth,
                              bool circular = true,
                              const ShrutiScale& scale = default_scale(),
                              const std::vector<bool>* mask = nullptr) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("avg_pitch_error: length mismatch");
  if (pred.empty()) throw std::invalid_argument("avg_pitch_error: empty input");
  double sum = 0.0;
  int total = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    const double a = scale.cent(pred[i]);
    const double b = scale.cent(truth[i]);
    sum += circular ? circular_distance(a, b) : std::abs(a - b);
    ++total;
  }
  if (total == 0) throw std::invalid_argument("avg_pitch_error: empty mask");
  return sum / total;
}

// Baseline: per-note nearest entry of the full 22-Shruti table.
inline std::vector<int> nearest_cent_baseline(const PitchSequence& seq,
                                              const ShrutiScale& scale = default_scale()) {
  if (seq.has_missing())
    throw TaskError("nearest_cent_baseline: MISSING observations not supported");
  std::vector<int> out;
  out.reserve(seq.size());
  for (const auto& o : seq.items) out.push_back(nearest_shruti(scale, *o).first.index);
  return out;
}

// Baseline: per-note uniform draw over the raga's active Shrutis.
inline std::vector<int> random_baseline(const PitchSequence& seq, const RagaSpec& raga,
                                        std::uint64_t seed) {
  if (seq.has_missing())
    throw TaskError("random_baseline: MISSING observations not supported");
  Rng rng(seed);
  std::vector<int> out;
  out.reserve(seq.size());
  for (size_t i = 0; i < seq.size(); ++i)
    out.push_back(raga.active_at_rank(rng.index(raga.active_count())));
  return out;
}

struct MetricStats {
  int n = 0;
  double mean = 0.0;
  double std_dev = 0.0;
  double ci95_halfwidth = 0.0;
};

struct AggregateStats {
  // model -> per-metric stats
  std::map<std::string, std::map<std::string, MetricStats>> by_model;
  // (model_a|model_b) -> Cohen's d on shruti accuracy
  std::map<std::string, double> cohens_d;
  double anova_f = 0.0;  // one-way across models, on shruti accuracy
};

inline MetricStats metric_stats(const std::vector<double>& xs) {
  if (xs.size() < 2) throw std::invalid_argument("metric_stats: need n >= 2");
  MetricStats s;
  s.n = (int)xs.size();
  for (double x : xs) s.mean += x;
  s.mean /= s.n;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.std_dev = std::sqrt(ss / (s.n - 1));
  s.ci95_halfwidth = 1.96 * s.std_dev / std::sqrt((double)s.n);
  return s;
}

inline double cohens_d(const std::vector<double>& a, const std::vector<double>& b) {
  const MetricStats sa = metric_stats(a), sb = metric_stats(b);
  const double pooled =
      std::sqrt(((sa.n - 1) * sa.std_dev * sa.std_dev + (sb.n - 1) * sb.std_dev * sb.std_dev) /
                (double)(sa.n + sb.n - 2));
  if (pooled == 0.0) return 0.0;
  return (sa.mean - sb.mean) / pooled;
}

inline double anova_f(const std::vector<std::vector<double>>& groups) {
  int k = (int)groups.size();
  if (k < 2) throw std::invalid_argument("anova_f: need >= 2 groups");
  int n = 0;
  double grand = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw std::invalid_argument("anova_f: need n >= 2 per group");
    for (double x : g) grand += x;
    n += (int)g.size();
  }
  grand /= n;
  double ss_between = 0.0, ss_within = 0.0;
  for (const auto& g : groups) {
    double m = 0.0;
    for (double x : g) m += x;
    m /= g.size();
    ss_between += g.size() * (m - grand) * (m - grand);
    for (double x : g) ss_within += (x - m) * (x - m);
  }
  const double ms_between = ss_between / (k - 1);
  const double ms_within = ss_within / (n - k);
  if (ms_within == 0.0) return ms_between == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return ms_between / ms_within;
}

inline AggregateStats aggregate_stats(const std::vector<EvalRecord>& records) {
  std::map<std::string, std::vector<const EvalRecord*>> groups;
  for (const auto& r : records) groups[r.model].push_back(&r);
  AggregateStats out;
  std::map<std::string, std::vector<double>> acc;
  for (const auto& [model, rs] : groups) {
    auto pull = [&](auto field) {
      std::vector<double> xs;
      xs.reserve(rs.size());
      for (const auto* r : rs) xs.push_back(r->*field);
      return xs;
    };
    acc[model] = pull(&EvalRecord::shruti_accuracy);
    out.by_model[model]["shruti_accuracy"] = metric_stats(acc[model]);
    out.by_model[model]["mean_pitch_error"] = metric_stats(pull(&EvalRecord::mean_pitch_error));
    out.by_model[model]["linear_pitch_error"] = metric_stats(pull(&EvalRecord::linear_pitch_error));
    out.by_model[model]["grammar_compliance"] = metric_stats(pull(&EvalRecord::grammar_compliance));
    out.by_model[model]["pakad_recognition"] = metric_stats(pull(&EvalRecord::pakad_recognition));
    out.by_model[model]["wall_time_ms"] = metric_stats(pull(&EvalRecord::wall_time_ms));
  }
  for (auto a = acc.begin(); a != acc.end(); ++a)
    for (auto b = std::next(a); b != acc.end(); ++b)
      out.cohens_d[a->first + "|" + b->first] = cohens_d(a->second, b->second);
  if (acc.size() >= 2) {
    std::vector<std::vector<double>> groups_acc;
    for (const auto& [model, xs] : acc) groups_acc.push_back(xs);
    out.anova_f = anova_f(groups_acc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Benchmark orchestration
// ---------------------------------------------------------------------------

struct BenchmarkConfig {
  Task task = Task::Correction;
  std::vector<std::string> models;  // fst, hmm, nearest, random
  std::vector<std::string> ragas;   // names resolved by the caller
  std::vector<double> rates;
  std::vector<int> lengths;
  std::vector<MissingPattern> patterns;  // completion only
  int runs_per_cell = 10;
  std::uint64_t seed = 1;
  double sigma = 25.0;
  CostWeights weights;
  double noise_cents = 4.0;          // corruption preset knobs
  double westernize_fraction = 0.98;
  int tala_cycle = 16;
  bool record_timing = false;  // timings vary run to run; keep record files reproducible
};

struct BenchmarkResult {
  std::vector<EvalRecord> records;
  AggregateStats stats;
};

inline std::vector<int> run_model_correction(const std::string& model,
                                             const PitchSequence& obs,
                                             const RagaSpec& raga, const HmmModel& hmm,
                                             const FstModel& fst,
                                             const BenchmarkConfig& cfg,
                                             std::uint64_t seed,
                                             const ShrutiScale& scale) {
  if (model == "fst") return fst_correct(fst, obs).output;
  if (model == "hmm") return viterbi_correct(hmm, obs).first;
  if (model == "nearest") return nearest_cent_baseline(obs, scale);
  if (model == "random") return random_baseline(obs, raga, seed);
  throw ConfigError("unknown correction model: " + model);
}

inline std::vector<int> run_model_completion(const std::string& model,
                                             const PitchSequence& obs,
                                             const RagaSpec& raga, const HmmModel& hmm,
                                             const BenchmarkConfig& cfg,
                                             const ShrutiScale& scale) {
  if (model == "fst") return fst_complete(obs, raga, cfg.weights, cfg.tala_cycle, {}, scale);
  if (model == "hmm") return forward_backward_complete(hmm, obs).first;
  throw ConfigError("unknown completion model: " + model);
}

// Executes the datagen -> model -> metrics pipeline over the whole grid.
// Deterministic: every run derives its own PRNG streams from (seed, counter).
// Wall time is measured around the decode call only. A model failure is
// recorded (metrics zeroed, accuracy 0) instead of aborting the sweep.
inline BenchmarkResult run_benchmark(const BenchmarkConfig& cfg,
                                     const std::vector<RagaSpec>& ragas,
                                     const ShrutiScale& scale = default_scale()) {
  if (cfg.models.empty() || ragas.empty() || cfg.rates.empty() || cfg.lengths.empty() ||
      cfg.runs_per_cell <= 0)
    throw ConfigError("run_benchmark: empty benchmark grid");
  if (cfg.task == Task::Completion && cfg.patterns.empty())
    throw ConfigError("run_benchmark: completion grid needs missing patterns");

  BenchmarkResult result;
  std::uint64_t counter = 0;
  const std::vector<MissingPattern> patterns =
      cfg.task == Task::Completion ? cfg.patterns
                                   : std::vector<MissingPattern>{MissingPattern::Random};

  for (const RagaSpec& raga : ragas) {
    const HmmModel hmm = build_model(raga, cfg.sigma, scale);
    const FstModel fst = build_fst(raga, cfg.weights, scale);
    for (MissingPattern pattern : patterns) {
      for (double rate : cfg.rates) {
        for (int length : cfg.lengths) {
          for (int run = 0; run < cfg.runs_per_cell; ++run) {
            const std::uint64_t run_id = counter++;
            const std::uint64_t gen_seed = Rng::substream(cfg.seed, run_id * 4).next_u64();
            const std::uint64_t noise_seed = Rng::substream(cfg.seed, run_id * 4 + 1).next_u64();
            const std::uint64_t model_seed = Rng::substream(cfg.seed, run_id * 4 + 2).next_u64();

            const std::vector<int> truth = generate_sequence(raga, length, gen_seed, scale);
            PitchSequence obs;
            std::vector<bool> mask(truth.size(), true);
            if (cfg.task == Task::Correction) {
              obs = corrupt(truth, {rate, cfg.noise_cents, cfg.westernize_fraction, noise_seed},
                            scale);
            } else {
              obs = apply_missing(truth, {rate, pattern, noise_seed}, scale);
              for (size_t i = 0; i < obs.items.size(); ++i)
                mask[i] = !obs.items[i].has_value();
            }

            for (const std::string& model : cfg.models) {
              EvalRecord rec;
              rec.model = model;
              rec.raga = raga.name();
              rec.task = cfg.task;
              rec.rate = rate;
              rec.pattern = cfg.task == Task::Completion ? missing_pattern_name(pattern) : "";
              rec.length = length;
              rec.seed = gen_seed;
              try {
                const auto t0 = std::chrono::steady_clock::now();
                const std::vector<int> pred =
                    cfg.task == Task::Correction
                        ? run_model_correction(model, obs, raga, hmm, fst, cfg, model_seed,
                                               scale)
                        : run_model_completion(model, obs, raga, hmm, cfg, scale);
                const auto t1 = std::chrono::steady_clock::now();
                rec.wall_time_ms =
                    std::chrono::duration<double, std::milli>(t1 - t0).count();
                if (cfg.task == Task::Correction) {
                  rec.shruti_accuracy = shruti_accuracy(pred, truth);
                  rec.mean_pitch_error = avg_pitch_error(pred, truth, true, scale);
                  rec.linear_pitch_error = avg_pitch_error(pred, truth, false, scale);
                } else {
                  rec.shruti_accuracy = shruti_accuracy_masked(pred, truth, mask);
                  rec.mean_pitch_error = avg_pitch_error(pred, truth, true, scale, &mask);
                  rec.linear_pitch_error = avg_pitch_error(pred, truth, false, scale, &mask);
                }
                rec.grammar_compliance = grammar_compliance(pred, raga, scale);
                rec.pakad_recognition = pakad_recognition(pred, raga);
              } catch (const std::exception& e) {
                rec.pattern += std::string(rec.pattern.empty() ? "" : " ") +
                               "error: " + e.what();
              }
              result.records.push_back(std::move(rec));
            }
          }
        }
      }
    }
  }
  result.stats = aggregate_stats(result.records);
  return result;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::json record_to_json(const EvalRecord& r, bool include_timing) {
  nlohmann::json j{
      {"model", r.model},
      {"raga", r.raga},
      {"task", r.task == Task::Correction ? "correction" : "completion"},
      {"rate", r.rate},
      {"pattern", r.pattern},
      {"length", r.length},
      {"seed", r.seed},
      {"shruti_accuracy", r.shruti_accuracy},
      {"mean_pitch_error", r.mean_pitch_error},
      {"linear_pitch_error", r.linear_pitch_error},
      {"grammar_compliance", r.grammar_compliance},
      {"pakad_recognition", r.pakad_recognition},
  };
  if (include_timing) j["wall_time_ms"] = r.wall_time_ms;
  return j;
}

// Line-delimited JSON, one record per line.
inline void write_records(std::ostream& out, const std::vector<EvalRecord>& records,
                          bool include_timing = false) {
  for (const auto& r : records) out << record_to_json(r, include_timing).dump() << "\n";
}

// Plain-text summary mirroring the benchmark tables: one row per model (and
// per missing pattern for completion sweeps).
inline void write_summary_table(std::ostream& out, const std::vector<EvalRecord>& records) {
  std::map<std::pair<std::string, std::string>, std::vector<const EvalRecord*>> cells;
  for (const auto& r : records) cells[{r.pattern, r.model}].push_back(&r);
  out << "pattern          model     acc%      err_cents  time_ms   n\n";
  for (const auto& [key, rs] : cells) {
    std::vector<double> acc, err, ms;
    for (const auto* r : rs) {
      acc.push_back(r->shruti_accuracy);
      err.push_back(r->mean_pitch_error);
      ms.push_back(r->wall_time_ms);
    }
    const MetricStats sa = metric_stats(acc), se = metric_stats(err), st = metric_stats(ms);
    char line[160];
    std::snprintf(line, sizeof(line), "%-16s %-9s %5.1f±%-4.1f %7.1f    %8.4f %5d\n",
                  key.first.empty() ? "-" : key.first.c_str(), key.second.c_str(),
                  100.0 * sa.mean, 100.0 * sa.ci95_halfwidth, se.mean, st.mean, sa.n);
    out << line;
  }
}

// (rate, mean accuracy) per model, CSV for plotting robustness sweeps.
inline void write_robustness_csv(std::ostream& out, const std::vector<EvalRecord>& records) {
  std::map<std::pair<std::string, double>, std::pair<double, int>> cells;
  for (const auto& r : records) {
    auto& [sum, n] = cells[{r.model, r.rate}];
    sum += r.shruti_accuracy;
    ++n;
  }
  out << "model,rate,accuracy\n";
  for (const auto& [key, cell] : cells)
    out << key.first << "," << key.second << "," << cell.first / cell.second << "\n";
}

}  // namespace shruti
