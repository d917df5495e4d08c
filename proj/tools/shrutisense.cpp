// shruti — command-line front end for the ShrutiSense toolkit.
//
// Subcommands: correct, complete, generate, synth, bench.
// Exit codes: 0 ok, 2 usage/config error, 3 task-precondition violation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <shrutisense/shrutisense.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Resolve a raga argument: a bare name looks up <data-dir>/ragas/<name>.json,
// anything with a path separator or .json suffix is used verbatim.
std::string raga_path(const std::string& data_dir, const std::string& name) {
  if (name.find('/') != std::string::npos || name.find('\\') != std::string::npos ||
      (name.size() > 5 && name.substr(name.size() - 5) == ".json"))
    return name;
  return data_dir + "/ragas/" + name + ".json";
}

std::string preset_path(const std::string& data_dir, const std::string& name) {
  if (name.find('/') != std::string::npos || name.find('\\') != std::string::npos ||
      (name.size() > 5 && name.substr(name.size() - 5) == ".json"))
    return name;
  return data_dir + "/bench/" + name + ".json";
}

shruti::RagaSpec load_named_raga(const std::string& data_dir, const std::string& name) {
  if (name.empty()) throw shruti::ConfigError("unknown raga: (empty name)");
  const std::string path = raga_path(data_dir, name);
  if (!fs::exists(path)) throw shruti::ConfigError("unknown raga: " + name);
  return shruti::load_raga_file(path);
}

// Shared tuning flags for the correction engines.
struct EngineFlags {
  double lambda_pitch = 0.6;
  double lambda_grammar = 0.3;
  double lambda_edit = 0.1;
  double sigma = 25.0;
  std::uint64_t seed = 0;
};

void add_engine_flags(CLI::App* cmd, EngineFlags& f) {
  cmd->add_option("--lambda-pitch", f.lambda_pitch, "FST pitch-cost weight");
  cmd->add_option("--lambda-grammar", f.lambda_grammar, "FST grammar-cost weight");
  cmd->add_option("--lambda-edit", f.lambda_edit, "FST edit-cost weight");
  cmd->add_option("--sigma", f.sigma, "HMM emission std-dev in cents");
  cmd->add_option("--seed", f.seed, "seed for the random baseline");
}

// Ground truth for the metric sidecar: a sequence file whose values are
// snapped to the nearest full-table Shruti.
std::vector<int> truth_ids(const std::string& path, const shruti::ShrutiScale& scale) {
  const shruti::SequenceFile f = shruti::read_sequence_file(path);
  if (f.sequence.has_missing())
    throw shruti::ConfigError("truth file must not contain MISSING");
  std::vector<int> ids;
  ids.reserve(f.sequence.size());
  for (const auto& o : f.sequence.items)
    ids.push_back(shruti::nearest_shruti(scale, *o).first.index);
  return ids;
}

json metrics_json(const std::vector<int>& pred, const std::vector<int>& truth,
                  const shruti::RagaSpec& raga, const shruti::ShrutiScale& scale) {
  return json{
      {"shruti_accuracy", shruti::shruti_accuracy(pred, truth)},
      {"mean_pitch_error", shruti::avg_pitch_error(pred, truth, true, scale)},
      {"linear_pitch_error", shruti::avg_pitch_error(pred, truth, false, scale)},
      {"grammar_compliance", shruti::grammar_compliance(pred, raga, scale)},
      {"pakad_recognition", shruti::pakad_recognition(pred, raga)},
  };
}

void write_output_sequence(const std::string& path, const std::vector<int>& ids,
                           double tonic_hz, const std::string& raga_name,
                           const shruti::ShrutiScale& scale) {
  shruti::SequenceFile out;
  out.tonic_hz = tonic_hz;
  out.raga_hint = raga_name;
  for (int id : ids) out.sequence.items.push_back(scale.cent(id));
  shruti::write_sequence_file(path, out);
}

void write_report(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw shruti::ConfigError("cannot write report " + path);
  out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

int cmd_correct(const std::string& in_path, const std::string& out_path,
                const std::string& raga_name, const std::string& engine,
                const EngineFlags& flags, const std::string& truth_path,
                const std::string& data_dir, double tonic_override) {
  const shruti::ShrutiScale& scale = shruti::default_scale();
  const shruti::SequenceFile in = shruti::read_sequence_file(in_path);
  if (in.sequence.has_missing())
    throw shruti::TaskError("input contains MISSING observations; use complete");
  const shruti::RagaSpec raga = load_named_raga(data_dir, raga_name);

  json report{{"command", "correct"}, {"engine", engine}, {"raga", raga.name()},
              {"input", in_path}, {"length", in.sequence.size()}};
  std::vector<int> ids;
  if (engine == "fst") {
    const shruti::CostWeights w{flags.lambda_pitch, flags.lambda_grammar, flags.lambda_edit};
    const shruti::FstResult r = shruti::fst_correct(in.sequence, raga, w, scale);
    ids = r.output;
    report["score"] = r.score;
    json ops = json::array();
    for (const auto& op : r.ops) {
      json o{{"kind", shruti::edit_kind_name(op.kind)}};
      if (op.obs_index.has_value()) o["obs_index"] = *op.obs_index;
      if (op.state.has_value()) o["state"] = *op.state;
      ops.push_back(o);
    }
    report["ops"] = ops;
  } else if (engine == "hmm") {
    const shruti::HmmModel model = shruti::build_model(raga, flags.sigma, scale);
    auto [path, ll] = shruti::viterbi_correct(model, in.sequence);
    ids = path;
    report["log_likelihood"] = ll;
  } else if (engine == "nearest") {
    ids = shruti::nearest_cent_baseline(in.sequence, scale);
  } else if (engine == "random") {
    ids = shruti::random_baseline(in.sequence, raga, flags.seed);
  } else {
    throw shruti::ConfigError("unknown engine: " + engine);
  }

  if (!truth_path.empty())
    report["metrics"] = metrics_json(ids, truth_ids(truth_path, scale), raga, scale);
  const double tonic = tonic_override > 0.0 ? tonic_override : in.tonic_hz;
  write_output_sequence(out_path, ids, tonic, raga.name(), scale);
  write_report(out_path + ".report.json", report);
  return 0;
}

int cmd_complete(const std::string& in_path, const std::string& out_path,
                 const std::string& raga_name, const std::string& engine,
                 const EngineFlags& flags, int tala_cycle,
                 const std::string& truth_path, const std::string& data_dir,
                 double tonic_override) {
  const shruti::ShrutiScale& scale = shruti::default_scale();
  const shruti::SequenceFile in = shruti::read_sequence_file(in_path);
  const shruti::RagaSpec raga = load_named_raga(data_dir, raga_name);

  json report{{"command", "complete"}, {"engine", engine}, {"raga", raga.name()},
              {"input", in_path}, {"length", in.sequence.size()}};
  std::vector<int> ids;
  if (!in.sequence.has_missing()) {
    std::cerr << "warning: input has no MISSING observations; passing through "
                 "nearest-active quantization\n";
    for (const auto& o : in.sequence.items)
      ids.push_back(shruti::nearest_active_shruti(raga, *o, scale));
    report["passthrough"] = true;
  } else if (engine == "fst") {
    const shruti::CostWeights w{flags.lambda_pitch, flags.lambda_grammar, flags.lambda_edit};
    ids = shruti::fst_complete(in.sequence, raga, w, tala_cycle, {}, scale);
  } else if (engine == "hmm") {
    const shruti::HmmModel model = shruti::build_model(raga, flags.sigma, scale);
    auto [path, gamma] = shruti::forward_backward_complete(model, in.sequence);
    ids = path;
    json posts = json::array();
    for (size_t t = 0; t < in.sequence.size(); ++t) {
      if (in.sequence.items[t].has_value()) continue;
      posts.push_back(json{{"position", t}, {"posterior", gamma[t]}});
    }
    report["posteriors"] = posts;
  } else {
    throw shruti::ConfigError("unknown engine: " + engine);
  }

  json filled = json::array();
  for (size_t t = 0; t < in.sequence.size(); ++t)
    if (!in.sequence.items[t].has_value())
      filled.push_back(json{{"position", t}, {"shruti", ids[t]}});
  report["filled"] = filled;
  if (!truth_path.empty())
    report["metrics"] = metrics_json(ids, truth_ids(truth_path, scale), raga, scale);
  const double tonic = tonic_override > 0.0 ? tonic_override : in.tonic_hz;
  write_output_sequence(out_path, ids, tonic, raga.name(), scale);
  write_report(out_path + ".report.json", report);
  return 0;
}

int cmd_generate(const std::string& raga_name, int length, int count,
                 std::uint64_t seed, const std::string& outdir,
                 double corruption_rate, double noise_cents, double westernize,
                 double missing_rate, const std::string& pattern_name, bool force,
                 double tonic_hz, const std::string& data_dir) {
  const shruti::ShrutiScale& scale = shruti::default_scale();
  const shruti::RagaSpec raga = load_named_raga(data_dir, raga_name);
  if (corruption_rate > 0.0 && missing_rate > 0.0)
    throw shruti::ConfigError("choose either --corruption-rate or --missing-rate");
  if (!force && (corruption_rate > 0.5 || missing_rate > 0.5))
    throw shruti::ConfigError(
        "rate outside the supported preset range [0, 0.5]; pass --force to override");
  if (count < 1) throw shruti::ConfigError("count must be >= 1");
  shruti::MissingPattern pattern = shruti::MissingPattern::Random;
  if (pattern_name == "clustered") pattern = shruti::MissingPattern::Clustered;
  else if (pattern_name == "structured") pattern = shruti::MissingPattern::Structured;
  else if (pattern_name != "random")
    throw shruti::ConfigError("unknown missing pattern: " + pattern_name);

  fs::create_directories(outdir);
  std::ostringstream manifest;
  manifest << "shruti-manifest 1\n"
           << "raga " << raga.name() << "\n"
           << "length " << length << "\n"
           << "count " << count << "\n"
           << "seed " << seed << "\n"
           << "corruption_rate " << corruption_rate << "\n"
           << "noise_cents " << noise_cents << "\n"
           << "westernize_fraction " << westernize << "\n"
           << "missing_rate " << missing_rate << "\n"
           << "pattern " << pattern_name << "\n"
           << "tonic_hz " << tonic_hz << "\n\n";

  char name[64];
  for (int i = 0; i < count; ++i) {
    const std::uint64_t gen_seed = shruti::Rng::substream(seed, (std::uint64_t)i * 2).next_u64();
    const std::uint64_t mod_seed =
        shruti::Rng::substream(seed, (std::uint64_t)i * 2 + 1).next_u64();
    const std::vector<int> truth = shruti::generate_sequence(raga, length, gen_seed, scale);

    shruti::PitchSequence obs;
    if (missing_rate > 0.0) {
      obs = shruti::apply_missing(truth, {missing_rate, pattern, mod_seed}, scale);
    } else {
      obs = shruti::corrupt(truth, {corruption_rate, noise_cents, westernize, mod_seed},
                            scale);
    }

    shruti::SequenceFile seq_file;
    seq_file.tonic_hz = tonic_hz;
    seq_file.raga_hint = raga.name();
    seq_file.sequence = obs;
    std::snprintf(name, sizeof(name), "seq_%03d.txt", i);
    const std::string seq_name = name;
    shruti::write_sequence_file(outdir + "/" + seq_name, seq_file);

    shruti::SequenceFile truth_file;
    truth_file.tonic_hz = tonic_hz;
    truth_file.raga_hint = raga.name();
    for (int id : truth) truth_file.sequence.items.push_back(scale.cent(id));
    std::snprintf(name, sizeof(name), "truth_%03d.txt", i);
    const std::string truth_name = name;
    shruti::write_sequence_file(outdir + "/" + truth_name, truth_file);

    manifest << seq_name << " " << truth_name << " " << gen_seed << " " << mod_seed << "\n";
  }
  std::ofstream mf(outdir + "/manifest.txt");
  if (!mf) throw shruti::ConfigError("cannot write manifest in " + outdir);
  mf << manifest.str();
  std::cout << "wrote " << count << " sequences to " << outdir << "\n";
  return 0;
}

int cmd_synth(const std::string& in_path, const std::string& out_path,
              double tonic_override, bool no_fade) {
  const shruti::SequenceFile in = shruti::read_sequence_file(in_path);
  if (in.sequence.has_missing())
    throw shruti::TaskError("input contains MISSING observations; complete it first");
  std::vector<double> cents;
  cents.reserve(in.sequence.size());
  for (const auto& o : in.sequence.items) cents.push_back(*o);
  shruti::SynthParams params;
  if (no_fade) params.fade_seconds = 0.0;
  const double tonic = tonic_override > 0.0 ? tonic_override : in.tonic_hz;
  const auto samples = shruti::synthesize_notes(cents, tonic, params);
  shruti::write_wav_file(out_path, samples, params.sample_rate, 2);
  std::cout << "wrote " << out_path << " (" << samples.size() / 2 << " frames)\n";
  return 0;
}

shruti::BenchmarkConfig parse_bench_config(const json& j, std::vector<std::string>& raga_names) {
  try {
    if (j.at("schema_version").get<int>() != 1)
      throw shruti::ConfigError("bench config: unsupported schema_version");
    shruti::BenchmarkConfig cfg;
    const std::string task = j.at("task").get<std::string>();
    if (task == "correction") cfg.task = shruti::Task::Correction;
    else if (task == "completion") cfg.task = shruti::Task::Completion;
    else throw shruti::ConfigError("bench config: unknown task " + task);
    cfg.models = j.at("models").get<std::vector<std::string>>();
    raga_names = j.at("ragas").get<std::vector<std::string>>();
    cfg.ragas = raga_names;
    cfg.rates = j.at("rates").get<std::vector<double>>();
    cfg.lengths = j.at("lengths").get<std::vector<int>>();
    cfg.runs_per_cell = j.at("runs_per_cell").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.sigma = j.value("sigma", 25.0);
    cfg.noise_cents = j.value("noise_cents", 4.0);
    cfg.westernize_fraction = j.value("westernize_fraction", 0.98);
    cfg.tala_cycle = j.value("tala_cycle", 16);
    for (const std::string& p : j.value("patterns", std::vector<std::string>{})) {
      if (p == "random") cfg.patterns.push_back(shruti::MissingPattern::Random);
      else if (p == "clustered") cfg.patterns.push_back(shruti::MissingPattern::Clustered);
      else if (p == "structured") cfg.patterns.push_back(shruti::MissingPattern::Structured);
      else throw shruti::ConfigError("bench config: unknown pattern " + p);
    }
    for (double r : cfg.rates)
      if (r < 0.1 || r > 0.5)
        throw shruti::ConfigError("bench config: rates must lie in [0.1, 0.5]");
    return cfg;
  } catch (const json::exception& e) {
    throw shruti::ConfigError(std::string("bench config: ") + e.what());
  }
}

int cmd_bench(const std::string& config, const std::string& out_dir,
              const std::string& data_dir, bool timing) {
  const std::string path = preset_path(data_dir, config);
  std::ifstream in(path);
  if (!in) throw shruti::ConfigError("cannot open bench config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw shruti::ConfigError(std::string("bench config: parse failure: ") + e.what());
  }
  std::vector<std::string> raga_names;
  shruti::BenchmarkConfig cfg = parse_bench_config(j, raga_names);
  cfg.record_timing = timing;
  std::vector<shruti::RagaSpec> ragas;
  for (const std::string& name : raga_names) ragas.push_back(load_named_raga(data_dir, name));

  const shruti::BenchmarkResult result = shruti::run_benchmark(cfg, ragas);

  fs::create_directories(out_dir);
  {
    std::ofstream rec(out_dir + "/records.jsonl");
    shruti::write_records(rec, result.records, cfg.record_timing);
  }
  {
    std::ofstream sum(out_dir + "/summary.txt");
    shruti::write_summary_table(sum, result.records);
  }
  if (cfg.rates.size() > 1) {
    std::ofstream csv(out_dir + "/robustness.csv");
    shruti::write_robustness_csv(csv, result.records);
  }
  {
    json stats;
    for (const auto& [model, metrics] : result.stats.by_model) {
      for (const auto& [metric, s] : metrics) {
        stats["by_model"][model][metric] = json{{"n", s.n},
                                                {"mean", s.mean},
                                                {"std_dev", s.std_dev},
                                                {"ci95_halfwidth", s.ci95_halfwidth}};
      }
    }
    for (const auto& [pair, d] : result.stats.cohens_d) stats["cohens_d"][pair] = d;
    stats["anova_f"] = result.stats.anova_f;
    write_report(out_dir + "/stats.json", stats);
  }
  std::cout << "wrote " << result.records.size() << " records to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ShrutiSense: symbolic microtonal pitch correction and completion"};
  app.require_subcommand(1);

  std::string data_dir = "data";
  app.add_option("--data-dir", data_dir, "directory holding ragas/ and bench/")
      ->capture_default_str();

  // correct
  auto* correct = app.add_subcommand("correct", "grammar-constrained pitch correction");
  std::string c_in, c_out, c_raga, c_engine = "fst", c_truth;
  double c_tonic = 0.0;
  EngineFlags c_flags;
  correct->add_option("--in", c_in, "input sequence file")->required();
  correct->add_option("--out", c_out, "output sequence file")->required();
  correct->add_option("--raga", c_raga, "raga name or config path")->required();
  correct->add_option("--engine", c_engine, "fst | hmm | nearest | random")
      ->capture_default_str();
  correct->add_option("--truth", c_truth, "ground-truth sequence file for metrics");
  correct->add_option("--tonic-hz", c_tonic, "override output tonic");
  add_engine_flags(correct, c_flags);

  // complete
  auto* complete = app.add_subcommand("complete", "fill MISSING observations");
  std::string m_in, m_out, m_raga, m_engine = "hmm", m_truth;
  double m_tonic = 0.0;
  int m_tala = 16;
  EngineFlags m_flags;
  complete->add_option("--in", m_in, "input sequence file")->required();
  complete->add_option("--out", m_out, "output sequence file")->required();
  complete->add_option("--raga", m_raga, "raga name or config path")->required();
  complete->add_option("--engine", m_engine, "fst | hmm")->capture_default_str();
  complete->add_option("--truth", m_truth, "ground-truth sequence file for metrics");
  complete->add_option("--tonic-hz", m_tonic, "override output tonic");
  complete->add_option("--tala-cycle", m_tala, "tala cycle length for FST completion")
      ->capture_default_str();
  add_engine_flags(complete, m_flags);

  // generate
  auto* generate = app.add_subcommand("generate", "synthetic dataset generation");
  std::string g_raga, g_outdir, g_pattern = "random";
  int g_length = 50, g_count = 10;
  std::uint64_t g_seed = 1;
  double g_corruption = 0.0, g_noise = 0.0, g_westernize = 0.0, g_missing = 0.0;
  double g_tonic = 261.63;
  bool g_force = false;
  generate->add_option("--raga", g_raga, "raga name or config path")->required();
  generate->add_option("--outdir", g_outdir, "output directory")->required();
  generate->add_option("--length", g_length, "notes per sequence")->capture_default_str();
  generate->add_option("--count", g_count, "number of sequences")->capture_default_str();
  generate->add_option("--seed", g_seed, "master seed")->capture_default_str();
  generate->add_option("--corruption-rate", g_corruption, "per-note substitution rate");
  generate->add_option("--noise-cents", g_noise, "uniform pitch noise half-width");
  generate->add_option("--westernize-fraction", g_westernize,
                       "fraction of substitutions snapped to 12-TET");
  generate->add_option("--missing-rate", g_missing, "fraction of notes blanked");
  generate->add_option("--pattern", g_pattern, "random | clustered | structured")
      ->capture_default_str();
  generate->add_option("--tonic-hz", g_tonic, "tonic for emitted files")
      ->capture_default_str();
  generate->add_flag("--force", g_force, "allow rates outside the preset range");

  // synth
  auto* synth = app.add_subcommand("synth", "render a sequence file as a WAV");
  std::string s_in, s_out;
  double s_tonic = 0.0;
  bool s_no_fade = false;
  synth->add_option("--in", s_in, "input sequence file")->required();
  synth->add_option("--out", s_out, "output WAV path")->required();
  synth->add_option("--tonic-hz", s_tonic, "override the file's tonic");
  synth->add_flag("--no-fade", s_no_fade, "disable the 5 ms per-note fades");

  // bench
  auto* bench = app.add_subcommand("bench", "run a benchmark preset");
  std::string b_config, b_out;
  bool b_timing = false;
  bench->add_option("--config", b_config, "preset name or config path")->required();
  bench->add_option("--out", b_out, "output directory")->required();
  bench->add_flag("--timing", b_timing, "include wall-clock times in records");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*correct)
      return cmd_correct(c_in, c_out, c_raga, c_engine, c_flags, c_truth, data_dir, c_tonic);
    if (*complete)
      return cmd_complete(m_in, m_out, m_raga, m_engine, m_flags, m_tala, m_truth,
                          data_dir, m_tonic);
    if (*generate)
      return cmd_generate(g_raga, g_length, g_count, g_seed, g_outdir, g_corruption,
                          g_noise, g_westernize, g_missing, g_pattern, g_force, g_tonic,
                          data_dir);
    if (*synth) return cmd_synth(s_in, s_out, s_tonic, s_no_fade);
    if (*bench) return cmd_bench(b_config, b_out, data_dir, b_timing);
  } catch (const shruti::TaskError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const shruti::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
