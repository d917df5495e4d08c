#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "shrutisense/errors.hpp"
#include "shrutisense/scale.hpp"

namespace shruti {

// Text sequence format:
//
//   shruti-seq 1
//   tonic_hz 261.63
//   reference tonic        (optional; "a440" converts values at parse time)
//   raga yaman             (optional hint)
//
//   0
//   204
//   MISSING
//   ...
//
// One observation per line after the blank line; values are cents relative
// to the tonic. Round-trips modulo whitespace.
struct SequenceFile {
  double tonic_hz = 261.63;
  std::string raga_hint;
  PitchSequence sequence;
};

inline constexpr int kSeqSchemaVersion = 1;

inline SequenceFile read_sequence(std::istream& in) {
  SequenceFile f;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("sequence file: empty input");
  std::istringstream magic(line);
  std::string tag;
  int version = 0;
  magic >> tag >> version;
  if (tag != "shruti-seq" || version != kSeqSchemaVersion)
    throw ConfigError("sequence file: bad header line \"" + line + "\"");

  bool a440_reference = false;
  while (std::getline(in, line)) {
    if (line.empty()) break;  // header/body separator
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "tonic_hz") {
      if (!(ls >> f.tonic_hz) || !(f.tonic_hz > 0.0))
        throw ConfigError("sequence file: bad tonic_hz");
    } else if (key == "raga") {
      ls >> f.raga_hint;
    } else if (key == "reference") {
      std::string ref;
      ls >> ref;
      if (ref == "a440") a440_reference = true;
      else if (ref != "tonic") throw ConfigError("sequence file: unknown reference " + ref);
    } else {
      throw ConfigError("sequence file: unknown header key " + key);
    }
  }

  // Values written against A4 = 440 Hz are rebased onto the tonic.
  const double offset = a440_reference
                            ? -kOctaveCents * std::log2(f.tonic_hz / 440.0)
                            : 0.0;
  while (std::getline(in, line)) {
    // trim
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    const std::string token = line.substr(b, e - b + 1);
    if (token == "MISSING") {
      f.sequence.items.push_back(std::nullopt);
      continue;
    }
    try {
      size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size() || !std::isfinite(v)) throw std::invalid_argument(token);
      f.sequence.items.push_back(v - offset);
    } catch (const std::exception&) {
      throw ConfigError("sequence file: bad observation \"" + token + "\"");
    }
  }
  if (f.sequence.items.empty()) throw ConfigError("sequence file: no observations");
  return f;
}

inline SequenceFile read_sequence_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("sequence file: cannot open " + path);
  return read_sequence(in);
}

inline void write_sequence(std::ostream& out, const SequenceFile& f) {
  out << "shruti-seq " << kSeqSchemaVersion << "\n";
  out << "tonic_hz " << f.tonic_hz << "\n";
  if (!f.raga_hint.empty()) out << "raga " << f.raga_hint << "\n";
  out << "\n";
  char buf[64];
  for (const auto& o : f.sequence.items) {
    if (!o.has_value()) {
      out << "MISSING\n";
    } else {
      std::snprintf(buf, sizeof(buf), "%.6g", *o);
      out << buf << "\n";
    }
  }
}

inline void write_sequence_file(const std::string& path, const SequenceFile& f) {
  std::ofstream out(path);
  if (!out) throw ConfigError("sequence file: cannot write " + path);
  write_sequence(out, f);
}

}  // namespace shruti
