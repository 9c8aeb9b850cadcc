// Copyright 2026 The vowelspace authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// End-to-end orchestration: corpus synthesis or ingestion via a plain-text
// manifest, per-token conditioning and excitation patterns, per-f0 distance
// matrices and MDS embeddings, within-cluster statistics, and deterministic
// CSV/report emission.  All outputs are written via temp-file + atomic rename
// so no partially written file survives an error.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "vowelspace/audio.hpp"
#include "vowelspace/auditory.hpp"
#include "vowelspace/error.hpp"
#include "vowelspace/geometry.hpp"
#include "vowelspace/stats.hpp"
#include "vowelspace/synth.hpp"
#include "vowelspace/vowel.hpp"

namespace vowelspace {

/// RMS target applied to every conditioned segment before analysis, dB re
/// full scale.  Interacts with the fixed -120 dBFS excitation floor: weak
/// spectral structure near the floor is clamped, which is part of the model.
inline constexpr double kAnalysisLevelDbFs = -102.0;

inline std::vector<double> default_f0_grid() {
  return {220.0, 330.0, 440.0, 523.0, 587.0, 698.0, 784.0, 880.0, 988.0, 1046.0};
}

// ---------------------------------------------------------------------------
// Formatting / parsing helpers.

namespace detail {

/// Full round-trip precision; every numeric field in data files uses this.
inline std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Compact form for file names and labels (grid values are small integers).
inline std::string fmt_compact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline double parse_double(const std::string& text, const std::string& where) {
  const char* s = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || end != s + text.size())
    throw DataError(where + ": expected a number, got '" + text + "'");
  return v;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

inline std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Writes content to path via a temporary sibling and atomic rename.
inline void write_text_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.flush())
      throw DataError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline void write_wav_atomic(const std::filesystem::path& path,
                             const SampleBuffer& buffer) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  write_wav(tmp, buffer, WavEncoding::Float32);
  fs::rename(tmp, path);
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline double parse_grid_value(const std::vector<double>& grid, double f0) {
  for (double g : grid)
    if (std::abs(g - f0) <= 1e-6) return g;
  return f0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Corpus manifest.

struct ManifestEntry {
  std::string wav_path;  // relative to the manifest's directory unless absolute
  Vowel vowel = Vowel::I;
  std::string speaker_id;
  double target_f0 = 0.0;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;
  int sample_rate = 44100;
  std::vector<double> grid = default_f0_grid();
};

inline std::vector<std::string> manifest_speakers(const CorpusManifest& m) {
  std::set<std::string> ids;
  for (const auto& e : m.entries) ids.insert(e.speaker_id);
  return {ids.begin(), ids.end()};
}

/// Complete-grid invariant: every (vowel, speaker, f0) cell exactly once.
/// Throws DataError listing every missing or duplicated cell.
inline void validate_manifest(const CorpusManifest& m) {
  if (m.grid.empty()) throw DataError("manifest grid is empty");
  if (m.entries.empty()) throw DataError("manifest has no entries");
  if (m.sample_rate <= 0) throw DataError("manifest sample rate must be positive");
  const auto speakers = manifest_speakers(m);

  std::map<std::tuple<double, int, std::string>, int> count;
  std::vector<std::string> bad;
  for (const auto& e : m.entries) {
    const double g = detail::parse_grid_value(m.grid, e.target_f0);
    bool on_grid = false;
    for (double v : m.grid) on_grid = on_grid || v == g;
    if (!on_grid) {
      bad.push_back("entry off grid: vowel=" + std::string(to_label(e.vowel)) +
                    " speaker=" + e.speaker_id +
                    " f0=" + detail::fmt_compact(e.target_f0));
      continue;
    }
    ++count[{g, static_cast<int>(e.vowel), e.speaker_id}];
  }
  for (double f0 : m.grid)
    for (Vowel v : kAllVowels)
      for (const auto& s : speakers) {
        const int c = count[{f0, static_cast<int>(v), s}];
        if (c == 1) continue;
        bad.push_back(std::string(c == 0 ? "missing" : "duplicate") +
                      " cell: vowel=" + std::string(to_label(v)) +
                      " speaker=" + s + " f0=" + detail::fmt_compact(f0));
      }
  if (!bad.empty()) {
    std::string msg = "manifest incomplete (" + std::to_string(bad.size()) +
                      " problems):";
    for (const auto& b : bad) msg += "\n  " + b;
    throw DataError(msg);
  }
}

inline void write_manifest(const std::filesystem::path& path,
                           const CorpusManifest& m) {
  std::ostringstream out;
  out << "# corpus manifest: one token per row, paths relative to this file\n";
  out << "sample_rate\t" << m.sample_rate << "\n";
  out << "grid\t";
  for (std::size_t i = 0; i < m.grid.size(); ++i)
    out << (i ? "," : "") << detail::fmt_full(m.grid[i]);
  out << "\n";
  out << "wav_path\tvowel\tspeaker\tf0\n";
  for (const auto& e : m.entries)
    out << e.wav_path << '\t' << to_label(e.vowel) << '\t' << e.speaker_id
        << '\t' << detail::fmt_full(e.target_f0) << "\n";
  detail::write_text_atomic(path, out.str());
}

inline CorpusManifest read_manifest(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  CorpusManifest m;
  m.grid.clear();
  bool have_rate = false, have_grid = false, have_header = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    const std::string line = detail::strip(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    const auto fields = detail::split(lines[i], '\t');
    if (!have_rate) {
      if (fields.size() != 2 || fields[0] != "sample_rate")
        throw DataError(where + ": expected 'sample_rate\\t<hz>'");
      m.sample_rate = static_cast<int>(detail::parse_double(fields[1], where));
      have_rate = true;
    } else if (!have_grid) {
      if (fields.size() != 2 || fields[0] != "grid")
        throw DataError(where + ": expected 'grid\\t<comma-separated f0 list>'");
      for (const auto& tok : detail::split(fields[1], ','))
        m.grid.push_back(detail::parse_double(detail::strip(tok), where));
      have_grid = true;
    } else if (!have_header) {
      if (fields.size() != 4 || fields[0] != "wav_path")
        throw DataError(where + ": expected 'wav_path\\tvowel\\tspeaker\\tf0'");
      have_header = true;
    } else {
      if (fields.size() != 4)
        throw DataError(where + ": expected 4 tab-separated fields, got " +
                        std::to_string(fields.size()));
      ManifestEntry e;
      e.wav_path = fields[0];
      e.vowel = vowel_from_label(fields[1]);
      e.speaker_id = fields[2];
      e.target_f0 =
          detail::parse_grid_value(m.grid, detail::parse_double(fields[3], where));
      if (e.wav_path.empty()) throw DataError(where + ": empty wav path");
      if (e.speaker_id.empty()) throw DataError(where + ": empty speaker id");
      m.entries.push_back(std::move(e));
    }
  }
  if (!have_header) throw DataError(path.string() + ": truncated manifest");
  return m;
}

// ---------------------------------------------------------------------------
// Run configuration.

enum class AveragingMode { Spectra, DistanceMatrix };

struct RunConfig {
  FilterbankSpec filterbank{};
  std::string middle_ear_path;  // empty -> built-in table
  std::string profiles_path;    // empty -> built-in speakers
  double fade_seconds = 0.020;
  double segment_seconds = 0.250;
  double breakpoint_hz = 523.0;
  double fdr_q = 0.05;
  std::vector<ClusterDef> clusters = default_clusters();
  AveragingMode averaging = AveragingMode::Spectra;
  std::string output_dir = "out";
  std::vector<double> grid = default_f0_grid();
  int sample_rate = 44100;
  double token_seconds = 0.5;
  double level_dbfs = kAnalysisLevelDbFs;
  bool timestamp = false;  // when true, report carries a generation-time line
};

inline void validate_config(const RunConfig& cfg) {
  if (!(cfg.segment_seconds > 2.0 * cfg.fade_seconds))
    throw DataError("segment duration must exceed twice the fade duration");
  if (!(cfg.fdr_q > 0.0 && cfg.fdr_q < 1.0))
    throw DataError("FDR level q must lie in (0, 1)");
  if (cfg.fade_seconds < 0.0) throw DataError("fade duration must be >= 0");
  if (cfg.grid.empty()) throw DataError("f0 grid is empty");
  for (double f0 : cfg.grid)
    if (!(f0 > 0.0)) throw DataError("grid f0 values must be positive");
  if (cfg.sample_rate <= 0) throw DataError("sample rate must be positive");
  if (!(cfg.token_seconds >= cfg.segment_seconds))
    throw DataError("token duration must cover the analysis segment");
  if (!(cfg.breakpoint_hz > 0.0)) throw DataError("breakpoint must be positive");
  if (cfg.output_dir.empty()) throw DataError("output directory not set");
  validate_clusters(cfg.clusters);
}

inline std::vector<double> parse_grid_list(const std::string& text) {
  std::vector<double> grid;
  for (const auto& tok : detail::split(text, ',')) {
    const std::string t = detail::strip(tok);
    if (t.empty()) continue;
    grid.push_back(detail::parse_double(t, "grid list"));
  }
  return grid;
}

/// Key/value config file: one `key value` pair per line, '#' comments.
/// Unknown keys are errors; flags parsed by the CLI override these values.
inline RunConfig load_run_config(const std::filesystem::path& path,
                                 RunConfig cfg = RunConfig{}) {
  const auto lines = detail::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    std::string line = detail::strip(lines[i]);
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = detail::strip(line.substr(0, hash));
    if (line.empty()) continue;
    const std::size_t sp = line.find_first_of(" \t");
    if (sp == std::string::npos)
      throw DataError(where + ": expected 'key value'");
    const std::string key = line.substr(0, sp);
    const std::string value = detail::strip(line.substr(sp + 1));
    if (key == "out") cfg.output_dir = value;
    else if (key == "grid") cfg.grid = parse_grid_list(value);
    else if (key == "breakpoint") cfg.breakpoint_hz = detail::parse_double(value, where);
    else if (key == "q") cfg.fdr_q = detail::parse_double(value, where);
    else if (key == "fade_ms") cfg.fade_seconds = detail::parse_double(value, where) / 1000.0;
    else if (key == "segment_ms") cfg.segment_seconds = detail::parse_double(value, where) / 1000.0;
    else if (key == "token_ms") cfg.token_seconds = detail::parse_double(value, where) / 1000.0;
    else if (key == "sample_rate") cfg.sample_rate = static_cast<int>(detail::parse_double(value, where));
    else if (key == "level_dbfs") cfg.level_dbfs = detail::parse_double(value, where);
    else if (key == "channels") cfg.filterbank.num_channels = static_cast<std::size_t>(detail::parse_double(value, where));
    else if (key == "min_frequency") cfg.filterbank.min_frequency = detail::parse_double(value, where);
    else if (key == "max_frequency") cfg.filterbank.max_frequency = detail::parse_double(value, where);
    else if (key == "bandwidth_scale") cfg.filterbank.bandwidth_scale = detail::parse_double(value, where);
    else if (key == "middle_ear") cfg.middle_ear_path = value;
    else if (key == "profiles") cfg.profiles_path = value;
    else if (key == "averaging") {
      if (value == "spectra") cfg.averaging = AveragingMode::Spectra;
      else if (value == "distmat") cfg.averaging = AveragingMode::DistanceMatrix;
      else throw DataError(where + ": averaging must be 'spectra' or 'distmat'");
    } else if (key == "timestamp") {
      if (value == "on") cfg.timestamp = true;
      else if (value == "off") cfg.timestamp = false;
      else throw DataError(where + ": timestamp must be 'on' or 'off'");
    } else {
      throw DataError(where + ": unknown config key '" + key + "'");
    }
  }
  return cfg;
}

inline MiddleEarWeighting config_middle_ear(const RunConfig& cfg) {
  return cfg.middle_ear_path.empty() ? default_middle_ear()
                                     : load_middle_ear(cfg.middle_ear_path);
}

inline std::vector<SpeakerProfile> config_profiles(const RunConfig& cfg) {
  return cfg.profiles_path.empty() ? builtin_speaker_profiles()
                                   : load_speaker_profiles(cfg.profiles_path);
}

// ---------------------------------------------------------------------------
// Token conditioning (also applied to ingested recordings).

/// Center segment, raised-cosine fades, fixed RMS. The analysis never sees
/// token onsets/offsets or the recording level.
inline SampleBuffer condition_token(const SampleBuffer& raw,
                                    const RunConfig& cfg) {
  SampleBuffer seg = extract_center_segment(raw, cfg.segment_seconds);
  seg = apply_raised_cosine_fades(seg, cfg.fade_seconds);
  return normalize_rms(seg, std::pow(10.0, cfg.level_dbfs / 20.0));
}

// ---------------------------------------------------------------------------
// Synthesis stage.

struct SynthesisResult {
  CorpusManifest manifest;
  std::filesystem::path manifest_path;
};

/// Synthesizes the full grid x speakers x vowels corpus under
/// output_dir/tokens and writes output_dir/manifest.txt.  Deterministic:
/// fixed seeds, fixed iteration order, float WAV samples.  f0-verification
/// failures are aggregated and reported per cell.
inline SynthesisResult cmd_synthesize(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  validate_config(cfg);
  const auto profiles = config_profiles(cfg);
  if (profiles.empty()) throw DataError("no speaker profiles");

  const fs::path out_dir{cfg.output_dir};
  fs::create_directories(out_dir / "tokens");

  CorpusManifest manifest;
  manifest.sample_rate = cfg.sample_rate;
  manifest.grid = cfg.grid;
  std::vector<double> grid = cfg.grid;
  std::sort(grid.begin(), grid.end());

  std::vector<std::string> failures;
  for (double f0 : grid)
    for (const auto& profile : profiles)
      for (Vowel v : kAllVowels) {
        try {
          const VowelToken token = synthesize_vowel(
              v, f0, profile, cfg.token_seconds, cfg.sample_rate);
          const std::string name = profile.speaker_id + "_" +
                                   std::string(to_label(v)) + "_" +
                                   detail::fmt_compact(f0) + ".wav";
          detail::write_wav_atomic(out_dir / "tokens" / name, token.buffer);
          manifest.entries.push_back(
              {"tokens/" + name, v, profile.speaker_id, f0});
        } catch (const DataError& err) {
          failures.push_back("vowel=" + std::string(to_label(v)) +
                             " speaker=" + profile.speaker_id +
                             " f0=" + detail::fmt_compact(f0) + ": " +
                             err.what());
        }
      }
  if (!failures.empty()) {
    std::string msg = "f0 verification failed for " +
                      std::to_string(failures.size()) + " token(s):";
    for (const auto& f : failures) msg += "\n  " + f;
    throw DataError(msg);
  }

  const fs::path manifest_path = out_dir / "manifest.txt";
  write_manifest(manifest_path, manifest);
  return {std::move(manifest), manifest_path};
}

// ---------------------------------------------------------------------------
// Analysis stage.

struct AnalysisResult {
  std::vector<double> grid;  // ascending
  std::vector<std::string> speakers;
  std::vector<SpectrumCell> cells;  // per-token conditioned spectra
  // Per f0 (ascending), per vowel in kAllVowels order: spectra averaged
  // across speakers (plot data in both averaging modes).
  std::map<double, std::vector<CochleaScaledSpectrum>> mean_spectra;
  std::map<double, DistanceMatrix> distance_matrices;
  std::map<double, MdsEmbedding> embeddings;  // oriented/aligned to lowest f0
  std::map<double, double> axis_ratios;
  std::vector<DistanceObservation> observations;
  std::vector<DistanceSummary> summaries;
  bool has_fit = false;
  PiecewiseFit fit;
  bool has_tests = false;
  PairwiseTestResult tests;
};

namespace detail {

/// Reads one manifest token, conditions it, re-verifies f0 (5% tolerance,
/// same gate as synthesis), and computes its excitation pattern.
inline SpectrumCell analyze_token(const std::filesystem::path& manifest_dir,
                                  const ManifestEntry& entry,
                                  const RunConfig& cfg, const Filterbank& fb,
                                  const MiddleEarWeighting& me) {
  namespace fs = std::filesystem;
  fs::path wav{entry.wav_path};
  if (wav.is_relative()) wav = manifest_dir / wav;
  const SampleBuffer raw = read_wav(wav);
  const SampleBuffer seg = condition_token(raw, cfg);
  const double measured =
      estimate_f0(seg, entry.target_f0 / 1.3, entry.target_f0 * 1.3);
  if (std::abs(measured - entry.target_f0) / entry.target_f0 > kF0Tolerance)
    throw DataError("measured f0 " + fmt_compact(measured) +
                    " Hz outside 5% of target");
  return {entry.vowel, entry.speaker_id, entry.target_f0,
          normalize_spectrum(excitation_pattern(seg, fb, me))};
}

inline DistanceMatrix average_matrices(const std::vector<DistanceMatrix>& mats) {
  DistanceMatrix avg = mats.front();
  for (std::size_t k = 1; k < mats.size(); ++k) {
    if (mats[k].labels != avg.labels)
      throw DataError("distance matrices disagree on labels");
    for (std::size_t i = 0; i < avg.values.size(); ++i)
      avg.values[i] += mats[k].values[i];
  }
  const double n = static_cast<double>(mats.size());
  for (double& v : avg.values) v /= n;
  return avg;
}

}  // namespace detail

/// Full analysis pass over a complete manifest.  Grid completeness is
/// validated before any signal processing; per-token failures carry their
/// (vowel, speaker, f0) cell coordinates and are aggregated.
inline AnalysisResult analyze_corpus(const CorpusManifest& manifest,
                                     const std::filesystem::path& manifest_dir,
                                     const RunConfig& cfg) {
  validate_config(cfg);
  validate_manifest(manifest);

  AnalysisResult r;
  r.grid = manifest.grid;
  std::sort(r.grid.begin(), r.grid.end());
  r.speakers = manifest_speakers(manifest);

  const Filterbank fb = make_filterbank(cfg.filterbank);
  const MiddleEarWeighting me = config_middle_ear(cfg);

  // Deterministic cell order: f0 ascending, then speaker, then vowel.
  std::vector<const ManifestEntry*> order;
  order.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) order.push_back(&e);
  std::sort(order.begin(), order.end(),
            [](const ManifestEntry* a, const ManifestEntry* b) {
              return std::tuple(a->target_f0, a->speaker_id,
                                static_cast<int>(a->vowel)) <
                     std::tuple(b->target_f0, b->speaker_id,
                                static_cast<int>(b->vowel));
            });

  std::vector<std::string> failures;
  for (const ManifestEntry* e : order) {
    try {
      r.cells.push_back(detail::analyze_token(manifest_dir, *e, cfg, fb, me));
    } catch (const DataError& err) {
      failures.push_back("vowel=" + std::string(to_label(e->vowel)) +
                         " speaker=" + e->speaker_id +
                         " f0=" + detail::fmt_compact(e->target_f0) + ": " +
                         err.what());
    }
  }
  if (!failures.empty()) {
    std::string msg = std::to_string(failures.size()) +
                      " token(s) failed analysis:";
    for (const auto& f : failures) msg += "\n  " + f;
    throw DataError(msg);
  }

  // Per-f0 mean spectra and distance matrices.
  std::vector<std::string> labels;
  for (Vowel v : kAllVowels) labels.emplace_back(to_label(v));
  for (double f0 : r.grid) {
    std::vector<CochleaScaledSpectrum> means;
    for (Vowel v : kAllVowels) {
      std::vector<CochleaScaledSpectrum> group;
      for (const auto& s : r.speakers)
        for (const auto& cell : r.cells)
          if (cell.f0 == f0 && cell.vowel == v && cell.speaker_id == s)
            group.push_back(cell.spectrum);
      means.push_back(average_spectra(group));
    }
    r.mean_spectra[f0] = means;

    if (cfg.averaging == AveragingMode::Spectra) {
      r.distance_matrices[f0] = pairwise_distances(means, labels);
    } else {
      std::vector<DistanceMatrix> per_speaker;
      for (const auto& s : r.speakers) {
        std::vector<CochleaScaledSpectrum> own;
        for (Vowel v : kAllVowels)
          for (const auto& cell : r.cells)
            if (cell.f0 == f0 && cell.vowel == v && cell.speaker_id == s)
              own.push_back(cell.spectrum);
        per_speaker.push_back(pairwise_distances(own, labels));
      }
      r.distance_matrices[f0] = detail::average_matrices(per_speaker);
    }
  }

  // MDS, oriented at the lowest f0 and Procrustes-aligned across the grid.
  const double ref_f0 = r.grid.front();
  MdsEmbedding ref = classical_mds(r.distance_matrices.at(ref_f0), 2);
  ref = orient_embedding(ref, "i", "a");
  r.embeddings[ref_f0] = ref;
  r.axis_ratios[ref_f0] = axis_ratio(ref);
  for (double f0 : r.grid) {
    if (f0 == ref_f0) continue;
    MdsEmbedding e = classical_mds(r.distance_matrices.at(f0), 2);
    e = procrustes_align(ref, e);
    r.axis_ratios[f0] = axis_ratio(e);
    r.embeddings[f0] = std::move(e);
  }

  // Within-cluster distance statistics.
  r.observations = within_cluster_distances(r.cells, cfg.clusters);
  r.summaries = summarize_distances(r.observations);

  // The piecewise fit needs slope information on both sides of the break.
  std::size_t below = 0, above = 0;
  for (double f0 : r.grid) (f0 > cfg.breakpoint_hz ? above : below) += 1;
  if (below >= 2 && above >= 2) {
    r.fit = piecewise_fit(r.observations, cfg.breakpoint_hz);
    r.has_fit = true;
  }
  if (r.grid.size() >= 2) {
    r.tests = pairwise_f0_tests(r.observations, ref_f0, cfg.fdr_q,
                                PairedTestKind::TTest);
    r.has_tests = true;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Report rendering (shared by cmd_analyze and cmd_report so the regenerated
// report is byte-identical).

struct ReportData {
  std::vector<DistanceSummary> summaries;        // ascending f0
  std::vector<DistanceObservation> observations; // for per-cluster medians
  std::vector<std::pair<double, double>> axis_ratios;  // (f0, ratio) ascending
  bool has_fit = false;
  PiecewiseFit fit;
  bool has_tests = false;
  PairwiseTestResult tests;
  bool has_ref_embedding = false;
  double ref_f0 = 0.0;
  MdsEmbedding ref_embedding;
};

namespace detail {

inline std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline const DistanceSummary* find_summary(
    const std::vector<DistanceSummary>& summaries, double f0) {
  for (const auto& s : summaries)
    if (std::abs(s.f0 - f0) <= 1e-6) return &s;
  return nullptr;
}

inline void render_check(std::ostringstream& out, bool ok,
                         const std::string& text) {
  out << "  [" << (ok ? "PASS" : "FAIL") << "] " << text << "\n";
}

}  // namespace detail

/// Deterministic plain-text run report.  A generation-time header line is
/// emitted only when cfg.timestamp is set.
inline std::string render_report(const ReportData& d, const RunConfig& cfg) {
  std::ostringstream out;
  out << "vowel space run report\n";
  out << "======================\n";
  if (cfg.timestamp) {
    const std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%d %H:%M:%S UTC",
                  std::gmtime(&now));
    out << "generated: " << buf << "\n";
  }
  out << "averaging: "
      << (cfg.averaging == AveragingMode::Spectra ? "spectra"
                                                  : "distance-matrix")
      << "; breakpoint: " << detail::fmt_compact(cfg.breakpoint_hz)
      << " Hz; FDR q: " << detail::fmt_compact(cfg.fdr_q) << "\n\n";

  out << "within-cluster distance by f0 (dB units):\n";
  out << "  f0_hz      n   median       q1       q3\n";
  for (const auto& s : d.summaries) {
    char line[128];
    std::snprintf(line, sizeof line, "  %5.0f  %5zu  %7.3f  %7.3f  %7.3f\n",
                  s.f0, s.n, s.median, s.q1, s.q3);
    out << line;
  }
  out << "\n";

  // Per-cluster medians at the three landmark conditions.
  const std::vector<double> landmarks{220.0, 523.0, 880.0};
  std::vector<std::string> cluster_names;
  for (const auto& o : d.observations)
    if (std::find(cluster_names.begin(), cluster_names.end(), o.cluster) ==
        cluster_names.end())
      cluster_names.push_back(o.cluster);
  out << "cluster median distance at landmark f0 (dB units):\n";
  out << "  cluster";
  for (double f0 : landmarks) out << detail::fmt("  %8.0f", f0);
  out << "\n";
  for (const auto& name : cluster_names) {
    char head[32];
    std::snprintf(head, sizeof head, "  %-7s", name.c_str());
    out << head;
    for (double f0 : landmarks) {
      std::vector<double> vals;
      for (const auto& o : d.observations)
        if (o.cluster == name && std::abs(o.f0 - f0) <= 1e-6)
          vals.push_back(o.distance);
      if (vals.empty())
        out << "         -";
      else
        out << detail::fmt("  %8.3f", detail::median_of(vals));
    }
    out << "\n";
  }
  out << "\n";

  out << "axis ratio (dim2/dim1 extent) by f0:\n";
  for (const auto& [f0, ratio] : d.axis_ratios)
    out << detail::fmt("  %5.0f", f0) << detail::fmt("  %7.4f", ratio) << "\n";
  out << "\n";

  if (d.has_fit) {
    const auto& f = d.fit;
    out << "piecewise linear mixed fit (breakpoint "
        << detail::fmt_compact(f.breakpoint) << " Hz):\n";
    out << "  beta0 (intercept)        " << detail::fmt("%10.5f", f.beta0)
        << " dB\n";
    out << "  beta1 (slope below)      " << detail::fmt("%10.5f", f.beta1)
        << " dB/Hz  se " << detail::fmt("%.5f", f.se_beta1) << "  p "
        << detail::fmt("%.4g", f.p_beta1) << "\n";
    out << "  beta2 (slope change)     " << detail::fmt("%10.5f", f.beta2)
        << " dB/Hz  se " << detail::fmt("%.5f", f.se_beta2) << "  p "
        << detail::fmt("%.4g", f.p_beta2) << "\n";
    out << "  residual variance        "
        << detail::fmt("%10.5f", f.residual_variance) << " dB^2\n";
    out << "  speaker intercept var    "
        << detail::fmt("%10.5f", f.intercept_variance) << " dB^2\n";
    for (const auto& [speaker, delta] : f.speaker_intercepts)
      out << "  intercept[" << speaker << "]  "
          << detail::fmt("%10.5f", delta) << " dB\n";
    out << "\n";
  }

  if (d.has_tests) {
    const auto& t = d.tests;
    out << "paired tests vs " << detail::fmt_compact(t.reference_f0)
        << " Hz (BH-FDR q " << detail::fmt_compact(t.fdr.q) << "):\n";
    out << "  f0_hz      n   statistic      raw_p      adj_p  rejected\n";
    for (std::size_t i = 0; i < t.tests.size(); ++i) {
      char line[160];
      std::snprintf(line, sizeof line,
                    "  %5.0f  %5zu  %10.4f  %9.4g  %9.4g  %s\n",
                    t.tests[i].f0, t.tests[i].n, t.tests[i].statistic,
                    t.fdr.raw_p[i], t.fdr.adjusted_p[i],
                    t.fdr.rejected[i] ? "yes" : "no");
      out << line;
    }
    out << "\n";
  }

  // Qualitative structure checks (the headline findings).
  out << "checks:\n";
  const DistanceSummary* s220 = detail::find_summary(d.summaries, 220.0);
  const DistanceSummary* s880 = detail::find_summary(d.summaries, 880.0);
  if (s220 && s880)
    detail::render_check(
        out, s880->median < 0.5 * s220->median,
        "median distance collapses: med(880) " +
            detail::fmt("%.3f", s880->median) + " < half of med(220) " +
            detail::fmt("%.3f", s220->median));
  if (d.has_fit) {
    detail::render_check(out,
                         d.fit.beta2 < 0.0 && d.fit.p_beta2 < 0.05,
                         "slope change above break negative and significant "
                         "(beta2 " +
                             detail::fmt("%.5f", d.fit.beta2) + ", p " +
                             detail::fmt("%.4g", d.fit.p_beta2) + ")");
    detail::render_check(out, d.fit.p_beta1 >= 0.05,
                         "slope below break not significant (beta1 " +
                             detail::fmt("%.5f", d.fit.beta1) + ", p " +
                             detail::fmt("%.4g", d.fit.p_beta1) + ")");
  }
  if (d.has_tests) {
    bool low_held = true, high_rejected = true;
    for (std::size_t i = 0; i < d.tests.tests.size(); ++i) {
      const double f0 = d.tests.tests[i].f0;
      if (f0 <= 440.0 + 1e-6) low_held = low_held && !d.tests.fdr.rejected[i];
      if (f0 >= 523.0 - 1e-6)
        high_rejected = high_rejected && d.tests.fdr.rejected[i];
    }
    detail::render_check(out, low_held && high_rejected,
                         "FDR pattern: conditions through 440 Hz retained, "
                         "523 Hz and above rejected");
  }
  if (d.axis_ratios.size() >= 2) {
    const auto& first = d.axis_ratios.front();
    const auto& last = d.axis_ratios.back();
    detail::render_check(
        out, last.second < first.second,
        "axis ratio shrinks: " + detail::fmt("%.4f", last.second) + " at " +
            detail::fmt_compact(last.first) + " Hz < " +
            detail::fmt("%.4f", first.second) + " at " +
            detail::fmt_compact(first.first) + " Hz");
  }
  if (d.has_ref_embedding) {
    const auto hull = convex_hull_labels(d.ref_embedding);
    bool corners = true;
    for (const char* v : {"i", "a", "u"})
      corners = corners &&
                std::find(hull.begin(), hull.end(), v) != hull.end();
    std::string hull_text;
    for (const auto& h : hull) hull_text += (hull_text.empty() ? "" : " ") + h;
    detail::render_check(out, corners,
                         "point vowels /i a u/ on the hull at " +
                             detail::fmt_compact(d.ref_f0) + " Hz (hull: " +
                             hull_text + ")");
  }
  {
    const DistanceSummary* top[3] = {
        detail::find_summary(d.summaries, 880.0),
        detail::find_summary(d.summaries, 988.0),
        detail::find_summary(d.summaries, 1046.0)};
    if (top[0] && top[1] && top[2]) {
      double lo = top[0]->median, hi = top[0]->median;
      for (const auto* s : top) {
        lo = std::min(lo, s->median);
        hi = std::max(hi, s->median);
      }
      detail::render_check(out, hi <= lo * 1.25,
                           "distance floor: medians at 880/988/1046 Hz "
                           "within 25% of each other (" +
                               detail::fmt("%.3f", lo) + " .. " +
                               detail::fmt("%.3f", hi) + ")");
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// CSV emission for the analysis bundle.

namespace detail {

inline std::string csv_spectra(const std::vector<CochleaScaledSpectrum>& means) {
  std::ostringstream out;
  out << "vowel,center_hz,level_db\n";
  for (std::size_t vi = 0; vi < kAllVowels.size(); ++vi) {
    const auto& sp = means[vi];
    for (std::size_t c = 0; c < sp.center_frequencies.size(); ++c)
      out << to_label(kAllVowels[vi]) << ','
          << fmt_full(sp.center_frequencies[c]) << ','
          << fmt_full(sp.levels_db[c]) << "\n";
  }
  return out.str();
}

inline std::string csv_distance_matrix(const DistanceMatrix& m) {
  std::ostringstream out;
  out << "label";
  for (const auto& l : m.labels) out << ',' << l;
  out << "\n";
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    out << m.labels[i];
    for (std::size_t j = 0; j < m.labels.size(); ++j)
      out << ',' << fmt_full(m.at(i, j));
    out << "\n";
  }
  return out.str();
}

inline std::string csv_embedding(const MdsEmbedding& e) {
  std::ostringstream out;
  out << "label,dim1,dim2\n";
  for (std::size_t i = 0; i < e.labels.size(); ++i)
    out << e.labels[i] << ',' << fmt_full(e.coord(i, 0)) << ','
        << fmt_full(e.coord(i, 1)) << "\n";
  return out.str();
}

}  // namespace detail

/// Writes the full results bundle (CSVs + report.txt) under cfg.output_dir.
inline void write_analysis_outputs(const AnalysisResult& r,
                                   const RunConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path out{cfg.output_dir};

  for (double f0 : r.grid) {
    const std::string tag = detail::fmt_compact(f0);
    detail::write_text_atomic(out / "spectra" / ("spectra_" + tag + ".csv"),
                              detail::csv_spectra(r.mean_spectra.at(f0)));
    detail::write_text_atomic(
        out / "distances" / ("distance_matrix_" + tag + ".csv"),
        detail::csv_distance_matrix(r.distance_matrices.at(f0)));
    detail::write_text_atomic(out / "mds" / ("mds_coords_" + tag + ".csv"),
                              detail::csv_embedding(r.embeddings.at(f0)));
  }

  {
    std::ostringstream os;
    os << "f0,axis_ratio\n";
    for (double f0 : r.grid)
      os << detail::fmt_full(f0) << ','
         << detail::fmt_full(r.axis_ratios.at(f0)) << "\n";
    detail::write_text_atomic(out / "axis_ratios.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "f0,speaker,cluster,vowel_a,vowel_b,distance\n";
    for (const auto& o : r.observations)
      os << detail::fmt_full(o.f0) << ',' << o.speaker_id << ',' << o.cluster
         << ',' << to_label(o.pair.first) << ',' << to_label(o.pair.second)
         << ',' << detail::fmt_full(o.distance) << "\n";
    detail::write_text_atomic(out / "observations.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "f0,n,median,q1,q3\n";
    for (const auto& s : r.summaries)
      os << detail::fmt_full(s.f0) << ',' << s.n << ','
         << detail::fmt_full(s.median) << ',' << detail::fmt_full(s.q1) << ','
         << detail::fmt_full(s.q3) << "\n";
    detail::write_text_atomic(out / "summaries.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "key,value\n";
    if (r.has_fit) {
      const auto& f = r.fit;
      os << "breakpoint," << detail::fmt_full(f.breakpoint) << "\n";
      os << "beta0," << detail::fmt_full(f.beta0) << "\n";
      os << "beta1," << detail::fmt_full(f.beta1) << "\n";
      os << "beta2," << detail::fmt_full(f.beta2) << "\n";
      os << "se_beta1," << detail::fmt_full(f.se_beta1) << "\n";
      os << "se_beta2," << detail::fmt_full(f.se_beta2) << "\n";
      os << "p_beta1," << detail::fmt_full(f.p_beta1) << "\n";
      os << "p_beta2," << detail::fmt_full(f.p_beta2) << "\n";
      os << "residual_variance," << detail::fmt_full(f.residual_variance)
         << "\n";
      os << "intercept_variance," << detail::fmt_full(f.intercept_variance)
         << "\n";
      for (const auto& [speaker, delta] : f.speaker_intercepts)
        os << "intercept:" << speaker << ',' << detail::fmt_full(delta)
           << "\n";
    } else {
      os << "degenerate,1\n";
    }
    detail::write_text_atomic(out / "fit.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "reference_f0,q,f0,n,statistic,raw_p,adjusted_p,rejected\n";
    if (r.has_tests)
      for (std::size_t i = 0; i < r.tests.tests.size(); ++i) {
        const auto& t = r.tests.tests[i];
        os << detail::fmt_full(r.tests.reference_f0) << ','
           << detail::fmt_full(r.tests.fdr.q) << ',' << detail::fmt_full(t.f0)
           << ',' << t.n << ',' << detail::fmt_full(t.statistic) << ','
           << detail::fmt_full(t.raw_p) << ','
           << detail::fmt_full(r.tests.fdr.adjusted_p[i]) << ','
           << (r.tests.fdr.rejected[i] ? 1 : 0) << "\n";
      }
    detail::write_text_atomic(out / "fdr.csv", os.str());
  }

  ReportData d;
  d.summaries = r.summaries;
  d.observations = r.observations;
  for (double f0 : r.grid) d.axis_ratios.emplace_back(f0, r.axis_ratios.at(f0));
  d.has_fit = r.has_fit;
  d.fit = r.fit;
  d.has_tests = r.has_tests;
  d.tests = r.tests;
  d.has_ref_embedding = !r.grid.empty();
  if (d.has_ref_embedding) {
    d.ref_f0 = r.grid.front();
    d.ref_embedding = r.embeddings.at(d.ref_f0);
  }
  detail::write_text_atomic(out / "report.txt", render_report(d, cfg));
}

inline AnalysisResult cmd_analyze(const std::filesystem::path& manifest_path,
                                  const RunConfig& cfg) {
  const CorpusManifest manifest = read_manifest(manifest_path);
  const std::filesystem::path dir = manifest_path.has_parent_path()
                                        ? manifest_path.parent_path()
                                        : std::filesystem::path{"."};
  AnalysisResult r = analyze_corpus(manifest, dir, cfg);
  write_analysis_outputs(r, cfg);
  return r;
}

// ---------------------------------------------------------------------------
// Spectra export (long-format CSV for selected cells).

struct SpectraSelector {
  std::vector<Vowel> vowels;         // empty -> all
  std::vector<std::string> speakers; // empty -> all
  std::vector<double> f0s;           // empty -> all
};

inline bool selector_matches(const SpectraSelector& sel,
                             const ManifestEntry& e) {
  if (!sel.vowels.empty() &&
      std::find(sel.vowels.begin(), sel.vowels.end(), e.vowel) ==
          sel.vowels.end())
    return false;
  if (!sel.speakers.empty() &&
      std::find(sel.speakers.begin(), sel.speakers.end(), e.speaker_id) ==
          sel.speakers.end())
    return false;
  if (!sel.f0s.empty()) {
    bool any = false;
    for (double f0 : sel.f0s) any = any || std::abs(f0 - e.target_f0) <= 1e-6;
    if (!any) return false;
  }
  return true;
}

/// Writes conditioned per-token spectra for every selected cell, long format:
/// vowel, speaker, f0, center_hz, level_db.  Returns the number of tokens.
inline std::size_t cmd_spectra(const std::filesystem::path& manifest_path,
                               const RunConfig& cfg,
                               const SpectraSelector& selector,
                               const std::filesystem::path& out_csv) {
  validate_config(cfg);
  const CorpusManifest manifest = read_manifest(manifest_path);
  const std::filesystem::path dir = manifest_path.has_parent_path()
                                        ? manifest_path.parent_path()
                                        : std::filesystem::path{"."};

  std::vector<const ManifestEntry*> selected;
  for (const auto& e : manifest.entries)
    if (selector_matches(selector, e)) selected.push_back(&e);
  if (selected.empty()) throw DataError("selector matches no manifest cells");
  std::sort(selected.begin(), selected.end(),
            [](const ManifestEntry* a, const ManifestEntry* b) {
              return std::tuple(a->target_f0, a->speaker_id,
                                static_cast<int>(a->vowel)) <
                     std::tuple(b->target_f0, b->speaker_id,
                                static_cast<int>(b->vowel));
            });

  const Filterbank fb = make_filterbank(cfg.filterbank);
  const MiddleEarWeighting me = config_middle_ear(cfg);
  std::ostringstream os;
  os << "vowel,speaker,f0,center_hz,level_db\n";
  for (const ManifestEntry* e : selected) {
    SpectrumCell cell;
    try {
      cell = detail::analyze_token(dir, *e, cfg, fb, me);
    } catch (const DataError& err) {
      throw DataError("vowel=" + std::string(to_label(e->vowel)) +
                      " speaker=" + e->speaker_id +
                      " f0=" + detail::fmt_compact(e->target_f0) + ": " +
                      err.what());
    }
    const auto& sp = cell.spectrum;
    for (std::size_t c = 0; c < sp.center_frequencies.size(); ++c)
      os << to_label(e->vowel) << ',' << e->speaker_id << ','
         << detail::fmt_full(e->target_f0) << ','
         << detail::fmt_full(sp.center_frequencies[c]) << ','
         << detail::fmt_full(sp.levels_db[c]) << "\n";
  }
  detail::write_text_atomic(out_csv, os.str());
  return selected.size();
}

// ---------------------------------------------------------------------------
// Report regeneration from a saved results bundle.

namespace detail {

inline std::vector<std::vector<std::string>> read_csv(
    const std::filesystem::path& path, std::size_t min_fields) {
  if (!std::filesystem::exists(path))
    throw DataError("missing results file " + path.string() +
                    "; run the analyze stage first");
  const auto lines = read_lines(path);
  if (lines.empty()) throw DataError(path.string() + ": empty file");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {  // skip header
    if (strip(lines[i]).empty()) continue;
    auto fields = split(lines[i], ',');
    if (fields.size() < min_fields)
      throw DataError(path.string() + ":" + std::to_string(i + 1) +
                      ": expected at least " + std::to_string(min_fields) +
                      " fields");
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace detail

/// Rebuilds report.txt from the CSVs saved by the analyze stage.  With
/// timestamps disabled the regenerated report is byte-identical.
inline void cmd_report(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path out{cfg.output_dir};
  ReportData d;

  for (const auto& row : detail::read_csv(out / "summaries.csv", 5)) {
    DistanceSummary s;
    s.f0 = detail::parse_double(row[0], "summaries.csv");
    s.n = static_cast<std::size_t>(
        detail::parse_double(row[1], "summaries.csv"));
    s.median = detail::parse_double(row[2], "summaries.csv");
    s.q1 = detail::parse_double(row[3], "summaries.csv");
    s.q3 = detail::parse_double(row[4], "summaries.csv");
    d.summaries.push_back(s);
  }
  for (const auto& row : detail::read_csv(out / "observations.csv", 6)) {
    DistanceObservation o;
    o.f0 = detail::parse_double(row[0], "observations.csv");
    o.speaker_id = row[1];
    o.cluster = row[2];
    o.pair = {vowel_from_label(row[3]), vowel_from_label(row[4])};
    o.distance = detail::parse_double(row[5], "observations.csv");
    d.observations.push_back(o);
  }
  for (const auto& row : detail::read_csv(out / "axis_ratios.csv", 2))
    d.axis_ratios.emplace_back(detail::parse_double(row[0], "axis_ratios.csv"),
                               detail::parse_double(row[1], "axis_ratios.csv"));

  for (const auto& row : detail::read_csv(out / "fit.csv", 2)) {
    const std::string& key = row[0];
    if (key == "degenerate") {
      d.has_fit = false;
      break;
    }
    d.has_fit = true;
    const double v = detail::parse_double(row[1], "fit.csv");
    if (key == "breakpoint") d.fit.breakpoint = v;
    else if (key == "beta0") d.fit.beta0 = v;
    else if (key == "beta1") d.fit.beta1 = v;
    else if (key == "beta2") d.fit.beta2 = v;
    else if (key == "se_beta1") d.fit.se_beta1 = v;
    else if (key == "se_beta2") d.fit.se_beta2 = v;
    else if (key == "p_beta1") d.fit.p_beta1 = v;
    else if (key == "p_beta2") d.fit.p_beta2 = v;
    else if (key == "residual_variance") d.fit.residual_variance = v;
    else if (key == "intercept_variance") d.fit.intercept_variance = v;
    else if (key.rfind("intercept:", 0) == 0)
      d.fit.speaker_intercepts[key.substr(10)] = v;
    else
      throw DataError("fit.csv: unknown key '" + key + "'");
  }

  {
    const auto rows = detail::read_csv(out / "fdr.csv", 8);
    d.has_tests = !rows.empty();
    for (const auto& row : rows) {
      d.tests.reference_f0 = detail::parse_double(row[0], "fdr.csv");
      d.tests.fdr.q = detail::parse_double(row[1], "fdr.csv");
      PairwiseTest t;
      t.f0 = detail::parse_double(row[2], "fdr.csv");
      t.n = static_cast<std::size_t>(detail::parse_double(row[3], "fdr.csv"));
      t.statistic = detail::parse_double(row[4], "fdr.csv");
      t.raw_p = detail::parse_double(row[5], "fdr.csv");
      d.tests.tests.push_back(t);
      d.tests.fdr.raw_p.push_back(t.raw_p);
      d.tests.fdr.adjusted_p.push_back(
          detail::parse_double(row[6], "fdr.csv"));
      d.tests.fdr.rejected.push_back(
          detail::parse_double(row[7], "fdr.csv") != 0.0);
    }
  }

  if (!d.axis_ratios.empty()) {
    double ref_f0 = d.axis_ratios.front().first;
    for (const auto& [f0, ratio] : d.axis_ratios) ref_f0 = std::min(ref_f0, f0);
    const fs::path mds_path =
        out / "mds" / ("mds_coords_" + detail::fmt_compact(ref_f0) + ".csv");
    MdsEmbedding e;
    e.dims = 2;
    for (const auto& row : detail::read_csv(mds_path, 3)) {
      e.labels.push_back(row[0]);
      e.coords.push_back(detail::parse_double(row[1], "mds csv"));
      e.coords.push_back(detail::parse_double(row[2], "mds csv"));
    }
    d.has_ref_embedding = !e.labels.empty();
    d.ref_f0 = ref_f0;
    d.ref_embedding = std::move(e);
  }

  detail::write_text_atomic(out / "report.txt", render_report(d, cfg));
}

/// synthesize + analyze (which also writes the report).
inline AnalysisResult run_all(const RunConfig& cfg) {
  const SynthesisResult s = cmd_synthesize(cfg);
  return cmd_analyze(s.manifest_path, cfg);
}

}  // namespace vowelspace
