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

// Command-line front end: corpus synthesis, analysis, spectra export, and
// report regeneration. Exit codes: 0 success, 1 usage, 2 data error,
// 3 numerical failure.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "vowelspace/pipeline.hpp"

namespace {

using namespace vowelspace;

constexpr const char* kUsage = R"(usage: vowelspace <command> [args] [flags]

commands:
  synthesize             write the vowel corpus (WAV files + manifest)
  analyze <manifest>     run the full analysis on a corpus manifest
  spectra <manifest>     export selected cochlea-scaled spectra as CSV
  report                 regenerate the run report from analysis output
  run                    synthesize, then analyze (convenience)

flags:
  --config PATH          key-value config file (flags override it)
  --out DIR              output directory (default: out)
  --grid LIST            comma-separated f0 grid in Hz
  --breakpoint HZ        piecewise-fit breakpoint (default: 523)
  --q LEVEL              FDR level in (0,1) (default: 0.05)
  --fade-ms N            raised-cosine fade length (default: 20)
  --segment-ms N         analysis segment length (default: 250)
  --averaging MODE       spectra | distmat (default: spectra)
  --middle-ear PATH      middle-ear weighting table
  --profiles PATH        speaker profile table for synthesis
  --timestamp            include a generation timestamp in the report
  --no-timestamp         omit the timestamp line (default)

spectra selector flags:
  --vowels LIST          comma-separated vowel labels (default: all)
  --speakers LIST        comma-separated speaker ids (default: all)
  --f0s LIST             comma-separated f0 values (default: all)
  --csv PATH             output CSV path (default: <out>/spectra_selected.csv)
)";

int usage_error(const std::string& message) {
  std::fprintf(stderr, "error: %s\n\n%s", message.c_str(), kUsage);
  return 1;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

struct Cli {
  std::string command;
  std::vector<std::string> positional;
  RunConfig cfg;
  SpectraSelector selector;
  std::string spectra_csv;
};

// Returns 0 on success, 1 on usage error (message already printed).
int parse_cli(int argc, char** argv, Cli& cli) {
  if (argc < 2) return usage_error("missing command");
  cli.command = argv[1];
  if (cli.command == "-h" || cli.command == "--help" || cli.command == "help") {
    std::fputs(kUsage, stdout);
    std::exit(0);
  }

  // First pass: find --config so file values load before flag overrides.
  std::vector<std::pair<std::string, std::string>> flags;
  for (int i = 2; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg.rfind("--", 0) != 0) {
      cli.positional.push_back(arg);
      continue;
    }
    if (arg == "--timestamp" || arg == "--no-timestamp") {
      flags.emplace_back(arg, "");
      continue;
    }
    if (i + 1 >= argc) return usage_error("flag " + arg + " needs a value");
    flags.emplace_back(arg, argv[++i]);
  }
  for (const auto& [flag, value] : flags)
    if (flag == "--config") load_run_config(value, cli.cfg);

  for (const auto& [flag, value] : flags) {
    if (flag == "--config") continue;
    if (flag == "--out") cli.cfg.output_dir = value;
    else if (flag == "--grid") cli.cfg.grid = parse_grid_list(value);
    else if (flag == "--breakpoint") cli.cfg.breakpoint_hz = std::stod(value);
    else if (flag == "--q") cli.cfg.fdr_q = std::stod(value);
    else if (flag == "--fade-ms") cli.cfg.fade_seconds = std::stod(value) / 1000.0;
    else if (flag == "--segment-ms") cli.cfg.segment_seconds = std::stod(value) / 1000.0;
    else if (flag == "--averaging") {
      if (value == "spectra") cli.cfg.averaging = AveragingMode::Spectra;
      else if (value == "distmat") cli.cfg.averaging = AveragingMode::DistanceMatrix;
      else return usage_error("--averaging must be 'spectra' or 'distmat'");
    } else if (flag == "--middle-ear") cli.cfg.middle_ear_path = value;
    else if (flag == "--profiles") cli.cfg.profiles_path = value;
    else if (flag == "--timestamp") cli.cfg.timestamp = true;
    else if (flag == "--no-timestamp") cli.cfg.timestamp = false;
    else if (flag == "--vowels") {
      for (const auto& l : split_list(value)) cli.selector.vowels.push_back(vowel_from_label(l));
    } else if (flag == "--speakers") cli.selector.speakers = split_list(value);
    else if (flag == "--f0s") {
      for (const auto& item : split_list(value)) cli.selector.f0s.push_back(std::stod(item));
    } else if (flag == "--csv") cli.spectra_csv = value;
    else return usage_error("unknown flag " + flag);
  }
  return 0;
}

int dispatch(const Cli& cli) {
  const auto need_manifest = [&]() -> std::string {
    if (cli.positional.empty())
      throw DataError(cli.command + " needs a manifest path argument");
    return cli.positional.front();
  };

  if (cli.command == "synthesize") {
    const auto result = cmd_synthesize(cli.cfg);
    std::printf("wrote %zu tokens, manifest %s\n", result.manifest.entries.size(),
                result.manifest_path.c_str());
  } else if (cli.command == "analyze") {
    const auto result = cmd_analyze(need_manifest(), cli.cfg);
    std::printf("analyzed %zu cells across %zu f0 conditions; report %s/report.txt\n",
                result.cells.size(), result.grid.size(), cli.cfg.output_dir.c_str());
  } else if (cli.command == "spectra") {
    const std::string csv = cli.spectra_csv.empty()
                                ? cli.cfg.output_dir + "/spectra_selected.csv"
                                : cli.spectra_csv;
    const std::size_t n = cmd_spectra(need_manifest(), cli.cfg, cli.selector, csv);
    std::printf("wrote %zu spectra to %s\n", n, csv.c_str());
  } else if (cli.command == "report") {
    cmd_report(cli.cfg);
    std::printf("report %s/report.txt\n", cli.cfg.output_dir.c_str());
  } else if (cli.command == "run") {
    const auto result = run_all(cli.cfg);
    std::printf("synthesized %zu tokens; report %s/report.txt\n",
                result.cells.size(), cli.cfg.output_dir.c_str());
  } else {
    return usage_error("unknown command '" + cli.command + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Cli cli;
  try {
    const int rc = parse_cli(argc, argv, cli);
    if (rc != 0) return rc;
    return dispatch(cli);
  } catch (const vowelspace::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const vowelspace::NumericError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
