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

#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vowelspace/audio.hpp"
#include "vowelspace/error.hpp"

namespace vowelspace {

/// Equivalent rectangular bandwidth of the auditory filter centered at
/// frequency Hz (Glasberg & Moore fit).
inline double erb_bandwidth(double frequency) {
  return 24.7 * (4.37 * frequency / 1000.0 + 1.0);
}

/// Position of a frequency on the ERB-number scale (ERB-rate).
inline double erb_number(double frequency) {
  return 21.4 * std::log10(4.37 * frequency / 1000.0 + 1.0);
}

/// Inverse of erb_number.
inline double erb_number_to_frequency(double erb) {
  return (std::pow(10.0, erb / 21.4) - 1.0) * 1000.0 / 4.37;
}

inline constexpr int kGammatoneOrder = 4;

/// Gammatone filterbank layout: channel centers are uniform on the
/// ERB-number scale, endpoints inclusive.
struct FilterbankSpec {
  int num_channels = 200;
  double min_frequency = 40.0;
  double max_frequency = 17000.0;
  // One-pole bandwidth correction for an order-4 cascade.
  double bandwidth_scale = 1.019;
};

struct Filterbank {
  FilterbankSpec spec;
  std::vector<double> center_frequencies;
};

inline Filterbank make_filterbank(const FilterbankSpec& spec) {
  if (spec.num_channels < 2)
    throw DataError("filterbank needs at least 2 channels");
  if (!(spec.min_frequency > 0.0) ||
      !(spec.min_frequency < spec.max_frequency))
    throw DataError("filterbank frequency range must satisfy 0 < min < max");
  if (!(spec.bandwidth_scale > 0.0))
    throw DataError("filterbank bandwidth scale must be positive");
  const double e_lo = erb_number(spec.min_frequency);
  const double e_hi = erb_number(spec.max_frequency);
  Filterbank fb{spec, {}};
  fb.center_frequencies.reserve(static_cast<size_t>(spec.num_channels));
  const int n = spec.num_channels;
  for (int i = 0; i < n; ++i) {
    const double e = e_lo + (e_hi - e_lo) * static_cast<double>(i) / (n - 1);
    fb.center_frequencies.push_back(erb_number_to_frequency(e));
  }
  // Pin the endpoints against round-trip error.
  fb.center_frequencies.front() = spec.min_frequency;
  fb.center_frequencies.back() = spec.max_frequency;
  return fb;
}

namespace detail {

// RMS of one gammatone channel applied to the whole buffer. The filter is a
// cascade of kGammatoneOrder identical complex one-poles
//   w[n] = x[n] + lambda e^{i beta} w[n-1]
// whose real part, scaled by g, has gain exactly 1 for a steady cosine at
// the center frequency.
inline double gammatone_channel_rms(const std::vector<double>& x,
                                    double center, int rate,
                                    double bandwidth_scale) {
  const double lambda =
      std::exp(-2.0 * std::numbers::pi * bandwidth_scale *
               erb_bandwidth(center) / rate);
  const double beta = 2.0 * std::numbers::pi * center / rate;
  const std::complex<double> pole = std::polar(lambda, beta);

  const std::complex<double> one{1.0, 0.0};
  const std::complex<double> direct =
      std::pow(one - std::complex<double>(lambda, 0.0), -kGammatoneOrder);
  const std::complex<double> image =
      std::pow(one - lambda * std::polar(1.0, 2.0 * beta), -kGammatoneOrder);
  const double g = 2.0 / std::abs(direct + std::conj(image));

  std::complex<double> w1{}, w2{}, w3{}, w4{};
  double acc = 0.0;
  for (double v : x) {
    w1 = v + pole * w1;
    w2 = w1 + pole * w2;
    w3 = w2 + pole * w3;
    w4 = w3 + pole * w4;
    const double y = g * w4.real();
    acc += y * y;
  }
  return std::sqrt(acc / static_cast<double>(x.size()));
}

}  // namespace detail

/// Fixed transfer weighting applied to channel levels, piecewise linear in
/// dB over log-frequency and flat beyond the outermost points.
struct MiddleEarWeighting {
  std::vector<std::pair<double, double>> points;  // (frequency Hz, gain dB)

  double gain_db(double frequency) const {
    if (points.empty()) return 0.0;
    if (frequency <= points.front().first) return points.front().second;
    if (frequency >= points.back().first) return points.back().second;
    for (size_t i = 1; i < points.size(); ++i) {
      if (frequency <= points[i].first) {
        const double lx0 = std::log10(points[i - 1].first);
        const double lx1 = std::log10(points[i].first);
        const double t = (std::log10(frequency) - lx0) / (lx1 - lx0);
        return points[i - 1].second +
               t * (points[i].second - points[i - 1].second);
      }
    }
    return points.back().second;
  }
};

inline void validate_middle_ear(const MiddleEarWeighting& w) {
  if (w.points.empty())
    throw DataError("middle ear weighting needs at least one point");
  double prev = 0.0;
  for (const auto& [f, _] : w.points) {
    if (f <= prev)
      throw DataError("middle ear frequencies must be positive and strictly "
                      "increasing");
    prev = f;
  }
}

inline MiddleEarWeighting default_middle_ear() {
  return MiddleEarWeighting{{{100.0, 0.0},
                             {500.0, 14.0},
                             {1000.0, 20.0},
                             {2000.0, 19.0},
                             {4000.0, 18.0},
                             {8000.0, 12.0},
                             {16000.0, 6.0}}};
}

inline MiddleEarWeighting flat_middle_ear() {
  return MiddleEarWeighting{{{1000.0, 0.0}}};
}

/// Loads a two-column (frequency Hz, gain dB) weighting table; '#' comments.
inline MiddleEarWeighting load_middle_ear(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open middle ear table: " + path.string());
  MiddleEarWeighting w;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double f, g;
    if (!(ss >> f)) continue;
    std::string rest;
    if (!(ss >> g) || (ss >> rest))
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected two columns (Hz, dB)");
    w.points.emplace_back(f, g);
  }
  validate_middle_ear(w);
  return w;
}

/// Channel levels of one sound: per-channel gammatone RMS in dB plus the
/// middle ear gain at the channel center, floored at -120 dB.
struct CochleaScaledSpectrum {
  std::vector<double> center_frequencies;
  std::vector<double> levels_db;
  bool normalized = false;
};

inline constexpr double kLevelFloorDb = -120.0;
inline constexpr double kMinAnalysisSeconds = 0.05;

inline CochleaScaledSpectrum excitation_pattern(
    const SampleBuffer& buffer, const Filterbank& fb,
    const MiddleEarWeighting& weighting) {
  if (buffer.duration_seconds() < kMinAnalysisSeconds)
    throw DataError("analysis segment shorter than " +
                    std::to_string(kMinAnalysisSeconds * 1000.0) + " ms");
  if (fb.spec.max_frequency >= buffer.sample_rate / 2.0)
    throw DataError("filterbank extends past Nyquist for this sample rate");
  validate_middle_ear(weighting);

  CochleaScaledSpectrum out;
  out.center_frequencies = fb.center_frequencies;
  out.levels_db.reserve(fb.center_frequencies.size());
  for (double fc : fb.center_frequencies) {
    const double rms = detail::gammatone_channel_rms(
        buffer.samples, fc, buffer.sample_rate, fb.spec.bandwidth_scale);
    const double level =
        (rms > 0.0 ? 20.0 * std::log10(rms) : -HUGE_VAL) + weighting.gain_db(fc);
    out.levels_db.push_back(std::max(level, kLevelFloorDb));
  }
  return out;
}

/// Removes overall level: subtracts the across-channel mean from every
/// channel, making patterns of the same sound at different gains equal.
inline CochleaScaledSpectrum normalize_spectrum(
    const CochleaScaledSpectrum& spectrum) {
  if (spectrum.levels_db.empty())
    throw DataError("cannot normalize an empty spectrum");
  double mean = 0.0;
  for (double v : spectrum.levels_db) mean += v;
  mean /= static_cast<double>(spectrum.levels_db.size());
  CochleaScaledSpectrum out = spectrum;
  for (double& v : out.levels_db) v -= mean;
  out.normalized = true;
  return out;
}

}  // namespace vowelspace
