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

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vowelspace/audio.hpp"
#include "vowelspace/error.hpp"
#include "vowelspace/vowel.hpp"

namespace vowelspace {

/// One vocal-tract resonance: center frequency and -3 dB bandwidth, both Hz.
struct FormantSpec {
  double frequency = 0.0;
  double bandwidth = 0.0;
};

/// Formant table for one synthetic speaker. Every vowel category must be
/// present with at least four formants, strictly increasing in frequency.
struct SpeakerProfile {
  std::string speaker_id;
  std::map<Vowel, std::vector<FormantSpec>> formant_table;
};

inline void validate_profile(const SpeakerProfile& profile) {
  if (profile.speaker_id.empty())
    throw DataError("speaker profile has empty id");
  for (Vowel v : kAllVowels) {
    auto it = profile.formant_table.find(v);
    if (it == profile.formant_table.end())
      throw DataError("profile " + profile.speaker_id + " missing vowel /" +
                      std::string(to_label(v)) + "/");
    const auto& formants = it->second;
    if (formants.size() < 4)
      throw DataError("profile " + profile.speaker_id + " vowel /" +
                      std::string(to_label(v)) + "/ needs >= 4 formants");
    double prev = 0.0;
    for (const auto& f : formants) {
      if (f.frequency <= prev)
        throw DataError("profile " + profile.speaker_id + " vowel /" +
                        std::string(to_label(v)) +
                        "/ formants not strictly increasing");
      if (f.bandwidth <= 0.0)
        throw DataError("profile " + profile.speaker_id +
                        " has non-positive formant bandwidth");
      prev = f.frequency;
    }
  }
}

/// Unit impulses at the nearest-sample positions of t_k = k / f0. Serves as
/// the glottal source: a flat harmonic comb at multiples of f0.
inline SampleBuffer impulse_train(double f0, double duration,
                                  int sample_rate) {
  if (!(f0 > 0.0) || f0 >= sample_rate / 2.0)
    throw DataError("impulse train f0 must lie in (0, Nyquist), got " +
                    std::to_string(f0));
  const auto n = std::llround(duration * sample_rate);
  if (n <= 0) throw DataError("impulse train duration yields empty buffer");
  SampleBuffer out{std::vector<double>(static_cast<size_t>(n), 0.0),
                   sample_rate};
  for (int64_t k = 0;; ++k) {
    const auto idx =
        std::llround(static_cast<double>(k) * sample_rate / f0);
    if (idx >= n) break;
    out.samples[static_cast<size_t>(idx)] = 1.0;
  }
  return out;
}

namespace detail {

// Synthesis runs at this multiple of the requested rate so that impulse
// placement error (at most half a sample) stays far below the harmonic
// line levels; the result is low-pass decimated back down.
inline constexpr int kSynthesisOversample = 16;

// Windowed-sinc low-pass decimation by an integer factor. Cutoff 0.45 of
// the target rate, Blackman window, group delay compensated; output length
// is exactly ceil(n / factor) of the input range covered.
inline SampleBuffer sinc_decimate(const SampleBuffer& in, int factor,
                                  size_t out_len) {
  const int hi_rate = in.sample_rate;
  const int64_t n = static_cast<int64_t>(in.samples.size());
  const int half = 32 * factor;            // taps span +-half at the high rate
  const int taps = 2 * half + 1;
  const double cutoff = 0.45 / factor;     // fraction of the high rate
  std::vector<double> h(static_cast<size_t>(taps));
  double sum = 0.0;
  for (int k = 0; k < taps; ++k) {
    const int m = k - half;
    const double t = 2.0 * std::numbers::pi * cutoff * m;
    const double sinc = m == 0 ? 2.0 * cutoff
                               : std::sin(t) / (std::numbers::pi * m);
    const double w =
        0.42 - 0.5 * std::cos(2.0 * std::numbers::pi * k / (taps - 1)) +
        0.08 * std::cos(4.0 * std::numbers::pi * k / (taps - 1));
    h[static_cast<size_t>(k)] = sinc * w;
    sum += h[static_cast<size_t>(k)];
  }
  for (double& v : h) v /= sum;  // unity DC gain

  SampleBuffer out{std::vector<double>(out_len, 0.0), hi_rate / factor};
  for (size_t m = 0; m < out_len; ++m) {
    const int64_t center = static_cast<int64_t>(m) * factor;
    double acc = 0.0;
    const int64_t k_lo = std::max<int64_t>(0, center - half);
    const int64_t k_hi = std::min<int64_t>(n - 1, center + half);
    for (int64_t i = k_lo; i <= k_hi; ++i)
      acc += in.samples[static_cast<size_t>(i)] *
             h[static_cast<size_t>(half + center - i)];
    out.samples[m] = acc;
  }
  return out;
}

// Two-pole resonator, unity gain at the pole frequency:
//   y[n] = g x[n] + 2 r cos(theta) y[n-1] - r^2 y[n-2]
// with r = exp(-pi B / rate), theta = 2 pi F / rate.
inline void apply_resonator(std::vector<double>& x, double frequency,
                            double bandwidth, int rate) {
  const double r = std::exp(-std::numbers::pi * bandwidth / rate);
  const double theta = 2.0 * std::numbers::pi * frequency / rate;
  const double a1 = 2.0 * r * std::cos(theta);
  const double a2 = -r * r;
  // g = |1 - 2 r cos(theta) z^-1 + r^2 z^-2| evaluated at z = e^{i theta}.
  const std::complex<double> z1 = std::polar(1.0, -theta);
  const double g = std::abs(1.0 - a1 * z1 + (r * r) * z1 * z1);
  double y1 = 0.0, y2 = 0.0;
  for (double& v : x) {
    const double y = g * v + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

}  // namespace detail

/// Runs the buffer through a cascade of two-pole resonators, one per formant.
/// An empty formant list is the identity.
inline SampleBuffer resonator_cascade(const SampleBuffer& buffer,
                                      const std::vector<FormantSpec>& formants) {
  const double nyquist = buffer.sample_rate / 2.0;
  for (const auto& f : formants) {
    if (!(f.frequency > 0.0) || f.frequency >= nyquist)
      throw DataError("formant frequency " + std::to_string(f.frequency) +
                      " outside (0, Nyquist)");
    if (!(f.bandwidth > 0.0))
      throw DataError("formant bandwidth must be positive");
  }
  SampleBuffer out = buffer;
  for (const auto& f : formants)
    detail::apply_resonator(out.samples, f.frequency, f.bandwidth,
                            buffer.sample_rate);
  return out;
}

inline constexpr double kPeriodicityThreshold = 0.5;

/// Autocorrelation f0 estimate. Computes the bias-corrected normalized
/// autocorrelation over the lag range implied by [min_hz, max_hz], picks the
/// smallest-lag peak among those within tolerance of the maximum (periodic
/// signals tie at every period multiple), and refines the lag by parabolic
/// interpolation. Throws when the strongest peak is below 0.5.
inline double estimate_f0(const SampleBuffer& buffer, double min_hz,
                          double max_hz) {
  const int rate = buffer.sample_rate;
  const auto n = static_cast<int64_t>(buffer.samples.size());
  if (!(min_hz > 0.0) || !(min_hz < max_hz) || max_hz >= rate / 2.0)
    throw DataError("invalid f0 search range");
  if (static_cast<double>(n) < 3.0 * rate / min_hz)
    throw DataError("buffer shorter than 3 periods of the lowest search "
                    "frequency");

  double mean = 0.0;
  for (double v : buffer.samples) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> x(buffer.samples);
  for (double& v : x) v -= mean;

  double r0 = 0.0;
  for (double v : x) r0 += v * v;
  if (r0 <= 0.0) throw DataError("no periodicity found (silent input)");

  const int64_t lag_min = std::max<int64_t>(
      2, static_cast<int64_t>(std::floor(rate / max_hz)));
  const int64_t lag_max = std::min<int64_t>(
      n - 2, static_cast<int64_t>(std::ceil(rate / min_hz)));
  if (lag_max <= lag_min) throw DataError("f0 search range collapses");

  // Bias-corrected normalized autocorrelation on [lag_min-1, lag_max+1].
  const int64_t lo = lag_min - 1;
  std::vector<double> rn(static_cast<size_t>(lag_max - lo + 2), 0.0);
  for (int64_t lag = lo; lag <= lag_max + 1; ++lag) {
    double acc = 0.0;
    for (int64_t i = 0; i + lag < n; ++i) acc += x[i] * x[i + lag];
    rn[static_cast<size_t>(lag - lo)] =
        (acc / static_cast<double>(n - lag)) / (r0 / static_cast<double>(n));
  }
  auto at = [&](int64_t lag) { return rn[static_cast<size_t>(lag - lo)]; };

  double best_value = -1.0;
  for (int64_t lag = lag_min; lag <= lag_max; ++lag)
    if (at(lag) >= at(lag - 1) && at(lag) > at(lag + 1))
      best_value = std::max(best_value, at(lag));
  if (best_value < kPeriodicityThreshold)
    throw DataError("no periodicity found (peak " +
                    std::to_string(std::max(best_value, 0.0)) + " below " +
                    std::to_string(kPeriodicityThreshold) + ")");

  // Period multiples tie at the top; take the smallest lag among them.
  int64_t peak_lag = 0;
  for (int64_t lag = lag_min; lag <= lag_max; ++lag) {
    if (at(lag) >= at(lag - 1) && at(lag) > at(lag + 1) &&
        at(lag) >= best_value - 1e-3) {
      peak_lag = lag;
      break;
    }
  }

  const double ym = at(peak_lag - 1), y0 = at(peak_lag), yp = at(peak_lag + 1);
  const double denom = ym - 2.0 * y0 + yp;
  double delta = 0.0;
  if (denom != 0.0) delta = 0.5 * (ym - yp) / denom;
  delta = std::clamp(delta, -0.5, 0.5);
  return rate / (static_cast<double>(peak_lag) + delta);
}

/// A labeled stimulus: category, speaker, target and measured f0, and the
/// synthesized or conditioned audio.
struct VowelToken {
  Vowel vowel{};
  std::string speaker_id;
  double target_f0 = 0.0;
  double measured_f0 = 0.0;
  SampleBuffer buffer;
};

inline constexpr double kF0Tolerance = 0.05;

/// Source-filter synthesis of one vowel token: impulse train through the
/// profile's resonator cascade at 16x the target rate, low-pass decimated
/// down, peak-normalized, then f0-verified against the 5% tolerance gate.
inline VowelToken synthesize_vowel(Vowel vowel, double f0,
                                   const SpeakerProfile& profile,
                                   double duration, int sample_rate) {
  auto it = profile.formant_table.find(vowel);
  if (it == profile.formant_table.end())
    throw DataError("vowel /" + std::string(to_label(vowel)) +
                    "/ not in profile " + profile.speaker_id);

  const int os = detail::kSynthesisOversample;
  const auto out_len = static_cast<size_t>(
      std::llround(duration * sample_rate));
  SampleBuffer wave = detail::sinc_decimate(
      resonator_cascade(impulse_train(f0, duration, sample_rate * os),
                        it->second),
      os, out_len);
  double peak = 0.0;
  for (double v : wave.samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : wave.samples) v *= 0.5 / peak;

  // Verify f0 on the token's center, away from the resonator onset/offset
  // transients, matching where the downstream analysis reads the vowel.
  const double center = 0.8 * duration;
  const SampleBuffer* gate = &wave;
  SampleBuffer trimmed;
  if (center * f0 / 1.3 >= 3.0) {
    trimmed = extract_center_segment(wave, center);
    gate = &trimmed;
  }
  const double measured = estimate_f0(*gate, f0 / 1.3, f0 * 1.3);
  if (std::abs(measured - f0) / f0 > kF0Tolerance)
    throw DataError("f0 verification failed for /" +
                    std::string(to_label(vowel)) + "/ speaker " +
                    profile.speaker_id + ": target " + std::to_string(f0) +
                    " Hz, measured " + std::to_string(measured) + " Hz");

  return VowelToken{vowel, profile.speaker_id, f0, measured, std::move(wave)};
}

namespace detail {

inline double jitter_unit(std::mt19937_64& rng) {
  // 53-bit uniform in [0,1); identical across standard libraries.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Base formant table approximating adult female vowels, four formants per
/// category. Configuration data, not ground truth: the analyses downstream
/// depend only on qualitative orderings.
inline const std::map<Vowel, std::vector<FormantSpec>>& base_formant_table() {
  static const std::map<Vowel, std::vector<FormantSpec>> table = {
      {Vowel::I, {{310, 60}, {2790, 110}, {3310, 170}, {4250, 250}}},
      {Vowel::Y, {{320, 60}, {1900, 100}, {2500, 150}, {4050, 250}}},
      {Vowel::E, {{400, 70}, {2600, 110}, {3100, 160}, {4200, 250}}},
      {Vowel::Oe, {{420, 70}, {1750, 100}, {2400, 150}, {3950, 250}}},
      {Vowel::Eh, {{650, 90}, {2300, 110}, {2900, 160}, {4100, 250}}},
      {Vowel::A, {{950, 110}, {1500, 120}, {2800, 170}, {4050, 250}}},
      {Vowel::O, {{450, 80}, {850, 80}, {2800, 170}, {3800, 250}}},
      {Vowel::U, {{370, 70}, {800, 80}, {2650, 170}, {3700, 250}}},
  };
  return table;
}

/// Three deterministic speaker profiles: the base table with a fixed-seed
/// +-5% jitter per speaker on every formant frequency and bandwidth.
inline std::vector<SpeakerProfile> builtin_speaker_profiles() {
  std::vector<SpeakerProfile> profiles;
  for (int s = 0; s < 3; ++s) {
    std::mt19937_64 rng(0x5EEDu + static_cast<unsigned>(s) * 1000003u);
    SpeakerProfile p;
    p.speaker_id = "S" + std::to_string(s + 1);
    for (Vowel v : kAllVowels) {
      std::vector<FormantSpec> formants;
      for (const auto& base : base_formant_table().at(v)) {
        const double fj = 0.95 + 0.10 * detail::jitter_unit(rng);
        const double bj = 0.95 + 0.10 * detail::jitter_unit(rng);
        formants.push_back({base.frequency * fj, base.bandwidth * bj});
      }
      p.formant_table[v] = std::move(formants);
    }
    validate_profile(p);
    profiles.push_back(std::move(p));
  }
  return profiles;
}

/// Loads speaker profiles from a whitespace-separated table. Each row is
///   speaker vowel f1 b1 f2 b2 ...
/// with '#' comments; rows of one speaker need not be adjacent.
inline std::vector<SpeakerProfile> load_speaker_profiles(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open profile file: " + path.string());
  std::map<std::string, SpeakerProfile> by_id;
  std::vector<std::string> order;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string speaker, vowel_label;
    if (!(ss >> speaker >> vowel_label)) continue;  // blank or comment
    std::vector<double> nums;
    double v;
    while (ss >> v) nums.push_back(v);
    if (nums.size() < 8 || nums.size() % 2 != 0)
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected >= 4 frequency/bandwidth pairs");
    std::vector<FormantSpec> formants;
    for (size_t i = 0; i < nums.size(); i += 2)
      formants.push_back({nums[i], nums[i + 1]});
    if (!by_id.count(speaker)) {
      by_id[speaker].speaker_id = speaker;
      order.push_back(speaker);
    }
    by_id[speaker].formant_table[vowel_from_label(vowel_label)] =
        std::move(formants);
  }
  std::vector<SpeakerProfile> profiles;
  for (const auto& id : order) {
    validate_profile(by_id[id]);
    profiles.push_back(by_id[id]);
  }
  if (profiles.empty())
    throw DataError("profile file has no rows: " + path.string());
  return profiles;
}

inline void write_speaker_profiles(const std::filesystem::path& path,
                                   const std::vector<SpeakerProfile>& profiles) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot open for writing: " + path.string());
  os << "# speaker vowel f1 b1 f2 b2 f3 b3 f4 b4\n";
  char buf[64];
  for (const auto& p : profiles) {
    for (Vowel v : kAllVowels) {
      os << p.speaker_id << ' ' << to_label(v);
      for (const auto& f : p.formant_table.at(v)) {
        std::snprintf(buf, sizeof buf, " %.17g %.17g", f.frequency,
                      f.bandwidth);
        os << buf;
      }
      os << '\n';
    }
  }
  if (!os) throw DataError("write failure: " + path.string());
}

}  // namespace vowelspace
