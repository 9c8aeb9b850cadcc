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
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "vowelspace/error.hpp"

namespace vowelspace {

/// Mono audio samples with a sample rate. Amplitudes are dimensionless with a
/// nominal range of +-1.0; the unit of all signal processing in this library.
struct SampleBuffer {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

inline double rms(const SampleBuffer& buffer) {
  double sum_sq = 0.0;
  for (double s : buffer.samples) sum_sq += s * s;
  return std::sqrt(sum_sq / static_cast<double>(buffer.samples.size()));
}

enum class WavEncoding { Pcm16, Float32 };

namespace detail {

inline uint32_t read_u32le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

inline uint16_t read_u16le(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32le(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void put_u16le(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace detail

/// Reads a RIFF/WAVE file. Accepts 16-bit integer PCM and 32-bit IEEE float;
/// multi-channel files are reduced to channel 0 with a warning. 16-bit samples
/// are scaled by 1/32768 so that full-scale positive is 32767/32768.
inline SampleBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open WAV file: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError("read failure on WAV file: " + path.string());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const size_t n = bytes.size();
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 ||
      std::memcmp(p + 8, "WAVE", 4) != 0)
    throw DataError("not a RIFF/WAVE file: " + path.string());

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  uint32_t data_size = 0;

  size_t off = 12;
  while (off + 8 <= n) {
    const char* id = bytes.data() + off;
    uint32_t size = detail::read_u32le(p + off + 4);
    off += 8;
    if (off + size > n) size = static_cast<uint32_t>(n - off);
    if (std::memcmp(id, "fmt ", 4) == 0 && size >= 16) {
      format = detail::read_u16le(p + off);
      channels = detail::read_u16le(p + off + 2);
      rate = detail::read_u32le(p + off + 4);
      bits = detail::read_u16le(p + off + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = p + off;
      data_size = size;
    }
    off += size + (size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr)
    throw DataError("WAV file missing fmt/data chunk: " + path.string());
  if (channels < 1 || rate == 0)
    throw DataError("WAV file has invalid format fields: " + path.string());

  const bool pcm16 = (format == 1 && bits == 16);
  const bool float32 = (format == 3 && bits == 32);
  if (!pcm16 && !float32)
    throw DataError("unsupported WAV encoding in " + path.string() +
                    " (format tag " + std::to_string(format) + ", " +
                    std::to_string(bits) + " bits; need 16-bit PCM or "
                    "32-bit float)");
  if (channels > 1)
    std::cerr << "warning: " << path.string() << " has " << channels
              << " channels, using channel 0\n";

  const size_t bytes_per_sample = bits / 8;
  const size_t frame_size = bytes_per_sample * channels;
  const size_t frames = data_size / frame_size;
  if (frames == 0)
    throw DataError("WAV file contains no audio samples: " + path.string());

  SampleBuffer buf;
  buf.sample_rate = static_cast<int>(rate);
  buf.samples.resize(frames);
  for (size_t i = 0; i < frames; ++i) {
    const unsigned char* s = data + i * frame_size;
    if (pcm16) {
      int16_t v = static_cast<int16_t>(detail::read_u16le(s));
      buf.samples[i] = static_cast<double>(v) / 32768.0;
    } else {
      uint32_t u = detail::read_u32le(s);
      float f;
      std::memcpy(&f, &u, sizeof f);
      buf.samples[i] = static_cast<double>(f);
    }
  }
  return buf;
}

/// Writes a mono RIFF/WAVE file. Pcm16 rounds to the nearest 16-bit code and
/// clips outside full scale; Float32 stores the samples verbatim.
inline void write_wav(const std::filesystem::path& path,
                      const SampleBuffer& buffer,
                      WavEncoding encoding = WavEncoding::Float32) {
  if (buffer.samples.empty()) throw DataError("refusing to write empty WAV");
  if (buffer.sample_rate <= 0) throw DataError("invalid sample rate");

  const bool pcm16 = encoding == WavEncoding::Pcm16;
  const uint16_t bits = pcm16 ? 16 : 32;
  const uint32_t data_size =
      static_cast<uint32_t>(buffer.samples.size() * (bits / 8));

  std::string out;
  out.reserve(44 + data_size);
  out.append("RIFF");
  detail::put_u32le(out, 36 + data_size);
  out.append("WAVE");
  out.append("fmt ");
  detail::put_u32le(out, 16);
  detail::put_u16le(out, pcm16 ? 1 : 3);  // PCM / IEEE float
  detail::put_u16le(out, 1);              // mono
  detail::put_u32le(out, static_cast<uint32_t>(buffer.sample_rate));
  detail::put_u32le(out,
                    static_cast<uint32_t>(buffer.sample_rate) * (bits / 8));
  detail::put_u16le(out, bits / 8);
  detail::put_u16le(out, bits);
  out.append("data");
  detail::put_u32le(out, data_size);

  for (double x : buffer.samples) {
    if (pcm16) {
      double scaled = std::round(x * 32768.0);
      scaled = std::clamp(scaled, -32768.0, 32767.0);
      detail::put_u16le(out, static_cast<uint16_t>(
                                 static_cast<int16_t>(scaled)));
    } else {
      float f = static_cast<float>(x);
      uint32_t u;
      std::memcpy(&u, &f, sizeof u);
      detail::put_u32le(out, u);
    }
  }

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open for writing: " + path.string());
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw DataError("write failure: " + path.string());
}

/// Extracts a centered segment of the requested duration. The segment starts
/// at floor((N - n) / 2) where n = round(duration * rate).
inline SampleBuffer extract_center_segment(const SampleBuffer& buffer,
                                           double duration) {
  const size_t total = buffer.samples.size();
  const auto n = static_cast<size_t>(
      std::llround(duration * buffer.sample_rate));
  if (n > total)
    throw DataError("buffer too short: need " + std::to_string(n) +
                    " samples, have " + std::to_string(total));
  const size_t start = (total - n) / 2;
  SampleBuffer out;
  out.sample_rate = buffer.sample_rate;
  out.samples.assign(buffer.samples.begin() + start,
                     buffer.samples.begin() + start + n);
  return out;
}

/// Applies raised-cosine onset and offset ramps of the given duration. The
/// first and last round(fade * rate) samples are scaled by (1 - cos(pi t/T))/2
/// and its mirror; the ramps never overlap.
inline SampleBuffer apply_raised_cosine_fades(const SampleBuffer& buffer,
                                              double fade_duration) {
  const size_t total = buffer.samples.size();
  const auto n = static_cast<size_t>(
      std::llround(fade_duration * buffer.sample_rate));
  if (2 * n > total)
    throw DataError("fade of " + std::to_string(n) +
                    " samples exceeds half the buffer (" +
                    std::to_string(total) + " samples)");
  SampleBuffer out = buffer;
  for (size_t k = 0; k < n; ++k) {
    const double gain =
        0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(k) /
                              static_cast<double>(n)));
    out.samples[k] *= gain;
    out.samples[total - 1 - k] *= gain;
  }
  return out;
}

/// Scales the buffer so its RMS equals target_rms. Pure scalar multiply, so
/// the waveform shape is preserved.
inline SampleBuffer normalize_rms(const SampleBuffer& buffer,
                                  double target_rms) {
  if (buffer.samples.empty()) throw DataError("cannot normalize empty buffer");
  const double level = rms(buffer);
  if (level <= 0.0)
    throw DataError("cannot normalize all-zero buffer to nonzero RMS");
  const double scale = target_rms / level;
  SampleBuffer out = buffer;
  for (double& s : out.samples) s *= scale;
  return out;
}

}  // namespace vowelspace
