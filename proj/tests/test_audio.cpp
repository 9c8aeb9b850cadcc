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

#include "vowelspace/audio.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cstdint>
#include <fstream>
#include <numbers>

#include "test_util.hpp"

using namespace vowelspace;

namespace {

// Hand-rolled 16-bit PCM encoder, written directly against the RIFF layout.
// Serves as the independent oracle for read_wav.
void write_pcm16_by_hand(const std::filesystem::path& path,
                         const std::vector<int16_t>& codes, uint32_t rate) {
  std::string out;
  auto u32 = [&](uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
  };
  auto u16 = [&](uint16_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char((v >> 8) & 0xff));
  };
  const uint32_t data_size = uint32_t(codes.size() * 2);
  out.append("RIFF");
  u32(36 + data_size);
  out.append("WAVEfmt ");
  u32(16);
  u16(1);  // PCM
  u16(1);  // mono
  u32(rate);
  u32(rate * 2);
  u16(2);
  u16(16);
  out.append("data");
  u32(data_size);
  for (int16_t c : codes) u16(uint16_t(c));
  std::ofstream os(path, std::ios::binary);
  os.write(out.data(), std::streamsize(out.size()));
}

SampleBuffer make_buffer(std::vector<double> samples, int rate) {
  return SampleBuffer{std::move(samples), rate};
}

SampleBuffer random_buffer(std::mt19937_64& rng, size_t n, int rate) {
  std::vector<double> s(n);
  for (auto& v : s) v = testutil::uniform(rng, -0.8, 0.8);
  return make_buffer(std::move(s), rate);
}

}  // namespace

TEST_CASE("read_wav decodes a hand-written silent PCM16 file") {
  testutil::ScratchDir dir("scratch_audio_silence");
  const auto path = dir.path() / "silence.wav";
  write_pcm16_by_hand(path, std::vector<int16_t>(44100, 0), 44100);

  SampleBuffer buf = read_wav(path);
  REQUIRE(buf.sample_rate == 44100);
  REQUIRE(buf.samples.size() == 44100);
  for (double s : buf.samples) REQUIRE(s == 0.0);
}

TEST_CASE("read_wav decodes hand-encoded full-scale PCM16 square wave") {
  testutil::ScratchDir dir("scratch_audio_square");
  const auto path = dir.path() / "square.wav";
  std::vector<int16_t> codes;
  for (int i = 0; i < 200; ++i) codes.push_back(i % 2 ? 32767 : -32768);
  write_pcm16_by_hand(path, codes, 8000);

  SampleBuffer buf = read_wav(path);
  REQUIRE(buf.samples.size() == 200);
  REQUIRE(buf.samples[1] == Catch::Approx(32767.0 / 32768.0).epsilon(0));
  REQUIRE(buf.samples[0] == Catch::Approx(-1.0).epsilon(0));
}

TEST_CASE("WAV round trip is sample-identical") {
  testutil::ScratchDir dir("scratch_audio_roundtrip");
  std::mt19937_64 rng(7001);

  SECTION("16-bit PCM") {
    const auto f = dir.path() / "a.wav";
    const auto f2 = dir.path() / "b.wav";
    write_wav(f, random_buffer(rng, 1000, 22050), WavEncoding::Pcm16);
    SampleBuffer first = read_wav(f);
    write_wav(f2, first, WavEncoding::Pcm16);
    SampleBuffer second = read_wav(f2);
    REQUIRE(first.sample_rate == second.sample_rate);
    REQUIRE(first.samples == second.samples);
  }

  SECTION("32-bit float") {
    const auto f = dir.path() / "a.wav";
    const auto f2 = dir.path() / "b.wav";
    write_wav(f, random_buffer(rng, 1000, 44100), WavEncoding::Float32);
    SampleBuffer first = read_wav(f);
    write_wav(f2, first, WavEncoding::Float32);
    SampleBuffer second = read_wav(f2);
    REQUIRE(first.samples == second.samples);
  }
}

TEST_CASE("read_wav error cases are distinct and reported") {
  testutil::ScratchDir dir("scratch_audio_errors");

  SECTION("missing file") {
    REQUIRE_THROWS_AS(read_wav(dir.path() / "nope.wav"), DataError);
  }
  SECTION("not a WAV") {
    const auto path = dir.path() / "bad.wav";
    std::ofstream(path) << "definitely not RIFF data";
    REQUIRE_THROWS_WITH(read_wav(path),
                        Catch::Matchers::ContainsSubstring("RIFF"));
  }
  SECTION("unsupported encoding") {
    // 8-bit PCM: valid RIFF, rejected encoding.
    const auto path = dir.path() / "pcm8.wav";
    std::string out;
    auto u32 = [&](uint32_t v) {
      for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
    };
    auto u16 = [&](uint16_t v) {
      out.push_back(char(v & 0xff));
      out.push_back(char((v >> 8) & 0xff));
    };
    out.append("RIFF");
    u32(36 + 4);
    out.append("WAVEfmt ");
    u32(16);
    u16(1);
    u16(1);
    u32(8000);
    u32(8000);
    u16(1);
    u16(8);
    out.append("data");
    u32(4);
    out.append(4, '\x80');
    std::ofstream(path, std::ios::binary).write(out.data(), 48);
    REQUIRE_THROWS_WITH(read_wav(path),
                        Catch::Matchers::ContainsSubstring("unsupported"));
  }
  SECTION("zero-length audio") {
    const auto path = dir.path() / "empty.wav";
    write_pcm16_by_hand(path, {}, 44100);
    REQUIRE_THROWS_WITH(read_wav(path),
                        Catch::Matchers::ContainsSubstring("no audio"));
  }
}

TEST_CASE("extract_center_segment follows the centering rule") {
  const int rate = 8000;
  std::vector<double> ramp(rate);
  for (int i = 0; i < rate; ++i) ramp[size_t(i)] = i;
  SampleBuffer buf = make_buffer(ramp, rate);

  SECTION("1.0 s buffer, 0.25 s request") {
    SampleBuffer seg = extract_center_segment(buf, 0.25);
    REQUIRE(seg.samples.size() == 2000);
    // start index floor(0.375 * rate)
    REQUIRE(seg.samples.front() == 3000.0);
    REQUIRE(seg.samples.back() == 4999.0);
  }
  SECTION("exact-length request is the identity") {
    SampleBuffer seg = extract_center_segment(buf, 1.0);
    REQUIRE(seg.samples == buf.samples);
  }
  SECTION("too-short buffer is an error") {
    SampleBuffer shortbuf = make_buffer(std::vector<double>(1600, 0.5), rate);
    REQUIRE_THROWS_AS(extract_center_segment(shortbuf, 0.25), DataError);
  }
  SECTION("idempotent at fixed duration") {
    SampleBuffer once = extract_center_segment(buf, 0.37);
    SampleBuffer twice = extract_center_segment(once, 0.37);
    REQUIRE(once.samples == twice.samples);
  }
}

TEST_CASE("raised-cosine fades") {
  SECTION("fade midpoint of a constant buffer is one half") {
    const int rate = 48000;  // 10 ms -> 480 samples, even, exact midpoint
    SampleBuffer buf = make_buffer(std::vector<double>(rate / 2, 1.0), rate);
    SampleBuffer faded = apply_raised_cosine_fades(buf, 0.010);
    REQUIRE(faded.samples[0] == 0.0);
    REQUIRE(faded.samples[240] == Catch::Approx(0.5).margin(1e-9));
    // mid-buffer untouched
    REQUIRE(faded.samples[rate / 4] == 1.0);
    REQUIRE(faded.samples.back() == 0.0);
  }
  SECTION("zero fade duration is the identity") {
    SampleBuffer buf = make_buffer({0.3, -0.2, 0.9, 0.1}, 44100);
    SampleBuffer faded = apply_raised_cosine_fades(buf, 0.0);
    REQUIRE(faded.samples == buf.samples);
  }
  SECTION("fades strictly reduce energy (direct summation oracle)") {
    const int rate = 44100;
    SampleBuffer buf = make_buffer(std::vector<double>(rate / 4, 1.0), rate);
    SampleBuffer faded = apply_raised_cosine_fades(buf, 0.010);
    double e_in = 0.0, e_out = 0.0;
    for (double s : buf.samples) e_in += s * s;
    for (double s : faded.samples) e_out += s * s;
    REQUIRE(e_out < e_in);
  }
  SECTION("fades longer than half the buffer are an error") {
    SampleBuffer buf = make_buffer(std::vector<double>(800, 1.0), 44100);
    REQUIRE_THROWS_AS(apply_raised_cosine_fades(buf, 0.010), DataError);
  }
  SECTION("reversal commutes with fading") {
    std::mt19937_64 rng(7002);
    SampleBuffer buf = random_buffer(rng, 4410, 44100);
    SampleBuffer faded = apply_raised_cosine_fades(buf, 0.013);

    SampleBuffer reversed = buf;
    std::reverse(reversed.samples.begin(), reversed.samples.end());
    SampleBuffer faded_reversed = apply_raised_cosine_fades(reversed, 0.013);
    std::reverse(faded_reversed.samples.begin(), faded_reversed.samples.end());
    for (size_t i = 0; i < buf.samples.size(); ++i)
      REQUIRE(faded.samples[i] ==
              Catch::Approx(faded_reversed.samples[i]).margin(1e-12));
  }
}

TEST_CASE("normalize_rms") {
  SECTION("unit sine to target 0.1 has peak 0.1*sqrt(2)") {
    std::vector<double> s(800);
    for (size_t i = 0; i < s.size(); ++i)
      s[i] = std::sin(2.0 * std::numbers::pi * double(i) / 8.0);
    SampleBuffer buf = make_buffer(std::move(s), 8000);
    SampleBuffer out = normalize_rms(buf, 0.1);
    double peak = 0.0;
    for (double v : out.samples) peak = std::max(peak, std::abs(v));
    REQUIRE(peak == Catch::Approx(0.1 * std::sqrt(2.0)).margin(1e-9));
  }
  SECTION("already at target is the identity") {
    std::mt19937_64 rng(7003);
    SampleBuffer buf = random_buffer(rng, 500, 44100);
    SampleBuffer once = normalize_rms(buf, 0.25);
    SampleBuffer twice = normalize_rms(once, 0.25);
    for (size_t i = 0; i < once.samples.size(); ++i)
      REQUIRE(twice.samples[i] ==
              Catch::Approx(once.samples[i]).margin(1e-12));
  }
  SECTION("output RMS matches an independent loop") {
    std::mt19937_64 rng(7004);
    SampleBuffer out = normalize_rms(random_buffer(rng, 3000, 44100), 0.1);
    double sum_sq = 0.0;
    for (double v : out.samples) sum_sq += v * v;
    const double measured = std::sqrt(sum_sq / double(out.samples.size()));
    REQUIRE(measured == Catch::Approx(0.1).margin(1e-9));
  }
  SECTION("all-zero input is an error") {
    SampleBuffer zeros = make_buffer(std::vector<double>(100, 0.0), 44100);
    REQUIRE_THROWS_AS(normalize_rms(zeros, 0.1), DataError);
  }
  SECTION("scale invariance: normalize(c*x) == normalize(x)") {
    std::mt19937_64 rng(7005);
    SampleBuffer buf = random_buffer(rng, 1000, 44100);
    for (double c : {0.01, 0.5, 3.0, 250.0}) {
      SampleBuffer scaled = buf;
      for (double& v : scaled.samples) v *= c;
      SampleBuffer a = normalize_rms(buf, 0.1);
      SampleBuffer b = normalize_rms(scaled, 0.1);
      for (size_t i = 0; i < a.samples.size(); ++i)
        REQUIRE(b.samples[i] == Catch::Approx(a.samples[i]).margin(1e-9));
    }
  }
}
