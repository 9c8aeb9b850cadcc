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

#include <array>
#include <string>
#include <string_view>

#include "vowelspace/error.hpp"

namespace vowelspace {

// The eight steady-state vowel categories. ASCII labels are used throughout
// file formats: oe stands for the front rounded mid vowel, eh for the open-mid
// front vowel.
enum class Vowel { I, Y, E, Oe, Eh, A, O, U };

inline constexpr std::array<Vowel, 8> kAllVowels = {
    Vowel::I, Vowel::Y, Vowel::E, Vowel::Oe,
    Vowel::Eh, Vowel::A, Vowel::O, Vowel::U};

inline std::string_view to_label(Vowel v) {
  switch (v) {
    case Vowel::I: return "i";
    case Vowel::Y: return "y";
    case Vowel::E: return "e";
    case Vowel::Oe: return "oe";
    case Vowel::Eh: return "eh";
    case Vowel::A: return "a";
    case Vowel::O: return "o";
    case Vowel::U: return "u";
  }
  throw DataError("invalid vowel enum value");
}

inline Vowel vowel_from_label(std::string_view s) {
  for (Vowel v : kAllVowels) {
    if (to_label(v) == s) return v;
  }
  throw DataError("unknown vowel label '" + std::string(s) +
                  "' (expected one of i y e oe eh a o u)");
}

}  // namespace vowelspace
