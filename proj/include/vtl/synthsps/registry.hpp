// Copyright 2026 The vtl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace vtl {

inline constexpr std::size_t kNumProperties = 15;
inline constexpr std::size_t kNumRepeats = 5;

using TactileVector = std::array<double, kNumProperties>;

enum class TactileCategory { kFriction, kTexture, kThermal, kCompliance, kAdhesion };

constexpr std::string_view category_name(TactileCategory c) {
  switch (c) {
    case TactileCategory::kFriction: return "friction";
    case TactileCategory::kTexture: return "texture";
    case TactileCategory::kThermal: return "thermal";
    case TactileCategory::kCompliance: return "compliance";
    case TactileCategory::kAdhesion: return "adhesion";
  }
  return "unknown";
}

struct PropertyInfo {
  std::string_view acronym;
  std::string_view name;
  TactileCategory category;
  std::string_view description;
};

/// The fifteen tactile properties in canonical order. Every TactileVector,
/// measurement matrix, checkpoint and report uses this order.
inline constexpr std::array<PropertyInfo, kNumProperties> kPropertyRegistry{{
    {"fRS", "Sliding Resistance", TactileCategory::kFriction,
     "The perceived effort required to initiate sliding on a surface, ranging from low grip to high grip."},
    {"fST", "Tactile Stiction", TactileCategory::kFriction,
     "The perceived effort required to continue sliding over a surface, ranging from slippery to resistive."},
    {"uCO", "Microtexture Coarseness", TactileCategory::kTexture,
     "The perceived spacing of small (<1mm spacing) features, ranging from fine to coarse."},
    {"uRO", "Microtexture Roughness", TactileCategory::kTexture,
     "The intensity of small (<1mm) features that creates the perception of roughness, ranging from smooth to rough."},
    {"mRG", "Macrotexture Regularity", TactileCategory::kTexture,
     "The perceived uniformity of large (>1mm spacing) features, ranging from random to regular."},
    {"mCO", "Macrotexture Coarseness", TactileCategory::kTexture,
     "The perceived spacing of large (>1mm spacing) features, ranging from fine to coarse."},
    {"mTX", "Macrotexture", TactileCategory::kTexture,
     "The intensity of large (>1mm) features that creates the perception of texture, ranging from smooth to textured."},
    {"tCO", "Thermal Cooling", TactileCategory::kThermal,
     "The initial rate that a surface draws heat from the fingertip, ranging from warm to cool."},
    {"tPR", "Thermal Persistence", TactileCategory::kThermal,
     "The extent to which a surface continues to draw heat from the fingertip, ranging from transient cooling to "
     "sustained cooling."},
    {"cCM", "Tactile Compliance", TactileCategory::kCompliance,
     "The degree to which a surface deforms under pressure, ranging from rigid to compliant."},
    {"cDF", "Local Deformation", TactileCategory::kCompliance,
     "The degree to which the surface wraps around the fingertip when being deformed, ranging from flat to high wrap."},
    {"cDP", "Damping", TactileCategory::kCompliance,
     "The speed with which a surface returns to its original shape after being deformed, ranging from springy to "
     "damped."},
    {"cRX", "Relaxation", TactileCategory::kCompliance,
     "The degree to which a surface stops pushing back after being deformed, ranging from maintaining force to "
     "relaxing."},
    {"cYD", "Yielding", TactileCategory::kCompliance,
     "The degree to which a surface remains deformed after being pressed, ranging from recovering shape to remaining "
     "deformed."},
    {"aTK", "Adhesive Tack", TactileCategory::kAdhesion,
     "The perceived effort required to break contact with a surface, ranging from no adhesion to sticky."},
}};

namespace prop {
inline constexpr std::size_t fRS = 0, fST = 1, uCO = 2, uRO = 3, mRG = 4, mCO = 5, mTX = 6, tCO = 7, tPR = 8,
                             cCM = 9, cDF = 10, cDP = 11, cRX = 12, cYD = 13, aTK = 14;
}

inline std::optional<std::size_t> property_index(std::string_view acronym) {
  for (std::size_t i = 0; i < kNumProperties; ++i)
    if (kPropertyRegistry[i].acronym == acronym) return i;
  return std::nullopt;
}

}  // namespace vtl
