#pragma once

// Vowel presets: pitch anchors and smooth area functions (33 samples, glottis
// to lips, endpoints anchored at 1). /a/ has a pharyngeal constriction and a
// wide oral cavity, /i/ a wide pharynx and an anterior constriction, /u/ a
// velar constriction and a narrowed lip end. The same tables ship as
// data/presets/<vowel>.txt.

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "webster/acoustics.hpp"
#include "webster/errors.hpp"

namespace webster {

struct VowelPreset {
  std::string name;
  double f0_anchor = 200.0;  // Hz
  double duration = 0.8;     // s
  AreaFunction area;
};

namespace detail {

inline constexpr std::array<double, 33> kAreaA = {
    1.0000, 0.9875, 0.9650, 0.9263, 0.8651, 0.7784, 0.6705, 0.5553, 0.4553, 0.3951, 0.3927,
    0.4533, 0.5694, 0.7270, 0.9150, 1.1302, 1.3769, 1.6591, 1.9717, 2.2939, 2.5897, 2.8150,
    2.9305, 2.9144, 2.7694, 2.5231, 2.2186, 1.9028, 1.6145, 1.3776, 1.2002, 1.0780, 1.0000};

inline constexpr std::array<double, 33> kAreaI = {
    1.0000, 1.0236, 1.0654, 1.1346, 1.2407, 1.3903, 1.5834, 1.8093, 2.0454, 2.2592, 2.4156,
    2.4859, 2.4566, 2.3335, 2.1400, 1.9091, 1.6732, 1.4546, 1.2585, 1.0740, 0.8829, 0.6767,
    0.4732, 0.3165, 0.2547, 0.3072, 0.4488, 0.6243, 0.7811, 0.8918, 0.9559, 0.9870, 1.0000};

inline constexpr std::array<double, 33> kAreaU = {
    1.0000, 1.0259, 1.0650, 1.1207, 1.1943, 1.2832, 1.3803, 1.4737, 1.5487, 1.5908, 1.5886,
    1.5358, 1.4320, 1.2831, 1.1030, 0.9146, 0.7485, 0.6352, 0.5937, 0.6228, 0.7007, 0.7938,
    0.8664, 0.8878, 0.8380, 0.7208, 0.5774, 0.4779, 0.4806, 0.5886, 0.7494, 0.8983, 1.0000};

}  // namespace detail

inline const std::array<std::string_view, 3>& vowel_names() {
  static const std::array<std::string_view, 3> names{"a", "i", "u"};
  return names;
}

inline VowelPreset vowel_preset(std::string_view name, double length = 0.17) {
  auto make = [&](double f0, const auto& table) {
    return VowelPreset{std::string(name), f0, 0.8, AreaFunction(length, std::vector<double>(table.begin(), table.end()))};
  };
  if (name == "a") return make(200.0, detail::kAreaA);
  if (name == "i") return make(240.0, detail::kAreaI);
  if (name == "u") return make(180.0, detail::kAreaU);
  throw ConfigError("unknown vowel preset '" + std::string(name) + "' (expected a, i or u)");
}

}  // namespace webster
