#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tfe/grid.hpp"

namespace tfe {

/// Initial-condition preset. `name` selects the profile; the other fields are
/// read as that profile needs them. Every preset is mean-removed before use.
struct InitialConditionPreset {
  std::string name;  // cosine | gaussian_bump | cone | random_bandlimited | from_file
  double amplitude = 1e-3;
  int k = 1;                            // cosine mode index
  std::vector<double> center = {0.5};   // one value per axis, or one broadcast
  double width = 0.1;                   // gaussian
  double slope = 1.0;                   // cone
  int max_mode = 4;                     // random_bandlimited
  std::uint64_t seed = 1;               // random_bandlimited
  std::string path;                     // from_file
};

bool preset_exists(const std::string& name);

/// Builds the profile on the grid, removes the mean (reported through
/// removed_mean when non-null), and certifies the result mean-zero.
/// Seeded presets are bit-reproducible. Throws on unknown preset or
/// unreadable/ill-sized file.
Field make_initial_condition(const Grid& g, const InitialConditionPreset& p,
                             double* removed_mean = nullptr);

/// Deterministic battery of mean-zero band-limited fields for inequality
/// checks; includes the flat state as the first entry.
std::vector<Field> make_test_battery(const Grid& g, int count, double amplitude,
                                     std::uint64_t seed);

}  // namespace tfe
