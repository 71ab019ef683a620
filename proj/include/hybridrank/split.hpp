#pragma once

#include <array>
#include <cstdint>

#include "hybridrank/dataset.hpp"

namespace hybridrank {

// Per-user holdout over a shared vocabulary. train/validation/test partition
// the filtered interactions of every user.
struct SplitDataset {
  Dataset train;
  Dataset validation;
  Dataset test;
  std::array<double, 3> ratios{0.8, 0.1, 0.1};
  std::uint64_t seed = 0;
};

// Shuffles each user's interactions with a per-user substream of seed, then
// cuts [train | validation | test] with floor-sized validation and test;
// leftovers go to train. Every kept user retains at least one train row (taken
// back from validation, then test, when the floors would consume everything).
SplitDataset split_per_user(const Dataset& data, const std::array<double, 3>& ratios,
                            std::uint64_t seed);

}  // namespace hybridrank
