#pragma once

#include "prescriptor/weights.hpp"

#include <cstdint>
#include <vector>

namespace prescriptor {

struct CensoredWeightInput {
  WeightVector base;                 // nonnegative
  Vector u;                          // observed min{Y, V}, length n_train
  std::vector<std::uint8_t> delta;   // 1 = uncensored
};

// Conditional Kaplan-Meier reweighting. Censored points get zero weight;
// mass is not renormalized when the largest observation is censored.
// Equal u values order uncensored before censored, then by index.
WeightVector km_transform(const CensoredWeightInput& input);

}  // namespace prescriptor
