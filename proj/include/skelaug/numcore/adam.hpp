#pragma once

#include <cstdint>
#include <unordered_map>

#include "skelaug/numcore/params.hpp"

namespace skelaug::num {

// Adam with bias correction. Moment arrays are keyed by parameter name and
// allocated lazily on the first step.
struct AdamState {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t step_count = 0;
    std::unordered_map<std::string, NDArray> m;
    std::unordered_map<std::string, NDArray> v;
};

// One update over every parameter; requires populated gradients, clears them.
void adam_step(ParamSet& params, AdamState& state);

}  // namespace skelaug::num
