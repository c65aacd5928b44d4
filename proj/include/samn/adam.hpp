// Adam parameter updates with bias correction.
#pragma once

#include <vector>

#include "samn/matrix.hpp"

namespace samn {

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long step = 0;
    std::vector<Matrix> first_moment;   // lazily sized on the first update
    std::vector<Matrix> second_moment;
};

// In-place Adam step over a parameter list. `params` and `grads` are aligned;
// the state accumulators are created as zeros on the first call and the step
// count increases by one per call. Throws ConfigError for lr <= 0 and
// DimensionError on any shape mismatch.
void adam_step(const std::vector<Matrix*>& params,
               const std::vector<const Matrix*>& grads, AdamState& state,
               double lr);

}  // namespace samn
