#include "samn/adam.hpp"

#include <cmath>

namespace samn {

void adam_step(const std::vector<Matrix*>& params,
               const std::vector<const Matrix*>& grads, AdamState& state,
               double lr) {
    if (lr <= 0.0) throw ConfigError("adam learning rate must be positive");
    if (params.size() != grads.size()) {
        throw DimensionError("adam parameter/gradient count mismatch");
    }
    if (state.first_moment.empty()) {
        for (const Matrix* p : params) {
            state.first_moment.emplace_back(p->rows(), p->cols());
            state.second_moment.emplace_back(p->rows(), p->cols());
        }
    }
    if (state.first_moment.size() != params.size()) {
        throw DimensionError("adam state does not match parameter count");
    }

    state.step += 1;
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

    for (std::size_t k = 0; k < params.size(); ++k) {
        Matrix& p = *params[k];
        const Matrix& g = *grads[k];
        Matrix& m = state.first_moment[k];
        Matrix& v = state.second_moment[k];
        if (!p.same_shape(g) || !p.same_shape(m)) {
            throw DimensionError("adam shape mismatch at parameter " +
                                 std::to_string(k) + ": " + p.shape_str() +
                                 " vs " + g.shape_str());
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double gi = g.data()[i];
            m.data()[i] = b1 * m.data()[i] + (1.0 - b1) * gi;
            v.data()[i] = b2 * v.data()[i] + (1.0 - b2) * gi * gi;
            const double mhat = m.data()[i] / c1;
            const double vhat = v.data()[i] / c2;
            p.data()[i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
        }
        ensure_finite(p, "adam_step");
    }
}

}  // namespace samn
