#include "skelaug/numcore/adam.hpp"

#include <cmath>

namespace skelaug::num {

void adam_step(ParamSet& params, AdamState& state) {
    for (const auto& p : params.entries())
        if (!p.has_grad || p.grad.shape() != p.value.shape())
            throw contract_error("adam_step: parameter '" + p.name + "' has no gradient");

    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);

    for (auto& p : params.entries()) {
        auto mi = state.m.find(p.name);
        if (mi == state.m.end()) {
            mi = state.m.emplace(p.name, NDArray(p.value.shape())).first;
            state.v.emplace(p.name, NDArray(p.value.shape()));
        }
        NDArray& m = mi->second;
        NDArray& v = state.v.at(p.name);
        if (m.shape() != p.value.shape())
            throw contract_error("adam_step: moment shape drifted for '" + p.name + "'");
        for (std::int64_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad[i];
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            p.value[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
    params.clear_grads();
}

}  // namespace skelaug::num
