// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "maed/adam.hpp"

#include <cmath>
#include <string>

namespace maed {

void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m, std::span<double> v,
                 std::uint64_t step, const AdamConfig& config) {
    if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size()) {
        throw ShapeError("adam_update: buffer sizes differ");
    }
    if (!(config.lr >= 0.0)) throw std::invalid_argument("adam: learning rate must be non-negative");
    const double t = static_cast<double>(step);
    const double c1 = 1.0 - std::pow(config.beta1, t);
    const double c2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i];
        m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
        v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
        const double m_hat = m[i] / c1;
        const double v_hat = v[i] / c2;
        param[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
}

void adam_step(std::span<Tensor> params, AdamState& state) {
    if (state.first_moment.empty()) {
        for (const auto& p : params) {
            state.first_moment.emplace_back(p.numel(), 0.0);
            state.second_moment.emplace_back(p.numel(), 0.0);
        }
    }
    if (state.first_moment.size() != params.size()) {
        throw ShapeError("adam_step: state tracks " + std::to_string(state.first_moment.size()) + " parameters, got " +
                         std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (state.first_moment[i].size() != params[i].numel()) {
            throw ShapeError("adam_step: moment buffer " + std::to_string(i) + " does not match parameter shape " +
                             to_string(params[i].shape()));
        }
    }
    ++state.step;
    std::vector<double> zeros;
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::span<const double> g = params[i].grad();
        if (g.empty()) {
            zeros.assign(params[i].numel(), 0.0);
            g = zeros;
        }
        adam_update(params[i].mutable_data(), g, state.first_moment[i], state.second_moment[i], state.step,
                    state.config);
    }
}

}  // namespace maed
