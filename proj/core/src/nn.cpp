// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "maed/nn.hpp"

#include <cmath>

#include "maed/ops.hpp"

namespace maed::nn {

Tensor parameter(Shape shape, std::vector<double> values) {
    return Tensor::from(std::move(shape), std::move(values), /*requires_grad=*/true);
}

Tensor normal_parameter(Shape shape, double stddev, Rng& rng) {
    std::vector<double> values(numel(shape));
    for (double& v : values) v = rng.normal(0.0, stddev);
    return parameter(std::move(shape), std::move(values));
}

std::vector<Tensor> tensors(const ParamList& params) {
    std::vector<Tensor> out;
    out.reserve(params.size());
    for (const auto& p : params) out.push_back(p.tensor);
    return out;
}

std::size_t parameter_count(const ParamList& params) {
    std::size_t n = 0;
    for (const auto& p : params) n += p.tensor.numel();
    return n;
}

Linear Linear::xavier(std::size_t in, std::size_t out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    std::vector<double> w(in * out);
    for (double& v : w) v = rng.uniform(-bound, bound);
    return {parameter({in, out}, std::move(w)), parameter({out}, std::vector<double>(out, 0.0))};
}

Linear Linear::zeros(std::size_t in, std::size_t out) {
    return {parameter({in, out}, std::vector<double>(in * out, 0.0)), parameter({out}, std::vector<double>(out, 0.0))};
}

Tensor Linear::operator()(const Tensor& x) const { return linear(x, weight, bias); }

void Linear::collect(const std::string& prefix, ParamList& out) const {
    out.push_back({prefix + ".weight", weight});
    out.push_back({prefix + ".bias", bias});
}

LayerNorm LayerNorm::make(std::size_t width) {
    return {parameter({width}, std::vector<double>(width, 1.0)), parameter({width}, std::vector<double>(width, 0.0))};
}

Tensor LayerNorm::operator()(const Tensor& x) const { return layer_norm(x, gain, bias); }

void LayerNorm::collect(const std::string& prefix, ParamList& out) const {
    out.push_back({prefix + ".gain", gain});
    out.push_back({prefix + ".bias", bias});
}

Mlp Mlp::make(std::size_t width, std::size_t hidden, Rng& rng) {
    Linear fc1 = Linear::xavier(width, hidden, rng);
    Linear fc2 = Linear::xavier(hidden, width, rng);
    return {std::move(fc1), std::move(fc2)};
}

Tensor Mlp::operator()(const Tensor& x) const { return fc2(gelu(fc1(x))); }

void Mlp::collect(const std::string& prefix, ParamList& out) const {
    fc1.collect(prefix + ".fc1", out);
    fc2.collect(prefix + ".fc2", out);
}

}  // namespace maed::nn
