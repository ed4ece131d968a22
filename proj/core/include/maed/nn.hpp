// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "maed/random.hpp"
#include "maed/tensor.hpp"

namespace maed::nn {

struct NamedTensor {
    std::string name;
    Tensor tensor;
};
using ParamList = std::vector<NamedTensor>;

/// Trainable leaf.
Tensor parameter(Shape shape, std::vector<double> values);
Tensor normal_parameter(Shape shape, double stddev, Rng& rng);

std::vector<Tensor> tensors(const ParamList& params);
std::size_t parameter_count(const ParamList& params);

/// Affine map y = x·W + b, W stored as (in, out).
struct Linear {
    Tensor weight;
    Tensor bias;

    /// Xavier-uniform weights, zero bias.
    static Linear xavier(std::size_t in, std::size_t out, Rng& rng);
    static Linear zeros(std::size_t in, std::size_t out);

    std::size_t in_features() const { return weight.shape()[0]; }
    std::size_t out_features() const { return weight.shape()[1]; }
    Tensor operator()(const Tensor& x) const;
    void collect(const std::string& prefix, ParamList& out) const;
};

struct LayerNorm {
    Tensor gain;
    Tensor bias;

    static LayerNorm make(std::size_t width);
    Tensor operator()(const Tensor& x) const;
    void collect(const std::string& prefix, ParamList& out) const;
};

/// Two affine maps with a GELU in between.
struct Mlp {
    Linear fc1;
    Linear fc2;

    static Mlp make(std::size_t width, std::size_t hidden, Rng& rng);
    Tensor operator()(const Tensor& x) const;
    void collect(const std::string& prefix, ParamList& out) const;
};

}  // namespace maed::nn
