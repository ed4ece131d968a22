// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "maed/tensor.hpp"

// Differentiable operations on maed::Tensor.
//
// Broadcasting is limited to leading axes: a binary elementwise op accepts
// operands whose shapes are equal, or where the lower-rank shape equals the
// trailing axes of the other (e.g. a bias of shape (d) against (B, T, d)).
// Anything else must be expanded explicitly with repeat().
namespace maed {

Tensor reshape(const Tensor& t, Shape shape);
/// Physically reorders axes; `perm[i]` names the input axis that becomes output axis i.
Tensor transpose(const Tensor& t, const std::vector<std::size_t>& perm);

/// Matrix product over the last two axes. `b` may be rank 2 (shared across
/// all of a's leading axes), `a` may be rank 2 (shared across b's), or both
/// carry identical leading batch shapes.
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double value);

/// Sum of all elements, shape (1).
Tensor sum(const Tensor& a);
/// Sum along one axis, which is removed (a rank-1 input yields shape (1)).
Tensor sum(const Tensor& a, int axis);
Tensor mean(const Tensor& a);

/// Euclidean norm over the last axis, which is removed. The gradient at a
/// zero vector is taken to be zero.
Tensor norm(const Tensor& a);

/// Normalizes over the last axis, then applies per-channel gain and bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);
/// Exact (erf-based) GELU.
Tensor gelu(const Tensor& x);
/// Max-subtracted softmax along `axis`.
Tensor softmax(const Tensor& x, int axis);

Tensor concat(const std::vector<Tensor>& parts, int axis);
/// Elements [begin, end) along `axis`.
Tensor slice(const Tensor& t, int axis, std::size_t begin, std::size_t end);
/// Expands an axis of extent 1 to `count` copies.
Tensor repeat(const Tensor& t, int axis, std::size_t count);

/// x·W + b with W of shape (in, out) and b of shape (out).
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// Normalizes a possibly negative axis index against `rank`.
std::size_t resolve_axis(int axis, std::size_t rank);

}  // namespace maed
