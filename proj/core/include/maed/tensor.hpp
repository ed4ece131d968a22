// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace maed {

using Shape = std::vector<std::size_t>;

class ShapeError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

namespace detail {

struct Node;
using NodePtr = std::shared_ptr<Node>;

// Vector-Jacobian product: reads grad_out, accumulates into parents' grads.
using BackwardFn = std::function<void(std::span<const double> grad_out, std::span<const NodePtr> parents)>;

struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until first accumulation
    std::vector<NodePtr> parents;
    BackwardFn backward;
    bool requires_grad = false;

    bool is_leaf() const { return !backward; }
    // Returns the grad buffer, allocating it zero-filled on first use.
    std::span<double> grad_buffer();
};

}  // namespace detail

/// Dense row-major float64 tensor that records the operation which produced
/// it. Handles are cheap to copy and share the underlying node; the graph is
/// released once the last handle referencing it goes away.
class Tensor {
   public:
    Tensor() = default;

    static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t numel() const;
    std::size_t dim(int axis) const;

    std::span<const double> data() const;
    // Writable storage. Only the optimizer and parameter loaders should use this.
    std::span<double> mutable_data();
    double item() const;
    double at(std::initializer_list<std::size_t> index) const;

    bool requires_grad() const;
    bool has_grad() const;
    std::span<const double> grad() const;
    void zero_grad();

    /// Reverse-mode sweep from this scalar. Leaf gradients accumulate across
    /// calls until zero_grad() is invoked.
    void backward() const;

    /// Same data, no history.
    Tensor detach() const;

    const detail::NodePtr& node() const { return node_; }
    explicit Tensor(detail::NodePtr node) : node_(std::move(node)) {}

   private:
    detail::NodePtr node_;
};

/// Whether newly created op results record history on this thread.
bool grad_enabled();

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
   public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

   private:
    bool previous_;
};

/// Builds a differentiable result from precomputed values. `vjp` is only
/// retained when some input requires a gradient and recording is enabled.
/// This is the extension point fused operations in other modules use.
Tensor make_result(Shape shape, std::vector<double> values, std::vector<Tensor> inputs, detail::BackwardFn vjp);

}  // namespace maed
