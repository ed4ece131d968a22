// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "maed/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace maed {

std::size_t numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

std::string to_string(const Shape& shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ')';
    return os.str();
}

namespace detail {

std::span<double> Node::grad_buffer() {
    if (grad.empty()) grad.assign(data.size(), 0.0);
    return grad;
}

}  // namespace detail

namespace {

thread_local bool g_grad_enabled = true;

void validate_shape(const Shape& shape) {
    for (std::size_t e : shape) {
        if (e == 0) throw ShapeError("tensor extents must be positive, got " + to_string(shape));
    }
}

const detail::Node& checked(const detail::NodePtr& node) {
    if (!node) throw std::logic_error("use of undefined tensor");
    return *node;
}

}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
    validate_shape(shape);
    if (maed::numel(shape) != values.size()) {
        throw ShapeError("shape " + to_string(shape) + " holds " + std::to_string(maed::numel(shape)) + " values, got " +
                         std::to_string(values.size()));
    }
    auto node = std::make_shared<detail::Node>();
    node->shape = std::move(shape);
    node->data = std::move(values);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    validate_shape(shape);
    std::vector<double> values(maed::numel(shape), value);
    return from(std::move(shape), std::move(values), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({1}, {value}, requires_grad); }

const Shape& Tensor::shape() const { return checked(node_).shape; }
std::size_t Tensor::numel() const { return checked(node_).data.size(); }

std::size_t Tensor::dim(int axis) const {
    const auto& s = shape();
    const int r = static_cast<int>(s.size());
    const int a = axis < 0 ? axis + r : axis;
    if (a < 0 || a >= r) throw ShapeError("axis " + std::to_string(axis) + " out of range for " + to_string(s));
    return s[static_cast<std::size_t>(a)];
}

std::span<const double> Tensor::data() const { return checked(node_).data; }

std::span<double> Tensor::mutable_data() {
    checked(node_);
    return node_->data;
}

double Tensor::item() const {
    if (numel() != 1) throw ShapeError("item() on tensor of shape " + to_string(shape()));
    return node_->data[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
    const auto& s = shape();
    if (index.size() != s.size()) throw ShapeError("index rank mismatch for " + to_string(s));
    std::size_t flat = 0;
    std::size_t axis = 0;
    for (std::size_t i : index) {
        if (i >= s[axis]) throw ShapeError("index out of range for " + to_string(s));
        flat = flat * s[axis] + i;
        ++axis;
    }
    return node_->data[flat];
}

bool Tensor::requires_grad() const { return checked(node_).requires_grad; }
bool Tensor::has_grad() const { return !checked(node_).grad.empty(); }

std::span<const double> Tensor::grad() const { return checked(node_).grad; }

void Tensor::zero_grad() {
    checked(node_);
    node_->grad.clear();
}

Tensor Tensor::detach() const {
    const auto& n = checked(node_);
    return from(n.shape, n.data, false);
}

void Tensor::backward() const {
    const auto& root = checked(node_);
    if (root.data.size() != 1) throw ShapeError("backward() requires a scalar loss, got " + to_string(root.shape));
    if (!root.requires_grad) return;

    // Iterative post-order DFS; reversing gives a topological order from the loss.
    std::vector<detail::Node*> order;
    std::unordered_set<const detail::Node*> visited;
    std::vector<std::pair<detail::Node*, std::size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    visited.insert(node_.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            detail::Node* parent = node->parents[next++].get();
            if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    node_->grad_buffer()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Node* node = *it;
        if (node->is_leaf()) continue;
        if (!node->grad.empty()) node->backward(node->grad, node->parents);
        // Interior buffers are scratch; only leaves keep accumulated gradients.
        node->grad.clear();
        node->grad.shrink_to_fit();
    }
}

Tensor make_result(Shape shape, std::vector<double> values, std::vector<Tensor> inputs, detail::BackwardFn vjp) {
    Tensor out = Tensor::from(std::move(shape), std::move(values));
    if (!g_grad_enabled) return out;
    const bool any = std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
    if (!any) return out;
    auto& node = const_cast<detail::NodePtr&>(out.node());
    node->requires_grad = true;
    node->parents.reserve(inputs.size());
    for (auto& t : inputs) node->parents.push_back(t.node());
    node->backward = std::move(vjp);
    return out;
}

}  // namespace maed
