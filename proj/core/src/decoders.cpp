// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "maed/decoders.hpp"

#include "maed/geometry.hpp"
#include "maed/ops.hpp"

namespace maed::decoders {

using kinematics::kJointCount;
using kinematics::kShapeDims;

namespace {

nn::Linear make_head(std::size_t in, std::size_t out, Rng& rng, HeadInit init, const std::vector<double>& bias) {
    if (init == HeadInit::kXavier) {
        nn::Linear l = nn::Linear::xavier(in, out, rng);
        for (double& b : l.bias.mutable_data()) b = rng.uniform(-0.5, 0.5);
        return l;
    }
    nn::Linear l = nn::Linear::zeros(in, out);
    auto b = l.bias.mutable_data();
    for (std::size_t i = 0; i < out && i < bias.size(); ++i) b[i] = bias[i];
    return l;
}

const std::vector<double> kIdentity6d = {1.0, 0.0, 0.0, 0.0, 1.0, 0.0};
const std::vector<double> kCameraBias = {kInitialCameraScale, 0.0, 0.0};

}  // namespace

KtdWeights KtdWeights::make(const kinematics::KinematicTree& tree, std::size_t width, Rng& rng, HeadInit init) {
    KtdWeights w;
    w.tree = tree;
    w.width = width;
    w.joints.reserve(kJointCount);
    for (std::size_t k = 0; k < kJointCount; ++k) {
        const std::size_t in = width + 6 * kinematics::ancestors(tree, k).size();
        w.joints.push_back(make_head(in, 6, rng, init, kIdentity6d));
    }
    w.shape = make_head(width, kShapeDims, rng, init, {});
    w.camera = make_head(width, 3, rng, init, kCameraBias);
    return w;
}

std::size_t KtdWeights::input_width(std::size_t k) const { return joints.at(k).in_features(); }

std::size_t KtdWeights::expected_parameter_count(const kinematics::KinematicTree& tree, std::size_t width) {
    std::size_t ancestor_total = 0;
    for (std::size_t k = 0; k < kJointCount; ++k) ancestor_total += kinematics::ancestors(tree, k).size();
    return 6 * (kJointCount * (width + 1) + 6 * ancestor_total) + (kShapeDims + 3) * (width + 1);
}

void KtdWeights::collect(const std::string& prefix, nn::ParamList& out) const {
    for (std::size_t k = 0; k < joints.size(); ++k) joints[k].collect(prefix + ".joint" + std::to_string(k), out);
    shape.collect(prefix + ".shape", out);
    camera.collect(prefix + ".camera", out);
}

SmplParams ktd_decode(const KtdWeights& w, const Tensor& x) {
    if (x.rank() != 2 || x.shape()[1] != w.width) {
        throw ShapeError("ktd_decode: expected features (F, " + std::to_string(w.width) + "), got " +
                         to_string(x.shape()));
    }
    if (w.joints.size() != kJointCount) throw ShapeError("ktd_decode: expected 24 joint regressors");
    const std::size_t frames = x.shape()[0];

    std::vector<Tensor> omega(kJointCount);
    for (std::size_t k : w.tree.topological_order()) {
        const auto anc = kinematics::ancestors(w.tree, k);
        const std::size_t expected = w.width + 6 * anc.size();
        if (w.joints[k].in_features() != expected) {
            throw ShapeError("ktd_decode: regressor for joint " + std::to_string(k) + " takes " +
                             std::to_string(w.joints[k].in_features()) + " inputs, expected " +
                             std::to_string(expected));
        }
        if (anc.empty()) {
            omega[k] = w.joints[k](x);
            continue;
        }
        std::vector<Tensor> parts{x};
        for (std::size_t a : anc) parts.push_back(omega[a]);
        omega[k] = w.joints[k](concat(parts, 1));
    }

    std::vector<Tensor> rows;
    rows.reserve(kJointCount);
    for (std::size_t k = 0; k < kJointCount; ++k) rows.push_back(reshape(omega[k], {frames, 1, 6}));
    return {concat(rows, 1), w.shape(x), w.camera(x)};
}

IterativeWeights IterativeWeights::make(std::size_t width, std::size_t iterations, Rng& rng, HeadInit init) {
    IterativeWeights w;
    w.iterations = iterations;
    std::vector<double> theta0(kParamWidth, 0.0);
    for (std::size_t k = 0; k < kJointCount; ++k)
        for (std::size_t i = 0; i < 6; ++i) theta0[6 * k + i] = kIdentity6d[i];
    theta0[kPoseWidth + kShapeDims] = kInitialCameraScale;
    w.regressor = make_head(width + kParamWidth, kParamWidth, rng, init, {});
    w.initial = nn::parameter({kParamWidth}, std::move(theta0));
    return w;
}

void IterativeWeights::collect(const std::string& prefix, nn::ParamList& out) const {
    regressor.collect(prefix + ".regressor", out);
    out.push_back({prefix + ".initial", initial});
}

SmplParams split_params(const Tensor& theta) {
    if (theta.rank() != 2 || theta.shape()[1] != kParamWidth) {
        throw ShapeError("split_params: expected (F, 157), got " + to_string(theta.shape()));
    }
    const std::size_t frames = theta.shape()[0];
    return {reshape(slice(theta, 1, 0, kPoseWidth), {frames, kJointCount, 6}),
            slice(theta, 1, kPoseWidth, kPoseWidth + kShapeDims),
            slice(theta, 1, kPoseWidth + kShapeDims, kParamWidth)};
}

SmplParams iterative_decode(const IterativeWeights& w, const Tensor& x) {
    if (x.rank() != 2 || x.shape()[1] + kParamWidth != w.regressor.in_features()) {
        throw ShapeError("iterative_decode: feature width does not match the regressor");
    }
    const std::size_t frames = x.shape()[0];
    Tensor theta = repeat(reshape(w.initial, {1, kParamWidth}), 0, frames);
    for (std::size_t i = 0; i < w.iterations; ++i) theta = add(theta, w.regressor(concat({x, theta}, 1)));
    return split_params(theta);
}

SmplOutput smpl_forward(const kinematics::KinematicTree& body, const SmplParams& params) {
    const Tensor rotations = geometry::rot6d_to_matrix(params.pose);
    const Tensor rest = kinematics::rest_joints(body, params.beta);
    const kinematics::FkTensors fk = kinematics::forward_kinematics(body, rotations, rest);
    return {fk.joints, geometry::project(fk.joints, params.camera), rotations};
}

}  // namespace maed::decoders
