// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "maed/losses.hpp"

#include <cmath>
#include <string>

#include "maed/ops.hpp"

namespace maed::losses {

void LossWeights::validate() const {
    for (double v : {lambda_2d, lambda_3d, lambda_pose, lambda_shape, lambda_norm}) {
        if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("loss weights must be finite and >= 0");
    }
}

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string("total_loss: ") + what + " shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
    }
}

// (F, J, c) -> (F): sum over joints of the per-joint distance.
Tensor joint_distance(const Tensor& p, const Tensor& g) { return sum(norm(sub(p, g)), 1); }

}  // namespace

LossReport total_loss(const Prediction& pred, const Target& gt, const LossWeights& w) {
    require_same(pred.joints3d, gt.joints3d, "joints3d");
    require_same(pred.joints2d, gt.joints2d, "joints2d");
    require_same(pred.pose_aa, gt.pose_aa, "pose");
    require_same(pred.beta, gt.beta, "beta");
    if (pred.joints3d.shape()[1] != pred.joints2d.shape()[1]) throw ShapeError("total_loss: joint-count mismatch");
    const std::size_t frames = pred.joints3d.shape()[0];

    Tensor mask = gt.has_3d ? *gt.has_3d : Tensor::full({frames}, 1.0);
    if (mask.shape() != Shape{frames}) throw ShapeError("total_loss: has_3d must be (F)");
    double labeled = 0.0;
    for (double m : mask.data()) labeled += m;
    const double inv_all = 1.0 / static_cast<double>(frames);
    const double inv_labeled = labeled > 0.0 ? 1.0 / labeled : 0.0;

    const Tensor l3d = scale(sum(mul(joint_distance(pred.joints3d, gt.joints3d), mask)), inv_labeled);
    const Tensor l2d = scale(sum(joint_distance(pred.joints2d, gt.joints2d)), inv_all);
    const Tensor pose = scale(sum(mul(norm(sub(pred.pose_aa, gt.pose_aa)), mask)), inv_labeled);
    const Tensor shape = scale(sum(mul(norm(sub(pred.beta, gt.beta)), mask)), inv_labeled);
    const Tensor reg = scale(sum(add(norm(pred.beta), norm(pred.pose_aa))), inv_all);

    LossReport r;
    r.total = add(add(add(scale(l3d, w.lambda_3d), scale(l2d, w.lambda_2d)),
                      add(scale(pose, w.lambda_pose), scale(shape, w.lambda_shape))),
                  scale(reg, w.lambda_norm));
    r.l3d = l3d.item();
    r.l2d = l2d.item();
    r.smpl_pose = pose.item();
    r.smpl_shape = shape.item();
    r.norm = reg.item();
    return r;
}

}  // namespace maed::losses
