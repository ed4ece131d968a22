// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "maed/metrics.hpp"

#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

namespace maed::metrics {

namespace {

constexpr double kCollinearTol = 1e-9;

void require_pair(const Tensor& pred, const Tensor& gt, const char* who) {
    if (pred.rank() != 3 || pred.shape()[2] != 3 || pred.shape() != gt.shape()) {
        throw ShapeError(std::string(who) + ": expected matching (F, J, 3) inputs, got " + to_string(pred.shape()) +
                         " and " + to_string(gt.shape()));
    }
}

// Second singular value of the centered set relative to the first.
bool collinear(const Points& centered) {
    Eigen::JacobiSVD<Points> svd(centered);
    const auto& s = svd.singularValues();
    return s(0) <= 0.0 || s(1) <= kCollinearTol * s(0);
}

}  // namespace

Points frame_points(const Tensor& joints, std::size_t frame) {
    const std::size_t j = joints.shape()[1];
    const auto data = joints.data().subspan(frame * j * 3, j * 3);
    Points p(static_cast<Eigen::Index>(j), 3);
    for (std::size_t i = 0; i < j; ++i)
        for (std::size_t c = 0; c < 3; ++c) p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = data[3 * i + c];
    return p;
}

Similarity procrustes(const Points& pred, const Points& gt) {
    if (pred.rows() != gt.rows() || pred.rows() < 3) {
        throw DegenerateAlignment("procrustes: need at least 3 corresponding points");
    }
    const Eigen::RowVector3d mu_p = pred.colwise().mean();
    const Eigen::RowVector3d mu_g = gt.colwise().mean();
    const Points x = pred.rowwise() - mu_p;
    const Points y = gt.rowwise() - mu_g;
    if (collinear(x) || collinear(y)) throw DegenerateAlignment("procrustes: point set is collinear");

    const Eigen::Matrix3d cov = y.transpose() * x;
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Vector3d d = Eigen::Vector3d::Ones();
    if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) d(2) = -1.0;

    Similarity s;
    s.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
    s.scale = svd.singularValues().dot(d) / x.squaredNorm();
    s.translation = mu_g.transpose() - s.scale * s.rotation * mu_p.transpose();
    return s;
}

Points apply(const Similarity& s, const Points& p) {
    Points out = (s.scale * (p * s.rotation.transpose())).eval();
    out.rowwise() += s.translation.transpose();
    return out;
}

double mpjpe(const Tensor& pred, const Tensor& gt) {
    require_pair(pred, gt, "mpjpe");
    const auto p = pred.data();
    const auto g = gt.data();
    const std::size_t points = pred.numel() / 3;
    double total = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        const double dx = p[3 * i] - g[3 * i];
        const double dy = p[3 * i + 1] - g[3 * i + 1];
        const double dz = p[3 * i + 2] - g[3 * i + 2];
        total += std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    return 1000.0 * total / static_cast<double>(points);
}

double pa_mpjpe(const Tensor& pred, const Tensor& gt) {
    require_pair(pred, gt, "pa_mpjpe");
    const std::size_t frames = pred.shape()[0];
    double total = 0.0;
    for (std::size_t f = 0; f < frames; ++f) {
        const Points p = frame_points(pred, f);
        const Points g = frame_points(gt, f);
        const Points aligned = apply(procrustes(p, g), p);
        total += (aligned - g).rowwise().norm().mean();
    }
    return 1000.0 * total / static_cast<double>(frames);
}

double accel_error(const Tensor& pred, const Tensor& gt) {
    require_pair(pred, gt, "accel_error");
    const std::size_t frames = pred.shape()[0];
    if (frames < 3) throw std::invalid_argument("accel_error: need at least 3 frames, got " + std::to_string(frames));
    const std::size_t stride = pred.shape()[1] * 3;
    const auto p = pred.data();
    const auto g = gt.data();
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 1; t + 1 < frames; ++t) {
        for (std::size_t j = 0; j < pred.shape()[1]; ++j) {
            double sq = 0.0;
            for (std::size_t c = 0; c < 3; ++c) {
                const std::size_t i = t * stride + 3 * j + c;
                const double ap = p[i + stride] - 2.0 * p[i] + p[i - stride];
                const double ag = g[i + stride] - 2.0 * g[i] + g[i - stride];
                sq += (ap - ag) * (ap - ag);
            }
            total += std::sqrt(sq);
            ++count;
        }
    }
    return 1000.0 * total / static_cast<double>(count);
}

}  // namespace maed::metrics
