// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "maed/geometry.hpp"
#include "maed/tensor.hpp"

/// 24-joint body skeleton: topology, shape-conditioned rest pose and
/// forward kinematics.
namespace maed::kinematics {

using geometry::Mat3;
using geometry::Vec3;
using Mat4 = Eigen::Matrix4d;

inline constexpr std::size_t kJointCount = 24;
inline constexpr std::size_t kShapeDims = 10;
inline constexpr int kNoParent = -1;

using ParentArray = std::array<int, kJointCount>;
using ShapeBasis = Eigen::Matrix<double, kJointCount * 3, kShapeDims>;

class TreeError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Rooted tree over 24 joints. Labels are fixed (0 = pelvis, ordered as
/// the SMPL skeleton); the root need not be joint 0 for derived trees.
class KinematicTree {
   public:
    /// The SMPL topology with the built-in stylized rest template.
    static KinematicTree smpl();

    /// Validates that `parents` describes a single rooted spanning tree.
    KinematicTree(const ParentArray& parents, const std::array<Vec3, kJointCount>& rest_template,
                  const ShapeBasis& shape_basis);

    /// Plain-text format: 24 lines of "index parent x y z" (parent -1 for
    /// the root, positions in meters). Blank lines and '#' comments are
    /// skipped. The shape basis is the built-in one.
    static KinematicTree load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    int parent(std::size_t k) const;
    std::size_t root() const { return root_; }
    const ParentArray& parents() const { return parents_; }
    /// Root first; every joint appears after its parent. Children are
    /// visited breadth-first in increasing label order.
    const std::vector<std::size_t>& topological_order() const { return order_; }
    std::vector<std::size_t> children(std::size_t k) const;
    std::size_t depth(std::size_t k) const;
    /// Undirected edges as (min label, max label), sorted.
    std::vector<std::pair<std::size_t, std::size_t>> undirected_edges() const;

    const std::array<Vec3, kJointCount>& rest_template() const { return rest_template_; }
    const ShapeBasis& shape_basis() const { return shape_basis_; }

   private:
    ParentArray parents_{};
    std::size_t root_ = 0;
    std::vector<std::size_t> order_;
    std::array<Vec3, kJointCount> rest_template_{};
    ShapeBasis shape_basis_;
};

/// Proper ancestors of k ordered root-first (excludes k).
std::vector<std::size_t> ancestors(const KinematicTree& tree, std::size_t k);

/// rest_template + unflatten(shape_basis · beta).
std::vector<Vec3> rest_joints(const KinematicTree& tree, std::span<const double> beta);

struct FkResult {
    std::vector<Vec3> joints;      // p_k
    std::vector<Mat4> transforms;  // G_k
};

/// Recursive parent composition: G_k = G_parent(k) · [[R_k, t_k], [0, 1]]
/// with t_k = j_k - j_parent(k) and t_root = j_root. Joint k sits at the
/// translation of G_k, so its own rotation only moves its descendants.
FkResult forward_kinematics(const KinematicTree& tree, std::span<const Mat3> rotations,
                            std::span<const double> beta);

/// G_k as the ordered product of local transforms over ancestors(k) ∪ {k}.
Mat4 world_transform_by_ancestors(const KinematicTree& tree, std::span<const Mat3> rotations,
                                  std::span<const Vec3> rest, std::size_t k);

/// Uniformly random labeled spanning tree (Prüfer decoding) rooted at 0.
/// Rest template and shape basis are inherited from the SMPL tree.
KinematicTree random_tree(std::uint64_t seed);

/// Re-roots `tree` at its deepest leaf (ties: smallest label), flipping
/// every edge on the path between the old and new roots.
KinematicTree reverse_tree(const KinematicTree& tree);

// Differentiable batched forms.

/// beta (F, 10) -> rest joints (F, 24, 3).
Tensor rest_joints(const KinematicTree& tree, const Tensor& beta);

struct FkTensors {
    Tensor joints;           // (F, 24, 3)
    Tensor world_rotations;  // (F, 24, 3, 3)
};

/// rotations (F, 24, 3, 3), rest (F, 24, 3).
FkTensors forward_kinematics(const KinematicTree& tree, const Tensor& rotations, const Tensor& rest);

}  // namespace maed::kinematics
