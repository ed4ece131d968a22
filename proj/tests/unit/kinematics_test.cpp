// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <queue>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "maed/kinematics.hpp"

namespace maed::kinematics {
namespace {

using test::random_tensor;

// SMPL parent table, written out independently of the library.
constexpr ParentArray kSmplParents = {-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19, 20, 21};

std::vector<std::size_t> walk_to_root(const KinematicTree& tree, std::size_t k) {
    std::vector<std::size_t> path;
    for (int p = tree.parent(k); p != kNoParent; p = tree.parent(static_cast<std::size_t>(p)))
        path.push_back(static_cast<std::size_t>(p));
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<Mat3> random_pose(Rng& rng) {
    std::vector<Mat3> r(kJointCount);
    for (Mat3& m : r) m = test::random_rotation(rng);
    return r;
}

std::vector<double> random_beta(Rng& rng) {
    std::vector<double> b(kShapeDims);
    for (double& x : b) x = rng.normal(0.0, 1.0);
    return b;
}

// Recursive oracle built straight from the parent table.
std::vector<Mat4> recursive_oracle(const KinematicTree& tree, const std::vector<Mat3>& r, const std::vector<Vec3>& rest) {
    std::vector<Mat4> g(kJointCount);
    std::vector<bool> done(kJointCount, false);
    std::function<void(std::size_t)> visit = [&](std::size_t k) {
        if (done[k]) return;
        Mat4 local = Mat4::Identity();
        local.topLeftCorner<3, 3>() = r[k];
        const int p = tree.parent(k);
        if (p == kNoParent) {
            local.topRightCorner<3, 1>() = rest[k];
            g[k] = local;
        } else {
            visit(static_cast<std::size_t>(p));
            local.topRightCorner<3, 1>() = rest[k] - rest[static_cast<std::size_t>(p)];
            g[k] = g[static_cast<std::size_t>(p)] * local;
        }
        done[k] = true;
    };
    for (std::size_t k = 0; k < kJointCount; ++k) visit(k);
    return g;
}

bool connected(const KinematicTree& tree) {
    std::vector<bool> seen(kJointCount, false);
    std::queue<std::size_t> q;
    q.push(tree.root());
    seen[tree.root()] = true;
    std::size_t count = 1;
    while (!q.empty()) {
        const std::size_t k = q.front();
        q.pop();
        for (std::size_t c : tree.children(k))
            if (!seen[c]) {
                seen[c] = true;
                ++count;
                q.push(c);
            }
    }
    return count == kJointCount;
}

TEST(Tree, SmplParentsMatchReferenceTable) { EXPECT_EQ(KinematicTree::smpl().parents(), kSmplParents); }

TEST(Tree, AncestorsOfKnee) {
    const auto tree = KinematicTree::smpl();
    EXPECT_EQ(ancestors(tree, 5), (std::vector<std::size_t>{0, 2}));
    EXPECT_TRUE(ancestors(tree, 0).empty());
}

TEST(Tree, AncestorsMatchPathWalk) {
    const auto smpl = KinematicTree::smpl();
    for (const KinematicTree& tree : {smpl, random_tree(3), reverse_tree(smpl)})
        for (std::size_t k = 0; k < kJointCount; ++k) EXPECT_EQ(ancestors(tree, k), walk_to_root(tree, k)) << k;
}

TEST(Tree, TopologicalOrderPutsParentsFirst) {
    for (const KinematicTree& tree : {KinematicTree::smpl(), random_tree(4)}) {
        const auto& order = tree.topological_order();
        ASSERT_EQ(order.size(), kJointCount);
        std::vector<std::size_t> pos(kJointCount);
        for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
        EXPECT_EQ(order.front(), tree.root());
        for (std::size_t k = 0; k < kJointCount; ++k)
            if (tree.parent(k) != kNoParent) EXPECT_LT(pos[static_cast<std::size_t>(tree.parent(k))], pos[k]);
    }
}

TEST(Tree, RejectsCyclesAndForests) {
    const auto smpl = KinematicTree::smpl();
    ParentArray cyc = kSmplParents;
    cyc[0] = 3;  // 0 -> 3 -> 0
    EXPECT_THROW(KinematicTree(cyc, smpl.rest_template(), smpl.shape_basis()), TreeError);
    ParentArray two_roots = kSmplParents;
    two_roots[7] = kNoParent;
    EXPECT_THROW(KinematicTree(two_roots, smpl.rest_template(), smpl.shape_basis()), TreeError);
    ParentArray out_of_range = kSmplParents;
    out_of_range[4] = 24;
    EXPECT_THROW(KinematicTree(out_of_range, smpl.rest_template(), smpl.shape_basis()), TreeError);
}

TEST(RestJoints, ZeroShapeIsTemplate) {
    const auto tree = KinematicTree::smpl();
    const std::vector<double> zero(kShapeDims, 0.0);
    const auto rest = rest_joints(tree, zero);
    for (std::size_t k = 0; k < kJointCount; ++k) EXPECT_EQ(rest[k], tree.rest_template()[k]);
}

TEST(RestJoints, LinearInShape) {
    const auto tree = KinematicTree::smpl();
    Rng rng(40);
    const auto a = random_beta(rng);
    const auto b = random_beta(rng);
    std::vector<double> ab(kShapeDims);
    for (std::size_t i = 0; i < kShapeDims; ++i) ab[i] = 2.0 * a[i] - 0.5 * b[i];
    const auto ra = rest_joints(tree, a);
    const auto rb = rest_joints(tree, b);
    const auto rab = rest_joints(tree, ab);
    for (std::size_t k = 0; k < kJointCount; ++k) {
        const Vec3 t = tree.rest_template()[k];
        const Vec3 expect = t + 2.0 * (ra[k] - t) - 0.5 * (rb[k] - t);
        EXPECT_LT((rab[k] - expect).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(RestJoints, MatchesLoopOracle) {
    const auto tree = KinematicTree::smpl();
    Rng rng(41);
    const auto beta = random_beta(rng);
    const auto rest = rest_joints(tree, beta);
    for (std::size_t k = 0; k < kJointCount; ++k)
        for (std::size_t c = 0; c < 3; ++c) {
            double v = tree.rest_template()[k](static_cast<Eigen::Index>(c));
            for (std::size_t i = 0; i < kShapeDims; ++i)
                v += tree.shape_basis()(static_cast<Eigen::Index>(3 * k + c), static_cast<Eigen::Index>(i)) * beta[i];
            EXPECT_NEAR(rest[k](static_cast<Eigen::Index>(c)), v, 1e-14);
        }
}

TEST(RestJoints, TensorFormMatchesPlainForm) {
    const auto tree = KinematicTree::smpl();
    Rng rng(42);
    const Tensor beta = random_tensor({3, kShapeDims}, rng);
    const Tensor rest = rest_joints(tree, beta);
    ASSERT_EQ(rest.shape(), (Shape{3, kJointCount, 3}));
    for (std::size_t f = 0; f < 3; ++f) {
        const auto plain = rest_joints(tree, beta.data().subspan(f * kShapeDims, kShapeDims));
        for (std::size_t k = 0; k < kJointCount; ++k)
            for (std::size_t c = 0; c < 3; ++c)
                EXPECT_NEAR(rest.at({f, k, c}), plain[k](static_cast<Eigen::Index>(c)), 1e-14);
    }
}

TEST(ForwardKinematics, ZeroPoseReproducesRestBitwise) {
    Rng rng(43);
    for (const KinematicTree& tree : {KinematicTree::smpl(), random_tree(5)}) {
        const std::vector<Mat3> identity(kJointCount, Mat3::Identity());
        const auto beta = random_beta(rng);
        const auto rest = rest_joints(tree, beta);
        const auto fk = forward_kinematics(tree, identity, beta);
        for (std::size_t k = 0; k < kJointCount; ++k) EXPECT_EQ(fk.joints[k], rest[k]) << k;
    }
}

TEST(ForwardKinematics, RootRotationRotatesBodyAboutRoot) {
    const auto tree = KinematicTree::smpl();
    Rng rng(44);
    const auto beta = random_beta(rng);
    auto pose = random_pose(rng);
    const auto before = forward_kinematics(tree, pose, beta);
    const Mat3 q = test::random_rotation(rng);
    pose[0] = q * pose[0];
    const auto after = forward_kinematics(tree, pose, beta);
    const Vec3 root = before.joints[0];
    for (std::size_t k = 0; k < kJointCount; ++k)
        EXPECT_LT((after.joints[k] - (root + q * (before.joints[k] - root))).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ForwardKinematics, AncestorProductMatchesRecursion) {
    Rng rng(45);
    const auto smpl = KinematicTree::smpl();
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const KinematicTree& tree = smpl;
        const auto pose = random_pose(rng);
        const auto beta = random_beta(rng);
        const auto rest = rest_joints(tree, beta);
        const auto fk = forward_kinematics(tree, pose, beta);
        const auto oracle = recursive_oracle(tree, pose, rest);
        for (std::size_t k = 0; k < kJointCount; ++k) {
            const Mat4 g = world_transform_by_ancestors(tree, pose, rest, k);
            worst = std::max(worst, (g - fk.transforms[k]).cwiseAbs().maxCoeff());
            worst = std::max(worst, (g - oracle[k]).cwiseAbs().maxCoeff());
            worst = std::max(worst, (fk.joints[k] - g.topRightCorner<3, 1>()).cwiseAbs().maxCoeff());
        }
    }
    EXPECT_LT(worst, 1e-10);
}

TEST(ForwardKinematics, JointIgnoresOwnAndNonAncestorRotations) {
    Rng rng(46);
    for (const KinematicTree& tree : {KinematicTree::smpl(), random_tree(6)}) {
        const auto beta = random_beta(rng);
        const auto pose = random_pose(rng);
        const auto base = forward_kinematics(tree, pose, beta);
        for (std::size_t k = 0; k < kJointCount; ++k) {
            const auto anc = ancestors(tree, k);
            auto perturbed = pose;
            for (std::size_t j = 0; j < kJointCount; ++j)
                if (std::find(anc.begin(), anc.end(), j) == anc.end()) perturbed[j] = test::random_rotation(rng);
            EXPECT_EQ(forward_kinematics(tree, perturbed, beta).joints[k], base.joints[k]) << k;
        }
    }
}

TEST(ForwardKinematics, TensorFormMatchesPlainForm) {
    const auto tree = KinematicTree::smpl();
    Rng rng(47);
    std::vector<double> rot, betas;
    std::vector<std::vector<Mat3>> poses;
    for (int f = 0; f < 2; ++f) {
        poses.push_back(random_pose(rng));
        for (const Mat3& m : poses.back())
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) rot.push_back(m(a, b));
        const auto b = random_beta(rng);
        betas.insert(betas.end(), b.begin(), b.end());
    }
    const Tensor r = Tensor::from({2, kJointCount, 3, 3}, rot);
    const Tensor beta = Tensor::from({2, kShapeDims}, betas);
    const FkTensors out = forward_kinematics(tree, r, rest_joints(tree, beta));
    ASSERT_EQ(out.joints.shape(), (Shape{2, kJointCount, 3}));
    ASSERT_EQ(out.world_rotations.shape(), (Shape{2, kJointCount, 3, 3}));
    for (std::size_t f = 0; f < 2; ++f) {
        const auto plain = forward_kinematics(tree, poses[f], std::span<const double>(betas).subspan(f * kShapeDims, kShapeDims));
        for (std::size_t k = 0; k < kJointCount; ++k)
            for (std::size_t c = 0; c < 3; ++c) {
                EXPECT_NEAR(out.joints.at({f, k, c}), plain.joints[k](static_cast<Eigen::Index>(c)), 1e-12);
                for (std::size_t d = 0; d < 3; ++d)
                    EXPECT_NEAR(out.world_rotations.at({f, k, c, d}),
                                plain.transforms[k](static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(d)), 1e-12);
            }
    }
}

TEST(RandomTree, SpanningAndReproducible) {
    for (std::uint64_t seed : {0, 1, 2, 99, 12345}) {
        const auto t = random_tree(seed);
        EXPECT_EQ(t.undirected_edges().size(), kJointCount - 1);
        EXPECT_TRUE(connected(t));
        EXPECT_EQ(t.root(), 0u);
        EXPECT_EQ(random_tree(seed).parents(), t.parents());
    }
    EXPECT_NE(random_tree(1).parents(), random_tree(2).parents());
}

TEST(ReverseTree, ReRootsAtDeepestLeafAndKeepsEdges) {
    const auto smpl = KinematicTree::smpl();
    const auto rev = reverse_tree(smpl);
    EXPECT_EQ(rev.root(), 22u);
    EXPECT_TRUE(connected(rev));
    EXPECT_EQ(rev.undirected_edges(), smpl.undirected_edges());
    EXPECT_EQ(rev.parent(0), 3);
    const auto twice = reverse_tree(rev);
    EXPECT_EQ(twice.undirected_edges(), smpl.undirected_edges());
}

TEST(ReverseTree, RandomTreesKeepEdges) {
    for (std::uint64_t seed : {3, 8, 21}) {
        const auto t = random_tree(seed);
        const auto rev = reverse_tree(t);
        EXPECT_EQ(rev.undirected_edges(), t.undirected_edges());
        EXPECT_TRUE(rev.children(rev.root()).size() == 1);
    }
}

TEST(TreeFile, SaveLoadRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "maed_tree_roundtrip.txt";
    const auto rev = reverse_tree(KinematicTree::smpl());
    rev.save(path);
    const auto back = KinematicTree::load(path);
    EXPECT_EQ(back.parents(), rev.parents());
    for (std::size_t k = 0; k < kJointCount; ++k) EXPECT_EQ(back.rest_template()[k], rev.rest_template()[k]);
    std::filesystem::remove(path);
}

TEST(TreeFile, MalformedInputThrows) {
    const auto path = std::filesystem::temp_directory_path() / "maed_tree_bad.txt";
    {
        std::ofstream out(path);
        out << "# only one joint\n0 -1 0 0 0\n";
    }
    EXPECT_THROW(KinematicTree::load(path), TreeError);
    std::filesystem::remove(path);
    EXPECT_THROW(KinematicTree::load(path), std::exception);
}

TEST(KinematicsGradient, RestJoints) {
    const auto tree = KinematicTree::smpl();
    Rng rng(48);
    const Tensor beta = random_tensor({2, kShapeDims}, rng);
    const auto res = test::gradcheck([&] { return rest_joints(tree, beta); }, {beta});
    EXPECT_LT(res.relative_error, 1e-5) << res.worst;
}

TEST(KinematicsGradient, ForwardKinematics) {
    Rng rng(49);
    for (const KinematicTree& tree : {KinematicTree::smpl(), random_tree(9)}) {
        const Tensor r = random_tensor({1, kJointCount, 3, 3}, rng);
        const Tensor rest = random_tensor({1, kJointCount, 3}, rng);
        const auto res = test::gradcheck(
            [&] {
                const FkTensors out = forward_kinematics(tree, r, rest);
                return concat({reshape(out.joints, {1, kJointCount * 3}), reshape(out.world_rotations, {1, kJointCount * 9})}, 1);
            },
            {r, rest});
        EXPECT_LT(res.relative_error, 1e-5) << res.worst;
    }
}

}  // namespace
}  // namespace maed::kinematics
