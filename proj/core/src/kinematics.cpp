// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "maed/kinematics.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "maed/ops.hpp"
#include "maed/random.hpp"

namespace maed::kinematics {

namespace {

constexpr ParentArray kSmplParents = {-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19, 20, 21};

// Stylized T-pose, meters, y up, +x toward the body's left.
const std::array<Vec3, kJointCount>& stylized_template() {
    static const std::array<Vec3, kJointCount> t = {
        Vec3(0.00, 0.00, 0.00),    // pelvis
        Vec3(0.07, -0.09, 0.00),   // left hip
        Vec3(-0.07, -0.09, 0.00),  // right hip
        Vec3(0.00, 0.11, -0.02),   // spine 1
        Vec3(0.10, -0.47, 0.01),   // left knee
        Vec3(-0.10, -0.47, 0.01),  // right knee
        Vec3(0.00, 0.25, 0.00),    // spine 2
        Vec3(0.09, -0.87, -0.03),  // left ankle
        Vec3(-0.09, -0.87, -0.03), // right ankle
        Vec3(0.00, 0.31, 0.02),    // spine 3
        Vec3(0.11, -0.93, 0.10),   // left foot
        Vec3(-0.11, -0.93, 0.10),  // right foot
        Vec3(0.00, 0.52, 0.00),    // neck
        Vec3(0.07, 0.43, 0.01),    // left collar
        Vec3(-0.07, 0.43, 0.01),   // right collar
        Vec3(0.00, 0.61, 0.05),    // head
        Vec3(0.18, 0.46, -0.01),   // left shoulder
        Vec3(-0.18, 0.46, -0.01),  // right shoulder
        Vec3(0.43, 0.44, -0.03),   // left elbow
        Vec3(-0.43, 0.44, -0.03),  // right elbow
        Vec3(0.68, 0.45, -0.02),   // left wrist
        Vec3(-0.68, 0.45, -0.02),  // right wrist
        Vec3(0.76, 0.44, -0.03),   // left hand
        Vec3(-0.76, 0.44, -0.03),  // right hand
    };
    return t;
}

// Seeded linear shape basis; each coordinate moves at most 5 cm when |beta| = 1.
// The root rows are zero so the pelvis stays at the origin.
const ShapeBasis& builtin_shape_basis() {
    static const ShapeBasis basis = [] {
        ShapeBasis b;
        Rng rng(0x5ba9e5ULL);
        const double bound = 0.05 / std::sqrt(static_cast<double>(kShapeDims));
        for (Eigen::Index r = 0; r < b.rows(); ++r)
            for (Eigen::Index c = 0; c < b.cols(); ++c) b(r, c) = r < 3 ? 0.0 : rng.uniform(-bound, bound);
        return b;
    }();
    return basis;
}

void check_joint(std::size_t k) {
    if (k >= kJointCount) throw std::out_of_range("joint index " + std::to_string(k) + " out of range [0, 24)");
}

std::vector<std::vector<std::size_t>> adjacency(const ParentArray& parents) {
    std::vector<std::vector<std::size_t>> adj(kJointCount);
    for (std::size_t k = 0; k < kJointCount; ++k) {
        if (parents[k] == kNoParent) continue;
        const auto p = static_cast<std::size_t>(parents[k]);
        adj[k].push_back(p);
        adj[p].push_back(k);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());
    return adj;
}

ParentArray root_at(const std::vector<std::vector<std::size_t>>& adj, std::size_t root) {
    ParentArray parents;
    parents.fill(-2);
    parents[root] = kNoParent;
    std::deque<std::size_t> queue{root};
    while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        for (std::size_t v : adj[u]) {
            if (parents[v] != -2) continue;
            parents[v] = static_cast<int>(u);
            queue.push_back(v);
        }
    }
    return parents;
}

Mat4 local_transform(const Mat3& r, const Vec3& t) {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = r;
    m.topRightCorner<3, 1>() = t;
    return m;
}

void check_rotations(std::span<const Mat3> rotations) {
    if (rotations.size() != kJointCount) throw ShapeError("forward_kinematics: expected 24 rotations");
    for (std::size_t k = 0; k < kJointCount; ++k) {
        if (!geometry::is_rotation(rotations[k])) {
            throw geometry::InvalidRotation("forward_kinematics: rotation " + std::to_string(k) + " is invalid");
        }
    }
}

}  // namespace

KinematicTree::KinematicTree(const ParentArray& parents, const std::array<Vec3, kJointCount>& rest_template,
                             const ShapeBasis& shape_basis)
    : parents_(parents), rest_template_(rest_template), shape_basis_(shape_basis) {
    std::size_t roots = 0;
    for (std::size_t k = 0; k < kJointCount; ++k) {
        const int p = parents_[k];
        if (p == kNoParent) {
            ++roots;
            root_ = k;
        } else if (p < 0 || p >= static_cast<int>(kJointCount) || static_cast<std::size_t>(p) == k) {
            throw TreeError("joint " + std::to_string(k) + " has invalid parent " + std::to_string(p));
        }
    }
    if (roots != 1) throw TreeError("tree must have exactly one root, found " + std::to_string(roots));

    std::vector<std::vector<std::size_t>> kids(kJointCount);
    for (std::size_t k = 0; k < kJointCount; ++k)
        if (parents_[k] != kNoParent) kids[static_cast<std::size_t>(parents_[k])].push_back(k);
    std::deque<std::size_t> queue{root_};
    while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        order_.push_back(u);
        for (std::size_t v : kids[u]) queue.push_back(v);
    }
    // 23 parent links plus reachability of every joint from the root rules out cycles.
    if (order_.size() != kJointCount) throw TreeError("parent links contain a cycle or unreachable joints");
    for (const auto& v : rest_template_)
        if (!v.allFinite()) throw TreeError("rest template contains non-finite values");
}

KinematicTree KinematicTree::smpl() { return KinematicTree(kSmplParents, stylized_template(), builtin_shape_basis()); }

KinematicTree KinematicTree::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw TreeError("cannot open tree file " + path.string());
    ParentArray parents;
    parents.fill(-2);
    std::array<Vec3, kJointCount> rest{};
    std::array<bool, kJointCount> seen{};
    std::string line;
    std::size_t line_no = 0;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        long index = 0;
        long parent = 0;
        double x = 0, y = 0, z = 0;
        std::string extra;
        if (!(ls >> index >> parent >> x >> y >> z) || (ls >> extra)) {
            throw TreeError(path.string() + ":" + std::to_string(line_no) + ": expected 'index parent x y z'");
        }
        if (index < 0 || index >= static_cast<long>(kJointCount)) {
            throw TreeError(path.string() + ":" + std::to_string(line_no) + ": joint index out of range");
        }
        const auto k = static_cast<std::size_t>(index);
        if (seen[k]) throw TreeError(path.string() + ":" + std::to_string(line_no) + ": duplicate joint " + std::to_string(k));
        seen[k] = true;
        parents[k] = static_cast<int>(parent);
        rest[k] = Vec3(x, y, z);
        ++rows;
    }
    if (rows != kJointCount) throw TreeError(path.string() + ": expected 24 joints, found " + std::to_string(rows));
    return KinematicTree(parents, rest, builtin_shape_basis());
}

void KinematicTree::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw TreeError("cannot write tree file " + path.string());
    out << "# index parent x y z\n" << std::setprecision(17);
    for (std::size_t k = 0; k < kJointCount; ++k) {
        const auto& r = rest_template_[k];
        out << k << ' ' << parents_[k] << ' ' << r.x() << ' ' << r.y() << ' ' << r.z() << '\n';
    }
}

int KinematicTree::parent(std::size_t k) const {
    check_joint(k);
    return parents_[k];
}

std::vector<std::size_t> KinematicTree::children(std::size_t k) const {
    check_joint(k);
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < kJointCount; ++c)
        if (parents_[c] == static_cast<int>(k)) out.push_back(c);
    return out;
}

std::size_t KinematicTree::depth(std::size_t k) const { return ancestors(*this, k).size(); }

std::vector<std::pair<std::size_t, std::size_t>> KinematicTree::undirected_edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t k = 0; k < kJointCount; ++k) {
        if (parents_[k] == kNoParent) continue;
        const auto p = static_cast<std::size_t>(parents_[k]);
        edges.emplace_back(std::min(p, k), std::max(p, k));
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

std::vector<std::size_t> ancestors(const KinematicTree& tree, std::size_t k) {
    check_joint(k);
    std::vector<std::size_t> out;
    for (int p = tree.parent(k); p != kNoParent; p = tree.parent(static_cast<std::size_t>(p)))
        out.push_back(static_cast<std::size_t>(p));
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<Vec3> rest_joints(const KinematicTree& tree, std::span<const double> beta) {
    if (beta.size() != kShapeDims) throw ShapeError("rest_joints: beta must have 10 coefficients");
    const Eigen::Map<const Eigen::Matrix<double, kShapeDims, 1>> b(beta.data());
    const Eigen::Matrix<double, kJointCount * 3, 1> offsets = tree.shape_basis() * b;
    std::vector<Vec3> out(kJointCount);
    for (std::size_t k = 0; k < kJointCount; ++k)
        out[k] = tree.rest_template()[k] + offsets.segment<3>(static_cast<Eigen::Index>(3 * k));
    return out;
}

FkResult forward_kinematics(const KinematicTree& tree, std::span<const Mat3> rotations,
                            std::span<const double> beta) {
    check_rotations(rotations);
    const std::vector<Vec3> rest = rest_joints(tree, beta);
    FkResult out;
    out.joints.resize(kJointCount);
    out.transforms.resize(kJointCount);
    std::vector<Mat3> world(kJointCount);
    // Positions are carried as rest + displacement so that identity rotations
    // reproduce the rest joints exactly.
    std::vector<Vec3> displacement(kJointCount, Vec3::Zero());
    for (std::size_t k : tree.topological_order()) {
        const int p = tree.parent(k);
        if (p == kNoParent) {
            world[k] = rotations[k];
            out.joints[k] = rest[k];
        } else {
            const auto pi = static_cast<std::size_t>(p);
            const Vec3 offset = rest[k] - rest[pi];
            displacement[k] = displacement[pi] + (world[pi] - Mat3::Identity()) * offset;
            world[k] = world[pi] * rotations[k];
            out.joints[k] = rest[k] + displacement[k];
        }
        out.transforms[k] = local_transform(world[k], out.joints[k]);
    }
    return out;
}

Mat4 world_transform_by_ancestors(const KinematicTree& tree, std::span<const Mat3> rotations,
                                  std::span<const Vec3> rest, std::size_t k) {
    if (rotations.size() != kJointCount || rest.size() != kJointCount) {
        throw ShapeError("world_transform_by_ancestors: expected 24 rotations and rest joints");
    }
    std::vector<std::size_t> chain = ancestors(tree, k);
    chain.push_back(k);
    Mat4 g = Mat4::Identity();
    for (std::size_t i : chain) {
        const int p = tree.parent(i);
        const Vec3 t = p == kNoParent ? rest[i] : Vec3(rest[i] - rest[static_cast<std::size_t>(p)]);
        g = g * local_transform(rotations[i], t);
    }
    return g;
}

KinematicTree random_tree(std::uint64_t seed) {
    Rng rng(seed);
    constexpr std::size_t n = kJointCount;
    std::vector<std::size_t> prufer(n - 2);
    for (auto& v : prufer) v = static_cast<std::size_t>(rng.below(n));

    std::vector<std::size_t> degree(n, 1);
    for (std::size_t v : prufer) ++degree[v];
    std::set<std::size_t> leaves;
    for (std::size_t v = 0; v < n; ++v)
        if (degree[v] == 1) leaves.insert(v);
    std::vector<std::vector<std::size_t>> adj(n);
    auto link = [&adj](std::size_t a, std::size_t b) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    };
    for (std::size_t v : prufer) {
        const std::size_t leaf = *leaves.begin();
        leaves.erase(leaves.begin());
        link(leaf, v);
        if (--degree[v] == 1) leaves.insert(v);
    }
    const std::size_t u = *leaves.begin();
    const std::size_t w = *std::next(leaves.begin());
    link(u, w);
    for (auto& a : adj) std::sort(a.begin(), a.end());

    const KinematicTree base = KinematicTree::smpl();
    return KinematicTree(root_at(adj, 0), base.rest_template(), base.shape_basis());
}

KinematicTree reverse_tree(const KinematicTree& tree) {
    std::size_t deepest = tree.root();
    std::size_t best_depth = 0;
    for (std::size_t k = 0; k < kJointCount; ++k) {
        if (!tree.children(k).empty()) continue;
        const std::size_t d = tree.depth(k);
        if (d > best_depth) {
            best_depth = d;
            deepest = k;
        }
    }
    return KinematicTree(root_at(adjacency(tree.parents()), deepest), tree.rest_template(), tree.shape_basis());
}

Tensor rest_joints(const KinematicTree& tree, const Tensor& beta) {
    if (beta.rank() != 2 || beta.shape()[1] != kShapeDims) throw ShapeError("rest_joints: beta must be (F, 10)");
    const std::size_t frames = beta.shape()[0];
    std::vector<double> basis_t(kShapeDims * kJointCount * 3);
    for (std::size_t c = 0; c < kShapeDims; ++c)
        for (std::size_t r = 0; r < kJointCount * 3; ++r)
            basis_t[c * kJointCount * 3 + r] = tree.shape_basis()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    std::vector<double> templ(kJointCount * 3);
    for (std::size_t k = 0; k < kJointCount; ++k)
        for (std::size_t i = 0; i < 3; ++i) templ[k * 3 + i] = tree.rest_template()[k][static_cast<Eigen::Index>(i)];
    const Tensor basis = Tensor::from({kShapeDims, kJointCount * 3}, std::move(basis_t));
    const Tensor offsets = reshape(matmul(beta, basis), {frames, kJointCount, 3});
    return add(offsets, Tensor::from({kJointCount, 3}, std::move(templ)));
}

FkTensors forward_kinematics(const KinematicTree& tree, const Tensor& rotations, const Tensor& rest) {
    if (rotations.rank() != 4 || rotations.shape()[1] != kJointCount || rotations.shape()[2] != 3 ||
        rotations.shape()[3] != 3) {
        throw ShapeError("forward_kinematics: rotations must be (F, 24, 3, 3), got " + to_string(rotations.shape()));
    }
    const std::size_t frames = rotations.shape()[0];
    if (rest.shape() != Shape{frames, kJointCount, 3}) {
        throw ShapeError("forward_kinematics: rest joints must be (F, 24, 3), got " + to_string(rest.shape()));
    }
    const Tensor identity = Tensor::from({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});

    std::vector<Tensor> local(kJointCount);
    std::vector<Tensor> rest_k(kJointCount);
    for (std::size_t k = 0; k < kJointCount; ++k) {
        local[k] = reshape(slice(rotations, 1, k, k + 1), {frames, 3, 3});
        rest_k[k] = reshape(slice(rest, 1, k, k + 1), {frames, 3, 1});
    }
    std::vector<Tensor> world(kJointCount);
    std::vector<std::optional<Tensor>> displacement(kJointCount);
    std::vector<Tensor> joints(kJointCount);
    for (std::size_t k : tree.topological_order()) {
        const int p = tree.parent(k);
        if (p == kNoParent) {
            world[k] = local[k];
            joints[k] = rest_k[k];
            continue;
        }
        const auto pi = static_cast<std::size_t>(p);
        const Tensor offset = sub(rest_k[k], rest_k[pi]);
        Tensor step = matmul(sub(world[pi], identity), offset);
        displacement[k] = displacement[pi] ? add(*displacement[pi], step) : step;
        world[k] = matmul(world[pi], local[k]);
        joints[k] = add(rest_k[k], *displacement[k]);
    }
    std::vector<Tensor> joint_rows;
    std::vector<Tensor> world_rows;
    for (std::size_t k = 0; k < kJointCount; ++k) {
        joint_rows.push_back(reshape(joints[k], {frames, 1, 3}));
        world_rows.push_back(reshape(world[k], {frames, 1, 3, 3}));
    }
    return {concat(joint_rows, 1), concat(world_rows, 1)};
}

}  // namespace maed::kinematics
