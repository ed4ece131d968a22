// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "maed/geometry.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

namespace maed::geometry {

using detail::NodePtr;

namespace {

// Row kernels operate on row-major 3x3 blocks: m[i * 3 + j] = R(i, j).

double dot3(const double* a, const double* b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

void cross3(const double* a, const double* b, double* out) {
    out[0] = a[1] * b[2] - a[2] * b[1];
    out[1] = a[2] * b[0] - a[0] * b[2];
    out[2] = a[0] * b[1] - a[1] * b[0];
}

struct GramSchmidt {
    double b1[3], b2[3], b3[3];
    double n1, n2, d;
};

GramSchmidt gram_schmidt(const double* r) {
    GramSchmidt gs{};
    const double* a1 = r;
    const double* a2 = r + 3;
    gs.n1 = std::sqrt(dot3(a1, a1));
    if (!(gs.n1 > kRotationEps)) throw DegenerateRotation("6D rotation: first column has norm <= 1e-8");
    for (int i = 0; i < 3; ++i) gs.b1[i] = a1[i] / gs.n1;
    gs.d = dot3(gs.b1, a2);
    double u[3];
    for (int i = 0; i < 3; ++i) u[i] = a2[i] - gs.d * gs.b1[i];
    gs.n2 = std::sqrt(dot3(u, u));
    if (!(gs.n2 > kRotationEps)) throw DegenerateRotation("6D rotation: columns are (nearly) parallel");
    for (int i = 0; i < 3; ++i) gs.b2[i] = u[i] / gs.n2;
    cross3(gs.b1, gs.b2, gs.b3);
    return gs;
}

void gram_schmidt_to_matrix(const GramSchmidt& gs, double* m) {
    for (int i = 0; i < 3; ++i) {
        m[i * 3 + 0] = gs.b1[i];
        m[i * 3 + 1] = gs.b2[i];
        m[i * 3 + 2] = gs.b3[i];
    }
}

// Accumulates dL/dr into gr given dL/dR (row-major) in gm.
void gram_schmidt_vjp(const double* r, const double* gm, double* gr) {
    const GramSchmidt gs = gram_schmidt(r);
    const double* a2 = r + 3;
    double gb1[3], gb2[3], gb3[3];
    for (int i = 0; i < 3; ++i) {
        gb1[i] = gm[i * 3 + 0];
        gb2[i] = gm[i * 3 + 1];
        gb3[i] = gm[i * 3 + 2];
    }
    // b3 = b1 x b2
    double t[3];
    cross3(gs.b2, gb3, t);
    for (int i = 0; i < 3; ++i) gb1[i] += t[i];
    cross3(gb3, gs.b1, t);
    for (int i = 0; i < 3; ++i) gb2[i] += t[i];
    // b2 = u / |u|
    const double p2 = dot3(gs.b2, gb2);
    double gu[3];
    for (int i = 0; i < 3; ++i) gu[i] = (gb2[i] - gs.b2[i] * p2) / gs.n2;
    // u = a2 - d b1
    double ga2[3] = {gu[0], gu[1], gu[2]};
    const double gd = -dot3(gu, gs.b1);
    for (int i = 0; i < 3; ++i) gb1[i] += -gs.d * gu[i];
    // d = b1 . a2
    for (int i = 0; i < 3; ++i) {
        gb1[i] += gd * a2[i];
        ga2[i] += gd * gs.b1[i];
    }
    // b1 = a1 / |a1|
    const double p1 = dot3(gs.b1, gb1);
    for (int i = 0; i < 3; ++i) {
        gr[i] += (gb1[i] - gs.b1[i] * p1) / gs.n1;
        gr[3 + i] += ga2[i];
    }
}

struct RodriguesCoeffs {
    double a, b;          // R = I + a K + b K²
    double da, db;        // a'(θ)/θ, b'(θ)/θ
};

RodriguesCoeffs rodrigues_coeffs(double theta) {
    RodriguesCoeffs c{};
    if (theta < 1e-3) {
        const double t2 = theta * theta;
        const double t4 = t2 * t2;
        c.a = 1.0 - t2 / 6.0 + t4 / 120.0;
        c.b = 0.5 - t2 / 24.0 + t4 / 720.0;
        c.da = -1.0 / 3.0 + t2 / 30.0 - t4 / 840.0;
        c.db = -1.0 / 12.0 + t2 / 180.0 - t4 / 6720.0;
    } else {
        const double s = std::sin(theta);
        const double co = std::cos(theta);
        const double t2 = theta * theta;
        c.a = s / theta;
        c.b = (1.0 - co) / t2;
        c.da = (theta * co - s) / (t2 * theta);
        c.db = (theta * s - 2.0 * (1.0 - co)) / (t2 * t2);
    }
    return c;
}

void skew(const double* v, double* k) {
    k[0] = 0.0;
    k[1] = -v[2];
    k[2] = v[1];
    k[3] = v[2];
    k[4] = 0.0;
    k[5] = -v[0];
    k[6] = -v[1];
    k[7] = v[0];
    k[8] = 0.0;
}

void matmul3(const double* a, const double* b, double* out) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[i * 3 + j] = a[i * 3] * b[j] + a[i * 3 + 1] * b[3 + j] + a[i * 3 + 2] * b[6 + j];
}

double frob(const double* a, const double* b) {
    double s = 0.0;
    for (int i = 0; i < 9; ++i) s += a[i] * b[i];
    return s;
}

void rodrigues(const double* v, double* m) {
    const double theta = std::sqrt(dot3(v, v));
    const RodriguesCoeffs c = rodrigues_coeffs(theta);
    double k[9], k2[9];
    skew(v, k);
    matmul3(k, k, k2);
    for (int i = 0; i < 9; ++i) m[i] = c.a * k[i] + c.b * k2[i];
    m[0] += 1.0;
    m[4] += 1.0;
    m[8] += 1.0;
}

void rodrigues_vjp(const double* v, const double* gm, double* gv) {
    const double theta = std::sqrt(dot3(v, v));
    const RodriguesCoeffs c = rodrigues_coeffs(theta);
    double k[9], k2[9];
    skew(v, k);
    matmul3(k, k, k2);
    const double radial = c.da * frob(gm, k) + c.db * frob(gm, k2);
    for (int i = 0; i < 3; ++i) {
        double e[3] = {0.0, 0.0, 0.0};
        e[i] = 1.0;
        double ei[9], ek[9], ke[9];
        skew(e, ei);
        matmul3(ei, k, ek);
        matmul3(k, ei, ke);
        double sym = 0.0;
        for (int j = 0; j < 9; ++j) sym += gm[j] * (ek[j] + ke[j]);
        gv[i] += v[i] * radial + c.a * frob(gm, ei) + c.b * sym;
    }
}

// Log map. s = vee(R - Rᵀ)/2 = sin θ · axis, c = (tr R - 1)/2 = cos θ.
struct LogParts {
    double s[3];
    double c;
    double n;
};

LogParts log_parts(const double* m) {
    LogParts p{};
    p.s[0] = 0.5 * (m[7] - m[5]);
    p.s[1] = 0.5 * (m[2] - m[6]);
    p.s[2] = 0.5 * (m[3] - m[1]);
    p.c = 0.5 * (m[0] + m[4] + m[8] - 1.0);
    p.n = std::sqrt(dot3(p.s, p.s));
    return p;
}

bool near_half_turn(const LogParts& p) { return p.c < 0.0 && p.n < 1e-3; }

void log_map(const double* m, double* v) {
    const LogParts p = log_parts(m);
    if (near_half_turn(p)) {
        // sin θ is tiny: recover the axis from the symmetric part (1 - c) a aᵀ.
        const double c = std::max(-1.0, p.c);
        const double theta = std::atan2(p.n, p.c);
        double sym[9];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) sym[i * 3 + j] = 0.5 * (m[i * 3 + j] + m[j * 3 + i]) - (i == j ? c : 0.0);
        int col = 0;
        for (int i = 1; i < 3; ++i)
            if (sym[i * 3 + i] > sym[col * 3 + col]) col = i;
        double axis[3];
        const double scale = std::sqrt(std::max(sym[col * 3 + col], 1e-300));
        for (int i = 0; i < 3; ++i) axis[i] = sym[i * 3 + col] / scale;
        const double len = std::sqrt(dot3(axis, axis));
        if (dot3(axis, p.s) < 0.0) {
            for (double& a : axis) a = -a;
        }
        for (int i = 0; i < 3; ++i) v[i] = theta * axis[i] / len;
        return;
    }
    double f;
    if (p.n < 1e-6) {
        f = (1.0 - p.n * p.n / (3.0 * p.c * p.c)) / p.c;
    } else {
        f = std::atan2(p.n, p.c) / p.n;
    }
    for (int i = 0; i < 3; ++i) v[i] = f * p.s[i];
}

void log_map_vjp(const double* m, const double* gv, double* gm) {
    const LogParts p = log_parts(m);
    if (p.n == 0.0 && p.c <= 0.0) return;  // exact half turn: not differentiable
    const double r2 = p.n * p.n + p.c * p.c;
    double f, df_dn_over_n;
    if (p.n < 1e-6 && p.c > 0.0) {
        f = (1.0 - p.n * p.n / (3.0 * p.c * p.c)) / p.c;
        df_dn_over_n = -2.0 / (3.0 * p.c * p.c * p.c);
    } else {
        f = std::atan2(p.n, p.c) / p.n;
        df_dn_over_n = (p.c / r2 - f) / (p.n * p.n);
    }
    const double df_dc = -1.0 / r2;
    const double sg = dot3(p.s, gv);
    double gs[3];
    for (int i = 0; i < 3; ++i) gs[i] = f * gv[i] + df_dn_over_n * sg * p.s[i];
    const double gc = sg * df_dc;
    gm[7] += 0.5 * gs[0];
    gm[5] -= 0.5 * gs[0];
    gm[2] += 0.5 * gs[1];
    gm[6] -= 0.5 * gs[1];
    gm[3] += 0.5 * gs[2];
    gm[1] -= 0.5 * gs[2];
    gm[0] += 0.5 * gc;
    gm[4] += 0.5 * gc;
    gm[8] += 0.5 * gc;
}

bool is_rotation_rm(const double* m, double tol) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = m[i * 3 + j];
    return is_rotation(r, tol);
}

Mat3 to_mat(const double* m) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = m[i * 3 + j];
    return r;
}

void from_mat(const Mat3& r, double* m) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i * 3 + j] = r(i, j);
}

void require_trailing(const Tensor& t, const Shape& trailing, const char* what) {
    const Shape& s = t.shape();
    bool ok = s.size() >= trailing.size();
    for (std::size_t i = 0; ok && i < trailing.size(); ++i) ok = s[s.size() - trailing.size() + i] == trailing[i];
    if (!ok) throw ShapeError(std::string(what) + ": unexpected shape " + to_string(s));
}

}  // namespace

Mat3 rot6d_to_matrix(const Rot6D& r) {
    double m[9];
    gram_schmidt_to_matrix(gram_schmidt(r.r.data()), m);
    return to_mat(m);
}

Rot6D matrix_to_rot6d(const Mat3& m) {
    return {{m(0, 0), m(1, 0), m(2, 0), m(0, 1), m(1, 1), m(2, 1)}};
}

Mat3 axis_angle_to_matrix(const AxisAngle& a) {
    if (!a.v.allFinite()) throw std::domain_error("axis-angle vector is not finite");
    double m[9];
    rodrigues(a.v.data(), m);
    return to_mat(m);
}

AxisAngle matrix_to_axis_angle(const Mat3& m) {
    if (!is_rotation(m)) throw InvalidRotation("matrix_to_axis_angle: input is not a rotation");
    double rm[9];
    from_mat(m, rm);
    AxisAngle out;
    log_map(rm, out.v.data());
    return out;
}

bool is_rotation(const Mat3& m, double tol) {
    if (!m.allFinite()) return false;
    const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
    return ortho <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

Vec2 project(const Vec3& joint, const Camera& cam) {
    if (!(cam.scale > 0.0)) throw InvalidCamera("camera scale must be positive");
    return {cam.scale * joint.x() + cam.tx, cam.scale * joint.y() + cam.ty};
}

std::vector<Vec2> project(std::span<const Vec3> joints, const Camera& cam) {
    std::vector<Vec2> out;
    out.reserve(joints.size());
    for (const auto& j : joints) out.push_back(project(j, cam));
    return out;
}

Tensor rot6d_to_matrix(const Tensor& r6) {
    require_trailing(r6, {6}, "rot6d_to_matrix");
    const std::size_t rows = r6.numel() / 6;
    Shape out_shape(r6.shape().begin(), r6.shape().end() - 1);
    out_shape.push_back(3);
    out_shape.push_back(3);
    std::vector<double> out(rows * 9);
    auto in = r6.data();
    for (std::size_t r = 0; r < rows; ++r) gram_schmidt_to_matrix(gram_schmidt(in.data() + r * 6), out.data() + r * 9);
    return make_result(std::move(out_shape), std::move(out), {r6},
                       [rows](std::span<const double> g, std::span<const NodePtr> p) {
                           auto d = p[0]->grad_buffer();
                           for (std::size_t r = 0; r < rows; ++r)
                               gram_schmidt_vjp(p[0]->data.data() + r * 6, g.data() + r * 9, d.data() + r * 6);
                       });
}

Tensor axis_angle_to_matrix(const Tensor& v) {
    require_trailing(v, {3}, "axis_angle_to_matrix");
    const std::size_t rows = v.numel() / 3;
    Shape out_shape(v.shape().begin(), v.shape().end() - 1);
    out_shape.push_back(3);
    out_shape.push_back(3);
    std::vector<double> out(rows * 9);
    auto in = v.data();
    for (std::size_t r = 0; r < rows; ++r) rodrigues(in.data() + r * 3, out.data() + r * 9);
    return make_result(std::move(out_shape), std::move(out), {v},
                       [rows](std::span<const double> g, std::span<const NodePtr> p) {
                           auto d = p[0]->grad_buffer();
                           for (std::size_t r = 0; r < rows; ++r)
                               rodrigues_vjp(p[0]->data.data() + r * 3, g.data() + r * 9, d.data() + r * 3);
                       });
}

Tensor matrix_to_axis_angle(const Tensor& m) {
    require_trailing(m, {3, 3}, "matrix_to_axis_angle");
    const std::size_t rows = m.numel() / 9;
    Shape out_shape(m.shape().begin(), m.shape().end() - 2);
    out_shape.push_back(3);
    std::vector<double> out(rows * 3);
    auto in = m.data();
    for (std::size_t r = 0; r < rows; ++r) {
        if (!is_rotation_rm(in.data() + r * 9, 1e-4)) {
            throw InvalidRotation("matrix_to_axis_angle: row " + std::to_string(r) + " is not a rotation");
        }
        log_map(in.data() + r * 9, out.data() + r * 3);
    }
    return make_result(std::move(out_shape), std::move(out), {m},
                       [rows](std::span<const double> g, std::span<const NodePtr> p) {
                           auto d = p[0]->grad_buffer();
                           for (std::size_t r = 0; r < rows; ++r)
                               log_map_vjp(p[0]->data.data() + r * 9, g.data() + r * 3, d.data() + r * 9);
                       });
}

Tensor project(const Tensor& joints, const Tensor& cameras) {
    if (joints.rank() != 3 || joints.shape()[2] != 3) throw ShapeError("project: joints must be (F, J, 3)");
    const std::size_t frames = joints.shape()[0];
    const std::size_t count = joints.shape()[1];
    if (cameras.shape() != Shape{frames, 3}) throw ShapeError("project: cameras must be (F, 3)");
    auto j = joints.data();
    auto c = cameras.data();
    std::vector<double> out(frames * count * 2);
    for (std::size_t f = 0; f < frames; ++f) {
        const double s = c[f * 3];
        if (!(s > 0.0)) throw InvalidCamera("project: camera scale must be positive (frame " + std::to_string(f) + ")");
        for (std::size_t k = 0; k < count; ++k) {
            const std::size_t jo = (f * count + k) * 3;
            const std::size_t oo = (f * count + k) * 2;
            out[oo] = s * j[jo] + c[f * 3 + 1];
            out[oo + 1] = s * j[jo + 1] + c[f * 3 + 2];
        }
    }
    return make_result({frames, count, 2}, std::move(out), {joints, cameras},
                       [frames, count](std::span<const double> g, std::span<const NodePtr> p) {
                           const auto& jn = p[0];
                           const auto& cn = p[1];
                           for (std::size_t f = 0; f < frames; ++f) {
                               const double s = cn->data[f * 3];
                               double gs = 0.0, gx = 0.0, gy = 0.0;
                               for (std::size_t k = 0; k < count; ++k) {
                                   const std::size_t jo = (f * count + k) * 3;
                                   const std::size_t oo = (f * count + k) * 2;
                                   gs += g[oo] * jn->data[jo] + g[oo + 1] * jn->data[jo + 1];
                                   gx += g[oo];
                                   gy += g[oo + 1];
                                   if (jn->requires_grad) {
                                       auto dj = jn->grad_buffer();
                                       dj[jo] += s * g[oo];
                                       dj[jo + 1] += s * g[oo + 1];
                                   }
                               }
                               if (cn->requires_grad) {
                                   auto dc = cn->grad_buffer();
                                   dc[f * 3] += gs;
                                   dc[f * 3 + 1] += gx;
                                   dc[f * 3 + 2] += gy;
                               }
                           }
                       });
}

}  // namespace maed::geometry
