// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "maed/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace maed {

using detail::NodePtr;

namespace {

void accumulate(const NodePtr& parent, std::span<const double> g) {
    if (!parent->requires_grad) return;
    auto dst = parent->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

// Splits a shape into (outer, extent, inner) around one axis.
struct AxisSplit {
    std::size_t outer = 1;
    std::size_t extent = 1;
    std::size_t inner = 1;
};

AxisSplit split_at(const Shape& s, std::size_t axis) {
    AxisSplit r;
    for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
    r.extent = s[axis];
    for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
    return r;
}

bool is_suffix(const Shape& small, const Shape& big) {
    if (small.size() > big.size()) return false;
    return std::equal(small.begin(), small.end(), big.end() - static_cast<std::ptrdiff_t>(small.size()));
}

enum class Broadcast { kNone, kRightRepeats, kLeftRepeats };

Broadcast classify(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() == b.shape()) return Broadcast::kNone;
    if (is_suffix(b.shape(), a.shape())) return Broadcast::kRightRepeats;
    if (is_suffix(a.shape(), b.shape())) return Broadcast::kLeftRepeats;
    throw ShapeError(std::string(op) + ": incompatible shapes " + to_string(a.shape()) + " and " + to_string(b.shape()));
}

// C[m×n] += A[m×k]·B[k×n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        const double* ai = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = ai[p];
            const double* bp = b + p * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

// dA[m×k] += dC[m×n]·Bᵀ, with bt = Bᵀ materialized as n×k.
void gemm_grad_a(const double* dc, const double* bt, double* da, std::size_t m, std::size_t k, std::size_t n) {
    gemm_nn(dc, bt, da, m, n, k);
}

// dB[k×n] += Aᵀ·dC
void gemm_grad_b(const double* a, const double* dc, double* db, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        const double* dci = dc + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = ai[p];
            double* dbp = db + p * n;
            for (std::size_t j = 0; j < n; ++j) dbp[j] += av * dci[j];
        }
    }
}

std::vector<double> transpose_2d(const double* src, std::size_t rows, std::size_t cols) {
    std::vector<double> out(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = src[r * cols + c];
    return out;
}

template <typename F>
Tensor unary(const Tensor& x, F&& f) {
    std::vector<double> out(x.numel());
    auto xs = x.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(xs[i]);
    return Tensor::from(x.shape(), std::move(out));
}

}  // namespace

std::size_t resolve_axis(int axis, std::size_t rank) {
    const int r = static_cast<int>(rank);
    const int a = axis < 0 ? axis + r : axis;
    if (a < 0 || a >= r) throw ShapeError("axis " + std::to_string(axis) + " out of range for rank " + std::to_string(rank));
    return static_cast<std::size_t>(a);
}

Tensor reshape(const Tensor& t, Shape shape) {
    if (numel(shape) != t.numel()) {
        throw ShapeError("reshape " + to_string(t.shape()) + " -> " + to_string(shape) + ": element count differs");
    }
    std::vector<double> values(t.data().begin(), t.data().end());
    return make_result(std::move(shape), std::move(values), {t},
                       [](std::span<const double> g, std::span<const NodePtr> p) { accumulate(p[0], g); });
}

Tensor transpose(const Tensor& t, const std::vector<std::size_t>& perm) {
    const Shape& in = t.shape();
    const std::size_t r = in.size();
    if (perm.size() != r) throw ShapeError("transpose: permutation rank mismatch for " + to_string(in));
    std::vector<bool> seen(r, false);
    for (std::size_t a : perm) {
        if (a >= r || seen[a]) throw ShapeError("transpose: invalid permutation for " + to_string(in));
        seen[a] = true;
    }
    Shape out_shape(r);
    for (std::size_t i = 0; i < r; ++i) out_shape[i] = in[perm[i]];

    std::vector<std::size_t> in_strides(r, 1);
    for (std::size_t i = r; i-- > 1;) in_strides[i - 1] = in_strides[i] * in[i];
    // Input stride for each output axis; out index -> in offset via odometer.
    std::vector<std::size_t> step(r);
    for (std::size_t i = 0; i < r; ++i) step[i] = in_strides[perm[i]];

    const std::size_t n = t.numel();
    std::vector<std::size_t> src_index(n);
    {
        std::vector<std::size_t> idx(r, 0);
        std::size_t off = 0;
        for (std::size_t o = 0; o < n; ++o) {
            src_index[o] = off;
            for (std::size_t ax = r; ax-- > 0;) {
                if (++idx[ax] < out_shape[ax]) {
                    off += step[ax];
                    break;
                }
                off -= step[ax] * (out_shape[ax] - 1);
                idx[ax] = 0;
            }
        }
    }
    std::vector<double> values(n);
    auto src = t.data();
    for (std::size_t o = 0; o < n; ++o) values[o] = src[src_index[o]];
    return make_result(std::move(out_shape), std::move(values), {t},
                       [src_index = std::move(src_index)](std::span<const double> g, std::span<const NodePtr> p) {
                           if (!p[0]->requires_grad) return;
                           auto dst = p[0]->grad_buffer();
                           for (std::size_t o = 0; o < g.size(); ++o) dst[src_index[o]] += g[o];
                       });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    const Shape& as = a.shape();
    const Shape& bs = b.shape();
    if (as.size() < 2 || bs.size() < 2) throw ShapeError("matmul needs rank >= 2 operands");
    const std::size_t m = as[as.size() - 2];
    const std::size_t k = as.back();
    const std::size_t kb = bs[bs.size() - 2];
    const std::size_t n = bs.back();
    if (k != kb) throw ShapeError("matmul inner extents differ: " + to_string(as) + " x " + to_string(bs));

    const Shape a_batch(as.begin(), as.end() - 2);
    const Shape b_batch(bs.begin(), bs.end() - 2);
    Shape out_shape;
    std::size_t batches = 1;
    std::size_t a_stride = m * k;
    std::size_t b_stride = k * n;
    if (b_batch.empty()) {
        out_shape = a_batch;
        batches = numel(a_batch);
        b_stride = 0;
    } else if (a_batch.empty()) {
        out_shape = b_batch;
        batches = numel(b_batch);
        a_stride = 0;
    } else if (a_batch == b_batch) {
        out_shape = a_batch;
        batches = numel(a_batch);
    } else {
        throw ShapeError("matmul batch extents not broadcastable: " + to_string(as) + " x " + to_string(bs));
    }
    out_shape.push_back(m);
    out_shape.push_back(n);

    std::vector<double> out(batches * m * n, 0.0);
    const double* ad = a.data().data();
    const double* bd = b.data().data();
    if (b_stride == 0) {
        // Shared right operand: fold every leading axis of a into rows.
        gemm_nn(ad, bd, out.data(), batches * m, k, n);
    } else {
        for (std::size_t i = 0; i < batches; ++i)
            gemm_nn(ad + i * a_stride, bd + i * b_stride, out.data() + i * m * n, m, k, n);
    }

    return make_result(std::move(out_shape), std::move(out), {a, b},
                       [batches, m, k, n, a_stride, b_stride](std::span<const double> g, std::span<const NodePtr> p) {
                           const auto& an = p[0];
                           const auto& bn = p[1];
                           if (an->requires_grad) {
                               double* da = an->grad_buffer().data();
                               if (b_stride == 0) {
                                   const auto bt = transpose_2d(bn->data.data(), k, n);
                                   gemm_grad_a(g.data(), bt.data(), da, batches * m, k, n);
                               } else {
                                   for (std::size_t i = 0; i < batches; ++i) {
                                       const auto bt = transpose_2d(bn->data.data() + i * b_stride, k, n);
                                       gemm_grad_a(g.data() + i * m * n, bt.data(), da + i * a_stride, m, k, n);
                                   }
                               }
                           }
                           if (bn->requires_grad) {
                               double* db = bn->grad_buffer().data();
                               if (b_stride == 0) {
                                   gemm_grad_b(an->data.data(), g.data(), db, batches * m, k, n);
                               } else {
                                   for (std::size_t i = 0; i < batches; ++i)
                                       gemm_grad_b(an->data.data() + i * a_stride, g.data() + i * m * n,
                                                   db + i * b_stride, m, k, n);
                               }
                           }
                       });
}

namespace {

// Elementwise binary op with leading-axis broadcast. df_da/df_db receive
// (a_value, b_value) and return partial derivatives.
template <typename F, typename Da, typename Db>
Tensor binary(const Tensor& a, const Tensor& b, const char* name, F f, Da df_da, Db df_db) {
    const Broadcast mode = classify(a, b, name);
    const Shape out_shape = mode == Broadcast::kLeftRepeats ? b.shape() : a.shape();
    const std::size_t n = numel(out_shape);
    const std::size_t na = a.numel();
    const std::size_t nb = b.numel();
    auto ad = a.data();
    auto bd = b.data();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = f(ad[i % na], bd[i % nb]);
    return make_result(out_shape, std::move(out), {a, b},
                       [na, nb, df_da, df_db](std::span<const double> g, std::span<const NodePtr> p) {
                           const auto& an = p[0];
                           const auto& bn = p[1];
                           if (an->requires_grad) {
                               auto da = an->grad_buffer();
                               for (std::size_t i = 0; i < g.size(); ++i)
                                   da[i % na] += g[i] * df_da(an->data[i % na], bn->data[i % nb]);
                           }
                           if (bn->requires_grad) {
                               auto db = bn->grad_buffer();
                               for (std::size_t i = 0; i < g.size(); ++i)
                                   db[i % nb] += g[i] * df_db(an->data[i % na], bn->data[i % nb]);
                           }
                       });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return binary(
        a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
        [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary(
        a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
        [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary(
        a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
        [](double x, double) { return x; });
}

Tensor scale(const Tensor& a, double factor) {
    Tensor out = unary(a, [factor](double x) { return x * factor; });
    return make_result(a.shape(), std::vector<double>(out.data().begin(), out.data().end()), {a},
                       [factor](std::span<const double> g, std::span<const NodePtr> p) {
                           auto d = p[0]->grad_buffer();
                           for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * factor;
                       });
}

Tensor add_scalar(const Tensor& a, double value) {
    Tensor out = unary(a, [value](double x) { return x + value; });
    return make_result(a.shape(), std::vector<double>(out.data().begin(), out.data().end()), {a},
                       [](std::span<const double> g, std::span<const NodePtr> p) { accumulate(p[0], g); });
}

Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double v : a.data()) s += v;
    return make_result({1}, {s}, {a}, [](std::span<const double> g, std::span<const NodePtr> p) {
        auto d = p[0]->grad_buffer();
        for (double& v : d) v += g[0];
    });
}

Tensor sum(const Tensor& a, int axis) {
    const std::size_t ax = resolve_axis(axis, a.rank());
    const AxisSplit sp = split_at(a.shape(), ax);
    Shape out_shape = a.shape();
    out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(ax));
    if (out_shape.empty()) out_shape = {1};
    std::vector<double> out(sp.outer * sp.inner, 0.0);
    auto x = a.data();
    for (std::size_t o = 0; o < sp.outer; ++o)
        for (std::size_t e = 0; e < sp.extent; ++e)
            for (std::size_t i = 0; i < sp.inner; ++i) out[o * sp.inner + i] += x[(o * sp.extent + e) * sp.inner + i];
    return make_result(std::move(out_shape), std::move(out), {a},
                       [sp](std::span<const double> g, std::span<const NodePtr> p) {
                           auto d = p[0]->grad_buffer();
                           for (std::size_t o = 0; o < sp.outer; ++o)
                               for (std::size_t e = 0; e < sp.extent; ++e)
                                   for (std::size_t i = 0; i < sp.inner; ++i)
                                       d[(o * sp.extent + e) * sp.inner + i] += g[o * sp.inner + i];
                       });
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.numel())); }

Tensor norm(const Tensor& a) {
    const std::size_t width = a.shape().back();
    const std::size_t rows = a.numel() / width;
    Shape out_shape(a.shape().begin(), a.shape().end() - 1);
    if (out_shape.empty()) out_shape = {1};
    std::vector<double> out(rows);
    auto x = a.data();
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < width; ++j) s += x[r * width + j] * x[r * width + j];
        out[r] = std::sqrt(s);
    }
    std::vector<double> norms = out;
    return make_result(std::move(out_shape), std::move(out), {a},
                       [width, norms = std::move(norms)](std::span<const double> g, std::span<const NodePtr> p) {
                           auto d = p[0]->grad_buffer();
                           const auto& x = p[0]->data;
                           for (std::size_t r = 0; r < norms.size(); ++r) {
                               if (norms[r] == 0.0) continue;
                               const double f = g[r] / norms[r];
                               for (std::size_t j = 0; j < width; ++j) d[r * width + j] += f * x[r * width + j];
                           }
                       });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
    const std::size_t width = x.shape().back();
    if (gain.shape() != Shape{width} || bias.shape() != Shape{width}) {
        throw ShapeError("layer_norm: gain/bias must have shape (" + std::to_string(width) + ")");
    }
    const std::size_t rows = x.numel() / width;
    auto xs = x.data();
    auto gs = gain.data();
    auto bs = bias.data();
    std::vector<double> out(x.numel());
    std::vector<double> xhat(x.numel());
    std::vector<double> rstd(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = xs.data() + r * width;
        double mu = 0.0;
        for (std::size_t j = 0; j < width; ++j) mu += row[j];
        mu /= static_cast<double>(width);
        double var = 0.0;
        for (std::size_t j = 0; j < width; ++j) var += (row[j] - mu) * (row[j] - mu);
        var /= static_cast<double>(width);
        rstd[r] = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < width; ++j) {
            const double h = (row[j] - mu) * rstd[r];
            xhat[r * width + j] = h;
            out[r * width + j] = h * gs[j] + bs[j];
        }
    }
    return make_result(
        x.shape(), std::move(out), {x, gain, bias},
        [width, rows, xhat = std::move(xhat), rstd = std::move(rstd)](std::span<const double> g,
                                                                      std::span<const NodePtr> p) {
            const auto& gain_data = p[1]->data;
            if (p[1]->requires_grad) {
                auto dg = p[1]->grad_buffer();
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t j = 0; j < width; ++j) dg[j] += g[r * width + j] * xhat[r * width + j];
            }
            if (p[2]->requires_grad) {
                auto db = p[2]->grad_buffer();
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t j = 0; j < width; ++j) db[j] += g[r * width + j];
            }
            if (p[0]->requires_grad) {
                auto dx = p[0]->grad_buffer();
                const double inv_w = 1.0 / static_cast<double>(width);
                for (std::size_t r = 0; r < rows; ++r) {
                    double m1 = 0.0;
                    double m2 = 0.0;
                    for (std::size_t j = 0; j < width; ++j) {
                        const double dh = g[r * width + j] * gain_data[j];
                        m1 += dh;
                        m2 += dh * xhat[r * width + j];
                    }
                    m1 *= inv_w;
                    m2 *= inv_w;
                    for (std::size_t j = 0; j < width; ++j) {
                        const double dh = g[r * width + j] * gain_data[j];
                        dx[r * width + j] += rstd[r] * (dh - m1 - xhat[r * width + j] * m2);
                    }
                }
            }
        });
}

Tensor gelu(const Tensor& x) {
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    Tensor v = unary(x, [inv_sqrt2](double t) { return 0.5 * t * (1.0 + std::erf(t * inv_sqrt2)); });
    return make_result(x.shape(), std::vector<double>(v.data().begin(), v.data().end()), {x},
                       [inv_sqrt2](std::span<const double> g, std::span<const NodePtr> p) {
                           auto d = p[0]->grad_buffer();
                           const auto& xs = p[0]->data;
                           const double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
                           for (std::size_t i = 0; i < g.size(); ++i) {
                               const double t = xs[i];
                               const double cdf = 0.5 * (1.0 + std::erf(t * inv_sqrt2));
                               const double pdf = inv_sqrt_2pi * std::exp(-0.5 * t * t);
                               d[i] += g[i] * (cdf + t * pdf);
                           }
                       });
}

Tensor softmax(const Tensor& x, int axis) {
    const std::size_t ax = resolve_axis(axis, x.rank());
    const AxisSplit sp = split_at(x.shape(), ax);
    auto xs = x.data();
    std::vector<double> out(x.numel());
    for (std::size_t o = 0; o < sp.outer; ++o) {
        for (std::size_t i = 0; i < sp.inner; ++i) {
            const std::size_t base = o * sp.extent * sp.inner + i;
            double mx = xs[base];
            for (std::size_t e = 1; e < sp.extent; ++e) mx = std::max(mx, xs[base + e * sp.inner]);
            double total = 0.0;
            for (std::size_t e = 0; e < sp.extent; ++e) {
                const double v = std::exp(xs[base + e * sp.inner] - mx);
                out[base + e * sp.inner] = v;
                total += v;
            }
            for (std::size_t e = 0; e < sp.extent; ++e) out[base + e * sp.inner] /= total;
        }
    }
    std::vector<double> y = out;
    return make_result(x.shape(), std::move(out), {x},
                       [sp, y = std::move(y)](std::span<const double> g, std::span<const NodePtr> p) {
                           auto d = p[0]->grad_buffer();
                           for (std::size_t o = 0; o < sp.outer; ++o) {
                               for (std::size_t i = 0; i < sp.inner; ++i) {
                                   const std::size_t base = o * sp.extent * sp.inner + i;
                                   double dot = 0.0;
                                   for (std::size_t e = 0; e < sp.extent; ++e)
                                       dot += g[base + e * sp.inner] * y[base + e * sp.inner];
                                   for (std::size_t e = 0; e < sp.extent; ++e) {
                                       const std::size_t k = base + e * sp.inner;
                                       d[k] += y[k] * (g[k] - dot);
                                   }
                               }
                           }
                       });
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
    if (parts.empty()) throw ShapeError("concat of zero tensors");
    const Shape& first = parts.front().shape();
    const std::size_t ax = resolve_axis(axis, first.size());
    Shape out_shape = first;
    out_shape[ax] = 0;
    for (const auto& t : parts) {
        const Shape& s = t.shape();
        bool ok = s.size() == first.size();
        for (std::size_t i = 0; ok && i < s.size(); ++i) ok = i == ax || s[i] == first[i];
        if (!ok) throw ShapeError("concat: " + to_string(s) + " incompatible with " + to_string(first));
        out_shape[ax] += s[ax];
    }
    const AxisSplit sp = split_at(out_shape, ax);
    std::vector<double> out(numel(out_shape));
    std::vector<std::size_t> widths;
    std::size_t offset = 0;
    for (const auto& t : parts) {
        const std::size_t w = t.shape()[ax] * sp.inner;
        auto src = t.data();
        for (std::size_t o = 0; o < sp.outer; ++o)
            std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(o * w), w,
                        out.begin() + static_cast<std::ptrdiff_t>(o * sp.extent * sp.inner + offset));
        widths.push_back(w);
        offset += w;
    }
    const std::size_t row = sp.extent * sp.inner;
    return make_result(std::move(out_shape), std::move(out), parts,
                       [sp, row, widths = std::move(widths)](std::span<const double> g, std::span<const NodePtr> p) {
                           std::size_t off = 0;
                           for (std::size_t k = 0; k < p.size(); ++k) {
                               const std::size_t w = widths[k];
                               if (p[k]->requires_grad) {
                                   auto d = p[k]->grad_buffer();
                                   for (std::size_t o = 0; o < sp.outer; ++o)
                                       for (std::size_t j = 0; j < w; ++j) d[o * w + j] += g[o * row + off + j];
                               }
                               off += w;
                           }
                       });
}

Tensor slice(const Tensor& t, int axis, std::size_t begin, std::size_t end) {
    const std::size_t ax = resolve_axis(axis, t.rank());
    const Shape& in = t.shape();
    if (begin >= end) throw ShapeError("slice: empty range [" + std::to_string(begin) + ", " + std::to_string(end) + ")");
    if (end > in[ax]) throw ShapeError("slice: range end " + std::to_string(end) + " exceeds extent of " + to_string(in));
    const AxisSplit sp = split_at(in, ax);
    Shape out_shape = in;
    out_shape[ax] = end - begin;
    const std::size_t w = (end - begin) * sp.inner;
    const std::size_t row = sp.extent * sp.inner;
    const std::size_t off = begin * sp.inner;
    std::vector<double> out(sp.outer * w);
    auto src = t.data();
    for (std::size_t o = 0; o < sp.outer; ++o)
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(o * row + off), w,
                    out.begin() + static_cast<std::ptrdiff_t>(o * w));
    return make_result(std::move(out_shape), std::move(out), {t},
                       [sp, w, row, off](std::span<const double> g, std::span<const NodePtr> p) {
                           auto d = p[0]->grad_buffer();
                           for (std::size_t o = 0; o < sp.outer; ++o)
                               for (std::size_t j = 0; j < w; ++j) d[o * row + off + j] += g[o * w + j];
                       });
}

Tensor repeat(const Tensor& t, int axis, std::size_t count) {
    const std::size_t ax = resolve_axis(axis, t.rank());
    if (t.shape()[ax] != 1) throw ShapeError("repeat: axis extent must be 1 in " + to_string(t.shape()));
    if (count == 0) throw ShapeError("repeat: count must be positive");
    const AxisSplit sp = split_at(t.shape(), ax);
    Shape out_shape = t.shape();
    out_shape[ax] = count;
    std::vector<double> out(sp.outer * count * sp.inner);
    auto src = t.data();
    for (std::size_t o = 0; o < sp.outer; ++o)
        for (std::size_t c = 0; c < count; ++c)
            std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(o * sp.inner), sp.inner,
                        out.begin() + static_cast<std::ptrdiff_t>((o * count + c) * sp.inner));
    return make_result(std::move(out_shape), std::move(out), {t},
                       [sp, count](std::span<const double> g, std::span<const NodePtr> p) {
                           auto d = p[0]->grad_buffer();
                           for (std::size_t o = 0; o < sp.outer; ++o)
                               for (std::size_t c = 0; c < count; ++c)
                                   for (std::size_t i = 0; i < sp.inner; ++i)
                                       d[o * sp.inner + i] += g[(o * count + c) * sp.inner + i];
                       });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) { return add(matmul(x, weight), bias); }

}  // namespace maed
