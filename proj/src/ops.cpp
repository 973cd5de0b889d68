#include "irae/ops.hpp"

#include <Eigen/Core>

#include <cmath>
#include <string>

namespace irae {

namespace {

template <typename T>
using Node = detail::Node<T>;

// Iteration layout for a binary op with optional per-channel broadcast.
struct BinaryLayout {
    Shape out_shape;
    bool a_channel = false;  // a is a [C] vector broadcast over b
    bool b_channel = false;
    std::size_t outer = 1;  // N
    std::size_t channels = 1;
    std::size_t inner = 1;  // H*W

    template <typename F>
    void for_each(F&& f) const
    {
        if (!a_channel && !b_channel) {
            const std::size_t n = outer * channels * inner;
            for (std::size_t i = 0; i < n; ++i) f(i, i, i);
            return;
        }
        std::size_t i = 0;
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t c = 0; c < channels; ++c) {
                for (std::size_t j = 0; j < inner; ++j, ++i) f(i, a_channel ? c : i, b_channel ? c : i);
            }
        }
    }
};

bool channel_broadcastable(const Shape& full, const Shape& vec)
{
    return vec.size() == 1 && full.size() >= 2 && full[1] == vec[0];
}

BinaryLayout make_layout(const Shape& a, const Shape& b, const char* op)
{
    BinaryLayout layout;
    const Shape* full = nullptr;
    if (a == b) {
        layout.out_shape = a;
        layout.inner = shape_numel(a);
        return layout;
    }
    if (channel_broadcastable(a, b)) {
        layout.b_channel = true;
        full = &a;
    } else if (channel_broadcastable(b, a)) {
        layout.a_channel = true;
        full = &b;
    } else {
        throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a) + " and " + shape_string(b));
    }
    layout.out_shape = *full;
    layout.outer = (*full)[0];
    layout.channels = (*full)[1];
    layout.inner = 1;
    for (std::size_t i = 2; i < full->size(); ++i) layout.inner *= (*full)[i];
    return layout;
}

// Binary op with partial derivatives da(a, b, out) and db(a, b, out).
template <typename T, typename F, typename DA, typename DB>
Tensor<T> binary(const Tensor<T>& a, const Tensor<T>& b, const char* name, F f, DA da, DB db)
{
    const auto layout = make_layout(a.shape(), b.shape(), name);
    std::vector<T> out(shape_numel(layout.out_shape));
    auto ad = a.data();
    auto bd = b.data();
    layout.for_each([&](std::size_t i, std::size_t ia, std::size_t ib) { out[i] = f(ad[ia], bd[ib]); });
    return Tensor<T>::from_op(layout.out_shape, std::move(out), {a, b}, [layout, da, db](Node<T>& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        const auto& g = self.grad;
        const auto& av = pa.data;
        const auto& bv = pb.data;
        const auto& ov = self.data;
        if (pa.requires_grad) {
            auto& ga = pa.grad_buffer();
            layout.for_each([&](std::size_t i, std::size_t ia, std::size_t ib) {
                ga[ia] += g[i] * da(av[ia], bv[ib], ov[i]);
            });
        }
        if (pb.requires_grad) {
            auto& gb = pb.grad_buffer();
            layout.for_each([&](std::size_t i, std::size_t ia, std::size_t ib) {
                gb[ib] += g[i] * db(av[ia], bv[ib], ov[i]);
            });
        }
    });
}

// Unary op whose derivative is expressed through (input, output).
template <typename T, typename F, typename D>
Tensor<T> unary(const Tensor<T>& a, F f, D d)
{
    auto in = a.data();
    std::vector<T> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
    return Tensor<T>::from_op(a.shape(), std::move(out), {a}, [d](Node<T>& self) {
        auto& p = *self.parents[0];
        auto& gp = p.grad_buffer();
        for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += self.grad[i] * d(p.data[i], self.data[i]);
    });
}

struct ChannelLayout {
    std::size_t outer, channels, inner;
};

template <typename T>
ChannelLayout channel_layout(const Tensor<T>& a, const char* name)
{
    const auto& s = a.shape();
    if (s.size() < 2) throw ShapeError(std::string(name) + " needs a tensor with a channel axis, got " + shape_string(s));
    ChannelLayout l{s[0], s[1], 1};
    for (std::size_t i = 2; i < s.size(); ++i) l.inner *= s[i];
    return l;
}

template <typename T>
void check_4d(const Tensor<T>& x, const char* name)
{
    if (x.rank() != 4) throw ShapeError(std::string(name) + " expects an [N,C,H,W] tensor, got " + shape_string(x.shape()));
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b)
{
    return binary(
        a, b, "add", [](T x, T y) { return x + y; }, [](T, T, T) { return T(1); }, [](T, T, T) { return T(1); });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b)
{
    return binary(
        a, b, "sub", [](T x, T y) { return x - y; }, [](T, T, T) { return T(1); }, [](T, T, T) { return T(-1); });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b)
{
    return binary(
        a, b, "mul", [](T x, T y) { return x * y; }, [](T, T y, T) { return y; }, [](T x, T, T) { return x; });
}

template <typename T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b)
{
    for (T v : b.data()) {
        if (v == T(0)) throw Error("div: division by zero");
    }
    return binary(
        a, b, "div", [](T x, T y) { return x / y; }, [](T, T y, T) { return T(1) / y; },
        [](T, T y, T o) { return -o / y; });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, T value)
{
    return unary(a, [value](T x) { return x + value; }, [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor)
{
    return unary(a, [factor](T x) { return x * factor; }, [factor](T, T) { return factor; });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a)
{
    return unary(
        a,
        [](T x) {
            if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
            const T e = std::exp(x);
            return e / (T(1) + e);
        },
        [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& a)
{
    return unary(a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Tensor<T> exp(const Tensor<T>& a)
{
    return unary(a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Tensor<T> log(const Tensor<T>& a)
{
    for (T v : a.data()) {
        if (!(v > T(0))) throw Error("log: non-positive input " + std::to_string(static_cast<double>(v)));
    }
    return unary(a, [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}

template <typename T>
Tensor<T> abs(const Tensor<T>& a)
{
    return unary(
        a, [](T x) { return std::abs(x); },
        [](T x, T) { return x > T(0) ? T(1) : (x < T(0) ? T(-1) : T(0)); });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a)
{
    double acc = 0;
    for (T v : a.data()) acc += v;
    return Tensor<T>::from_op(Shape{1}, {static_cast<T>(acc)}, {a}, [](Node<T>& self) {
        auto& p = *self.parents[0];
        auto& gp = p.grad_buffer();
        const T g = self.grad[0];
        for (auto& v : gp) v += g;
    });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a)
{
    const std::size_t n = a.numel();
    double acc = 0;
    for (T v : a.data()) acc += v;
    return Tensor<T>::from_op(Shape{1}, {static_cast<T>(acc / static_cast<double>(n))}, {a}, [n](Node<T>& self) {
        auto& p = *self.parents[0];
        auto& gp = p.grad_buffer();
        const T g = self.grad[0] / static_cast<T>(n);
        for (auto& v : gp) v += g;
    });
}

template <typename T>
Tensor<T> channel_mean(const Tensor<T>& a)
{
    const auto l = channel_layout(a, "channel_mean");
    const double count = static_cast<double>(l.outer * l.inner);
    std::vector<double> acc(l.channels, 0.0);
    auto d = a.data();
    for (std::size_t o = 0, i = 0; o < l.outer; ++o)
        for (std::size_t c = 0; c < l.channels; ++c)
            for (std::size_t j = 0; j < l.inner; ++j, ++i) acc[c] += d[i];
    std::vector<T> out(l.channels);
    for (std::size_t c = 0; c < l.channels; ++c) out[c] = static_cast<T>(acc[c] / count);
    return Tensor<T>::from_op(Shape{l.channels}, std::move(out), {a}, [l, count](Node<T>& self) {
        auto& gp = self.parents[0]->grad_buffer();
        for (std::size_t o = 0, i = 0; o < l.outer; ++o)
            for (std::size_t c = 0; c < l.channels; ++c)
                for (std::size_t j = 0; j < l.inner; ++j, ++i) gp[i] += self.grad[c] / static_cast<T>(count);
    });
}

template <typename T>
Tensor<T> channel_std(const Tensor<T>& a)
{
    const auto l = channel_layout(a, "channel_std");
    const std::size_t count = l.outer * l.inner;
    if (count < 2) throw Error("channel_std needs more than one element per channel");
    auto d = a.data();
    std::vector<double> m(l.channels, 0.0), var(l.channels, 0.0);
    for (std::size_t o = 0, i = 0; o < l.outer; ++o)
        for (std::size_t c = 0; c < l.channels; ++c)
            for (std::size_t j = 0; j < l.inner; ++j, ++i) m[c] += d[i];
    for (auto& v : m) v /= static_cast<double>(count);
    for (std::size_t o = 0, i = 0; o < l.outer; ++o)
        for (std::size_t c = 0; c < l.channels; ++c)
            for (std::size_t j = 0; j < l.inner; ++j, ++i) var[c] += (d[i] - m[c]) * (d[i] - m[c]);
    std::vector<T> out(l.channels);
    for (std::size_t c = 0; c < l.channels; ++c) out[c] = static_cast<T>(std::sqrt(var[c] / static_cast<double>(count)));
    return Tensor<T>::from_op(Shape{l.channels}, std::move(out), {a}, [l, count, m](Node<T>& self) {
        auto& p = *self.parents[0];
        auto& gp = p.grad_buffer();
        for (std::size_t o = 0, i = 0; o < l.outer; ++o)
            for (std::size_t c = 0; c < l.channels; ++c) {
                const T sd = self.data[c];
                if (sd == T(0)) {
                    i += l.inner;
                    continue;
                }
                const T k = self.grad[c] / (static_cast<T>(count) * sd);
                for (std::size_t j = 0; j < l.inner; ++j, ++i) gp[i] += k * (p.data[i] - static_cast<T>(m[c]));
            }
    });
}

namespace {

struct ConvGeometry {
    std::size_t n, cin, h, w, cout, k, pad;
    std::size_t plane() const { return h * w; }
    std::size_t rows() const { return cin * k * k; }
    std::size_t cols() const { return n * h * w; }
};

// col(r, n*HW + y*W + x) = x_padded(n, ci, y+ky-pad, x+kx-pad), r = (ci*k+ky)*k+kx.
template <typename T>
void im2col(const ConvGeometry& g, std::span<const T> x, std::vector<T>& col)
{
    col.assign(g.rows() * g.cols(), T(0));
    const std::size_t P = g.cols();
    const std::size_t HW = g.plane();
    for (std::size_t ci = 0; ci < g.cin; ++ci)
        for (std::size_t ky = 0; ky < g.k; ++ky)
            for (std::size_t kx = 0; kx < g.k; ++kx) {
                const std::size_t r = (ci * g.k + ky) * g.k + kx;
                const long dy = static_cast<long>(ky) - static_cast<long>(g.pad);
                const long dx = static_cast<long>(kx) - static_cast<long>(g.pad);
                const std::size_t x0 = dx < 0 ? static_cast<std::size_t>(-dx) : 0;
                const std::size_t x1 = dx > 0 ? g.w - static_cast<std::size_t>(dx) : g.w;
                for (std::size_t n = 0; n < g.n; ++n) {
                    const T* src = x.data() + (n * g.cin + ci) * HW;
                    T* dst = col.data() + r * P + n * HW;
                    for (std::size_t y = 0; y < g.h; ++y) {
                        const long sy = static_cast<long>(y) + dy;
                        if (sy < 0 || sy >= static_cast<long>(g.h) || x0 >= x1) continue;
                        const T* srow = src + static_cast<std::size_t>(sy) * g.w;
                        T* drow = dst + y * g.w;
                        for (std::size_t xx = x0; xx < x1; ++xx) drow[xx] = srow[static_cast<long>(xx) + dx];
                    }
                }
            }
}

template <typename T>
void col2im_add(const ConvGeometry& g, const std::vector<T>& col, std::vector<T>& gx)
{
    const std::size_t P = g.cols();
    const std::size_t HW = g.plane();
    for (std::size_t ci = 0; ci < g.cin; ++ci)
        for (std::size_t ky = 0; ky < g.k; ++ky)
            for (std::size_t kx = 0; kx < g.k; ++kx) {
                const std::size_t r = (ci * g.k + ky) * g.k + kx;
                const long dy = static_cast<long>(ky) - static_cast<long>(g.pad);
                const long dx = static_cast<long>(kx) - static_cast<long>(g.pad);
                const std::size_t x0 = dx < 0 ? static_cast<std::size_t>(-dx) : 0;
                const std::size_t x1 = dx > 0 ? g.w - static_cast<std::size_t>(dx) : g.w;
                for (std::size_t n = 0; n < g.n; ++n) {
                    T* dst = gx.data() + (n * g.cin + ci) * HW;
                    const T* src = col.data() + r * P + n * HW;
                    for (std::size_t y = 0; y < g.h; ++y) {
                        const long sy = static_cast<long>(y) + dy;
                        if (sy < 0 || sy >= static_cast<long>(g.h) || x0 >= x1) continue;
                        T* drow = dst + static_cast<std::size_t>(sy) * g.w;
                        const T* srow = src + y * g.w;
                        for (std::size_t xx = x0; xx < x1; ++xx) drow[static_cast<long>(xx) + dx] += srow[xx];
                    }
                }
            }
}

}  // namespace

template <typename T>
Tensor<T> conv2d_same(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias)
{
    using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using Map = Eigen::Map<Mat>;
    using CMap = Eigen::Map<const Mat>;

    check_4d(x, "conv2d_same");
    if (w.rank() != 4) throw ShapeError("conv2d_same: weight must be [Cout,Cin,k,k], got " + shape_string(w.shape()));
    const auto& xs = x.shape();
    const auto& ws = w.shape();
    if (ws[2] != ws[3] || ws[2] % 2 == 0) throw ShapeError("conv2d_same: kernel must be square with odd size");
    if (ws[1] != xs[1]) {
        throw ShapeError("conv2d_same: weight expects " + std::to_string(ws[1]) + " input channels, input has " +
                         std::to_string(xs[1]));
    }
    const bool has_bias = bias.defined();
    if (has_bias && bias.shape() != Shape{ws[0]}) {
        throw ShapeError("conv2d_same: bias must be [" + std::to_string(ws[0]) + "], got " + shape_string(bias.shape()));
    }
    const ConvGeometry g{xs[0], xs[1], xs[2], xs[3], ws[0], ws[2], (ws[2] - 1) / 2};

    auto col = std::make_shared<std::vector<T>>();
    im2col(g, x.data(), *col);
    const std::size_t P = g.cols();
    const std::size_t HW = g.plane();
    Mat prod(g.cout, P);
    prod.noalias() = CMap(w.data().data(), g.cout, g.rows()) * CMap(col->data(), g.rows(), P);

    std::vector<T> out(g.n * g.cout * HW);
    auto bd = has_bias ? bias.data() : std::span<const T>{};
    for (std::size_t n = 0; n < g.n; ++n)
        for (std::size_t co = 0; co < g.cout; ++co) {
            const T b = has_bias ? bd[co] : T(0);
            const T* src = prod.data() + co * P + n * HW;
            T* dst = out.data() + (n * g.cout + co) * HW;
            for (std::size_t p = 0; p < HW; ++p) dst[p] = src[p] + b;
        }

    std::vector<Tensor<T>> parents{x, w};
    if (has_bias) parents.push_back(bias);
    return Tensor<T>::from_op(Shape{g.n, g.cout, g.h, g.w}, std::move(out), std::move(parents),
                              [g, col, has_bias](Node<T>& self) {
                                  const std::size_t P = g.cols();
                                  const std::size_t HW = g.plane();
                                  Mat grad_out(g.cout, P);
                                  for (std::size_t n = 0; n < g.n; ++n)
                                      for (std::size_t co = 0; co < g.cout; ++co) {
                                          const T* src = self.grad.data() + (n * g.cout + co) * HW;
                                          T* dst = grad_out.data() + co * P + n * HW;
                                          for (std::size_t p = 0; p < HW; ++p) dst[p] = src[p];
                                      }
                                  auto& px = *self.parents[0];
                                  auto& pw = *self.parents[1];
                                  if (pw.requires_grad) {
                                      auto& gw = pw.grad_buffer();
                                      Map(gw.data(), g.cout, g.rows()).noalias() +=
                                          grad_out * CMap(col->data(), g.rows(), P).transpose();
                                  }
                                  if (has_bias && self.parents[2]->requires_grad) {
                                      auto& gb = self.parents[2]->grad_buffer();
                                      for (std::size_t co = 0; co < g.cout; ++co) gb[co] += grad_out.row(co).sum();
                                  }
                                  if (px.requires_grad) {
                                      std::vector<T> grad_col(g.rows() * P);
                                      Map(grad_col.data(), g.rows(), P).noalias() =
                                          CMap(pw.data.data(), g.cout, g.rows()).transpose() * grad_out;
                                      col2im_add(g, grad_col, px.grad_buffer());
                                  }
                              });
}

template <typename T>
Tensor<T> narrow_channels(const Tensor<T>& x, std::size_t start, std::size_t count)
{
    check_4d(x, "narrow_channels");
    const auto& s = x.shape();
    if (count == 0 || start + count > s[1]) {
        throw ShapeError("narrow_channels: range [" + std::to_string(start) + "," + std::to_string(start + count) +
                         ") outside " + std::to_string(s[1]) + " channels");
    }
    const std::size_t HW = s[2] * s[3];
    std::vector<T> out(s[0] * count * HW);
    auto d = x.data();
    for (std::size_t n = 0; n < s[0]; ++n) {
        const T* src = d.data() + (n * s[1] + start) * HW;
        std::copy(src, src + count * HW, out.data() + n * count * HW);
    }
    return Tensor<T>::from_op(Shape{s[0], count, s[2], s[3]}, std::move(out), {x},
                              [start, count, s, HW](Node<T>& self) {
                                  auto& gp = self.parents[0]->grad_buffer();
                                  for (std::size_t n = 0; n < s[0]; ++n) {
                                      const T* src = self.grad.data() + n * count * HW;
                                      T* dst = gp.data() + (n * s[1] + start) * HW;
                                      for (std::size_t i = 0; i < count * HW; ++i) dst[i] += src[i];
                                  }
                              });
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b)
{
    check_4d(a, "concat_channels");
    check_4d(b, "concat_channels");
    const auto& sa = a.shape();
    const auto& sb = b.shape();
    if (sa[0] != sb[0] || sa[2] != sb[2] || sa[3] != sb[3]) {
        throw ShapeError("concat_channels: incompatible shapes " + shape_string(sa) + " and " + shape_string(sb));
    }
    const std::size_t HW = sa[2] * sa[3];
    const std::size_t ca = sa[1], cb = sb[1], c = ca + cb;
    std::vector<T> out(sa[0] * c * HW);
    auto ad = a.data();
    auto bd = b.data();
    for (std::size_t n = 0; n < sa[0]; ++n) {
        std::copy(ad.data() + n * ca * HW, ad.data() + (n + 1) * ca * HW, out.data() + n * c * HW);
        std::copy(bd.data() + n * cb * HW, bd.data() + (n + 1) * cb * HW, out.data() + (n * c + ca) * HW);
    }
    return Tensor<T>::from_op(Shape{sa[0], c, sa[2], sa[3]}, std::move(out), {a, b},
                              [N = sa[0], ca, cb, c, HW](Node<T>& self) {
                                  auto& pa = *self.parents[0];
                                  auto& pb = *self.parents[1];
                                  for (std::size_t n = 0; n < N; ++n) {
                                      const T* src = self.grad.data() + n * c * HW;
                                      if (pa.requires_grad) {
                                          T* dst = pa.grad_buffer().data() + n * ca * HW;
                                          for (std::size_t i = 0; i < ca * HW; ++i) dst[i] += src[i];
                                      }
                                      if (pb.requires_grad) {
                                          T* dst = pb.grad_buffer().data() + n * cb * HW;
                                          for (std::size_t i = 0; i < cb * HW; ++i) dst[i] += src[ca * HW + i];
                                      }
                                  }
                              });
}

namespace {

// Flat index pairs (squeezed, unsqueezed) for an unsqueezed [N,C,H,W] shape.
template <typename F>
void for_each_squeeze_pair(const Shape& s, F&& f)
{
    const std::size_t N = s[0], C = s[1], H = s[2], W = s[3];
    const std::size_t h = H / 2, w = W / 2;
    std::size_t o = 0;
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t dy = 0; dy < 2; ++dy)
                for (std::size_t dx = 0; dx < 2; ++dx)
                    for (std::size_t i = 0; i < h; ++i)
                        for (std::size_t j = 0; j < w; ++j, ++o) {
                            f(o, ((n * C + c) * H + 2 * i + dy) * W + 2 * j + dx);
                        }
}

}  // namespace

template <typename T>
Tensor<T> squeeze2(const Tensor<T>& x)
{
    check_4d(x, "squeeze2");
    const Shape s = x.shape();
    if (s[2] % 2 || s[3] % 2) throw ShapeError("squeeze2: height and width must be even, got " + shape_string(s));
    std::vector<T> out(x.numel());
    auto d = x.data();
    for_each_squeeze_pair(s, [&](std::size_t o, std::size_t i) { out[o] = d[i]; });
    return Tensor<T>::from_op(Shape{s[0], 4 * s[1], s[2] / 2, s[3] / 2}, std::move(out), {x}, [s](Node<T>& self) {
        auto& gp = self.parents[0]->grad_buffer();
        for_each_squeeze_pair(s, [&](std::size_t o, std::size_t i) { gp[i] += self.grad[o]; });
    });
}

template <typename T>
Tensor<T> unsqueeze2(const Tensor<T>& x)
{
    check_4d(x, "unsqueeze2");
    const auto& xs = x.shape();
    if (xs[1] % 4) throw ShapeError("unsqueeze2: channel count must be a multiple of 4, got " + shape_string(xs));
    const Shape s{xs[0], xs[1] / 4, xs[2] * 2, xs[3] * 2};
    std::vector<T> out(x.numel());
    auto d = x.data();
    for_each_squeeze_pair(s, [&](std::size_t o, std::size_t i) { out[i] = d[o]; });
    return Tensor<T>::from_op(s, std::move(out), {x}, [s](Node<T>& self) {
        auto& gp = self.parents[0]->grad_buffer();
        for_each_squeeze_pair(s, [&](std::size_t o, std::size_t i) { gp[o] += self.grad[i]; });
    });
}

#define IRAE_INSTANTIATE_OPS(T)                                                                  \
    template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                  \
    template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                  \
    template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                  \
    template Tensor<T> div(const Tensor<T>&, const Tensor<T>&);                                  \
    template Tensor<T> add_scalar(const Tensor<T>&, T);                                          \
    template Tensor<T> scale(const Tensor<T>&, T);                                               \
    template Tensor<T> sigmoid(const Tensor<T>&);                                                \
    template Tensor<T> tanh(const Tensor<T>&);                                                   \
    template Tensor<T> exp(const Tensor<T>&);                                                    \
    template Tensor<T> log(const Tensor<T>&);                                                    \
    template Tensor<T> abs(const Tensor<T>&);                                                    \
    template Tensor<T> sum(const Tensor<T>&);                                                    \
    template Tensor<T> mean(const Tensor<T>&);                                                   \
    template Tensor<T> channel_mean(const Tensor<T>&);                                           \
    template Tensor<T> channel_std(const Tensor<T>&);                                            \
    template Tensor<T> conv2d_same(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);        \
    template Tensor<T> narrow_channels(const Tensor<T>&, std::size_t, std::size_t);              \
    template Tensor<T> concat_channels(const Tensor<T>&, const Tensor<T>&);                      \
    template Tensor<T> squeeze2(const Tensor<T>&);                                               \
    template Tensor<T> unsqueeze2(const Tensor<T>&);

IRAE_INSTANTIATE_OPS(float)
IRAE_INSTANTIATE_OPS(double)

}  // namespace irae
