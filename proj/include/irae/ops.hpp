#pragma once

#include <cstddef>

#include "irae/tensor.hpp"

namespace irae {

// Binary elementwise ops accept identical shapes, or a per-channel vector
// of shape [C] against an [N,C,H,W] tensor (either side).
template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b);

template <typename T> Tensor<T> add_scalar(const Tensor<T>& a, T value);
template <typename T> Tensor<T> scale(const Tensor<T>& a, T factor);

template <typename T> Tensor<T> sigmoid(const Tensor<T>& a);
template <typename T> Tensor<T> tanh(const Tensor<T>& a);
template <typename T> Tensor<T> exp(const Tensor<T>& a);
// Throws on any non-positive input.
template <typename T> Tensor<T> log(const Tensor<T>& a);
// Subgradient 0 at the kink.
template <typename T> Tensor<T> abs(const Tensor<T>& a);

template <typename T> Tensor<T> sum(const Tensor<T>& a);
template <typename T> Tensor<T> mean(const Tensor<T>& a);
// Per-channel statistics of an [N,C,H,W] tensor (rank-2 [N,C] is treated as H=W=1).
template <typename T> Tensor<T> channel_mean(const Tensor<T>& a);
// Population (divide-by-n) standard deviation; needs more than one element per channel.
template <typename T> Tensor<T> channel_std(const Tensor<T>& a);

/// Same-padded 2-D cross-correlation.
///
/// x is [N,Cin,H,W], w is [Cout,Cin,k,k] with odd k, bias is [Cout] or
/// undefined. Zero padding of (k-1)/2 keeps the spatial size.
template <typename T>
Tensor<T> conv2d_same(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias);

// Channel slice [start, start+count) of an [N,C,H,W] tensor.
template <typename T> Tensor<T> narrow_channels(const Tensor<T>& x, std::size_t start, std::size_t count);
template <typename T> Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);

/// Factor-2 space-to-depth. Output channel 4c + 2dy + dx at (i, j) holds
/// input channel c at (2i+dy, 2j+dx).
template <typename T> Tensor<T> squeeze2(const Tensor<T>& x);
template <typename T> Tensor<T> unsqueeze2(const Tensor<T>& x);

}  // namespace irae
