#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "irae/tensor.hpp"

namespace irae {

// |det W| at or below this is treated as singular by the 1x1 inverse.
inline constexpr double kSingularDetThreshold = 1e-12;
// Floor on ActNorm statistics and on |scale|.
inline constexpr double kActNormEpsilon = 1e-8;
// Coupling scale is sigmoid(raw + offset), about 0.88 for a zero network.
inline constexpr double kCouplingScaleOffset = 2.0;

struct ActNormInitReport {
    // Channels whose statistics hit the 1e-8 floor.
    std::vector<std::size_t> clamped_channels;
    bool clamped() const { return !clamped_channels.empty(); }
};

/// Per-channel affine map y = scale * x + bias.
///
/// Starts uninitialized; `initialize` sets scale and bias from a batch so
/// that the batch leaves with zero mean and unit (population) std per channel.
template <typename T>
class ActNorm {
public:
    explicit ActNorm(std::size_t channels);

    std::size_t channels() const { return channels_; }
    bool initialized() const { return initialized_; }

    ActNormInitReport initialize(const Tensor<T>& x);
    void set(std::span<const T> scale, std::span<const T> bias);
    // Marks parameters as valid, e.g. after loading them from a checkpoint.
    void mark_initialized();

    Tensor<T> forward(const Tensor<T>& x) const;
    Tensor<T> inverse(const Tensor<T>& y) const;
    // Per-sample log|det J| for an H x W feature map.
    double log_det(std::size_t height, std::size_t width) const;

    const Tensor<T>& scale() const { return scale_; }
    const Tensor<T>& bias() const { return bias_; }
    std::vector<Tensor<T>> parameters() const { return {scale_, bias_}; }

private:
    void require_initialized() const;

    std::size_t channels_;
    Tensor<T> scale_;
    Tensor<T> bias_;
    bool initialized_ = false;
};

/// Invertible 1x1 convolution: a per-pixel channel mix y = W x.
template <typename T>
class InvConv1x1 {
public:
    // Random orthogonal W.
    InvConv1x1(std::size_t channels, std::mt19937_64& rng);
    // Identity W.
    explicit InvConv1x1(std::size_t channels);

    std::size_t channels() const { return channels_; }
    // Throws SingularWeightError when |det W| <= 1e-12.
    void set_weight(std::span<const double> row_major);

    Tensor<T> forward(const Tensor<T>& x) const;
    // Throws SingularWeightError when |det W| <= 1e-12.
    Tensor<T> inverse(const Tensor<T>& y) const;
    double determinant() const;
    double log_det(std::size_t height, std::size_t width) const;

    const Tensor<T>& weight() const { return weight_; }
    std::vector<Tensor<T>> parameters() const { return {weight_}; }

private:
    std::vector<double> weight_matrix() const;

    std::size_t channels_;
    Tensor<T> weight_;  // [C, C, 1, 1]
};

/// Affine coupling over contiguous channel halves.
///
/// The first half passes through unchanged and drives a small network
/// conv3x3(C/2->h) -> tanh -> conv3x3(h->h) -> tanh -> conv3x3(h->C).
/// Its output splits into (raw, shift); the second half becomes
/// sigmoid(raw + 2) * x_b + shift. The last convolution starts at zero.
template <typename T>
class AffineCoupling {
public:
    AffineCoupling(std::size_t channels, std::size_t hidden, std::mt19937_64& rng);

    std::size_t channels() const { return channels_; }
    std::size_t hidden() const { return hidden_; }

    Tensor<T> forward(const Tensor<T>& x) const;
    Tensor<T> inverse(const Tensor<T>& y) const;
    // Mean over the batch of sum(log scale) per sample.
    double log_det(const Tensor<T>& x) const;

    // w1, b1, w2, b2, w3, b3.
    std::vector<Tensor<T>> parameters() const { return {w1_, b1_, w2_, b2_, w3_, b3_}; }

private:
    struct ScaleShift {
        Tensor<T> scale;
        Tensor<T> shift;
    };
    ScaleShift scale_shift(const Tensor<T>& passive) const;
    void check_input(const Tensor<T>& x) const;

    std::size_t channels_;
    std::size_t hidden_;
    Tensor<T> w1_, b1_, w2_, b2_, w3_, b3_;
};

/// One step of flow: ActNorm, then 1x1 convolution, then affine coupling.
template <typename T>
struct FlowStep {
    FlowStep(std::size_t channels, std::size_t hidden, std::mt19937_64& rng)
        : actnorm(channels), conv(channels, rng), coupling(channels, hidden, rng)
    {
    }

    Tensor<T> forward(const Tensor<T>& x) const { return coupling.forward(conv.forward(actnorm.forward(x))); }
    Tensor<T> inverse(const Tensor<T>& y) const { return actnorm.inverse(conv.inverse(coupling.inverse(y))); }
    std::vector<Tensor<T>> parameters() const;

    ActNorm<T> actnorm;
    InvConv1x1<T> conv;
    AffineCoupling<T> coupling;
};

// Number of learnable scalars in one flow step with `channels` channels.
std::size_t flow_step_param_count(std::size_t channels, std::size_t hidden);

extern template class ActNorm<float>;
extern template class ActNorm<double>;
extern template class InvConv1x1<float>;
extern template class InvConv1x1<double>;
extern template class AffineCoupling<float>;
extern template class AffineCoupling<double>;
extern template struct FlowStep<float>;
extern template struct FlowStep<double>;

}  // namespace irae
