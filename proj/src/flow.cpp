#include "irae/flow.hpp"

#include <cmath>
#include <string>

#include "irae/linalg.hpp"
#include "irae/ops.hpp"

namespace irae {

namespace {

template <typename T>
Tensor<T> uniform_tensor(const Shape& shape, double bound, std::mt19937_64& rng, bool requires_grad)
{
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<T> v(shape_numel(shape));
    for (auto& x : v) x = static_cast<T>(dist(rng));
    return Tensor<T>(shape, std::move(v), requires_grad);
}

template <typename T>
void check_channels(const Tensor<T>& x, std::size_t channels, const char* layer)
{
    if (x.rank() != 4 || x.dim(1) != channels) {
        throw ShapeError(std::string(layer) + " expects [N," + std::to_string(channels) + ",H,W], got " +
                         shape_string(x.shape()));
    }
}

}  // namespace

// ---------------------------------------------------------------- ActNorm

template <typename T>
ActNorm<T>::ActNorm(std::size_t channels)
    : channels_(channels),
      scale_(Tensor<T>::full({channels}, T(1), true)),
      bias_(Tensor<T>::zeros({channels}, true))
{
}

template <typename T>
ActNormInitReport ActNorm<T>::initialize(const Tensor<T>& x)
{
    check_channels(x, channels_, "ActNorm");
    if (initialized_) throw Error("ActNorm is already initialized");
    NoGradGuard no_grad;
    auto m = channel_mean(x);
    auto sd = channel_std(x);
    ActNormInitReport report;
    auto s = scale_.mutable_data();
    auto b = bias_.mutable_data();
    for (std::size_t c = 0; c < channels_; ++c) {
        double stdev = sd.data()[c];
        if (stdev < kActNormEpsilon) {
            stdev = kActNormEpsilon;
            report.clamped_channels.push_back(c);
        }
        double scale = 1.0 / stdev;
        if (scale < kActNormEpsilon) {
            scale = kActNormEpsilon;
            report.clamped_channels.push_back(c);
        }
        s[c] = static_cast<T>(scale);
        b[c] = static_cast<T>(-static_cast<double>(m.data()[c]) * scale);
    }
    initialized_ = true;
    return report;
}

template <typename T>
void ActNorm<T>::set(std::span<const T> scale, std::span<const T> bias)
{
    if (scale.size() != channels_ || bias.size() != channels_) throw ShapeError("ActNorm::set: wrong parameter length");
    for (T v : scale) {
        if (!(std::abs(static_cast<double>(v)) >= kActNormEpsilon)) throw Error("ActNorm scale must satisfy |s| >= 1e-8");
    }
    std::copy(scale.begin(), scale.end(), scale_.mutable_data().begin());
    std::copy(bias.begin(), bias.end(), bias_.mutable_data().begin());
    initialized_ = true;
}

template <typename T>
void ActNorm<T>::mark_initialized()
{
    initialized_ = true;
}

template <typename T>
void ActNorm<T>::require_initialized() const
{
    if (!initialized_) throw Error("ActNorm used before initialization");
}

template <typename T>
Tensor<T> ActNorm<T>::forward(const Tensor<T>& x) const
{
    require_initialized();
    check_channels(x, channels_, "ActNorm");
    return add(mul(x, scale_), bias_);
}

template <typename T>
Tensor<T> ActNorm<T>::inverse(const Tensor<T>& y) const
{
    require_initialized();
    check_channels(y, channels_, "ActNorm");
    return div(sub(y, bias_), scale_);
}

template <typename T>
double ActNorm<T>::log_det(std::size_t height, std::size_t width) const
{
    double acc = 0.0;
    for (T v : scale_.data()) acc += std::log(std::abs(static_cast<double>(v)));
    return static_cast<double>(height * width) * acc;
}

// ------------------------------------------------------------- InvConv1x1

template <typename T>
InvConv1x1<T>::InvConv1x1(std::size_t channels, std::mt19937_64& rng) : InvConv1x1(channels)
{
    set_weight(random_orthogonal(channels, rng));
}

template <typename T>
InvConv1x1<T>::InvConv1x1(std::size_t channels)
    : channels_(channels), weight_(Tensor<T>::zeros({channels, channels, 1, 1}, true))
{
    auto w = weight_.mutable_data();
    for (std::size_t i = 0; i < channels; ++i) w[i * channels + i] = T(1);
}

template <typename T>
void InvConv1x1<T>::set_weight(std::span<const double> row_major)
{
    if (row_major.size() != channels_ * channels_) throw ShapeError("InvConv1x1::set_weight: wrong matrix size");
    const double det = lu_decompose(row_major, channels_).determinant();
    if (!(std::abs(det) > kSingularDetThreshold)) {
        throw SingularWeightError("1x1 convolution weight is singular (|det| = " + std::to_string(std::abs(det)) + ")");
    }
    auto w = weight_.mutable_data();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<T>(row_major[i]);
}

template <typename T>
std::vector<double> InvConv1x1<T>::weight_matrix() const
{
    auto w = weight_.data();
    return std::vector<double>(w.begin(), w.end());
}

template <typename T>
Tensor<T> InvConv1x1<T>::forward(const Tensor<T>& x) const
{
    check_channels(x, channels_, "InvConv1x1");
    return conv2d_same(x, weight_, Tensor<T>());
}

template <typename T>
double InvConv1x1<T>::determinant() const
{
    return lu_decompose(weight_matrix(), channels_).determinant();
}

template <typename T>
Tensor<T> InvConv1x1<T>::inverse(const Tensor<T>& y) const
{
    check_channels(y, channels_, "InvConv1x1");
    const auto lu = lu_decompose(weight_matrix(), channels_);
    const double det = lu.determinant();
    if (lu.singular || !(std::abs(det) > kSingularDetThreshold)) {
        throw SingularWeightError("1x1 convolution weight is singular (|det W| = " + std::to_string(std::abs(det)) +
                                  ")");
    }
    const auto inv = lu.inverse();
    std::vector<T> w(inv.size());
    for (std::size_t i = 0; i < inv.size(); ++i) w[i] = static_cast<T>(inv[i]);
    return conv2d_same(y, Tensor<T>({channels_, channels_, 1, 1}, std::move(w)), Tensor<T>());
}

template <typename T>
double InvConv1x1<T>::log_det(std::size_t height, std::size_t width) const
{
    return static_cast<double>(height * width) * lu_decompose(weight_matrix(), channels_).log_abs_determinant();
}

// --------------------------------------------------------- AffineCoupling

template <typename T>
AffineCoupling<T>::AffineCoupling(std::size_t channels, std::size_t hidden, std::mt19937_64& rng)
    : channels_(channels), hidden_(hidden)
{
    if (channels < 2 || channels % 2) {
        throw ShapeError("affine coupling needs an even channel count, got " + std::to_string(channels));
    }
    if (hidden == 0) throw Error("affine coupling hidden width must be positive");
    const std::size_t half = channels / 2;
    // LeCun-uniform: variance 1/fan_in, suited to tanh.
    w1_ = uniform_tensor<T>({hidden, half, 3, 3}, std::sqrt(3.0 / static_cast<double>(half * 9)), rng, true);
    b1_ = Tensor<T>::zeros({hidden}, true);
    w2_ = uniform_tensor<T>({hidden, hidden, 3, 3}, std::sqrt(3.0 / static_cast<double>(hidden * 9)), rng, true);
    b2_ = Tensor<T>::zeros({hidden}, true);
    w3_ = Tensor<T>::zeros({channels, hidden, 3, 3}, true);
    b3_ = Tensor<T>::zeros({channels}, true);
}

template <typename T>
void AffineCoupling<T>::check_input(const Tensor<T>& x) const
{
    check_channels(x, channels_, "AffineCoupling");
}

template <typename T>
typename AffineCoupling<T>::ScaleShift AffineCoupling<T>::scale_shift(const Tensor<T>& passive) const
{
    const std::size_t half = channels_ / 2;
    auto h = tanh(conv2d_same(passive, w1_, b1_));
    h = tanh(conv2d_same(h, w2_, b2_));
    auto out = conv2d_same(h, w3_, b3_);
    auto scale = sigmoid(add_scalar(narrow_channels(out, 0, half), static_cast<T>(kCouplingScaleOffset)));
    return {scale, narrow_channels(out, half, half)};
}

template <typename T>
Tensor<T> AffineCoupling<T>::forward(const Tensor<T>& x) const
{
    check_input(x);
    const std::size_t half = channels_ / 2;
    auto xa = narrow_channels(x, 0, half);
    auto xb = narrow_channels(x, half, half);
    auto [s, t] = scale_shift(xa);
    return concat_channels(xa, add(mul(s, xb), t));
}

template <typename T>
Tensor<T> AffineCoupling<T>::inverse(const Tensor<T>& y) const
{
    check_input(y);
    const std::size_t half = channels_ / 2;
    auto ya = narrow_channels(y, 0, half);
    auto yb = narrow_channels(y, half, half);
    auto [s, t] = scale_shift(ya);
    return concat_channels(ya, div(sub(yb, t), s));
}

template <typename T>
double AffineCoupling<T>::log_det(const Tensor<T>& x) const
{
    check_input(x);
    NoGradGuard no_grad;
    auto s = scale_shift(narrow_channels(x, 0, channels_ / 2)).scale;
    double acc = 0.0;
    for (T v : s.data()) acc += std::log(static_cast<double>(v));
    return acc / static_cast<double>(x.dim(0));
}

// --------------------------------------------------------------- FlowStep

template <typename T>
std::vector<Tensor<T>> FlowStep<T>::parameters() const
{
    auto out = actnorm.parameters();
    for (auto& p : conv.parameters()) out.push_back(p);
    for (auto& p : coupling.parameters()) out.push_back(p);
    return out;
}

std::size_t flow_step_param_count(std::size_t channels, std::size_t hidden)
{
    const std::size_t c = channels, h = hidden, half = channels / 2;
    const std::size_t actnorm = 2 * c;
    const std::size_t conv1x1 = c * c;
    const std::size_t coupling = (9 * half * h + h) + (9 * h * h + h) + (9 * h * c + c);
    return actnorm + conv1x1 + coupling;
}

template class ActNorm<float>;
template class ActNorm<double>;
template class InvConv1x1<float>;
template class InvConv1x1<double>;
template class AffineCoupling<float>;
template class AffineCoupling<double>;
template struct FlowStep<float>;
template struct FlowStep<double>;

}  // namespace irae
