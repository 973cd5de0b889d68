#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "irae/flow.hpp"
#include "irae/tensor.hpp"

namespace irae {

enum class Precision : std::uint8_t { f32 = 0, f64 = 1 };

std::string to_string(Precision p);
Precision parse_precision(const std::string& text);

struct IraeConfig {
    std::size_t flow_steps = 16;  // K
    std::size_t levels = 2;       // L
    std::size_t hidden_width = 64;
    std::size_t in_channels = 1;
    Precision precision = Precision::f32;
    std::uint64_t seed = 0;

    // Throws naming the first violated constraint.
    void validate() const;
    // Throws unless `shape` is [N, in_channels, H, W] with H, W divisible by 2^L.
    void validate_input(const Shape& shape) const;

    bool operator==(const IraeConfig&) const = default;
};

/// Closed-form parameter count.
///
/// One flow step on c channels with hidden width h holds
///   2c (ActNorm) + c^2 (1x1 conv) + 9(c/2)h + h + 9h^2 + h + 9hc + c (coupling net).
/// Level l (1-based) runs K steps on c = 4^l * C channels, and the decoder
/// mirrors the encoder with its own parameters, so the total is
///   2K * sum_{l=1..L} step(4^l * C, h).
std::size_t param_count(const IraeConfig& config);

struct WidthSearchResult {
    std::size_t hidden_width;
    std::size_t count;
    double relative_error;
};

// Hidden width in [1, max_width] whose count is closest to `target`.
WidthSearchResult search_hidden_width(IraeConfig config, std::size_t target, std::size_t max_width = 1024);

/// Symmetric invertible encoder-decoder.
///
/// Encoder level l: squeeze, then K flow steps. Decoder level l mirrors it
/// with fresh parameters: K flow steps, then unsqueeze. Output shape equals
/// input shape.
template <typename T>
class IraeModel {
public:
    using Level = std::vector<FlowStep<T>>;

    explicit IraeModel(IraeConfig config);

    const IraeConfig& config() const { return config_; }
    const std::vector<Level>& encoder() const { return encoder_; }
    const std::vector<Level>& decoder() const { return decoder_; }
    std::vector<Level>& encoder() { return encoder_; }
    std::vector<Level>& decoder() { return decoder_; }

    // Data-dependent ActNorm initialization of every uninitialized layer,
    // in network order: decoder layers see the encoder's output of `batch`.
    ActNormInitReport initialize(const Tensor<T>& batch);
    bool initialized() const;
    void mark_initialized();

    Tensor<T> forward(const Tensor<T>& y) const;
    // Decoder inverted first, then encoder. Propagates SingularWeightError.
    Tensor<T> inverse(const Tensor<T>& x) const;
    // Sum of every layer's log-det diagnostic for input `y`.
    double log_det(const Tensor<T>& y) const;

    // Fixed traversal order: encoder levels, then decoder levels; within a
    // step ActNorm (scale, bias), 1x1 weight, coupling (w1, b1, w2, b2, w3, b3).
    std::vector<Tensor<T>> parameters() const;
    std::size_t param_count() const;

    std::vector<std::vector<T>> snapshot() const;
    void restore(const std::vector<std::vector<T>>& values);

private:
    template <typename F>
    void for_each_step(F&& f) const;

    IraeConfig config_;
    std::vector<Level> encoder_;
    std::vector<Level> decoder_;
};

// Raw coupling bias that drives sigmoid(raw + 2) to exactly 1 in both precisions.
inline constexpr double kSaturatedScaleBias = 40.0;

// ActNorm s=1/b=0, W=I, coupling shift 0 and scale exactly 1: the model
// reduces to a composition of squeeze permutations.
template <typename T>
void set_identity_parameters(IraeModel<T>& model);

// Generic valid parameters for invertibility checks: log-uniform ActNorm
// scales in exp(+-magnitude), biases in +-magnitude, fresh random orthogonal
// 1x1 weights, LeCun-uniform hidden coupling weights, and a last coupling
// layer at `magnitude` times that bound. Marks ActNorms initialized.
template <typename T>
void randomize_parameters(IraeModel<T>& model, std::uint64_t seed, double magnitude = 0.1);

extern template class IraeModel<float>;
extern template class IraeModel<double>;

}  // namespace irae
