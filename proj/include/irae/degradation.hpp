#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>

#include "irae/image.hpp"

namespace irae {

enum class DegradationKind { awgn, blind_awgn, jpeg, inpaint };

std::string to_string(DegradationKind kind);
DegradationKind parse_degradation_kind(const std::string& text);

// Where an inpainting hole may sit.
enum class MaskPlacement {
    // Top-left corner drawn from the central H/2 x W/2 window, clipped so
    // the hole stays inside the image.
    anchor_in_center,
    // The whole hole lies inside the central H/2 x W/2 window.
    within_center,
};

std::string to_string(MaskPlacement placement);
MaskPlacement parse_mask_placement(const std::string& text);

/// Degradation y = A * x + n for one restoration task.
///
/// Noise levels use the 0-255 convention and are applied as sigma/255 to
/// images in [0,1].
struct DegradationSpec {
    DegradationKind kind = DegradationKind::awgn;
    double sigma = 25.0;
    double sigma_lo = 0.0;
    double sigma_hi = 55.0;
    int quality = 40;
    std::size_t mask_height = 16;
    std::size_t mask_width = 16;
    MaskPlacement placement = MaskPlacement::anchor_in_center;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const DegradationSpec&) const = default;
};

// SplitMix64 finalizer over a combined key; gives independent rng streams
// per (seed, epoch, image) so that results do not depend on visit order.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// Unclipped y = x + n, n ~ N(0, (sigma/255)^2).
Image apply_awgn(const Image& x, double sigma, std::mt19937_64& rng);

struct BlindNoiseResult {
    Image image;
    double sigma;
};
BlindNoiseResult apply_blind_awgn(const Image& x, double lo, double hi, std::mt19937_64& rng);

// Standard JPEG luminance table scaled for `quality` with the IJG rule.
std::array<int, 64> jpeg_quant_table(int quality);
// Per-channel 8x8 DCT quantization round trip, clamped to [0,1].
Image apply_jpeg_sim(const Image& x, int quality);

struct InpaintMask {
    Image mask;  // one channel, 1 inside the hole
    std::size_t top = 0;
    std::size_t left = 0;
};
InpaintMask make_inpaint_mask(std::size_t height, std::size_t width, std::size_t mask_height, std::size_t mask_width,
                              std::mt19937_64& rng, MaskPlacement placement = MaskPlacement::anchor_in_center);
// y = x * (1 - mask) on every channel.
Image apply_mask(const Image& x, const InpaintMask& mask);

struct Degraded {
    Image image;
    double sigma = 0.0;  // noise level actually used (AWGN kinds)
    InpaintMask mask;    // inpainting only
};

// Deterministic in (spec, stream).
Degraded degrade(const Image& x, const DegradationSpec& spec, std::uint64_t stream);

}  // namespace irae
