#pragma once

#include <cstdint>
#include <vector>

#include "irae/image.hpp"

namespace irae {

// Smooth test images with natural-image-like structure: a gentle linear
// gradient, a few Gaussian blobs and one sharp-edged rectangle, kept
// inside [0.05, 0.95]. Deterministic in `seed`.
std::vector<Image> synthetic_images(std::size_t count, std::size_t channels, std::size_t height, std::size_t width,
                                    std::uint64_t seed);

}  // namespace irae
