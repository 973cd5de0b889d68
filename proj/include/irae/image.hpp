#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "irae/tensor.hpp"

namespace irae {

// Planar (CHW) image with real values, nominally in [0,1].
struct Image {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> data;

    Image() = default;
    Image(std::size_t c, std::size_t h, std::size_t w, double fill = 0.0)
        : channels(c), height(h), width(w), data(c * h * w, fill)
    {
    }

    std::size_t plane_size() const { return height * width; }
    std::size_t size() const { return data.size(); }
    double& at(std::size_t c, std::size_t y, std::size_t x) { return data[(c * height + y) * width + x]; }
    double at(std::size_t c, std::size_t y, std::size_t x) const { return data[(c * height + y) * width + x]; }
    std::span<const double> plane(std::size_t c) const { return {data.data() + c * plane_size(), plane_size()}; }
    bool same_shape(const Image& o) const { return channels == o.channels && height == o.height && width == o.width; }

    bool operator==(const Image&) const = default;
};

Image clipped(const Image& image);

// Stack equally shaped images into an [N,C,H,W] tensor.
template <typename T>
Tensor<T> to_batch(std::span<const Image> images);

template <typename T>
std::vector<Image> from_batch(const Tensor<T>& batch);

/// Binary PGM (P5, one channel) or PPM (P6, three channels), maxval 255.
/// Samples map to value / 255.
Image decode_pnm(std::span<const unsigned char> bytes);
// Clips to [0,1] and rounds to the nearest 8-bit level.
std::vector<unsigned char> encode_pnm(const Image& image);

Image load_image(const std::filesystem::path& path);
void save_image(const Image& image, const std::filesystem::path& path);

// Sorted list of *.pgm / *.ppm files in a directory.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

}  // namespace irae
