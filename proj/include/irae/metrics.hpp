#pragma once

#include <span>
#include <string>
#include <vector>

#include "irae/image.hpp"

namespace irae {

// Returned by psnr() when the images are identical.
inline constexpr double kPsnrCapDb = 100.0;

// MSE pooled over every channel and pixel.
double mse(const Image& a, const Image& b);
// 10 log10(max^2 / mse); kPsnrCapDb when mse is 0.
double psnr_from_mse(double mse_value, double max_value = 1.0);
double psnr(const Image& estimate, const Image& reference, double max_value = 1.0);

// Mean local SSIM: 11x11 Gaussian window (sigma 1.5) over the valid region,
// K1 = 0.01, K2 = 0.03, dynamic range 1. Multi-channel images average the
// per-channel scores.
double ssim(const Image& estimate, const Image& reference);
double ssim_plane(std::span<const double> a, std::span<const double> b, std::size_t height, std::size_t width);

struct MetricReport {
    std::vector<std::string> names;
    std::vector<double> psnr_db;
    std::vector<double> ssim;

    void add(std::string name, double psnr_value, double ssim_value);
    std::size_t size() const { return names.size(); }
    double mean_psnr() const;
    double mean_ssim() const;
    // Header row "image<d>psnr_db<d>ssim", one row per image, then a "mean" row.
    std::string to_table(char delimiter = ',') const;
};

}  // namespace irae
