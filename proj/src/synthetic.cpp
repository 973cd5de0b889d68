#include "irae/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace irae {

std::vector<Image> synthetic_images(std::size_t count, std::size_t channels, std::size_t height, std::size_t width,
                                    std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Image> out;
    out.reserve(count);
    const double H = static_cast<double>(height), W = static_cast<double>(width);
    for (std::size_t n = 0; n < count; ++n) {
        Image img(channels, height, width);
        const double base = 0.3 + 0.4 * u(rng);
        const double gy = (u(rng) - 0.5) * 0.4, gx = (u(rng) - 0.5) * 0.4;
        struct Blob {
            double cy, cx, sigma, amp;
        };
        std::vector<Blob> blobs(3);
        for (auto& b : blobs) b = {u(rng) * H, u(rng) * W, (0.1 + 0.25 * u(rng)) * std::min(H, W), (u(rng) - 0.5) * 0.6};
        const std::size_t y0 = static_cast<std::size_t>(u(rng) * H * 0.6);
        const std::size_t x0 = static_cast<std::size_t>(u(rng) * W * 0.6);
        const std::size_t y1 = std::min(height, y0 + 2 + static_cast<std::size_t>(u(rng) * H * 0.5));
        const std::size_t x1 = std::min(width, x0 + 2 + static_cast<std::size_t>(u(rng) * W * 0.5));
        const double rect_amp = (u(rng) - 0.5) * 0.4;
        std::vector<double> tint(channels);
        for (auto& t : tint) t = channels == 1 ? 0.0 : (u(rng) - 0.5) * 0.2;

        for (std::size_t c = 0; c < channels; ++c)
            for (std::size_t y = 0; y < height; ++y)
                for (std::size_t x = 0; x < width; ++x) {
                    const double fy = static_cast<double>(y) / H - 0.5, fx = static_cast<double>(x) / W - 0.5;
                    double v = base + tint[c] + gy * fy + gx * fx;
                    for (const auto& b : blobs) {
                        const double dy = static_cast<double>(y) - b.cy, dx = static_cast<double>(x) - b.cx;
                        v += b.amp * std::exp(-(dy * dy + dx * dx) / (2 * b.sigma * b.sigma));
                    }
                    if (y >= y0 && y < y1 && x >= x0 && x < x1) v += rect_amp;
                    img.at(c, y, x) = std::clamp(v, 0.05, 0.95);
                }
        out.push_back(std::move(img));
    }
    return out;
}

}  // namespace irae
