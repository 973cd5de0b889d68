#include "irae/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace irae {

double mse(const Image& a, const Image& b)
{
    if (!a.same_shape(b)) throw ShapeError("metric inputs differ in shape");
    if (a.data.empty()) throw Error("metric inputs are empty");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

double psnr_from_mse(double mse_value, double max_value)
{
    if (!(max_value > 0.0)) throw Error("psnr: max_value must be positive");
    if (!(mse_value >= 0.0)) throw Error("psnr: mse must be non-negative");
    if (mse_value == 0.0) return kPsnrCapDb;
    return 10.0 * std::log10(max_value * max_value / mse_value);
}

double psnr(const Image& estimate, const Image& reference, double max_value)
{
    if (!(max_value > 0.0)) throw Error("psnr: max_value must be positive");
    return psnr_from_mse(mse(estimate, reference), max_value);
}

namespace {

constexpr std::size_t kWindow = 11;

const std::array<double, kWindow>& gaussian_taps()
{
    static const std::array<double, kWindow> taps = [] {
        std::array<double, kWindow> t{};
        double total = 0.0;
        for (std::size_t i = 0; i < kWindow; ++i) {
            const double d = static_cast<double>(i) - 5.0;
            t[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
            total += t[i];
        }
        for (auto& v : t) v /= total;
        return t;
    }();
    return taps;
}

}  // namespace

double ssim_plane(std::span<const double> a, std::span<const double> b, std::size_t height, std::size_t width)
{
    if (a.size() != height * width || b.size() != height * width) throw ShapeError("ssim: plane size mismatch");
    if (height < kWindow || width < kWindow) {
        throw Error("ssim needs at least 11x11 pixels, got " + std::to_string(height) + "x" + std::to_string(width));
    }
    constexpr double C1 = (0.01 * 1.0) * (0.01 * 1.0);
    constexpr double C2 = (0.03 * 1.0) * (0.03 * 1.0);
    const auto& g = gaussian_taps();
    const std::size_t oh = height - kWindow + 1, ow = width - kWindow + 1;
    double total = 0.0;
    for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
            for (std::size_t i = 0; i < kWindow; ++i)
                for (std::size_t j = 0; j < kWindow; ++j) {
                    const double w = g[i] * g[j];
                    const double va = a[(y + i) * width + x + j];
                    const double vb = b[(y + i) * width + x + j];
                    ma += w * va;
                    mb += w * vb;
                    saa += w * va * va;
                    sbb += w * vb * vb;
                    sab += w * va * vb;
                }
            const double var_a = saa - ma * ma;
            const double var_b = sbb - mb * mb;
            const double cov = sab - ma * mb;
            total += ((2 * ma * mb + C1) * (2 * cov + C2)) / ((ma * ma + mb * mb + C1) * (var_a + var_b + C2));
        }
    return total / static_cast<double>(oh * ow);
}

double ssim(const Image& estimate, const Image& reference)
{
    if (!estimate.same_shape(reference)) throw ShapeError("metric inputs differ in shape");
    double acc = 0.0;
    for (std::size_t c = 0; c < estimate.channels; ++c) {
        acc += ssim_plane(estimate.plane(c), reference.plane(c), estimate.height, estimate.width);
    }
    return acc / static_cast<double>(estimate.channels);
}

void MetricReport::add(std::string name, double psnr_value, double ssim_value)
{
    names.push_back(std::move(name));
    psnr_db.push_back(psnr_value);
    ssim.push_back(ssim_value);
}

double MetricReport::mean_psnr() const
{
    if (psnr_db.empty()) return 0.0;
    return std::accumulate(psnr_db.begin(), psnr_db.end(), 0.0) / static_cast<double>(psnr_db.size());
}

double MetricReport::mean_ssim() const
{
    if (ssim.empty()) return 0.0;
    return std::accumulate(ssim.begin(), ssim.end(), 0.0) / static_cast<double>(ssim.size());
}

std::string MetricReport::to_table(char delimiter) const
{
    auto row = [delimiter](const std::string& name, double p, double s) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%c%.4f%c%.6f\n", delimiter, p, delimiter, s);
        return name + buf;
    };
    std::string out = std::string("image") + delimiter + "psnr_db" + delimiter + "ssim\n";
    for (std::size_t i = 0; i < names.size(); ++i) out += row(names[i], psnr_db[i], ssim[i]);
    out += row("mean", mean_psnr(), mean_ssim());
    return out;
}

}  // namespace irae
