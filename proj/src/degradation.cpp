#include "irae/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace irae {

std::string to_string(DegradationKind kind)
{
    switch (kind) {
    case DegradationKind::awgn: return "awgn";
    case DegradationKind::blind_awgn: return "blind_awgn";
    case DegradationKind::jpeg: return "jpeg";
    case DegradationKind::inpaint: return "inpaint";
    }
    return "?";
}

DegradationKind parse_degradation_kind(const std::string& text)
{
    if (text == "awgn") return DegradationKind::awgn;
    if (text == "blind_awgn") return DegradationKind::blind_awgn;
    if (text == "jpeg") return DegradationKind::jpeg;
    if (text == "inpaint") return DegradationKind::inpaint;
    throw Error("unknown degradation '" + text + "' (expected awgn, blind_awgn, jpeg or inpaint)");
}

std::string to_string(MaskPlacement placement)
{
    return placement == MaskPlacement::within_center ? "within_center" : "anchor_in_center";
}

MaskPlacement parse_mask_placement(const std::string& text)
{
    if (text == "anchor_in_center") return MaskPlacement::anchor_in_center;
    if (text == "within_center") return MaskPlacement::within_center;
    throw Error("unknown mask placement '" + text + "' (expected anchor_in_center or within_center)");
}

void DegradationSpec::validate() const
{
    if (!(sigma >= 0.0)) throw Error("noise sigma must be >= 0");
    if (!(sigma_lo >= 0.0) || !(sigma_lo <= sigma_hi)) throw Error("blind noise range needs 0 <= lo <= hi");
    if (quality < 1 || quality > 100) throw Error("JPEG quality factor must be in 1..100, got " + std::to_string(quality));
    if (mask_height == 0 || mask_width == 0) throw Error("inpainting mask must be non-empty");
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Image apply_awgn(const Image& x, double sigma, std::mt19937_64& rng)
{
    if (!(sigma >= 0.0)) throw Error("noise sigma must be >= 0");
    Image y = x;
    if (sigma == 0.0) return y;
    std::normal_distribution<double> noise(0.0, sigma / 255.0);
    for (auto& v : y.data) v += noise(rng);
    return y;
}

BlindNoiseResult apply_blind_awgn(const Image& x, double lo, double hi, std::mt19937_64& rng)
{
    if (!(lo >= 0.0) || !(lo <= hi)) throw Error("blind noise range needs 0 <= lo <= hi");
    double sigma = lo;
    if (hi > lo) sigma = std::uniform_real_distribution<double>(lo, hi)(rng);
    return {apply_awgn(x, sigma, rng), sigma};
}

namespace {

constexpr std::array<int, 64> kLuminanceTable = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99,
};

struct DctBasis {
    // basis[u][x] = c(u)/2 * cos((2x+1) u pi / 16)
    double basis[8][8];
    DctBasis()
    {
        for (int u = 0; u < 8; ++u) {
            const double cu = u == 0 ? std::numbers::sqrt2 / 2.0 : 1.0;
            for (int x = 0; x < 8; ++x) basis[u][x] = 0.5 * cu * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
        }
    }
};

const DctBasis& dct_basis()
{
    static const DctBasis b;
    return b;
}

void fdct8x8(const double in[64], double out[64])
{
    const auto& B = dct_basis().basis;
    double tmp[64];
    for (int y = 0; y < 8; ++y)
        for (int u = 0; u < 8; ++u) {
            double acc = 0;
            for (int x = 0; x < 8; ++x) acc += B[u][x] * in[y * 8 + x];
            tmp[y * 8 + u] = acc;
        }
    for (int v = 0; v < 8; ++v)
        for (int u = 0; u < 8; ++u) {
            double acc = 0;
            for (int y = 0; y < 8; ++y) acc += B[v][y] * tmp[y * 8 + u];
            out[v * 8 + u] = acc;
        }
}

void idct8x8(const double in[64], double out[64])
{
    const auto& B = dct_basis().basis;
    double tmp[64];
    for (int v = 0; v < 8; ++v)
        for (int x = 0; x < 8; ++x) {
            double acc = 0;
            for (int u = 0; u < 8; ++u) acc += B[u][x] * in[v * 8 + u];
            tmp[v * 8 + x] = acc;
        }
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            double acc = 0;
            for (int v = 0; v < 8; ++v) acc += B[v][y] * tmp[v * 8 + x];
            out[y * 8 + x] = acc;
        }
}

}  // namespace

std::array<int, 64> jpeg_quant_table(int quality)
{
    if (quality < 1 || quality > 100) {
        throw Error("JPEG quality factor must be in 1..100, got " + std::to_string(quality));
    }
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    std::array<int, 64> table{};
    for (std::size_t i = 0; i < 64; ++i) table[i] = std::clamp((kLuminanceTable[i] * scale + 50) / 100, 1, 255);
    return table;
}

Image apply_jpeg_sim(const Image& x, int quality)
{
    const auto table = jpeg_quant_table(quality);
    const std::size_t H = x.height, W = x.width;
    const std::size_t PH = (H + 7) / 8 * 8, PW = (W + 7) / 8 * 8;
    Image y(x.channels, H, W);
    double block[64], coef[64], rec[64];
    for (std::size_t c = 0; c < x.channels; ++c) {
        for (std::size_t by = 0; by < PH; by += 8)
            for (std::size_t bx = 0; bx < PW; bx += 8) {
                for (std::size_t i = 0; i < 8; ++i)
                    for (std::size_t j = 0; j < 8; ++j) {
                        const std::size_t sy = std::min(by + i, H - 1);
                        const std::size_t sx = std::min(bx + j, W - 1);
                        block[i * 8 + j] = x.at(c, sy, sx) * 255.0 - 128.0;
                    }
                fdct8x8(block, coef);
                for (int k = 0; k < 64; ++k) coef[k] = std::nearbyint(coef[k] / table[k]) * table[k];
                idct8x8(coef, rec);
                for (std::size_t i = 0; i < 8 && by + i < H; ++i)
                    for (std::size_t j = 0; j < 8 && bx + j < W; ++j) {
                        y.at(c, by + i, bx + j) = std::clamp((rec[i * 8 + j] + 128.0) / 255.0, 0.0, 1.0);
                    }
            }
    }
    return y;
}

InpaintMask make_inpaint_mask(std::size_t height, std::size_t width, std::size_t mask_height, std::size_t mask_width,
                              std::mt19937_64& rng, MaskPlacement placement)
{
    const std::size_t center_h = height / 2, center_w = width / 2;
    if (mask_height == 0 || mask_width == 0) throw Error("inpainting mask must be non-empty");
    if (mask_height > center_h || mask_width > center_w) {
        throw Error("inpainting mask " + std::to_string(mask_height) + "x" + std::to_string(mask_width) +
                    " is larger than the central region " + std::to_string(center_h) + "x" + std::to_string(center_w));
    }
    auto anchor_range = [&](std::size_t extent, std::size_t center, std::size_t size) {
        const std::size_t lo = extent / 4;
        std::size_t hi = placement == MaskPlacement::within_center ? lo + center - size : lo + center - 1;
        hi = std::min(hi, extent - size);
        return std::pair{lo, hi};
    };
    const auto [top_lo, top_hi] = anchor_range(height, center_h, mask_height);
    const auto [left_lo, left_hi] = anchor_range(width, center_w, mask_width);
    InpaintMask m;
    m.top = std::uniform_int_distribution<std::size_t>(top_lo, top_hi)(rng);
    m.left = std::uniform_int_distribution<std::size_t>(left_lo, left_hi)(rng);
    m.mask = Image(1, height, width);
    for (std::size_t y = 0; y < mask_height; ++y)
        for (std::size_t x = 0; x < mask_width; ++x) m.mask.at(0, m.top + y, m.left + x) = 1.0;
    return m;
}

Image apply_mask(const Image& x, const InpaintMask& mask)
{
    if (mask.mask.height != x.height || mask.mask.width != x.width) throw ShapeError("mask and image sizes differ");
    Image y = x;
    for (std::size_t c = 0; c < x.channels; ++c)
        for (std::size_t i = 0; i < x.plane_size(); ++i) {
            if (mask.mask.data[i] != 0.0) y.data[c * x.plane_size() + i] = 0.0;
        }
    return y;
}

Degraded degrade(const Image& x, const DegradationSpec& spec, std::uint64_t stream)
{
    spec.validate();
    std::mt19937_64 rng(mix_seed(spec.seed, stream));
    Degraded out;
    switch (spec.kind) {
    case DegradationKind::awgn:
        out.image = apply_awgn(x, spec.sigma, rng);
        out.sigma = spec.sigma;
        break;
    case DegradationKind::blind_awgn: {
        auto r = apply_blind_awgn(x, spec.sigma_lo, spec.sigma_hi, rng);
        out.image = std::move(r.image);
        out.sigma = r.sigma;
        break;
    }
    case DegradationKind::jpeg:
        out.image = apply_jpeg_sim(x, spec.quality);
        break;
    case DegradationKind::inpaint:
        out.mask = make_inpaint_mask(x.height, x.width, spec.mask_height, spec.mask_width, rng, spec.placement);
        out.image = apply_mask(x, out.mask);
        break;
    }
    return out;
}

}  // namespace irae
