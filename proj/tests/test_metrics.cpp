#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "irae/error.hpp"
#include "irae/metrics.hpp"

using namespace irae;

namespace {

Image random_image(std::size_t c, std::size_t h, std::size_t w, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Image img(c, h, w);
    for (auto& v : img.data) v = u(rng);
    return img;
}

// Direct 2-D windowed SSIM, one plane, no separable filtering.
double ssim_oracle(const Image& a, const Image& b)
{
    double g[11][11];
    double total = 0.0;
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
            g[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
            total += g[i][j];
        }
    const double c1 = 0.0001, c2 = 0.0009;
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t y = 0; y + 11 <= a.height; ++y)
        for (std::size_t x = 0; x + 11 <= a.width; ++x) {
            double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
            for (std::size_t i = 0; i < 11; ++i)
                for (std::size_t j = 0; j < 11; ++j) {
                    const double w = g[i][j] / total;
                    const double va = a.at(0, y + i, x + j), vb = b.at(0, y + i, x + j);
                    ma += w * va;
                    mb += w * vb;
                    saa += w * va * va;
                    sbb += w * vb * vb;
                    sab += w * va * vb;
                }
            const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
            acc += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            ++count;
        }
    return acc / static_cast<double>(count);
}

}  // namespace

TEST_CASE("psnr examples")
{
    CHECK(psnr_from_mse(0.01) == 20.0);
    CHECK(psnr_from_mse(0.0) == kPsnrCapDb);
    CHECK(psnr_from_mse(0.04, 2.0) == 20.0);

    const auto x = random_image(1, 8, 8, 1);
    CHECK(psnr(x, x) == 100.0);

    Image zero(1, 4, 4, 0.0), tenth(1, 4, 4, 0.1);
    CHECK(psnr(tenth, zero) == doctest::Approx(20.0).epsilon(1e-12));
    auto shifted = x;
    for (auto& v : shifted.data) v += 0.1;
    CHECK(psnr(shifted, x) == doctest::Approx(20.0).epsilon(1e-12));

    CHECK_THROWS_AS(psnr(x, random_image(1, 8, 9, 1)), ShapeError);
    CHECK_THROWS_AS(psnr(x, x, 0.0), Error);
}

TEST_CASE("psnr properties")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto a = random_image(3, 8, 8, seed);
        const auto b = random_image(3, 8, 8, seed + 100);
        CHECK(psnr(a, b) == psnr(b, a));
        auto a2 = a, b2 = b;
        for (auto& v : a2.data) v += 0.25;
        for (auto& v : b2.data) v += 0.25;
        CHECK(psnr(a2, b2) == doctest::Approx(psnr(a, b)).epsilon(1e-9));
    }
    double previous = 1e9;
    for (double m = 1e-6; m < 1.0; m *= 1.7) {
        const double p = psnr_from_mse(m);
        CHECK(p < previous);
        previous = p;
    }
    // Channels are pooled into one MSE.
    Image a(2, 2, 2, 0.0), b(2, 2, 2, 0.0);
    for (std::size_t i = 0; i < 4; ++i) b.data[i] = 0.2;
    CHECK(mse(a, b) == doctest::Approx(0.02));
}

TEST_CASE("ssim examples")
{
    const auto x = random_image(1, 16, 16, 2);
    CHECK(std::abs(ssim(x, x) - 1.0) < 1e-9);

    Image board(1, 16, 16), inverted(1, 16, 16);
    for (std::size_t i = 0; i < 16; ++i)
        for (std::size_t j = 0; j < 16; ++j) {
            board.at(0, i, j) = static_cast<double>((i + j) % 2);
            inverted.at(0, i, j) = 1.0 - board.at(0, i, j);
        }
    CHECK(ssim(board, inverted) < 0.0);

    for (auto [v, w] : {std::pair{0.2, 0.7}, {0.5, 0.5}, {0.0, 1.0}, {0.9, 0.1}}) {
        const Image a(1, 12, 12, v), b(1, 12, 12, w);
        const double expected = (2 * v * w + 1e-4) / (v * v + w * w + 1e-4);
        CHECK(ssim(a, b) == doctest::Approx(expected).epsilon(1e-12));
    }

    CHECK_THROWS_AS(ssim(random_image(1, 10, 16, 3), random_image(1, 10, 16, 4)), Error);
    CHECK_THROWS_AS(ssim(random_image(1, 16, 16, 3), random_image(1, 16, 12, 4)), ShapeError);
}

TEST_CASE("ssim against a direct windowed oracle")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto a = random_image(1, 13 + seed % 5, 11 + seed % 7, seed);
        auto b = a;
        std::mt19937_64 rng(seed + 50);
        std::normal_distribution<double> n(0.0, 0.1 * static_cast<double>(seed % 4));
        for (auto& v : b.data) v += n(rng);
        CHECK(ssim(a, b) == doctest::Approx(ssim_oracle(a, b)).epsilon(1e-10));
    }
}

TEST_CASE("ssim properties")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto a = random_image(3, 16, 16, seed);
        const auto b = random_image(3, 16, 16, seed + 7);
        const double s = ssim(a, b);
        CHECK(s == doctest::Approx(ssim(b, a)).epsilon(1e-12));
        CHECK(std::abs(s) <= 1.0);
        // RGB averages per-channel scores.
        double acc = 0.0;
        for (std::size_t c = 0; c < 3; ++c) acc += ssim_plane(a.plane(c), b.plane(c), 16, 16);
        CHECK(s == doctest::Approx(acc / 3.0).epsilon(1e-12));
    }
}

TEST_CASE("metric report")
{
    MetricReport r;
    r.add("a.pgm", 30.0, 0.9);
    r.add("b.pgm", 20.0, 0.7);
    CHECK(r.mean_psnr() == 25.0);
    CHECK(r.mean_ssim() == doctest::Approx(0.8));
    const auto table = r.to_table(',');
    std::istringstream in(table);
    std::string line;
    std::getline(in, line);
    CHECK(line == "image,psnr_db,ssim");
    std::getline(in, line);
    CHECK(line.rfind("a.pgm,", 0) == 0);
    std::getline(in, line);
    std::getline(in, line);
    CHECK(line.rfind("mean,", 0) == 0);
    CHECK(r.to_table('\t').find("image\tpsnr_db\tssim") == 0);
}
