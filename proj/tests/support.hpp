#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "irae/tensor.hpp"

namespace testing {

template <typename T>
irae::Tensor<T> random_tensor(const irae::Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0,
                              bool requires_grad = false)
{
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<T> v(irae::shape_numel(shape));
    for (auto& x : v) x = static_cast<T>(u(rng));
    return irae::Tensor<T>(shape, std::move(v), requires_grad);
}

// Fixed random projection loss sum(w * t), so no gradient is trivially 1.
inline std::vector<double> projection_weights(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> w(n);
    for (auto& x : w) x = u(rng);
    return w;
}

// Nested-loop zero-padded cross-correlation on raw arrays.
inline std::vector<double> direct_conv(const std::vector<double>& x, std::size_t n, std::size_t cin, std::size_t h,
                                       std::size_t w, const std::vector<double>& k, std::size_t cout,
                                       std::size_t ks, const std::vector<double>& bias)
{
    const long pad = static_cast<long>(ks / 2);
    std::vector<double> out(n * cout * h * w, 0.0);
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t o = 0; o < cout; ++o)
            for (std::size_t i = 0; i < h; ++i)
                for (std::size_t j = 0; j < w; ++j) {
                    double acc = bias.empty() ? 0.0 : bias[o];
                    for (std::size_t c = 0; c < cin; ++c)
                        for (std::size_t di = 0; di < ks; ++di)
                            for (std::size_t dj = 0; dj < ks; ++dj) {
                                const long yi = static_cast<long>(i) + static_cast<long>(di) - pad;
                                const long xj = static_cast<long>(j) + static_cast<long>(dj) - pad;
                                if (yi < 0 || xj < 0 || yi >= static_cast<long>(h) || xj >= static_cast<long>(w))
                                    continue;
                                acc += k[((o * cin + c) * ks + di) * ks + dj] *
                                       x[((b * cin + c) * h + static_cast<std::size_t>(yi)) * w +
                                         static_cast<std::size_t>(xj)];
                            }
                    out[((b * cout + o) * h + i) * w + j] = acc;
                }
    return out;
}

template <typename A, typename B>
double max_abs_diff(const A& a, const B& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
    return m;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("irae_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing
