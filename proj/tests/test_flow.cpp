#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "irae/error.hpp"
#include "irae/flow.hpp"
#include "irae/gradcheck.hpp"
#include "irae/linalg.hpp"
#include "irae/ops.hpp"
#include "support.hpp"

using namespace irae;
using T64 = Tensor<double>;

namespace {

void fill_uniform(Tensor<double> t, std::mt19937_64& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    for (auto& v : t.mutable_data()) v = u(rng);
}

ActNorm<double> random_actnorm(std::size_t c, std::mt19937_64& rng)
{
    ActNorm<double> an(c);
    std::uniform_real_distribution<double> mag(0.3, 2.0), sign(-1.0, 1.0), bias(-1.0, 1.0);
    std::vector<double> s(c), b(c);
    for (std::size_t i = 0; i < c; ++i) {
        s[i] = mag(rng) * (sign(rng) < 0 ? -1.0 : 1.0);
        b[i] = bias(rng);
    }
    an.set(s, b);
    return an;
}

// Every coupling parameter random, including the last layer, so that the
// scale and shift genuinely depend on the input.
AffineCoupling<double> random_coupling(std::size_t c, std::size_t h, std::mt19937_64& rng)
{
    AffineCoupling<double> cp(c, h, rng);
    for (auto& p : cp.parameters()) fill_uniform(p, rng, -0.3, 0.3);
    return cp;
}

double sigma_of_two() { return 1.0 / (1.0 + std::exp(-2.0)); }

T64 project(const T64& t, std::uint64_t seed)
{
    return sum(mul(t, T64(t.shape(), testing::projection_weights(t.numel(), seed))));
}

}  // namespace

TEST_CASE("actnorm initialization")
{
    SUBCASE("mean 0.3 std 0.2")
    {
        ActNorm<double> an(1);
        const auto report = an.initialize(T64({2, 1, 1, 1}, {0.1, 0.5}));
        CHECK_FALSE(report.clamped());
        CHECK(an.scale().data()[0] == doctest::Approx(5.0).epsilon(1e-12));
        CHECK(an.bias().data()[0] == doctest::Approx(-1.5).epsilon(1e-12));
    }
    SUBCASE("standardized batch")
    {
        ActNorm<double> an(2);
        an.initialize(T64({1, 2, 1, 2}, {-1, 1, 1, -1}));
        for (double s : an.scale().data()) CHECK(s == 1.0);
        for (double b : an.bias().data()) CHECK(b == 0.0);
    }
    SUBCASE("constant channel clamps")
    {
        ActNorm<double> an(2);
        const auto report = an.initialize(T64({1, 2, 1, 2}, {0.7, 0.7, 1.0, 3.0}));
        REQUIRE(report.clamped());
        CHECK(report.clamped_channels == std::vector<std::size_t>{0});
        CHECK(an.scale().data()[0] == doctest::Approx(1e8));
        CHECK(std::isfinite(an.bias().data()[0]));
    }
    SUBCASE("forward of the init batch is standardized")
    {
        std::mt19937_64 rng(1);
        const auto x = testing::random_tensor<double>({4, 3, 5, 5}, rng, -2.0, 7.0);
        ActNorm<double> an(3);
        an.initialize(x);
        const auto y = an.forward(x);
        const auto means = channel_mean(y);
        const auto stds = channel_std(y);
        for (double m : means.data()) CHECK(std::abs(m) < 1e-12);
        for (double s : stds.data()) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("second initialize is rejected")
    {
        ActNorm<double> an(1);
        an.initialize(T64({2, 1, 1, 1}, {0.1, 0.5}));
        CHECK_THROWS_AS(an.initialize(T64({2, 1, 1, 1}, {0.1, 0.5})), Error);
    }
}

TEST_CASE("actnorm forward and inverse")
{
    ActNorm<double> an(1);
    CHECK_THROWS_AS(an.forward(T64({1, 1, 1, 1}, {0.5})), Error);
    CHECK_THROWS_AS(an.inverse(T64({1, 1, 1, 1}, {0.5})), Error);

    const std::vector<double> s{2.0}, b{1.0};
    an.set(s, b);
    CHECK(an.forward(T64({1, 1, 1, 1}, {0.5})).item() == 2.0);
    CHECK(an.inverse(T64({1, 1, 1, 1}, {2.0})).item() == 0.5);

    ActNorm<double> id(2);
    const std::vector<double> ones{1.0, 1.0}, zeros{0.0, 0.0};
    id.set(ones, zeros);
    std::mt19937_64 rng(2);
    const auto x = testing::random_tensor<double>({2, 2, 3, 3}, rng);
    CHECK(testing::max_abs_diff(id.forward(x).data(), x.data()) == 0.0);
    CHECK(id.log_det(3, 3) == 0.0);

    const std::vector<double> tiny{1e-9, 1.0};
    CHECK_THROWS_AS(id.set(tiny, zeros), Error);
}

TEST_CASE("1x1 convolution examples")
{
    std::mt19937_64 rng(3);
    const auto x = testing::random_tensor<double>({2, 2, 3, 4}, rng);

    InvConv1x1<double> eye(2);
    CHECK(testing::max_abs_diff(eye.forward(x).data(), x.data()) == 0.0);

    InvConv1x1<double> swap(2);
    const std::vector<double> p{0, 1, 1, 0};
    swap.set_weight(p);
    const auto y = swap.forward(x);
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 4; ++j) {
                CHECK(y.at({b, 0, i, j}) == x.at({b, 1, i, j}));
                CHECK(y.at({b, 1, i, j}) == x.at({b, 0, i, j}));
            }
    CHECK(testing::max_abs_diff(swap.forward(y).data(), x.data()) == 0.0);
    CHECK(swap.determinant() == doctest::Approx(-1.0));

    InvConv1x1<double> bad(2);
    const std::vector<double> singular{1, 2, 2, 4};
    CHECK_THROWS_AS(bad.set_weight(singular), SingularWeightError);
    // Training may drive W singular; the inverse must refuse.
    auto w = bad.weight();
    std::copy(singular.begin(), singular.end(), w.mutable_data().begin());
    CHECK_THROWS_AS(bad.inverse(x), SingularWeightError);
    CHECK_NOTHROW(bad.forward(x));
}

TEST_CASE("random orthogonal 1x1: round trip and log-det")
{
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t c = 2 + static_cast<std::size_t>(trial % 7);
        InvConv1x1<double> conv(c, rng);
        const auto x = testing::random_tensor<double>({2, c, 3, 3}, rng);
        CHECK(testing::max_abs_diff(conv.inverse(conv.forward(x)).data(), x.data()) < 1e-12);
        CHECK(std::abs(conv.log_det(3, 3)) < 1e-10);

        const auto w = conv.weight().data();
        Eigen::MatrixXd m(c, c);
        for (std::size_t i = 0; i < c; ++i)
            for (std::size_t j = 0; j < c; ++j) m(static_cast<long>(i), static_cast<long>(j)) = w[i * c + j];
        CHECK(conv.determinant() == doctest::Approx(m.determinant()).epsilon(1e-12));
        CHECK(std::abs(std::abs(m.determinant()) - 1.0) < 1e-12);
    }
}

TEST_CASE("LU against an independent determinant")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 8);
        std::vector<double> a(n * n);
        for (auto& v : a) v = u(rng);
        Eigen::MatrixXd m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m(static_cast<long>(i), static_cast<long>(j)) = a[i * n + j];
        const auto lu = lu_decompose(a, n);
        CHECK(lu.determinant() == doctest::Approx(m.determinant()).epsilon(1e-10));
        const auto inv = lu.inverse();
        const Eigen::MatrixXd expected = m.inverse();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                CHECK(inv[i * n + j] == doctest::Approx(expected(static_cast<long>(i), static_cast<long>(j))).epsilon(1e-8));
    }
}

TEST_CASE("coupling examples")
{
    std::mt19937_64 rng(6);
    SUBCASE("zero-initialized network scales x_b by sigma(2)")
    {
        AffineCoupling<double> cp(4, 8, rng);
        const auto x = testing::random_tensor<double>({2, 4, 3, 3}, rng);
        const auto y = cp.forward(x);
        const double s = sigma_of_two();
        CHECK(s == doctest::Approx(0.880797).epsilon(1e-6));
        for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t c = 0; c < 4; ++c)
                for (std::size_t i = 0; i < 3; ++i)
                    for (std::size_t j = 0; j < 3; ++j) {
                        const double expected = c < 2 ? x.at({b, c, i, j}) : s * x.at({b, c, i, j});
                        CHECK(y.at({b, c, i, j}) == doctest::Approx(expected).epsilon(1e-15));
                    }
        CHECK(cp.log_det(x) == doctest::Approx(2 * 9 * std::log(s)));
    }
    SUBCASE("x_b = 0 gives the shift exactly")
    {
        auto cp = random_coupling(4, 6, rng);
        auto x = testing::random_tensor<double>({1, 4, 4, 4}, rng);
        auto xv = std::vector<double>(x.data().begin(), x.data().end());
        std::fill(xv.begin() + 32, xv.end(), 0.0);
        const T64 x0(x.shape(), xv);
        const auto y = cp.forward(x0);
        // Shift is the second half of the network output on x_a.
        const auto params = cp.parameters();
        const auto xa = narrow_channels(x0, 0, 2);
        const auto hidden = tanh(conv2d_same(tanh(conv2d_same(xa, params[0], params[1])), params[2], params[3]));
        const auto shift = narrow_channels(conv2d_same(hidden, params[4], params[5]), 2, 2);
        CHECK(testing::max_abs_diff(narrow_channels(y, 2, 2).data(), shift.data()) == 0.0);
    }
    SUBCASE("odd channel count")
    {
        CHECK_THROWS_AS(AffineCoupling<double>(3, 4, rng), ShapeError);
    }
}

TEST_CASE("squeeze")
{
    SUBCASE("shape")
    {
        CHECK(squeeze2(T64::zeros({1, 1, 4, 4})).shape() == Shape{1, 4, 2, 2});
    }
    SUBCASE("ordering on a 2x2 plane")
    {
        const auto y = squeeze2(T64({1, 1, 2, 2}, {10, 11, 12, 13}));
        CHECK(y.shape() == Shape{1, 4, 1, 1});
        CHECK(std::vector<double>(y.data().begin(), y.data().end()) == std::vector<double>{10, 11, 12, 13});
    }
    SUBCASE("general index map")
    {
        std::mt19937_64 rng(7);
        const auto x = testing::random_tensor<double>({2, 3, 6, 4}, rng);
        const auto y = squeeze2(x);
        for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t c = 0; c < 3; ++c)
                for (std::size_t i = 0; i < 3; ++i)
                    for (std::size_t j = 0; j < 2; ++j)
                        for (std::size_t dy = 0; dy < 2; ++dy)
                            for (std::size_t dx = 0; dx < 2; ++dx)
                                CHECK(y.at({b, 4 * c + 2 * dy + dx, i, j}) == x.at({b, c, 2 * i + dy, 2 * j + dx}));
    }
    SUBCASE("permutation round trips")
    {
        std::mt19937_64 rng(8);
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t h = 2 * (1 + static_cast<std::size_t>(trial % 4));
            const std::size_t w = 2 * (1 + static_cast<std::size_t>(trial % 3));
            const auto x = testing::random_tensor<double>({1, 2, h, w}, rng);
            const auto y = squeeze2(x);
            auto a = std::vector<double>(x.data().begin(), x.data().end());
            auto b = std::vector<double>(y.data().begin(), y.data().end());
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            CHECK(a == b);
            const auto back = unsqueeze2(y);
            CHECK(std::equal(back.data().begin(), back.data().end(), x.data().begin()));
            const auto z = testing::random_tensor<double>({1, 8, h / 2, w / 2}, rng);
            const auto z2 = squeeze2(unsqueeze2(z));
            CHECK(std::equal(z2.data().begin(), z2.data().end(), z.data().begin()));
        }
    }
    SUBCASE("odd sizes")
    {
        CHECK_THROWS_AS(squeeze2(T64::zeros({1, 1, 3, 4})), ShapeError);
        CHECK_THROWS_AS(squeeze2(T64::zeros({1, 1, 4, 5})), ShapeError);
        CHECK_THROWS_AS(unsqueeze2(T64::zeros({1, 3, 2, 2})), ShapeError);
    }
}

TEST_CASE("every layer is bijective in 64-bit")
{
    std::mt19937_64 rng(9);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t c = 2 * (1 + static_cast<std::size_t>(trial % 3));
        const auto x = testing::random_tensor<double>({2, c, 4, 4}, rng, -1.0, 1.0);

        const auto an = random_actnorm(c, rng);
        worst = std::max(worst, testing::max_abs_diff(an.inverse(an.forward(x)).data(), x.data()));
        worst = std::max(worst, testing::max_abs_diff(an.forward(an.inverse(x)).data(), x.data()));

        InvConv1x1<double> conv(c, rng);
        worst = std::max(worst, testing::max_abs_diff(conv.inverse(conv.forward(x)).data(), x.data()));
        worst = std::max(worst, testing::max_abs_diff(conv.forward(conv.inverse(x)).data(), x.data()));

        const auto cp = random_coupling(c, 5, rng);
        const auto y = cp.forward(x);
        CHECK(testing::max_abs_diff(narrow_channels(y, 0, c / 2).data(), narrow_channels(x, 0, c / 2).data()) == 0.0);
        worst = std::max(worst, testing::max_abs_diff(cp.inverse(y).data(), x.data()));
        worst = std::max(worst, testing::max_abs_diff(cp.forward(cp.inverse(x)).data(), x.data()));

        CHECK(std::isfinite(an.log_det(4, 4)));
        CHECK(std::isfinite(conv.log_det(4, 4)));
        CHECK(std::isfinite(cp.log_det(x)));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("gradients through every layer type")
{
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 5; ++trial) {
        const std::uint64_t seed = 40 + static_cast<std::uint64_t>(trial);
        auto x = testing::random_tensor<double>({2, 4, 4, 4}, rng, -1.0, 1.0, true);

        const auto an = random_actnorm(4, rng);
        auto an_params = an.parameters();
        std::vector<T64> leaves{x};
        leaves.insert(leaves.end(), an_params.begin(), an_params.end());
        auto r = check_gradients([&] { return project(an.forward(x), seed); }, leaves);
        CHECK(r.max_relative_error < 1e-4);
        r = check_gradients([&] { return project(an.inverse(x), seed); }, leaves);
        CHECK(r.max_relative_error < 1e-4);

        InvConv1x1<double> conv(4, rng);
        r = check_gradients([&] { return project(conv.forward(x), seed); }, {x, conv.weight()});
        CHECK(r.max_relative_error < 1e-4);

        const auto cp = random_coupling(4, 3, rng);
        leaves = {x};
        for (auto& p : cp.parameters()) leaves.push_back(p);
        r = check_gradients([&] { return project(cp.forward(x), seed); }, leaves);
        CHECK(r.max_relative_error < 1e-4);

        r = check_gradients([&] { return project(squeeze2(x), seed); }, {x});
        CHECK(r.max_relative_error < 1e-4);
    }
}

TEST_CASE("parameter count of one flow step")
{
    std::mt19937_64 rng(11);
    const FlowStep<double> step(4, 8, rng);
    std::size_t n = 0;
    for (const auto& p : step.parameters()) n += p.numel();
    // ActNorm 2*4, W 16, conv1 9*2*8+8, conv2 9*8*8+8, conv3 9*8*4+4.
    CHECK(n == 8 + 16 + 152 + 584 + 292);
    CHECK(flow_step_param_count(4, 8) == n);
}
