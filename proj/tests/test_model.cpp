#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "irae/checkpoint.hpp"
#include "irae/error.hpp"
#include "irae/gradcheck.hpp"
#include "irae/model.hpp"
#include "irae/ops.hpp"
#include "irae/training.hpp"
#include "support.hpp"

using namespace irae;
using T64 = Tensor<double>;

namespace {

IraeConfig small_config(std::size_t k = 1, std::size_t l = 1, std::size_t h = 8, std::size_t c = 1)
{
    IraeConfig cfg;
    cfg.flow_steps = k;
    cfg.levels = l;
    cfg.hidden_width = h;
    cfg.in_channels = c;
    cfg.seed = 17;
    return cfg;
}

template <typename T>
bool same_parameters(const IraeModel<T>& a, const IraeModel<T>& b)
{
    const auto pa = a.snapshot();
    const auto pb = b.snapshot();
    return pa == pb;
}

}  // namespace

TEST_CASE("config validation names the violated constraint")
{
    auto cfg = small_config();
    CHECK_NOTHROW(cfg.validate());
    cfg.flow_steps = 0;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("K"), Error);
    cfg = small_config();
    cfg.levels = 0;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("L"), Error);
    cfg = small_config();
    cfg.hidden_width = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    CHECK_THROWS_AS(IraeModel<double>{cfg}, Error);

    cfg = small_config(1, 2);
    CHECK_NOTHROW(cfg.validate_input({1, 1, 8, 8}));
    CHECK_THROWS_AS(cfg.validate_input({1, 1, 6, 8}), ShapeError);
    CHECK_THROWS_AS(cfg.validate_input({1, 3, 8, 8}), ShapeError);
}

TEST_CASE("shape chain and output shape")
{
    IraeModel<double> model(small_config());
    REQUIRE(model.encoder().size() == 1);
    REQUIRE(model.decoder().size() == 1);
    CHECK(model.encoder()[0][0].actnorm.channels() == 4);
    CHECK(model.decoder()[0][0].actnorm.channels() == 4);

    std::mt19937_64 rng(1);
    const auto y = testing::random_tensor<double>({2, 1, 4, 4}, rng, 0.0, 1.0);
    CHECK_FALSE(model.initialized());
    CHECK_THROWS_AS(model.forward(y), Error);
    model.initialize(y);
    CHECK(model.initialized());
    const auto z = squeeze2(y);
    CHECK(z.shape() == Shape{2, 4, 2, 2});
    const auto x = model.forward(y);
    CHECK(x.shape() == y.shape());
    for (double v : x.data()) CHECK(std::isfinite(v));
    CHECK_THROWS_AS(model.forward(T64::zeros({1, 1, 5, 4})), ShapeError);
}

TEST_CASE("same seed gives identical parameters")
{
    IraeModel<double> a(small_config(2, 2, 6));
    IraeModel<double> b(small_config(2, 2, 6));
    CHECK(same_parameters(a, b));
    auto other = small_config(2, 2, 6);
    other.seed = 18;
    CHECK_FALSE(same_parameters(a, IraeModel<double>(other)));

    const auto pa = a.parameters();
    const auto pb = b.parameters();
    CHECK(pa.size() == pb.size());
    // Encoder and decoder own separate tensors.
    const auto half = pa.size() / 2;
    CHECK(pa[0].node_ptr() != pa[half].node_ptr());
}

TEST_CASE("full-size config builds")
{
    IraeConfig cfg;
    cfg.flow_steps = 16;
    cfg.levels = 2;
    cfg.hidden_width = 16;
    IraeModel<float> model(cfg);
    CHECK(model.param_count() == param_count(cfg));
    CHECK(model.encoder().size() == 2);
    CHECK(model.encoder()[1].size() == 16);
    CHECK(model.encoder()[1][0].actnorm.channels() == 16);
}

TEST_CASE("duplicated batch rows give duplicated outputs")
{
    IraeModel<double> model(small_config(2, 2, 6));
    std::mt19937_64 rng(2);
    const auto one = testing::random_tensor<double>({1, 1, 8, 8}, rng, 0.0, 1.0);
    randomize_parameters(model, 5);
    std::vector<double> two(one.data().begin(), one.data().end());
    two.insert(two.end(), one.data().begin(), one.data().end());
    const auto out = model.forward(T64({2, 1, 8, 8}, two));
    const auto single = model.forward(one);
    for (std::size_t i = 0; i < 64; ++i) {
        CHECK(out.data()[i] == out.data()[64 + i]);
        CHECK(out.data()[i] == doctest::Approx(single.data()[i]).epsilon(1e-12));
    }
}

TEST_CASE("identity parameters make forward a pure permutation")
{
    for (std::size_t levels : {1u, 2u}) {
        IraeModel<double> model(small_config(3, levels, 5));
        set_identity_parameters(model);
        std::mt19937_64 rng(3);
        const auto y = testing::random_tensor<double>({2, 1, 8, 8}, rng, 0.0, 1.0);
        const auto x = model.forward(y);
        CHECK(std::equal(x.data().begin(), x.data().end(), y.data().begin()));
        const auto back = model.inverse(x);
        CHECK(std::equal(back.data().begin(), back.data().end(), y.data().begin()));

        IraeModel<float> model32(small_config(2, levels, 4));
        set_identity_parameters(model32);
        const auto y32 = convert<float>(y);
        const auto x32 = model32.forward(y32);
        CHECK(std::equal(x32.data().begin(), x32.data().end(), y32.data().begin()));
    }
}

TEST_CASE("round trip after a few training steps (64-bit)")
{
    IraeModel<double> model(small_config(2, 2, 8));
    std::mt19937_64 rng(4);
    const auto clean = testing::random_tensor<double>({4, 1, 8, 8}, rng, 0.0, 1.0);
    const auto noisy = add(clean, testing::random_tensor<double>({4, 1, 8, 8}, rng, -0.1, 0.1));
    model.initialize(noisy);
    Adam<double> adam(model.parameters());
    for (int step = 0; step < 10; ++step) {
        l1_loss(model.forward(noisy), clean).backward();
        adam.step(1e-2);
        adam.zero_grad();
    }
    // The last coupling layers moved away from zero.
    bool moved = false;
    for (const auto& level : model.decoder())
        for (const auto& s : level)
            for (double w : s.coupling.parameters()[4].data()) moved = moved || w != 0.0;
    CHECK(moved);

    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const auto y = testing::random_tensor<double>({2, 1, 8, 8}, rng, 0.0, 1.0);
        worst = std::max(worst, testing::max_abs_diff(model.inverse(model.forward(y)).data(), y.data()));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("K=16, L=2, 32-bit round trip on 16x16")
{
    IraeConfig cfg;
    cfg.flow_steps = 16;
    cfg.levels = 2;
    cfg.hidden_width = 16;
    IraeModel<float> model(cfg);
    randomize_parameters(model, 9);
    std::mt19937_64 rng(5);
    const auto y = testing::random_tensor<float>({2, 1, 16, 16}, rng, 0.0, 1.0);
    CHECK(testing::max_abs_diff(model.inverse(model.forward(y)).data(), y.data()) < 1e-4);
}

TEST_CASE("forward is injective on random pairs")
{
    IraeModel<double> model(small_config(2, 2, 8));
    randomize_parameters(model, 6);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = testing::random_tensor<double>({1, 1, 8, 8}, rng, 0.0, 1.0);
        auto bv = std::vector<double>(a.data().begin(), a.data().end());
        // Move one pixel by at least 1e-3.
        const auto idx = static_cast<std::size_t>(u(rng) * 64) % 64;
        bv[idx] += (u(rng) < 0.5 ? -1.0 : 1.0) * (1e-3 + 1e-3 * u(rng));
        const T64 b(a.shape(), bv);
        CHECK(testing::max_abs_diff(model.forward(a).data(), model.forward(b).data()) > 1e-6);
    }
}

TEST_CASE("end-to-end gradient matches finite differences")
{
    IraeModel<double> model(small_config(1, 1, 3));
    randomize_parameters(model, 7, 0.3);
    std::mt19937_64 rng(7);
    auto y = testing::random_tensor<double>({1, 1, 4, 4}, rng, 0.0, 1.0, true);
    const auto target = testing::random_tensor<double>({1, 1, 4, 4}, rng, 0.0, 1.0);
    auto leaves = model.parameters();
    leaves.push_back(y);
    const auto r = check_gradients([&] { return l1_loss(model.forward(y), target); }, leaves);
    CHECK(r.checked == model.param_count() + 16);
    CHECK(r.max_relative_error < 1e-4);

    // finite_diff_grad on the input alone agrees with backward().
    const std::function<T64(const T64&)> f = [&](const T64& t) { return l1_loss(model.forward(t), target); };
    const auto fd = finite_diff_grad(f, y, 1e-5);
    y.zero_grad();
    for (auto& p : model.parameters()) p.zero_grad();
    f(y).backward();
    for (std::size_t i = 0; i < 16; ++i)
        CHECK(std::abs(y.grad()[i] - fd.data()[i]) / (std::abs(fd.data()[i]) + 1e-8) < 1e-4);
}

TEST_CASE("log-det diagnostic is finite")
{
    IraeModel<double> model(small_config(2, 2, 4));
    randomize_parameters(model, 8);
    std::mt19937_64 rng(8);
    CHECK(std::isfinite(model.log_det(testing::random_tensor<double>({2, 1, 8, 8}, rng, 0.0, 1.0))));
}

TEST_CASE("parameter count")
{
    const auto cfg = small_config(1, 1, 8, 1);
    // One level on 4 channels, encoder plus decoder:
    //   ActNorm 4 + 4, W 4*4, conv 2->8 (3x3) 144 + 8, conv 8->8 576 + 8, conv 8->4 288 + 4.
    const std::size_t per_step = 8 + 16 + 152 + 584 + 292;
    CHECK(per_step == 1052);
    CHECK(param_count(cfg) == 2 * per_step);
    CHECK(param_count(cfg) == 2104);
    IraeModel<double> model(cfg);
    std::size_t enumerated = 0;
    for (const auto& p : model.parameters()) enumerated += p.numel();
    CHECK(enumerated == 2104);
    CHECK(model.param_count() == 2104);

    // Pure function of (K, L, C, h): try several configs against the model.
    for (std::size_t k : {1u, 3u})
        for (std::size_t l : {1u, 2u})
            for (std::size_t c : {1u, 3u}) {
                const auto other = small_config(k, l, 5, c);
                IraeModel<float> m(other);
                std::size_t n = 0;
                for (const auto& p : m.parameters()) n += p.numel();
                CHECK(n == param_count(other));
            }
}

TEST_CASE("hidden width search reaches the 1.33e6 target")
{
    for (std::size_t c : {1u, 3u}) {
        IraeConfig cfg;
        cfg.flow_steps = 16;
        cfg.levels = 2;
        cfg.in_channels = c;
        const auto found = search_hidden_width(cfg, 1330000);
        cfg.hidden_width = found.hidden_width;
        CHECK(found.count == param_count(cfg));
        CHECK(std::abs(static_cast<double>(found.count) - 1.33e6) / 1.33e6 < 0.10);
        // Neighbours are no closer.
        for (std::size_t h : {found.hidden_width - 1, found.hidden_width + 1}) {
            cfg.hidden_width = h;
            CHECK(std::abs(static_cast<double>(param_count(cfg)) - 1.33e6) >=
                  std::abs(static_cast<double>(found.count) - 1.33e6));
        }
    }
}

TEST_CASE("checkpoint round trip")
{
    const auto dir = testing::scratch_dir("model_ckpt");
    SUBCASE("32-bit")
    {
        IraeModel<float> model(small_config(2, 2, 6));
        randomize_parameters(model, 3);
        save_checkpoint(model, dir / "a.ckpt");
        const auto loaded = load_checkpoint<float>(dir / "a.ckpt");
        CHECK(loaded.config() == model.config());
        CHECK(loaded.param_count() == model.param_count());
        CHECK(loaded.initialized());
        CHECK(same_parameters(loaded, model));

        const auto bytes = read_file_bytes(dir / "a.ckpt");
        CHECK(bytes.size() == kCheckpointHeaderSize + 4 * model.param_count());
        CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "IRAE");
    }
    SUBCASE("64-bit")
    {
        IraeModel<double> model(small_config(1, 2, 5));
        randomize_parameters(model, 4);
        save_checkpoint(model, dir / "b.ckpt");
        const auto loaded = load_checkpoint<double>(dir / "b.ckpt");
        CHECK(same_parameters(loaded, model));
    }
    SUBCASE("uninitialized model keeps its flag")
    {
        IraeModel<float> model(small_config());
        const auto loaded = deserialize_checkpoint<float>(serialize_checkpoint(model));
        CHECK_FALSE(loaded.initialized());
    }
    SUBCASE("config comes from the file")
    {
        IraeModel<float> model(small_config(3, 1, 7));
        save_checkpoint(model, dir / "c.ckpt");
        const auto cfg = read_checkpoint_config(dir / "c.ckpt");
        CHECK(cfg.flow_steps == 3);
        CHECK(cfg.hidden_width == 7);
        CHECK(cfg.seed == 17);
    }
}

TEST_CASE("checkpoint errors")
{
    IraeModel<float> model(small_config());
    const auto bytes = serialize_checkpoint(model);
    const auto load = [](std::vector<std::uint8_t> b) { return deserialize_checkpoint<float>(b); };

    CHECK_THROWS_WITH_AS(load({bytes.begin(), bytes.end() - 1}), doctest::Contains("truncated"), FormatError);
    CHECK_THROWS_WITH_AS(load({bytes.begin(), bytes.begin() + 20}), doctest::Contains("truncated"), FormatError);
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_WITH_AS(load(bad_magic), doctest::Contains("magic"), FormatError);
    auto bad_version = bytes;
    bad_version[4] = 9;
    CHECK_THROWS_WITH_AS(load(bad_version), doctest::Contains("version"), FormatError);
    auto trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_AS(load(trailing), FormatError);
    auto bad_count = bytes;
    bad_count[36] ^= 1;
    CHECK_THROWS_AS(load(bad_count), FormatError);
    CHECK_THROWS_AS(load_checkpoint<float>(testing::scratch_dir("missing") / "none.ckpt"), Error);
}
