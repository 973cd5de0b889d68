#include "irae/model.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "irae/linalg.hpp"
#include "irae/ops.hpp"

namespace irae {

std::string to_string(Precision p)
{
    return p == Precision::f64 ? "f64" : "f32";
}

Precision parse_precision(const std::string& text)
{
    if (text == "f32" || text == "float" || text == "32") return Precision::f32;
    if (text == "f64" || text == "double" || text == "64") return Precision::f64;
    throw Error("unknown precision '" + text + "' (expected f32 or f64)");
}

void IraeConfig::validate() const
{
    if (flow_steps < 1) throw Error("invalid config: K (flow_steps) must be >= 1");
    if (levels < 1) throw Error("invalid config: L (levels) must be >= 1");
    if (hidden_width < 1) throw Error("invalid config: hidden_width must be >= 1");
    if (in_channels < 1) throw Error("invalid config: in_channels must be >= 1");
    // Sanity bounds so parameter counts cannot overflow.
    if (flow_steps > 4096) throw Error("invalid config: K (flow_steps) must be <= 4096");
    if (levels > 8) throw Error("invalid config: L (levels) must be <= 8");
    if (hidden_width > 65536) throw Error("invalid config: hidden_width must be <= 65536");
    if (in_channels > 64) throw Error("invalid config: in_channels must be <= 64");
}

void IraeConfig::validate_input(const Shape& shape) const
{
    if (shape.size() != 4) throw ShapeError("model input must be [N,C,H,W], got " + shape_string(shape));
    if (shape[1] != in_channels) {
        throw ShapeError("model expects " + std::to_string(in_channels) + " channels, got " + shape_string(shape));
    }
    const std::size_t factor = std::size_t{1} << levels;
    if (shape[2] % factor || shape[3] % factor) {
        throw ShapeError("input height and width must be divisible by 2^L = " + std::to_string(factor) + ", got " +
                         shape_string(shape));
    }
}

std::size_t param_count(const IraeConfig& config)
{
    config.validate();
    std::size_t per_direction = 0;
    std::size_t channels = config.in_channels;
    for (std::size_t l = 0; l < config.levels; ++l) {
        channels *= 4;
        per_direction += config.flow_steps * flow_step_param_count(channels, config.hidden_width);
    }
    return 2 * per_direction;
}

WidthSearchResult search_hidden_width(IraeConfig config, std::size_t target, std::size_t max_width)
{
    WidthSearchResult best{0, 0, std::numeric_limits<double>::infinity()};
    for (std::size_t h = 1; h <= max_width; ++h) {
        config.hidden_width = h;
        const std::size_t n = param_count(config);
        const double err = std::abs(static_cast<double>(n) - static_cast<double>(target)) / static_cast<double>(target);
        if (err < best.relative_error) best = {h, n, err};
    }
    return best;
}

template <typename T>
IraeModel<T>::IraeModel(IraeConfig config) : config_(config)
{
    config_.validate();
    config_.precision = sizeof(T) == sizeof(double) ? Precision::f64 : Precision::f32;
    std::mt19937_64 rng(config_.seed);
    std::size_t channels = config_.in_channels;
    for (std::size_t l = 0; l < config_.levels; ++l) {
        channels *= 4;
        Level level;
        level.reserve(config_.flow_steps);
        for (std::size_t k = 0; k < config_.flow_steps; ++k) level.emplace_back(channels, config_.hidden_width, rng);
        encoder_.push_back(std::move(level));
    }
    for (std::size_t l = 0; l < config_.levels; ++l) {
        Level level;
        level.reserve(config_.flow_steps);
        for (std::size_t k = 0; k < config_.flow_steps; ++k) level.emplace_back(channels, config_.hidden_width, rng);
        decoder_.push_back(std::move(level));
        channels /= 4;
    }
}

template <typename T>
template <typename F>
void IraeModel<T>::for_each_step(F&& f) const
{
    for (const auto& level : encoder_)
        for (const auto& step : level) f(step);
    for (const auto& level : decoder_)
        for (const auto& step : level) f(step);
}

template <typename T>
ActNormInitReport IraeModel<T>::initialize(const Tensor<T>& batch)
{
    config_.validate_input(batch.shape());
    NoGradGuard no_grad;
    ActNormInitReport report;
    auto run_level = [&](Level& level, Tensor<T> x) {
        for (auto& step : level) {
            if (!step.actnorm.initialized()) {
                auto r = step.actnorm.initialize(x);
                report.clamped_channels.insert(report.clamped_channels.end(), r.clamped_channels.begin(),
                                               r.clamped_channels.end());
            }
            x = step.forward(x);
        }
        return x;
    };
    Tensor<T> x = batch;
    for (auto& level : encoder_) x = run_level(level, squeeze2(x));
    for (auto& level : decoder_) x = unsqueeze2(run_level(level, x));
    return report;
}

template <typename T>
bool IraeModel<T>::initialized() const
{
    bool all = true;
    for_each_step([&](const FlowStep<T>& s) { all = all && s.actnorm.initialized(); });
    return all;
}

template <typename T>
void IraeModel<T>::mark_initialized()
{
    for (auto& level : encoder_)
        for (auto& step : level) step.actnorm.mark_initialized();
    for (auto& level : decoder_)
        for (auto& step : level) step.actnorm.mark_initialized();
}

template <typename T>
Tensor<T> IraeModel<T>::forward(const Tensor<T>& y) const
{
    config_.validate_input(y.shape());
    Tensor<T> x = y;
    for (const auto& level : encoder_) {
        x = squeeze2(x);
        for (const auto& step : level) x = step.forward(x);
    }
    for (const auto& level : decoder_) {
        for (const auto& step : level) x = step.forward(x);
        x = unsqueeze2(x);
    }
    return x;
}

template <typename T>
Tensor<T> IraeModel<T>::inverse(const Tensor<T>& x) const
{
    config_.validate_input(x.shape());
    Tensor<T> y = x;
    for (auto level = decoder_.rbegin(); level != decoder_.rend(); ++level) {
        y = squeeze2(y);
        for (auto step = level->rbegin(); step != level->rend(); ++step) y = step->inverse(y);
    }
    for (auto level = encoder_.rbegin(); level != encoder_.rend(); ++level) {
        for (auto step = level->rbegin(); step != level->rend(); ++step) y = step->inverse(y);
        y = unsqueeze2(y);
    }
    return y;
}

template <typename T>
double IraeModel<T>::log_det(const Tensor<T>& y) const
{
    config_.validate_input(y.shape());
    NoGradGuard no_grad;
    double total = 0.0;
    auto run_step = [&](const FlowStep<T>& step, Tensor<T>& x) {
        const std::size_t h = x.dim(2), w = x.dim(3);
        total += step.actnorm.log_det(h, w);
        x = step.actnorm.forward(x);
        total += step.conv.log_det(h, w);
        x = step.conv.forward(x);
        total += step.coupling.log_det(x);
        x = step.coupling.forward(x);
    };
    Tensor<T> x = y;
    for (const auto& level : encoder_) {
        x = squeeze2(x);
        for (const auto& step : level) run_step(step, x);
    }
    for (const auto& level : decoder_) {
        for (const auto& step : level) run_step(step, x);
        x = unsqueeze2(x);
    }
    return total;
}

template <typename T>
std::vector<Tensor<T>> IraeModel<T>::parameters() const
{
    std::vector<Tensor<T>> out;
    for_each_step([&](const FlowStep<T>& s) {
        for (auto& p : s.parameters()) out.push_back(p);
    });
    return out;
}

template <typename T>
std::size_t IraeModel<T>::param_count() const
{
    std::size_t n = 0;
    for (const auto& p : parameters()) n += p.numel();
    return n;
}

template <typename T>
std::vector<std::vector<T>> IraeModel<T>::snapshot() const
{
    std::vector<std::vector<T>> out;
    for (const auto& p : parameters()) out.emplace_back(p.data().begin(), p.data().end());
    return out;
}

template <typename T>
void IraeModel<T>::restore(const std::vector<std::vector<T>>& values)
{
    auto params = parameters();
    if (values.size() != params.size()) throw Error("parameter snapshot does not match model structure");
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto dst = params[i].mutable_data();
        if (values[i].size() != dst.size()) throw Error("parameter snapshot does not match model structure");
        std::copy(values[i].begin(), values[i].end(), dst.begin());
    }
}

template <typename T>
void set_identity_parameters(IraeModel<T>& model)
{
    auto reset = [](FlowStep<T>& step) {
        const std::size_t c = step.actnorm.channels();
        step.actnorm.set(std::vector<T>(c, T(1)), std::vector<T>(c, T(0)));
        std::vector<double> eye(c * c, 0.0);
        for (std::size_t i = 0; i < c; ++i) eye[i * c + i] = 1.0;
        step.conv.set_weight(eye);
        auto params = step.coupling.parameters();
        for (auto& p : params) {
            for (auto& v : p.mutable_data()) v = T(0);
        }
        auto b3 = params[5].mutable_data();
        for (std::size_t i = 0; i < c / 2; ++i) b3[i] = static_cast<T>(kSaturatedScaleBias);
    };
    for (auto& level : model.encoder())
        for (auto& step : level) reset(step);
    for (auto& level : model.decoder())
        for (auto& step : level) reset(step);
}

template <typename T>
void randomize_parameters(IraeModel<T>& model, std::uint64_t seed, double magnitude)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto fill = [&](Tensor<T>& t, double bound) {
        for (auto& v : t.mutable_data()) v = static_cast<T>(bound * unit(rng));
    };
    auto randomize = [&](FlowStep<T>& step) {
        const std::size_t c = step.actnorm.channels();
        std::vector<T> s(c), b(c);
        for (std::size_t i = 0; i < c; ++i) {
            s[i] = static_cast<T>(std::exp(magnitude * unit(rng)));
            b[i] = static_cast<T>(magnitude * unit(rng));
        }
        step.actnorm.set(s, b);
        step.conv.set_weight(random_orthogonal(c, rng));
        auto params = step.coupling.parameters();
        for (std::size_t i = 0; i < params.size(); i += 2) {
            const auto& ws = params[i].shape();
            const double bound = std::sqrt(3.0 / static_cast<double>(ws[1] * ws[2] * ws[3]));
            const bool last = i == 4;
            fill(params[i], last ? magnitude * bound : bound);
            fill(params[i + 1], magnitude);
        }
    };
    for (auto& level : model.encoder())
        for (auto& step : level) randomize(step);
    for (auto& level : model.decoder())
        for (auto& step : level) randomize(step);
}

template class IraeModel<float>;
template class IraeModel<double>;
template void set_identity_parameters(IraeModel<float>&);
template void set_identity_parameters(IraeModel<double>&);
template void randomize_parameters(IraeModel<float>&, std::uint64_t, double);
template void randomize_parameters(IraeModel<double>&, std::uint64_t, double);

}  // namespace irae
