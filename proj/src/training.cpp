#include "irae/training.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <random>

#include "irae/metrics.hpp"
#include "irae/ops.hpp"

namespace irae {

template <typename T>
Tensor<T> l1_loss(const Tensor<T>& estimate, const Tensor<T>& target)
{
    if (estimate.shape() != target.shape()) {
        throw ShapeError("l1_loss: shapes " + shape_string(estimate.shape()) + " and " +
                         shape_string(target.shape()) + " differ");
    }
    const auto batch = static_cast<T>(estimate.dim(0));
    return scale(sum(abs(sub(estimate, target))), T(1) / batch);
}

// ------------------------------------------------------------------- Adam

template <typename T>
Adam<T>::Adam(std::vector<Tensor<T>> params, AdamOptions options) : params_(std::move(params)), options_(options)
{
    for (const auto& p : params_) {
        m_.emplace_back(p.numel(), T(0));
        v_.emplace_back(p.numel(), T(0));
    }
}

template <typename T>
void Adam<T>::step(double lr)
{
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (!params_[i].has_grad()) continue;
        for (T g : params_[i].grad()) {
            if (!std::isfinite(static_cast<double>(g))) {
                throw NonFiniteGradientError("non-finite gradient in parameter tensor " + std::to_string(i) + " of shape " +
                                             shape_string(params_[i].shape()));
            }
        }
    }
    ++step_count_;
    const double b1 = options_.beta1, b2 = options_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto theta = params_[i].mutable_data();
        const bool has = params_[i].has_grad();
        std::span<const T> grad = has ? params_[i].grad() : std::span<const T>{};
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::size_t j = 0; j < theta.size(); ++j) {
            const double g = has ? static_cast<double>(grad[j]) : 0.0;
            const double mj = b1 * m[j] + (1.0 - b1) * g;
            const double vj = b2 * v[j] + (1.0 - b2) * g * g;
            m[j] = static_cast<T>(mj);
            v[j] = static_cast<T>(vj);
            const double update = lr * (mj / c1) / (std::sqrt(vj / c2) + options_.epsilon);
            theta[j] = static_cast<T>(static_cast<double>(theta[j]) - update);
        }
    }
}

template <typename T>
void Adam<T>::zero_grad()
{
    for (auto& p : params_) p.zero_grad();
}

template <typename T>
double clip_grad_norm(const std::vector<Tensor<T>>& params, double max_norm)
{
    double total = 0.0;
    for (const auto& p : params) {
        if (!p.has_grad()) continue;
        for (T g : p.grad()) total += static_cast<double>(g) * static_cast<double>(g);
    }
    const double norm = std::sqrt(total);
    if (max_norm > 0.0 && norm > max_norm) {
        const double f = max_norm / norm;
        for (const auto& p : params) {
            if (!p.has_grad()) continue;
            for (auto& g : p.node().grad) g = static_cast<T>(static_cast<double>(g) * f);
        }
    }
    return norm;
}

// --------------------------------------------------------------- Schedule

ScheduleDecision LrSchedule::update(int epoch, double val_psnr)
{
    if (!best_val_psnr || val_psnr > *best_val_psnr) {
        best_val_psnr = val_psnr;
        epochs_since_improve = 0;
    } else {
        ++epochs_since_improve;
    }
    if (epoch < phase1_epochs) {
        lr = phase1_lr;
    } else if (epoch == phase1_epochs) {
        lr = phase2_lr;
        epochs_since_improve = 0;
    } else {
        if (epochs_since_improve >= patience) {
            ++decays;
            epochs_since_improve = 0;
        }
        double divisor = 1.0;
        for (int i = 0; i < decays; ++i) divisor *= decay_divisor;
        lr = phase2_lr / divisor;
    }
    return {lr, lr < min_lr};
}

// ---------------------------------------------------------------- History

std::string format_history_line(const EpochRecord& r)
{
    nlohmann::ordered_json j;
    j["epoch"] = r.epoch;
    j["train_loss"] = r.train_loss;
    j["val_psnr"] = r.val_psnr;
    j["lr"] = r.lr;
    j["aborted"] = r.aborted;
    return j.dump();
}

EpochRecord parse_history_line(const std::string& line)
{
    try {
        const auto j = nlohmann::json::parse(line);
        EpochRecord r;
        r.epoch = j.at("epoch").get<int>();
        r.train_loss = j.at("train_loss").get<double>();
        r.val_psnr = j.at("val_psnr").get<double>();
        r.lr = j.at("lr").get<double>();
        r.aborted = j.value("aborted", false);
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed history line: ") + e.what());
    }
}

// --------------------------------------------------------------- Training

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_dataset(std::size_t count, double val_fraction,
                                                                            std::uint64_t seed)
{
    if (count == 0) throw Error("dataset is empty");
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    if (count == 1) return {order, order};
    std::mt19937_64 rng(mix_seed(seed, 0x5b117));
    std::shuffle(order.begin(), order.end(), rng);
    auto n_val = static_cast<std::size_t>(std::lround(val_fraction * static_cast<double>(count)));
    n_val = std::clamp<std::size_t>(n_val, 1, count - 1);
    std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<long>(n_val));
    std::vector<std::size_t> tr(order.begin() + static_cast<long>(n_val), order.end());
    std::sort(val.begin(), val.end());
    std::sort(tr.begin(), tr.end());
    return {tr, val};
}

template <typename T>
std::vector<Image> restore_images(const IraeModel<T>& model, const std::vector<Image>& inputs, std::size_t batch_size)
{
    NoGradGuard no_grad;
    std::vector<Image> out;
    out.reserve(inputs.size());
    batch_size = std::max<std::size_t>(batch_size, 1);
    for (std::size_t i = 0; i < inputs.size(); i += batch_size) {
        const std::size_t n = std::min(batch_size, inputs.size() - i);
        auto restored = from_batch(model.forward(to_batch<T>(std::span(inputs).subspan(i, n))));
        for (auto& img : restored) out.push_back(std::move(img));
    }
    return out;
}

namespace {

constexpr std::uint64_t kValidationStream = 0x7a11da7e;

double mean_psnr(const std::vector<Image>& restored, const std::vector<Image>& clean)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < restored.size(); ++i) acc += psnr(clipped(restored[i]), clean[i]);
    return acc / static_cast<double>(restored.size());
}

}  // namespace

template <typename T>
TrainResult train(IraeModel<T>& model, const std::vector<Image>& dataset, const DegradationSpec& spec,
                  const TrainOptions& options)
{
    if (dataset.empty()) throw Error("training dataset is empty");
    spec.validate();
    if (options.batch_size == 0) throw Error("batch size must be positive");
    for (const auto& img : dataset) {
        if (!img.same_shape(dataset.front())) throw ShapeError("training images must share one shape");
    }
    const auto& first = dataset.front();
    model.config().validate_input({1, first.channels, first.height, first.width});

    TrainResult result;
    std::tie(result.train_indices, result.val_indices) = split_dataset(dataset.size(), options.val_fraction, options.seed);

    std::vector<Image> val_clean, val_inputs;
    for (auto idx : result.val_indices) {
        val_clean.push_back(dataset[idx]);
        val_inputs.push_back(degrade(dataset[idx], spec, mix_seed(mix_seed(options.seed, kValidationStream), idx)).image);
    }

    LrSchedule schedule = options.schedule;
    double lr = schedule.phase1_epochs > 0 ? schedule.phase1_lr : schedule.phase2_lr;
    schedule.lr = lr;

    const auto params = model.parameters();
    Adam<T> adam(params);
    auto last_good = model.snapshot();
    auto best = last_good;
    bool have_best = false;

    for (int epoch = 1; epoch <= options.epochs_max; ++epoch) {
        auto order = result.train_indices;
        std::mt19937_64 shuffle_rng(mix_seed(options.seed, static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        const std::uint64_t epoch_stream = mix_seed(options.seed ^ 0xe90c4, static_cast<std::uint64_t>(epoch));

        EpochRecord record;
        record.epoch = epoch;
        record.lr = lr;
        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
            const std::size_t n = std::min(options.batch_size, order.size() - start);
            std::vector<Image> clean, degraded;
            for (std::size_t k = 0; k < n; ++k) {
                const auto idx = order[start + k];
                clean.push_back(dataset[idx]);
                degraded.push_back(degrade(dataset[idx], spec, mix_seed(epoch_stream, idx)).image);
            }
            const auto yb = to_batch<T>(degraded);
            const auto xb = to_batch<T>(clean);
            if (!model.initialized()) model.initialize(yb);

            const auto loss = l1_loss(model.forward(yb), xb);
            const double value = static_cast<double>(loss.item());
            if (!std::isfinite(value)) {
                model.restore(last_good);
                result.diverged = true;
                result.stop_reason = "loss became non-finite at epoch " + std::to_string(epoch);
                break;
            }
            loss.backward();
            if (options.grad_clip_norm > 0.0) clip_grad_norm(params, options.grad_clip_norm);
            try {
                adam.step(lr);
            } catch (const NonFiniteGradientError&) {
                adam.zero_grad();
                record.aborted = true;
                break;
            }
            adam.zero_grad();
            loss_sum += value * static_cast<double>(n);
            seen += n;
        }
        if (result.diverged) break;

        record.train_loss = seen ? loss_sum / static_cast<double>(seen) : 0.0;
        record.val_psnr = mean_psnr(restore_images(model, val_inputs, options.batch_size), val_clean);
        result.history.push_back(record);
        if (options.on_epoch) options.on_epoch(record);

        if (!have_best || record.val_psnr > result.best_val_psnr) {
            have_best = true;
            result.best_val_psnr = record.val_psnr;
            result.best_epoch = epoch;
            best = model.snapshot();
        }
        last_good = model.snapshot();

        const auto decision = schedule.update(epoch, record.val_psnr);
        lr = decision.lr;
        if (decision.stop) {
            result.stop_reason = "learning rate fell below " + std::to_string(schedule.min_lr);
            break;
        }
    }
    if (result.stop_reason.empty()) result.stop_reason = "reached epoch limit";
    if (have_best) model.restore(best);
    return result;
}

template Tensor<float> l1_loss(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> l1_loss(const Tensor<double>&, const Tensor<double>&);
template class Adam<float>;
template class Adam<double>;
template double clip_grad_norm(const std::vector<Tensor<float>>&, double);
template double clip_grad_norm(const std::vector<Tensor<double>>&, double);
template std::vector<Image> restore_images(const IraeModel<float>&, const std::vector<Image>&, std::size_t);
template std::vector<Image> restore_images(const IraeModel<double>&, const std::vector<Image>&, std::size_t);
template TrainResult train(IraeModel<float>&, const std::vector<Image>&, const DegradationSpec&, const TrainOptions&);
template TrainResult train(IraeModel<double>&, const std::vector<Image>&, const DegradationSpec&, const TrainOptions&);

}  // namespace irae
