#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "irae/degradation.hpp"
#include "irae/image.hpp"
#include "irae/model.hpp"
#include "irae/tensor.hpp"

namespace irae {

class NonFiniteGradientError : public Error {
public:
    using Error::Error;
};

struct TrainingPair {
    Image x;  // ground truth
    Image y;  // degraded
};

// (1/N) * sum_i ||estimate_i - target_i||_1 over a batch of N images.
template <typename T>
Tensor<T> l1_loss(const Tensor<T>& estimate, const Tensor<T>& target);

struct AdamOptions {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected Adam. Moments live alongside the parameter handles.
template <typename T>
class Adam {
public:
    explicit Adam(std::vector<Tensor<T>> params, AdamOptions options = {});

    // Missing gradients count as zero. Throws NonFiniteGradientError, leaving
    // every parameter and moment untouched, if any gradient is NaN or Inf.
    void step(double lr);
    void zero_grad();

    std::size_t steps() const { return step_count_; }
    const std::vector<std::vector<T>>& first_moments() const { return m_; }
    const std::vector<std::vector<T>>& second_moments() const { return v_; }
    const AdamOptions& options() const { return options_; }

private:
    std::vector<Tensor<T>> params_;
    AdamOptions options_;
    std::vector<std::vector<T>> m_;
    std::vector<std::vector<T>> v_;
    std::size_t step_count_ = 0;
};

// Scales every gradient so their global L2 norm is at most `max_norm`.
// Returns the norm before clipping.
template <typename T>
double clip_grad_norm(const std::vector<Tensor<T>>& params, double max_norm);

struct ScheduleDecision {
    double lr;
    bool stop;
};

/// Learning-rate schedule: a fixed rate for the first `phase1_epochs`
/// epochs, then `phase2_lr`, then division by `decay_divisor` whenever the
/// validation PSNR has not improved for `patience` epochs. Training stops
/// once the rate falls below `min_lr`.
struct LrSchedule {
    double phase1_lr = 1e-3;
    int phase1_epochs = 50;
    double phase2_lr = 2e-4;
    int patience = 10;
    double decay_divisor = 5.0;
    double min_lr = 1e-6;

    double lr = 1e-3;
    std::optional<double> best_val_psnr;
    int epochs_since_improve = 0;
    int decays = 0;

    LrSchedule() = default;

    // Call once after each epoch (1-based) with its validation PSNR; returns
    // the rate for the next epoch.
    ScheduleDecision update(int epoch, double val_psnr);
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_psnr = 0.0;
    double lr = 0.0;  // rate used during this epoch
    bool aborted = false;  // non-finite gradient met; remaining batches skipped

    bool operator==(const EpochRecord&) const = default;
};

// One JSON object per line: {"epoch":..,"train_loss":..,"val_psnr":..,"lr":..,"aborted":..}
std::string format_history_line(const EpochRecord& record);
EpochRecord parse_history_line(const std::string& line);

struct TrainOptions {
    int epochs_max = 50;
    std::size_t batch_size = 16;
    std::uint64_t seed = 0;
    double val_fraction = 0.1;
    double grad_clip_norm = 0.0;  // 0 disables clipping
    LrSchedule schedule;
    std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
    std::vector<EpochRecord> history;
    int best_epoch = 0;
    double best_val_psnr = 0.0;
    bool diverged = false;
    std::string stop_reason;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> val_indices;
};

// Deterministic split of `count` items into (train, validation).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_dataset(std::size_t count, double val_fraction,
                                                                            std::uint64_t seed);

/// Minimizes the L1 restoration loss with Adam.
///
/// Degradations are redrawn per (epoch, image) from seeded streams; the
/// validation set is degraded once. ActNorms are initialized on the first
/// training batch when needed. On return the model holds the parameters of
/// the best validation epoch. A NaN loss stops training and restores the
/// last good parameters.
template <typename T>
TrainResult train(IraeModel<T>& model, const std::vector<Image>& dataset, const DegradationSpec& spec,
                  const TrainOptions& options);

// Forward pass in batches with recording disabled.
template <typename T>
std::vector<Image> restore_images(const IraeModel<T>& model, const std::vector<Image>& inputs,
                                  std::size_t batch_size = 16);

}  // namespace irae
