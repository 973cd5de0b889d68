#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "irae/degradation.hpp"
#include "irae/model.hpp"
#include "irae/training.hpp"

namespace irae {

enum class Task { denoise, jpeg, inpaint };

std::string to_string(Task task);
Task parse_task(const std::string& text);

/// Everything one CLI run needs, as a flat set of documented keys.
///
/// File format: one `key = value` per line; `#` starts a comment; blank lines
/// are ignored. Unknown or repeated keys are errors. See `config_keys()`.
struct RunConfig {
    Task task = Task::denoise;
    bool blind = false;
    double sigma = 25.0;
    double sigma_lo = 0.0;
    double sigma_hi = 55.0;
    int quality = 40;
    std::size_t mask_height = 16;
    std::size_t mask_width = 16;
    MaskPlacement mask_placement = MaskPlacement::anchor_in_center;

    std::size_t flow_steps = 16;
    std::size_t levels = 2;
    std::size_t hidden_width = 64;
    std::size_t channels = 1;
    Precision precision = Precision::f32;

    int epochs = 50;
    std::size_t batch_size = 16;
    std::uint64_t seed = 0;
    double val_fraction = 0.1;
    double grad_clip = 0.0;
    double lr = 1e-3;
    int lr_phase1_epochs = 50;
    double lr_phase2 = 2e-4;
    int patience = 10;
    double lr_decay = 5.0;
    double min_lr = 1e-6;

    // Empty dataset: train on `synthetic_count` generated images of
    // synthetic_size x synthetic_size.
    std::string dataset;
    std::size_t synthetic_count = 200;
    std::size_t synthetic_size = 16;

    std::string checkpoint = "irae.ckpt";
    std::string history = "history.jsonl";

    bool operator==(const RunConfig&) const = default;
};

struct ConfigKey {
    std::string name;
    std::string help;
};

// Every accepted key, in serialization order.
const std::vector<ConfigKey>& config_keys();

// Throws Error naming the key on unknown keys or unparsable values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& config, const std::string& key);

RunConfig parse_run_config(const std::string& text);
// Every key, shortest round-trip number formatting.
std::string serialize_run_config(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

// Numeric checks are delegated to the owning modules. Paths: the dataset
// directory (if set) must exist; parent directories of the checkpoint and
// history files must exist.
void validate_run_config(const RunConfig& config);

IraeConfig model_config(const RunConfig& config);
DegradationSpec degradation_spec(const RunConfig& config);
TrainOptions train_options(const RunConfig& config);

}  // namespace irae
