#include "irae/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace irae {

std::string to_string(Task task)
{
    switch (task) {
    case Task::denoise: return "denoise";
    case Task::jpeg: return "jpeg";
    case Task::inpaint: return "inpaint";
    }
    return "?";
}

Task parse_task(const std::string& text)
{
    if (text == "denoise") return Task::denoise;
    if (text == "jpeg") return Task::jpeg;
    if (text == "inpaint") return Task::inpaint;
    throw Error("unknown task '" + text + "' (expected denoise, jpeg or inpaint)");
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename N>
N parse_number(const std::string& key, const std::string& text)
{
    N value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || text.empty()) {
        throw Error("config key '" + key + "': cannot parse '" + text + "' as a number");
    }
    if constexpr (std::is_floating_point_v<N>) {
        if (!std::isfinite(value)) throw Error("config key '" + key + "': value must be finite");
    }
    return value;
}

template <typename N>
std::string format_number(N value)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

bool parse_bool(const std::string& key, const std::string& text)
{
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw Error("config key '" + key + "': expected true or false, got '" + text + "'");
}

struct Field {
    ConfigKey key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename N>
Field number_field(std::string name, std::string help, N RunConfig::*member)
{
    auto key = name;
    return Field{{std::move(name), std::move(help)},
                 [member, key](RunConfig& c, const std::string& v) { c.*member = parse_number<N>(key, v); },
                 [member](const RunConfig& c) { return format_number(c.*member); }};
}

Field string_field(std::string name, std::string help, std::string RunConfig::*member)
{
    return Field{{name, std::move(help)},
                 [member, name](RunConfig& c, const std::string& v) {
                     if (v.find_first_of("#\n\r") != std::string::npos || trim(v) != v) {
                         throw Error("config key '" + name + "': value may not contain '#', line breaks or edge spaces");
                     }
                     c.*member = v;
                 },
                 [member](const RunConfig& c) { return c.*member; }};
}

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back({{"task", "denoise | jpeg | inpaint"},
                     [](RunConfig& c, const std::string& v) { c.task = parse_task(v); },
                     [](const RunConfig& c) { return to_string(c.task); }});
        f.push_back({{"blind", "denoise with sigma ~ U[sigma_lo, sigma_hi] (true/false)"},
                     [](RunConfig& c, const std::string& v) { c.blind = parse_bool("blind", v); },
                     [](const RunConfig& c) { return std::string(c.blind ? "true" : "false"); }});
        f.push_back(number_field("sigma", "noise level on the 0-255 scale", &RunConfig::sigma));
        f.push_back(number_field("sigma_lo", "blind noise lower bound", &RunConfig::sigma_lo));
        f.push_back(number_field("sigma_hi", "blind noise upper bound", &RunConfig::sigma_hi));
        f.push_back(number_field("quality", "JPEG quality factor 1..100", &RunConfig::quality));
        f.push_back(number_field("mask_height", "inpainting hole height", &RunConfig::mask_height));
        f.push_back(number_field("mask_width", "inpainting hole width", &RunConfig::mask_width));
        f.push_back({{"mask_placement", "anchor_in_center | within_center"},
                     [](RunConfig& c, const std::string& v) { c.mask_placement = parse_mask_placement(v); },
                     [](const RunConfig& c) { return to_string(c.mask_placement); }});
        f.push_back(number_field("flow_steps", "K, flow steps per level", &RunConfig::flow_steps));
        f.push_back(number_field("levels", "L, squeeze levels", &RunConfig::levels));
        f.push_back(number_field("hidden_width", "coupling network width", &RunConfig::hidden_width));
        f.push_back(number_field("channels", "image channels (1 or 3)", &RunConfig::channels));
        f.push_back({{"precision", "f32 | f64"},
                     [](RunConfig& c, const std::string& v) { c.precision = parse_precision(v); },
                     [](const RunConfig& c) { return to_string(c.precision); }});
        f.push_back(number_field("epochs", "maximum training epochs", &RunConfig::epochs));
        f.push_back(number_field("batch_size", "training batch size", &RunConfig::batch_size));
        f.push_back(number_field("seed", "seed for initialization, splits and noise", &RunConfig::seed));
        f.push_back(number_field("val_fraction", "held-out validation fraction", &RunConfig::val_fraction));
        f.push_back(number_field("grad_clip", "global gradient norm cap, 0 = off", &RunConfig::grad_clip));
        f.push_back(number_field("lr", "initial learning rate", &RunConfig::lr));
        f.push_back(number_field("lr_phase1_epochs", "epochs at the initial rate", &RunConfig::lr_phase1_epochs));
        f.push_back(number_field("lr_phase2", "rate after the first phase", &RunConfig::lr_phase2));
        f.push_back(number_field("patience", "non-improving epochs before a decay", &RunConfig::patience));
        f.push_back(number_field("lr_decay", "decay divisor", &RunConfig::lr_decay));
        f.push_back(number_field("min_lr", "stop once the rate falls below this", &RunConfig::min_lr));
        f.push_back(string_field("dataset", "directory of .pgm/.ppm images; empty = synthetic", &RunConfig::dataset));
        f.push_back(number_field("synthetic_count", "synthetic image count", &RunConfig::synthetic_count));
        f.push_back(number_field("synthetic_size", "synthetic image side", &RunConfig::synthetic_size));
        f.push_back(string_field("checkpoint", "checkpoint file", &RunConfig::checkpoint));
        f.push_back(string_field("history", "JSON-lines training log", &RunConfig::history));
        return f;
    }();
    return table;
}

const Field& find_field(const std::string& key)
{
    for (const auto& f : fields()) {
        if (f.key.name == key) return f;
    }
    throw Error("unknown config key '" + key + "'");
}

void require_parent(const std::string& label, const std::string& file)
{
    const auto parent = std::filesystem::path(file).parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent)) {
        throw Error(label + " directory '" + parent.string() + "' does not exist");
    }
}

}  // namespace

const std::vector<ConfigKey>& config_keys()
{
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> k;
        for (const auto& f : fields()) k.push_back(f.key);
        return k;
    }();
    return keys;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value)
{
    find_field(key).set(config, value);
}

std::string get_config_value(const RunConfig& config, const std::string& key) { return find_field(key).get(config); }

RunConfig parse_run_config(const std::string& text)
{
    RunConfig config;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) {
            throw Error("config line " + std::to_string(line_no) + ": key '" + key + "' repeated");
        }
        try {
            set_config_value(config, key, value);
        } catch (const Error& e) {
            throw Error("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return config;
}

std::string serialize_run_config(const RunConfig& config)
{
    std::string out;
    for (const auto& f : fields()) out += f.key.name + " = " + f.get(config) + "\n";
    return out;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

void validate_run_config(const RunConfig& config)
{
    model_config(config).validate();
    degradation_spec(config).validate();
    if (config.epochs < 1) throw Error("epochs must be at least 1");
    if (config.batch_size < 1) throw Error("batch_size must be at least 1");
    if (!(config.val_fraction > 0.0 && config.val_fraction < 1.0)) throw Error("val_fraction must lie in (0, 1)");
    if (!(config.lr > 0.0) || !(config.lr_phase2 > 0.0)) throw Error("learning rates must be positive");
    if (!(config.lr_decay > 1.0)) throw Error("lr_decay must exceed 1");
    if (config.dataset.empty()) {
        if (config.synthetic_count < 2) throw Error("synthetic_count must be at least 2");
        const auto m = model_config(config);
        m.validate_input({1, m.in_channels, config.synthetic_size, config.synthetic_size});
    } else if (!std::filesystem::is_directory(config.dataset)) {
        throw Error("dataset directory '" + config.dataset + "' does not exist");
    }
    require_parent("checkpoint", config.checkpoint);
    require_parent("history", config.history);
}

IraeConfig model_config(const RunConfig& config)
{
    IraeConfig m;
    m.flow_steps = config.flow_steps;
    m.levels = config.levels;
    m.hidden_width = config.hidden_width;
    m.in_channels = config.channels;
    m.precision = config.precision;
    m.seed = config.seed;
    return m;
}

DegradationSpec degradation_spec(const RunConfig& config)
{
    DegradationSpec s;
    switch (config.task) {
    case Task::denoise: s.kind = config.blind ? DegradationKind::blind_awgn : DegradationKind::awgn; break;
    case Task::jpeg: s.kind = DegradationKind::jpeg; break;
    case Task::inpaint: s.kind = DegradationKind::inpaint; break;
    }
    s.sigma = config.sigma;
    s.sigma_lo = config.sigma_lo;
    s.sigma_hi = config.sigma_hi;
    s.quality = config.quality;
    s.mask_height = config.mask_height;
    s.mask_width = config.mask_width;
    s.placement = config.mask_placement;
    s.seed = config.seed;
    return s;
}

TrainOptions train_options(const RunConfig& config)
{
    TrainOptions o;
    o.epochs_max = config.epochs;
    o.batch_size = config.batch_size;
    o.seed = config.seed;
    o.val_fraction = config.val_fraction;
    o.grad_clip_norm = config.grad_clip;
    o.schedule.phase1_lr = config.lr;
    o.schedule.phase1_epochs = config.lr_phase1_epochs;
    o.schedule.phase2_lr = config.lr_phase2;
    o.schedule.patience = config.patience;
    o.schedule.decay_divisor = config.lr_decay;
    o.schedule.min_lr = config.min_lr;
    return o;
}

}  // namespace irae
