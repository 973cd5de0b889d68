#include "irae/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include "irae/checkpoint.hpp"
#include "irae/config.hpp"
#include "irae/degradation.hpp"
#include "irae/image.hpp"
#include "irae/info.hpp"
#include "irae/metrics.hpp"
#include "irae/model.hpp"
#include "irae/synthetic.hpp"
#include "irae/training.hpp"

namespace irae {

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* pattern, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

// Runs body(i) for i in [0, n) on up to `jobs` threads. Each index is
// handled by exactly one thread; the first exception is rethrown.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& body)
{
    jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

// A single file or every PNM file of a directory.
std::vector<fs::path> collect_inputs(const std::string& input)
{
    if (fs::is_directory(input)) {
        auto files = list_images(input);
        if (files.empty()) throw Error("no .pgm/.ppm images in '" + input + "'");
        return files;
    }
    if (fs::is_regular_file(input)) return {fs::path(input)};
    throw Error("input '" + input + "' does not exist");
}

std::string image_extension(const Image& img) { return img.channels == 1 ? ".pgm" : ".ppm"; }

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

// Config keys exposed as --<key> flags; only the ones given on the command
// line override the file.
struct ConfigFlags {
    std::string file;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;

    void attach(CLI::App* app, bool with_file)
    {
        if (with_file) app->add_option("--config", file, "key = value config file")->check(CLI::ExistingFile);
        for (const auto& key : config_keys()) {
            options[key.name] = app->add_option("--" + key.name, values[key.name], key.help)->group("Config keys");
        }
    }

    RunConfig resolve() const
    {
        RunConfig config = file.empty() ? RunConfig{} : load_run_config(file);
        for (const auto& [name, option] : options) {
            if (option->count() > 0) set_config_value(config, name, values.at(name));
        }
        return config;
    }
};

std::vector<Image> load_dataset(const RunConfig& config)
{
    if (config.dataset.empty()) {
        return synthetic_images(config.synthetic_count, config.channels, config.synthetic_size, config.synthetic_size,
                                config.seed);
    }
    std::vector<Image> images;
    for (const auto& path : collect_inputs(config.dataset)) images.push_back(load_image(path));
    for (const auto& img : images) {
        if (img.channels != config.channels) {
            throw Error("dataset image has " + std::to_string(img.channels) + " channels, config expects " +
                        std::to_string(config.channels));
        }
    }
    return images;
}

template <typename T>
int train_with(const RunConfig& config, std::ostream& out)
{
    const auto dataset = load_dataset(config);
    IraeModel<T> model(model_config(config));
    auto options = train_options(config);
    std::string history;
    options.on_epoch = [&](const EpochRecord& r) {
        const auto line = format_history_line(r);
        history += line + "\n";
        out << line << "\n";
    };
    const auto result = train(model, dataset, degradation_spec(config), options);
    save_checkpoint(model, config.checkpoint);
    write_text(config.history, history);
    out << "trained " << result.history.size() << " epochs on " << result.train_indices.size() << " images ("
        << result.val_indices.size() << " held out): " << result.stop_reason << "\n";
    out << "best epoch " << result.best_epoch << ", validation PSNR " << fmt("%.4f", result.best_val_psnr)
        << " dB\n";
    out << "checkpoint " << config.checkpoint << ", history " << config.history << "\n";
    if (result.diverged) {
        out << "training diverged; checkpoint holds the last good parameters\n";
        return 1;
    }
    return 0;
}

template <typename T>
void restore_with(const fs::path& checkpoint, const std::vector<fs::path>& inputs, const fs::path& out_dir,
                  std::size_t jobs)
{
    const auto model = load_checkpoint<T>(checkpoint);
    if (!model.initialized()) throw Error("checkpoint '" + checkpoint.string() + "' holds an untrained model");
    parallel_for(inputs.size(), jobs, [&](std::size_t i) {
        const auto img = load_image(inputs[i]);
        auto restored = restore_images(model, {img}, 1);
        save_image(restored.front(), out_dir / inputs[i].filename());
    });
}

struct VerifyStats {
    double forward_inverse = 0.0;  // max |inverse(forward(x)) - x|
    double inverse_forward = 0.0;  // max |forward(inverse(z)) - z|
};

template <typename T>
VerifyStats verify_with(IraeModel<T>& model, std::size_t trials, std::size_t size, std::uint64_t seed)
{
    NoGradGuard no_grad;
    VerifyStats stats;
    const auto c = model.config().in_channels;
    for (std::size_t t = 0; t < trials; ++t) {
        std::mt19937_64 rng(mix_seed(seed ^ 0x7e51f, t));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<T> values(c * size * size);
        for (auto& v : values) v = static_cast<T>(u(rng));
        const Tensor<T> x({1, c, size, size}, values);
        const auto back = model.inverse(model.forward(x));
        const auto again = model.forward(model.inverse(x));
        for (std::size_t i = 0; i < values.size(); ++i) {
            stats.forward_inverse = std::max(stats.forward_inverse,
                                             std::abs(static_cast<double>(back.data()[i]) - values[i]));
            stats.inverse_forward = std::max(stats.inverse_forward,
                                             std::abs(static_cast<double>(again.data()[i]) - values[i]));
        }
    }
    return stats;
}

struct VerifyArgs {
    std::string checkpoint;
    std::size_t flow_steps = 4;
    std::size_t levels = 2;
    std::size_t hidden_width = 32;
    std::size_t channels = 1;
    std::string precision = "f32";
    std::uint64_t seed = 0;
    std::size_t trials = 50;
    std::size_t size = 16;
};

template <typename T>
int run_verify(const VerifyArgs& a, std::ostream& out)
{
    auto model = [&] {
        if (!a.checkpoint.empty()) return load_checkpoint<T>(a.checkpoint);
        IraeConfig config;
        config.flow_steps = a.flow_steps;
        config.levels = a.levels;
        config.hidden_width = a.hidden_width;
        config.in_channels = a.channels;
        config.seed = a.seed;
        IraeModel<T> fresh(config);
        randomize_parameters(fresh, a.seed);
        return fresh;
    }();
    const auto& c = model.config();
    c.validate_input({1, c.in_channels, a.size, a.size});
    const double bound = std::is_same_v<T, double> ? 1e-8 : 1e-4;
    const auto stats = verify_with(model, a.trials, a.size, a.seed);
    const double worst = std::max(stats.forward_inverse, stats.inverse_forward);
    out << "model K=" << c.flow_steps << " L=" << c.levels << " h=" << c.hidden_width << " C=" << c.in_channels
        << " precision=" << to_string(c.precision) << " params=" << model.param_count() << "\n";
    out << a.trials << " trials on " << a.size << "x" << a.size << " inputs\n";
    out << "max |inverse(forward(x)) - x| = " << fmt("%.3e", stats.forward_inverse) << "\n";
    out << "max |forward(inverse(z)) - z| = " << fmt("%.3e", stats.inverse_forward) << "\n";
    out << "max round-trip error " << fmt("%.3e", worst) << " (bound " << fmt("%.0e", bound) << "): "
        << (worst < bound ? "PASS" : "FAIL") << "\n";
    return worst < bound ? 0 : 1;
}

void print_report(std::ostream& out, const std::string& label, std::span<const double> px, const FiniteMap& f)
{
    const auto r = information_loss_check(px, f);
    out << label << "\n";
    out << "  injective " << (r.injective ? "yes" : "no") << ", H(X) = " << fmt("%.6f", r.entropy_x)
        << " bits, I(X;Z) = " << fmt("%.6f", r.mutual_information) << " bits, loss = " << fmt("%.6f", r.loss)
        << " bits, P(x|z) = 1 everywhere: " << (r.posterior_certain ? "yes" : "no") << "\n";
}

int run_mi_demo(std::ostream& out)
{
    const std::vector<double> uniform4(4, 0.25);
    const std::vector<double> uniform8(8, 0.125);
    print_report(out, "identity on 4 equiprobable symbols", uniform4, FiniteMap::identity(4));
    print_report(out, "f(x) = x mod 2 on 4 equiprobable symbols", uniform4, FiniteMap({0, 1, 0, 1}, 2));
    print_report(out, "constant map on 4 equiprobable symbols", uniform4, FiniteMap({0, 0, 0, 0}, 1));
    print_report(out, "permutation of 8 equiprobable symbols", uniform8, FiniteMap({3, 7, 0, 5, 1, 6, 2, 4}, 8));

    std::size_t injective = 0, lossless = 0, consistent = 0;
    const auto maps = all_maps(4, 4);
    for (const auto& f : maps) {
        const auto r = information_loss_check(uniform4, f);
        injective += r.injective;
        lossless += std::abs(r.loss) <= 1e-12;
        consistent += r.injective == (std::abs(r.mutual_information - 2.0) <= 1e-12) &&
                      (r.injective || r.loss > 1e-12) && r.injective == r.posterior_certain;
    }
    out << "all " << maps.size() << " maps on 4 equiprobable symbols: " << injective << " injective, " << lossless
        << " lossless, " << consistent << " consistent with I(X;f(X)) = H(X) iff injective\n";
    return consistent == maps.size() ? 0 : 1;
}

int dispatch(CLI::App& app, std::ostream& out, std::ostream& err, const std::vector<std::string>& args);

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Invertible restoring autoencoder: training, restoration, evaluation and checks", "irae"};
    return dispatch(app, out, err, args);
}

namespace {

int dispatch(CLI::App& app, std::ostream& out, std::ostream& err, const std::vector<std::string>& args)
{
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Expand every subcommand's help");

    auto* train_cmd = app.add_subcommand("train", "Train a model; writes a checkpoint and a JSON-lines history");
    ConfigFlags train_flags;
    train_flags.attach(train_cmd, true);
    bool print_config = false;
    train_cmd->add_flag("--print-config", print_config, "Print the resolved config and exit");

    auto* restore_cmd = app.add_subcommand("restore", "Apply a trained model to degraded images");
    std::string restore_ckpt, restore_input, restore_output;
    std::size_t restore_jobs = 1;
    restore_cmd->add_option("--checkpoint", restore_ckpt, "Checkpoint file")->required()->check(CLI::ExistingFile);
    restore_cmd->add_option("--input", restore_input, "Image file or directory")->required();
    restore_cmd->add_option("--output", restore_output, "Output directory (created)")->required();
    restore_cmd->add_option("--jobs", restore_jobs, "Worker threads")->check(CLI::PositiveNumber);

    auto* eval_cmd = app.add_subcommand("eval", "PSNR/SSIM table between two image sets, matched by file name");
    std::string eval_ref, eval_est, eval_csv;
    std::size_t eval_jobs = 1;
    eval_cmd->add_option("--reference", eval_ref, "Ground-truth image file or directory")->required();
    eval_cmd->add_option("--estimate", eval_est, "Estimated image file or directory")->required();
    eval_cmd->add_option("--output", eval_csv, "Also write the table to this CSV file");
    eval_cmd->add_option("--jobs", eval_jobs, "Worker threads")->check(CLI::PositiveNumber);

    auto* verify_cmd = app.add_subcommand("verify", "Round-trip invertibility check on a fresh or saved model");
    VerifyArgs va;
    verify_cmd->add_option("--checkpoint", va.checkpoint, "Check this checkpoint instead of a fresh model")
        ->check(CLI::ExistingFile);
    verify_cmd->add_option("--flow_steps", va.flow_steps, "K for a fresh model")->capture_default_str();
    verify_cmd->add_option("--levels", va.levels, "L for a fresh model")->capture_default_str();
    verify_cmd->add_option("--hidden_width", va.hidden_width, "Coupling width for a fresh model")
        ->capture_default_str();
    verify_cmd->add_option("--channels", va.channels, "Channels for a fresh model")->capture_default_str();
    verify_cmd->add_option("--precision", va.precision, "f32 or f64 for a fresh model")->capture_default_str();
    verify_cmd->add_option("--seed", va.seed, "Seed for parameters and inputs")->capture_default_str();
    verify_cmd->add_option("--trials", va.trials, "Random inputs")->capture_default_str()->check(CLI::PositiveNumber);
    verify_cmd->add_option("--size", va.size, "Input side length")->capture_default_str()->check(CLI::PositiveNumber);

    auto* mi_cmd = app.add_subcommand("mi-demo", "Exact mutual information of invertible and lossy finite maps");

    auto* degrade_cmd = app.add_subcommand("degrade", "Apply the configured degradation to clean images");
    ConfigFlags degrade_flags;
    degrade_flags.attach(degrade_cmd, true);
    std::string degrade_input, degrade_output;
    degrade_cmd->add_option("--input", degrade_input, "Image file or directory")->required();
    degrade_cmd->add_option("--output", degrade_output, "Output directory (created)")->required();

    auto* synth_cmd = app.add_subcommand("synth", "Write deterministic synthetic images");
    std::size_t synth_count = 200, synth_size = 16, synth_channels = 1;
    std::uint64_t synth_seed = 0;
    std::string synth_output;
    synth_cmd->add_option("--count", synth_count, "Number of images")->capture_default_str();
    synth_cmd->add_option("--size", synth_size, "Side length")->capture_default_str();
    synth_cmd->add_option("--channels", synth_channels, "1 or 3")->capture_default_str();
    synth_cmd->add_option("--seed", synth_seed, "Seed")->capture_default_str();
    synth_cmd->add_option("--output", synth_output, "Output directory (created)")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*train_cmd) {
            const auto config = train_flags.resolve();
            if (print_config) {
                out << serialize_run_config(config);
                return 0;
            }
            validate_run_config(config);
            return config.precision == Precision::f64 ? train_with<double>(config, out) : train_with<float>(config, out);
        }
        if (*restore_cmd) {
            const auto inputs = collect_inputs(restore_input);
            fs::create_directories(restore_output);
            const auto precision = read_checkpoint_config(fs::path(restore_ckpt)).precision;
            if (precision == Precision::f64) {
                restore_with<double>(restore_ckpt, inputs, restore_output, restore_jobs);
            } else {
                restore_with<float>(restore_ckpt, inputs, restore_output, restore_jobs);
            }
            out << "restored " << inputs.size() << " image(s) into " << restore_output << "\n";
            return 0;
        }
        if (*eval_cmd) {
            const auto refs = collect_inputs(eval_ref);
            const bool dir = fs::is_directory(eval_est);
            if (!dir && !fs::is_regular_file(eval_est)) throw Error("estimate '" + eval_est + "' does not exist");
            if (!dir && refs.size() != 1) throw Error("a single estimate file needs a single reference file");
            std::vector<double> p(refs.size()), s(refs.size());
            parallel_for(refs.size(), eval_jobs, [&](std::size_t i) {
                const auto est_path = dir ? fs::path(eval_est) / refs[i].filename() : fs::path(eval_est);
                if (!fs::is_regular_file(est_path)) throw Error("missing estimate " + est_path.string());
                const auto ref = load_image(refs[i]);
                const auto est = load_image(est_path);
                p[i] = psnr(est, ref);
                s[i] = ssim(est, ref);
            });
            MetricReport report;
            for (std::size_t i = 0; i < refs.size(); ++i) report.add(refs[i].filename().string(), p[i], s[i]);
            const auto table = report.to_table(',');
            out << table;
            if (!eval_csv.empty()) write_text(eval_csv, table);
            return 0;
        }
        if (*verify_cmd) {
            Precision precision = parse_precision(va.precision);
            if (!va.checkpoint.empty()) precision = read_checkpoint_config(fs::path(va.checkpoint)).precision;
            return precision == Precision::f64 ? run_verify<double>(va, out) : run_verify<float>(va, out);
        }
        if (*mi_cmd) return run_mi_demo(out);
        if (*degrade_cmd) {
            const auto config = degrade_flags.resolve();
            const auto spec = degradation_spec(config);
            spec.validate();
            const auto inputs = collect_inputs(degrade_input);
            fs::create_directories(degrade_output);
            for (std::size_t i = 0; i < inputs.size(); ++i) {
                const auto img = load_image(inputs[i]);
                const auto d = degrade(img, spec, mix_seed(config.seed, i));
                save_image(d.image, fs::path(degrade_output) / inputs[i].filename());
            }
            out << "degraded " << inputs.size() << " image(s) with " << to_string(spec.kind) << " into "
                << degrade_output << "\n";
            return 0;
        }
        if (*synth_cmd) {
            if (synth_channels != 1 && synth_channels != 3) throw Error("--channels must be 1 or 3");
            const auto images = synthetic_images(synth_count, synth_channels, synth_size, synth_size, synth_seed);
            fs::create_directories(synth_output);
            for (std::size_t i = 0; i < images.size(); ++i) {
                char name[32];
                std::snprintf(name, sizeof name, "img_%05zu", i);
                save_image(images[i], fs::path(synth_output) / (name + image_extension(images[i])));
            }
            out << "wrote " << images.size() << " image(s) to " << synth_output << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace

}  // namespace irae
