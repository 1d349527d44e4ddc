#include "tae/checkpoint.hpp"
#include "tae/diagnostics.hpp"
#include "tae/image_io.hpp"
#include "tae/morph.hpp"
#include "tae/rng.hpp"
#include "tae/train.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace tae;

namespace {

constexpr int exit_runtime = 1;
constexpr int exit_usage = 2;

// Bad flags, missing inputs, out-of-range indices: exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string data;
    std::string out;
};

struct TrainOptions {
    std::string config_file;
    std::optional<std::size_t> subset;
    std::optional<std::string> arch;
    std::optional<std::size_t> d, batch_size, epochs;
    std::optional<std::uint64_t> seed;
    std::optional<double> lr, lambda_rec, lambda_spring, lambda_quant, lambda_cls, radius_mu, radius_sigma;
};

struct MorphOptions {
    std::string checkpoint;
    std::vector<std::size_t> indices;
    bool random = false;
    std::optional<std::uint64_t> seed;
    std::string mode = "two_per_dim";
    std::size_t frames = 12;
    std::string format = "pgm";
};

struct ScatterOptions {
    std::string checkpoint;
    std::size_t count = 1000;
    bool json = false;
};

struct EvalOptions {
    std::string checkpoint;
    std::optional<std::size_t> count;
};

std::string default_data_dir()
{
    const char* env = std::getenv("TAE_DATA_DIR");
    return env ? env : "";
}

fs::path require_data_file(const std::string& dir, const std::string& stem)
{
    if (dir.empty()) throw UsageError("no data directory: pass --data or set TAE_DATA_DIR");
    for (const char* suffix : {"", ".gz"}) {
        const fs::path p = fs::path(dir) / (stem + suffix);
        if (fs::is_regular_file(p)) return p;
    }
    throw UsageError("missing data file " + (fs::path(dir) / stem).string() + " (or .gz)");
}

IdxDataset load_split(const std::string& dir, const std::string& prefix)
{
    const fs::path images = require_data_file(dir, prefix + "-images-idx3-ubyte");
    const fs::path labels = require_data_file(dir, prefix + "-labels-idx1-ubyte");
    return load_idx_dataset(images, labels);
}

fs::path prepare_out(const std::string& out)
{
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw UsageError("cannot create output directory " + out);
    return out;
}

TaeModel require_checkpoint(const std::string& path)
{
    if (!fs::is_regular_file(path)) throw UsageError("missing checkpoint " + path);
    return load_checkpoint(path);
}

nlohmann::json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config file " + path + " is not valid JSON: " + e.what());
    }
}

// CLI-level key accepted in config files next to the model keys.
constexpr const char* subset_key = "subset";

int cmd_train(const Common& common, const TrainOptions& o)
{
    nlohmann::json file = o.config_file.empty() ? nlohmann::json::object() : read_json_file(o.config_file);
    std::optional<std::size_t> subset = o.subset;
    if (file.is_object() && file.contains(subset_key)) {
        if (!subset) subset = file.at(subset_key).get<std::size_t>();
        file.erase(subset_key);
    }
    TaeConfig c = config_from_json(file);
    if (o.arch) c.arch = parse_architecture(*o.arch);
    if (o.d) c.torus_dims = *o.d;
    if (o.batch_size) c.batch_size = *o.batch_size;
    if (o.epochs) c.epochs = *o.epochs;
    if (o.seed) c.seed = *o.seed;
    if (o.lr) c.adam.learning_rate = *o.lr;
    if (o.lambda_rec) c.weights.reconstruction = *o.lambda_rec;
    if (o.lambda_spring) c.weights.spring = *o.lambda_spring;
    if (o.lambda_quant) c.weights.quantile = *o.lambda_quant;
    if (o.lambda_cls) c.weights.classifier = *o.lambda_cls;
    if (o.radius_mu) c.radius_mu = *o.radius_mu;
    if (o.radius_sigma) c.radius_sigma = *o.radius_sigma;
    c.validate();

    const fs::path images = require_data_file(common.data, "train-images-idx3-ubyte");
    const fs::path labels = require_data_file(common.data, "train-labels-idx1-ubyte");
    const fs::path out = prepare_out(common.out);

    IdxDataset data = load_idx_dataset(images, labels);
    if (subset) {
        if (*subset == 0 || *subset > data.size())
            throw UsageError("--subset " + std::to_string(*subset) + " must be in [1, " + std::to_string(data.size()) + "]");
        data = slice(data, 0, *subset);
    }
    if (c.batch_size > data.size())
        throw UsageError("batch size " + std::to_string(c.batch_size) + " exceeds the " + std::to_string(data.size()) +
                         " training images");

    nlohmann::json effective = to_json(c);
    if (subset) effective[subset_key] = *subset;
    write_text(out / "config.json", effective.dump(2) + "\n");

    std::printf("training %s, d=%zu, S=%zu, %zu epochs on %zu images\n", to_string(c.arch).c_str(), c.torus_dims,
                c.batch_size, c.epochs, data.size());
    TaeModel model(c);
    TrainHooks hooks;
    hooks.on_epoch = [](const EpochRecord& e) {
        std::printf("epoch %3zu  rec %.5f  spring %.4f  quant %.4f  cls %.4f  acc %.3f\n", e.epoch, e.loss_rec,
                    e.loss_spring, e.loss_quant, e.loss_cls, e.cls_accuracy);
        std::fflush(stdout);
    };
    hooks.warn = [](const std::string& msg) { std::fprintf(stderr, "warning: %s\n", msg.c_str()); };
    const TrainingLog log = train(model, data, hooks);

    save_checkpoint(model, out / "checkpoint.tae");
    write_text(out / "train_log.csv", log.to_csv());
    std::printf("wrote %s, %s, %s\n", (out / "checkpoint.tae").c_str(), (out / "train_log.csv").c_str(),
                (out / "config.json").c_str());
    return 0;
}

int cmd_morph(const Common& common, const MorphOptions& o)
{
    const PathMode mode = parse_path_mode(o.mode);
    const ImageFormat format = parse_image_format(o.format);
    if (o.frames < 2) throw UsageError("--frames must be at least 2");
    if (o.random == !o.indices.empty()) throw UsageError("pass exactly one of --indices I J or --random");
    const TaeModel model = require_checkpoint(o.checkpoint);
    const IdxDataset val = load_split(common.data, "t10k");
    const fs::path out = prepare_out(common.out);

    std::size_t a, b;
    if (o.random) {
        Rng rng(mix_seed(o.seed.value_or(model.config().seed), 0x6d6f7270));
        a = rng.below(val.size());
        b = rng.below(val.size());
    } else {
        a = o.indices[0];
        b = o.indices[1];
    }
    for (std::size_t i : {a, b})
        if (i >= val.size())
            throw UsageError("index " + std::to_string(i) + " outside the validation set of " + std::to_string(val.size()));

    const std::vector<std::size_t> rows{a, b};
    const LatentBatch latent = encode(model, gather(val, rows).images);
    const LatentPoint from = latent_row(latent, 0), to = latent_row(latent, 1);
    const auto pa = polar_point(from).angle, pb = polar_point(to).angle;

    std::vector<MorphPath> paths;
    std::vector<Tensor> frames;
    for (const auto& k : path_set(pa, pb, mode)) {
        paths.push_back({from, to, k, o.frames});
        frames.push_back(interpolate(model, paths.back()));
    }

    const fs::path grid = out / ("morph." + o.format);
    write_image(render_grid(frames), grid, format);
    write_text(out / "morph_latents.csv", path_latents_csv(paths));

    std::printf("morph %zu -> %zu (labels %d -> %d): %zu paths x %zu frames\n", a, b, val.labels[a], val.labels[b],
                paths.size(), o.frames);
    for (std::size_t p = 0; p < paths.size(); ++p) {
        std::printf("  row %zu: k = (", p);
        for (std::size_t i = 0; i < paths[p].k.size(); ++i) std::printf(i ? ", %d" : "%d", paths[p].k[i]);
        std::printf(")\n");
    }
    std::printf("wrote %s, %s\n", grid.c_str(), (out / "morph_latents.csv").c_str());
    return 0;
}

int cmd_scatter(const Common& common, const ScatterOptions& o)
{
    const TaeModel model = require_checkpoint(o.checkpoint);
    IdxDataset val = load_split(common.data, "t10k");
    const fs::path out = prepare_out(common.out);

    std::size_t n = o.count;
    if (n == 0) throw UsageError("-n must be positive");
    if (n > val.size()) {
        std::fprintf(stderr, "warning: -n %zu exceeds the %zu validation images; using %zu\n", n, val.size(), val.size());
        n = val.size();
    }
    val = slice(val, 0, n);
    const Evaluation ev = evaluate(model, val);
    const LatentReport report = latent_report(ev.latent);

    scatter_export(ev.latent, val.labels, out / "scatter.csv");
    write_text(out / "report.txt", format_report(report));
    if (o.json) {
        const std::string j = report_to_json(report).dump(2) + "\n";
        write_text(out / "report.json", j);
        std::fputs(j.c_str(), stdout);
    } else {
        std::fputs(format_report(report).c_str(), stdout);
    }
    return 0;
}

int cmd_eval(const Common& common, const EvalOptions& o)
{
    const TaeModel model = require_checkpoint(o.checkpoint);
    IdxDataset val = load_split(common.data, "t10k");
    const fs::path out = prepare_out(common.out);
    if (o.count) {
        if (*o.count == 0 || *o.count > val.size())
            throw UsageError("-n must be in [1, " + std::to_string(val.size()) + "]");
        val = slice(val, 0, *o.count);
    }

    const Evaluation ev = evaluate(model, val);
    const LatentReport report = latent_report(ev.latent);
    nlohmann::json j = {{"samples", val.size()},
                        {"reconstruction_mse", ev.reconstruction_mse},
                        {"cls_accuracy", ev.cls_accuracy},
                        {"latent", report_to_json(report)}};
    write_text(out / "eval.json", j.dump(2) + "\n");
    std::printf("samples %zu\nreconstruction MSE %.6f\nclassifier accuracy %.4f\n\n%s", val.size(),
                ev.reconstruction_mse, ev.cls_accuracy, format_report(report).c_str());
    return 0;
}

void add_common(CLI::App* cmd, Common& common)
{
    cmd->add_option("--data", common.data, "Directory with the MNIST IDX files (default: $TAE_DATA_DIR)")
        ->capture_default_str();
    cmd->add_option("--out", common.out, "Output directory, created if missing")->required();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Toroidal autoencoder: train, morph, scatter, eval"};
    app.require_subcommand(1);

    Common common;
    common.data = default_data_dir();

    TrainOptions train_opts;
    auto* train_cmd = app.add_subcommand("train", "Train a model and write checkpoint.tae, train_log.csv, config.json");
    add_common(train_cmd, common);
    train_cmd->add_option("--config", train_opts.config_file, "JSON file with flat config keys; flags override it");
    train_cmd->add_option("--subset", train_opts.subset, "Train on the first N training images (default: all)");
    train_cmd->add_option("--arch", train_opts.arch, "conv or dense (default: conv)");
    train_cmd->add_option("--d", train_opts.d, "Torus dimensions (default: 3)");
    train_cmd->add_option("--batch-size", train_opts.batch_size, "Batch size S (default: 128)");
    train_cmd->add_option("--epochs", train_opts.epochs, "Epochs (default: 20)");
    train_cmd->add_option("--seed", train_opts.seed, "PRNG seed for init and shuffling (default: 1)");
    train_cmd->add_option("--lr", train_opts.lr, "Adam learning rate (default: 0.001)");
    train_cmd->add_option("--lambda-rec", train_opts.lambda_rec, "Reconstruction weight (default: 1)");
    train_cmd->add_option("--lambda-spring", train_opts.lambda_spring, "Spring loss weight");
    train_cmd->add_option("--lambda-quant", train_opts.lambda_quant, "Quantile loss weight");
    train_cmd->add_option("--lambda-cls", train_opts.lambda_cls, "Classifier weight");
    train_cmd->add_option("--radius-mu", train_opts.radius_mu, "Mean of the squared-radius target (default: 1)");
    train_cmd->add_option("--radius-sigma", train_opts.radius_sigma, "Std of the squared-radius target (default: 0.1)");

    MorphOptions morph_opts;
    auto* morph_cmd = app.add_subcommand("morph", "Decode multi-path torus interpolations between two validation images");
    add_common(morph_cmd, common);
    morph_cmd->add_option("--checkpoint", morph_opts.checkpoint, "Checkpoint written by train")->required();
    auto* indices = morph_cmd->add_option("--indices", morph_opts.indices, "Two validation indices I J")->expected(2);
    auto* random = morph_cmd->add_flag("--random", morph_opts.random, "Pick both endpoints at random");
    indices->excludes(random);
    morph_cmd->add_option("--seed", morph_opts.seed, "Seed for --random (default: the checkpoint's seed)");
    morph_cmd->add_option("--mode", morph_opts.mode, "two_per_dim (2^d paths) or full (3^d paths)")
        ->capture_default_str();
    morph_cmd->add_option("--frames", morph_opts.frames, "Frames per path")->capture_default_str();
    morph_cmd->add_option("--format", morph_opts.format, "Grid image format: pgm or png")->capture_default_str();

    ScatterOptions scatter_opts;
    auto* scatter_cmd = app.add_subcommand("scatter", "Encode validation images; write scatter.csv and a latent report");
    add_common(scatter_cmd, common);
    scatter_cmd->add_option("--checkpoint", scatter_opts.checkpoint, "Checkpoint written by train")->required();
    scatter_cmd->add_option("-n", scatter_opts.count, "Number of validation images (clamped to the set size)")
        ->capture_default_str();
    scatter_cmd->add_flag("--json", scatter_opts.json, "Also write report.json and print the report as JSON");

    EvalOptions eval_opts;
    auto* eval_cmd = app.add_subcommand("eval", "Reconstruction MSE, classifier accuracy and latent report on validation");
    add_common(eval_cmd, common);
    eval_cmd->add_option("--checkpoint", eval_opts.checkpoint, "Checkpoint written by train")->required();
    eval_cmd->add_option("-n", eval_opts.count, "Use the first N validation images (default: all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        if (*train_cmd) return cmd_train(common, train_opts);
        if (*morph_cmd) return cmd_morph(common, morph_opts);
        if (*scatter_cmd) return cmd_scatter(common, scatter_opts);
        return cmd_eval(common, eval_opts);
    } catch (const NumericError& e) {
        std::fprintf(stderr, "error: training aborted, %s loss is not finite: %s\n", e.term().c_str(), e.what());
        return exit_runtime;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_usage;
    } catch (const IdxError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_usage;
    } catch (const CheckpointError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_usage;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "error: bad config value: %s\n", e.what());
        return exit_usage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_runtime;
    }
}
