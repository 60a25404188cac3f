// vtm: 3D human motion from 2D keypoint sequences.
//
// Subcommands cover the full workflow: generating synthetic motion files,
// preparing a training dataset, the two training stages, reconstruction,
// evaluation against ground truth, and autodiff diagnostics. Every failure
// exits nonzero with a single "E_CODE: message" line on stderr.

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vtm/config.hpp"
#include "vtm/dataset.hpp"
#include "vtm/errors.hpp"
#include "vtm/pipeline.hpp"
#include "vtm/synth.hpp"
#include "vtm/training.hpp"

namespace {

constexpr const char* kTrainConfigHelp =
    "Config file keys (key = value), with defaults:\n"
    "  epochs = 500\n"
    "  batch = 100              (train-vtm default: 64)\n"
    "  lr = 1e-4\n"
    "  lr_decay_interval = 100  (epochs between lr halvings)\n"
    "  lr_decay_factor = 0.5\n"
    "  weight_decay = 1e-4\n"
    "  seed = 0\n"
    "  threads = 1\n"
    "  window = 32              (training window length, multiple of 4)\n"
    "  stride = 4               (window enumeration stride)\n"
    "  feature_mode = zeros     (train-vtm: zeros | file)\n"
    "  feature_dim = 512        (train-vtm: visual feature channels)\n"
    "The VTM_SEED environment variable overrides the config seed; an\n"
    "explicit --seed flag overrides both.";

struct TrainArgs {
    std::string dataset;
    std::string output;
    std::string config_path;
    std::string tpmae_path; // joint stage only
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

struct TrainSettings {
    vtm::TrainConfig config;
    int window = 32;
    int stride = 4;
    vtm::FeatureProvider provider;
};

std::uint64_t parse_env_seed(const char* text) {
    std::uint64_t value = 0;
    const char* end = text + std::string(text).size();
    const auto res = std::from_chars(text, end, value);
    if (res.ec != std::errc() || res.ptr != end) {
        throw vtm::ConfigError(std::string("VTM_SEED must be an unsigned "
                                           "integer, got '") +
                               text + "'");
    }
    return value;
}

TrainSettings load_train_settings(const TrainArgs& args, bool joint_stage) {
    TrainSettings s;
    s.config.batch = joint_stage ? 64 : 100;
    std::string feature_mode = "zeros";
    int feature_dim = 512;
    if (!args.config_path.empty()) {
        const vtm::Config file = vtm::load_config(args.config_path);
        static const std::set<std::string> known = {
            "epochs",       "batch",           "lr",
            "lr_decay_interval", "lr_decay_factor", "weight_decay",
            "seed",         "threads",         "window",
            "stride",       "feature_mode",    "feature_dim"};
        for (const auto& [key, value] : file.values) {
            if (known.find(key) == known.end()) {
                throw vtm::ConfigError("unknown config key '" + key + "'");
            }
        }
        s.config.epochs =
            static_cast<int>(file.get_int("epochs", s.config.epochs));
        s.config.batch =
            static_cast<int>(file.get_int("batch", s.config.batch));
        s.config.lr = file.get_double("lr", s.config.lr);
        s.config.lr_decay_interval = static_cast<int>(
            file.get_int("lr_decay_interval", s.config.lr_decay_interval));
        s.config.lr_decay_factor =
            file.get_double("lr_decay_factor", s.config.lr_decay_factor);
        s.config.weight_decay =
            file.get_double("weight_decay", s.config.weight_decay);
        s.config.seed = file.get_u64("seed", s.config.seed);
        s.config.threads =
            static_cast<int>(file.get_int("threads", s.config.threads));
        s.window = static_cast<int>(file.get_int("window", s.window));
        s.stride = static_cast<int>(file.get_int("stride", s.stride));
        feature_mode = file.get_string("feature_mode", feature_mode);
        feature_dim =
            static_cast<int>(file.get_int("feature_dim", feature_dim));
    }
    if (const char* env = std::getenv("VTM_SEED")) {
        s.config.seed = parse_env_seed(env);
    }
    if (args.seed) {
        s.config.seed = *args.seed;
    }
    if (args.threads) {
        s.config.threads = *args.threads;
    }
    if (s.window <= 0 || s.window % 4 != 0) {
        throw vtm::ConfigError("window must be a positive multiple of 4");
    }
    if (s.stride <= 0) {
        throw vtm::ConfigError("stride must be positive");
    }
    if (feature_mode == "zeros") {
        s.provider.mode = vtm::FeatureProvider::Mode::kZeros;
    } else if (feature_mode == "file") {
        s.provider.mode = vtm::FeatureProvider::Mode::kFile;
    } else {
        throw vtm::ConfigError("feature_mode must be 'zeros' or 'file', got '" +
                               feature_mode + "'");
    }
    s.provider.feature_dim = feature_dim;
    return s;
}

struct LoadedDataset {
    vtm::Dataset dataset;
    std::vector<vtm::SequenceSample> samples;
    std::vector<vtm::TrainingWindow> windows;
};

LoadedDataset load_for_training(const std::string& dir,
                                const TrainSettings& s) {
    LoadedDataset d;
    d.dataset = vtm::open_dataset(dir);
    d.samples = d.dataset.load_all();
    d.windows = vtm::make_windows(d.samples, s.window, s.stride);
    if (d.windows.empty()) {
        throw vtm::ConfigError("dataset " + dir + " yields no " +
                               std::to_string(s.window) + "-frame windows");
    }
    return d;
}

void report_training(const vtm::TrainResult& result,
                     const std::string& output) {
    vtm::save_checkpoint(result.checkpoint, output);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", result.final_loss);
    std::cout << "final_loss: " << buf << "\n"
              << "checkpoint: " << output << "\n";
}

int cmd_synth(const std::string& out_dir, int sequences, int frames,
              std::uint64_t seed) {
    vtm::SynthOptions opts;
    opts.sequences = sequences;
    opts.frames = frames;
    opts.seed = seed;
    const std::vector<std::string> files = vtm::synth_bvh_files(opts, out_dir);
    std::cout << "wrote " << files.size()
              << " motion files and camera.txt under " << out_dir << "\n";
    return 0;
}

int cmd_prepare(const std::string& input, const std::string& camera,
                const std::string& output) {
    const vtm::PrepareResult res = vtm::prepare_dataset(input, camera, output);
    for (const std::string& line : res.skipped) {
        std::cerr << "skipped " << line << "\n";
    }
    std::cout << "prepared " << res.dataset.entries.size()
              << " sequences into " << output << "\n";
    return 0;
}

int cmd_train_tpmae(const TrainArgs& args) {
    const TrainSettings s = load_train_settings(args, false);
    const LoadedDataset d = load_for_training(args.dataset, s);
    std::vector<vtm::MotionSequence> motions;
    motions.reserve(d.samples.size());
    for (const vtm::SequenceSample& sample : d.samples) {
        motions.push_back(sample.motion);
    }
    const vtm::NormStats stats = vtm::compute_motion_stats(motions);
    std::cout << "training on " << d.windows.size() << " windows\n";
    const vtm::TrainResult result = vtm::train_tpmae(
        d.windows, d.dataset.virtual_skeleton, stats, s.config, &std::cout);
    report_training(result, args.output);
    return 0;
}

int cmd_train_vtm(const TrainArgs& args) {
    const TrainSettings s = load_train_settings(args, true);
    const LoadedDataset d = load_for_training(args.dataset, s);
    const vtm::Checkpoint tpmae = vtm::load_checkpoint(args.tpmae_path);
    std::cout << "training on " << d.windows.size() << " windows\n";
    const vtm::TrainResult result = vtm::train_vtm(
        d.windows, d.dataset.camera, tpmae, s.provider, s.config, &std::cout);
    report_training(result, args.output);
    return 0;
}

int cmd_reconstruct(const std::string& input, const std::string& sequence_id,
                    const std::string& checkpoint_path,
                    const std::string& camera_path,
                    const std::string& features_path,
                    const std::string& output, double frame_time) {
    const vtm::Checkpoint ckpt = vtm::load_checkpoint(checkpoint_path);

    vtm::KeypointSequence keypoints;
    std::vector<double> features;
    vtm::Camera cam;
    bool have_camera = false;
    if (std::filesystem::is_directory(input)) {
        vtm::Dataset ds = vtm::open_dataset(input);
        const vtm::ManifestEntry* entry = nullptr;
        if (sequence_id.empty()) {
            entry = &ds.entries.front();
        } else {
            for (const vtm::ManifestEntry& e : ds.entries) {
                if (e.sequence_id == sequence_id) {
                    entry = &e;
                    break;
                }
            }
            if (!entry) {
                throw vtm::ConfigError("sequence '" + sequence_id +
                                       "' is not in the dataset manifest");
            }
        }
        const vtm::SequenceSample sample = ds.load_sequence(*entry);
        keypoints = sample.keypoints;
        features = sample.features;
        cam = ds.camera;
        have_camera = true;
        std::cout << "sequence: " << entry->sequence_id << "\n";
    } else {
        keypoints =
            vtm::keypoints_from_record(vtm::load_array_record(input));
        if (!sequence_id.empty()) {
            throw vtm::ConfigError(
                "--sequence only applies to dataset directories");
        }
    }
    if (!camera_path.empty()) {
        cam = vtm::load_camera(camera_path);
        have_camera = true;
    }
    if (!have_camera) {
        throw vtm::ConfigError(
            "--camera is required when the input is a keypoints file");
    }
    if (!features_path.empty()) {
        const vtm::ArrayRecord rec = vtm::load_array_record(features_path);
        features = rec.data;
    }

    const vtm::Reconstruction recon =
        vtm::reconstruct_sequence(keypoints, features, ckpt, cam);
    vtm::save_reconstruction(recon, cam, frame_time, output);
    std::cout << "frames: " << recon.poses.size() << "\n"
              << "wrote: " << output << "\n"
              << "wrote: " << vtm::root_track_path(output) << "\n";
    return 0;
}

int cmd_evaluate(const std::string& pred_path, const std::string& gt_path) {
    const vtm::LoadedMotion pred = vtm::load_motion_bvh(pred_path);
    const vtm::LoadedMotion gt = vtm::load_motion_bvh(gt_path);
    std::cout << vtm::evaluate_motions(pred, gt).to_text();
    return 0;
}

int cmd_gradcheck(std::uint64_t seed, double tolerance) {
    const vtm::DiagnosticReport report = vtm::run_gradient_diagnostics(seed);
    std::cout << report.to_text();
    if (report.pass(tolerance)) {
        std::cout << "gradient check: PASS (tolerance " << tolerance << ")\n";
        return 0;
    }
    std::cout << "gradient check: FAIL (tolerance " << tolerance << ")\n";
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"3D human motion reconstruction from 2D keypoint sequences"};
    app.require_subcommand(1);
    int exit_code = 0;

    // synth
    std::string synth_out;
    int synth_sequences = 3;
    int synth_frames = 64;
    std::uint64_t synth_seed = 0;
    CLI::App* synth = app.add_subcommand(
        "synth", "Generate procedural motion files plus a camera file");
    synth->add_option("--output", synth_out, "Output directory")->required();
    synth->add_option("--sequences", synth_sequences, "Number of sequences")
        ->capture_default_str();
    synth->add_option("--frames", synth_frames, "Frames per sequence (>= 32)")
        ->capture_default_str();
    synth->add_option("--seed", synth_seed, "Generator seed")
        ->capture_default_str();
    synth->callback([&] {
        exit_code = cmd_synth(synth_out, synth_sequences, synth_frames,
                              synth_seed);
    });

    // prepare
    std::string prep_input, prep_camera, prep_output;
    CLI::App* prepare = app.add_subcommand(
        "prepare",
        "Convert a directory of BVH files into a training dataset");
    prepare->add_option("--input", prep_input, "Directory with *.bvh files")
        ->required();
    prepare->add_option("--camera", prep_camera, "Camera description file")
        ->required();
    prepare->add_option("--output", prep_output, "Dataset directory")
        ->required();
    prepare->callback(
        [&] { exit_code = cmd_prepare(prep_input, prep_camera, prep_output); });

    // train-tpmae
    TrainArgs tpmae_args;
    CLI::App* train_tpmae = app.add_subcommand(
        "train-tpmae", "Train the two-part motion autoencoder");
    train_tpmae->add_option("--dataset", tpmae_args.dataset,
                            "Prepared dataset directory")
        ->required();
    train_tpmae->add_option("--output", tpmae_args.output, "Checkpoint path")
        ->required();
    train_tpmae->add_option("--config", tpmae_args.config_path,
                            "Config file (key = value)");
    train_tpmae->add_option("--seed", tpmae_args.seed,
                            "Overrides the config seed");
    train_tpmae->add_option("--threads", tpmae_args.threads,
                            "Batch shards with deterministic reduction");
    train_tpmae->footer(kTrainConfigHelp);
    train_tpmae->callback([&] { exit_code = cmd_train_tpmae(tpmae_args); });

    // train-vtm
    TrainArgs vtm_args;
    CLI::App* train_vtm = app.add_subcommand(
        "train-vtm",
        "Train the visual encoder jointly with a pre-trained motion "
        "autoencoder");
    train_vtm->add_option("--dataset", vtm_args.dataset,
                          "Prepared dataset directory")
        ->required();
    train_vtm->add_option("--tpmae", vtm_args.tpmae_path,
                          "Motion autoencoder checkpoint")
        ->required();
    train_vtm->add_option("--output", vtm_args.output, "Checkpoint path")
        ->required();
    train_vtm->add_option("--config", vtm_args.config_path,
                          "Config file (key = value)");
    train_vtm->add_option("--seed", vtm_args.seed,
                          "Overrides the config seed");
    train_vtm->add_option("--threads", vtm_args.threads,
                          "Batch shards with deterministic reduction");
    train_vtm->footer(kTrainConfigHelp);
    train_vtm->callback([&] { exit_code = cmd_train_vtm(vtm_args); });

    // reconstruct
    std::string rec_input, rec_sequence, rec_checkpoint, rec_camera,
        rec_features, rec_output;
    double rec_frame_time = 1.0 / 30.0;
    CLI::App* reconstruct = app.add_subcommand(
        "reconstruct",
        "Reconstruct 3D motion from keypoints with a trained checkpoint");
    reconstruct->add_option("--input", rec_input,
                            "Keypoints array file or dataset directory")
        ->required();
    reconstruct->add_option("--sequence", rec_sequence,
                            "Sequence id when the input is a dataset "
                            "(default: first entry)");
    reconstruct->add_option("--checkpoint", rec_checkpoint,
                            "Joint-stage checkpoint")
        ->required();
    reconstruct->add_option("--camera", rec_camera,
                            "Camera file (defaults to the dataset camera)");
    reconstruct->add_option("--features", rec_features,
                            "Per-frame feature array file (file mode)");
    reconstruct->add_option("--output", rec_output, "Output BVH path")
        ->required();
    reconstruct->add_option("--frame-time", rec_frame_time,
                            "Seconds per frame in the output")
        ->capture_default_str();
    reconstruct->callback([&] {
        exit_code = cmd_reconstruct(rec_input, rec_sequence, rec_checkpoint,
                                    rec_camera, rec_features, rec_output,
                                    rec_frame_time);
    });

    // evaluate
    std::string eval_pred, eval_gt;
    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "Compare a predicted motion against ground truth");
    evaluate->add_option("--pred", eval_pred, "Predicted BVH file")
        ->required();
    evaluate->add_option("--gt", eval_gt, "Ground-truth BVH file")->required();
    evaluate->callback([&] { exit_code = cmd_evaluate(eval_pred, eval_gt); });

    // gradcheck
    std::uint64_t gc_seed = 0;
    double gc_tolerance = 1e-4;
    CLI::App* gradcheck = app.add_subcommand(
        "gradcheck",
        "Check every autodiff operation and both training loss graphs "
        "against finite differences");
    gradcheck->add_option("--seed", gc_seed, "Diagnostics seed")
        ->capture_default_str();
    gradcheck->add_option("--tolerance", gc_tolerance,
                          "Maximum relative error")
        ->capture_default_str();
    gradcheck->callback(
        [&] { exit_code = cmd_gradcheck(gc_seed, gc_tolerance); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e); // --help and friends
        }
        std::cerr << "E_CONFIG: " << e.what() << "\n";
        return 1;
    } catch (const vtm::Error& e) {
        std::cerr << e.code() << ": " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
