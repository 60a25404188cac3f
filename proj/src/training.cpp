#include "vtm/training.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <functional>
#include <numeric>
#include <thread>

#include "vtm/errors.hpp"
#include "vtm/optim.hpp"

namespace vtm {

double lr_for_epoch(double base_lr, int epoch, int interval, double factor) {
    if (base_lr <= 0.0 || epoch < 0 || interval < 1 || factor <= 0.0) {
        throw ConfigError("lr_for_epoch: invalid schedule arguments");
    }
    double lr = base_lr;
    for (int k = 0; k < epoch / interval; ++k) {
        lr *= factor;
    }
    return lr;
}

void TrainConfig::validate() const {
    if (epochs < 1 || batch < 1 || threads < 1 || lr_decay_interval < 1) {
        throw ConfigError("training config: epochs, batch, threads and "
                          "lr_decay_interval must all be at least 1");
    }
    if (lr <= 0.0 || lr_decay_factor <= 0.0 || weight_decay < 0.0) {
        throw ConfigError("training config: lr and lr_decay_factor must be "
                          "positive, weight_decay non-negative");
    }
    joint_weights.validate();
}

namespace {

// Constant input/target tensors for one window, built once before the loop.
struct Prepared {
    ad::Tensor x_upper, x_lower;              // standardized motion parts
    ad::Tensor target_root, target_non_root;  // [8, T] / [276, T]
    ad::Tensor kp_upper, kp_lower;            // joint stage only
    ad::Tensor features, ratios;              // joint stage only
};

std::vector<int> non_root_joints() {
    std::vector<int> joints(kJointCount - 1);
    std::iota(joints.begin(), joints.end(), 1);
    return joints;
}

Prepared prepare_motion(const TrainingWindow& w, const NormStats& stats,
                        const BodyPartition& partition) {
    const int frames = w.motion.frames;
    if (frames <= 0 || frames % 4 != 0) {
        throw ShapeError("training windows must cover a positive multiple of "
                         "4 frames");
    }
    const int mc = MotionSequence::kChannels;
    const std::vector<double> fm = standardize_motion(w.motion, stats);

    Prepared p;
    p.x_upper = ad::Tensor::constant(
        {ModelDims::upper_motion, frames},
        to_channel_major(select_joints(fm, frames, mc, partition.upper), frames,
                         ModelDims::upper_motion));
    p.x_lower = ad::Tensor::constant(
        {ModelDims::lower_motion, frames},
        to_channel_major(select_joints(fm, frames, mc, partition.lower), frames,
                         ModelDims::lower_motion));
    p.target_non_root = ad::Tensor::constant(
        {ModelDims::non_root_out, frames},
        to_channel_major(select_joints(fm, frames, mc, non_root_joints()),
                         frames, ModelDims::non_root_out));

    // Root targets: six rotation channels, camera-space z and z velocity.
    static constexpr int kRootChannels[ModelDims::root_out] = {0, 1, 2, 3,
                                                               4, 5, 8, 11};
    std::vector<double> root_fm(static_cast<size_t>(frames) * ModelDims::root_out);
    for (int t = 0; t < frames; ++t) {
        for (int i = 0; i < ModelDims::root_out; ++i) {
            root_fm[static_cast<size_t>(t) * ModelDims::root_out + i] =
                fm[static_cast<size_t>(t) * kJointCount * mc + kRootChannels[i]];
        }
    }
    p.target_root = ad::Tensor::constant(
        {ModelDims::root_out, frames},
        to_channel_major(root_fm, frames, ModelDims::root_out));
    return p;
}

void prepare_visual(Prepared& p, const TrainingWindow& w, const Camera& cam,
                    const FeatureProvider& provider,
                    const BodyPartition& partition) {
    const int frames = w.keypoints.frames;
    if (frames != w.motion.frames) {
        throw MismatchError("window keypoints and motion cover different "
                            "frame counts");
    }
    const int kc = KeypointSequence::kChannels;
    const std::vector<double> norm = normalize_keypoints(w.keypoints, cam);
    p.kp_upper = ad::Tensor::constant(
        {ModelDims::upper_keypoints, frames},
        to_channel_major(select_joints(norm, frames, kc, partition.upper),
                         frames, ModelDims::upper_keypoints));
    p.kp_lower = ad::Tensor::constant(
        {ModelDims::lower_keypoints, frames},
        to_channel_major(select_joints(norm, frames, kc, partition.lower),
                         frames, ModelDims::lower_keypoints));
    p.features = provider.features_for(w.features, frames);
    if (w.ratios.values.size() != static_cast<size_t>(kBoneCount)) {
        throw ShapeError("window bone ratios must have 23 entries");
    }
    p.ratios = ad::Tensor::constant({kBoneCount}, w.ratios.values);
}

std::string format_epoch_line(int epoch, double lr,
                              const std::vector<double>& components) {
    char buf[40];
    std::string line = std::to_string(epoch);
    std::snprintf(buf, sizeof(buf), ", %.17g", lr);
    line += buf;
    for (double c : components) {
        std::snprintf(buf, sizeof(buf), ", %.17g", c);
        line += buf;
    }
    return line;
}

// Runs one window: builds the loss graph, calls backward(1/batch) and
// returns the component values, total first.
using WindowFn =
    std::function<std::vector<double>(int worker, size_t window, double inv_batch)>;

// One epoch of shuffled mini-batches. `worker_params[k]` aliases
// `master_params` for thread k; gradients are reduced worker by worker in
// fixed order so results do not depend on thread timing. Returns per-window
// means of the components produced by `run_window`.
std::vector<double> run_epoch(const TrainConfig& config, nn::AdamW& opt,
                              nn::Rng& shuffle_rng, size_t window_count,
                              size_t component_count,
                              const std::vector<ad::Tensor*>& master_params,
                              const std::vector<std::vector<ad::Tensor*>>& worker_params,
                              const WindowFn& run_window) {
    std::vector<size_t> order(window_count);
    std::iota(order.begin(), order.end(), size_t{0});
    for (size_t i = window_count - 1; i > 0; --i) {
        const size_t j = static_cast<size_t>(shuffle_rng.next() % (i + 1));
        std::swap(order[i], order[j]);
    }

    std::vector<double> sums(component_count, 0.0);
    const size_t batch = static_cast<size_t>(config.batch);
    for (size_t start = 0; start < window_count; start += batch) {
        const size_t bsz = std::min(batch, window_count - start);
        const double inv_b = 1.0 / static_cast<double>(bsz);
        opt.zero_grad();

        if (config.threads == 1) {
            for (size_t i = start; i < start + bsz; ++i) {
                const std::vector<double> comps = run_window(-1, order[i], inv_b);
                for (size_t c = 0; c < component_count; ++c) {
                    sums[c] += comps[c];
                }
            }
        } else {
            const size_t workers = static_cast<size_t>(config.threads);
            const size_t per = (bsz + workers - 1) / workers;
            std::vector<std::vector<double>> worker_sums(
                workers, std::vector<double>(component_count, 0.0));
            std::vector<std::exception_ptr> errors(workers);
            std::vector<std::thread> pool;
            for (size_t k = 0; k < workers; ++k) {
                const size_t lo = start + k * per;
                const size_t hi = std::min(start + bsz, lo + per);
                if (lo >= hi) {
                    break;
                }
                pool.emplace_back([&, k, lo, hi]() {
                    try {
                        for (size_t i = lo; i < hi; ++i) {
                            const std::vector<double> comps =
                                run_window(static_cast<int>(k), order[i], inv_b);
                            for (size_t c = 0; c < component_count; ++c) {
                                worker_sums[k][c] += comps[c];
                            }
                        }
                    } catch (...) {
                        errors[k] = std::current_exception();
                    }
                });
            }
            for (std::thread& t : pool) {
                t.join();
            }
            for (const std::exception_ptr& e : errors) {
                if (e) {
                    std::rethrow_exception(e);
                }
            }
            // Fixed-order reduction: worker 0 first, then 1, ...
            for (size_t k = 0; k < workers; ++k) {
                for (size_t pi = 0; pi < master_params.size(); ++pi) {
                    ad::Tensor* alias = worker_params[k][pi];
                    if (alias->grad().empty()) {
                        continue;
                    }
                    std::vector<double>& mg = master_params[pi]->grad();
                    const std::vector<double>& ag = alias->grad();
                    for (size_t v = 0; v < mg.size(); ++v) {
                        mg[v] += ag[v];
                    }
                    alias->zero_grad();
                }
                for (size_t c = 0; c < component_count; ++c) {
                    sums[c] += worker_sums[k][c];
                }
            }
        }
        opt.step();
    }

    for (double& s : sums) {
        s /= static_cast<double>(window_count);
    }
    return sums;
}

std::vector<ad::Tensor*> tensor_pointers(const nn::NamedParams& named) {
    std::vector<ad::Tensor*> out;
    out.reserve(named.size());
    for (const auto& [name, tensor] : named) {
        out.push_back(tensor);
    }
    return out;
}

void emit(TrainResult& result, std::ostream* log, const std::string& line) {
    result.log_lines.push_back(line);
    if (log != nullptr) {
        *log << line << '\n';
    }
}

void check_stats(const NormStats& stats) {
    if (stats.mean.size() != NormStats::kChannelCount ||
        stats.stdev.size() != NormStats::kChannelCount) {
        throw ShapeError("standardization stats must cover 288 channels");
    }
}

} // namespace

TrainResult train_tpmae(const std::vector<TrainingWindow>& windows,
                        const Skeleton& virtual_skeleton,
                        const NormStats& stats, const TrainConfig& config,
                        std::ostream* log) {
    config.validate();
    check_stats(stats);
    virtual_skeleton.validate();
    if (windows.empty()) {
        throw ConfigError("training needs at least one window");
    }

    const BodyPartition partition = BodyPartition::canonical();
    std::vector<Prepared> prepared;
    prepared.reserve(windows.size());
    for (const TrainingWindow& w : windows) {
        prepared.push_back(prepare_motion(w, stats, partition));
    }

    TpmaeModel master = TpmaeModel::create(config.seed);
    const std::vector<ad::Tensor*> master_params = tensor_pointers(master.params());
    nn::AdamWConfig opt_config;
    opt_config.lr = config.lr;
    opt_config.weight_decay = config.weight_decay;
    nn::AdamW opt(master_params, opt_config);

    // Reserve first: worker_params keeps pointers into the vector's elements.
    std::vector<TpmaeModel> worker_models;
    std::vector<std::vector<ad::Tensor*>> worker_params;
    if (config.threads > 1) {
        worker_models.reserve(static_cast<size_t>(config.threads));
        for (int k = 0; k < config.threads; ++k) {
            worker_models.push_back(master.aliased());
            worker_params.push_back(tensor_pointers(worker_models.back().params()));
        }
    }

    const JointWeights& jw = config.joint_weights;
    const WindowFn run_window = [&](int worker, size_t idx,
                                    double inv_b) -> std::vector<double> {
        TpmaeModel& model = worker < 0 ? master
                                       : worker_models[static_cast<size_t>(worker)];
        const Prepared& p = prepared[idx];
        const TpmaeLatents z = tpmae_encode(p.x_upper, p.x_lower, model);
        const TpmaeOutput out = tpmae_decode(z.upper, z.lower, model);
        const ad::Tensor rec = motion_rec_loss(out.root, p.target_root,
                                               out.non_root, p.target_non_root, jw);
        const ad::Tensor smooth = smoothness_loss(out.root, p.target_root,
                                                  out.non_root, p.target_non_root, jw);
        ad::Tensor total = ad::add(rec, smooth);
        total.backward(inv_b);
        return {total.scalar(), rec.scalar(), smooth.scalar()};
    };

    TrainResult result;
    nn::Rng shuffle_rng(nn::seed_for(config.seed, "train.shuffle"));
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const double lr = lr_for_epoch(config.lr, epoch, config.lr_decay_interval,
                                       config.lr_decay_factor);
        opt.set_lr(lr);
        const std::vector<double> means =
            run_epoch(config, opt, shuffle_rng, prepared.size(), 3,
                      master_params, worker_params, run_window);
        result.final_loss = means[0];
        emit(result, log,
             format_epoch_line(epoch, lr, {means[1], means[2]}));
    }

    result.checkpoint.meta["kind"] = "tpmae";
    result.checkpoint.meta["seed"] = std::to_string(config.seed);
    result.checkpoint.meta["epochs"] = std::to_string(config.epochs);
    result.checkpoint.meta["batch"] = std::to_string(config.batch);
    result.checkpoint.skeleton = virtual_skeleton;
    result.checkpoint.partition = partition;
    result.checkpoint.stats = stats;
    store_params(result.checkpoint, master.params());
    return result;
}

TrainResult train_vtm(const std::vector<TrainingWindow>& windows,
                      const Camera& cam, const Checkpoint& tpmae_checkpoint,
                      const FeatureProvider& provider,
                      const TrainConfig& config, std::ostream* log) {
    config.validate();
    if (windows.empty()) {
        throw ConfigError("training needs at least one window");
    }
    if (require_meta(tpmae_checkpoint, "kind") != "tpmae") {
        throw CheckpointError("joint training expects a motion-autoencoder "
                              "checkpoint");
    }
    const NormStats& stats = tpmae_checkpoint.stats;
    check_stats(stats);

    const BodyPartition partition = BodyPartition::canonical();
    std::vector<Prepared> prepared;
    prepared.reserve(windows.size());
    for (const TrainingWindow& w : windows) {
        Prepared p = prepare_motion(w, stats, partition);
        prepare_visual(p, w, cam, provider, partition);
        prepared.push_back(std::move(p));
    }

    TpmaeModel tpmae = TpmaeModel::create(config.seed);
    load_params(tpmae_checkpoint, tpmae.params());
    TpveModel tpve = TpveModel::create(provider.feature_dim, config.seed);

    nn::NamedParams all_named = tpmae.params();
    {
        nn::NamedParams tpve_named = tpve.params();
        all_named.insert(all_named.end(), tpve_named.begin(), tpve_named.end());
    }
    const std::vector<ad::Tensor*> master_params = tensor_pointers(all_named);
    nn::AdamWConfig opt_config;
    opt_config.lr = config.lr;
    opt_config.weight_decay = config.weight_decay;
    nn::AdamW opt(master_params, opt_config);

    // Reserve first: worker_params keeps pointers into the vectors' elements.
    std::vector<TpmaeModel> tpmae_workers;
    std::vector<TpveModel> tpve_workers;
    std::vector<std::vector<ad::Tensor*>> worker_params;
    if (config.threads > 1) {
        tpmae_workers.reserve(static_cast<size_t>(config.threads));
        tpve_workers.reserve(static_cast<size_t>(config.threads));
        for (int k = 0; k < config.threads; ++k) {
            tpmae_workers.push_back(tpmae.aliased());
            tpve_workers.push_back(tpve.aliased());
            nn::NamedParams named = tpmae_workers.back().params();
            nn::NamedParams tv = tpve_workers.back().params();
            named.insert(named.end(), tv.begin(), tv.end());
            worker_params.push_back(tensor_pointers(named));
        }
    }

    const JointWeights& jw = config.joint_weights;
    const LossWeights& lw = config.loss_weights;
    const WindowFn run_window = [&](int worker, size_t idx,
                                    double inv_b) -> std::vector<double> {
        TpmaeModel& mae = worker < 0 ? tpmae
                                     : tpmae_workers[static_cast<size_t>(worker)];
        TpveModel& ve = worker < 0 ? tpve
                                   : tpve_workers[static_cast<size_t>(worker)];
        const Prepared& p = prepared[idx];

        const TpmaeLatents z = tpmae_encode(p.x_upper, p.x_lower, mae);
        const TpmaeOutput motion_out = tpmae_decode(z.upper, z.lower, mae);
        const TpveOutput visual = tpve_forward(p.kp_upper, p.kp_lower,
                                               p.features, ve);
        const TpmaeOutput visual_out =
            tpmae_decode(visual.upper_latent, visual.lower_latent, mae);

        const ad::Tensor l_ma = manifold_alignment_loss(
            visual.upper_latent, z.upper, visual.lower_latent, z.lower);
        const ad::Tensor l_b = bone_loss(visual.ratios, p.ratios);
        const ad::Tensor l_pred =
            motion_rec_loss(visual_out.root, p.target_root, visual_out.non_root,
                            p.target_non_root, jw);
        const ad::Tensor l_sv =
            smoothness_loss(visual_out.root, p.target_root, visual_out.non_root,
                            p.target_non_root, jw);
        const ad::Tensor l_rec =
            motion_rec_loss(motion_out.root, p.target_root, motion_out.non_root,
                            p.target_non_root, jw);
        const ad::Tensor l_s =
            smoothness_loss(motion_out.root, p.target_root, motion_out.non_root,
                            p.target_non_root, jw);
        ad::Tensor total = vtm_total_loss(l_ma, l_b, l_pred, l_sv, l_rec, l_s, lw);
        total.backward(inv_b);
        return {total.scalar(), l_rec.scalar(), l_s.scalar(), l_ma.scalar(),
                l_b.scalar(),   l_pred.scalar(), l_sv.scalar()};
    };

    TrainResult result;
    nn::Rng shuffle_rng(nn::seed_for(config.seed, "train.shuffle"));
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const double lr = lr_for_epoch(config.lr, epoch, config.lr_decay_interval,
                                       config.lr_decay_factor);
        opt.set_lr(lr);
        const std::vector<double> means =
            run_epoch(config, opt, shuffle_rng, prepared.size(), 7,
                      master_params, worker_params, run_window);
        result.final_loss = means[0];
        emit(result, log,
             format_epoch_line(epoch, lr, {means[1], means[2], means[3],
                                           means[4], means[5], means[6]}));
    }

    result.checkpoint.meta["kind"] = "vtm";
    result.checkpoint.meta["seed"] = std::to_string(config.seed);
    result.checkpoint.meta["epochs"] = std::to_string(config.epochs);
    result.checkpoint.meta["batch"] = std::to_string(config.batch);
    result.checkpoint.meta["feature_dim"] = std::to_string(provider.feature_dim);
    result.checkpoint.meta["feature_mode"] =
        provider.mode == FeatureProvider::Mode::kZeros ? "zeros" : "file";
    result.checkpoint.skeleton = tpmae_checkpoint.skeleton;
    result.checkpoint.partition = partition;
    result.checkpoint.stats = stats;
    store_params(result.checkpoint, tpmae.params());
    store_params(result.checkpoint, tpve.params());
    return result;
}

TpmaeModel tpmae_from_checkpoint(const Checkpoint& ckpt) {
    TpmaeModel model = TpmaeModel::create(0);
    load_params(ckpt, model.params());
    return model;
}

TpveModel tpve_from_checkpoint(const Checkpoint& ckpt) {
    const std::string& dim_text = require_meta(ckpt, "feature_dim");
    int feature_dim = 0;
    try {
        feature_dim = std::stoi(dim_text);
    } catch (const std::exception&) {
        throw CheckpointError("checkpoint feature_dim '" + dim_text +
                              "' is not an integer");
    }
    TpveModel model = TpveModel::create(feature_dim, 0);
    load_params(ckpt, model.params());
    return model;
}

} // namespace vtm
