#include "vtm/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "vtm/errors.hpp"
#include "vtm/gradcheck.hpp"
#include "vtm/kinematics.hpp"
#include "vtm/losses.hpp"
#include "vtm/metrics.hpp"
#include "vtm/nn.hpp"
#include "vtm/tensor.hpp"
#include "vtm/training.hpp"

namespace vtm {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Dataset preparation
// ---------------------------------------------------------------------------

namespace {

bool valid_sequence_id(const std::string& id) {
    return !id.empty() && id.find_first_of(" \t\r\n") == std::string::npos;
}

std::string skip_line(const std::string& input, const Error& e) {
    return input + ": " + e.code() + ": " + e.what();
}

} // namespace

PrepareResult prepare_dataset(const std::string& bvh_dir,
                              const std::string& camera_path,
                              const std::string& out_dir) {
    if (!fs::is_directory(bvh_dir)) {
        throw IoError("not a directory: " + bvh_dir);
    }
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(bvh_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".bvh") {
            paths.push_back(entry.path());
        }
    }
    std::sort(paths.begin(), paths.end(),
              [](const fs::path& a, const fs::path& b) {
                  return a.filename().string() < b.filename().string();
              });

    const Camera cam = load_camera(camera_path);

    struct ParsedInput {
        std::string id;
        LoadedMotion motion;
    };
    std::vector<ParsedInput> parsed;
    std::vector<std::string> skipped;
    for (const fs::path& path : paths) {
        const std::string file = path.filename().string();
        const std::string id = path.stem().string();
        if (!valid_sequence_id(id)) {
            skipped.push_back(file +
                              ": E_CONFIG: file stem is not a usable "
                              "sequence id");
            continue;
        }
        try {
            parsed.push_back({id, load_motion_bvh(path.string())});
        } catch (const Error& e) {
            skipped.push_back(skip_line(file, e));
        }
    }
    if (parsed.empty()) {
        throw IoError("no usable BVH files in " + bvh_dir + " (" +
                      std::to_string(paths.size()) + " candidates)");
    }

    std::vector<Skeleton> skeletons;
    skeletons.reserve(parsed.size());
    for (const ParsedInput& p : parsed) {
        skeletons.push_back(p.motion.skeleton);
    }
    const Skeleton virtual_skeleton = average_skeleton(skeletons);

    std::vector<ManifestEntry> entries;
    std::vector<MotionSequence> motions;
    std::vector<KeypointSequence> keypoints;
    for (const ParsedInput& p : parsed) {
        try {
            ManifestEntry entry;
            entry.sequence_id = p.id;
            entry.skeleton_id = p.id;
            entry.camera_id = cam.name;
            entry.ratios = bone_ratios(p.motion.skeleton, virtual_skeleton);
            const std::vector<Pose> aligned =
                align_motion(p.motion.poses, p.motion.skeleton,
                             virtual_skeleton);
            MotionSequence ms =
                build_motion_sequence(aligned, virtual_skeleton, cam);
            KeypointSequence ks = project_keypoints(ms, cam);
            entry.frames = ms.frames;
            entries.push_back(std::move(entry));
            motions.push_back(std::move(ms));
            keypoints.push_back(std::move(ks));
        } catch (const Error& e) {
            skipped.push_back(skip_line(p.id, e));
        }
    }
    if (entries.empty()) {
        throw IoError("no sequence in " + bvh_dir +
                      " survived conversion to the dataset representation");
    }

    save_dataset(out_dir, virtual_skeleton, cam, entries, motions, keypoints);
    PrepareResult result;
    result.dataset = open_dataset(out_dir);
    result.skipped = std::move(skipped);
    return result;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

std::string MetricsSummary::to_text() const {
    return metrics_report({{"MPJPE", mpjpe},
                           {"PA-MPJPE", pa_mpjpe},
                           {"MRPE", mrpe},
                           {"MBLE", mble}});
}

MetricsSummary evaluate_motions(const LoadedMotion& pred,
                                const LoadedMotion& gt) {
    if (pred.poses.empty()) {
        throw ShapeError("evaluate: no frames");
    }
    if (pred.poses.size() != gt.poses.size()) {
        throw ShapeError("evaluate: frame counts differ: " +
                         std::to_string(pred.poses.size()) + " vs " +
                         std::to_string(gt.poses.size()));
    }
    std::vector<FramePositions> pred_frames, gt_frames;
    std::vector<Vec3> pred_root, gt_root;
    pred_frames.reserve(pred.poses.size());
    gt_frames.reserve(gt.poses.size());
    pred_root.reserve(pred.poses.size());
    gt_root.reserve(gt.poses.size());
    for (size_t i = 0; i < pred.poses.size(); ++i) {
        FkResult pf = forward_kinematics(pred.skeleton, pred.poses[i]);
        FkResult gf = forward_kinematics(gt.skeleton, gt.poses[i]);
        pred_root.push_back(pf.positions[0]);
        gt_root.push_back(gf.positions[0]);
        pred_frames.push_back(std::move(pf.positions));
        gt_frames.push_back(std::move(gf.positions));
    }
    MetricsSummary summary;
    summary.mpjpe =
        mpjpe(center_on_root(pred_frames), center_on_root(gt_frames));
    summary.pa_mpjpe = pa_mpjpe(pred_frames, gt_frames);
    summary.mrpe = mrpe(pred_root, gt_root);
    summary.mble = mble(pred.skeleton, gt.skeleton);
    return summary;
}

// ---------------------------------------------------------------------------
// Reconstruction
// ---------------------------------------------------------------------------

Reconstruction reconstruct_sequence(const KeypointSequence& keypoints,
                                    const std::vector<double>& stored_features,
                                    const Checkpoint& ckpt,
                                    const Camera& cam) {
    const std::string kind = require_meta(ckpt, "kind");
    if (kind != "vtm") {
        throw CheckpointError("reconstruction needs a vtm checkpoint, got '" +
                              kind + "'");
    }
    const TpmaeModel tpmae = tpmae_from_checkpoint(ckpt);
    const TpveModel tpve = tpve_from_checkpoint(ckpt);
    FeatureProvider provider;
    provider.feature_dim = tpve.feature_dim;
    const std::string mode = require_meta(ckpt, "feature_mode");
    if (mode == "zeros") {
        provider.mode = FeatureProvider::Mode::kZeros;
    } else if (mode == "file") {
        provider.mode = FeatureProvider::Mode::kFile;
    } else {
        throw CheckpointError("unknown feature_mode '" + mode + "'");
    }

    const int frames = keypoints.frames;
    if (frames <= 0) {
        throw ShapeError("reconstruct: keypoint sequence has no frames");
    }
    const int pad = (4 - frames % 4) % 4;
    if (pad == 0) {
        return reconstruct(keypoints, stored_features, tpve, tpmae, provider,
                           cam, ckpt.skeleton, ckpt.stats);
    }

    KeypointSequence padded = keypoints;
    padded.frames = frames + pad;
    padded.data.resize(static_cast<size_t>(padded.frames) * kJointCount *
                       KeypointSequence::kChannels);
    for (int extra = 0; extra < pad; ++extra) {
        for (int j = 0; j < kJointCount; ++j) {
            for (int c = 0; c < KeypointSequence::kChannels; ++c) {
                padded.at(frames + extra, j, c) = keypoints.at(frames - 1, j, c);
            }
        }
    }
    refresh_keypoint_velocities(padded);

    std::vector<double> features = stored_features;
    if (provider.mode == FeatureProvider::Mode::kFile) {
        const size_t dim = static_cast<size_t>(provider.feature_dim);
        if (features.size() != dim * static_cast<size_t>(frames)) {
            throw MismatchError(
                "stored features: expected " +
                std::to_string(dim * static_cast<size_t>(frames)) +
                " values for " + std::to_string(frames) + " frames, got " +
                std::to_string(features.size()));
        }
        for (int extra = 0; extra < pad; ++extra) {
            features.insert(features.end(),
                            features.end() - static_cast<long>(dim),
                            features.end());
        }
    }

    Reconstruction recon = reconstruct(padded, features, tpve, tpmae, provider,
                                       cam, ckpt.skeleton, ckpt.stats);
    recon.poses.resize(static_cast<size_t>(frames));
    return recon;
}

LoadedMotion to_world_motion(const Reconstruction& recon, const Camera& cam,
                             double frame_time) {
    const Rotation inverse = cam.rotation.inverse();
    LoadedMotion out;
    out.skeleton = recon.skeleton;
    out.frame_time = frame_time;
    out.poses.reserve(recon.poses.size());
    for (const Pose& pose : recon.poses) {
        Pose world = pose;
        world.rotations[0] = inverse * pose.rotations[0];
        world.root_position =
            inverse.rotate(pose.root_position - cam.translation);
        out.poses.push_back(std::move(world));
    }
    return out;
}

std::string root_track_text(const Reconstruction& recon) {
    std::string out =
        "# vtm root track v1\n"
        "# camera-space root position per frame: x y z\n";
    char buf[128];
    for (const Pose& pose : recon.poses) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n",
                      pose.root_position.x(), pose.root_position.y(),
                      pose.root_position.z());
        out += buf;
    }
    return out;
}

std::string root_track_path(const std::string& bvh_path) {
    std::string stem = bvh_path;
    const std::string ext = ".bvh";
    if (stem.size() > ext.size() &&
        stem.compare(stem.size() - ext.size(), ext.size(), ext) == 0) {
        stem.resize(stem.size() - ext.size());
    }
    return stem + ".root.txt";
}

void save_reconstruction(const Reconstruction& recon, const Camera& cam,
                         double frame_time, const std::string& bvh_path) {
    const LoadedMotion world = to_world_motion(recon, cam, frame_time);
    save_bvh(bvh_from_motion(world.skeleton, world.poses, frame_time),
             bvh_path);
    const std::string track_path = root_track_path(bvh_path);
    std::ofstream out(track_path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write root track: " + track_path);
    }
    out << root_track_text(recon);
    if (!out) {
        throw IoError("short write on root track: " + track_path);
    }
}

// ---------------------------------------------------------------------------
// Gradient diagnostics
// ---------------------------------------------------------------------------

namespace {

using ad::Tensor;

Tensor diag_tensor(nn::Rng& rng, ad::Shape shape, bool requires_grad,
                   double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(static_cast<size_t>(ad::shape_size(shape)));
    for (double& x : v) {
        x = rng.uniform(lo, hi);
    }
    return requires_grad ? Tensor::param(std::move(shape), std::move(v))
                         : Tensor::constant(std::move(shape), std::move(v));
}

// Values bounded away from zero for ops with a kink at the origin.
Tensor diag_tensor_off_origin(nn::Rng& rng, ad::Shape shape) {
    std::vector<double> v(static_cast<size_t>(ad::shape_size(shape)));
    for (double& x : v) {
        const double sign = rng.next() % 2 == 0 ? 1.0 : -1.0;
        x = sign * rng.uniform(0.2, 1.0);
    }
    return Tensor::param(std::move(shape), std::move(v));
}

struct DiagnosticRunner {
    DiagnosticReport report;
    nn::Rng rng;

    explicit DiagnosticRunner(std::uint64_t seed)
        : rng(nn::seed_for(seed, "diagnostics")) {}

    void run(const std::string& name, const std::function<Tensor()>& forward,
             const nn::NamedParams& params,
             const nn::GradCheckOptions& options) {
        const nn::GradCheckReport r = nn::gradcheck(forward, params, options);
        report.entries.push_back({name, r.max_rel_error, r.checked});
        report.max_rel_error = std::max(report.max_rel_error, r.max_rel_error);
    }

    // Reduces the op output to a scalar through fixed random weights so the
    // upstream gradient is non-uniform; checks every parameter entry.
    void check_op(const std::string& name,
                  const std::function<Tensor()>& build,
                  const nn::NamedParams& params) {
        const ad::Shape shape = build().shape();
        const Tensor weights = diag_tensor(rng, shape, false, 0.5, 1.5);
        run(
            name,
            [build, weights]() {
                return ad::mean_all(ad::mul(build(), weights));
            },
            params, nn::GradCheckOptions{});
    }
};

void check_elementwise_ops(DiagnosticRunner& d) {
    {
        Tensor a = diag_tensor(d.rng, {4, 6}, true);
        Tensor b = diag_tensor(d.rng, {4, 6}, true);
        d.check_op(
            "op.add", [&]() { return ad::add(a, b); },
            {{"a", &a}, {"b", &b}});
        d.check_op(
            "op.sub", [&]() { return ad::sub(a, b); },
            {{"a", &a}, {"b", &b}});
        d.check_op(
            "op.mul", [&]() { return ad::mul(a, b); },
            {{"a", &a}, {"b", &b}});
        d.check_op(
            "op.scale", [&]() { return ad::scale(a, 1.7); }, {{"a", &a}});
        d.check_op(
            "op.mean_all", [&]() { return ad::mean_all(a); }, {{"a", &a}});
    }
    {
        Tensor x = diag_tensor(d.rng, {4, 6}, true);
        std::vector<double> weights(4);
        for (double& w : weights) {
            w = d.rng.uniform(0.5, 2.0);
        }
        d.check_op(
            "op.scale_rows", [&]() { return ad::scale_rows(x, weights); },
            {{"x", &x}});
    }
    {
        Tensor a = diag_tensor(d.rng, {3, 5}, true);
        Tensor b = diag_tensor(d.rng, {4, 5}, true);
        d.check_op(
            "op.concat_rows", [&]() { return ad::concat_rows(a, b); },
            {{"a", &a}, {"b", &b}});
    }
    {
        Tensor x = diag_tensor_off_origin(d.rng, {4, 6});
        d.check_op(
            "op.leaky_relu", [&]() { return ad::leaky_relu(x, 0.2); },
            {{"x", &x}});
    }
    {
        Tensor x = diag_tensor(d.rng, {4, 6}, true);
        d.check_op(
            "op.softplus", [&]() { return ad::softplus(x); }, {{"x", &x}});
    }
    {
        // Differences 0.1 and 1.0 around beta = 0.5 hit both branches away
        // from the kink.
        std::vector<double> tv(24), pv(24);
        for (size_t i = 0; i < tv.size(); ++i) {
            tv[i] = d.rng.uniform(-1.0, 1.0);
            const double magnitude = i % 2 == 0 ? 0.1 : 1.0;
            const double sign = i % 4 < 2 ? 1.0 : -1.0;
            pv[i] = tv[i] + sign * magnitude;
        }
        Tensor target = Tensor::constant({4, 6}, std::move(tv));
        Tensor pred = Tensor::param({4, 6}, std::move(pv));
        d.check_op(
            "op.smooth_l1", [&]() { return ad::smooth_l1(pred, target, 0.5); },
            {{"pred", &pred}});
    }
}

void check_structural_ops(DiagnosticRunner& d) {
    {
        Tensor x = diag_tensor(d.rng, {3, 9}, true);
        Tensor w = diag_tensor(d.rng, {5, 3, 3}, true);
        Tensor b = diag_tensor(d.rng, {5}, true);
        d.check_op(
            "op.conv1d", [&]() { return ad::conv1d(x, w, b, 1, 1); },
            {{"x", &x}, {"w", &w}, {"b", &b}});
    }
    {
        Tensor x = diag_tensor(d.rng, {3, 8}, true);
        Tensor w = diag_tensor(d.rng, {5, 3, 4}, true);
        Tensor b = diag_tensor(d.rng, {5}, true);
        d.check_op(
            "op.conv1d.strided", [&]() { return ad::conv1d(x, w, b, 2, 1); },
            {{"x", &x}, {"w", &w}, {"b", &b}});
    }
    {
        Tensor x = diag_tensor(d.rng, {5, 6}, true);
        Tensor w = diag_tensor(d.rng, {5, 3, 3}, true);
        Tensor b = diag_tensor(d.rng, {3}, true);
        d.check_op(
            "op.conv1d_transpose",
            [&]() { return ad::conv1d_transpose(x, w, b, 1, 1); },
            {{"x", &x}, {"w", &w}, {"b", &b}});
    }
    {
        Tensor x = diag_tensor(d.rng, {5, 4}, true);
        Tensor w = diag_tensor(d.rng, {5, 3, 4}, true);
        Tensor b = diag_tensor(d.rng, {3}, true);
        d.check_op(
            "op.conv1d_transpose.strided",
            [&]() { return ad::conv1d_transpose(x, w, b, 2, 1); },
            {{"x", &x}, {"w", &w}, {"b", &b}});
    }
    {
        Tensor a = diag_tensor(d.rng, {3, 4}, true);
        Tensor b = diag_tensor(d.rng, {4, 5}, true);
        d.check_op(
            "op.matmul", [&]() { return ad::matmul(a, b); },
            {{"a", &a}, {"b", &b}});
    }
    {
        Tensor a = diag_tensor(d.rng, {4, 3}, true);
        Tensor b = diag_tensor(d.rng, {4, 5}, true);
        d.check_op(
            "op.matmul.trans_a",
            [&]() { return ad::matmul(a, b, true, false); },
            {{"a", &a}, {"b", &b}});
    }
    {
        Tensor a = diag_tensor(d.rng, {3, 4}, true);
        Tensor b = diag_tensor(d.rng, {5, 4}, true);
        d.check_op(
            "op.matmul.trans_b",
            [&]() { return ad::matmul(a, b, false, true); },
            {{"a", &a}, {"b", &b}});
    }
    {
        Tensor a = diag_tensor(d.rng, {4, 3}, true);
        Tensor b = diag_tensor(d.rng, {5, 4}, true);
        d.check_op(
            "op.matmul.trans_both",
            [&]() { return ad::matmul(a, b, true, true); },
            {{"a", &a}, {"b", &b}});
    }
    {
        Tensor w = diag_tensor(d.rng, {4, 3}, true);
        Tensor x = diag_tensor(d.rng, {3}, true);
        Tensor b = diag_tensor(d.rng, {4}, true);
        d.check_op(
            "op.affine", [&]() { return ad::affine(w, x, b); },
            {{"w", &w}, {"x", &x}, {"b", &b}});
    }
    {
        Tensor x = diag_tensor(d.rng, {5, 7}, true);
        d.check_op(
            "op.mean_over_cols", [&]() { return ad::mean_over_cols(x); },
            {{"x", &x}});
    }
    {
        // Nested application covers both the velocity and the acceleration
        // prefix widths.
        Tensor x = diag_tensor(d.rng, {4, 7}, true);
        d.check_op(
            "op.time_diff",
            [&]() { return ad::time_diff(ad::time_diff(x, 1), 2); },
            {{"x", &x}});
    }
    {
        Tensor x = diag_tensor(d.rng, {3, 6}, true);
        d.check_op(
            "op.softmax_rows",
            [&]() { return ad::softmax_rows(x, nullptr); }, {{"x", &x}});
        std::vector<std::uint8_t> mask(3 * 6, 0);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 6; ++j) {
                mask[static_cast<size_t>(i * 6 + j)] =
                    j <= 2 * i + 1 ? 1 : 0;
            }
        }
        d.check_op(
            "op.softmax_rows.masked",
            [&]() { return ad::softmax_rows(x, &mask); }, {{"x", &x}});
    }
    {
        nn::CausalAttention attention("diagnostics.attention", 6, 3,
                                      nn::seed_for(11, "diagnostics"));
        Tensor x = diag_tensor(d.rng, {6, 9}, true);
        nn::NamedParams params{{"x", &x}};
        attention.collect(params);
        d.check_op(
            "op.causal_attention", [&]() { return attention(x); }, params);
    }
}

void check_loss_graphs(DiagnosticRunner& d, std::uint64_t seed) {
    // Sampling keeps the finite-difference pass proportional to the tensor
    // count rather than the parameter count; every tensor is still touched.
    nn::GradCheckOptions sampled;
    sampled.max_entries_per_tensor = 3;
    sampled.seed = nn::seed_for(seed, "diagnostics.sample");

    const int frames = 8;
    const JointWeights weights = JointWeights::canonical();

    {
        TpmaeModel model =
            TpmaeModel::create(nn::seed_for(seed, "diagnostics.motion"));
        const Tensor x_upper =
            diag_tensor(d.rng, {ModelDims::upper_motion, frames}, false);
        const Tensor x_lower =
            diag_tensor(d.rng, {ModelDims::lower_motion, frames}, false);
        const Tensor target_root =
            diag_tensor(d.rng, {ModelDims::root_out, frames}, false);
        const Tensor target_non_root =
            diag_tensor(d.rng, {ModelDims::non_root_out, frames}, false);
        const auto forward = [&]() {
            const TpmaeLatents z = tpmae_encode(x_upper, x_lower, model);
            const TpmaeOutput out = tpmae_decode(z.upper, z.lower, model);
            const Tensor rec = motion_rec_loss(out.root, target_root,
                                               out.non_root, target_non_root,
                                               weights);
            const Tensor smooth = smoothness_loss(out.root, target_root,
                                                  out.non_root,
                                                  target_non_root, weights);
            return ad::add(rec, smooth);
        };
        d.run("graph.motion_autoencoder_loss", forward, model.params(),
              sampled);
    }
    {
        TpmaeModel tpmae =
            TpmaeModel::create(nn::seed_for(seed, "diagnostics.joint_motion"));
        TpveModel tpve = TpveModel::create(
            16, nn::seed_for(seed, "diagnostics.joint_visual"));
        const Tensor x_upper =
            diag_tensor(d.rng, {ModelDims::upper_motion, frames}, false);
        const Tensor x_lower =
            diag_tensor(d.rng, {ModelDims::lower_motion, frames}, false);
        const Tensor kp_upper =
            diag_tensor(d.rng, {ModelDims::upper_keypoints, frames}, false);
        const Tensor kp_lower =
            diag_tensor(d.rng, {ModelDims::lower_keypoints, frames}, false);
        const Tensor features =
            diag_tensor(d.rng, {tpve.feature_dim, frames}, false);
        const Tensor target_root =
            diag_tensor(d.rng, {ModelDims::root_out, frames}, false);
        const Tensor target_non_root =
            diag_tensor(d.rng, {ModelDims::non_root_out, frames}, false);
        const Tensor target_ratios =
            diag_tensor(d.rng, {kBoneCount}, false, 0.8, 1.2);
        const auto forward = [&]() {
            const TpmaeLatents z = tpmae_encode(x_upper, x_lower, tpmae);
            const TpmaeOutput motion_out =
                tpmae_decode(z.upper, z.lower, tpmae);
            const TpveOutput visual =
                tpve_forward(kp_upper, kp_lower, features, tpve);
            const TpmaeOutput visual_out =
                tpmae_decode(visual.upper_latent, visual.lower_latent, tpmae);
            const Tensor l_ma =
                manifold_alignment_loss(visual.upper_latent, z.upper,
                                        visual.lower_latent, z.lower);
            const Tensor l_b = bone_loss(visual.ratios, target_ratios);
            const Tensor l_pred = motion_rec_loss(
                visual_out.root, target_root, visual_out.non_root,
                target_non_root, weights);
            const Tensor l_sv = smoothness_loss(
                visual_out.root, target_root, visual_out.non_root,
                target_non_root, weights);
            const Tensor l_rec = motion_rec_loss(
                motion_out.root, target_root, motion_out.non_root,
                target_non_root, weights);
            const Tensor l_s = smoothness_loss(
                motion_out.root, target_root, motion_out.non_root,
                target_non_root, weights);
            return vtm_total_loss(l_ma, l_b, l_pred, l_sv, l_rec, l_s);
        };
        nn::NamedParams params = tpve.params();
        const nn::NamedParams motion_params = tpmae.params();
        params.insert(params.end(), motion_params.begin(),
                      motion_params.end());
        d.run("graph.video_to_motion_loss", forward, params, sampled);
    }
}

} // namespace

std::string DiagnosticReport::to_text() const {
    std::string out;
    char buf[160];
    for (const DiagnosticEntry& e : entries) {
        std::snprintf(buf, sizeof buf, "%-32s %11.3e  (%d entries)\n",
                      e.name.c_str(), e.max_rel_error, e.checked);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "max relative error: %.3e\n",
                  max_rel_error);
    out += buf;
    return out;
}

DiagnosticReport run_gradient_diagnostics(std::uint64_t seed) {
    DiagnosticRunner runner(seed);
    check_elementwise_ops(runner);
    check_structural_ops(runner);
    check_loss_graphs(runner, seed);
    return runner.report;
}

} // namespace vtm
