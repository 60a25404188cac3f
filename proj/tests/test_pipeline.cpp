#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "vtm/errors.hpp"
#include "vtm/kinematics.hpp"
#include "vtm/motion_io.hpp"
#include "vtm/pipeline.hpp"
#include "vtm/synth.hpp"
#include "vtm/training.hpp"

using namespace vtm;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Every regular file in the two directories, byte for byte.
void check_dirs_identical(const fs::path& a, const fs::path& b) {
    std::vector<std::string> names_a, names_b;
    for (const auto& e : fs::directory_iterator(a)) {
        names_a.push_back(e.path().filename().string());
    }
    for (const auto& e : fs::directory_iterator(b)) {
        names_b.push_back(e.path().filename().string());
    }
    std::sort(names_a.begin(), names_a.end());
    std::sort(names_b.begin(), names_b.end());
    REQUIRE(names_a == names_b);
    for (const std::string& name : names_a) {
        CHECK_MESSAGE(slurp(a / name) == slurp(b / name), name);
    }
}

struct TinySetup {
    Skeleton virtual_skeleton;
    Camera cam;
    NormStats stats;
    std::vector<TrainingWindow> windows;
};

// Synthetic 32-frame windows aligned onto the template skeleton, mirroring
// the data-preparation pipeline.
TinySetup tiny_setup(int sequences, std::uint64_t seed) {
    TinySetup d;
    d.virtual_skeleton = template_skeleton();
    d.cam = synth_camera();
    std::vector<MotionSequence> motions;
    std::vector<SequenceSample> samples;
    for (int i = 0; i < sequences; ++i) {
        nn::Rng rng(nn::seed_for(seed, "pipe" + std::to_string(i)));
        const Skeleton skel = synth_skeleton(rng);
        const std::vector<Pose> poses = synth_motion(skel, 32, rng);
        SequenceSample s;
        s.motion = build_motion_sequence(
            align_motion(poses, skel, d.virtual_skeleton), d.virtual_skeleton,
            d.cam);
        s.keypoints = project_keypoints(s.motion, d.cam);
        s.ratios = bone_ratios(skel, d.virtual_skeleton);
        s.sequence_id = "pipe" + std::to_string(i);
        motions.push_back(s.motion);
        samples.push_back(std::move(s));
    }
    d.stats = compute_motion_stats(motions);
    d.windows = make_windows(samples, 32, 32);
    return d;
}

// A structurally valid joint-stage checkpoint; accuracy is irrelevant here.
Checkpoint tiny_vtm_checkpoint(const TinySetup& d) {
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch = static_cast<int>(d.windows.size());
    cfg.lr = 1e-3;
    cfg.seed = 3;
    const TrainResult pre =
        train_tpmae(d.windows, d.virtual_skeleton, d.stats, cfg);
    const FeatureProvider provider; // zero features, dim 512
    return train_vtm(d.windows, d.cam, pre.checkpoint, provider, cfg)
        .checkpoint;
}

KeypointSequence truncate_keypoints(const KeypointSequence& ks, int frames) {
    KeypointSequence out = ks;
    out.frames = frames;
    out.data.resize(static_cast<size_t>(frames) * kJointCount *
                    KeypointSequence::kChannels);
    refresh_keypoint_velocities(out);
    return out;
}

bool same_pose(const Pose& a, const Pose& b) {
    if (!(a.root_position == b.root_position)) {
        return false;
    }
    for (size_t j = 0; j < a.rotations.size(); ++j) {
        if (!(a.rotations[j] == b.rotations[j])) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST_SUITE("pipeline") {

TEST_CASE("prepare builds a deterministic dataset from a motion directory") {
    const fs::path raw = fresh_dir("vtm_pipeline_raw");
    SynthOptions opts;
    opts.sequences = 3;
    opts.frames = 48;
    opts.seed = 5;
    const std::vector<std::string> files =
        synth_bvh_files(opts, raw.string());
    REQUIRE(files.size() == 3);

    const fs::path out1 = fresh_dir("vtm_pipeline_out1");
    const PrepareResult res = prepare_dataset(
        raw.string(), (raw / "camera.txt").string(), out1.string());
    CHECK(res.skipped.empty());
    REQUIRE(res.dataset.entries.size() == 3);
    CHECK(res.dataset.entries[0].sequence_id == "seq000");
    CHECK(res.dataset.entries[2].sequence_id == "seq002");
    for (const ManifestEntry& entry : res.dataset.entries) {
        CHECK(entry.frames == 48);
        CHECK(entry.camera_id == res.dataset.camera.name);
    }

    // The manifest ratios recover each input's bone lengths exactly.
    for (size_t i = 0; i < files.size(); ++i) {
        const LoadedMotion original = load_motion_bvh(files[i]);
        const Skeleton rebuilt = apply_ratios(res.dataset.virtual_skeleton,
                                              res.dataset.entries[i].ratios);
        for (int j = 1; j < kJointCount; ++j) {
            CHECK(std::abs(rebuilt.bone_length(j) -
                           original.skeleton.bone_length(j)) < 1e-9);
        }
    }

    // Sequences load back and the windows enumerate as expected.
    const std::vector<SequenceSample> samples = res.dataset.load_all();
    REQUIRE(samples.size() == 3);
    CHECK(samples[0].motion.frames == 48);
    CHECK(samples[0].keypoints.frames == 48);
    CHECK(make_windows(samples, 32, 4).size() ==
          3 * static_cast<size_t>(window_count(48, 32, 4)));

    // Re-running writes the directory byte-identically.
    const fs::path out2 = fresh_dir("vtm_pipeline_out2");
    prepare_dataset(raw.string(), (raw / "camera.txt").string(),
                    out2.string());
    check_dirs_identical(out1, out2);

    fs::remove_all(raw);
    fs::remove_all(out1);
    fs::remove_all(out2);
}

TEST_CASE("prepare skips broken inputs and fails only when nothing is left") {
    const fs::path raw = fresh_dir("vtm_pipeline_mixed");
    SynthOptions opts;
    opts.sequences = 2;
    opts.frames = 36;
    opts.seed = 11;
    synth_bvh_files(opts, raw.string());
    {
        std::ofstream broken(raw / "broken.bvh");
        broken << "HIERARCHY\nnonsense {\n";
    }
    {
        std::ofstream note(raw / "notes.txt");
        note << "not a motion file\n";
    }

    const fs::path out = fresh_dir("vtm_pipeline_mixed_out");
    const PrepareResult res = prepare_dataset(
        raw.string(), (raw / "camera.txt").string(), out.string());
    REQUIRE(res.dataset.entries.size() == 2);
    REQUIRE(res.skipped.size() == 1);
    CHECK(res.skipped[0].find("broken.bvh") != std::string::npos);
    CHECK(res.skipped[0].find("E_") != std::string::npos);

    // Only unusable inputs: every file fails, so the run fails.
    const fs::path bad = fresh_dir("vtm_pipeline_bad");
    {
        std::ofstream broken(bad / "only.bvh");
        broken << "not BVH at all\n";
    }
    CHECK_THROWS_AS(prepare_dataset(bad.string(),
                                    (raw / "camera.txt").string(),
                                    out.string()),
                    IoError);

    // An empty directory has zero candidates.
    const fs::path empty = fresh_dir("vtm_pipeline_empty");
    CHECK_THROWS_AS(prepare_dataset(empty.string(),
                                    (raw / "camera.txt").string(),
                                    out.string()),
                    IoError);

    // Missing camera file and missing input directory.
    CHECK_THROWS_AS(prepare_dataset(raw.string(),
                                    (raw / "no_camera.txt").string(),
                                    out.string()),
                    IoError);
    CHECK_THROWS_AS(prepare_dataset((raw / "nowhere").string(),
                                    (raw / "camera.txt").string(),
                                    out.string()),
                    IoError);

    fs::remove_all(raw);
    fs::remove_all(out);
    fs::remove_all(bad);
    fs::remove_all(empty);
}

TEST_CASE("evaluation reports zeros on identical motions and known offsets") {
    nn::Rng rng(nn::seed_for(21, "pipeline.eval"));
    LoadedMotion gt;
    gt.skeleton = synth_skeleton(rng);
    gt.poses = synth_motion(gt.skeleton, 32, rng);

    const MetricsSummary self = evaluate_motions(gt, gt);
    CHECK(self.mpjpe == 0.0);
    CHECK(self.pa_mpjpe < 1e-9);
    CHECK(self.mrpe == 0.0);
    CHECK(self.mble == 0.0);
    CHECK(self.to_text() ==
          "MPJPE: 0.0\nPA-MPJPE: 0.0\nMRPE: 0.0\nMBLE: 0.0\n");

    // A uniform 1 cm root shift moves MRPE only; the centered and the
    // aligned errors stay zero.
    LoadedMotion shifted = gt;
    for (Pose& pose : shifted.poses) {
        pose.root_position += Vec3(0.01, 0.0, 0.0);
    }
    const MetricsSummary shift = evaluate_motions(shifted, gt);
    CHECK(shift.mpjpe < 1e-9);
    CHECK(shift.pa_mpjpe < 1e-9);
    CHECK(std::abs(shift.mrpe - 10.0) < 1e-9);
    CHECK(shift.mble == 0.0);

    // Uniform skeleton scaling: similarity alignment absorbs it, the
    // centered error and the bone lengths see it.
    LoadedMotion scaled = gt;
    for (Vec3& offset : scaled.skeleton.offsets) {
        offset *= 1.1;
    }
    const MetricsSummary scale = evaluate_motions(scaled, gt);
    CHECK(scale.mpjpe > 1.0);
    CHECK(scale.pa_mpjpe < 1e-9);
    CHECK(scale.mble > 1.0);

    LoadedMotion short_pred = gt;
    short_pred.poses.pop_back();
    CHECK_THROWS_AS(evaluate_motions(short_pred, gt), ShapeError);
    LoadedMotion empty;
    empty.skeleton = gt.skeleton;
    CHECK_THROWS_AS(evaluate_motions(empty, empty), ShapeError);
}

TEST_CASE("reconstruction pads awkward lengths and trims the result") {
    const TinySetup d = tiny_setup(2, 29);
    const Checkpoint ckpt = tiny_vtm_checkpoint(d);
    const KeypointSequence& full = d.windows[0].keypoints;

    // 30 frames: padded to 32 internally, trimmed back afterwards.
    const KeypointSequence short_seq = truncate_keypoints(full, 30);
    const Reconstruction trimmed =
        reconstruct_sequence(short_seq, {}, ckpt, d.cam);
    REQUIRE(trimmed.poses.size() == 30);
    CHECK(trimmed.skeleton.joint_count() == kJointCount);

    // Hand-padding the same sequence to 32 frames reproduces the first 30
    // poses bit for bit.
    KeypointSequence padded = short_seq;
    padded.frames = 32;
    padded.data.resize(static_cast<size_t>(32) * kJointCount *
                       KeypointSequence::kChannels);
    for (int extra = 30; extra < 32; ++extra) {
        for (int j = 0; j < kJointCount; ++j) {
            for (int c = 0; c < KeypointSequence::kChannels; ++c) {
                padded.at(extra, j, c) = short_seq.at(29, j, c);
            }
        }
    }
    refresh_keypoint_velocities(padded);
    const Reconstruction whole = reconstruct_sequence(padded, {}, ckpt, d.cam);
    REQUIRE(whole.poses.size() == 32);
    for (size_t t = 0; t < 30; ++t) {
        CHECK(same_pose(trimmed.poses[t], whole.poses[t]));
    }
    for (size_t b = 0; b < trimmed.ratios.values.size(); ++b) {
        CHECK(trimmed.ratios.values[b] == whole.ratios.values[b]);
    }

    // Checkpoint and input validation.
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch = 2;
    cfg.seed = 3;
    const Checkpoint tpmae_only =
        train_tpmae(d.windows, d.virtual_skeleton, d.stats, cfg).checkpoint;
    CHECK_THROWS_AS(reconstruct_sequence(full, {}, tpmae_only, d.cam),
                    CheckpointError);
    CHECK_THROWS_AS(reconstruct_sequence(KeypointSequence{}, {}, ckpt, d.cam),
                    ShapeError);

    Checkpoint odd_mode = ckpt;
    odd_mode.meta["feature_mode"] = "maybe";
    CHECK_THROWS_AS(reconstruct_sequence(full, {}, odd_mode, d.cam),
                    CheckpointError);

    // File feature mode validates the stored length against the *unpadded*
    // frame count and pads the features alongside the keypoints.
    Checkpoint file_mode = ckpt;
    file_mode.meta["feature_mode"] = "file";
    CHECK_THROWS_AS(reconstruct_sequence(short_seq, {}, file_mode, d.cam),
                    MismatchError);
    std::vector<double> feats(30 * 512, 0.25);
    const Reconstruction with_features =
        reconstruct_sequence(short_seq, feats, file_mode, d.cam);
    CHECK(with_features.poses.size() == 30);
}

TEST_CASE("world export inverts the camera composition") {
    nn::Rng rng(nn::seed_for(4, "pipeline.world"));
    const Skeleton skeleton = template_skeleton();
    const std::vector<Pose> world_poses = synth_motion(skeleton, 32, rng);

    Camera cam = synth_camera();
    cam.rotation = Rotation::about_axis(1, 0.35) * Rotation::about_axis(0, -0.2);
    cam.translation = Vec3(0.15, -0.8, 4.2);

    // Poses in the stored camera convention: composed root rotation, root
    // position in camera space.
    Reconstruction recon;
    recon.skeleton = skeleton;
    recon.ratios.values.assign(kBoneCount, 1.0);
    for (const Pose& pose : world_poses) {
        Pose composed = pose;
        composed.rotations[0] = cam.rotation * pose.rotations[0];
        composed.root_position = cam.to_camera_space(pose.root_position);
        recon.poses.push_back(std::move(composed));
    }

    const LoadedMotion world = to_world_motion(recon, cam, 1.0 / 30.0);
    REQUIRE(world.poses.size() == world_poses.size());
    for (size_t t = 0; t < world_poses.size(); ++t) {
        CHECK(geodesic_angle(world.poses[t].rotations[0],
                             world_poses[t].rotations[0]) < 1e-12);
        CHECK((world.poses[t].root_position -
               world_poses[t].root_position).norm() < 1e-12);
        for (int j = 1; j < kJointCount; ++j) {
            CHECK(world.poses[t].rotations[static_cast<size_t>(j)] ==
                  world_poses[t].rotations[static_cast<size_t>(j)]);
        }
    }

    // Root track: header plus one exact camera-space position per frame.
    const std::string track = root_track_text(recon);
    std::istringstream lines(track);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "# vtm root track v1");
    std::getline(lines, line);
    CHECK(line.rfind("#", 0) == 0);
    for (const Pose& pose : recon.poses) {
        REQUIRE(std::getline(lines, line));
        std::istringstream fields(line);
        double x = 0, y = 0, z = 0;
        fields >> x >> y >> z;
        CHECK(x == pose.root_position.x());
        CHECK(y == pose.root_position.y());
        CHECK(z == pose.root_position.z());
    }
    CHECK(!std::getline(lines, line));

    CHECK(root_track_path("take/out.bvh") == "take/out.root.txt");
    CHECK(root_track_path("plain") == "plain.root.txt");

    // Saved files parse back onto the same world motion.
    const fs::path dir = fresh_dir("vtm_pipeline_export");
    const std::string bvh_path = (dir / "recon.bvh").string();
    save_reconstruction(recon, cam, 1.0 / 30.0, bvh_path);
    CHECK(slurp(root_track_path(bvh_path)) == track);
    const LoadedMotion reloaded = load_motion_bvh(bvh_path);
    REQUIRE(reloaded.poses.size() == world.poses.size());
    for (size_t t = 0; t < world.poses.size(); ++t) {
        const FkResult a =
            forward_kinematics(reloaded.skeleton, reloaded.poses[t]);
        const FkResult b = forward_kinematics(world.skeleton, world.poses[t]);
        for (int j = 0; j < kJointCount; ++j) {
            CHECK((a.positions[static_cast<size_t>(j)] -
                   b.positions[static_cast<size_t>(j)]).norm() < 1e-6);
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("gradient diagnostics cover every operation and pass") {
    const DiagnosticReport report = run_gradient_diagnostics(0);
    const std::vector<std::string> expected = {
        "op.add",
        "op.sub",
        "op.mul",
        "op.scale",
        "op.mean_all",
        "op.scale_rows",
        "op.concat_rows",
        "op.leaky_relu",
        "op.softplus",
        "op.smooth_l1",
        "op.conv1d",
        "op.conv1d.strided",
        "op.conv1d_transpose",
        "op.conv1d_transpose.strided",
        "op.matmul",
        "op.matmul.trans_a",
        "op.matmul.trans_b",
        "op.matmul.trans_both",
        "op.affine",
        "op.mean_over_cols",
        "op.time_diff",
        "op.softmax_rows",
        "op.softmax_rows.masked",
        "op.causal_attention",
        "graph.motion_autoencoder_loss",
        "graph.video_to_motion_loss",
    };
    REQUIRE(report.entries.size() == expected.size());
    for (size_t i = 0; i < expected.size(); ++i) {
        CHECK(report.entries[i].name == expected[i]);
        CHECK(report.entries[i].checked > 0);
        CHECK_MESSAGE(report.entries[i].max_rel_error < 1e-4, expected[i]);
    }
    CHECK(report.pass(1e-4));
    CHECK(!report.pass(report.max_rel_error));
    CHECK(report.to_text().find("max relative error:") != std::string::npos);
    CHECK(report.to_text().find("graph.video_to_motion_loss") !=
          std::string::npos);

    // Deterministic: the same seed reproduces every error exactly.
    const DiagnosticReport again = run_gradient_diagnostics(0);
    REQUIRE(again.entries.size() == report.entries.size());
    for (size_t i = 0; i < report.entries.size(); ++i) {
        CHECK(again.entries[i].max_rel_error ==
              report.entries[i].max_rel_error);
    }
}

} // TEST_SUITE

