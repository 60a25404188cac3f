#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include <doctest.h>

#include "helpers.hpp"
#include "vtm/errors.hpp"
#include "vtm/synth.hpp"
#include "vtm/training.hpp"

using namespace vtm;

namespace {

std::vector<double> parse_log_line(const std::string& line) {
    std::vector<double> fields;
    size_t pos = 0;
    while (pos <= line.size()) {
        const size_t comma = line.find(',', pos);
        const std::string token =
            line.substr(pos, comma == std::string::npos ? comma : comma - pos);
        fields.push_back(std::strtod(token.c_str(), nullptr));
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }
    return fields;
}

struct TinyData {
    Skeleton virtual_skeleton;
    Camera cam;
    NormStats stats;
    std::vector<TrainingWindow> windows;
};

// Synthetic sequences aligned onto the template skeleton, one 32-frame
// window per sequence, mirroring the data-preparation pipeline.
TinyData tiny_data(int sequences, std::uint64_t seed) {
    TinyData d;
    d.virtual_skeleton = template_skeleton();
    d.cam = synth_camera();
    std::vector<MotionSequence> motions;
    std::vector<SequenceSample> samples;
    for (int i = 0; i < sequences; ++i) {
        nn::Rng rng(nn::seed_for(seed, "tiny" + std::to_string(i)));
        const Skeleton skel = synth_skeleton(rng);
        const std::vector<Pose> poses = synth_motion(skel, 32, rng);
        const std::vector<Pose> aligned =
            align_motion(poses, skel, d.virtual_skeleton);
        SequenceSample s;
        s.motion = build_motion_sequence(aligned, d.virtual_skeleton, d.cam);
        s.keypoints = project_keypoints(s.motion, d.cam);
        s.ratios = bone_ratios(skel, d.virtual_skeleton);
        s.sequence_id = "tiny" + std::to_string(i);
        motions.push_back(s.motion);
        samples.push_back(std::move(s));
    }
    d.stats = compute_motion_stats(motions);
    d.windows = make_windows(samples, 32, 32);
    return d;
}

} // namespace

TEST_SUITE("training") {

TEST_CASE("learning rate halves exactly every interval") {
    CHECK(lr_for_epoch(1e-4, 0) == 1e-4);
    CHECK(lr_for_epoch(1e-4, 1) == 1e-4);
    CHECK(lr_for_epoch(1e-4, 99) == 1e-4);
    CHECK(lr_for_epoch(1e-4, 100) == 5e-5);
    CHECK(lr_for_epoch(1e-4, 199) == 5e-5);
    CHECK(lr_for_epoch(1e-4, 200) == 2.5e-5);
    CHECK(lr_for_epoch(1e-4, 500) == 1e-4 * 0.5 * 0.5 * 0.5 * 0.5 * 0.5);

    // Non-default schedule: factor applied floor(epoch/interval) times.
    const double lr = lr_for_epoch(1.0, 25, 10, 0.1);
    CHECK(std::abs(lr - 0.01) < 1e-15);

    CHECK_THROWS_AS(lr_for_epoch(1e-4, -1), ConfigError);
    CHECK_THROWS_AS(lr_for_epoch(1e-4, 10, 0), ConfigError);
    CHECK_THROWS_AS(lr_for_epoch(1e-4, 10, 10, 0.0), ConfigError);
    CHECK_THROWS_AS(lr_for_epoch(0.0, 10), ConfigError);
}

TEST_CASE("config validation rejects nonsense") {
    TrainConfig ok;
    ok.validate();

    TrainConfig c = ok;
    c.epochs = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.batch = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.lr = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.threads = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.weight_decay = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.joint_weights.non_root[3] = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("single window overfits: reconstruction loss drops below 1e-3") {
    const TinyData d = tiny_data(1, 501);
    REQUIRE(d.windows.size() == 1);

    TrainConfig config;
    config.epochs = 300;
    config.batch = 1;
    config.lr = 2e-3;
    config.seed = 9;
    const TrainResult r = train_tpmae(d.windows, d.virtual_skeleton, d.stats,
                                      config);

    REQUIRE(r.log_lines.size() == 300);
    const std::vector<double> first = parse_log_line(r.log_lines.front());
    const std::vector<double> last = parse_log_line(r.log_lines.back());
    REQUIRE(first.size() == 4); // epoch, lr, L_rec, L_s
    CHECK(first[0] == 1.0);
    CHECK(first[1] == 2e-3);
    CHECK(last[0] == 300.0);
    CHECK(last[1] == lr_for_epoch(2e-3, 300));
    CHECK(last[2] < 1e-3); // L_rec
    CHECK(last[3] < 1e-3); // L_s
    CHECK(r.final_loss == doctest::Approx(last[2] + last[3]).epsilon(1e-9));

    // The lr column follows the exact schedule.
    const std::vector<double> epoch100 = parse_log_line(r.log_lines[99]);
    CHECK(epoch100[1] == lr_for_epoch(2e-3, 100));

    CHECK(require_meta(r.checkpoint, "kind") == "tpmae");
    CHECK(r.checkpoint.params.count("tpmae.enc_u1.w") == 1);
    CHECK(r.checkpoint.stats.mean == d.stats.mean);
}

TEST_CASE("same seed reproduces checkpoints bit for bit") {
    const TinyData d = tiny_data(2, 502);
    REQUIRE(d.windows.size() == 2);

    TrainConfig config;
    config.epochs = 3;
    config.batch = 2;
    config.seed = 77;

    const TrainResult a = train_tpmae(d.windows, d.virtual_skeleton, d.stats, config);
    const TrainResult b = train_tpmae(d.windows, d.virtual_skeleton, d.stats, config);
    CHECK(a.log_lines == b.log_lines);
    CHECK(encode_checkpoint(a.checkpoint) == encode_checkpoint(b.checkpoint));

    TrainConfig other = config;
    other.seed = 78;
    const TrainResult c = train_tpmae(d.windows, d.virtual_skeleton, d.stats, other);
    CHECK(encode_checkpoint(a.checkpoint) != encode_checkpoint(c.checkpoint));
}

TEST_CASE("threaded batches are reproducible") {
    const TinyData d = tiny_data(4, 503);
    REQUIRE(d.windows.size() == 4);

    TrainConfig config;
    config.epochs = 2;
    config.batch = 4;
    config.threads = 2;
    config.seed = 11;

    const TrainResult a = train_tpmae(d.windows, d.virtual_skeleton, d.stats, config);
    const TrainResult b = train_tpmae(d.windows, d.virtual_skeleton, d.stats, config);
    CHECK(a.log_lines == b.log_lines);
    CHECK(encode_checkpoint(a.checkpoint) == encode_checkpoint(b.checkpoint));

    // More workers than windows still works (idle shards contribute nothing).
    TrainConfig many = config;
    many.threads = 8;
    const TrainResult c = train_tpmae(d.windows, d.virtual_skeleton, d.stats, many);
    CHECK(c.log_lines.size() == 2);
}

TEST_CASE("joint stage trains both networks and aligns the latents") {
    const TinyData d = tiny_data(2, 504);

    TrainConfig pre;
    pre.epochs = 40;
    pre.batch = 1;
    pre.lr = 1e-3;
    pre.seed = 21;
    const TrainResult tpmae_result =
        train_tpmae(d.windows, d.virtual_skeleton, d.stats, pre);

    TrainConfig joint;
    joint.epochs = 30;
    joint.batch = 1;
    joint.lr = 1e-3;
    joint.seed = 22;
    const FeatureProvider provider; // zeros, 512
    const TrainResult r = train_vtm(d.windows, d.cam, tpmae_result.checkpoint,
                                    provider, joint);

    REQUIRE(r.log_lines.size() == 30);
    const std::vector<double> first = parse_log_line(r.log_lines.front());
    const std::vector<double> last = parse_log_line(r.log_lines.back());
    REQUIRE(first.size() == 8); // epoch, lr, L_rec, L_s, L_ma, L_b, L_pred, L_s_v
    CHECK(last[4] < first[4]); // alignment loss decreases on a tiny fixed set
    CHECK(last[5] < first[5]); // bone loss decreases too

    CHECK(require_meta(r.checkpoint, "kind") == "vtm");
    CHECK(require_meta(r.checkpoint, "feature_dim") == "512");
    CHECK(require_meta(r.checkpoint, "feature_mode") == "zeros");
    CHECK(r.checkpoint.params.count("tpmae.enc_u1.w") == 1);
    CHECK(r.checkpoint.params.count("tpve.kp_u1.w") == 1);

    // Models rebuilt from the checkpoint carry exactly the stored values.
    TpmaeModel mae = tpmae_from_checkpoint(r.checkpoint);
    TpveModel ve = tpve_from_checkpoint(r.checkpoint);
    CHECK(mae.enc_u1.w.values() ==
          r.checkpoint.params.at("tpmae.enc_u1.w").values);
    CHECK(ve.bone_head.w.values() ==
          r.checkpoint.params.at("tpve.bone_head.w").values);

    // Reconstruction runs end to end on a training window's keypoints.
    const Reconstruction rec =
        reconstruct(d.windows[0].keypoints, {}, ve, mae, provider, d.cam,
                    r.checkpoint.skeleton, r.checkpoint.stats);
    CHECK(rec.poses.size() == 32);
}

TEST_CASE("joint stage rejects bad inputs") {
    const TinyData d = tiny_data(1, 505);

    TrainConfig pre;
    pre.epochs = 1;
    pre.batch = 1;
    pre.seed = 31;
    const TrainResult tpmae_result =
        train_tpmae(d.windows, d.virtual_skeleton, d.stats, pre);

    TrainConfig joint;
    joint.epochs = 1;
    joint.batch = 1;
    joint.seed = 32;
    const FeatureProvider provider;

    CHECK_THROWS_AS(train_vtm({}, d.cam, tpmae_result.checkpoint, provider, joint),
                    ConfigError);

    std::vector<TrainingWindow> bad_ratios = d.windows;
    bad_ratios[0].ratios.values.pop_back();
    CHECK_THROWS_AS(train_vtm(bad_ratios, d.cam, tpmae_result.checkpoint,
                              provider, joint),
                    ShapeError);

    std::vector<TrainingWindow> bad_frames = d.windows;
    bad_frames[0].keypoints.frames = 28;
    bad_frames[0].keypoints.data.resize(static_cast<size_t>(28) * kJointCount *
                                        KeypointSequence::kChannels);
    CHECK_THROWS_AS(train_vtm(bad_frames, d.cam, tpmae_result.checkpoint,
                              provider, joint),
                    MismatchError);

    // A joint-stage checkpoint is not a valid starting point for itself.
    const TrainResult vtm_result = train_vtm(d.windows, d.cam,
                                             tpmae_result.checkpoint, provider, joint);
    CHECK_THROWS_AS(train_vtm(d.windows, d.cam, vtm_result.checkpoint, provider,
                              joint),
                    CheckpointError);

    CHECK_THROWS_AS(train_tpmae({}, d.virtual_skeleton, d.stats, pre), ConfigError);
}

} // TEST_SUITE
