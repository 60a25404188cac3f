#include "vtm/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "vtm/bvh.hpp"
#include "vtm/errors.hpp"
#include "vtm/motion_io.hpp"

namespace vtm {
namespace {

constexpr double kTau = 6.283185307179586;

Vec3 unit_vec(nn::Rng& rng) {
    while (true) {
        const Vec3 v(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                     rng.uniform(-1.0, 1.0));
        const double n = v.norm();
        if (n > 0.1 && n <= 1.0) {
            return v / n;
        }
    }
}

} // namespace

Skeleton template_skeleton() {
    std::vector<Vec3> offsets(kJointCount);
    offsets[0] = Vec3(0.00, 0.00, 0.00);   // pelvis
    offsets[1] = Vec3(0.09, -0.07, 0.00);  // left_hip
    offsets[2] = Vec3(-0.09, -0.07, 0.00); // right_hip
    offsets[3] = Vec3(0.00, 0.11, -0.01);  // spine1
    offsets[4] = Vec3(0.04, -0.38, 0.00);  // left_knee
    offsets[5] = Vec3(-0.04, -0.38, 0.00); // right_knee
    offsets[6] = Vec3(0.00, 0.13, 0.01);   // spine2
    offsets[7] = Vec3(-0.01, -0.40, -0.04); // left_ankle
    offsets[8] = Vec3(0.01, -0.40, -0.04); // right_ankle
    offsets[9] = Vec3(0.00, 0.06, 0.01);   // spine3
    offsets[10] = Vec3(0.02, -0.06, 0.12);  // left_foot
    offsets[11] = Vec3(-0.02, -0.06, 0.12); // right_foot
    offsets[12] = Vec3(0.00, 0.21, -0.02);  // neck
    offsets[13] = Vec3(0.07, 0.11, -0.02);  // left_collar
    offsets[14] = Vec3(-0.07, 0.11, -0.02); // right_collar
    offsets[15] = Vec3(0.00, 0.21, 0.03);   // head
    offsets[16] = Vec3(0.10, 0.02, -0.01);  // left_shoulder
    offsets[17] = Vec3(-0.10, 0.02, -0.01); // right_shoulder
    offsets[18] = Vec3(0.26, 0.00, -0.01);  // left_elbow
    offsets[19] = Vec3(-0.26, 0.00, -0.01); // right_elbow
    offsets[20] = Vec3(0.25, 0.00, 0.00);   // left_wrist
    offsets[21] = Vec3(-0.25, 0.00, 0.00);  // right_wrist
    offsets[22] = Vec3(0.08, 0.00, 0.01);   // left_hand
    offsets[23] = Vec3(-0.08, 0.00, 0.01);  // right_hand
    return Skeleton::canonical(offsets);
}

Skeleton synth_skeleton(nn::Rng& rng) {
    Skeleton s = template_skeleton();
    for (int j = 1; j < kJointCount; ++j) {
        s.offsets[static_cast<size_t>(j)] *= rng.uniform(0.85, 1.15);
    }
    return s;
}

std::vector<Pose> synth_motion(const Skeleton& skeleton, int frames,
                               nn::Rng& rng) {
    if (frames < 32) {
        throw ConfigError("synthetic sequences need at least 32 frames");
    }
    skeleton.validate();

    struct Swing {
        Vec3 axis;
        double amplitude;
        double omega;
        double phase;
    };
    std::vector<Swing> swings(kJointCount);
    for (int j = 0; j < kJointCount; ++j) {
        Swing& sw = swings[static_cast<size_t>(j)];
        sw.axis = unit_vec(rng);
        // The root stays more upright than the limbs.
        sw.amplitude = j == 0 ? rng.uniform(0.08, 0.25) : rng.uniform(0.10, 0.40);
        sw.omega = kTau * rng.uniform(0.5, 1.5) / 120.0;
        sw.phase = rng.uniform(0.0, kTau);
    }

    const double heading = rng.uniform(0.0, kTau);
    const Vec3 dir(std::cos(heading), 0.0, std::sin(heading));
    const Vec3 lateral(-dir.z(), 0.0, dir.x());
    const Vec3 start(rng.uniform(-0.3, 0.3), rng.uniform(0.85, 1.0),
                     rng.uniform(-0.3, 0.3));
    // Total drift capped at 0.8 m so long clips stay in front of the camera.
    const double speed = std::min(0.02, 0.8 / static_cast<double>(frames));
    const double sway_amp = rng.uniform(0.01, 0.03);
    const double sway_omega = kTau * rng.uniform(0.5, 1.5) / 120.0;
    const double sway_phase = rng.uniform(0.0, kTau);
    const double bob_amp = rng.uniform(0.005, 0.02);
    const double bob_omega = 2.0 * sway_omega; // two steps per sway cycle
    const double bob_phase = rng.uniform(0.0, kTau);

    std::vector<Pose> poses(static_cast<size_t>(frames));
    for (int t = 0; t < frames; ++t) {
        Pose& pose = poses[static_cast<size_t>(t)];
        pose.rotations.resize(kJointCount);
        for (int j = 0; j < kJointCount; ++j) {
            const Swing& sw = swings[static_cast<size_t>(j)];
            const double angle =
                sw.amplitude * std::sin(sw.omega * t + sw.phase);
            pose.rotations[static_cast<size_t>(j)] =
                Rotation::from_axis_angle(sw.axis, angle);
        }
        pose.root_position =
            start + dir * (speed * t) +
            lateral * (sway_amp * std::sin(sway_omega * t + sway_phase)) +
            Vec3(0.0, bob_amp * std::sin(bob_omega * t + bob_phase), 0.0);
    }
    return poses;
}

Camera synth_camera() {
    Camera cam;
    cam.name = "synthcam";
    cam.fx = 1000.0;
    cam.fy = 1000.0;
    cam.cx = 500.0;
    cam.cy = 500.0;
    cam.width = 1000.0;
    cam.height = 1000.0;
    cam.rotation = Rotation::identity();
    cam.translation = Vec3(0.0, -0.9, 4.0);
    return cam;
}

std::vector<std::string> synth_bvh_files(const SynthOptions& options,
                                         const std::string& out_dir) {
    if (options.sequences < 1) {
        throw ConfigError("need at least one synthetic sequence");
    }
    if (options.frames < 32) {
        throw ConfigError("synthetic sequences need at least 32 frames");
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + out_dir + "'");
    }

    std::vector<std::string> paths;
    for (int i = 0; i < options.sequences; ++i) {
        char stem[16];
        std::snprintf(stem, sizeof(stem), "seq%03d", i);
        nn::Rng rng(nn::seed_for(options.seed, stem));
        const Skeleton skeleton = synth_skeleton(rng);
        const std::vector<Pose> poses =
            synth_motion(skeleton, options.frames, rng);
        const BvhDocument doc =
            bvh_from_motion(skeleton, poses, options.frame_time);

        const std::string path = out_dir + "/" + stem + ".bvh";
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw IoError("cannot write '" + path + "'");
        }
        out << write_bvh(doc);
        if (!out) {
            throw IoError("cannot write '" + path + "'");
        }
        paths.push_back(path);
    }
    save_camera(synth_camera(), out_dir + "/camera.txt");
    return paths;
}

} // namespace vtm
