#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vtm/camera.hpp"
#include "vtm/nn.hpp"
#include "vtm/skeleton.hpp"

namespace vtm {

// Procedural motion generator: a desk-scale stand-in for mocap recordings.
// Skeletons are jittered around a hand-authored human template; motions are
// smooth sinusoidal joint swings over a slow, bounded walking path, so all
// per-frame position deltas stay below 0.2 m and every joint stays well in
// front of the default camera.

struct SynthOptions {
    int sequences = 3;
    int frames = 64; // must be >= 32
    std::uint64_t seed = 0;
    double frame_time = 1.0 / 30.0;
};

// Canonical 24-joint template, offsets in meters, y-up, subject facing +z.
Skeleton template_skeleton();

// Template with every bone length scaled by an independent U(0.85, 1.15) draw.
Skeleton synth_skeleton(nn::Rng& rng);

// Smooth per-joint swings plus a walking-like root path. The pelvis starts
// near the world origin at standing height and drifts at most ~0.8 m total.
// Throws ConfigError when frames < 32.
std::vector<Pose> synth_motion(const Skeleton& skeleton, int frames,
                               nn::Rng& rng);

// Camera viewing the synthetic world: identity orientation, 4 m in front of
// the subject, slightly raised so the body fills the frame.
Camera synth_camera();

// Writes sequences as seq000.bvh, seq001.bvh, ... into out_dir (created if
// needed) and the matching camera as camera.txt. Each sequence draws from its
// own stream keyed by (seed, file stem), so output is byte-stable across runs
// and independent of generation order. Returns the BVH paths in order.
std::vector<std::string> synth_bvh_files(const SynthOptions& options,
                                         const std::string& out_dir);

} // namespace vtm
