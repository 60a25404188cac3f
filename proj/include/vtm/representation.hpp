#pragma once

#include <string>
#include <vector>

#include "vtm/camera.hpp"
#include "vtm/skeleton.hpp"

namespace vtm {

// Frame-major motion array: frames x 24 joints x 12 channels. Per joint the
// channels are [rot6d(6), position(3), velocity(3)] in camera space. The root
// row stores the camera-composed root rotation (world root rotation left-
// multiplied by the camera rotation) so the array is self-contained: running
// FK on the virtual skeleton with these rotations and the root position
// reproduces the position channels. Non-root rows keep their local rotations.
struct MotionSequence {
    static constexpr int kChannels = 12;

    int frames = 0;
    std::vector<double> data; // frames * 24 * 12
    std::string skeleton_id;
    std::string camera_id;

    double& at(int t, int joint, int channel) {
        return data[(static_cast<size_t>(t) * kJointCount + static_cast<size_t>(joint)) *
                        kChannels +
                    static_cast<size_t>(channel)];
    }
    double at(int t, int joint, int channel) const {
        return data[(static_cast<size_t>(t) * kJointCount + static_cast<size_t>(joint)) *
                        kChannels +
                    static_cast<size_t>(channel)];
    }
};

// Frame-major keypoint array: frames x 24 joints x 4 channels,
// [pixel u, pixel v, pixel velocity u, pixel velocity v].
struct KeypointSequence {
    static constexpr int kChannels = 4;

    int frames = 0;
    std::vector<double> data; // frames * 24 * 4

    double& at(int t, int joint, int channel) {
        return data[(static_cast<size_t>(t) * kJointCount + static_cast<size_t>(joint)) *
                        kChannels +
                    static_cast<size_t>(channel)];
    }
    double at(int t, int joint, int channel) const {
        return data[(static_cast<size_t>(t) * kJointCount + static_cast<size_t>(joint)) *
                        kChannels +
                    static_cast<size_t>(channel)];
    }
};

// Upper/lower body split. Both lists contain the root joint (index 0) so each
// part carries the global trajectory; together they cover all 24 joints.
struct BodyPartition {
    std::vector<int> upper;
    std::vector<int> lower;

    static BodyPartition canonical();
    // Throws TopologyMismatch unless the two lists cover every joint exactly
    // once apart from the shared root.
    void validate() const;
};

// Motion array for poses already aligned onto the virtual skeleton. Positions
// are FK results converted to camera space; velocities are per-frame position
// differences with a zero first frame.
MotionSequence build_motion_sequence(const std::vector<Pose>& poses,
                                     const Skeleton& skeleton,
                                     const Camera& cam);

// Rebuild per-frame poses (camera-composed root rotation, local joint
// rotations, camera-space root position) from the rotation/position channels.
std::vector<Pose> poses_from_motion(const MotionSequence& ms);

// Projects the position channels through the camera intrinsics. Throws
// BehindCamera when any joint depth is <= 1e-6.
KeypointSequence project_keypoints(const MotionSequence& ms, const Camera& cam);

// Recompute the velocity channels from the position channels (first frame
// zero). Used after slicing windows and after lossy storage round trips.
void refresh_motion_velocities(MotionSequence& ms);
void refresh_keypoint_velocities(KeypointSequence& ks);

// Select the rows of `joints` from a frame-major [T, 24, channels] array,
// producing frame-major [T, |joints|, channels].
std::vector<double> select_joints(const std::vector<double>& data, int frames,
                                  int channels, const std::vector<int>& joints);

// Inverse of two select_joints calls over a partition: writes the upper and
// lower parts back into a full [T, 24, channels] array. The shared root row
// must be identical in both parts.
std::vector<double> merge_parts(const std::vector<double>& upper,
                                const std::vector<double>& lower,
                                const BodyPartition& partition, int frames,
                                int channels);

// Frame-major [T, rows, channels] -> channel-major [rows * channels, T]
// (network layout) and back.
std::vector<double> to_channel_major(const std::vector<double>& data,
                                     int frames, int row_channels);
std::vector<double> to_frame_major(const std::vector<double>& data, int frames,
                                   int row_channels);

// Keypoints normalized for the networks: pixels mapped to [-1, 1] by the
// image size, velocities scaled accordingly (no offset). Frame-major output
// with the same [T, 24, 4] layout.
std::vector<double> normalize_keypoints(const KeypointSequence& ks,
                                        const Camera& cam);

// Per-channel standardization statistics over the 288 motion channels.
struct NormStats {
    std::vector<double> mean;  // 288
    std::vector<double> stdev; // 288, clamped to >= 1e-6

    static constexpr int kChannelCount = kJointCount * MotionSequence::kChannels;
};

NormStats compute_motion_stats(const std::vector<MotionSequence>& sequences);

// (x - mean) / stdev per channel; output has the input's frame-major layout.
std::vector<double> standardize_motion(const MotionSequence& ms,
                                       const NormStats& stats);

// One training example: a fixed-length slice of a sequence with its paired
// keypoints, optional per-frame visual features, and the sequence's bone
// ratios relative to the virtual skeleton.
struct TrainingWindow {
    MotionSequence motion;
    KeypointSequence keypoints;
    std::vector<double> features; // frames * feature_dim, empty when unused
    int feature_dim = 0;
    BoneRatios ratios;
    std::string sequence_id;
    int offset = 0;
};

struct SequenceSample {
    MotionSequence motion;
    KeypointSequence keypoints;
    std::vector<double> features; // frames * feature_dim, may be empty
    int feature_dim = 0;
    BoneRatios ratios;
    std::string sequence_id;
};

// Sliding windows at offsets 0, stride, 2*stride, ...; sequences shorter than
// the window are skipped with a warning on stderr. Velocities are recomputed
// inside each window so every window is self-consistent.
std::vector<TrainingWindow> make_windows(const std::vector<SequenceSample>& sequences,
                                         int window = 32, int stride = 4);

// floor((frames - window) / stride) + 1, or 0 when frames < window.
int window_count(int frames, int window, int stride);

} // namespace vtm
