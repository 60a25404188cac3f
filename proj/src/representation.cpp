#include "vtm/representation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "vtm/errors.hpp"
#include "vtm/kinematics.hpp"

namespace vtm {

BodyPartition BodyPartition::canonical() {
    const CanonicalLayout& layout = canonical_layout();
    BodyPartition p;
    p.upper = layout.upper;
    p.lower = layout.lower;
    return p;
}

void BodyPartition::validate() const {
    std::set<int> upper_set(upper.begin(), upper.end());
    std::set<int> lower_set(lower.begin(), lower.end());
    if (upper_set.size() != upper.size() || lower_set.size() != lower.size()) {
        throw TopologyMismatch("body partition lists contain duplicates");
    }
    if (upper_set.count(0) == 0 || lower_set.count(0) == 0) {
        throw TopologyMismatch("both body parts must contain the root");
    }
    std::set<int> overlap;
    std::set_intersection(upper_set.begin(), upper_set.end(),
                          lower_set.begin(), lower_set.end(),
                          std::inserter(overlap, overlap.begin()));
    if (overlap != std::set<int>{0}) {
        throw TopologyMismatch("body parts may only share the root joint");
    }
    if (upper_set.size() + lower_set.size() !=
        static_cast<size_t>(kJointCount) + 1) {
        throw TopologyMismatch("body partition must cover all joints");
    }
    for (int j : upper) {
        if (j < 0 || j >= kJointCount) {
            throw TopologyMismatch("body partition joint index out of range");
        }
    }
    for (int j : lower) {
        if (j < 0 || j >= kJointCount) {
            throw TopologyMismatch("body partition joint index out of range");
        }
    }
}

MotionSequence build_motion_sequence(const std::vector<Pose>& poses,
                                     const Skeleton& skeleton,
                                     const Camera& cam) {
    if (poses.empty()) {
        throw ShapeError("build_motion_sequence: no frames");
    }
    if (skeleton.joint_count() != kJointCount) {
        throw TopologyMismatch("build_motion_sequence: expects the canonical skeleton");
    }
    const int t_count = static_cast<int>(poses.size());
    MotionSequence ms;
    ms.frames = t_count;
    ms.data.assign(static_cast<size_t>(t_count) * kJointCount *
                       MotionSequence::kChannels,
                   0.0);

    for (int t = 0; t < t_count; ++t) {
        const Pose& pose = poses[static_cast<size_t>(t)];
        const FkResult fk = forward_kinematics(skeleton, pose);
        for (int j = 0; j < kJointCount; ++j) {
            const Rotation rot =
                j == 0 ? cam.rotation * pose.rotations[0]
                       : pose.rotations[static_cast<size_t>(j)];
            const Rot6d six = rot_to_6d(rot);
            const Vec3 p =
                cam.to_camera_space(fk.positions[static_cast<size_t>(j)]);
            for (int c = 0; c < 6; ++c) {
                ms.at(t, j, c) = six[c];
            }
            ms.at(t, j, 6) = p.x();
            ms.at(t, j, 7) = p.y();
            ms.at(t, j, 8) = p.z();
        }
    }
    refresh_motion_velocities(ms);
    return ms;
}

std::vector<Pose> poses_from_motion(const MotionSequence& ms) {
    std::vector<Pose> poses(static_cast<size_t>(ms.frames));
    for (int t = 0; t < ms.frames; ++t) {
        Pose& pose = poses[static_cast<size_t>(t)];
        pose.rotations.resize(kJointCount);
        for (int j = 0; j < kJointCount; ++j) {
            Rot6d six;
            for (int c = 0; c < 6; ++c) {
                six[c] = ms.at(t, j, c);
            }
            pose.rotations[static_cast<size_t>(j)] = six_d_to_rot(six);
        }
        pose.root_position =
            Vec3(ms.at(t, 0, 6), ms.at(t, 0, 7), ms.at(t, 0, 8));
    }
    return poses;
}

KeypointSequence project_keypoints(const MotionSequence& ms,
                                   const Camera& cam) {
    KeypointSequence ks;
    ks.frames = ms.frames;
    ks.data.assign(static_cast<size_t>(ms.frames) * kJointCount *
                       KeypointSequence::kChannels,
                   0.0);
    for (int t = 0; t < ms.frames; ++t) {
        for (int j = 0; j < kJointCount; ++j) {
            const Vec3 p(ms.at(t, j, 6), ms.at(t, j, 7), ms.at(t, j, 8));
            const Vec2 uv = cam.project(p);
            ks.at(t, j, 0) = uv.x();
            ks.at(t, j, 1) = uv.y();
        }
    }
    refresh_keypoint_velocities(ks);
    return ks;
}

void refresh_motion_velocities(MotionSequence& ms) {
    for (int j = 0; j < kJointCount; ++j) {
        for (int c = 0; c < 3; ++c) {
            for (int t = ms.frames - 1; t >= 0; --t) {
                ms.at(t, j, 9 + c) =
                    t == 0 ? 0.0 : ms.at(t, j, 6 + c) - ms.at(t - 1, j, 6 + c);
            }
        }
    }
}

void refresh_keypoint_velocities(KeypointSequence& ks) {
    for (int j = 0; j < kJointCount; ++j) {
        for (int c = 0; c < 2; ++c) {
            for (int t = ks.frames - 1; t >= 0; --t) {
                ks.at(t, j, 2 + c) =
                    t == 0 ? 0.0 : ks.at(t, j, c) - ks.at(t - 1, j, c);
            }
        }
    }
}

std::vector<double> select_joints(const std::vector<double>& data, int frames,
                                  int channels,
                                  const std::vector<int>& joints) {
    if (data.size() != static_cast<size_t>(frames) * kJointCount *
                           static_cast<size_t>(channels)) {
        throw ShapeError("select_joints: array size does not match frames");
    }
    std::vector<double> out(static_cast<size_t>(frames) * joints.size() *
                            static_cast<size_t>(channels));
    size_t k = 0;
    for (int t = 0; t < frames; ++t) {
        const size_t frame_base =
            static_cast<size_t>(t) * kJointCount * static_cast<size_t>(channels);
        for (int j : joints) {
            const double* src =
                data.data() + frame_base + static_cast<size_t>(j) * channels;
            for (int c = 0; c < channels; ++c, ++k) {
                out[k] = src[c];
            }
        }
    }
    return out;
}

std::vector<double> merge_parts(const std::vector<double>& upper,
                                const std::vector<double>& lower,
                                const BodyPartition& partition, int frames,
                                int channels) {
    partition.validate();
    const size_t cc = static_cast<size_t>(channels);
    if (upper.size() != static_cast<size_t>(frames) * partition.upper.size() * cc ||
        lower.size() != static_cast<size_t>(frames) * partition.lower.size() * cc) {
        throw ShapeError("merge_parts: part sizes do not match the partition");
    }
    std::vector<double> out(static_cast<size_t>(frames) * kJointCount * cc);
    for (int t = 0; t < frames; ++t) {
        const size_t frame_base = static_cast<size_t>(t) * kJointCount * cc;
        const size_t upper_base =
            static_cast<size_t>(t) * partition.upper.size() * cc;
        const size_t lower_base =
            static_cast<size_t>(t) * partition.lower.size() * cc;
        for (size_t r = 0; r < partition.upper.size(); ++r) {
            const int j = partition.upper[r];
            std::copy_n(upper.data() + upper_base + r * cc, cc,
                        out.data() + frame_base + static_cast<size_t>(j) * cc);
        }
        for (size_t r = 0; r < partition.lower.size(); ++r) {
            const int j = partition.lower[r];
            std::copy_n(lower.data() + lower_base + r * cc, cc,
                        out.data() + frame_base + static_cast<size_t>(j) * cc);
        }
    }
    return out;
}

std::vector<double> to_channel_major(const std::vector<double>& data,
                                     int frames, int row_channels) {
    if (frames <= 0 || row_channels <= 0 ||
        data.size() != static_cast<size_t>(frames) * static_cast<size_t>(row_channels)) {
        throw ShapeError("to_channel_major: size mismatch");
    }
    std::vector<double> out(data.size());
    for (int t = 0; t < frames; ++t) {
        for (int c = 0; c < row_channels; ++c) {
            out[static_cast<size_t>(c) * frames + static_cast<size_t>(t)] =
                data[static_cast<size_t>(t) * row_channels + static_cast<size_t>(c)];
        }
    }
    return out;
}

std::vector<double> to_frame_major(const std::vector<double>& data, int frames,
                                   int row_channels) {
    if (frames <= 0 || row_channels <= 0 ||
        data.size() != static_cast<size_t>(frames) * static_cast<size_t>(row_channels)) {
        throw ShapeError("to_frame_major: size mismatch");
    }
    std::vector<double> out(data.size());
    for (int t = 0; t < frames; ++t) {
        for (int c = 0; c < row_channels; ++c) {
            out[static_cast<size_t>(t) * row_channels + static_cast<size_t>(c)] =
                data[static_cast<size_t>(c) * frames + static_cast<size_t>(t)];
        }
    }
    return out;
}

std::vector<double> normalize_keypoints(const KeypointSequence& ks,
                                        const Camera& cam) {
    if (cam.width <= 0.0 || cam.height <= 0.0) {
        throw ConfigError("normalize_keypoints: camera image size must be positive");
    }
    std::vector<double> out(ks.data.size());
    const double sx = 2.0 / cam.width;
    const double sy = 2.0 / cam.height;
    for (int t = 0; t < ks.frames; ++t) {
        for (int j = 0; j < kJointCount; ++j) {
            const size_t base =
                (static_cast<size_t>(t) * kJointCount + static_cast<size_t>(j)) *
                KeypointSequence::kChannels;
            out[base + 0] = ks.data[base + 0] * sx - 1.0;
            out[base + 1] = ks.data[base + 1] * sy - 1.0;
            out[base + 2] = ks.data[base + 2] * sx;
            out[base + 3] = ks.data[base + 3] * sy;
        }
    }
    return out;
}

NormStats compute_motion_stats(const std::vector<MotionSequence>& sequences) {
    NormStats stats;
    stats.mean.assign(NormStats::kChannelCount, 0.0);
    stats.stdev.assign(NormStats::kChannelCount, 0.0);
    long total = 0;
    for (const MotionSequence& ms : sequences) {
        total += ms.frames;
    }
    if (total == 0) {
        throw ShapeError("compute_motion_stats: no frames");
    }
    for (const MotionSequence& ms : sequences) {
        for (int t = 0; t < ms.frames; ++t) {
            const double* row = ms.data.data() +
                                static_cast<size_t>(t) * NormStats::kChannelCount;
            for (int c = 0; c < NormStats::kChannelCount; ++c) {
                stats.mean[static_cast<size_t>(c)] += row[c];
            }
        }
    }
    for (double& m : stats.mean) {
        m /= static_cast<double>(total);
    }
    for (const MotionSequence& ms : sequences) {
        for (int t = 0; t < ms.frames; ++t) {
            const double* row = ms.data.data() +
                                static_cast<size_t>(t) * NormStats::kChannelCount;
            for (int c = 0; c < NormStats::kChannelCount; ++c) {
                const double d = row[c] - stats.mean[static_cast<size_t>(c)];
                stats.stdev[static_cast<size_t>(c)] += d * d;
            }
        }
    }
    for (double& s : stats.stdev) {
        s = std::sqrt(s / static_cast<double>(total));
        // Constant channels (e.g. first-frame-zero velocities of a static
        // clip) would otherwise divide by zero.
        if (s < 1e-6) {
            s = 1e-6;
        }
    }
    return stats;
}

std::vector<double> standardize_motion(const MotionSequence& ms,
                                       const NormStats& stats) {
    if (stats.mean.size() != static_cast<size_t>(NormStats::kChannelCount) ||
        stats.stdev.size() != static_cast<size_t>(NormStats::kChannelCount)) {
        throw ShapeError("standardize_motion: bad stats size");
    }
    std::vector<double> out(ms.data.size());
    for (int t = 0; t < ms.frames; ++t) {
        const size_t base = static_cast<size_t>(t) * NormStats::kChannelCount;
        for (int c = 0; c < NormStats::kChannelCount; ++c) {
            out[base + static_cast<size_t>(c)] =
                (ms.data[base + static_cast<size_t>(c)] -
                 stats.mean[static_cast<size_t>(c)]) /
                stats.stdev[static_cast<size_t>(c)];
        }
    }
    return out;
}

int window_count(int frames, int window, int stride) {
    if (frames < window) {
        return 0;
    }
    return (frames - window) / stride + 1;
}

std::vector<TrainingWindow> make_windows(
    const std::vector<SequenceSample>& sequences, int window, int stride) {
    if (window < 1 || stride < 1) {
        throw ConfigError("make_windows: window and stride must be positive");
    }
    std::vector<TrainingWindow> out;
    for (const SequenceSample& seq : sequences) {
        if (seq.motion.frames != seq.keypoints.frames) {
            throw MismatchError("make_windows: motion and keypoints disagree on '" +
                                seq.sequence_id + "'");
        }
        const int count = window_count(seq.motion.frames, window, stride);
        if (count == 0) {
            std::fprintf(stderr,
                         "warning: sequence '%s' has %d frames, shorter than "
                         "the %d-frame window; skipped\n",
                         seq.sequence_id.c_str(), seq.motion.frames, window);
            continue;
        }
        for (int i = 0; i < count; ++i) {
            const int offset = i * stride;
            TrainingWindow w;
            w.sequence_id = seq.sequence_id;
            w.offset = offset;
            w.ratios = seq.ratios;
            w.feature_dim = seq.feature_dim;

            w.motion.frames = window;
            w.motion.skeleton_id = seq.motion.skeleton_id;
            w.motion.camera_id = seq.motion.camera_id;
            const size_t motion_row =
                static_cast<size_t>(kJointCount) * MotionSequence::kChannels;
            w.motion.data.assign(
                seq.motion.data.begin() + static_cast<long>(offset * motion_row),
                seq.motion.data.begin() +
                    static_cast<long>((offset + window) * motion_row));
            refresh_motion_velocities(w.motion);

            w.keypoints.frames = window;
            const size_t kp_row =
                static_cast<size_t>(kJointCount) * KeypointSequence::kChannels;
            w.keypoints.data.assign(
                seq.keypoints.data.begin() + static_cast<long>(offset * kp_row),
                seq.keypoints.data.begin() +
                    static_cast<long>((offset + window) * kp_row));
            refresh_keypoint_velocities(w.keypoints);

            if (seq.feature_dim > 0 && !seq.features.empty()) {
                const size_t fdim = static_cast<size_t>(seq.feature_dim);
                w.features.assign(
                    seq.features.begin() + static_cast<long>(offset * fdim),
                    seq.features.begin() +
                        static_cast<long>((offset + window) * fdim));
            }
            out.push_back(std::move(w));
        }
    }
    return out;
}

} // namespace vtm
