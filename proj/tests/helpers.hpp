#pragma once

// Shared deterministic generators for the test suite. Everything is seeded
// through vtm::nn::Rng so test data is identical across runs and platforms.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "vtm/bvh.hpp"
#include "vtm/camera.hpp"
#include "vtm/nn.hpp"
#include "vtm/rotation.hpp"
#include "vtm/skeleton.hpp"

namespace vtm::test {

using nn::Rng;

inline Vec3 random_vec(Rng& rng, double lo, double hi) {
    return Vec3(rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi));
}

inline Vec3 random_unit_vec(Rng& rng) {
    while (true) {
        const Vec3 v = random_vec(rng, -1.0, 1.0);
        const double n = v.norm();
        if (n > 0.1 && n <= 1.0) {
            return v / n;
        }
    }
}

inline Rotation random_rotation(Rng& rng) {
    while (true) {
        const double w = rng.uniform(-1.0, 1.0);
        const Vec3 v = random_vec(rng, -1.0, 1.0);
        const double n = std::sqrt(w * w + v.squaredNorm());
        if (n > 0.1 && n <= 1.0) {
            return Rotation(w / n, v.x() / n, v.y() / n, v.z() / n);
        }
    }
}

// Canonical-topology skeleton with every bone pointing in a bone-specific
// stable direction (jittered per skeleton), lengths in [0.12, 0.42] m. Stable
// directions keep average_skeleton() well away from the degenerate
// direction-cancellation case, like real mocap rigs.
inline Skeleton random_skeleton(Rng& rng, double direction_jitter = 0.2) {
    const CanonicalLayout& layout = canonical_layout();
    std::vector<Vec3> offsets(kJointCount, Vec3::Zero());
    for (int j = 1; j < kJointCount; ++j) {
        Rng dir_rng(nn::seed_for(9100, layout.names[static_cast<size_t>(j)]));
        Vec3 dir = random_unit_vec(dir_rng);
        dir += direction_jitter * random_vec(rng, -1.0, 1.0);
        dir.normalize();
        const double len = rng.uniform(0.12, 0.42);
        offsets[static_cast<size_t>(j)] = len * dir;
    }
    return Skeleton::canonical(offsets);
}

inline Pose random_pose(Rng& rng) {
    Pose pose;
    pose.rotations.resize(kJointCount);
    for (int j = 0; j < kJointCount; ++j) {
        pose.rotations[static_cast<size_t>(j)] = random_rotation(rng);
    }
    pose.root_position = random_vec(rng, -1.0, 1.0);
    return pose;
}

inline Camera random_camera(Rng& rng) {
    Camera cam;
    cam.name = "testcam";
    cam.fx = rng.uniform(500.0, 1500.0);
    cam.fy = rng.uniform(500.0, 1500.0);
    cam.cx = rng.uniform(300.0, 700.0);
    cam.cy = rng.uniform(300.0, 700.0);
    cam.width = 2.0 * cam.cx;
    cam.height = 2.0 * cam.cy;
    cam.rotation = random_rotation(rng);
    cam.translation = random_vec(rng, -0.5, 0.5);
    return cam;
}

// Random BVH document: a random joint tree (joints stored depth-first),
// random per-joint rotation channel orders, end sites on some leaves, and
// channel values inside text-round-trippable ranges.
inline BvhDocument random_bvh_document(Rng& rng, int max_joints = 8,
                                       int max_frames = 6) {
    const int joint_count =
        2 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_joints - 1));

    const BvhChannel rot_orders[6][3] = {
        {BvhChannel::Zrotation, BvhChannel::Xrotation, BvhChannel::Yrotation},
        {BvhChannel::Xrotation, BvhChannel::Yrotation, BvhChannel::Zrotation},
        {BvhChannel::Yrotation, BvhChannel::Zrotation, BvhChannel::Xrotation},
        {BvhChannel::Zrotation, BvhChannel::Yrotation, BvhChannel::Xrotation},
        {BvhChannel::Xrotation, BvhChannel::Zrotation, BvhChannel::Yrotation},
        {BvhChannel::Yrotation, BvhChannel::Xrotation, BvhChannel::Zrotation},
    };

    // Build with arbitrary parent links first, re-emit depth-first below.
    std::vector<BvhJoint> built;
    for (int j = 0; j < joint_count; ++j) {
        BvhJoint joint;
        joint.name = "joint" + std::to_string(j);
        joint.parent =
            j == 0 ? -1 : static_cast<int>(rng.next() % static_cast<std::uint64_t>(j));
        joint.offset = j == 0 ? Vec3::Zero() : random_vec(rng, -0.5, 0.5);
        const auto& order = rot_orders[rng.next() % 6];
        if (j == 0) {
            joint.channels = {BvhChannel::Xposition, BvhChannel::Yposition,
                              BvhChannel::Zposition};
            joint.channels.insert(joint.channels.end(), order, order + 3);
            if (rng.next() % 2 == 0) {
                std::rotate(joint.channels.begin(), joint.channels.begin() + 3,
                            joint.channels.end());
            }
        } else {
            joint.channels.assign(order, order + 3);
        }
        built.push_back(joint);
    }
    for (int j = 0; j < joint_count; ++j) {
        bool leaf = true;
        for (int k = 0; k < joint_count; ++k) {
            if (built[static_cast<size_t>(k)].parent == j) {
                leaf = false;
                break;
            }
        }
        if (leaf && rng.next() % 2 == 0) {
            BvhJoint end;
            end.name = built[static_cast<size_t>(j)].name + "_end";
            end.parent = j;
            end.offset = random_vec(rng, -0.2, 0.2);
            end.is_end_site = true;
            built.push_back(end);
        }
    }

    BvhDocument doc;
    std::vector<int> remap(built.size(), -1);
    std::function<void(int)> emit = [&](int old_index) {
        BvhJoint j = built[static_cast<size_t>(old_index)];
        j.parent = j.parent < 0 ? -1 : remap[static_cast<size_t>(j.parent)];
        remap[static_cast<size_t>(old_index)] = static_cast<int>(doc.joints.size());
        doc.joints.push_back(j);
        for (size_t c = 0; c < built.size(); ++c) {
            if (built[c].parent == old_index) {
                emit(static_cast<int>(c));
            }
        }
    };
    emit(0);

    doc.frame_time = 1.0 / 30.0;
    const int frames =
        1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_frames));
    const int width = doc.total_channel_count();
    std::vector<bool> is_rotation;
    for (const BvhJoint& j : doc.joints) {
        for (BvhChannel ch : j.channels) {
            is_rotation.push_back(bvh_channel_is_rotation(ch));
        }
    }
    doc.frames.assign(static_cast<size_t>(frames),
                      std::vector<double>(static_cast<size_t>(width)));
    for (int f = 0; f < frames; ++f) {
        for (int c = 0; c < width; ++c) {
            doc.frames[static_cast<size_t>(f)][static_cast<size_t>(c)] =
                is_rotation[static_cast<size_t>(c)] ? rng.uniform(-3.0, 3.0)
                                                    : rng.uniform(-2.0, 2.0);
        }
    }
    return doc;
}

inline double max_frame_difference(const BvhDocument& a, const BvhDocument& b) {
    double worst = 0.0;
    for (size_t f = 0; f < a.frames.size(); ++f) {
        for (size_t c = 0; c < a.frames[f].size(); ++c) {
            worst = std::max(worst, std::abs(a.frames[f][c] - b.frames[f][c]));
        }
    }
    return worst;
}

inline bool same_structure(const BvhDocument& a, const BvhDocument& b) {
    if (a.joints.size() != b.joints.size() ||
        a.frames.size() != b.frames.size()) {
        return false;
    }
    for (size_t j = 0; j < a.joints.size(); ++j) {
        const BvhJoint& x = a.joints[j];
        const BvhJoint& y = b.joints[j];
        if (x.name != y.name || x.parent != y.parent ||
            x.is_end_site != y.is_end_site || x.channels != y.channels) {
            return false;
        }
    }
    return true;
}

} // namespace vtm::test
