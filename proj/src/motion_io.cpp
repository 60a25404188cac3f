#include "vtm/motion_io.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "vtm/errors.hpp"

namespace vtm {
namespace {

// Doc indices of the posed (non-end-site) joints, mapped onto the canonical
// layout by name. Validates coverage and parenthood.
std::vector<int> map_canonical_joints(const BvhDocument& doc) {
    const CanonicalLayout& layout = canonical_layout();
    std::vector<int> doc_of_canonical(kJointCount, -1);
    int posed = 0;
    for (size_t d = 0; d < doc.joints.size(); ++d) {
        const BvhJoint& joint = doc.joints[d];
        if (joint.is_end_site) {
            continue;
        }
        ++posed;
        const int c = canonical_joint_index(joint.name);
        if (c < 0) {
            throw TopologyMismatch("BVH joint '" + joint.name +
                                   "' is not part of the canonical skeleton");
        }
        if (doc_of_canonical[static_cast<size_t>(c)] != -1) {
            throw TopologyMismatch("BVH declares joint '" + joint.name +
                                   "' twice");
        }
        doc_of_canonical[static_cast<size_t>(c)] = static_cast<int>(d);
    }
    if (posed != kJointCount) {
        throw TopologyMismatch("BVH has " + std::to_string(posed) +
                               " posed joints, expected " +
                               std::to_string(kJointCount));
    }
    for (int c = 0; c < kJointCount; ++c) {
        const int d = doc_of_canonical[static_cast<size_t>(c)];
        const int doc_parent = doc.joints[static_cast<size_t>(d)].parent;
        const int canonical_parent = layout.parents[static_cast<size_t>(c)];
        if (canonical_parent == -1) {
            if (doc_parent != -1) {
                throw TopologyMismatch(
                    "joint '" + std::string(layout.names[static_cast<size_t>(c)]) +
                    "' must be the BVH root");
            }
            continue;
        }
        const int expected =
            doc_of_canonical[static_cast<size_t>(canonical_parent)];
        if (doc_parent != expected) {
            throw TopologyMismatch(
                "joint '" + std::string(layout.names[static_cast<size_t>(c)]) +
                "' must be a child of '" +
                layout.names[static_cast<size_t>(canonical_parent)] + "'");
        }
    }
    return doc_of_canonical;
}

} // namespace

LoadedMotion motion_from_bvh(const BvhDocument& doc) {
    const std::vector<int> doc_of_canonical = map_canonical_joints(doc);

    std::vector<Vec3> offsets(kJointCount);
    for (int c = 0; c < kJointCount; ++c) {
        offsets[static_cast<size_t>(c)] =
            doc.joints[static_cast<size_t>(doc_of_canonical[static_cast<size_t>(c)])]
                .offset;
    }

    LoadedMotion out;
    out.skeleton = Skeleton::canonical(offsets);
    out.frame_time = doc.frame_time;
    out.poses.reserve(doc.frames.size());
    for (const std::vector<double>& row : doc.frames) {
        Pose pose;
        pose.rotations.resize(kJointCount);
        for (int c = 0; c < kJointCount; ++c) {
            const int d = doc_of_canonical[static_cast<size_t>(c)];
            const BvhJoint& joint = doc.joints[static_cast<size_t>(d)];
            int base = doc.channel_offset(d);
            Vec3 position = Vec3::Zero();
            std::array<int, 3> axes{0, 0, 0};
            std::array<double, 3> angles{0.0, 0.0, 0.0};
            int r = 0;
            for (BvhChannel ch : joint.channels) {
                const double value = row[static_cast<size_t>(base)];
                ++base;
                if (bvh_channel_is_rotation(ch)) {
                    axes[static_cast<size_t>(r)] = bvh_channel_axis(ch);
                    angles[static_cast<size_t>(r)] = value;
                    ++r;
                } else {
                    position[bvh_channel_axis(ch)] = value;
                }
            }
            pose.rotations[static_cast<size_t>(c)] =
                rotation_from_euler(axes, angles);
            if (c == 0) {
                pose.root_position = offsets[0] + position;
            }
        }
        out.poses.push_back(std::move(pose));
    }
    return out;
}

BvhDocument bvh_from_motion(const Skeleton& skeleton,
                            const std::vector<Pose>& poses,
                            double frame_time) {
    const CanonicalLayout& layout = canonical_layout();
    if (skeleton.joint_names !=
            std::vector<std::string>(layout.names.begin(), layout.names.end()) ||
        skeleton.parents !=
            std::vector<int>(layout.parents.begin(), layout.parents.end())) {
        throw TopologyMismatch("bvh_from_motion: expects the canonical skeleton");
    }
    if (poses.empty()) {
        throw ShapeError("bvh_from_motion: no frames");
    }
    for (const Pose& pose : poses) {
        if (pose.rotations.size() != static_cast<size_t>(kJointCount)) {
            throw ShapeError("bvh_from_motion: pose has " +
                             std::to_string(pose.rotations.size()) +
                             " rotations, expected " +
                             std::to_string(kJointCount));
        }
    }

    std::vector<std::vector<int>> children(kJointCount);
    for (int c = 1; c < kJointCount; ++c) {
        children[static_cast<size_t>(layout.parents[static_cast<size_t>(c)])]
            .push_back(c);
    }

    BvhDocument doc;
    doc.frame_time = frame_time;
    std::vector<int> canonical_order; // canonical index per posed doc joint

    // Depth-first emission so the document's joint order matches the file's
    // nesting; zero-length end sites terminate every leaf.
    const std::function<void(int, int)> emit = [&](int c, int doc_parent) {
        BvhJoint joint;
        joint.name = layout.names[static_cast<size_t>(c)];
        joint.parent = doc_parent;
        joint.offset = skeleton.offsets[static_cast<size_t>(c)];
        if (doc_parent == -1) {
            joint.channels = {BvhChannel::Xposition, BvhChannel::Yposition,
                              BvhChannel::Zposition, BvhChannel::Zrotation,
                              BvhChannel::Xrotation, BvhChannel::Yrotation};
        } else {
            joint.channels = {BvhChannel::Zrotation, BvhChannel::Xrotation,
                              BvhChannel::Yrotation};
        }
        const int index = static_cast<int>(doc.joints.size());
        doc.joints.push_back(std::move(joint));
        canonical_order.push_back(c);

        if (children[static_cast<size_t>(c)].empty()) {
            BvhJoint end;
            end.name = std::string(layout.names[static_cast<size_t>(c)]) + "_end";
            end.parent = index;
            end.offset = Vec3::Zero();
            end.is_end_site = true;
            doc.joints.push_back(std::move(end));
        } else {
            for (int child : children[static_cast<size_t>(c)]) {
                emit(child, index);
            }
        }
    };
    emit(0, -1);

    doc.frames.reserve(poses.size());
    for (const Pose& pose : poses) {
        std::vector<double> row;
        row.reserve(static_cast<size_t>(doc.total_channel_count()));
        for (int c : canonical_order) {
            if (c == 0) {
                const Vec3 p = pose.root_position - skeleton.offsets[0];
                row.push_back(p.x());
                row.push_back(p.y());
                row.push_back(p.z());
            }
            const std::array<double, 3> zxy =
                euler_zxy_from_rotation(pose.rotations[static_cast<size_t>(c)]);
            row.push_back(zxy[0]);
            row.push_back(zxy[1]);
            row.push_back(zxy[2]);
        }
        doc.frames.push_back(std::move(row));
    }
    return doc;
}

LoadedMotion load_motion_bvh(const std::string& path, const BvhOptions& opts) {
    return motion_from_bvh(load_bvh(path, opts));
}

} // namespace vtm
