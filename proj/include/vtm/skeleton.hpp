#pragma once

#include <array>
#include <string>
#include <vector>

#include "vtm/rotation.hpp"

namespace vtm {

inline constexpr int kJointCount = 24;
inline constexpr int kBoneCount = kJointCount - 1;

// Authoritative description of the canonical 24-joint working skeleton:
// pelvis root, then legs, spine, neck/head and arms, ordered so every parent
// index precedes its children. All other modules (body partition, joint
// weights, BVH ingestion, synthesis) key off this table.
struct CanonicalLayout {
    std::array<const char*, kJointCount> names;
    std::array<int, kJointCount> parents;
    // Body-part split used by the two-part networks. Both lists contain the
    // root so each part carries the global trajectory; they overlap nowhere
    // else and cover all 24 joints.
    std::vector<int> upper; // 16 joints: root + spine/neck/head + arms
    std::vector<int> lower; // 9 joints: root + hips/knees/ankles/feet
    // End effectors (head, both hands, both feet) get the 1.5 loss weight.
    std::vector<int> end_effectors;
};

const CanonicalLayout& canonical_layout();

// Index of a canonical joint name, -1 if unknown.
int canonical_joint_index(const std::string& name);

// Rest skeleton: joint names, parent indices and parent-relative offsets in
// meters. The root offset is zero by convention.
struct Skeleton {
    std::vector<std::string> joint_names;
    std::vector<int> parents;
    std::vector<Vec3> offsets;

    int joint_count() const { return static_cast<int>(joint_names.size()); }
    // Bone j (1-based joint index) connects parents[j] -> j.
    double bone_length(int joint) const { return offsets[static_cast<size_t>(joint)].norm(); }
    std::vector<double> bone_lengths() const; // size joint_count()-1, bone j at [j-1]

    // Canonical 24-joint skeleton with the given offsets.
    static Skeleton canonical(const std::vector<Vec3>& offsets);

    // Throws TopologyMismatch on bad parent ordering / sizes.
    void validate() const;
};

// Throws TopologyMismatch unless both skeletons share joint names and parents.
void require_same_topology(const Skeleton& a, const Skeleton& b);

// Per-bone length ratios between a skeleton and the virtual (reference)
// skeleton: ratios[j-1] = |offset_j(s)| / |offset_j(reference)|.
struct BoneRatios {
    std::vector<double> values; // size kBoneCount for canonical skeletons
};

// Mean bone lengths combined with normalized mean offset directions.
// All inputs must share topology.
Skeleton average_skeleton(const std::vector<Skeleton>& skeletons);

// Throws ZeroBone when a reference bone is shorter than 1e-9 m.
BoneRatios bone_ratios(const Skeleton& s, const Skeleton& reference);

// Scales each reference offset by its ratio; apply_ratios(ref, bone_ratios(s, ref))
// reproduces s's bone lengths exactly (directions come from the reference).
Skeleton apply_ratios(const Skeleton& reference, const BoneRatios& ratios);

// Sum of hip->knee->ankle->foot bone lengths, averaged over both legs.
double mean_leg_length(const Skeleton& s);

// One frame of joint animation: local rotations per joint plus the global
// root position in meters.
struct Pose {
    std::vector<Rotation> rotations; // size joint_count, [0] is the root
    Vec3 root_position{0.0, 0.0, 0.0};
};

// Retarget motion from `source` onto `target`: joint rotations are copied
// bitwise; root positions are rescaled by mean_leg_length(target) /
// mean_leg_length(source) so ground contact height is approximately kept.
std::vector<Pose> align_motion(const std::vector<Pose>& motion,
                               const Skeleton& source,
                               const Skeleton& target);

// Versioned text table, one joint per line: name parent ox oy oz. Offsets are
// printed with %.17g so parsing returns the exact doubles.
std::string write_skeleton_table(const Skeleton& s);
Skeleton parse_skeleton_table(const std::string& text);

} // namespace vtm
