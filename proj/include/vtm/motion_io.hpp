#pragma once

#include <string>
#include <vector>

#include "vtm/bvh.hpp"
#include "vtm/skeleton.hpp"

namespace vtm {

// A BVH file decoded onto the canonical 24-joint layout.
struct LoadedMotion {
    Skeleton skeleton;
    std::vector<Pose> poses;
    double frame_time = 1.0 / 30.0;
};

// The document's non-end-site joints must match the canonical layout by name,
// order and parenthood (TopologyMismatch otherwise). Per frame this reads the
// root position channels and converts every joint's Euler rotation channels
// (in the order the file declares them) into a rotation.
LoadedMotion motion_from_bvh(const BvhDocument& doc);

// Canonical export: the 24 joints with root channels
// [Xposition Yposition Zposition Zrotation Xrotation Yrotation], ZXY rotation
// channels on every other joint, an "<name>_end" site on each leaf, and the
// skeleton's offsets. Poses must have 24 rotations each (ShapeError).
BvhDocument bvh_from_motion(const Skeleton& skeleton,
                            const std::vector<Pose>& poses,
                            double frame_time = 1.0 / 30.0);

LoadedMotion load_motion_bvh(const std::string& path,
                             const BvhOptions& opts = {});

} // namespace vtm
