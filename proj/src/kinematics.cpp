#include "vtm/kinematics.hpp"

#include "vtm/errors.hpp"

namespace vtm {

FkResult forward_kinematics(const Skeleton& skeleton, const Pose& pose) {
    const int n = skeleton.joint_count();
    if (static_cast<int>(pose.rotations.size()) != n) {
        throw ShapeError("pose has " + std::to_string(pose.rotations.size()) +
                         " rotations for a " + std::to_string(n) + "-joint skeleton");
    }
    FkResult out;
    out.positions.resize(static_cast<size_t>(n));
    out.global_rotations.resize(static_cast<size_t>(n));
    out.positions[0] = pose.root_position;
    out.global_rotations[0] = pose.rotations[0];
    for (int j = 1; j < n; ++j) {
        const int p = skeleton.parents[static_cast<size_t>(j)];
        const Rotation& parent_rot = out.global_rotations[static_cast<size_t>(p)];
        out.positions[static_cast<size_t>(j)] =
            out.positions[static_cast<size_t>(p)] +
            parent_rot.rotate(skeleton.offsets[static_cast<size_t>(j)]);
        out.global_rotations[static_cast<size_t>(j)] =
            parent_rot * pose.rotations[static_cast<size_t>(j)];
    }
    return out;
}

} // namespace vtm
