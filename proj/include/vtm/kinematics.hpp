#pragma once

#include <vector>

#include "vtm/skeleton.hpp"

namespace vtm {

struct FkResult {
    std::vector<Vec3> positions;         // global joint positions, meters
    std::vector<Rotation> global_rotations;
};

// Walk the chain root -> leaves:
//   R_global(j) = R_global(parent) * R_local(j)
//   p(j)        = p(parent) + R_global(parent) * offset(j)
// Bone lengths are conserved exactly because offsets are only rotated.
FkResult forward_kinematics(const Skeleton& skeleton, const Pose& pose);

// Per-frame backward differences: out[t] = x[t] - x[t-1]. The first
// zero_prefix entries are forced to zero — velocities use zero_prefix = 1
// (no predecessor at t = 0), accelerations use 2 (the t = 1 value would
// otherwise pick up the synthetic zero velocity). No frame-time division;
// all temporal quantities are per-frame deltas.
template <typename T>
std::vector<T> finite_differences(const std::vector<T>& xs, int zero_prefix = 1) {
    std::vector<T> out(xs.size());
    if (xs.empty()) {
        return out;
    }
    const T zero = xs.front() - xs.front();
    for (size_t t = 0; t < xs.size(); ++t) {
        out[t] = (static_cast<int>(t) < zero_prefix) ? zero : T(xs[t] - xs[t - 1]);
    }
    return out;
}

} // namespace vtm
