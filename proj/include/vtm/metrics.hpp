#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vtm/skeleton.hpp"

namespace vtm {

// Per-frame joint positions in meters; all metrics report millimeters.
using FramePositions = std::vector<Vec3>;

// Mean Euclidean joint error over all frames and joints, no alignment.
double mpjpe(const std::vector<FramePositions>& pred,
             const std::vector<FramePositions>& gt);

// Per frame, solves the similarity Procrustes problem (rotation, translation
// and uniform scale minimizing the squared error onto the ground truth) and
// reports the mean joint error of the aligned prediction. Throws
// DegenerateFrame when a frame's joints are collinear or coincident.
double pa_mpjpe(const std::vector<FramePositions>& pred,
                const std::vector<FramePositions>& gt);

// Mean Euclidean distance between per-frame root positions.
double mrpe(const std::vector<Vec3>& pred_root, const std::vector<Vec3>& gt_root);

// Mean absolute bone length difference over the 23 bones.
double mble(const Skeleton& pred, const Skeleton& gt);

// Subtracts each frame's root (joint 0) from all joints; evaluation computes
// joint errors root-relative so global placement is measured by mrpe alone.
std::vector<FramePositions> center_on_root(const std::vector<FramePositions>& frames);

// "key: value" lines, one decimal place, in the given order.
std::string metrics_report(const std::vector<std::pair<std::string, double>>& items);

} // namespace vtm
