#pragma once

#include <vector>

#include "vtm/skeleton.hpp"
#include "vtm/tensor.hpp"

namespace vtm {

// Per-joint importance used by the reconstruction and smoothness losses:
// the root counts double, end-effectors (head, hands, feet) 1.5x.
struct JointWeights {
    double root = 2.0;
    std::vector<double> non_root; // one weight per non-root joint, in order

    static JointWeights canonical();
    void validate() const; // all weights > 0, 23 non-root entries

    // Weight per row of a channel-major non-root stack [23 * channels, T]:
    // each joint's weight repeated `channels` times.
    std::vector<double> non_root_rows(int channels) const;
};

// Smooth-L1 of the weighted root and non-root reconstructions. Both the
// prediction and the target are scaled by the weights, so a perfect
// reconstruction stays at exactly zero. Root stack is [R, T]; non-root stack
// is [23 * channels, T] in canonical non-root joint order.
ad::Tensor motion_rec_loss(const ad::Tensor& pred_root,
                           const ad::Tensor& target_root,
                           const ad::Tensor& pred_non_root,
                           const ad::Tensor& target_non_root,
                           const JointWeights& w, double beta = 1.0);

// Smooth-L1 on per-frame velocities and accelerations (temporal differences
// with a zero leading column). Root rows are scaled by w.root on both sides;
// non-root rows enter unweighted. Requires T >= 3.
ad::Tensor smoothness_loss(const ad::Tensor& pred_root,
                           const ad::Tensor& target_root,
                           const ad::Tensor& pred_non_root,
                           const ad::Tensor& target_non_root,
                           const JointWeights& w, double beta = 1.0);

// Smooth-L1 between visual and motion latents, per body part. Gradients flow
// into both arguments (the motion encoder keeps training alongside the
// visual one).
ad::Tensor manifold_alignment_loss(const ad::Tensor& visual_upper,
                                   const ad::Tensor& motion_upper,
                                   const ad::Tensor& visual_lower,
                                   const ad::Tensor& motion_lower,
                                   double beta = 1.0);

// Smooth-L1 between predicted and ground-truth bone ratios [23, 1].
ad::Tensor bone_loss(const ad::Tensor& pred_ratios,
                     const ad::Tensor& target_ratios, double beta = 1.0);

// Term weights for the combined objective; every term defaults to 1.
struct LossWeights {
    double alignment = 1.0;
    double bone = 1.0;
    double visual_rec = 1.0;
    double visual_smooth = 1.0;
    double motion = 1.0;
};

// alignment + bone + visual_rec + visual_smooth + motion, each term scaled
// by its weight; the motion term is the sum of its reconstruction and
// smoothness parts.
ad::Tensor vtm_total_loss(const ad::Tensor& alignment, const ad::Tensor& bone,
                          const ad::Tensor& visual_rec,
                          const ad::Tensor& visual_smooth,
                          const ad::Tensor& motion_rec,
                          const ad::Tensor& motion_smooth,
                          const LossWeights& weights = {});

} // namespace vtm
