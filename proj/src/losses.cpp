#include "vtm/losses.hpp"

#include <string>

#include "vtm/errors.hpp"

namespace vtm {

using ad::Tensor;

JointWeights JointWeights::canonical() {
    const CanonicalLayout& layout = canonical_layout();
    JointWeights w;
    w.non_root.assign(static_cast<size_t>(kJointCount - 1), 1.0);
    for (int j : layout.end_effectors) {
        w.non_root[static_cast<size_t>(j - 1)] = 1.5;
    }
    return w;
}

void JointWeights::validate() const {
    if (non_root.size() != static_cast<size_t>(kJointCount - 1)) {
        throw ShapeError("joint weights need " + std::to_string(kJointCount - 1) +
                         " non-root entries, got " +
                         std::to_string(non_root.size()));
    }
    if (root <= 0.0) {
        throw ConfigError("joint weights must be positive");
    }
    for (double v : non_root) {
        if (v <= 0.0) {
            throw ConfigError("joint weights must be positive");
        }
    }
}

std::vector<double> JointWeights::non_root_rows(int channels) const {
    validate();
    if (channels < 1) {
        throw ShapeError("non_root_rows: channels must be positive");
    }
    std::vector<double> rows;
    rows.reserve(non_root.size() * static_cast<size_t>(channels));
    for (double w : non_root) {
        rows.insert(rows.end(), static_cast<size_t>(channels), w);
    }
    return rows;
}

namespace {

// Splits the non-root row count into per-joint channels; the stacks carry
// one row block per non-root joint.
int non_root_channels(const Tensor& stack) {
    const ad::Shape& s = stack.node()->shape;
    if (s.size() != 2 || s[0] % (kJointCount - 1) != 0) {
        throw ShapeError("non-root stack rows must be a multiple of " +
                         std::to_string(kJointCount - 1));
    }
    return s[0] / (kJointCount - 1);
}

} // namespace

Tensor motion_rec_loss(const Tensor& pred_root, const Tensor& target_root,
                       const Tensor& pred_non_root,
                       const Tensor& target_non_root, const JointWeights& w,
                       double beta) {
    const std::vector<double> rows =
        w.non_root_rows(non_root_channels(pred_non_root));
    const Tensor root_term = ad::smooth_l1(ad::scale(pred_root, w.root),
                                           ad::scale(target_root, w.root), beta);
    const Tensor non_root_term =
        ad::smooth_l1(ad::scale_rows(pred_non_root, rows),
                      ad::scale_rows(target_non_root, rows), beta);
    return ad::add(root_term, non_root_term);
}

Tensor smoothness_loss(const Tensor& pred_root, const Tensor& target_root,
                       const Tensor& pred_non_root,
                       const Tensor& target_non_root, const JointWeights& w,
                       double beta) {
    w.validate();
    const ad::Shape& root_shape = pred_root.node()->shape;
    if (root_shape.size() != 2 || root_shape[1] < 3) {
        throw ShapeError("smoothness_loss: needs at least 3 frames");
    }
    non_root_channels(pred_non_root); // shape check

    const Tensor pred_root_w = ad::scale(pred_root, w.root);
    const Tensor target_root_w = ad::scale(target_root, w.root);

    Tensor loss = ad::Tensor::zeros({1});
    const Tensor* pairs[2][2] = {{&pred_root_w, &target_root_w},
                                 {&pred_non_root, &target_non_root}};
    for (auto& pair : pairs) {
        const Tensor vel_pred = ad::time_diff(*pair[0], 1);
        const Tensor vel_target = ad::time_diff(*pair[1], 1);
        const Tensor acc_pred = ad::time_diff(vel_pred, 1);
        const Tensor acc_target = ad::time_diff(vel_target, 1);
        loss = ad::add(loss, ad::smooth_l1(vel_pred, vel_target, beta));
        loss = ad::add(loss, ad::smooth_l1(acc_pred, acc_target, beta));
    }
    return loss;
}

Tensor manifold_alignment_loss(const Tensor& visual_upper,
                               const Tensor& motion_upper,
                               const Tensor& visual_lower,
                               const Tensor& motion_lower, double beta) {
    return ad::add(ad::smooth_l1(visual_upper, motion_upper, beta),
                   ad::smooth_l1(visual_lower, motion_lower, beta));
}

Tensor bone_loss(const Tensor& pred_ratios, const Tensor& target_ratios,
                 double beta) {
    return ad::smooth_l1(pred_ratios, target_ratios, beta);
}

Tensor vtm_total_loss(const Tensor& alignment, const Tensor& bone,
                      const Tensor& visual_rec, const Tensor& visual_smooth,
                      const Tensor& motion_rec, const Tensor& motion_smooth,
                      const LossWeights& weights) {
    Tensor total = ad::scale(alignment, weights.alignment);
    total = ad::add(total, ad::scale(bone, weights.bone));
    total = ad::add(total, ad::scale(visual_rec, weights.visual_rec));
    total = ad::add(total, ad::scale(visual_smooth, weights.visual_smooth));
    total = ad::add(total, ad::scale(ad::add(motion_rec, motion_smooth),
                                     weights.motion));
    return total;
}

} // namespace vtm
