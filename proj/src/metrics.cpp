#include "vtm/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "vtm/errors.hpp"

namespace vtm {
namespace {

void require_matching_tracks(const std::vector<FramePositions>& pred,
                             const std::vector<FramePositions>& gt) {
    if (pred.empty() || pred.size() != gt.size()) {
        throw ShapeError("position tracks must be non-empty and equally long");
    }
    const size_t joints = pred[0].size();
    if (joints == 0) {
        throw ShapeError("frames must contain at least one joint");
    }
    for (size_t t = 0; t < pred.size(); ++t) {
        if (pred[t].size() != joints || gt[t].size() != joints) {
            throw ShapeError("every frame must carry the same joint count");
        }
    }
}

double mean_joint_error(const std::vector<FramePositions>& pred,
                        const std::vector<FramePositions>& gt) {
    double sum = 0.0;
    size_t count = 0;
    for (size_t t = 0; t < pred.size(); ++t) {
        for (size_t j = 0; j < pred[t].size(); ++j) {
            sum += (pred[t][j] - gt[t][j]).norm();
            ++count;
        }
    }
    return sum / static_cast<double>(count) * 1000.0;
}

// Similarity alignment of one frame onto its ground truth.
FramePositions align_frame(const FramePositions& pred,
                           const FramePositions& gt, size_t frame_index) {
    const size_t joints = pred.size();
    if (joints < 3) {
        throw DegenerateFrame("frame " + std::to_string(frame_index) +
                              " has fewer than 3 joints");
    }
    Vec3 pred_mean = Vec3::Zero();
    Vec3 gt_mean = Vec3::Zero();
    for (size_t j = 0; j < joints; ++j) {
        pred_mean += pred[j];
        gt_mean += gt[j];
    }
    pred_mean /= static_cast<double>(joints);
    gt_mean /= static_cast<double>(joints);

    Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
    double pred_var = 0.0;
    for (size_t j = 0; j < joints; ++j) {
        const Vec3 p = pred[j] - pred_mean;
        const Vec3 g = gt[j] - gt_mean;
        cross += g * p.transpose();
        pred_var += p.squaredNorm();
    }

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(
        cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d sigma = svd.singularValues();
    // Collinear or coincident joints leave the rotation about the residual
    // axis unconstrained.
    if (pred_var <= 0.0 || sigma(1) < 1e-12) {
        throw DegenerateFrame("frame " + std::to_string(frame_index) +
                              " has collinear or coincident joints");
    }

    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) {
        d(2, 2) = -1.0;
    }
    const Eigen::Matrix3d rot = svd.matrixU() * d * svd.matrixV().transpose();
    const double scale = (sigma(0) + sigma(1) + d(2, 2) * sigma(2)) / pred_var;

    FramePositions aligned(joints);
    for (size_t j = 0; j < joints; ++j) {
        aligned[j] = scale * (rot * (pred[j] - pred_mean)) + gt_mean;
    }
    return aligned;
}

} // namespace

double mpjpe(const std::vector<FramePositions>& pred,
             const std::vector<FramePositions>& gt) {
    require_matching_tracks(pred, gt);
    return mean_joint_error(pred, gt);
}

double pa_mpjpe(const std::vector<FramePositions>& pred,
                const std::vector<FramePositions>& gt) {
    require_matching_tracks(pred, gt);
    std::vector<FramePositions> aligned;
    aligned.reserve(pred.size());
    for (size_t t = 0; t < pred.size(); ++t) {
        aligned.push_back(align_frame(pred[t], gt[t], t));
    }
    return mean_joint_error(aligned, gt);
}

double mrpe(const std::vector<Vec3>& pred_root,
            const std::vector<Vec3>& gt_root) {
    if (pred_root.empty() || pred_root.size() != gt_root.size()) {
        throw ShapeError("root tracks must be non-empty and equally long");
    }
    double sum = 0.0;
    for (size_t t = 0; t < pred_root.size(); ++t) {
        sum += (pred_root[t] - gt_root[t]).norm();
    }
    return sum / static_cast<double>(pred_root.size()) * 1000.0;
}

double mble(const Skeleton& pred, const Skeleton& gt) {
    require_same_topology(pred, gt);
    double sum = 0.0;
    for (int j = 1; j < pred.joint_count(); ++j) {
        sum += std::abs(pred.bone_length(j) - gt.bone_length(j));
    }
    return sum / static_cast<double>(pred.joint_count() - 1) * 1000.0;
}

std::vector<FramePositions> center_on_root(
    const std::vector<FramePositions>& frames) {
    std::vector<FramePositions> out = frames;
    for (FramePositions& frame : out) {
        if (frame.empty()) {
            throw ShapeError("cannot root-center an empty frame");
        }
        const Vec3 root = frame[0];
        for (Vec3& p : frame) {
            p -= root;
        }
    }
    return out;
}

std::string metrics_report(
    const std::vector<std::pair<std::string, double>>& items) {
    std::string out;
    char buf[160];
    for (const auto& [key, value] : items) {
        std::snprintf(buf, sizeof(buf), "%s: %.1f\n", key.c_str(), value);
        out += buf;
    }
    return out;
}

} // namespace vtm
