#pragma once

#include <cstdint>
#include <vector>

#include "vtm/camera.hpp"
#include "vtm/nn.hpp"
#include "vtm/representation.hpp"
#include "vtm/skeleton.hpp"
#include "vtm/tensor.hpp"

namespace vtm {

// Channel widths shared by both networks. Inputs are channel-major [C, T]:
// the upper body part carries 16 joints x 12 motion channels (192) or x 4
// keypoint channels (64); the lower part 9 joints (108 / 36).
struct ModelDims {
    static constexpr int upper_motion = 192;
    static constexpr int lower_motion = 108;
    static constexpr int upper_keypoints = 64;
    static constexpr int lower_keypoints = 36;
    static constexpr int upper_latent = 128;
    static constexpr int lower_latent = 64;
    static constexpr int upper_mid = 96;
    static constexpr int lower_mid = 48;
    static constexpr int non_root_out = 276; // 23 joints x 12 channels
    static constexpr int root_out = 8;       // rot6d + depth + depth velocity
};

// Two-part motion autoencoder: per-part conv encoders with x4 temporal
// downsampling, mirrored transposed-conv decoders, a single aggregation
// convolution producing the non-root frame stack, and a root decoder fed
// with the concatenated latents.
struct TpmaeModel {
    nn::Conv1d enc_u1, enc_u2, enc_u3;
    nn::Conv1d enc_l1, enc_l2, enc_l3;
    nn::Conv1d dec_u1;
    nn::ConvT1d dec_u2, dec_u3;
    nn::Conv1d dec_l1;
    nn::ConvT1d dec_l2, dec_l3;
    nn::Conv1d aggregation;
    nn::ConvT1d root1, root2;

    static TpmaeModel create(std::uint64_t seed);
    nn::NamedParams params(); // deterministic name order
    TpmaeModel aliased() const;
};

struct TpmaeLatents {
    ad::Tensor upper; // [128, T/4]
    ad::Tensor lower; // [64, T/4]
};

struct TpmaeOutput {
    ad::Tensor non_root; // [276, T]
    ad::Tensor root;     // [8, T]
};

// Requires [192, T] / [108, T] inputs with T a positive multiple of 4.
TpmaeLatents tpmae_encode(const ad::Tensor& x_upper, const ad::Tensor& x_lower,
                          const TpmaeModel& m);

// Requires [128, S] / [64, S] latents; outputs cover T = 4 S frames.
TpmaeOutput tpmae_decode(const ad::Tensor& z_upper, const ad::Tensor& z_lower,
                         const TpmaeModel& m);

// Two-part visual encoder: keypoint extractors, feature adapters, residual
// fusion blocks, per-part encoders with causal temporal-context attention,
// and the bone-ratio head.
struct TpveModel {
    int feature_dim = 512;

    nn::Conv1d kp_u1, kp_u2, kp_u3;
    nn::Conv1d kp_l1, kp_l2, kp_l3;
    nn::Conv1d feat_u, feat_l;
    nn::Conv1d fuse_u1, fuse_u2;
    nn::Conv1d fuse_l1, fuse_l2;
    nn::Conv1d venc_u1, venc_u2, venc_u3;
    nn::Conv1d venc_l1, venc_l2, venc_l3;
    nn::CausalAttention ctca_u, ctca_l;
    nn::Conv1d bone1, bone2, bone3;
    nn::Linear bone_head;

    static TpveModel create(int feature_dim, std::uint64_t seed);
    nn::NamedParams params();
    TpveModel aliased() const;
};

struct TpveOutput {
    ad::Tensor upper_latent; // [128, T/4]
    ad::Tensor lower_latent; // [64, T/4]
    ad::Tensor ratios;       // [23], positive
};

// Keypoint parts are [64, T] / [36, T]; features are [feature_dim, T].
TpveOutput tpve_forward(const ad::Tensor& kp_upper, const ad::Tensor& kp_lower,
                        const ad::Tensor& features, const TpveModel& m);

// Stand-in for a video backbone: either all-zero features (the reproducible
// default, keypoints-only operation) or per-frame vectors stored alongside
// the dataset.
struct FeatureProvider {
    enum class Mode { kZeros, kFile };

    Mode mode = Mode::kZeros;
    int feature_dim = 512;

    // Constant [feature_dim, frames] tensor. In file mode `stored` must hold
    // frames x feature_dim values (frame-major); in zeros mode it is ignored.
    ad::Tensor features_for(const std::vector<double>& stored, int frames) const;
};

struct Reconstruction {
    Skeleton skeleton;       // virtual skeleton scaled by the predicted ratios
    std::vector<Pose> poses; // camera-space convention (composed root rotation)
    BoneRatios ratios;
};

// Full inference path: normalized keypoints through the visual encoder, the
// motion decoders, de-standardization, then per-frame rotation extraction and
// root recovery from the input root pixel track and the predicted depth.
Reconstruction reconstruct(const KeypointSequence& keypoints,
                           const std::vector<double>& stored_features,
                           const TpveModel& tpve, const TpmaeModel& tpmae,
                           const FeatureProvider& provider, const Camera& cam,
                           const Skeleton& virtual_skeleton,
                           const NormStats& stats);

} // namespace vtm
