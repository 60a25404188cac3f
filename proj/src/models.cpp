#include "vtm/models.hpp"

#include <cstdio>
#include <string>

#include "vtm/errors.hpp"

namespace vtm {

namespace {

constexpr double kSlope = 0.2; // leaky-ReLU negative slope used throughout

ad::Tensor lrelu(const ad::Tensor& x) { return ad::leaky_relu(x, kSlope); }

void require_map(const ad::Tensor& x, int channels, const char* what) {
    if (!x.defined() || x.shape().size() != 2 ||
        x.shape()[0] != channels || x.shape()[1] <= 0) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%s must be a [%d, T] map with T > 0",
                      what, channels);
        throw ShapeError(buf);
    }
}

void require_same_frames(const ad::Tensor& a, const ad::Tensor& b,
                         const char* what) {
    if (a.shape()[1] != b.shape()[1]) {
        throw ShapeError(std::string(what) + ": inputs cover different frame counts");
    }
}

void require_quarterable(int frames, const char* what) {
    if (frames % 4 != 0) {
        throw ShapeError(std::string(what) +
                         ": frame count must be a multiple of 4");
    }
}

// y = x + conv2(lrelu(conv1(x))), the fusion block shared by both parts.
ad::Tensor residual_block(const ad::Tensor& x, const nn::Conv1d& conv1,
                          const nn::Conv1d& conv2) {
    return ad::add(x, conv2(lrelu(conv1(x))));
}

} // namespace

TpmaeModel TpmaeModel::create(std::uint64_t seed) {
    TpmaeModel m;
    const int up = ModelDims::upper_motion;   // 192
    const int lo = ModelDims::lower_motion;   // 108
    const int zu = ModelDims::upper_latent;   // 128
    const int zl = ModelDims::lower_latent;   // 64
    const int mu = ModelDims::upper_mid;      // 96
    const int ml = ModelDims::lower_mid;      // 48

    m.enc_u1 = nn::Conv1d("tpmae.enc_u1", up, mu, 4, 2, 1, seed);
    m.enc_u2 = nn::Conv1d("tpmae.enc_u2", mu, zu, 4, 2, 1, seed);
    m.enc_u3 = nn::Conv1d("tpmae.enc_u3", zu, zu, 3, 1, 1, seed);
    m.enc_l1 = nn::Conv1d("tpmae.enc_l1", lo, ml, 4, 2, 1, seed);
    m.enc_l2 = nn::Conv1d("tpmae.enc_l2", ml, zl, 4, 2, 1, seed);
    m.enc_l3 = nn::Conv1d("tpmae.enc_l3", zl, zl, 3, 1, 1, seed);

    m.dec_u1 = nn::Conv1d("tpmae.dec_u1", zu, zu, 3, 1, 1, seed);
    m.dec_u2 = nn::ConvT1d("tpmae.dec_u2", zu, mu, 4, 2, 1, seed);
    m.dec_u3 = nn::ConvT1d("tpmae.dec_u3", mu, mu, 4, 2, 1, seed);
    m.dec_l1 = nn::Conv1d("tpmae.dec_l1", zl, zl, 3, 1, 1, seed);
    m.dec_l2 = nn::ConvT1d("tpmae.dec_l2", zl, ml, 4, 2, 1, seed);
    m.dec_l3 = nn::ConvT1d("tpmae.dec_l3", ml, ml, 4, 2, 1, seed);

    m.aggregation = nn::Conv1d("tpmae.aggregation", mu + ml,
                               ModelDims::non_root_out, 3, 1, 1, seed);
    m.root1 = nn::ConvT1d("tpmae.root1", zu + zl, zl, 4, 2, 1, seed);
    m.root2 = nn::ConvT1d("tpmae.root2", zl, ModelDims::root_out, 4, 2, 1, seed);
    return m;
}

nn::NamedParams TpmaeModel::params() {
    nn::NamedParams out;
    enc_u1.collect(out);
    enc_u2.collect(out);
    enc_u3.collect(out);
    enc_l1.collect(out);
    enc_l2.collect(out);
    enc_l3.collect(out);
    dec_u1.collect(out);
    dec_u2.collect(out);
    dec_u3.collect(out);
    dec_l1.collect(out);
    dec_l2.collect(out);
    dec_l3.collect(out);
    aggregation.collect(out);
    root1.collect(out);
    root2.collect(out);
    return out;
}

TpmaeModel TpmaeModel::aliased() const {
    TpmaeModel m;
    m.enc_u1 = enc_u1.aliased();
    m.enc_u2 = enc_u2.aliased();
    m.enc_u3 = enc_u3.aliased();
    m.enc_l1 = enc_l1.aliased();
    m.enc_l2 = enc_l2.aliased();
    m.enc_l3 = enc_l3.aliased();
    m.dec_u1 = dec_u1.aliased();
    m.dec_u2 = dec_u2.aliased();
    m.dec_u3 = dec_u3.aliased();
    m.dec_l1 = dec_l1.aliased();
    m.dec_l2 = dec_l2.aliased();
    m.dec_l3 = dec_l3.aliased();
    m.aggregation = aggregation.aliased();
    m.root1 = root1.aliased();
    m.root2 = root2.aliased();
    return m;
}

TpmaeLatents tpmae_encode(const ad::Tensor& x_upper, const ad::Tensor& x_lower,
                          const TpmaeModel& m) {
    require_map(x_upper, ModelDims::upper_motion, "tpmae_encode: upper input");
    require_map(x_lower, ModelDims::lower_motion, "tpmae_encode: lower input");
    require_same_frames(x_upper, x_lower, "tpmae_encode");
    require_quarterable(x_upper.shape()[1], "tpmae_encode");

    TpmaeLatents z;
    z.upper = m.enc_u3(lrelu(m.enc_u2(lrelu(m.enc_u1(x_upper)))));
    z.lower = m.enc_l3(lrelu(m.enc_l2(lrelu(m.enc_l1(x_lower)))));
    return z;
}

TpmaeOutput tpmae_decode(const ad::Tensor& z_upper, const ad::Tensor& z_lower,
                         const TpmaeModel& m) {
    require_map(z_upper, ModelDims::upper_latent, "tpmae_decode: upper latent");
    require_map(z_lower, ModelDims::lower_latent, "tpmae_decode: lower latent");
    require_same_frames(z_upper, z_lower, "tpmae_decode");

    const ad::Tensor h_u =
        lrelu(m.dec_u3(lrelu(m.dec_u2(lrelu(m.dec_u1(z_upper))))));
    const ad::Tensor h_l =
        lrelu(m.dec_l3(lrelu(m.dec_l2(lrelu(m.dec_l1(z_lower))))));

    TpmaeOutput out;
    out.non_root = m.aggregation(ad::concat_rows(h_u, h_l));
    out.root = m.root2(lrelu(m.root1(ad::concat_rows(z_upper, z_lower))));
    return out;
}

TpveModel TpveModel::create(int feature_dim, std::uint64_t seed) {
    if (feature_dim <= 0) {
        throw ConfigError("TpveModel: feature_dim must be positive");
    }
    TpveModel m;
    m.feature_dim = feature_dim;
    const int ku = ModelDims::upper_keypoints; // 64
    const int kl = ModelDims::lower_keypoints; // 36
    const int zu = ModelDims::upper_latent;    // 128
    const int zl = ModelDims::lower_latent;    // 64
    const int mu = ModelDims::upper_mid;       // 96
    const int ml = ModelDims::lower_mid;       // 48
    const int fused = 64 + zu;                 // adapted features + keypoint embedding

    m.kp_u1 = nn::Conv1d("tpve.kp_u1", ku, mu, 3, 1, 1, seed);
    m.kp_u2 = nn::Conv1d("tpve.kp_u2", mu, zu, 3, 1, 1, seed);
    m.kp_u3 = nn::Conv1d("tpve.kp_u3", zu, zu, 3, 1, 1, seed);
    m.kp_l1 = nn::Conv1d("tpve.kp_l1", kl, mu, 3, 1, 1, seed);
    m.kp_l2 = nn::Conv1d("tpve.kp_l2", mu, zu, 3, 1, 1, seed);
    m.kp_l3 = nn::Conv1d("tpve.kp_l3", zu, zu, 3, 1, 1, seed);

    m.feat_u = nn::Conv1d("tpve.feat_u", feature_dim, 64, 3, 1, 1, seed);
    m.feat_l = nn::Conv1d("tpve.feat_l", feature_dim, 64, 3, 1, 1, seed);

    m.fuse_u1 = nn::Conv1d("tpve.fuse_u1", fused, fused, 3, 1, 1, seed);
    m.fuse_u2 = nn::Conv1d("tpve.fuse_u2", fused, fused, 3, 1, 1, seed);
    m.fuse_l1 = nn::Conv1d("tpve.fuse_l1", fused, fused, 3, 1, 1, seed);
    m.fuse_l2 = nn::Conv1d("tpve.fuse_l2", fused, fused, 3, 1, 1, seed);

    m.venc_u1 = nn::Conv1d("tpve.venc_u1", fused, mu, 4, 2, 1, seed);
    m.venc_u2 = nn::Conv1d("tpve.venc_u2", mu, zu, 4, 2, 1, seed);
    m.venc_u3 = nn::Conv1d("tpve.venc_u3", zu, zu, 3, 1, 1, seed);
    m.venc_l1 = nn::Conv1d("tpve.venc_l1", fused, ml, 4, 2, 1, seed);
    m.venc_l2 = nn::Conv1d("tpve.venc_l2", ml, zl, 4, 2, 1, seed);
    m.venc_l3 = nn::Conv1d("tpve.venc_l3", zl, zl, 3, 1, 1, seed);

    m.ctca_u = nn::CausalAttention("tpve.ctca_u", zu, 8, seed);
    m.ctca_l = nn::CausalAttention("tpve.ctca_l", zl, 8, seed);

    m.bone1 = nn::Conv1d("tpve.bone1", 2 * fused, mu, 4, 2, 1, seed);
    m.bone2 = nn::Conv1d("tpve.bone2", mu, 64, 4, 2, 1, seed);
    m.bone3 = nn::Conv1d("tpve.bone3", 64, 64, 3, 1, 1, seed);
    m.bone_head = nn::Linear("tpve.bone_head", 64, kBoneCount, seed);
    return m;
}

nn::NamedParams TpveModel::params() {
    nn::NamedParams out;
    kp_u1.collect(out);
    kp_u2.collect(out);
    kp_u3.collect(out);
    kp_l1.collect(out);
    kp_l2.collect(out);
    kp_l3.collect(out);
    feat_u.collect(out);
    feat_l.collect(out);
    fuse_u1.collect(out);
    fuse_u2.collect(out);
    fuse_l1.collect(out);
    fuse_l2.collect(out);
    venc_u1.collect(out);
    venc_u2.collect(out);
    venc_u3.collect(out);
    venc_l1.collect(out);
    venc_l2.collect(out);
    venc_l3.collect(out);
    ctca_u.collect(out);
    ctca_l.collect(out);
    bone1.collect(out);
    bone2.collect(out);
    bone3.collect(out);
    bone_head.collect(out);
    return out;
}

TpveModel TpveModel::aliased() const {
    TpveModel m;
    m.feature_dim = feature_dim;
    m.kp_u1 = kp_u1.aliased();
    m.kp_u2 = kp_u2.aliased();
    m.kp_u3 = kp_u3.aliased();
    m.kp_l1 = kp_l1.aliased();
    m.kp_l2 = kp_l2.aliased();
    m.kp_l3 = kp_l3.aliased();
    m.feat_u = feat_u.aliased();
    m.feat_l = feat_l.aliased();
    m.fuse_u1 = fuse_u1.aliased();
    m.fuse_u2 = fuse_u2.aliased();
    m.fuse_l1 = fuse_l1.aliased();
    m.fuse_l2 = fuse_l2.aliased();
    m.venc_u1 = venc_u1.aliased();
    m.venc_u2 = venc_u2.aliased();
    m.venc_u3 = venc_u3.aliased();
    m.venc_l1 = venc_l1.aliased();
    m.venc_l2 = venc_l2.aliased();
    m.venc_l3 = venc_l3.aliased();
    m.ctca_u = ctca_u.aliased();
    m.ctca_l = ctca_l.aliased();
    m.bone1 = bone1.aliased();
    m.bone2 = bone2.aliased();
    m.bone3 = bone3.aliased();
    m.bone_head = bone_head.aliased();
    return m;
}

TpveOutput tpve_forward(const ad::Tensor& kp_upper, const ad::Tensor& kp_lower,
                        const ad::Tensor& features, const TpveModel& m) {
    require_map(kp_upper, ModelDims::upper_keypoints, "tpve_forward: upper keypoints");
    require_map(kp_lower, ModelDims::lower_keypoints, "tpve_forward: lower keypoints");
    require_map(features, m.feature_dim, "tpve_forward: features");
    require_same_frames(kp_upper, kp_lower, "tpve_forward");
    require_same_frames(kp_upper, features, "tpve_forward");
    require_quarterable(kp_upper.shape()[1], "tpve_forward");

    const ad::Tensor emb_u =
        lrelu(m.kp_u3(lrelu(m.kp_u2(lrelu(m.kp_u1(kp_upper))))));
    const ad::Tensor emb_l =
        lrelu(m.kp_l3(lrelu(m.kp_l2(lrelu(m.kp_l1(kp_lower))))));

    const ad::Tensor fused_u = residual_block(
        ad::concat_rows(m.feat_u(features), emb_u), m.fuse_u1, m.fuse_u2);
    const ad::Tensor fused_l = residual_block(
        ad::concat_rows(m.feat_l(features), emb_l), m.fuse_l1, m.fuse_l2);

    TpveOutput out;
    out.upper_latent =
        m.ctca_u(m.venc_u3(lrelu(m.venc_u2(lrelu(m.venc_u1(fused_u))))));
    out.lower_latent =
        m.ctca_l(m.venc_l3(lrelu(m.venc_l2(lrelu(m.venc_l1(fused_l))))));

    const ad::Tensor bone_map = lrelu(m.bone3(
        lrelu(m.bone2(lrelu(m.bone1(ad::concat_rows(fused_u, fused_l)))))));
    out.ratios = ad::softplus(m.bone_head(ad::mean_over_cols(bone_map)));
    return out;
}

ad::Tensor FeatureProvider::features_for(const std::vector<double>& stored,
                                         int frames) const {
    if (feature_dim <= 0) {
        throw ConfigError("FeatureProvider: feature_dim must be positive");
    }
    if (frames <= 0) {
        throw ShapeError("FeatureProvider: frame count must be positive");
    }
    const size_t total = static_cast<size_t>(feature_dim) * static_cast<size_t>(frames);
    if (mode == Mode::kZeros) {
        return ad::Tensor::constant({feature_dim, frames},
                                    std::vector<double>(total, 0.0));
    }
    if (stored.size() != total) {
        throw MismatchError(
            "FeatureProvider: stored features do not cover frames x feature_dim");
    }
    // Stored layout is frame-major [T, F]; the networks take channel-major.
    std::vector<double> cm(total);
    for (int f = 0; f < feature_dim; ++f) {
        for (int t = 0; t < frames; ++t) {
            cm[static_cast<size_t>(f) * frames + t] =
                stored[static_cast<size_t>(t) * feature_dim + f];
        }
    }
    return ad::Tensor::constant({feature_dim, frames}, std::move(cm));
}

namespace {

// Root decoder row -> standardization channel of the root joint's motion row:
// six rotation channels, then camera-space z position and z velocity.
constexpr int kRootStatChannel[ModelDims::root_out] = {0, 1, 2, 3, 4, 5, 8, 11};

} // namespace

Reconstruction reconstruct(const KeypointSequence& keypoints,
                           const std::vector<double>& stored_features,
                           const TpveModel& tpve, const TpmaeModel& tpmae,
                           const FeatureProvider& provider, const Camera& cam,
                           const Skeleton& virtual_skeleton,
                           const NormStats& stats) {
    const int frames = keypoints.frames;
    if (frames <= 0 || frames % 4 != 0) {
        throw ShapeError("reconstruct: frame count must be a positive multiple of 4");
    }
    if (stats.mean.size() != NormStats::kChannelCount ||
        stats.stdev.size() != NormStats::kChannelCount) {
        throw ShapeError("reconstruct: standardization stats must cover 288 channels");
    }
    if (provider.feature_dim != tpve.feature_dim) {
        throw MismatchError(
            "reconstruct: feature provider and visual encoder disagree on feature_dim");
    }

    const BodyPartition partition = BodyPartition::canonical();
    const std::vector<double> norm = normalize_keypoints(keypoints, cam);
    const int kc = KeypointSequence::kChannels;
    const std::vector<double> up =
        select_joints(norm, frames, kc, partition.upper);
    const std::vector<double> lo =
        select_joints(norm, frames, kc, partition.lower);
    const ad::Tensor kp_u = ad::Tensor::constant(
        {ModelDims::upper_keypoints, frames},
        to_channel_major(up, frames, ModelDims::upper_keypoints));
    const ad::Tensor kp_l = ad::Tensor::constant(
        {ModelDims::lower_keypoints, frames},
        to_channel_major(lo, frames, ModelDims::lower_keypoints));

    const ad::Tensor features = provider.features_for(stored_features, frames);
    const TpveOutput latents = tpve_forward(kp_u, kp_l, features, tpve);
    const TpmaeOutput decoded =
        tpmae_decode(latents.upper_latent, latents.lower_latent, tpmae);

    const std::vector<double>& nr = decoded.non_root.values(); // [276, T]
    const std::vector<double>& rt = decoded.root.values();     // [8, T]

    Reconstruction rec;
    rec.ratios.values = latents.ratios.values();
    rec.skeleton = apply_ratios(virtual_skeleton, rec.ratios);

    rec.poses.resize(static_cast<size_t>(frames));
    for (int t = 0; t < frames; ++t) {
        Pose& pose = rec.poses[static_cast<size_t>(t)];
        pose.rotations.resize(kJointCount);

        Rot6d root_six;
        for (int c = 0; c < 6; ++c) {
            const int sc = kRootStatChannel[c];
            root_six[c] = rt[static_cast<size_t>(c) * frames + t] *
                              stats.stdev[static_cast<size_t>(sc)] +
                          stats.mean[static_cast<size_t>(sc)];
        }
        pose.rotations[0] = six_d_to_rot(root_six);

        for (int j = 1; j < kJointCount; ++j) {
            Rot6d six;
            for (int c = 0; c < 6; ++c) {
                const int row = (j - 1) * MotionSequence::kChannels + c;
                const int sc = j * MotionSequence::kChannels + c;
                six[c] = nr[static_cast<size_t>(row) * frames + t] *
                             stats.stdev[static_cast<size_t>(sc)] +
                         stats.mean[static_cast<size_t>(sc)];
            }
            pose.rotations[static_cast<size_t>(j)] = six_d_to_rot(six);
        }

        const double root_z = rt[6 * static_cast<size_t>(frames) + t] *
                                  stats.stdev[static_cast<size_t>(kRootStatChannel[6])] +
                              stats.mean[static_cast<size_t>(kRootStatChannel[6])];
        const Vec2 root_uv(keypoints.at(t, 0, 0), keypoints.at(t, 0, 1));
        pose.root_position = cam.recover_root_translation(root_uv, root_z);
    }
    return rec;
}

} // namespace vtm
