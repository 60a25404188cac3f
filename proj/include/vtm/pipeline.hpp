#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vtm/camera.hpp"
#include "vtm/checkpoint.hpp"
#include "vtm/dataset.hpp"
#include "vtm/models.hpp"
#include "vtm/motion_io.hpp"
#include "vtm/representation.hpp"

namespace vtm {

// ---------------------------------------------------------------------------
// Dataset preparation
// ---------------------------------------------------------------------------

struct PrepareResult {
    Dataset dataset;                  // reopened from out_dir after writing
    std::vector<std::string> skipped; // "<input>: <E_CODE>: <message>" lines
};

// Scans bvh_dir for *.bvh files (sorted by name), decodes each onto the
// canonical layout, averages the skeletons into the virtual skeleton, aligns
// every motion onto it, projects keypoints with the camera and writes a
// dataset directory. Inputs that fail to decode or convert are recorded in
// `skipped` and left out; IoError only when nothing survives. Re-running
// with the same inputs rewrites the directory byte-identically.
PrepareResult prepare_dataset(const std::string& bvh_dir,
                              const std::string& camera_path,
                              const std::string& out_dir);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct MetricsSummary {
    double mpjpe = 0.0;    // root-relative joint error, millimeters
    double pa_mpjpe = 0.0; // similarity-aligned joint error, millimeters
    double mrpe = 0.0;     // global root position error, millimeters
    double mble = 0.0;     // bone length error, millimeters

    // "key: value" lines in the order above, one decimal place.
    std::string to_text() const;
};

// Runs forward kinematics on both motions and compares them. Frame counts
// must match (ShapeError); the skeletons must share the canonical topology.
MetricsSummary evaluate_motions(const LoadedMotion& pred,
                                const LoadedMotion& gt);

// ---------------------------------------------------------------------------
// Reconstruction
// ---------------------------------------------------------------------------

// Runs a trained checkpoint (meta kind "vtm") on a keypoint sequence. The
// sequence is padded to a multiple of four frames by repeating the last
// frame, reconstructed, and trimmed back to the input length. In file
// feature mode `stored_features` must hold frames x feature_dim values
// (frame-major); in zeros mode it is ignored.
Reconstruction reconstruct_sequence(const KeypointSequence& keypoints,
                                    const std::vector<double>& stored_features,
                                    const Checkpoint& ckpt, const Camera& cam);

// Maps the camera-space reconstruction back to world coordinates: the root
// rotation loses the camera composition and the root position is carried
// through the inverse extrinsics. Non-root joints are local and unchanged.
LoadedMotion to_world_motion(const Reconstruction& recon, const Camera& cam,
                             double frame_time = 1.0 / 30.0);

// Camera-space root positions, one "x y z" line per frame (%.17g), after a
// comment header.
std::string root_track_text(const Reconstruction& recon);

// Sibling path for the root track: "<out>.bvh" -> "<out>.root.txt".
std::string root_track_path(const std::string& bvh_path);

// Writes the world-space BVH to bvh_path and the camera-space root track
// next to it.
void save_reconstruction(const Reconstruction& recon, const Camera& cam,
                         double frame_time, const std::string& bvh_path);

// ---------------------------------------------------------------------------
// Gradient diagnostics
// ---------------------------------------------------------------------------

struct DiagnosticEntry {
    std::string name;
    double max_rel_error = 0.0;
    int checked = 0;
};

struct DiagnosticReport {
    std::vector<DiagnosticEntry> entries;
    double max_rel_error = 0.0;

    bool pass(double tolerance = 1e-4) const {
        return max_rel_error < tolerance;
    }
    std::string to_text() const;
};

// Checks reverse-mode gradients against central finite differences for every
// differentiable operation in isolation and for the two full training loss
// graphs (motion autoencoder loss; joint video-to-motion loss). Elementwise
// checks are exhaustive; the loss graphs sample a deterministic subset of
// entries from every parameter tensor.
DiagnosticReport run_gradient_diagnostics(std::uint64_t seed = 0);

} // namespace vtm
