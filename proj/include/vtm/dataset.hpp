#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vtm/camera.hpp"
#include "vtm/representation.hpp"
#include "vtm/skeleton.hpp"

namespace vtm {

// Raw array record: magic "VTMD", u32 version, u32 frames, u32 rows,
// u32 channels, then frames*rows*channels little-endian float32 values in
// frame-major order. Used for motion (rows=24, channels=12), keypoints
// (rows=24, channels=4) and per-frame feature arrays (rows=1, channels=F).
struct ArrayRecord {
    int frames = 0;
    int rows = 0;
    int channels = 0;
    std::vector<double> data;
};

std::vector<std::uint8_t> encode_array_record(const ArrayRecord& record);
ArrayRecord decode_array_record(const std::vector<std::uint8_t>& bytes);
ArrayRecord load_array_record(const std::string& path);
void save_array_record(const ArrayRecord& record, const std::string& path);

// One prepared sequence as listed in the dataset manifest.
struct ManifestEntry {
    std::string sequence_id;
    std::string skeleton_id;
    std::string camera_id;
    int frames = 0;
    BoneRatios ratios; // against the dataset's virtual skeleton
};

// Prepared dataset directory:
//   manifest.txt   - header + one "sequence ..." line per sequence
//   skeleton.txt   - the virtual skeleton (average of all inputs)
//   camera.txt     - the camera used for keypoint projection
//   <id>.motion.vtmd / <id>.keypoints.vtmd - array records
struct Dataset {
    Skeleton virtual_skeleton;
    Camera camera;
    std::vector<ManifestEntry> entries;
    std::string root; // directory path

    // Loads and converts one sequence's arrays; velocities are recomputed
    // after the float32 round trip so the difference invariants hold exactly.
    SequenceSample load_sequence(const ManifestEntry& entry) const;
    std::vector<SequenceSample> load_all() const;
};

std::string write_manifest(const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> parse_manifest(const std::string& text);

// Writes a complete dataset directory (created if missing, files overwritten).
void save_dataset(const std::string& dir, const Skeleton& virtual_skeleton,
                  const Camera& cam, const std::vector<ManifestEntry>& entries,
                  const std::vector<MotionSequence>& motions,
                  const std::vector<KeypointSequence>& keypoints);

Dataset open_dataset(const std::string& dir);

// Conversion helpers between sequences and records.
ArrayRecord motion_to_record(const MotionSequence& ms);
MotionSequence motion_from_record(const ArrayRecord& record);
ArrayRecord keypoints_to_record(const KeypointSequence& ks);
KeypointSequence keypoints_from_record(const ArrayRecord& record);

} // namespace vtm
