#pragma once

#include <string>
#include <vector>

#include "vtm/rotation.hpp"

namespace vtm {

enum class BvhChannel {
    Xposition,
    Yposition,
    Zposition,
    Xrotation,
    Yrotation,
    Zrotation,
};

bool bvh_channel_is_rotation(BvhChannel c);
int bvh_channel_axis(BvhChannel c); // 0 = X, 1 = Y, 2 = Z
const char* bvh_channel_name(BvhChannel c);

struct BvhJoint {
    std::string name;
    int parent = -1;                 // index into BvhDocument::joints, -1 for the root
    Vec3 offset{0.0, 0.0, 0.0};     // meters
    std::vector<BvhChannel> channels;
    bool is_end_site = false;
};

// Parsed BVH file with values in internal units: offsets and position
// channels in meters, rotation channels in radians. Joints are stored in
// hierarchy (depth-first) order, so every parent index precedes its children.
// End sites are retained as channel-less joints named "<parent>_end".
struct BvhDocument {
    std::vector<BvhJoint> joints;
    double frame_time = 1.0 / 30.0;
    std::vector<std::vector<double>> frames; // frame-major channel rows

    int frame_count() const { return static_cast<int>(frames.size()); }
    int total_channel_count() const;
    int channel_offset(int joint) const; // first channel index of a joint
};

struct BvhOptions {
    // File length units -> meters. BVH files conventionally store
    // centimeters, hence the 0.01 default; override for meter/inch files.
    double translation_scale = 0.01;
};

// Accepts LF and CRLF, any per-joint rotation channel order. Throws
// SyntaxError (with a line number) on malformed structure, MismatchError when
// declared and actual frame/channel counts disagree, IoError for inputs
// larger than 512 MB.
BvhDocument parse_bvh(const std::string& text, const BvhOptions& opts = {});

// Canonical formatting: 2-space indentation, 6 decimal places, LF newlines.
// Channels are emitted exactly as stored so parse(write(doc)) returns an
// equal document.
std::string write_bvh(const BvhDocument& doc, const BvhOptions& opts = {});

BvhDocument load_bvh(const std::string& path, const BvhOptions& opts = {});
void save_bvh(const BvhDocument& doc, const std::string& path,
              const BvhOptions& opts = {});

} // namespace vtm
