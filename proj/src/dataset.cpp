#include "vtm/dataset.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vtm/errors.hpp"

namespace vtm {
namespace {

constexpr char kMagic[4] = {'V', 'T', 'M', 'D'};
constexpr std::uint32_t kRecordVersion = 1;
constexpr char kManifestHeader[] = "# vtm dataset v1";

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, size_t offset) {
    return static_cast<std::uint32_t>(in[offset]) |
           (static_cast<std::uint32_t>(in[offset + 1]) << 8) |
           (static_cast<std::uint32_t>(in[offset + 2]) << 16) |
           (static_cast<std::uint32_t>(in[offset + 3]) << 24);
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u32(out, bits);
}

float get_f32(const std::vector<std::uint8_t>& in, size_t offset) {
    std::uint32_t bits = get_u32(in, offset);
    float v = 0.0f;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

std::string read_text_file(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(std::string("cannot open ") + what + " '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text,
                     const char* what) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError(std::string("cannot write ") + what + " '" + path + "'");
    }
    out << text;
    if (!out) {
        throw IoError(std::string("cannot write ") + what + " '" + path + "'");
    }
}

void check_id(const std::string& id, const char* what) {
    if (id.empty()) {
        throw ConfigError(std::string(what) + " must not be empty");
    }
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '-' ||
                        c == '.';
        if (!ok) {
            throw ConfigError(std::string(what) + " '" + id +
                              "' may only contain letters, digits, '_', '-' "
                              "and '.'");
        }
    }
}

std::string motion_path(const std::string& dir, const std::string& id) {
    return dir + "/" + id + ".motion.vtmd";
}

std::string keypoints_path(const std::string& dir, const std::string& id) {
    return dir + "/" + id + ".keypoints.vtmd";
}

std::string features_path(const std::string& dir, const std::string& id) {
    return dir + "/" + id + ".features.vtmd";
}

} // namespace

std::vector<std::uint8_t> encode_array_record(const ArrayRecord& record) {
    if (record.frames < 1 || record.rows < 1 || record.channels < 1) {
        throw ShapeError("array record dimensions must be positive");
    }
    const size_t count = static_cast<size_t>(record.frames) *
                         static_cast<size_t>(record.rows) *
                         static_cast<size_t>(record.channels);
    if (record.data.size() != count) {
        throw ShapeError("array record has " + std::to_string(record.data.size()) +
                         " values but dimensions imply " + std::to_string(count));
    }
    std::vector<std::uint8_t> out;
    out.reserve(20 + 4 * count);
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, kRecordVersion);
    put_u32(out, static_cast<std::uint32_t>(record.frames));
    put_u32(out, static_cast<std::uint32_t>(record.rows));
    put_u32(out, static_cast<std::uint32_t>(record.channels));
    for (double v : record.data) {
        put_f32(out, static_cast<float>(v));
    }
    return out;
}

ArrayRecord decode_array_record(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 20) {
        throw SyntaxError("array record is truncated (header needs 20 bytes)");
    }
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw SyntaxError("array record magic is not 'VTMD'");
    }
    const std::uint32_t version = get_u32(bytes, 4);
    if (version != kRecordVersion) {
        throw SyntaxError("unsupported array record version " +
                          std::to_string(version));
    }
    ArrayRecord record;
    const std::uint32_t frames = get_u32(bytes, 8);
    const std::uint32_t rows = get_u32(bytes, 12);
    const std::uint32_t channels = get_u32(bytes, 16);
    if (frames < 1 || rows < 1 || channels < 1) {
        throw SyntaxError("array record dimensions must be positive");
    }
    const std::uint64_t count =
        static_cast<std::uint64_t>(frames) * rows * channels;
    if (bytes.size() != 20 + 4 * count) {
        throw SyntaxError("array record has " + std::to_string(bytes.size()) +
                          " bytes but dimensions imply " +
                          std::to_string(20 + 4 * count));
    }
    record.frames = static_cast<int>(frames);
    record.rows = static_cast<int>(rows);
    record.channels = static_cast<int>(channels);
    record.data.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        record.data[i] = static_cast<double>(get_f32(bytes, 20 + 4 * i));
    }
    return record;
}

ArrayRecord load_array_record(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open array record '" + path + "'");
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_array_record(bytes);
}

void save_array_record(const ArrayRecord& record, const std::string& path) {
    const std::vector<std::uint8_t> bytes = encode_array_record(record);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write array record '" + path + "'");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("cannot write array record '" + path + "'");
    }
}

std::string write_manifest(const std::vector<ManifestEntry>& entries) {
    std::string out = std::string(kManifestHeader) + "\n";
    char buf[64];
    for (const ManifestEntry& e : entries) {
        check_id(e.sequence_id, "sequence id");
        check_id(e.skeleton_id, "skeleton id");
        check_id(e.camera_id, "camera id");
        if (e.frames < 1) {
            throw ConfigError("sequence '" + e.sequence_id +
                              "' has a non-positive frame count");
        }
        if (e.ratios.values.size() != static_cast<size_t>(kBoneCount)) {
            throw MismatchError("sequence '" + e.sequence_id + "' has " +
                                std::to_string(e.ratios.values.size()) +
                                " bone ratios, expected " +
                                std::to_string(kBoneCount));
        }
        out += "sequence " + e.sequence_id + " skeleton " + e.skeleton_id +
               " camera " + e.camera_id + " frames " + std::to_string(e.frames) +
               " ratios";
        for (double r : e.ratios.values) {
            std::snprintf(buf, sizeof(buf), " %.17g", r);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

std::vector<ManifestEntry> parse_manifest(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool saw_header = false;
    std::vector<ManifestEntry> entries;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        const size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos) {
            continue;
        }
        if (!saw_header) {
            if (line != kManifestHeader) {
                throw SyntaxError("manifest line " + std::to_string(line_no) +
                                  ": expected header '" + kManifestHeader + "'");
            }
            saw_header = true;
            continue;
        }
        if (line[first] == '#') {
            continue;
        }
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        if (keyword != "sequence") {
            throw SyntaxError("manifest line " + std::to_string(line_no) +
                              ": expected 'sequence', got '" + keyword + "'");
        }
        ManifestEntry e;
        std::string kw_skeleton;
        std::string kw_camera;
        std::string kw_frames;
        std::string kw_ratios;
        ls >> e.sequence_id >> kw_skeleton >> e.skeleton_id >> kw_camera >>
            e.camera_id >> kw_frames >> e.frames >> kw_ratios;
        if (!ls || kw_skeleton != "skeleton" || kw_camera != "camera" ||
            kw_frames != "frames" || kw_ratios != "ratios") {
            throw SyntaxError("manifest line " + std::to_string(line_no) +
                              ": malformed sequence entry");
        }
        if (e.frames < 1) {
            throw SyntaxError("manifest line " + std::to_string(line_no) +
                              ": frame count must be at least 1");
        }
        e.ratios.values.resize(kBoneCount);
        for (int i = 0; i < kBoneCount; ++i) {
            if (!(ls >> e.ratios.values[i])) {
                throw SyntaxError("manifest line " + std::to_string(line_no) +
                                  ": expected " + std::to_string(kBoneCount) +
                                  " bone ratios");
            }
        }
        std::string extra;
        if (ls >> extra) {
            throw SyntaxError("manifest line " + std::to_string(line_no) +
                              ": unexpected trailing token '" + extra + "'");
        }
        entries.push_back(std::move(e));
    }
    if (!saw_header) {
        throw SyntaxError("manifest is missing the '" +
                          std::string(kManifestHeader) + "' header");
    }
    return entries;
}

ArrayRecord motion_to_record(const MotionSequence& ms) {
    ArrayRecord record;
    record.frames = ms.frames;
    record.rows = kJointCount;
    record.channels = MotionSequence::kChannels;
    record.data = ms.data;
    return record;
}

MotionSequence motion_from_record(const ArrayRecord& record) {
    if (record.rows != kJointCount ||
        record.channels != MotionSequence::kChannels) {
        throw MismatchError("motion record is " + std::to_string(record.rows) +
                            "x" + std::to_string(record.channels) +
                            " per frame, expected " +
                            std::to_string(kJointCount) + "x" +
                            std::to_string(MotionSequence::kChannels));
    }
    MotionSequence ms;
    ms.frames = record.frames;
    ms.data = record.data;
    refresh_motion_velocities(ms);
    return ms;
}

ArrayRecord keypoints_to_record(const KeypointSequence& ks) {
    ArrayRecord record;
    record.frames = ks.frames;
    record.rows = kJointCount;
    record.channels = KeypointSequence::kChannels;
    record.data = ks.data;
    return record;
}

KeypointSequence keypoints_from_record(const ArrayRecord& record) {
    if (record.rows != kJointCount ||
        record.channels != KeypointSequence::kChannels) {
        throw MismatchError("keypoint record is " + std::to_string(record.rows) +
                            "x" + std::to_string(record.channels) +
                            " per frame, expected " +
                            std::to_string(kJointCount) + "x" +
                            std::to_string(KeypointSequence::kChannels));
    }
    KeypointSequence ks;
    ks.frames = record.frames;
    ks.data = record.data;
    refresh_keypoint_velocities(ks);
    return ks;
}

SequenceSample Dataset::load_sequence(const ManifestEntry& entry) const {
    SequenceSample sample;
    sample.sequence_id = entry.sequence_id;
    sample.ratios = entry.ratios;

    sample.motion = motion_from_record(load_array_record(motion_path(root, entry.sequence_id)));
    sample.motion.skeleton_id = entry.skeleton_id;
    sample.motion.camera_id = entry.camera_id;
    if (sample.motion.frames != entry.frames) {
        throw MismatchError("sequence '" + entry.sequence_id + "' stores " +
                            std::to_string(sample.motion.frames) +
                            " motion frames but the manifest lists " +
                            std::to_string(entry.frames));
    }

    sample.keypoints =
        keypoints_from_record(load_array_record(keypoints_path(root, entry.sequence_id)));
    if (sample.keypoints.frames != entry.frames) {
        throw MismatchError("sequence '" + entry.sequence_id + "' stores " +
                            std::to_string(sample.keypoints.frames) +
                            " keypoint frames but the manifest lists " +
                            std::to_string(entry.frames));
    }

    const std::string feat = features_path(root, entry.sequence_id);
    if (std::filesystem::exists(feat)) {
        const ArrayRecord record = load_array_record(feat);
        if (record.rows != 1) {
            throw MismatchError("feature record for '" + entry.sequence_id +
                                "' must have one row per frame");
        }
        if (record.frames != entry.frames) {
            throw MismatchError("sequence '" + entry.sequence_id + "' stores " +
                                std::to_string(record.frames) +
                                " feature frames but the manifest lists " +
                                std::to_string(entry.frames));
        }
        sample.features = record.data;
        sample.feature_dim = record.channels;
    }
    return sample;
}

std::vector<SequenceSample> Dataset::load_all() const {
    std::vector<SequenceSample> samples;
    samples.reserve(entries.size());
    for (const ManifestEntry& entry : entries) {
        samples.push_back(load_sequence(entry));
    }
    return samples;
}

void save_dataset(const std::string& dir, const Skeleton& virtual_skeleton,
                  const Camera& cam, const std::vector<ManifestEntry>& entries,
                  const std::vector<MotionSequence>& motions,
                  const std::vector<KeypointSequence>& keypoints) {
    if (entries.size() != motions.size() || entries.size() != keypoints.size()) {
        throw MismatchError("dataset has " + std::to_string(entries.size()) +
                            " manifest entries, " +
                            std::to_string(motions.size()) + " motions and " +
                            std::to_string(keypoints.size()) +
                            " keypoint arrays");
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create dataset directory '" + dir +
                      "': " + ec.message());
    }
    for (size_t i = 0; i < entries.size(); ++i) {
        if (motions[i].frames != entries[i].frames ||
            keypoints[i].frames != entries[i].frames) {
            throw MismatchError("sequence '" + entries[i].sequence_id +
                                "' arrays disagree with the manifest frame "
                                "count");
        }
    }
    write_text_file(dir + "/manifest.txt", write_manifest(entries), "manifest");
    write_text_file(dir + "/skeleton.txt", write_skeleton_table(virtual_skeleton),
                    "skeleton file");
    save_camera(cam, dir + "/camera.txt");
    for (size_t i = 0; i < entries.size(); ++i) {
        save_array_record(motion_to_record(motions[i]),
                          motion_path(dir, entries[i].sequence_id));
        save_array_record(keypoints_to_record(keypoints[i]),
                          keypoints_path(dir, entries[i].sequence_id));
    }
}

Dataset open_dataset(const std::string& dir) {
    Dataset ds;
    ds.root = dir;
    ds.entries = parse_manifest(read_text_file(dir + "/manifest.txt", "manifest"));
    ds.virtual_skeleton =
        parse_skeleton_table(read_text_file(dir + "/skeleton.txt", "skeleton file"));
    ds.camera = load_camera(dir + "/camera.txt");
    return ds;
}

} // namespace vtm
