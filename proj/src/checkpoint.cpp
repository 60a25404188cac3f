#include "vtm/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "vtm/errors.hpp"

namespace vtm {
namespace {

constexpr char kMagic[4] = {'V', 'T', 'M', 'C'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffull));
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64(out, bits);
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
    put_u64(out, s.size());
    out.insert(out.end(), s.begin(), s.end());
}

// Cursor with bounds checking; every read failure is a content error.
class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = static_cast<std::uint32_t>(bytes_[pos_]) |
                          (static_cast<std::uint32_t>(bytes_[pos_ + 1]) << 8) |
                          (static_cast<std::uint32_t>(bytes_[pos_ + 2]) << 16) |
                          (static_cast<std::uint32_t>(bytes_[pos_ + 3]) << 24);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        const std::uint64_t lo = u32();
        const std::uint64_t hi = u32();
        return lo | (hi << 32);
    }

    double f64() {
        const std::uint64_t bits = u64();
        double v = 0.0;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

    std::string str() {
        const std::uint64_t n = u64();
        need(n);
        std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                      bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return s;
    }

    void raw(char* dst, size_t n) {
        need(n);
        std::memcpy(dst, bytes_.data() + pos_, n);
        pos_ += n;
    }

    bool at_end() const { return pos_ == bytes_.size(); }

private:
    void need(std::uint64_t n) {
        if (n > bytes_.size() - pos_) {
            throw CheckpointError("checkpoint data is truncated");
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    size_t pos_ = 0;
};

void put_joint_list(std::vector<std::uint8_t>& out, const std::vector<int>& js) {
    put_u64(out, js.size());
    for (int j : js) {
        put_u32(out, static_cast<std::uint32_t>(j));
    }
}

std::vector<int> get_joint_list(Reader& r) {
    const std::uint64_t n = r.u64();
    if (n > static_cast<std::uint64_t>(kJointCount)) {
        throw CheckpointError("checkpoint partition list is implausibly long");
    }
    std::vector<int> js(static_cast<size_t>(n));
    for (int& j : js) {
        j = static_cast<int>(r.u32());
    }
    return js;
}

} // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
    if (ckpt.stats.mean.size() != NormStats::kChannelCount ||
        ckpt.stats.stdev.size() != NormStats::kChannelCount) {
        throw CheckpointError("checkpoint stats must cover 288 channels");
    }
    ckpt.skeleton.validate();
    ckpt.partition.validate();

    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, kVersion);

    put_u64(out, ckpt.meta.size());
    for (const auto& [key, value] : ckpt.meta) {
        put_string(out, key);
        put_string(out, value);
    }

    put_string(out, write_skeleton_table(ckpt.skeleton));
    put_joint_list(out, ckpt.partition.upper);
    put_joint_list(out, ckpt.partition.lower);

    put_u64(out, ckpt.stats.mean.size());
    for (size_t i = 0; i < ckpt.stats.mean.size(); ++i) {
        put_f64(out, ckpt.stats.mean[i]);
        put_f64(out, ckpt.stats.stdev[i]);
    }

    put_u64(out, ckpt.params.size());
    for (const auto& [name, block] : ckpt.params) {
        put_string(out, name);
        put_u64(out, block.shape.size());
        std::uint64_t count = block.shape.empty() ? 0 : 1;
        for (int d : block.shape) {
            if (d <= 0) {
                throw CheckpointError("parameter '" + name +
                                      "' has a non-positive dimension");
            }
            put_u32(out, static_cast<std::uint32_t>(d));
            count *= static_cast<std::uint64_t>(d);
        }
        if (block.values.size() != count) {
            throw CheckpointError("parameter '" + name +
                                  "' value count does not match its shape");
        }
        for (double v : block.values) {
            put_f64(out, v);
        }
    }
    return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw CheckpointError("not a checkpoint file (bad magic)");
    }
    const std::uint32_t version = r.u32();
    if (version != kVersion) {
        throw CheckpointError("unsupported checkpoint version " +
                              std::to_string(version));
    }

    Checkpoint ckpt;
    const std::uint64_t meta_count = r.u64();
    for (std::uint64_t i = 0; i < meta_count; ++i) {
        std::string key = r.str();
        std::string value = r.str();
        if (!ckpt.meta.emplace(std::move(key), std::move(value)).second) {
            throw CheckpointError("duplicate metadata key in checkpoint");
        }
    }

    try {
        ckpt.skeleton = parse_skeleton_table(r.str());
    } catch (const Error& e) {
        throw CheckpointError(std::string("embedded skeleton is invalid: ") +
                              e.what());
    }
    ckpt.partition.upper = get_joint_list(r);
    ckpt.partition.lower = get_joint_list(r);
    try {
        ckpt.partition.validate();
    } catch (const Error& e) {
        throw CheckpointError(std::string("embedded partition is invalid: ") +
                              e.what());
    }

    const std::uint64_t stat_count = r.u64();
    if (stat_count != NormStats::kChannelCount) {
        throw CheckpointError("checkpoint stats must cover 288 channels");
    }
    ckpt.stats.mean.resize(static_cast<size_t>(stat_count));
    ckpt.stats.stdev.resize(static_cast<size_t>(stat_count));
    for (size_t i = 0; i < stat_count; ++i) {
        ckpt.stats.mean[i] = r.f64();
        ckpt.stats.stdev[i] = r.f64();
    }

    const std::uint64_t param_count = r.u64();
    for (std::uint64_t i = 0; i < param_count; ++i) {
        std::string name = r.str();
        ParamBlock block;
        const std::uint64_t ndims = r.u64();
        if (ndims > 8) {
            throw CheckpointError("parameter '" + name +
                                  "' has an implausible rank");
        }
        std::uint64_t count = ndims == 0 ? 0 : 1;
        for (std::uint64_t d = 0; d < ndims; ++d) {
            const std::uint32_t dim = r.u32();
            if (dim == 0) {
                throw CheckpointError("parameter '" + name +
                                      "' has a zero dimension");
            }
            block.shape.push_back(static_cast<int>(dim));
            count *= dim;
        }
        block.values.resize(static_cast<size_t>(count));
        for (double& v : block.values) {
            v = r.f64();
        }
        if (!ckpt.params.emplace(std::move(name), std::move(block)).second) {
            throw CheckpointError("duplicate parameter name in checkpoint");
        }
    }
    if (!r.at_end()) {
        throw CheckpointError("checkpoint has trailing bytes");
    }
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    const std::vector<std::uint8_t> bytes = encode_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write checkpoint '" + path + "'");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("cannot write checkpoint '" + path + "'");
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open checkpoint '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    return decode_checkpoint(
        std::vector<std::uint8_t>(text.begin(), text.end()));
}

void store_params(Checkpoint& ckpt, const nn::NamedParams& params) {
    for (const auto& [name, tensor] : params) {
        ParamBlock block;
        block.shape = tensor->shape();
        block.values = tensor->values();
        if (!ckpt.params.emplace(name, std::move(block)).second) {
            throw CheckpointError("duplicate parameter name '" + name +
                                  "' while storing");
        }
    }
}

void load_params(const Checkpoint& ckpt, const nn::NamedParams& params) {
    for (const auto& [name, tensor] : params) {
        const auto it = ckpt.params.find(name);
        if (it == ckpt.params.end()) {
            throw CheckpointError("checkpoint is missing parameter '" + name + "'");
        }
        if (it->second.shape != tensor->shape()) {
            throw CheckpointError("checkpoint parameter '" + name +
                                  "' has a mismatched shape");
        }
        tensor->values() = it->second.values;
    }
}

const std::string& require_meta(const Checkpoint& ckpt, const std::string& key) {
    const auto it = ckpt.meta.find(key);
    if (it == ckpt.meta.end()) {
        throw CheckpointError("checkpoint is missing metadata key '" + key + "'");
    }
    return it->second;
}

} // namespace vtm
