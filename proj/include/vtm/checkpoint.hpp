#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vtm/nn.hpp"
#include "vtm/representation.hpp"
#include "vtm/skeleton.hpp"

namespace vtm {

// One saved parameter: shape plus full-precision values.
struct ParamBlock {
    std::vector<int> shape;
    std::vector<double> values;
};

// Everything needed to resume or run a trained model: string metadata (model
// kind, seed, feature width, ...), the virtual skeleton, the body partition,
// the motion standardization statistics and the named parameters. Metadata
// and parameters are kept sorted by key so encoding is deterministic.
struct Checkpoint {
    std::map<std::string, std::string> meta;
    Skeleton skeleton;
    BodyPartition partition;
    NormStats stats;
    std::map<std::string, ParamBlock> params;
};

// Binary layout (little-endian): magic "VTMC", version u32, metadata map,
// skeleton text table, partition lists, stats as f64 pairs, parameter blocks
// (name, shape dims, f64 values). Decoding of a re-encoded checkpoint is
// bit-exact. Throws CheckpointError on malformed bytes.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

// File wrappers; IoError on filesystem trouble.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Copies live model parameters into / out of a checkpoint. Loading throws
// CheckpointError when a name is missing or a shape disagrees.
void store_params(Checkpoint& ckpt, const nn::NamedParams& params);
void load_params(const Checkpoint& ckpt, const nn::NamedParams& params);

// Metadata accessor; throws CheckpointError when the key is absent.
const std::string& require_meta(const Checkpoint& ckpt, const std::string& key);

} // namespace vtm
