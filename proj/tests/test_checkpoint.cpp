#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <doctest.h>

#include "helpers.hpp"
#include "vtm/checkpoint.hpp"
#include "vtm/errors.hpp"
#include "vtm/models.hpp"

using namespace vtm;

namespace {

NormStats random_stats(test::Rng& rng) {
    NormStats stats;
    stats.mean.resize(NormStats::kChannelCount);
    stats.stdev.resize(NormStats::kChannelCount);
    for (size_t i = 0; i < stats.mean.size(); ++i) {
        stats.mean[i] = rng.uniform(-2.0, 2.0);
        stats.stdev[i] = rng.uniform(1e-6, 3.0);
    }
    return stats;
}

Checkpoint sample_checkpoint(std::uint64_t seed) {
    test::Rng rng(seed);
    Checkpoint ckpt;
    ckpt.meta["kind"] = "tpmae";
    ckpt.meta["seed"] = "42";
    ckpt.meta["feature_dim"] = "512";
    ckpt.skeleton = test::random_skeleton(rng);
    ckpt.partition = BodyPartition::canonical();
    ckpt.stats = random_stats(rng);
    TpmaeModel model = TpmaeModel::create(seed);
    store_params(ckpt, model.params());
    return ckpt;
}

bool same_checkpoint(const Checkpoint& a, const Checkpoint& b) {
    if (a.meta != b.meta || a.partition.upper != b.partition.upper ||
        a.partition.lower != b.partition.lower || a.stats.mean != b.stats.mean ||
        a.stats.stdev != b.stats.stdev) {
        return false;
    }
    if (a.skeleton.joint_names != b.skeleton.joint_names ||
        a.skeleton.parents != b.skeleton.parents ||
        a.skeleton.offsets != b.skeleton.offsets) {
        return false;
    }
    if (a.params.size() != b.params.size()) {
        return false;
    }
    for (const auto& [name, block] : a.params) {
        const auto it = b.params.find(name);
        if (it == b.params.end() || it->second.shape != block.shape ||
            it->second.values != block.values) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST_SUITE("checkpoint") {

TEST_CASE("encode/decode round trip is exact, re-encoding is byte-identical") {
    const Checkpoint ckpt = sample_checkpoint(301);
    const std::vector<std::uint8_t> bytes = encode_checkpoint(ckpt);
    const Checkpoint back = decode_checkpoint(bytes);
    CHECK(same_checkpoint(ckpt, back));
    CHECK(encode_checkpoint(back) == bytes);
}

TEST_CASE("header starts with the magic and version") {
    const std::vector<std::uint8_t> bytes = encode_checkpoint(sample_checkpoint(302));
    REQUIRE(bytes.size() > 8);
    CHECK(bytes[0] == 'V');
    CHECK(bytes[1] == 'T');
    CHECK(bytes[2] == 'M');
    CHECK(bytes[3] == 'C');
    CHECK(bytes[4] == 1); // version 1, little-endian
    CHECK(bytes[5] == 0);
}

TEST_CASE("malformed bytes are rejected") {
    const std::vector<std::uint8_t> bytes = encode_checkpoint(sample_checkpoint(303));

    std::vector<std::uint8_t> wrong_magic = bytes;
    wrong_magic[3] = 'X';
    CHECK_THROWS_AS(decode_checkpoint(wrong_magic), CheckpointError);

    std::vector<std::uint8_t> wrong_version = bytes;
    wrong_version[4] = 9;
    CHECK_THROWS_AS(decode_checkpoint(wrong_version), CheckpointError);

    for (size_t cut : {size_t{3}, size_t{7}, size_t{20}, bytes.size() / 2,
                       bytes.size() - 1}) {
        const std::vector<std::uint8_t> truncated(bytes.begin(),
                                                  bytes.begin() + static_cast<std::ptrdiff_t>(cut));
        CHECK_THROWS_AS(decode_checkpoint(truncated), CheckpointError);
    }

    std::vector<std::uint8_t> trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_AS(decode_checkpoint(trailing), CheckpointError);
}

TEST_CASE("encoding validates stats, skeleton and partition") {
    Checkpoint bad_stats = sample_checkpoint(304);
    bad_stats.stats.mean.pop_back();
    CHECK_THROWS_AS(encode_checkpoint(bad_stats), CheckpointError);

    Checkpoint bad_partition = sample_checkpoint(305);
    bad_partition.partition.upper.pop_back();
    CHECK_THROWS_AS(encode_checkpoint(bad_partition), TopologyMismatch);

    Checkpoint bad_shape = sample_checkpoint(306);
    bad_shape.params.begin()->second.shape[0] += 1;
    CHECK_THROWS_AS(encode_checkpoint(bad_shape), CheckpointError);
}

TEST_CASE("parameters restore a model exactly") {
    TpmaeModel source = TpmaeModel::create(17);
    TpmaeModel target = TpmaeModel::create(99);

    Checkpoint ckpt = sample_checkpoint(307);
    ckpt.params.clear();
    store_params(ckpt, source.params());
    load_params(ckpt, target.params());

    nn::NamedParams ps = source.params();
    nn::NamedParams pt = target.params();
    REQUIRE(ps.size() == pt.size());
    for (size_t i = 0; i < ps.size(); ++i) {
        CHECK(ps[i].second->values() == pt[i].second->values());
    }
}

TEST_CASE("loading reports missing names and shape mismatches") {
    TpmaeModel model = TpmaeModel::create(5);
    Checkpoint ckpt = sample_checkpoint(308);

    Checkpoint missing = ckpt;
    missing.params.erase("tpmae.enc_u1.w");
    CHECK_THROWS_AS(load_params(missing, model.params()), CheckpointError);

    Checkpoint mismatched = ckpt;
    ParamBlock& block = mismatched.params.at("tpmae.enc_u1.b");
    // Same element count, different rank: only the shape comparison catches it.
    block.shape = {static_cast<int>(block.values.size()), 1};
    CHECK_THROWS_AS(load_params(mismatched, model.params()), CheckpointError);

    CHECK_THROWS_AS(store_params(ckpt, model.params()), CheckpointError); // duplicates
}

TEST_CASE("file round trip and missing-file error") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "vtm_checkpoint_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string path = (dir / "model.vtmc").string();

    const Checkpoint ckpt = sample_checkpoint(309);
    save_checkpoint(ckpt, path);
    const Checkpoint back = load_checkpoint(path);
    CHECK(same_checkpoint(ckpt, back));

    CHECK_THROWS_AS(load_checkpoint((dir / "absent.vtmc").string()), IoError);
    fs::remove_all(dir);
}

TEST_CASE("metadata accessor") {
    const Checkpoint ckpt = sample_checkpoint(310);
    CHECK(require_meta(ckpt, "kind") == "tpmae");
    CHECK_THROWS_AS(require_meta(ckpt, "nope"), CheckpointError);
}

} // TEST_SUITE
