#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <doctest.h>

#include "helpers.hpp"
#include "vtm/errors.hpp"
#include "vtm/skeleton.hpp"

using namespace vtm;

TEST_SUITE("skeleton") {

TEST_CASE("canonical layout is a well-formed two-part 24-joint tree") {
    const CanonicalLayout& layout = canonical_layout();
    CHECK(layout.parents[0] == -1);
    for (int j = 1; j < kJointCount; ++j) {
        CHECK(layout.parents[static_cast<size_t>(j)] >= 0);
        CHECK(layout.parents[static_cast<size_t>(j)] < j);
    }

    std::set<int> upper(layout.upper.begin(), layout.upper.end());
    std::set<int> lower(layout.lower.begin(), layout.lower.end());
    CHECK(upper.size() == 16);
    CHECK(lower.size() == 9);
    CHECK(upper.count(0) == 1);
    CHECK(lower.count(0) == 1);

    std::set<int> both;
    std::set_intersection(upper.begin(), upper.end(), lower.begin(),
                          lower.end(), std::inserter(both, both.begin()));
    CHECK(both == std::set<int>{0});

    std::set<int> all;
    std::set_union(upper.begin(), upper.end(), lower.begin(), lower.end(),
                   std::inserter(all, all.begin()));
    CHECK(all.size() == static_cast<size_t>(kJointCount));

    CHECK(layout.end_effectors.size() == 5);
    for (int e : layout.end_effectors) {
        bool is_leaf = true;
        for (int j = 0; j < kJointCount; ++j) {
            if (layout.parents[static_cast<size_t>(j)] == e) {
                is_leaf = false;
            }
        }
        CHECK(is_leaf);
    }

    for (int j = 0; j < kJointCount; ++j) {
        CHECK(canonical_joint_index(layout.names[static_cast<size_t>(j)]) == j);
    }
    CHECK(canonical_joint_index("no_such_joint") == -1);
}

TEST_CASE("validate rejects broken topologies") {
    test::Rng rng(301);
    Skeleton s = test::random_skeleton(rng);
    s.parents[5] = 9; // child above its parent in the ordering
    CHECK_THROWS_AS(s.validate(), TopologyMismatch);

    Skeleton truncated = test::random_skeleton(rng);
    truncated.offsets.pop_back();
    CHECK_THROWS_AS(truncated.validate(), TopologyMismatch);
}

TEST_CASE("single-element average is the identity") {
    test::Rng rng(302);
    const Skeleton s = test::random_skeleton(rng);
    const Skeleton avg = average_skeleton({s});
    for (int j = 0; j < kJointCount; ++j) {
        CHECK((avg.offsets[static_cast<size_t>(j)] -
               s.offsets[static_cast<size_t>(j)])
                  .norm() < 1e-12);
    }
}

TEST_CASE("two skeletons average bone lengths arithmetically") {
    test::Rng rng(303);
    Skeleton a = test::random_skeleton(rng, 0.0);
    Skeleton b = a;
    // Same directions; lengths 0.4 and 0.6 on one bone must average to 0.5.
    const Vec3 dir = a.offsets[3].normalized();
    a.offsets[3] = 0.4 * dir;
    b.offsets[3] = 0.6 * dir;
    const Skeleton avg = average_skeleton({a, b});
    CHECK(std::abs(avg.bone_length(3) - 0.5) < 1e-12);
}

TEST_CASE("average lengths match a scalar mean oracle") {
    test::Rng rng(304);
    std::vector<Skeleton> inputs;
    for (int i = 0; i < 5; ++i) {
        inputs.push_back(test::random_skeleton(rng));
    }
    const Skeleton avg = average_skeleton(inputs);
    for (int j = 1; j < kJointCount; ++j) {
        double mean = 0.0;
        for (const Skeleton& s : inputs) {
            mean += s.bone_length(j);
        }
        mean /= static_cast<double>(inputs.size());
        CHECK(std::abs(avg.bone_length(j) - mean) < 1e-12);
    }
}

TEST_CASE("average is permutation invariant") {
    test::Rng rng(305);
    std::vector<Skeleton> inputs;
    for (int i = 0; i < 5; ++i) {
        inputs.push_back(test::random_skeleton(rng));
    }
    std::vector<Skeleton> shuffled{inputs[3], inputs[0], inputs[4], inputs[1],
                                   inputs[2]};
    const Skeleton a = average_skeleton(inputs);
    const Skeleton b = average_skeleton(shuffled);
    for (int j = 0; j < kJointCount; ++j) {
        CHECK((a.offsets[static_cast<size_t>(j)] -
               b.offsets[static_cast<size_t>(j)])
                  .norm() < 1e-12);
    }
}

TEST_CASE("average rejects mismatched topologies and empty input") {
    test::Rng rng(306);
    Skeleton a = test::random_skeleton(rng);
    Skeleton b = test::random_skeleton(rng);
    b.joint_names[4] = "not_a_knee";
    CHECK_THROWS_AS(average_skeleton({a, b}), TopologyMismatch);
    CHECK_THROWS_AS(average_skeleton({}), TopologyMismatch);
}

TEST_CASE("bone ratios against itself are all ones") {
    test::Rng rng(307);
    const Skeleton s = test::random_skeleton(rng);
    const BoneRatios r = bone_ratios(s, s);
    REQUIRE(r.values.size() == static_cast<size_t>(kBoneCount));
    for (double v : r.values) {
        CHECK(v == 1.0);
    }
}

TEST_CASE("uniformly doubled skeleton has ratio two everywhere") {
    test::Rng rng(308);
    const Skeleton ref = test::random_skeleton(rng);
    Skeleton doubled = ref;
    for (Vec3& o : doubled.offsets) {
        o *= 2.0;
    }
    for (double v : bone_ratios(doubled, ref).values) {
        CHECK(std::abs(v - 2.0) < 1e-15);
    }
}

TEST_CASE("ratios match a per-bone division oracle") {
    test::Rng rng(309);
    const Skeleton a = test::random_skeleton(rng);
    const Skeleton b = test::random_skeleton(rng);
    const BoneRatios r = bone_ratios(a, b);
    for (int j = 1; j < kJointCount; ++j) {
        CHECK(std::abs(r.values[static_cast<size_t>(j - 1)] -
                       a.bone_length(j) / b.bone_length(j)) < 1e-15);
    }
}

TEST_CASE("zero-length reference bones are rejected") {
    test::Rng rng(310);
    const Skeleton a = test::random_skeleton(rng);
    Skeleton ref = a;
    ref.offsets[7] = Vec3::Zero();
    CHECK_THROWS_AS(bone_ratios(a, ref), ZeroBone);
}

TEST_CASE("apply_ratios with ones reproduces the reference") {
    test::Rng rng(311);
    const Skeleton ref = test::random_skeleton(rng);
    BoneRatios ones;
    ones.values.assign(kBoneCount, 1.0);
    const Skeleton out = apply_ratios(ref, ones);
    for (int j = 0; j < kJointCount; ++j) {
        CHECK((out.offsets[static_cast<size_t>(j)] -
               ref.offsets[static_cast<size_t>(j)])
                  .norm() == 0.0);
    }
}

TEST_CASE("apply_ratios doubles lengths for all-two ratios") {
    test::Rng rng(312);
    const Skeleton ref = test::random_skeleton(rng);
    BoneRatios twos;
    twos.values.assign(kBoneCount, 2.0);
    const Skeleton out = apply_ratios(ref, twos);
    for (int j = 1; j < kJointCount; ++j) {
        CHECK(std::abs(out.bone_length(j) - 2.0 * ref.bone_length(j)) < 1e-12);
    }
}

TEST_CASE("ratio round trip reproduces bone lengths over random pairs") {
    test::Rng rng(313);
    const Skeleton ref = test::random_skeleton(rng);
    for (int i = 0; i < 100; ++i) {
        const Skeleton s = test::random_skeleton(rng);
        const Skeleton back = apply_ratios(ref, bone_ratios(s, ref));
        for (int j = 1; j < kJointCount; ++j) {
            CHECK(std::abs(back.bone_length(j) - s.bone_length(j)) < 1e-9);
        }
    }
}

TEST_CASE("alignment onto the same skeleton is the identity") {
    test::Rng rng(314);
    const Skeleton s = test::random_skeleton(rng);
    std::vector<Pose> motion;
    for (int t = 0; t < 5; ++t) {
        motion.push_back(test::random_pose(rng));
    }
    const auto out = align_motion(motion, s, s);
    REQUIRE(out.size() == motion.size());
    for (size_t t = 0; t < motion.size(); ++t) {
        CHECK((out[t].root_position - motion[t].root_position).norm() == 0.0);
        for (int j = 0; j < kJointCount; ++j) {
            CHECK(out[t].rotations[static_cast<size_t>(j)] ==
                  motion[t].rotations[static_cast<size_t>(j)]);
        }
    }
}

TEST_CASE("alignment scales roots by leg length and keeps rotations bitwise") {
    test::Rng rng(315);
    const Skeleton source = test::random_skeleton(rng);
    Skeleton target = source;
    for (Vec3& o : target.offsets) {
        o *= 2.0;
    }
    std::vector<Pose> motion;
    for (int t = 0; t < 8; ++t) {
        motion.push_back(test::random_pose(rng));
    }
    const auto out = align_motion(motion, source, target);
    for (size_t t = 0; t < motion.size(); ++t) {
        CHECK((out[t].root_position - 2.0 * motion[t].root_position).norm() <
              1e-12);
        for (int j = 0; j < kJointCount; ++j) {
            // Bitwise equality: retargeting must not touch joint angles.
            CHECK(out[t].rotations[static_cast<size_t>(j)] ==
                  motion[t].rotations[static_cast<size_t>(j)]);
        }
    }
}

TEST_CASE("alignment requires matching topologies") {
    test::Rng rng(316);
    const Skeleton source = test::random_skeleton(rng);
    Skeleton target = source;
    target.parents[10] = 3;
    CHECK_THROWS_AS(align_motion({test::random_pose(rng)}, source, target),
                    TopologyMismatch);
}

TEST_CASE("mean leg length averages both hip-to-foot chains") {
    test::Rng rng(317);
    const Skeleton s = test::random_skeleton(rng);
    const CanonicalLayout& layout = canonical_layout();
    auto chain = [&](const char* hip_side_knee, const char* ankle,
                     const char* foot) {
        return s.bone_length(canonical_joint_index(hip_side_knee)) +
               s.bone_length(canonical_joint_index(ankle)) +
               s.bone_length(canonical_joint_index(foot));
    };
    (void)layout;
    const double left = chain("left_knee", "left_ankle", "left_foot");
    const double right = chain("right_knee", "right_ankle", "right_foot");
    CHECK(std::abs(mean_leg_length(s) - 0.5 * (left + right)) < 1e-12);
}

TEST_CASE("skeleton table round trips bitwise") {
    test::Rng rng(318);
    const Skeleton s = test::random_skeleton(rng);
    const Skeleton back = parse_skeleton_table(write_skeleton_table(s));
    CHECK(back.joint_names == s.joint_names);
    CHECK(back.parents == s.parents);
    for (int j = 0; j < kJointCount; ++j) {
        CHECK(back.offsets[static_cast<size_t>(j)].x() ==
              s.offsets[static_cast<size_t>(j)].x());
        CHECK(back.offsets[static_cast<size_t>(j)].y() ==
              s.offsets[static_cast<size_t>(j)].y());
        CHECK(back.offsets[static_cast<size_t>(j)].z() ==
              s.offsets[static_cast<size_t>(j)].z());
    }
}

TEST_CASE("skeleton table rejects malformed input") {
    CHECK_THROWS_AS(parse_skeleton_table("pelvis -1 0 0 0\n"), SyntaxError);
    CHECK_THROWS_AS(
        parse_skeleton_table("# vtm skeleton v1\npelvis -1 0 0\n"),
        SyntaxError);
}

} // TEST_SUITE
