#include "vtm/skeleton.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "vtm/errors.hpp"

namespace vtm {

namespace {

CanonicalLayout make_layout() {
    CanonicalLayout l;
    l.names = {
        "pelvis",         // 0
        "left_hip",       // 1
        "right_hip",      // 2
        "spine1",         // 3
        "left_knee",      // 4
        "right_knee",     // 5
        "spine2",         // 6
        "left_ankle",     // 7
        "right_ankle",    // 8
        "spine3",         // 9
        "left_foot",      // 10
        "right_foot",     // 11
        "neck",           // 12
        "left_collar",    // 13
        "right_collar",   // 14
        "head",           // 15
        "left_shoulder",  // 16
        "right_shoulder", // 17
        "left_elbow",     // 18
        "right_elbow",    // 19
        "left_wrist",     // 20
        "right_wrist",    // 21
        "left_hand",      // 22
        "right_hand",     // 23
    };
    l.parents = {-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8,
                 9, 9, 9, 12, 13, 14, 16, 17, 18, 19, 20, 21};
    l.lower = {0, 1, 2, 4, 5, 7, 8, 10, 11};
    l.upper = {0, 3, 6, 9, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23};
    l.end_effectors = {15, 22, 23, 10, 11};
    return l;
}

} // namespace

const CanonicalLayout& canonical_layout() {
    static const CanonicalLayout layout = make_layout();
    return layout;
}

int canonical_joint_index(const std::string& name) {
    static const std::unordered_map<std::string, int> index = [] {
        std::unordered_map<std::string, int> m;
        const auto& l = canonical_layout();
        for (int j = 0; j < kJointCount; ++j) {
            m.emplace(l.names[static_cast<size_t>(j)], j);
        }
        return m;
    }();
    auto it = index.find(name);
    return it == index.end() ? -1 : it->second;
}

std::vector<double> Skeleton::bone_lengths() const {
    std::vector<double> lengths(static_cast<size_t>(joint_count() - 1));
    for (int j = 1; j < joint_count(); ++j) {
        lengths[static_cast<size_t>(j - 1)] = bone_length(j);
    }
    return lengths;
}

Skeleton Skeleton::canonical(const std::vector<Vec3>& offsets) {
    if (offsets.size() != kJointCount) {
        throw TopologyMismatch("canonical skeleton needs 24 offsets");
    }
    Skeleton s;
    const auto& l = canonical_layout();
    s.joint_names.assign(l.names.begin(), l.names.end());
    s.parents.assign(l.parents.begin(), l.parents.end());
    s.offsets = offsets;
    s.validate();
    return s;
}

void Skeleton::validate() const {
    const int n = joint_count();
    if (n == 0 || parents.size() != joint_names.size() ||
        offsets.size() != joint_names.size()) {
        throw TopologyMismatch("skeleton arrays disagree in size");
    }
    if (parents[0] != -1) {
        throw TopologyMismatch("joint 0 must be the root");
    }
    for (int j = 1; j < n; ++j) {
        const int p = parents[static_cast<size_t>(j)];
        if (p < 0 || p >= j) {
            throw TopologyMismatch("parent of joint " + std::to_string(j) +
                                   " must precede it");
        }
    }
}

void require_same_topology(const Skeleton& a, const Skeleton& b) {
    if (a.joint_names != b.joint_names || a.parents != b.parents) {
        throw TopologyMismatch("skeletons have different joints or parents");
    }
}

Skeleton average_skeleton(const std::vector<Skeleton>& skeletons) {
    if (skeletons.empty()) {
        throw TopologyMismatch("cannot average zero skeletons");
    }
    const Skeleton& first = skeletons.front();
    first.validate();
    for (const Skeleton& s : skeletons) {
        require_same_topology(first, s);
    }
    const int n = first.joint_count();
    Skeleton out = first;
    for (int j = 1; j < n; ++j) {
        double mean_len = 0.0;
        Vec3 mean_dir = Vec3::Zero();
        for (const Skeleton& s : skeletons) {
            const Vec3& o = s.offsets[static_cast<size_t>(j)];
            const double len = o.norm();
            mean_len += len;
            if (len > 0.0) {
                mean_dir += o / len;
            }
        }
        mean_len /= static_cast<double>(skeletons.size());
        const double dn = mean_dir.norm();
        if (dn < 1e-12) {
            throw DegenerateInput("offset directions of joint " +
                                  std::to_string(j) + " cancel out");
        }
        out.offsets[static_cast<size_t>(j)] = mean_len * (mean_dir / dn);
    }
    out.offsets[0] = Vec3::Zero();
    return out;
}

BoneRatios bone_ratios(const Skeleton& s, const Skeleton& reference) {
    require_same_topology(s, reference);
    BoneRatios r;
    r.values.resize(static_cast<size_t>(s.joint_count() - 1));
    for (int j = 1; j < s.joint_count(); ++j) {
        const double ref_len = reference.bone_length(j);
        if (ref_len < 1e-9) {
            throw ZeroBone("reference bone " + std::to_string(j) +
                           " is shorter than 1e-9 m");
        }
        r.values[static_cast<size_t>(j - 1)] = s.bone_length(j) / ref_len;
    }
    return r;
}

Skeleton apply_ratios(const Skeleton& reference, const BoneRatios& ratios) {
    if (ratios.values.size() != static_cast<size_t>(reference.joint_count() - 1)) {
        throw TopologyMismatch("ratio count does not match bone count");
    }
    Skeleton out = reference;
    for (int j = 1; j < reference.joint_count(); ++j) {
        out.offsets[static_cast<size_t>(j)] *= ratios.values[static_cast<size_t>(j - 1)];
    }
    return out;
}

double mean_leg_length(const Skeleton& s) {
    const auto& l = canonical_layout();
    if (s.joint_names.size() != kJointCount ||
        !std::equal(l.names.begin(), l.names.end(), s.joint_names.begin())) {
        throw TopologyMismatch("mean_leg_length expects the canonical joint set");
    }
    auto chain = [&](int knee, int ankle, int foot) {
        return s.bone_length(knee) + s.bone_length(ankle) + s.bone_length(foot);
    };
    const double left = chain(4, 7, 10);
    const double right = chain(5, 8, 11);
    return 0.5 * (left + right);
}

std::vector<Pose> align_motion(const std::vector<Pose>& motion,
                               const Skeleton& source,
                               const Skeleton& target) {
    require_same_topology(source, target);
    const double src_leg = mean_leg_length(source);
    if (src_leg < 1e-9) {
        throw ZeroBone("source skeleton has zero leg length");
    }
    const double scale = mean_leg_length(target) / src_leg;
    std::vector<Pose> out = motion; // rotations copied bitwise
    for (Pose& p : out) {
        p.root_position *= scale;
    }
    return out;
}

std::string write_skeleton_table(const Skeleton& s) {
    std::string out = "# vtm skeleton v1\n";
    char buf[160];
    for (int j = 0; j < s.joint_count(); ++j) {
        const Vec3& o = s.offsets[static_cast<size_t>(j)];
        std::snprintf(buf, sizeof(buf), "%s %d %.17g %.17g %.17g\n",
                      s.joint_names[static_cast<size_t>(j)].c_str(),
                      s.parents[static_cast<size_t>(j)], o.x(), o.y(), o.z());
        out += buf;
    }
    return out;
}

Skeleton parse_skeleton_table(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# vtm skeleton v1", 0) != 0) {
        throw SyntaxError("skeleton table: missing '# vtm skeleton v1' header");
    }
    Skeleton s;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        std::string name;
        int parent = 0;
        double x = 0.0, y = 0.0, z = 0.0;
        if (!(ls >> name >> parent >> x >> y >> z)) {
            throw SyntaxError("skeleton table line " + std::to_string(line_no) +
                              ": expected 'name parent ox oy oz'");
        }
        s.joint_names.push_back(name);
        s.parents.push_back(parent);
        s.offsets.emplace_back(x, y, z);
    }
    s.validate();
    return s;
}

} // namespace vtm
