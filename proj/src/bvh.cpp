#include "vtm/bvh.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vtm/errors.hpp"

namespace vtm {

namespace {

constexpr size_t kMaxInputBytes = 512ull * 1024 * 1024;
constexpr double kDegToRad = M_PI / 180.0;

const char* kChannelNames[6] = {"Xposition", "Yposition", "Zposition",
                                "Xrotation", "Yrotation", "Zrotation"};

// Whitespace-delimited tokens with the 1-based line each one starts on.
struct Token {
    std::string text;
    int line;
};

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> tokens;
    int line = 1;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        const char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
        } else {
            size_t j = i;
            while (j < n && text[j] != ' ' && text[j] != '\t' &&
                   text[j] != '\r' && text[j] != '\n') {
                ++j;
            }
            tokens.push_back({text.substr(i, j - i), line});
            i = j;
        }
    }
    return tokens;
}

class Parser {
public:
    Parser(std::vector<Token> tokens, const BvhOptions& opts)
        : tokens_(std::move(tokens)), opts_(opts) {}

    BvhDocument run() {
        expect("HIERARCHY");
        expect("ROOT");
        parse_joint(-1, false);
        expect("MOTION");
        parse_motion();
        if (pos_ < tokens_.size()) {
            fail(peek().line, "trailing content after motion data");
        }
        return std::move(doc_);
    }

private:
    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw SyntaxError("line " + std::to_string(line) + ": " + msg);
    }

    const Token& peek() const {
        if (pos_ >= tokens_.size()) {
            const int line = tokens_.empty() ? 1 : tokens_.back().line;
            throw SyntaxError("line " + std::to_string(line) +
                              ": unexpected end of file");
        }
        return tokens_[pos_];
    }

    Token next() {
        const Token& t = peek();
        ++pos_;
        return t;
    }

    void expect(const std::string& word) {
        const Token t = next();
        if (t.text != word) {
            fail(t.line, "expected '" + word + "', got '" + t.text + "'");
        }
    }

    double number() {
        const Token t = next();
        char* end = nullptr;
        const double v = std::strtod(t.text.c_str(), &end);
        if (end == t.text.c_str() || *end != '\0') {
            fail(t.line, "expected a number, got '" + t.text + "'");
        }
        return v;
    }

    int integer() {
        const Token t = next();
        char* end = nullptr;
        const long v = std::strtol(t.text.c_str(), &end, 10);
        if (end == t.text.c_str() || *end != '\0') {
            fail(t.line, "expected an integer, got '" + t.text + "'");
        }
        return static_cast<int>(v);
    }

    BvhChannel channel() {
        const Token t = next();
        for (int i = 0; i < 6; ++i) {
            if (t.text == kChannelNames[i]) {
                return static_cast<BvhChannel>(i);
            }
        }
        fail(t.line, "unknown channel '" + t.text + "'");
    }

    // Parses a ROOT/JOINT/End Site body; the introducing keyword has already
    // been consumed except for the name.
    void parse_joint(int parent, bool end_site) {
        BvhJoint joint;
        joint.parent = parent;
        joint.is_end_site = end_site;
        if (end_site) {
            expect("Site");
            joint.name = doc_.joints[static_cast<size_t>(parent)].name + "_end";
        } else {
            const Token t = next();
            if (t.text == "{") {
                fail(t.line, "joint is missing a name");
            }
            joint.name = t.text;
        }
        const int index = static_cast<int>(doc_.joints.size());
        doc_.joints.push_back(joint);

        const Token open = next();
        if (open.text != "{") {
            fail(open.line, "expected '{' after joint name");
        }
        bool saw_offset = false;
        while (true) {
            const Token t = next();
            if (t.text == "OFFSET") {
                const double x = number();
                const double y = number();
                const double z = number();
                doc_.joints[static_cast<size_t>(index)].offset =
                    Vec3(x, y, z) * opts_.translation_scale;
                saw_offset = true;
            } else if (t.text == "CHANNELS") {
                if (end_site) {
                    fail(t.line, "end sites cannot declare channels");
                }
                const int count = integer();
                auto& chans = doc_.joints[static_cast<size_t>(index)].channels;
                for (int i = 0; i < count; ++i) {
                    chans.push_back(channel());
                }
                validate_channels(doc_.joints[static_cast<size_t>(index)], t.line);
            } else if (t.text == "JOINT") {
                if (end_site) {
                    fail(t.line, "end sites cannot have children");
                }
                parse_joint(index, false);
            } else if (t.text == "End") {
                if (end_site) {
                    fail(t.line, "end sites cannot have children");
                }
                parse_joint(index, true);
            } else if (t.text == "}") {
                break;
            } else {
                fail(t.line, "unexpected token '" + t.text + "' in joint body");
            }
        }
        if (!saw_offset) {
            fail(open.line, "joint '" + joint.name + "' has no OFFSET");
        }
        if (!end_site) {
            const auto& chans = doc_.joints[static_cast<size_t>(index)].channels;
            if (parent == -1 && chans.size() != 6) {
                fail(open.line, "root must declare 6 channels");
            }
            if (parent != -1 && chans.size() != 3) {
                fail(open.line, "joint '" + joint.name +
                                    "' must declare 3 rotation channels");
            }
        }
    }

    void validate_channels(const BvhJoint& joint, int line) const {
        int positions = 0;
        int rotations = 0;
        for (BvhChannel c : joint.channels) {
            (bvh_channel_is_rotation(c) ? rotations : positions) += 1;
        }
        for (size_t i = 0; i < joint.channels.size(); ++i) {
            for (size_t j = i + 1; j < joint.channels.size(); ++j) {
                if (joint.channels[i] == joint.channels[j]) {
                    fail(line, "duplicate channel '" +
                                   std::string(bvh_channel_name(joint.channels[i])) +
                                   "'");
                }
            }
        }
        if (joint.parent == -1) {
            if (positions != 3 || rotations != 3) {
                fail(line, "root needs 3 position and 3 rotation channels");
            }
        } else if (positions != 0 || rotations != 3) {
            fail(line, "non-root joints take exactly 3 rotation channels");
        }
    }

    void parse_motion() {
        Token t = next();
        if (t.text != "Frames:") {
            fail(t.line, "expected 'Frames:'");
        }
        const int declared = integer();
        if (declared < 1) {
            fail(t.line, "frame count must be at least 1");
        }
        t = next();
        if (t.text != "Frame") {
            fail(t.line, "expected 'Frame Time:'");
        }
        t = next();
        if (t.text != "Time:") {
            fail(t.line, "expected 'Frame Time:'");
        }
        doc_.frame_time = number();

        const int width = doc_.total_channel_count();
        std::vector<int> scale_kind; // 1 = translation, 0 = rotation
        for (const BvhJoint& j : doc_.joints) {
            for (BvhChannel c : j.channels) {
                scale_kind.push_back(bvh_channel_is_rotation(c) ? 0 : 1);
            }
        }

        // Values come line-free from the token stream; group by width. Frame
        // rows are whitespace-separated, so tokenization already did the work.
        std::vector<double> values;
        while (pos_ < tokens_.size()) {
            values.push_back(number());
        }
        if (static_cast<int>(values.size()) != declared * width) {
            throw MismatchError(
                "motion data has " + std::to_string(values.size()) +
                " values but Frames: " + std::to_string(declared) + " x " +
                std::to_string(width) + " channels = " +
                std::to_string(declared * width) + " were declared");
        }
        doc_.frames.assign(static_cast<size_t>(declared),
                           std::vector<double>(static_cast<size_t>(width)));
        size_t k = 0;
        for (int f = 0; f < declared; ++f) {
            for (int c = 0; c < width; ++c, ++k) {
                const double raw = values[k];
                doc_.frames[static_cast<size_t>(f)][static_cast<size_t>(c)] =
                    scale_kind[static_cast<size_t>(c)] == 1
                        ? raw * opts_.translation_scale
                        : raw * kDegToRad;
            }
        }
    }

    std::vector<Token> tokens_;
    BvhOptions opts_;
    size_t pos_ = 0;
    BvhDocument doc_;
};

void write_joint(const BvhDocument& doc, int index, int depth, std::string& out) {
    const BvhJoint& joint = doc.joints[static_cast<size_t>(index)];
    const std::string indent(static_cast<size_t>(depth) * 2, ' ');
    if (joint.parent == -1) {
        out += "ROOT " + joint.name + "\n";
    } else if (joint.is_end_site) {
        out += indent + "End Site\n";
    } else {
        out += indent + "JOINT " + joint.name + "\n";
    }
    out += indent + "{\n";
    char buf[128];
    // The caller already rescaled offsets into file units.
    std::snprintf(buf, sizeof(buf), "%s  OFFSET %.6f %.6f %.6f\n", indent.c_str(),
                  joint.offset.x(), joint.offset.y(), joint.offset.z());
    out += buf;
    if (!joint.channels.empty()) {
        out += indent + "  CHANNELS " + std::to_string(joint.channels.size());
        for (BvhChannel c : joint.channels) {
            out += " ";
            out += bvh_channel_name(c);
        }
        out += "\n";
    }
    for (size_t j = static_cast<size_t>(index) + 1; j < doc.joints.size(); ++j) {
        if (doc.joints[j].parent == index) {
            write_joint(doc, static_cast<int>(j), depth + 1, out);
        }
    }
    out += indent + "}\n";
}

} // namespace

bool bvh_channel_is_rotation(BvhChannel c) {
    return c == BvhChannel::Xrotation || c == BvhChannel::Yrotation ||
           c == BvhChannel::Zrotation;
}

int bvh_channel_axis(BvhChannel c) {
    switch (c) {
    case BvhChannel::Xposition:
    case BvhChannel::Xrotation: return 0;
    case BvhChannel::Yposition:
    case BvhChannel::Yrotation: return 1;
    default: return 2;
    }
}

const char* bvh_channel_name(BvhChannel c) {
    return kChannelNames[static_cast<int>(c)];
}

int BvhDocument::total_channel_count() const {
    int n = 0;
    for (const BvhJoint& j : joints) {
        n += static_cast<int>(j.channels.size());
    }
    return n;
}

int BvhDocument::channel_offset(int joint) const {
    int n = 0;
    for (int j = 0; j < joint; ++j) {
        n += static_cast<int>(joints[static_cast<size_t>(j)].channels.size());
    }
    return n;
}

BvhDocument parse_bvh(const std::string& text, const BvhOptions& opts) {
    if (text.size() > kMaxInputBytes) {
        throw IoError("BVH input exceeds 512 MB");
    }
    if (opts.translation_scale <= 0.0) {
        throw ConfigError("BVH translation scale must be positive");
    }
    return Parser(tokenize(text), opts).run();
}

std::string write_bvh(const BvhDocument& doc, const BvhOptions& opts) {
    if (doc.joints.empty()) {
        throw ShapeError("cannot serialize a BVH document without joints");
    }
    if (opts.translation_scale <= 0.0) {
        throw ConfigError("BVH translation scale must be positive");
    }
    // Scale back into file units before formatting.
    BvhDocument scaled = doc;
    const double inv = 1.0 / opts.translation_scale;
    for (BvhJoint& j : scaled.joints) {
        j.offset *= inv;
    }
    std::string out = "HIERARCHY\n";
    write_joint(scaled, 0, 0, out);
    out += "MOTION\n";
    out += "Frames: " + std::to_string(doc.frame_count()) + "\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "Frame Time: %.6f\n", doc.frame_time);
    out += buf;

    std::vector<int> scale_kind;
    for (const BvhJoint& j : doc.joints) {
        for (BvhChannel c : j.channels) {
            scale_kind.push_back(bvh_channel_is_rotation(c) ? 0 : 1);
        }
    }
    const int width = doc.total_channel_count();
    for (const auto& row : doc.frames) {
        if (static_cast<int>(row.size()) != width) {
            throw MismatchError("frame row has " + std::to_string(row.size()) +
                                " values, expected " + std::to_string(width));
        }
        for (int c = 0; c < width; ++c) {
            const double v = scale_kind[static_cast<size_t>(c)] == 1
                                 ? row[static_cast<size_t>(c)] * inv
                                 : row[static_cast<size_t>(c)] / kDegToRad;
            std::snprintf(buf, sizeof(buf), c == 0 ? "%.6f" : " %.6f", v);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

BvhDocument load_bvh(const std::string& path, const BvhOptions& opts) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) {
        throw IoError("cannot open BVH file '" + path + "'");
    }
    const auto size = in.tellg();
    if (static_cast<size_t>(size) > kMaxInputBytes) {
        throw IoError("BVH file '" + path + "' exceeds 512 MB");
    }
    in.seekg(0);
    std::string text(static_cast<size_t>(size), '\0');
    in.read(text.data(), size);
    return parse_bvh(text, opts);
}

void save_bvh(const BvhDocument& doc, const std::string& path,
              const BvhOptions& opts) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write BVH file '" + path + "'");
    }
    out << write_bvh(doc, opts);
}

} // namespace vtm
