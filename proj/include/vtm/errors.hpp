#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace vtm {

// Base class for all pipeline errors. code() is the stable machine-readable
// prefix the CLI prints on stderr before exiting nonzero.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg)
        : std::runtime_error(msg), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define VTM_DEFINE_ERROR(NAME, CODE)                       \
    class NAME : public Error {                            \
    public:                                                \
        explicit NAME(const std::string& msg)              \
            : Error(CODE, msg) {}                          \
    };

VTM_DEFINE_ERROR(SyntaxError, "E_SYNTAX")            // malformed text input, carries a line number
VTM_DEFINE_ERROR(MismatchError, "E_MISMATCH")        // declared vs actual counts disagree
VTM_DEFINE_ERROR(TopologyMismatch, "E_TOPOLOGY")     // skeletons with different joint sets/parents
VTM_DEFINE_ERROR(ZeroBone, "E_ZERO_BONE")            // bone length below threshold where a ratio is needed
VTM_DEFINE_ERROR(DegenerateInput, "E_DEGENERATE")    // numerically unusable rotation/vector input
VTM_DEFINE_ERROR(DegenerateFrame, "E_DEGENERATE_FRAME") // rank-deficient joint set in an alignment
VTM_DEFINE_ERROR(BehindCamera, "E_BEHIND_CAMERA")    // projection of a point at or behind the image plane
VTM_DEFINE_ERROR(NonPositiveDepth, "E_DEPTH")        // back-projection with depth <= 0
VTM_DEFINE_ERROR(ShapeError, "E_SHAPE")              // tensor/sequence shape contract violated
VTM_DEFINE_ERROR(IoError, "E_IO")                    // file system / binary format trouble
VTM_DEFINE_ERROR(ConfigError, "E_CONFIG")            // bad config key/value or CLI usage
VTM_DEFINE_ERROR(CheckpointError, "E_CHECKPOINT")    // checkpoint magic/version/content problems

#undef VTM_DEFINE_ERROR

} // namespace vtm
