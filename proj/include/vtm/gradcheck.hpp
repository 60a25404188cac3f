#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vtm/nn.hpp"
#include "vtm/tensor.hpp"

namespace vtm::nn {

struct GradCheckOptions {
    double step = 1e-5; // central-difference half step
    // 0 checks every entry; otherwise a deterministic per-tensor sample of
    // this many entries (every tensor is still touched).
    int max_entries_per_tensor = 0;
    std::uint64_t seed = 0x6b69636b6f666673ull;
};

struct GradCheckEntry {
    std::string name;
    double max_rel_error = 0.0;
    int checked = 0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> per_tensor;
    double max_rel_error = 0.0;
    int checked = 0;

    bool pass(double tolerance) const { return max_rel_error < tolerance; }
    std::string to_text() const;
};

// Compares reverse-mode gradients against central finite differences
// (f(w+h) - f(w-h)) / 2h for the scalar produced by `forward`. The relative
// error is |analytic - numeric| / max(|analytic|, |numeric|, 1e-2); the floor
// keeps difference noise on near-zero gradients from dominating.
GradCheckReport gradcheck(const std::function<ad::Tensor()>& forward,
                          const NamedParams& params,
                          const GradCheckOptions& options = {});

} // namespace vtm::nn
