#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "vtm/tensor.hpp"

namespace vtm::nn {

using ad::Tensor;

// Portable deterministic uniform stream (mt19937_64 is fully specified by the
// standard; the double mapping uses the top 53 bits, no distribution objects).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 gen_;
};

// Every layer draws from its own stream keyed by (global seed, layer name),
// so adding or resizing one layer never shifts another layer's init values.
std::uint64_t seed_for(std::uint64_t global_seed, const std::string& name);

// Kaiming-uniform fan-in init: U(-sqrt(6/fan_in), sqrt(6/fan_in)).
std::vector<double> kaiming_uniform(Rng& rng, int count, int fan_in);

using NamedParams = std::vector<std::pair<std::string, Tensor*>>;

struct Conv1d {
    std::string name;
    int stride = 1;
    int padding = 0;
    Tensor w; // [Cout, Cin, K]
    Tensor b; // [Cout]

    Conv1d() = default;
    Conv1d(std::string name, int cin, int cout, int k, int stride, int padding,
           std::uint64_t global_seed);

    Tensor operator()(const Tensor& x) const {
        return ad::conv1d(x, w, b, stride, padding);
    }

    void collect(NamedParams& out);
    Conv1d aliased() const; // same storage, fresh gradient buffers
};

struct ConvT1d {
    std::string name;
    int stride = 1;
    int padding = 0;
    Tensor w; // [Cin, Cout, K]
    Tensor b; // [Cout]

    ConvT1d() = default;
    ConvT1d(std::string name, int cin, int cout, int k, int stride, int padding,
            std::uint64_t global_seed);

    Tensor operator()(const Tensor& x) const {
        return ad::conv1d_transpose(x, w, b, stride, padding);
    }

    void collect(NamedParams& out);
    ConvT1d aliased() const;
};

struct Linear {
    std::string name;
    Tensor w; // [out, in]
    Tensor b; // [out]

    Linear() = default;
    Linear(std::string name, int in, int out, std::uint64_t global_seed);

    Tensor operator()(const Tensor& x) const { return ad::affine(w, x, b); }

    void collect(NamedParams& out);
    Linear aliased() const;
};

// Single-head temporal self-attention over a [C, T] map with a causal window:
// position i attends to j with j <= i and i - j < window. Residual inside:
// y = x + Wo * attention(Wq x, Wk x, Wv x).
struct CausalAttention {
    std::string name;
    int dim = 0;
    int window = 8;
    Tensor wq, wk, wv, wo; // all [dim, dim]

    CausalAttention() = default;
    CausalAttention(std::string name, int dim, int window,
                    std::uint64_t global_seed);

    Tensor operator()(const Tensor& x) const;

    void collect(NamedParams& out);
    CausalAttention aliased() const;
};

} // namespace vtm::nn
