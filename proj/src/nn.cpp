#include "vtm/nn.hpp"

#include <cmath>

namespace vtm::nn {

std::uint64_t seed_for(std::uint64_t global_seed, const std::string& name) {
    // FNV-1a over the name, then mixed with the global seed via splitmix64.
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::uint64_t z = h + 0x9e3779b97f4a7c15ull * (global_seed + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::vector<double> kaiming_uniform(Rng& rng, int count, int fan_in) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::vector<double> out(static_cast<size_t>(count));
    for (double& v : out) {
        v = rng.uniform(-bound, bound);
    }
    return out;
}

Conv1d::Conv1d(std::string name_, int cin, int cout, int k, int stride_,
               int padding_, std::uint64_t global_seed)
    : name(std::move(name_)), stride(stride_), padding(padding_) {
    Rng rng(seed_for(global_seed, name));
    w = Tensor::param({cout, cin, k}, kaiming_uniform(rng, cout * cin * k, cin * k));
    b = Tensor::param({cout}, std::vector<double>(static_cast<size_t>(cout), 0.0));
}

void Conv1d::collect(NamedParams& out) {
    out.emplace_back(name + ".w", &w);
    out.emplace_back(name + ".b", &b);
}

Conv1d Conv1d::aliased() const {
    Conv1d c = *this;
    c.w = Tensor::alias_of(w);
    c.b = Tensor::alias_of(b);
    return c;
}

ConvT1d::ConvT1d(std::string name_, int cin, int cout, int k, int stride_,
                 int padding_, std::uint64_t global_seed)
    : name(std::move(name_)), stride(stride_), padding(padding_) {
    Rng rng(seed_for(global_seed, name));
    w = Tensor::param({cin, cout, k}, kaiming_uniform(rng, cin * cout * k, cin * k));
    b = Tensor::param({cout}, std::vector<double>(static_cast<size_t>(cout), 0.0));
}

void ConvT1d::collect(NamedParams& out) {
    out.emplace_back(name + ".w", &w);
    out.emplace_back(name + ".b", &b);
}

ConvT1d ConvT1d::aliased() const {
    ConvT1d c = *this;
    c.w = Tensor::alias_of(w);
    c.b = Tensor::alias_of(b);
    return c;
}

Linear::Linear(std::string name_, int in, int out, std::uint64_t global_seed)
    : name(std::move(name_)) {
    Rng rng(seed_for(global_seed, name));
    w = Tensor::param({out, in}, kaiming_uniform(rng, out * in, in));
    b = Tensor::param({out}, std::vector<double>(static_cast<size_t>(out), 0.0));
}

void Linear::collect(NamedParams& out) {
    out.emplace_back(name + ".w", &w);
    out.emplace_back(name + ".b", &b);
}

Linear Linear::aliased() const {
    Linear l = *this;
    l.w = Tensor::alias_of(w);
    l.b = Tensor::alias_of(b);
    return l;
}

CausalAttention::CausalAttention(std::string name_, int dim_, int window_,
                                 std::uint64_t global_seed)
    : name(std::move(name_)), dim(dim_), window(window_) {
    Rng rng(seed_for(global_seed, name));
    wq = Tensor::param({dim, dim}, kaiming_uniform(rng, dim * dim, dim));
    wk = Tensor::param({dim, dim}, kaiming_uniform(rng, dim * dim, dim));
    wv = Tensor::param({dim, dim}, kaiming_uniform(rng, dim * dim, dim));
    wo = Tensor::param({dim, dim}, kaiming_uniform(rng, dim * dim, dim));
}

Tensor CausalAttention::operator()(const Tensor& x) const {
    const int t = x.shape()[1];
    const Tensor q = ad::matmul(wq, x); // [C, T]
    const Tensor k = ad::matmul(wk, x);
    const Tensor v = ad::matmul(wv, x);
    // scores[i, j] = <q_:, i , k_:, j> / sqrt(dim)
    const Tensor scores =
        ad::scale(ad::matmul(q, k, /*trans_a=*/true), 1.0 / std::sqrt(dim));
    std::vector<std::uint8_t> mask(static_cast<size_t>(t) * t, 0);
    for (int i = 0; i < t; ++i) {
        for (int j = 0; j <= i; ++j) {
            if (i - j < window) {
                mask[static_cast<size_t>(i) * t + j] = 1;
            }
        }
    }
    const Tensor attn = ad::softmax_rows(scores, &mask);
    // ctx[c, i] = sum_j v[c, j] * attn[i, j]
    const Tensor ctx = ad::matmul(v, attn, false, /*trans_b=*/true);
    return ad::add(x, ad::matmul(wo, ctx));
}

void CausalAttention::collect(NamedParams& out) {
    out.emplace_back(name + ".wq", &wq);
    out.emplace_back(name + ".wk", &wk);
    out.emplace_back(name + ".wv", &wv);
    out.emplace_back(name + ".wo", &wo);
}

CausalAttention CausalAttention::aliased() const {
    CausalAttention a = *this;
    a.wq = Tensor::alias_of(wq);
    a.wk = Tensor::alias_of(wk);
    a.wv = Tensor::alias_of(wv);
    a.wo = Tensor::alias_of(wo);
    return a;
}

} // namespace vtm::nn
