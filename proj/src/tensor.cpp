#include "vtm/tensor.hpp"

#include <cmath>
#include <string>
#include <unordered_set>

#include "vtm/errors.hpp"

namespace vtm::ad {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) {
        throw ShapeError(msg);
    }
}

std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
        out += (i ? "," : "") + std::to_string(s[i]);
    }
    return out + "]";
}

// Result node of an op. Parents and the backward closure are only retained
// when some parent wants gradients; pure-constant subgraphs stay plain data.
Tensor make_result(Shape shape, std::vector<double> value,
                   std::vector<std::shared_ptr<Node>> parents,
                   std::function<void(Node&)> backward_fn) {
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->value = std::make_shared<std::vector<double>>(std::move(value));
    for (const auto& p : parents) {
        if (p->requires_grad) {
            node->requires_grad = true;
            break;
        }
    }
    if (node->requires_grad) {
        node->parents = std::move(parents);
        node->backward_fn = std::move(backward_fn);
    }
    return Tensor::from_node(std::move(node));
}

// Gradient buffer of a parent, allocated on first touch.
std::vector<double>& grad_of(const std::shared_ptr<Node>& n) {
    if (n->grad.size() != static_cast<size_t>(n->size())) {
        n->grad.assign(static_cast<size_t>(n->size()), 0.0);
    }
    return n->grad;
}

} // namespace

int shape_size(const Shape& shape) {
    int n = 1;
    for (int d : shape) {
        n *= d;
    }
    return n;
}

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
    require(static_cast<size_t>(shape_size(shape)) == values.size(),
            "constant: value count does not match shape");
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->value = std::make_shared<std::vector<double>>(std::move(values));
    return from_node(std::move(node));
}

Tensor Tensor::zeros(Shape shape) {
    std::vector<double> v(static_cast<size_t>(shape_size(shape)), 0.0);
    return constant(std::move(shape), std::move(v));
}

Tensor Tensor::param(Shape shape, std::vector<double> values) {
    Tensor t = constant(std::move(shape), std::move(values));
    t.node_->requires_grad = true;
    return t;
}

Tensor Tensor::alias_of(const Tensor& master) {
    auto node = std::make_shared<Node>();
    node->shape = master.node_->shape;
    node->value = master.node_->value;
    node->requires_grad = master.node_->requires_grad;
    return from_node(std::move(node));
}

Tensor Tensor::from_node(std::shared_ptr<Node> node) {
    Tensor t;
    t.node_ = std::move(node);
    return t;
}

double Tensor::scalar() const {
    require(size() == 1, "scalar() needs a single-element tensor");
    return (*node_->value)[0];
}

void Tensor::zero_grad() {
    node_->grad.assign(static_cast<size_t>(size()), 0.0);
}

void Tensor::backward(double seed) {
    require(size() == 1, "backward() starts from a scalar");
    Node* root = node_.get();
    if (!root->requires_grad) {
        return;
    }
    // Iterative post-order over the requires_grad subgraph: every node is
    // emitted after all of its parents, so the reversed order consumes each
    // node's gradient before pushing it upstream.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, size_t>> stack;
    stack.emplace_back(root, 0);
    seen.insert(root);
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (next < n->parents.size()) {
            Node* p = n->parents[next++].get();
            if (p->requires_grad && !seen.count(p)) {
                seen.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }
    for (Node* n : order) {
        if (n->grad.size() != static_cast<size_t>(n->size())) {
            n->grad.assign(static_cast<size_t>(n->size()), 0.0);
        }
    }
    root->grad[0] += seed;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if ((*it)->backward_fn) {
            (*it)->backward_fn(**it);
        }
    }
}

// --- elementwise -------------------------------------------------------------

namespace {

Tensor elementwise_pair(const Tensor& a, const Tensor& b, double sign_b) {
    require(a.shape() == b.shape(), "elementwise op: shapes " +
                                        shape_str(a.shape()) + " vs " +
                                        shape_str(b.shape()));
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(av.size());
    for (size_t i = 0; i < av.size(); ++i) {
        out[i] = av[i] + sign_b * bv[i];
    }
    return make_result(a.shape(), std::move(out), {a.node(), b.node()},
                       [sign_b](Node& n) {
                           const auto& g = n.grad;
                           if (n.parents[0]->requires_grad) {
                               auto& ga = grad_of(n.parents[0]);
                               for (size_t i = 0; i < g.size(); ++i) {
                                   ga[i] += g[i];
                               }
                           }
                           if (n.parents[1]->requires_grad) {
                               auto& gb = grad_of(n.parents[1]);
                               for (size_t i = 0; i < g.size(); ++i) {
                                   gb[i] += sign_b * g[i];
                               }
                           }
                       });
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) { return elementwise_pair(a, b, 1.0); }
Tensor sub(const Tensor& a, const Tensor& b) { return elementwise_pair(a, b, -1.0); }

Tensor mul(const Tensor& a, const Tensor& b) {
    require(a.shape() == b.shape(), "mul: shapes differ");
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(av.size());
    for (size_t i = 0; i < av.size(); ++i) {
        out[i] = av[i] * bv[i];
    }
    return make_result(a.shape(), std::move(out), {a.node(), b.node()},
                       [](Node& n) {
                           const auto& g = n.grad;
                           const auto& av = *n.parents[0]->value;
                           const auto& bv = *n.parents[1]->value;
                           if (n.parents[0]->requires_grad) {
                               auto& ga = grad_of(n.parents[0]);
                               for (size_t i = 0; i < g.size(); ++i) {
                                   ga[i] += g[i] * bv[i];
                               }
                           }
                           if (n.parents[1]->requires_grad) {
                               auto& gb = grad_of(n.parents[1]);
                               for (size_t i = 0; i < g.size(); ++i) {
                                   gb[i] += g[i] * av[i];
                               }
                           }
                       });
}

Tensor scale(const Tensor& x, double factor) {
    const auto& xv = x.values();
    std::vector<double> out(xv.size());
    for (size_t i = 0; i < xv.size(); ++i) {
        out[i] = factor * xv[i];
    }
    return make_result(x.shape(), std::move(out), {x.node()}, [factor](Node& n) {
        if (!n.parents[0]->requires_grad) {
            return;
        }
        auto& gx = grad_of(n.parents[0]);
        for (size_t i = 0; i < n.grad.size(); ++i) {
            gx[i] += factor * n.grad[i];
        }
    });
}

Tensor scale_rows(const Tensor& x, const std::vector<double>& weights) {
    require(x.shape().size() == 2, "scale_rows: expects [C, T]");
    const int c = x.shape()[0];
    const int t = x.shape()[1];
    require(static_cast<int>(weights.size()) == c,
            "scale_rows: weight count does not match channel count");
    const auto& xv = x.values();
    std::vector<double> out(xv.size());
    for (int i = 0; i < c; ++i) {
        const double w = weights[static_cast<size_t>(i)];
        for (int j = 0; j < t; ++j) {
            out[static_cast<size_t>(i * t + j)] = w * xv[static_cast<size_t>(i * t + j)];
        }
    }
    return make_result(x.shape(), std::move(out), {x.node()},
                       [weights, c, t](Node& n) {
                           if (!n.parents[0]->requires_grad) {
                               return;
                           }
                           auto& gx = grad_of(n.parents[0]);
                           for (int i = 0; i < c; ++i) {
                               const double w = weights[static_cast<size_t>(i)];
                               for (int j = 0; j < t; ++j) {
                                   gx[static_cast<size_t>(i * t + j)] +=
                                       w * n.grad[static_cast<size_t>(i * t + j)];
                               }
                           }
                       });
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
    require(a.shape().size() == 2 && b.shape().size() == 2,
            "concat_rows: expects [C, T] inputs");
    require(a.shape()[1] == b.shape()[1],
            "concat_rows: time lengths differ (" + shape_str(a.shape()) +
                " vs " + shape_str(b.shape()) + ")");
    const int ca = a.shape()[0];
    const int cb = b.shape()[0];
    const int t = a.shape()[1];
    std::vector<double> out;
    out.reserve(static_cast<size_t>((ca + cb) * t));
    out.insert(out.end(), a.values().begin(), a.values().end());
    out.insert(out.end(), b.values().begin(), b.values().end());
    return make_result({ca + cb, t}, std::move(out), {a.node(), b.node()},
                       [ca, cb, t](Node& n) {
                           const size_t na = static_cast<size_t>(ca * t);
                           if (n.parents[0]->requires_grad) {
                               auto& ga = grad_of(n.parents[0]);
                               for (size_t i = 0; i < na; ++i) {
                                   ga[i] += n.grad[i];
                               }
                           }
                           if (n.parents[1]->requires_grad) {
                               auto& gb = grad_of(n.parents[1]);
                               for (size_t i = 0; i < static_cast<size_t>(cb * t); ++i) {
                                   gb[i] += n.grad[na + i];
                               }
                           }
                       });
}

// --- convolutions ------------------------------------------------------------

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int stride,
              int padding) {
    require(x.shape().size() == 2, "conv1d: input must be [Cin, T]");
    require(w.shape().size() == 3, "conv1d: weight must be [Cout, Cin, K]");
    const int cin = x.shape()[0];
    const int t = x.shape()[1];
    const int cout = w.shape()[0];
    const int k = w.shape()[2];
    require(w.shape()[1] == cin, "conv1d: weight Cin " + std::to_string(w.shape()[1]) +
                                     " does not match input " + std::to_string(cin));
    require(b.shape() == Shape{cout}, "conv1d: bias must be [Cout]");
    require(stride >= 1 && padding >= 0, "conv1d: stride >= 1, padding >= 0");
    require(t + 2 * padding >= k, "conv1d: kernel larger than padded input");
    const int tout = (t + 2 * padding - k) / stride + 1;

    const double* xv = x.values().data();
    const double* wv = w.values().data();
    const double* bv = b.values().data();
    std::vector<double> out(static_cast<size_t>(cout * tout));
    for (int co = 0; co < cout; ++co) {
        double* orow = out.data() + static_cast<size_t>(co) * tout;
        for (int j = 0; j < tout; ++j) {
            orow[j] = bv[co];
        }
        for (int ci = 0; ci < cin; ++ci) {
            const double* xrow = xv + static_cast<size_t>(ci) * t;
            const double* wrow = wv + (static_cast<size_t>(co) * cin + ci) * k;
            for (int kk = 0; kk < k; ++kk) {
                const double wv_k = wrow[kk];
                if (wv_k == 0.0) {
                    continue;
                }
                // valid output range so that 0 <= j*stride - padding + kk < t
                const int lo_num = padding - kk;
                int jlo = lo_num <= 0 ? 0 : (lo_num + stride - 1) / stride;
                int jhi = (t - 1 + padding - kk) / stride;
                if (jhi > tout - 1) {
                    jhi = tout - 1;
                }
                const double* xs = xrow - padding + kk;
                for (int j = jlo; j <= jhi; ++j) {
                    orow[j] += wv_k * xs[j * stride];
                }
            }
        }
    }
    return make_result(
        {cout, tout}, std::move(out), {x.node(), w.node(), b.node()},
        [cin, t, cout, k, tout, stride, padding](Node& n) {
            const double* g = n.grad.data();
            const double* xv = n.parents[0]->value->data();
            const double* wv = n.parents[1]->value->data();
            const bool need_x = n.parents[0]->requires_grad;
            const bool need_w = n.parents[1]->requires_grad;
            const bool need_b = n.parents[2]->requires_grad;
            double* gx = need_x ? grad_of(n.parents[0]).data() : nullptr;
            double* gw = need_w ? grad_of(n.parents[1]).data() : nullptr;
            double* gb = need_b ? grad_of(n.parents[2]).data() : nullptr;
            for (int co = 0; co < cout; ++co) {
                const double* grow = g + static_cast<size_t>(co) * tout;
                if (need_b) {
                    double s = 0.0;
                    for (int j = 0; j < tout; ++j) {
                        s += grow[j];
                    }
                    gb[co] += s;
                }
                for (int ci = 0; ci < cin; ++ci) {
                    const double* xrow = xv + static_cast<size_t>(ci) * t;
                    const double* wrow = wv + (static_cast<size_t>(co) * cin + ci) * k;
                    double* gxrow = need_x ? gx + static_cast<size_t>(ci) * t : nullptr;
                    double* gwrow =
                        need_w ? gw + (static_cast<size_t>(co) * cin + ci) * k : nullptr;
                    for (int kk = 0; kk < k; ++kk) {
                        const int lo_num = padding - kk;
                        int jlo = lo_num <= 0 ? 0 : (lo_num + stride - 1) / stride;
                        int jhi = (t - 1 + padding - kk) / stride;
                        if (jhi > tout - 1) {
                            jhi = tout - 1;
                        }
                        const int base = -padding + kk;
                        if (need_w) {
                            double acc = 0.0;
                            for (int j = jlo; j <= jhi; ++j) {
                                acc += grow[j] * xrow[base + j * stride];
                            }
                            gwrow[kk] += acc;
                        }
                        if (need_x) {
                            const double wv_k = wrow[kk];
                            for (int j = jlo; j <= jhi; ++j) {
                                gxrow[base + j * stride] += wv_k * grow[j];
                            }
                        }
                    }
                }
            }
        });
}

Tensor conv1d_transpose(const Tensor& x, const Tensor& w, const Tensor& b,
                        int stride, int padding) {
    require(x.shape().size() == 2, "conv1d_transpose: input must be [Cin, T]");
    require(w.shape().size() == 3, "conv1d_transpose: weight must be [Cin, Cout, K]");
    const int cin = x.shape()[0];
    const int t = x.shape()[1];
    const int cout = w.shape()[1];
    const int k = w.shape()[2];
    require(w.shape()[0] == cin, "conv1d_transpose: weight Cin does not match input");
    require(b.shape() == Shape{cout}, "conv1d_transpose: bias must be [Cout]");
    require(stride >= 1 && padding >= 0, "conv1d_transpose: stride >= 1, padding >= 0");
    const int tout = (t - 1) * stride - 2 * padding + k;
    require(tout >= 1, "conv1d_transpose: output would be empty");

    const double* xv = x.values().data();
    const double* wv = w.values().data();
    const double* bv = b.values().data();
    std::vector<double> out(static_cast<size_t>(cout * tout));
    for (int co = 0; co < cout; ++co) {
        double* orow = out.data() + static_cast<size_t>(co) * tout;
        for (int j = 0; j < tout; ++j) {
            orow[j] = bv[co];
        }
        for (int ci = 0; ci < cin; ++ci) {
            const double* xrow = xv + static_cast<size_t>(ci) * t;
            const double* wrow = wv + (static_cast<size_t>(ci) * cout + co) * k;
            for (int kk = 0; kk < k; ++kk) {
                const double wv_k = wrow[kk];
                if (wv_k == 0.0) {
                    continue;
                }
                for (int j = 0; j < t; ++j) {
                    const int o = j * stride - padding + kk;
                    if (o >= 0 && o < tout) {
                        orow[o] += wv_k * xrow[j];
                    }
                }
            }
        }
    }
    return make_result(
        {cout, tout}, std::move(out), {x.node(), w.node(), b.node()},
        [cin, t, cout, k, tout, stride, padding](Node& n) {
            const double* g = n.grad.data();
            const double* xv = n.parents[0]->value->data();
            const double* wv = n.parents[1]->value->data();
            const bool need_x = n.parents[0]->requires_grad;
            const bool need_w = n.parents[1]->requires_grad;
            const bool need_b = n.parents[2]->requires_grad;
            double* gx = need_x ? grad_of(n.parents[0]).data() : nullptr;
            double* gw = need_w ? grad_of(n.parents[1]).data() : nullptr;
            double* gb = need_b ? grad_of(n.parents[2]).data() : nullptr;
            if (need_b) {
                for (int co = 0; co < cout; ++co) {
                    const double* grow = g + static_cast<size_t>(co) * tout;
                    double s = 0.0;
                    for (int j = 0; j < tout; ++j) {
                        s += grow[j];
                    }
                    gb[co] += s;
                }
            }
            for (int ci = 0; ci < cin; ++ci) {
                const double* xrow = xv + static_cast<size_t>(ci) * t;
                double* gxrow = need_x ? gx + static_cast<size_t>(ci) * t : nullptr;
                for (int co = 0; co < cout; ++co) {
                    const double* grow = g + static_cast<size_t>(co) * tout;
                    const double* wrow = wv + (static_cast<size_t>(ci) * cout + co) * k;
                    double* gwrow =
                        need_w ? gw + (static_cast<size_t>(ci) * cout + co) * k : nullptr;
                    for (int kk = 0; kk < k; ++kk) {
                        const double wv_k = wrow[kk];
                        double wacc = 0.0;
                        for (int j = 0; j < t; ++j) {
                            const int o = j * stride - padding + kk;
                            if (o < 0 || o >= tout) {
                                continue;
                            }
                            if (need_w) {
                                wacc += xrow[j] * grow[o];
                            }
                            if (need_x) {
                                gxrow[j] += wv_k * grow[o];
                            }
                        }
                        if (need_w) {
                            gwrow[kk] += wacc;
                        }
                    }
                }
            }
        });
}

// --- activations --------------------------------------------------------------

Tensor leaky_relu(const Tensor& x, double negative_slope) {
    const auto& xv = x.values();
    std::vector<double> out(xv.size());
    for (size_t i = 0; i < xv.size(); ++i) {
        out[i] = xv[i] >= 0.0 ? xv[i] : negative_slope * xv[i];
    }
    return make_result(x.shape(), std::move(out), {x.node()},
                       [negative_slope](Node& n) {
                           if (!n.parents[0]->requires_grad) {
                               return;
                           }
                           const auto& xv = *n.parents[0]->value;
                           auto& gx = grad_of(n.parents[0]);
                           for (size_t i = 0; i < n.grad.size(); ++i) {
                               gx[i] += (xv[i] >= 0.0 ? 1.0 : negative_slope) * n.grad[i];
                           }
                       });
}

Tensor softplus(const Tensor& x) {
    const auto& xv = x.values();
    std::vector<double> out(xv.size());
    for (size_t i = 0; i < xv.size(); ++i) {
        // log(1 + e^x), overflow-safe: x + log1p(e^-x) for large x.
        const double v = xv[i];
        out[i] = v > 30.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
    }
    return make_result(x.shape(), std::move(out), {x.node()}, [](Node& n) {
        if (!n.parents[0]->requires_grad) {
            return;
        }
        const auto& xv = *n.parents[0]->value;
        auto& gx = grad_of(n.parents[0]);
        for (size_t i = 0; i < n.grad.size(); ++i) {
            gx[i] += n.grad[i] / (1.0 + std::exp(-xv[i]));
        }
    });
}

// --- linear algebra -----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b, bool trans_a, bool trans_b) {
    require(a.shape().size() == 2 && b.shape().size() == 2,
            "matmul: expects 2-d tensors");
    const int m = trans_a ? a.shape()[1] : a.shape()[0];
    const int ka = trans_a ? a.shape()[0] : a.shape()[1];
    const int kb = trans_b ? b.shape()[1] : b.shape()[0];
    const int p = trans_b ? b.shape()[0] : b.shape()[1];
    require(ka == kb, "matmul: inner dimensions " + std::to_string(ka) + " vs " +
                          std::to_string(kb));
    const int lda = a.shape()[1];
    const int ldb = b.shape()[1];
    auto a_at = [&](const double* v, int i, int j) {
        return trans_a ? v[static_cast<size_t>(j) * lda + i]
                       : v[static_cast<size_t>(i) * lda + j];
    };
    auto b_at = [&](const double* v, int i, int j) {
        return trans_b ? v[static_cast<size_t>(j) * ldb + i]
                       : v[static_cast<size_t>(i) * ldb + j];
    };
    const double* av = a.values().data();
    const double* bv = b.values().data();
    std::vector<double> out(static_cast<size_t>(m * p), 0.0);
    for (int i = 0; i < m; ++i) {
        for (int kk = 0; kk < ka; ++kk) {
            const double aik = a_at(av, i, kk);
            if (aik == 0.0) {
                continue;
            }
            for (int j = 0; j < p; ++j) {
                out[static_cast<size_t>(i) * p + j] += aik * b_at(bv, kk, j);
            }
        }
    }
    return make_result(
        {m, p}, std::move(out), {a.node(), b.node()},
        [m, ka, p, lda, ldb, trans_a, trans_b](Node& n) {
            const double* g = n.grad.data();
            const double* av = n.parents[0]->value->data();
            const double* bv = n.parents[1]->value->data();
            auto a_idx = [&](int i, int j) {
                return trans_a ? static_cast<size_t>(j) * lda + i
                               : static_cast<size_t>(i) * lda + j;
            };
            auto b_idx = [&](int i, int j) {
                return trans_b ? static_cast<size_t>(j) * ldb + i
                               : static_cast<size_t>(i) * ldb + j;
            };
            if (n.parents[0]->requires_grad) {
                auto& ga = grad_of(n.parents[0]);
                // dL/dA[i,k] = sum_j g[i,j] * B[k,j]
                for (int i = 0; i < m; ++i) {
                    for (int kk = 0; kk < ka; ++kk) {
                        double acc = 0.0;
                        for (int j = 0; j < p; ++j) {
                            acc += g[static_cast<size_t>(i) * p + j] * bv[b_idx(kk, j)];
                        }
                        ga[a_idx(i, kk)] += acc;
                    }
                }
            }
            if (n.parents[1]->requires_grad) {
                auto& gb = grad_of(n.parents[1]);
                // dL/dB[k,j] = sum_i A[i,k] * g[i,j]
                for (int kk = 0; kk < ka; ++kk) {
                    for (int j = 0; j < p; ++j) {
                        double acc = 0.0;
                        for (int i = 0; i < m; ++i) {
                            acc += av[a_idx(i, kk)] * g[static_cast<size_t>(i) * p + j];
                        }
                        gb[b_idx(kk, j)] += acc;
                    }
                }
            }
        });
}

Tensor affine(const Tensor& w, const Tensor& x, const Tensor& b) {
    require(w.shape().size() == 2 && x.shape().size() == 1 &&
                b.shape().size() == 1,
            "affine: expects w [out, in], x [in], b [out]");
    const int out_dim = w.shape()[0];
    const int in_dim = w.shape()[1];
    require(x.shape()[0] == in_dim && b.shape()[0] == out_dim,
            "affine: dimension mismatch");
    const double* wv = w.values().data();
    const double* xv = x.values().data();
    const double* bv = b.values().data();
    std::vector<double> out(static_cast<size_t>(out_dim));
    for (int i = 0; i < out_dim; ++i) {
        double acc = bv[i];
        const double* wrow = wv + static_cast<size_t>(i) * in_dim;
        for (int j = 0; j < in_dim; ++j) {
            acc += wrow[j] * xv[j];
        }
        out[static_cast<size_t>(i)] = acc;
    }
    return make_result({out_dim}, std::move(out), {w.node(), x.node(), b.node()},
                       [out_dim, in_dim](Node& n) {
                           const double* g = n.grad.data();
                           const double* wv = n.parents[0]->value->data();
                           const double* xv = n.parents[1]->value->data();
                           if (n.parents[0]->requires_grad) {
                               auto& gw = grad_of(n.parents[0]);
                               for (int i = 0; i < out_dim; ++i) {
                                   for (int j = 0; j < in_dim; ++j) {
                                       gw[static_cast<size_t>(i) * in_dim + j] +=
                                           g[i] * xv[j];
                                   }
                               }
                           }
                           if (n.parents[1]->requires_grad) {
                               auto& gx = grad_of(n.parents[1]);
                               for (int j = 0; j < in_dim; ++j) {
                                   double acc = 0.0;
                                   for (int i = 0; i < out_dim; ++i) {
                                       acc += wv[static_cast<size_t>(i) * in_dim + j] * g[i];
                                   }
                                   gx[j] += acc;
                               }
                           }
                           if (n.parents[2]->requires_grad) {
                               auto& gb = grad_of(n.parents[2]);
                               for (int i = 0; i < out_dim; ++i) {
                                   gb[i] += g[i];
                               }
                           }
                       });
}

// --- reductions & shape ops ----------------------------------------------------

Tensor mean_over_cols(const Tensor& x) {
    require(x.shape().size() == 2, "mean_over_cols: expects [C, T]");
    const int c = x.shape()[0];
    const int t = x.shape()[1];
    const auto& xv = x.values();
    std::vector<double> out(static_cast<size_t>(c), 0.0);
    for (int i = 0; i < c; ++i) {
        double acc = 0.0;
        for (int j = 0; j < t; ++j) {
            acc += xv[static_cast<size_t>(i) * t + j];
        }
        out[static_cast<size_t>(i)] = acc / t;
    }
    return make_result({c}, std::move(out), {x.node()}, [c, t](Node& n) {
        if (!n.parents[0]->requires_grad) {
            return;
        }
        auto& gx = grad_of(n.parents[0]);
        for (int i = 0; i < c; ++i) {
            const double gi = n.grad[static_cast<size_t>(i)] / t;
            for (int j = 0; j < t; ++j) {
                gx[static_cast<size_t>(i) * t + j] += gi;
            }
        }
    });
}

Tensor time_diff(const Tensor& x, int zero_prefix) {
    require(x.shape().size() == 2, "time_diff: expects [C, T]");
    require(zero_prefix >= 1, "time_diff: zero_prefix must be >= 1");
    const int c = x.shape()[0];
    const int t = x.shape()[1];
    const auto& xv = x.values();
    std::vector<double> out(xv.size(), 0.0);
    for (int i = 0; i < c; ++i) {
        const double* row = xv.data() + static_cast<size_t>(i) * t;
        double* orow = out.data() + static_cast<size_t>(i) * t;
        for (int j = zero_prefix; j < t; ++j) {
            orow[j] = row[j] - row[j - 1];
        }
    }
    return make_result(x.shape(), std::move(out), {x.node()},
                       [c, t, zero_prefix](Node& n) {
                           if (!n.parents[0]->requires_grad) {
                               return;
                           }
                           auto& gx = grad_of(n.parents[0]);
                           for (int i = 0; i < c; ++i) {
                               const double* grow =
                                   n.grad.data() + static_cast<size_t>(i) * t;
                               double* gxrow = gx.data() + static_cast<size_t>(i) * t;
                               for (int j = zero_prefix; j < t; ++j) {
                                   gxrow[j] += grow[j];
                                   gxrow[j - 1] -= grow[j];
                               }
                           }
                       });
}

Tensor softmax_rows(const Tensor& x, const std::vector<std::uint8_t>* mask) {
    require(x.shape().size() == 2, "softmax_rows: expects [m, n]");
    const int m = x.shape()[0];
    const int n = x.shape()[1];
    std::vector<std::uint8_t> keep;
    if (mask) {
        require(mask->size() == static_cast<size_t>(m * n),
                "softmax_rows: mask size does not match");
        keep = *mask;
    } else {
        keep.assign(static_cast<size_t>(m * n), 1);
    }
    const auto& xv = x.values();
    std::vector<double> out(xv.size(), 0.0);
    for (int i = 0; i < m; ++i) {
        const double* row = xv.data() + static_cast<size_t>(i) * n;
        const std::uint8_t* krow = keep.data() + static_cast<size_t>(i) * n;
        double* orow = out.data() + static_cast<size_t>(i) * n;
        double mx = 0.0;
        bool any = false;
        for (int j = 0; j < n; ++j) {
            if (krow[j] && (!any || row[j] > mx)) {
                mx = row[j];
                any = true;
            }
        }
        require(any, "softmax_rows: row " + std::to_string(i) + " is fully masked");
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            if (krow[j]) {
                orow[j] = std::exp(row[j] - mx);
                sum += orow[j];
            }
        }
        for (int j = 0; j < n; ++j) {
            if (krow[j]) {
                orow[j] /= sum;
            }
        }
    }
    return make_result(x.shape(), std::move(out), {x.node()},
                       [m, n, keep = std::move(keep)](Node& n_) {
                           if (!n_.parents[0]->requires_grad) {
                               return;
                           }
                           const auto& y = *n_.value;
                           auto& gx = grad_of(n_.parents[0]);
                           for (int i = 0; i < m; ++i) {
                               const double* yrow = y.data() + static_cast<size_t>(i) * n;
                               const double* grow =
                                   n_.grad.data() + static_cast<size_t>(i) * n;
                               const std::uint8_t* krow =
                                   keep.data() + static_cast<size_t>(i) * n;
                               double dot = 0.0;
                               for (int j = 0; j < n; ++j) {
                                   if (krow[j]) {
                                       dot += grow[j] * yrow[j];
                                   }
                               }
                               double* gxrow = gx.data() + static_cast<size_t>(i) * n;
                               for (int j = 0; j < n; ++j) {
                                   if (krow[j]) {
                                       gxrow[j] += yrow[j] * (grow[j] - dot);
                                   }
                               }
                           }
                       });
}

Tensor mean_all(const Tensor& x) {
    const auto& xv = x.values();
    require(!xv.empty(), "mean_all: empty tensor");
    double acc = 0.0;
    for (double v : xv) {
        acc += v;
    }
    const int n = static_cast<int>(xv.size());
    return make_result({1}, {acc / n}, {x.node()}, [n](Node& node) {
        if (!node.parents[0]->requires_grad) {
            return;
        }
        auto& gx = grad_of(node.parents[0]);
        const double g = node.grad[0] / n;
        for (double& v : gx) {
            v += g;
        }
    });
}

Tensor smooth_l1(const Tensor& pred, const Tensor& target, double beta) {
    require(pred.shape() == target.shape(), "smooth_l1: shapes differ");
    if (beta <= 0.0) {
        throw ConfigError("smooth_l1: beta must be positive");
    }
    const auto& pv = pred.values();
    const auto& tv = target.values();
    require(!pv.empty(), "smooth_l1: empty input");
    double acc = 0.0;
    for (size_t i = 0; i < pv.size(); ++i) {
        const double d = pv[i] - tv[i];
        const double a = std::abs(d);
        acc += a < beta ? 0.5 * d * d / beta : a - 0.5 * beta;
    }
    const int n = static_cast<int>(pv.size());
    return make_result(
        {1}, {acc / n}, {pred.node(), target.node()}, [beta, n](Node& node) {
            const double g = node.grad[0] / n;
            const auto& pv = *node.parents[0]->value;
            const auto& tv = *node.parents[1]->value;
            const bool need_p = node.parents[0]->requires_grad;
            const bool need_t = node.parents[1]->requires_grad;
            double* gp = need_p ? grad_of(node.parents[0]).data() : nullptr;
            double* gt = need_t ? grad_of(node.parents[1]).data() : nullptr;
            for (size_t i = 0; i < pv.size(); ++i) {
                const double d = pv[i] - tv[i];
                const double dd =
                    std::abs(d) < beta ? d / beta : (d > 0.0 ? 1.0 : -1.0);
                if (need_p) {
                    gp[i] += g * dd;
                }
                if (need_t) {
                    gt[i] -= g * dd;
                }
            }
        });
}

} // namespace vtm::ad
