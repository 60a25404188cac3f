#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace vtm::ad {

using Shape = std::vector<int>;

int shape_size(const Shape& shape);

// One node of the define-by-run graph. Values live behind a shared_ptr so a
// parameter can be aliased into several graphs (e.g. one per worker thread)
// that share storage but keep independent gradient buffers.
struct Node {
    Shape shape;
    std::shared_ptr<std::vector<double>> value;
    std::vector<double> grad; // allocated lazily by backward()
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn; // pulls grad into the parents

    int size() const { return shape_size(shape); }
};

// Handle to a graph node. All arithmetic is 64-bit; every op uses fixed loop
// ordering, so forward values, gradients and training runs are bit-for-bit
// reproducible for a given seed and configuration.
class Tensor {
public:
    Tensor() = default;

    static Tensor constant(Shape shape, std::vector<double> values);
    static Tensor zeros(Shape shape);
    // A leaf that wants gradients (network parameter).
    static Tensor param(Shape shape, std::vector<double> values);
    // Fresh leaf sharing the master's value storage; gradients stay separate.
    static Tensor alias_of(const Tensor& master);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    int size() const { return node_->size(); }
    std::vector<double>& values() { return *node_->value; }
    const std::vector<double>& values() const { return *node_->value; }
    std::vector<double>& grad() { return node_->grad; }
    const std::vector<double>& grad() const { return node_->grad; }
    bool requires_grad() const { return node_->requires_grad; }

    // Value of a single-element tensor.
    double scalar() const;

    void zero_grad();

    // Reverse-mode sweep from a scalar. Gradients ACCUMULATE into leaves that
    // already carry one (so per-window contributions of a batch sum up);
    // freshly created intermediates start at zero.
    void backward(double seed = 1.0);

    std::shared_ptr<Node> node() const { return node_; }
    Node* raw() const { return node_.get(); }

    static Tensor from_node(std::shared_ptr<Node> node);

private:
    std::shared_ptr<Node> node_;
};

// --- operations ------------------------------------------------------------
// Shape conventions: feature maps are [C, T] (channel-major over time),
// matrices are [rows, cols], vectors are [n].

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);

// y[c, t] = weights[c] * x[c, t]; weights are plain constants.
Tensor scale_rows(const Tensor& x, const std::vector<double>& weights);

// Stack along the channel axis: [Ca, T] ++ [Cb, T] -> [Ca + Cb, T].
Tensor concat_rows(const Tensor& a, const Tensor& b);

// Cross-correlation: y[co, t] = b[co] + sum_{ci,k} x[ci, t*stride - padding + k]
// * w[co, ci, k], zero padding outside. T_out = floor((T + 2p - K) / stride) + 1.
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int stride,
              int padding);

// Gradient of conv1d w.r.t. its input, used as an upsampling layer.
// w is [Cin, Cout, K]; T_out = (T - 1) * stride - 2 * padding + K.
Tensor conv1d_transpose(const Tensor& x, const Tensor& w, const Tensor& b,
                        int stride, int padding);

Tensor leaky_relu(const Tensor& x, double negative_slope);
Tensor softplus(const Tensor& x);

// op(a) * op(b) where op transposes when the flag is set.
Tensor matmul(const Tensor& a, const Tensor& b, bool trans_a = false,
              bool trans_b = false);

// w [out, in] * x [in] + b [out] -> [out].
Tensor affine(const Tensor& w, const Tensor& x, const Tensor& b);

// [C, T] -> [C], mean over the time axis.
Tensor mean_over_cols(const Tensor& x);

// y[c, t] = x[c, t] - x[c, t-1]; the first zero_prefix columns are zero.
// zero_prefix 1 gives velocities, applying the op again with 2 accelerations.
Tensor time_diff(const Tensor& x, int zero_prefix);

// Row-wise softmax over kept entries; mask entries with 0 are excluded and
// produce 0. mask may be null (keep everything); size m*n, row-major.
Tensor softmax_rows(const Tensor& x, const std::vector<std::uint8_t>* mask);

Tensor mean_all(const Tensor& x);

// Mean-reduced smooth L1: 0.5 d^2 / beta for |d| < beta else |d| - beta / 2,
// d = pred - target. Gradients flow into both arguments.
Tensor smooth_l1(const Tensor& pred, const Tensor& target, double beta);

} // namespace vtm::ad
