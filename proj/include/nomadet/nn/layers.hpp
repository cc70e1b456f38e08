#pragma once

// Layer kernels (stateless forward/backward functions) and the small stateful
// modules built on top of them. Every backward is the exact analytic
// gradient of its forward. Instantiated for float and double.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nomadet/nn/tensor.hpp"

namespace nomadet::nn {

enum class Padding { Same, Valid };
enum class Mode { Train, Infer };

int padding_amount(int kernel, Padding pad);
int conv_output_size(int in, int kernel, int stride, Padding pad);

// -- kernels ------------------------------------------------------------------

/// x: N x Cin x H x W, w: Cout x Cin x K x K, b: Cout. Cross-correlation.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride, Padding pad);

template <typename T>
struct ConvGrads {
    Tensor<T> x, w, b;
};

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& grad_out, const Tensor<T>& x, const Tensor<T>& w, int stride,
                             Padding pad);

template <typename T>
struct BatchNormState {
    Tensor<T> running_mean;
    Tensor<T> running_var;
};

template <typename T>
struct BatchNormCache {
    Tensor<T> xhat;
    std::vector<T> inv_std;
    Mode mode = Mode::Train;
};

/// Per-channel normalization over (N, H, W); accepts N x C or N x C x H x W.
/// Training mode uses batch statistics and updates `state` as
/// running = momentum * running + (1 - momentum) * batch (unbiased variance).
template <typename T>
Tensor<T> batchnorm_forward(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                            BatchNormState<T>& state, T eps, T momentum, Mode mode, BatchNormCache<T>* cache);

template <typename T>
struct BatchNormGrads {
    Tensor<T> x, gamma, beta;
};

template <typename T>
BatchNormGrads<T> batchnorm_backward(const Tensor<T>& grad_out, const Tensor<T>& gamma, const BatchNormCache<T>& cache);

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x);
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& grad_out, const Tensor<T>& x);

template <typename T>
struct MaxPoolResult {
    Tensor<T> y;
    std::vector<std::size_t> argmax;  ///< flat input index per output element
};

/// 2x2 window, stride 2, floor on odd sizes. Ties go to the first maximum.
template <typename T>
MaxPoolResult<T> maxpool2_forward(const Tensor<T>& x);
template <typename T>
Tensor<T> maxpool2_backward(const Tensor<T>& grad_out, const std::vector<std::size_t>& argmax, const Shape& in_shape);

/// N x C x H x W -> N x C x 1 x 1.
template <typename T>
Tensor<T> global_avgpool_forward(const Tensor<T>& x);
template <typename T>
Tensor<T> global_avgpool_backward(const Tensor<T>& grad_out, const Shape& in_shape);

/// x: N x In, w: Out x In, b: Out.
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

template <typename T>
struct DenseGrads {
    Tensor<T> x, w, b;
};

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& grad_out, const Tensor<T>& x, const Tensor<T>& w);

/// N x ... -> N x (product of the rest).
template <typename T>
Tensor<T> flatten_forward(const Tensor<T>& x);

// -- modules ------------------------------------------------------------------

template <typename T>
struct Param {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;

    Param() = default;
    Param(std::string n, Shape s) : name(std::move(n)), value(s), grad(s) {}
};

template <typename T>
class Conv2d {
public:
    Conv2d(int in_channels, int out_channels, int kernel, int stride, Padding pad, const std::string& name);

    Tensor<T> forward(const Tensor<T>& x);
    Tensor<T> backward(const Tensor<T>& grad_out);
    void init_he_uniform(std::mt19937_64& rng);
    void collect(std::vector<Param<T>*>& out) { out.push_back(&weight); out.push_back(&bias); }

    int in_channels() const noexcept { return weight.value.dim(1); }
    int out_channels() const noexcept { return weight.value.dim(0); }
    int kernel() const noexcept { return weight.value.dim(2); }
    int stride() const noexcept { return stride_; }
    Padding padding() const noexcept { return pad_; }

    Param<T> weight;
    Param<T> bias;

private:
    int stride_;
    Padding pad_;
    std::optional<Tensor<T>> input_;
};

template <typename T>
class BatchNorm2d {
public:
    BatchNorm2d(int channels, T eps, T momentum, const std::string& name);

    Tensor<T> forward(const Tensor<T>& x, Mode mode);
    Tensor<T> backward(const Tensor<T>& grad_out);
    void collect(std::vector<Param<T>*>& out) { out.push_back(&gamma); out.push_back(&beta); }

    Param<T> gamma;
    Param<T> beta;
    BatchNormState<T> state;
    T eps;
    T momentum;

private:
    std::optional<BatchNormCache<T>> cache_;
};

template <typename T>
class Relu {
public:
    Tensor<T> forward(const Tensor<T>& x);
    Tensor<T> backward(const Tensor<T>& grad_out);

private:
    std::optional<Tensor<T>> input_;
};

template <typename T>
class MaxPool2 {
public:
    Tensor<T> forward(const Tensor<T>& x);
    Tensor<T> backward(const Tensor<T>& grad_out);

private:
    Shape in_shape_;
    std::optional<std::vector<std::size_t>> argmax_;
};

template <typename T>
class GlobalAvgPool {
public:
    Tensor<T> forward(const Tensor<T>& x);
    Tensor<T> backward(const Tensor<T>& grad_out);

private:
    std::optional<Shape> in_shape_;
};

template <typename T>
class Flatten {
public:
    Tensor<T> forward(const Tensor<T>& x);
    Tensor<T> backward(const Tensor<T>& grad_out);

private:
    std::optional<Shape> in_shape_;
};

template <typename T>
class Dense {
public:
    Dense(int in_features, int out_features, const std::string& name);

    Tensor<T> forward(const Tensor<T>& x);
    Tensor<T> backward(const Tensor<T>& grad_out);
    void init_he_uniform(std::mt19937_64& rng);
    void collect(std::vector<Param<T>*>& out) { out.push_back(&weight); out.push_back(&bias); }

    Param<T> weight;
    Param<T> bias;

private:
    std::optional<Tensor<T>> input_;
};

}  // namespace nomadet::nn
