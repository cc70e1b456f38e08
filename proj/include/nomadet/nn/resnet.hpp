#pragma once

// Residual classifier for 100x100 density diagrams:
//   stem conv -> BN -> ReLU -> maxpool 2x2
//   -> residual blocks (ID keeps shape, CONV halves H/W and changes width)
//   -> global average pool -> flatten -> dense(classes)

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nomadet/nn/layers.hpp"

namespace nomadet::nn {

enum class BlockKind : std::uint8_t { Identity = 0, Conv = 1 };

struct BlockSpec {
    BlockKind kind;
    int channels;

    bool operator==(const BlockSpec&) const = default;
};

struct ArchConfig {
    int input_size = 100;
    int in_channels = 1;
    int stem_kernel = 5;
    int stem_channels = 16;
    int stem_stride = 1;
    bool stem_pool = true;
    std::vector<BlockSpec> blocks = {{BlockKind::Conv, 32}, {BlockKind::Identity, 32}, {BlockKind::Conv, 64},
                                     {BlockKind::Identity, 64}, {BlockKind::Conv, 128}, {BlockKind::Identity, 128}};
    int classes = 4;
    float bn_eps = 1e-5F;
    float bn_momentum = 0.9F;

    /// Throws ShapeError/DomainError when layer shapes do not compose.
    void validate() const;
    bool operator==(const ArchConfig&) const = default;
};

struct StageShape {
    std::string name;
    int channels;
    int height;
    int width;
};

/// Static shape inference: input, stem, each block, pooled features, logits.
std::vector<StageShape> infer_shapes(const ArchConfig& cfg);

template <typename T>
class ResidualBlock {
public:
    ResidualBlock(BlockKind kind, int in_channels, int out_channels, T eps, T momentum, const std::string& name);

    /// out = ReLU(main(x) + shortcut(x)), main = conv3x3-BN-ReLU-conv3x3-BN.
    Tensor<T> forward(const Tensor<T>& x, Mode mode);
    Tensor<T> backward(const Tensor<T>& grad_out);
    /// Inference without caching; safe on a shared const instance.
    Tensor<T> infer(const Tensor<T>& x) const;

    void collect(std::vector<Param<T>*>& out);
    void collect_state(std::vector<Tensor<T>*>& out);
    void init(std::mt19937_64& rng);

    BlockKind kind() const noexcept { return kind_; }

    Conv2d<T> conv1;
    BatchNorm2d<T> bn1;
    Conv2d<T> conv2;
    BatchNorm2d<T> bn2;
    std::optional<Conv2d<T>> shortcut_conv;
    std::optional<BatchNorm2d<T>> shortcut_bn;

private:
    BlockKind kind_;
    Relu<T> relu1_;
    Relu<T> relu_out_;
};

template <typename T>
class ResNet {
public:
    explicit ResNet(ArchConfig cfg = {}, std::uint64_t seed = 0);

    /// x: B x C x S x S -> logits B x classes. Caches activations for backward.
    Tensor<T> forward(const Tensor<T>& x, Mode mode);
    void backward(const Tensor<T>& grad_logits);
    Tensor<T> infer(const Tensor<T>& x) const;

    std::vector<Param<T>*> params();
    /// Every persistent tensor (weights, biases, BN affine and running stats) in declaration order.
    std::vector<Tensor<T>*> state_tensors();
    std::vector<Tensor<T>> snapshot();
    void restore(const std::vector<Tensor<T>>& snap);
    void zero_grad();
    std::size_t parameter_count();
    /// Every batch-norm layer, stem first.
    std::vector<BatchNorm2d<T>*> batchnorms();

    const ArchConfig& config() const noexcept { return cfg_; }

    Conv2d<T> stem;
    BatchNorm2d<T> stem_bn;
    std::vector<ResidualBlock<T>> blocks;
    Dense<T> head;

private:
    void check_input(const Tensor<T>& x) const;

    ArchConfig cfg_;
    Relu<T> stem_relu_;
    MaxPool2<T> pool_;
    GlobalAvgPool<T> gap_;
    Flatten<T> flatten_;
};

using Model = ResNet<float>;

}  // namespace nomadet::nn
