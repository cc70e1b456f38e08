#include "nomadet/nn/resnet.hpp"

namespace nomadet::nn {

namespace {

template <typename T>
Tensor<T> bn_infer(const BatchNorm2d<T>& bn, const Tensor<T>& x) {
    auto state = bn.state;
    return batchnorm_forward(x, bn.gamma.value, bn.beta.value, state, bn.eps, bn.momentum, Mode::Infer,
                             static_cast<BatchNormCache<T>*>(nullptr));
}

template <typename T>
Tensor<T> conv_infer(const Conv2d<T>& c, const Tensor<T>& x) {
    return conv2d_forward(x, c.weight.value, c.bias.value, c.stride(), c.padding());
}

template <typename T>
void add_inplace(Tensor<T>& a, const Tensor<T>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

}  // namespace

void ArchConfig::validate() const {
    if (input_size < 4) throw DomainError("input_size must be at least 4");
    if (in_channels < 1 || stem_channels < 1 || classes < 2) throw DomainError("channel counts must be positive");
    if (stem_kernel < 1 || stem_kernel % 2 == 0) throw DomainError("stem kernel must be odd");
    if (stem_stride < 1) throw DomainError("stem stride must be >= 1");
    if (!(bn_eps > 0.0F) || !(bn_momentum >= 0.0F && bn_momentum < 1.0F))
        throw DomainError("batch norm eps must be > 0 and momentum in [0, 1)");
    int channels = stem_channels;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i].channels < 1) throw DomainError("block channels must be positive");
        if (blocks[i].kind == BlockKind::Identity && blocks[i].channels != channels)
            throw ShapeError("ID block " + std::to_string(i) + " must keep " + std::to_string(channels) +
                             " channels, got " + std::to_string(blocks[i].channels));
        channels = blocks[i].channels;
    }
    (void)infer_shapes(*this);
}

std::vector<StageShape> infer_shapes(const ArchConfig& cfg) {
    std::vector<StageShape> out;
    int h = cfg.input_size;
    out.push_back({"input", cfg.in_channels, h, h});
    h = conv_output_size(h, cfg.stem_kernel, cfg.stem_stride, Padding::Same);
    if (cfg.stem_pool) h /= 2;
    if (h < 1) throw ShapeError("stem reduces the input to nothing");
    out.push_back({"stem", cfg.stem_channels, h, h});
    for (std::size_t i = 0; i < cfg.blocks.size(); ++i) {
        const auto& b = cfg.blocks[i];
        if (b.kind == BlockKind::Conv) h = conv_output_size(h, 3, 2, Padding::Same);
        out.push_back({(b.kind == BlockKind::Conv ? "conv_block" : "id_block") + std::to_string(i), b.channels, h, h});
    }
    out.push_back({"pooled", out.back().channels, 1, 1});
    out.push_back({"logits", cfg.classes, 1, 1});
    return out;
}

// -- residual block --------------------------------------------------------------

template <typename T>
ResidualBlock<T>::ResidualBlock(BlockKind kind, int in_channels, int out_channels, T eps, T momentum,
                                const std::string& name)
    : conv1(in_channels, out_channels, 3, kind == BlockKind::Conv ? 2 : 1, Padding::Same, name + ".conv1"),
      bn1(out_channels, eps, momentum, name + ".bn1"),
      conv2(out_channels, out_channels, 3, 1, Padding::Same, name + ".conv2"),
      bn2(out_channels, eps, momentum, name + ".bn2"),
      kind_(kind) {
    if (kind == BlockKind::Identity && in_channels != out_channels)
        throw ShapeError("ID block needs equal input/output channels, got " + std::to_string(in_channels) + " -> " +
                         std::to_string(out_channels));
    if (kind == BlockKind::Conv) {
        shortcut_conv.emplace(in_channels, out_channels, 1, 2, Padding::Valid, name + ".shortcut");
        shortcut_bn.emplace(out_channels, eps, momentum, name + ".shortcut_bn");
    }
}

template <typename T>
Tensor<T> ResidualBlock<T>::forward(const Tensor<T>& x, Mode mode) {
    auto main = bn2.forward(conv2.forward(relu1_.forward(bn1.forward(conv1.forward(x), mode))), mode);
    if (kind_ == BlockKind::Conv) {
        add_inplace(main, shortcut_bn->forward(shortcut_conv->forward(x), mode));
    } else {
        if (main.shape() != x.shape())
            throw ShapeError("ID block output " + shape_str(main.shape()) + " differs from input " +
                             shape_str(x.shape()));
        add_inplace(main, x);
    }
    return relu_out_.forward(main);
}

template <typename T>
Tensor<T> ResidualBlock<T>::backward(const Tensor<T>& grad_out) {
    const auto g = relu_out_.backward(grad_out);
    auto gx = conv1.backward(bn1.backward(relu1_.backward(conv2.backward(bn2.backward(g)))));
    if (kind_ == BlockKind::Conv)
        add_inplace(gx, shortcut_conv->backward(shortcut_bn->backward(g)));
    else
        add_inplace(gx, g);
    return gx;
}

template <typename T>
Tensor<T> ResidualBlock<T>::infer(const Tensor<T>& x) const {
    auto main = bn_infer(bn2, conv_infer(conv2, relu_forward(bn_infer(bn1, conv_infer(conv1, x)))));
    if (kind_ == BlockKind::Conv)
        add_inplace(main, bn_infer(*shortcut_bn, conv_infer(*shortcut_conv, x)));
    else
        add_inplace(main, x);
    return relu_forward(main);
}

template <typename T>
void ResidualBlock<T>::collect(std::vector<Param<T>*>& out) {
    conv1.collect(out);
    bn1.collect(out);
    conv2.collect(out);
    bn2.collect(out);
    if (shortcut_conv) {
        shortcut_conv->collect(out);
        shortcut_bn->collect(out);
    }
}

namespace {

template <typename T>
void conv_state(Conv2d<T>& c, std::vector<Tensor<T>*>& out) {
    out.push_back(&c.weight.value);
    out.push_back(&c.bias.value);
}

template <typename T>
void bn_state(BatchNorm2d<T>& b, std::vector<Tensor<T>*>& out) {
    out.push_back(&b.gamma.value);
    out.push_back(&b.beta.value);
    out.push_back(&b.state.running_mean);
    out.push_back(&b.state.running_var);
}

}  // namespace

template <typename T>
void ResidualBlock<T>::collect_state(std::vector<Tensor<T>*>& out) {
    conv_state(conv1, out);
    bn_state(bn1, out);
    conv_state(conv2, out);
    bn_state(bn2, out);
    if (shortcut_conv) {
        conv_state(*shortcut_conv, out);
        bn_state(*shortcut_bn, out);
    }
}

template <typename T>
void ResidualBlock<T>::init(std::mt19937_64& rng) {
    conv1.init_he_uniform(rng);
    conv2.init_he_uniform(rng);
    if (shortcut_conv) shortcut_conv->init_he_uniform(rng);
}

// -- network ------------------------------------------------------------------------

namespace {

int last_channels(const ArchConfig& cfg) { return cfg.blocks.empty() ? cfg.stem_channels : cfg.blocks.back().channels; }

}  // namespace

template <typename T>
ResNet<T>::ResNet(ArchConfig cfg, std::uint64_t seed)
    : stem((cfg.validate(), cfg.in_channels), cfg.stem_channels, cfg.stem_kernel, cfg.stem_stride, Padding::Same,
           "stem"),
      stem_bn(cfg.stem_channels, static_cast<T>(cfg.bn_eps), static_cast<T>(cfg.bn_momentum), "stem_bn"),
      head(last_channels(cfg), cfg.classes, "head"),
      cfg_(std::move(cfg)) {
    int channels = cfg_.stem_channels;
    for (std::size_t i = 0; i < cfg_.blocks.size(); ++i) {
        const auto& b = cfg_.blocks[i];
        blocks.emplace_back(b.kind, channels, b.channels, static_cast<T>(cfg_.bn_eps),
                            static_cast<T>(cfg_.bn_momentum), "block" + std::to_string(i));
        channels = b.channels;
    }
    std::mt19937_64 rng(seed);
    stem.init_he_uniform(rng);
    for (auto& b : blocks) b.init(rng);
    head.init_he_uniform(rng);
}

template <typename T>
void ResNet<T>::check_input(const Tensor<T>& x) const {
    if (x.rank() != 4 || x.dim(1) != cfg_.in_channels || x.dim(2) != cfg_.input_size || x.dim(3) != cfg_.input_size)
        throw ShapeError("network input must be B x " + std::to_string(cfg_.in_channels) + " x " +
                         std::to_string(cfg_.input_size) + " x " + std::to_string(cfg_.input_size) + ", got " +
                         shape_str(x.shape()));
}

template <typename T>
Tensor<T> ResNet<T>::forward(const Tensor<T>& x, Mode mode) {
    check_input(x);
    auto h = stem_relu_.forward(stem_bn.forward(stem.forward(x), mode));
    if (cfg_.stem_pool) h = pool_.forward(h);
    for (auto& b : blocks) h = b.forward(h, mode);
    return head.forward(flatten_.forward(gap_.forward(h)));
}

template <typename T>
void ResNet<T>::backward(const Tensor<T>& grad_logits) {
    auto g = gap_.backward(flatten_.backward(head.backward(grad_logits)));
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) g = it->backward(g);
    if (cfg_.stem_pool) g = pool_.backward(g);
    (void)stem.backward(stem_bn.backward(stem_relu_.backward(g)));
}

template <typename T>
Tensor<T> ResNet<T>::infer(const Tensor<T>& x) const {
    check_input(x);
    auto h = relu_forward(bn_infer(stem_bn, conv_infer(stem, x)));
    if (cfg_.stem_pool) h = maxpool2_forward(h).y;
    for (const auto& b : blocks) h = b.infer(h);
    return dense_forward(flatten_forward(global_avgpool_forward(h)), head.weight.value, head.bias.value);
}

template <typename T>
std::vector<Param<T>*> ResNet<T>::params() {
    std::vector<Param<T>*> out;
    stem.collect(out);
    stem_bn.collect(out);
    for (auto& b : blocks) b.collect(out);
    head.collect(out);
    return out;
}

template <typename T>
std::vector<Tensor<T>*> ResNet<T>::state_tensors() {
    std::vector<Tensor<T>*> out;
    conv_state(stem, out);
    bn_state(stem_bn, out);
    for (auto& b : blocks) b.collect_state(out);
    out.push_back(&head.weight.value);
    out.push_back(&head.bias.value);
    return out;
}

template <typename T>
std::vector<Tensor<T>> ResNet<T>::snapshot() {
    std::vector<Tensor<T>> out;
    for (auto* t : state_tensors()) out.push_back(*t);
    return out;
}

template <typename T>
void ResNet<T>::restore(const std::vector<Tensor<T>>& snap) {
    auto dst = state_tensors();
    if (dst.size() != snap.size()) throw ShapeError("snapshot tensor count does not match the model");
    for (std::size_t i = 0; i < dst.size(); ++i) {
        if (dst[i]->shape() != snap[i].shape())
            throw ShapeError("snapshot tensor " + std::to_string(i) + " has shape " + shape_str(snap[i].shape()) +
                             ", model expects " + shape_str(dst[i]->shape()));
        *dst[i] = snap[i];
    }
}

template <typename T>
void ResNet<T>::zero_grad() {
    for (auto* p : params()) p->grad.fill(T{0});
}

template <typename T>
std::vector<BatchNorm2d<T>*> ResNet<T>::batchnorms() {
    std::vector<BatchNorm2d<T>*> out{&stem_bn};
    for (auto& b : blocks) {
        out.push_back(&b.bn1);
        out.push_back(&b.bn2);
        if (b.shortcut_bn) out.push_back(&*b.shortcut_bn);
    }
    return out;
}

template <typename T>
std::size_t ResNet<T>::parameter_count() {
    std::size_t n = 0;
    for (auto* p : params()) n += p->value.size();
    return n;
}

template class ResidualBlock<float>;
template class ResidualBlock<double>;
template class ResNet<float>;
template class ResNet<double>;

}  // namespace nomadet::nn
