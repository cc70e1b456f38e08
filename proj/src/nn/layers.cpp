#include "nomadet/nn/layers.hpp"

#include <Eigen/Core>
#include <cmath>
#include <limits>

namespace nomadet::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using CMapMat = Eigen::Map<const RowMat<T>>;

void require_rank(const Shape& s, int rank, const char* what) {
    if (static_cast<int>(s.size()) != rank)
        throw ShapeError(std::string(what) + " expects a rank-" + std::to_string(rank) + " tensor, got " +
                         shape_str(s));
}

struct ConvGeom {
    int n, cin, h, w, cout, k, stride, pad, ho, wo;

    std::size_t col_rows() const { return static_cast<std::size_t>(cin) * k * k; }
    std::size_t col_cols() const { return static_cast<std::size_t>(ho) * wo; }
};

template <typename T>
ConvGeom conv_geom(const Tensor<T>& x, const Tensor<T>& w, int stride, Padding pad) {
    require_rank(x.shape(), 4, "conv2d input");
    require_rank(w.shape(), 4, "conv2d weight");
    if (x.dim(1) != w.dim(1))
        throw ShapeError("conv2d input has " + std::to_string(x.dim(1)) + " channels but weight expects " +
                         std::to_string(w.dim(1)) + " (input " + shape_str(x.shape()) + ", weight " +
                         shape_str(w.shape()) + ")");
    if (w.dim(2) != w.dim(3)) throw ShapeError("conv2d kernels must be square, got " + shape_str(w.shape()));
    if (stride < 1) throw DomainError("conv2d stride must be >= 1");
    ConvGeom g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), stride, padding_amount(w.dim(2), pad), 0, 0};
    g.ho = conv_output_size(g.h, g.k, stride, pad);
    g.wo = conv_output_size(g.w, g.k, stride, pad);
    if (g.ho < 1 || g.wo < 1)
        throw ShapeError("conv2d kernel " + std::to_string(g.k) + " does not fit input " + shape_str(x.shape()));
    return g;
}

template <typename T>
void im2col(const T* img, const ConvGeom& g, T* col) {
    const std::size_t p = g.col_cols();
    for (int c = 0; c < g.cin; ++c) {
        for (int i = 0; i < g.k; ++i) {
            for (int j = 0; j < g.k; ++j) {
                T* row = col + ((static_cast<std::size_t>(c) * g.k + i) * g.k + j) * p;
                for (int oh = 0; oh < g.ho; ++oh) {
                    const int ih = oh * g.stride - g.pad + i;
                    T* dst = row + static_cast<std::size_t>(oh) * g.wo;
                    if (ih < 0 || ih >= g.h) {
                        std::fill(dst, dst + g.wo, T{0});
                        continue;
                    }
                    const T* src = img + (static_cast<std::size_t>(c) * g.h + ih) * g.w;
                    for (int ow = 0; ow < g.wo; ++ow) {
                        const int iw = ow * g.stride - g.pad + j;
                        dst[ow] = (iw >= 0 && iw < g.w) ? src[iw] : T{0};
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im(const T* col, const ConvGeom& g, T* img) {
    const std::size_t p = g.col_cols();
    for (int c = 0; c < g.cin; ++c) {
        for (int i = 0; i < g.k; ++i) {
            for (int j = 0; j < g.k; ++j) {
                const T* row = col + ((static_cast<std::size_t>(c) * g.k + i) * g.k + j) * p;
                for (int oh = 0; oh < g.ho; ++oh) {
                    const int ih = oh * g.stride - g.pad + i;
                    if (ih < 0 || ih >= g.h) continue;
                    const T* srcrow = row + static_cast<std::size_t>(oh) * g.wo;
                    T* dst = img + (static_cast<std::size_t>(c) * g.h + ih) * g.w;
                    for (int ow = 0; ow < g.wo; ++ow) {
                        const int iw = ow * g.stride - g.pad + j;
                        if (iw >= 0 && iw < g.w) dst[iw] += srcrow[ow];
                    }
                }
            }
        }
    }
}

struct ChannelLayout {
    int n, c;
    std::size_t spatial;
};

template <typename T>
ChannelLayout channel_layout(const Tensor<T>& x) {
    if (x.rank() == 2) return {x.dim(0), x.dim(1), 1};
    if (x.rank() == 4) return {x.dim(0), x.dim(1), static_cast<std::size_t>(x.dim(2)) * x.dim(3)};
    throw ShapeError("batch norm expects N x C or N x C x H x W, got " + shape_str(x.shape()));
}

}  // namespace

int padding_amount(int kernel, Padding pad) { return pad == Padding::Same ? (kernel - 1) / 2 : 0; }

int conv_output_size(int in, int kernel, int stride, Padding pad) {
    return (in + 2 * padding_amount(kernel, pad) - kernel) / stride + 1;
}

// -- conv ---------------------------------------------------------------------

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride, Padding pad) {
    const auto g = conv_geom(x, w, stride, pad);
    if (b.size() != static_cast<std::size_t>(g.cout))
        throw ShapeError("conv2d bias has " + std::to_string(b.size()) + " entries, expected " +
                         std::to_string(g.cout));
    Tensor<T> y({g.n, g.cout, g.ho, g.wo});
    const std::size_t kk = g.col_rows();
    const std::size_t p = g.col_cols();
    AlignedVector<T> col(kk * p);
    CMapMat<T> wm(w.data(), g.cout, static_cast<Eigen::Index>(kk));
    for (int n = 0; n < g.n; ++n) {
        im2col(x.data() + static_cast<std::size_t>(n) * g.cin * g.h * g.w, g, col.data());
        MapMat<T> ym(y.data() + static_cast<std::size_t>(n) * g.cout * p, g.cout, static_cast<Eigen::Index>(p));
        ym.noalias() = wm * CMapMat<T>(col.data(), static_cast<Eigen::Index>(kk), static_cast<Eigen::Index>(p));
        for (int o = 0; o < g.cout; ++o) ym.row(o).array() += b[static_cast<std::size_t>(o)];
    }
    return y;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& grad_out, const Tensor<T>& x, const Tensor<T>& w, int stride,
                             Padding pad) {
    const auto g = conv_geom(x, w, stride, pad);
    if (grad_out.shape() != Shape{g.n, g.cout, g.ho, g.wo})
        throw ShapeError("conv2d grad_out shape " + shape_str(grad_out.shape()) + " does not match forward output " +
                         shape_str({g.n, g.cout, g.ho, g.wo}));
    ConvGrads<T> out{Tensor<T>(x.shape()), Tensor<T>(w.shape()), Tensor<T>({g.cout})};
    const std::size_t kk = g.col_rows();
    const std::size_t p = g.col_cols();
    AlignedVector<T> col(kk * p);
    AlignedVector<T> gcol(kk * p);
    CMapMat<T> wm(w.data(), g.cout, static_cast<Eigen::Index>(kk));
    MapMat<T> gw(out.w.data(), g.cout, static_cast<Eigen::Index>(kk));
    for (int n = 0; n < g.n; ++n) {
        CMapMat<T> gy(grad_out.data() + static_cast<std::size_t>(n) * g.cout * p, g.cout,
                      static_cast<Eigen::Index>(p));
        im2col(x.data() + static_cast<std::size_t>(n) * g.cin * g.h * g.w, g, col.data());
        gw.noalias() += gy * CMapMat<T>(col.data(), static_cast<Eigen::Index>(kk), static_cast<Eigen::Index>(p)).transpose();
        for (int o = 0; o < g.cout; ++o) out.b[static_cast<std::size_t>(o)] += gy.row(o).sum();
        MapMat<T>(gcol.data(), static_cast<Eigen::Index>(kk), static_cast<Eigen::Index>(p)).noalias() = wm.transpose() * gy;
        col2im(gcol.data(), g, out.x.data() + static_cast<std::size_t>(n) * g.cin * g.h * g.w);
    }
    return out;
}

// -- batch norm -----------------------------------------------------------------

template <typename T>
Tensor<T> batchnorm_forward(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                            BatchNormState<T>& state, T eps, T momentum, Mode mode, BatchNormCache<T>* cache) {
    const auto lay = channel_layout(x);
    const auto c = static_cast<std::size_t>(lay.c);
    if (gamma.size() != c || beta.size() != c || state.running_mean.size() != c || state.running_var.size() != c)
        throw ShapeError("batch norm parameters do not match " + std::to_string(lay.c) + " channels");
    if (mode == Mode::Train && lay.n < 2) throw DomainError("batch norm in training mode needs a batch of at least 2");

    const std::size_t m = static_cast<std::size_t>(lay.n) * lay.spatial;
    std::vector<T> mean(c), inv_std(c);
    if (mode == Mode::Train) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            double s = 0.0;
            for (int n = 0; n < lay.n; ++n) {
                const T* p = x.data() + (static_cast<std::size_t>(n) * c + ch) * lay.spatial;
                for (std::size_t i = 0; i < lay.spatial; ++i) s += p[i];
            }
            const double mu = s / static_cast<double>(m);
            double v = 0.0;
            for (int n = 0; n < lay.n; ++n) {
                const T* p = x.data() + (static_cast<std::size_t>(n) * c + ch) * lay.spatial;
                for (std::size_t i = 0; i < lay.spatial; ++i) {
                    const double d = p[i] - mu;
                    v += d * d;
                }
            }
            const double var = v / static_cast<double>(m);
            mean[ch] = static_cast<T>(mu);
            inv_std[ch] = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
            const double unbiased = m > 1 ? var * static_cast<double>(m) / static_cast<double>(m - 1) : var;
            state.running_mean[ch] = static_cast<T>(momentum * state.running_mean[ch] + (T{1} - momentum) * mu);
            state.running_var[ch] = static_cast<T>(momentum * state.running_var[ch] + (T{1} - momentum) * unbiased);
        }
    } else {
        for (std::size_t ch = 0; ch < c; ++ch) {
            mean[ch] = state.running_mean[ch];
            inv_std[ch] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(state.running_var[ch]) + eps));
        }
    }

    Tensor<T> y(x.shape());
    Tensor<T> xhat(x.shape());
    for (int n = 0; n < lay.n; ++n) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t off = (static_cast<std::size_t>(n) * c + ch) * lay.spatial;
            for (std::size_t i = 0; i < lay.spatial; ++i) {
                const T h = (x[off + i] - mean[ch]) * inv_std[ch];
                xhat[off + i] = h;
                y[off + i] = gamma[ch] * h + beta[ch];
            }
        }
    }
    if (cache) *cache = BatchNormCache<T>{std::move(xhat), std::move(inv_std), mode};
    return y;
}

template <typename T>
BatchNormGrads<T> batchnorm_backward(const Tensor<T>& grad_out, const Tensor<T>& gamma, const BatchNormCache<T>& cache) {
    if (grad_out.shape() != cache.xhat.shape())
        throw ShapeError("batch norm grad_out " + shape_str(grad_out.shape()) + " does not match cached input " +
                         shape_str(cache.xhat.shape()));
    const auto lay = channel_layout(grad_out);
    const auto c = static_cast<std::size_t>(lay.c);
    const double m = static_cast<double>(lay.n) * static_cast<double>(lay.spatial);
    BatchNormGrads<T> out{Tensor<T>(grad_out.shape()), Tensor<T>({lay.c}), Tensor<T>({lay.c})};
    for (std::size_t ch = 0; ch < c; ++ch) {
        double sum_g = 0.0;
        double sum_gx = 0.0;
        for (int n = 0; n < lay.n; ++n) {
            const std::size_t off = (static_cast<std::size_t>(n) * c + ch) * lay.spatial;
            for (std::size_t i = 0; i < lay.spatial; ++i) {
                sum_g += grad_out[off + i];
                sum_gx += static_cast<double>(grad_out[off + i]) * cache.xhat[off + i];
            }
        }
        out.beta[ch] = static_cast<T>(sum_g);
        out.gamma[ch] = static_cast<T>(sum_gx);
        const double scale = static_cast<double>(gamma[ch]) * cache.inv_std[ch];
        for (int n = 0; n < lay.n; ++n) {
            const std::size_t off = (static_cast<std::size_t>(n) * c + ch) * lay.spatial;
            for (std::size_t i = 0; i < lay.spatial; ++i) {
                if (cache.mode == Mode::Train)
                    out.x[off + i] = static_cast<T>(scale / m *
                                                    (m * grad_out[off + i] - sum_g - cache.xhat[off + i] * sum_gx));
                else
                    out.x[off + i] = static_cast<T>(scale * grad_out[off + i]);
            }
        }
    }
    return out;
}

// -- elementwise and pooling -----------------------------------------------------

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x) {
    Tensor<T> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T{0} ? x[i] : T{0};
    return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& grad_out, const Tensor<T>& x) {
    if (grad_out.shape() != x.shape()) throw ShapeError("relu grad_out shape does not match its input");
    Tensor<T> g(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] > T{0} ? grad_out[i] : T{0};
    return g;
}

template <typename T>
MaxPoolResult<T> maxpool2_forward(const Tensor<T>& x) {
    require_rank(x.shape(), 4, "maxpool2");
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const int ho = h / 2, wo = w / 2;
    if (ho < 1 || wo < 1) throw ShapeError("maxpool2 needs spatial size >= 2, got " + shape_str(x.shape()));
    MaxPoolResult<T> r{Tensor<T>({n, c, ho, wo}), {}};
    r.argmax.resize(r.y.size());
    std::size_t o = 0;
    for (int b = 0; b < n; ++b)
        for (int ch = 0; ch < c; ++ch)
            for (int i = 0; i < ho; ++i)
                for (int j = 0; j < wo; ++j, ++o) {
                    const std::size_t base = ((static_cast<std::size_t>(b) * c + ch) * h + 2 * i) * w + 2 * j;
                    const std::size_t cand[4] = {base, base + 1, base + static_cast<std::size_t>(w),
                                                 base + static_cast<std::size_t>(w) + 1};
                    std::size_t best = cand[0];
                    for (int q = 1; q < 4; ++q)
                        if (x[cand[q]] > x[best]) best = cand[q];
                    r.y[o] = x[best];
                    r.argmax[o] = best;
                }
    return r;
}

template <typename T>
Tensor<T> maxpool2_backward(const Tensor<T>& grad_out, const std::vector<std::size_t>& argmax, const Shape& in_shape) {
    if (grad_out.size() != argmax.size()) throw ShapeError("maxpool2 grad_out does not match the forward output");
    Tensor<T> g(in_shape);
    for (std::size_t o = 0; o < argmax.size(); ++o) g[argmax[o]] += grad_out[o];
    return g;
}

template <typename T>
Tensor<T> global_avgpool_forward(const Tensor<T>& x) {
    require_rank(x.shape(), 4, "global average pool");
    const int n = x.dim(0), c = x.dim(1);
    const std::size_t sp = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
    Tensor<T> y({n, c, 1, 1});
    for (std::size_t i = 0; i < y.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < sp; ++k) s += x[i * sp + k];
        y[i] = static_cast<T>(s / static_cast<double>(sp));
    }
    return y;
}

template <typename T>
Tensor<T> global_avgpool_backward(const Tensor<T>& grad_out, const Shape& in_shape) {
    require_rank(in_shape, 4, "global average pool");
    const std::size_t sp = static_cast<std::size_t>(in_shape[2]) * in_shape[3];
    if (grad_out.size() * sp != shape_size(in_shape))
        throw ShapeError("global average pool grad_out does not match input " + shape_str(in_shape));
    Tensor<T> g(in_shape);
    const T scale = T{1} / static_cast<T>(sp);
    for (std::size_t i = 0; i < grad_out.size(); ++i)
        for (std::size_t k = 0; k < sp; ++k) g[i * sp + k] = grad_out[i] * scale;
    return g;
}

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
    require_rank(x.shape(), 2, "dense input");
    require_rank(w.shape(), 2, "dense weight");
    if (x.dim(1) != w.dim(1))
        throw ShapeError("dense input has " + std::to_string(x.dim(1)) + " features, weight expects " +
                         std::to_string(w.dim(1)));
    if (b.size() != static_cast<std::size_t>(w.dim(0))) throw ShapeError("dense bias does not match output width");
    Tensor<T> y({x.dim(0), w.dim(0)});
    MapMat<T> ym(y.data(), x.dim(0), w.dim(0));
    ym.noalias() = CMapMat<T>(x.data(), x.dim(0), x.dim(1)) * CMapMat<T>(w.data(), w.dim(0), w.dim(1)).transpose();
    for (int i = 0; i < x.dim(0); ++i)
        for (int o = 0; o < w.dim(0); ++o) ym(i, o) += b[static_cast<std::size_t>(o)];
    return y;
}

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& grad_out, const Tensor<T>& x, const Tensor<T>& w) {
    if (grad_out.shape() != Shape{x.dim(0), w.dim(0)})
        throw ShapeError("dense grad_out " + shape_str(grad_out.shape()) + " does not match forward output");
    DenseGrads<T> g{Tensor<T>(x.shape()), Tensor<T>(w.shape()), Tensor<T>({w.dim(0)})};
    CMapMat<T> gy(grad_out.data(), grad_out.dim(0), grad_out.dim(1));
    MapMat<T>(g.w.data(), w.dim(0), w.dim(1)).noalias() = gy.transpose() * CMapMat<T>(x.data(), x.dim(0), x.dim(1));
    MapMat<T>(g.x.data(), x.dim(0), x.dim(1)).noalias() = gy * CMapMat<T>(w.data(), w.dim(0), w.dim(1));
    for (int o = 0; o < w.dim(0); ++o) g.b[static_cast<std::size_t>(o)] = gy.col(o).sum();
    return g;
}

template <typename T>
Tensor<T> flatten_forward(const Tensor<T>& x) {
    if (x.rank() < 2) throw ShapeError("flatten needs a batched tensor");
    return x.reshaped({x.dim(0), static_cast<int>(x.size() / static_cast<std::size_t>(x.dim(0)))});
}

// -- modules ----------------------------------------------------------------------

namespace {

template <typename T>
void he_uniform(Tensor<T>& w, int fan_in, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> u(-limit, limit);
    for (auto& v : w.values()) v = static_cast<T>(u(rng));
}

template <typename T>
void accumulate(Tensor<T>& dst, const Tensor<T>& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

[[noreturn]] void missing_cache(const char* layer) {
    throw UsageError(std::string(layer) + " backward called without a preceding forward");
}

}  // namespace

template <typename T>
Conv2d<T>::Conv2d(int in_channels, int out_channels, int kernel, int stride, Padding pad, const std::string& name)
    : weight(name + ".weight", {out_channels, in_channels, kernel, kernel}),
      bias(name + ".bias", {out_channels}),
      stride_(stride),
      pad_(pad) {}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x) {
    input_ = x;
    return conv2d_forward(x, weight.value, bias.value, stride_, pad_);
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& grad_out) {
    if (!input_) missing_cache("conv2d");
    auto g = conv2d_backward(grad_out, *input_, weight.value, stride_, pad_);
    accumulate(weight.grad, g.w);
    accumulate(bias.grad, g.b);
    return std::move(g.x);
}

template <typename T>
void Conv2d<T>::init_he_uniform(std::mt19937_64& rng) {
    he_uniform(weight.value, in_channels() * kernel() * kernel(), rng);
    bias.value.fill(T{0});
}

template <typename T>
BatchNorm2d<T>::BatchNorm2d(int channels, T eps_, T momentum_, const std::string& name)
    : gamma(name + ".gamma", {channels}),
      beta(name + ".beta", {channels}),
      state{Tensor<T>({channels}, T{0}), Tensor<T>({channels}, T{1})},
      eps(eps_),
      momentum(momentum_) {
    gamma.value.fill(T{1});
}

template <typename T>
Tensor<T> BatchNorm2d<T>::forward(const Tensor<T>& x, Mode mode) {
    BatchNormCache<T> c;
    auto y = batchnorm_forward(x, gamma.value, beta.value, state, eps, momentum, mode, &c);
    cache_ = std::move(c);
    return y;
}

template <typename T>
Tensor<T> BatchNorm2d<T>::backward(const Tensor<T>& grad_out) {
    if (!cache_) missing_cache("batch norm");
    auto g = batchnorm_backward(grad_out, gamma.value, *cache_);
    accumulate(gamma.grad, g.gamma);
    accumulate(beta.grad, g.beta);
    return std::move(g.x);
}

template <typename T>
Tensor<T> Relu<T>::forward(const Tensor<T>& x) {
    input_ = x;
    return relu_forward(x);
}

template <typename T>
Tensor<T> Relu<T>::backward(const Tensor<T>& grad_out) {
    if (!input_) missing_cache("relu");
    return relu_backward(grad_out, *input_);
}

template <typename T>
Tensor<T> MaxPool2<T>::forward(const Tensor<T>& x) {
    in_shape_ = x.shape();
    auto r = maxpool2_forward(x);
    argmax_ = std::move(r.argmax);
    return std::move(r.y);
}

template <typename T>
Tensor<T> MaxPool2<T>::backward(const Tensor<T>& grad_out) {
    if (!argmax_) missing_cache("maxpool2");
    return maxpool2_backward(grad_out, *argmax_, in_shape_);
}

template <typename T>
Tensor<T> GlobalAvgPool<T>::forward(const Tensor<T>& x) {
    in_shape_ = x.shape();
    return global_avgpool_forward(x);
}

template <typename T>
Tensor<T> GlobalAvgPool<T>::backward(const Tensor<T>& grad_out) {
    if (!in_shape_) missing_cache("global average pool");
    return global_avgpool_backward(grad_out, *in_shape_);
}

template <typename T>
Tensor<T> Flatten<T>::forward(const Tensor<T>& x) {
    in_shape_ = x.shape();
    return flatten_forward(x);
}

template <typename T>
Tensor<T> Flatten<T>::backward(const Tensor<T>& grad_out) {
    if (!in_shape_) missing_cache("flatten");
    return grad_out.reshaped(*in_shape_);
}

template <typename T>
Dense<T>::Dense(int in_features, int out_features, const std::string& name)
    : weight(name + ".weight", {out_features, in_features}), bias(name + ".bias", {out_features}) {}

template <typename T>
Tensor<T> Dense<T>::forward(const Tensor<T>& x) {
    input_ = x;
    return dense_forward(x, weight.value, bias.value);
}

template <typename T>
Tensor<T> Dense<T>::backward(const Tensor<T>& grad_out) {
    if (!input_) missing_cache("dense");
    auto g = dense_backward(grad_out, *input_, weight.value);
    accumulate(weight.grad, g.w);
    accumulate(bias.grad, g.b);
    return std::move(g.x);
}

template <typename T>
void Dense<T>::init_he_uniform(std::mt19937_64& rng) {
    he_uniform(weight.value, weight.value.dim(1), rng);
    bias.value.fill(T{0});
}

#define NOMADET_INSTANTIATE_LAYERS(T)                                                                            \
    template Tensor<T> conv2d_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, Padding);       \
    template ConvGrads<T> conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, Padding);   \
    template Tensor<T> batchnorm_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,                   \
                                         BatchNormState<T>&, T, T, Mode, BatchNormCache<T>*);                    \
    template BatchNormGrads<T> batchnorm_backward(const Tensor<T>&, const Tensor<T>&, const BatchNormCache<T>&); \
    template Tensor<T> relu_forward(const Tensor<T>&);                                                           \
    template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                                        \
    template MaxPoolResult<T> maxpool2_forward(const Tensor<T>&);                                                \
    template Tensor<T> maxpool2_backward(const Tensor<T>&, const std::vector<std::size_t>&, const Shape&);       \
    template Tensor<T> global_avgpool_forward(const Tensor<T>&);                                                 \
    template Tensor<T> global_avgpool_backward(const Tensor<T>&, const Shape&);                                  \
    template Tensor<T> dense_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                      \
    template DenseGrads<T> dense_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                 \
    template Tensor<T> flatten_forward(const Tensor<T>&);                                                        \
    template class Conv2d<T>;                                                                                    \
    template class BatchNorm2d<T>;                                                                               \
    template class Relu<T>;                                                                                      \
    template class MaxPool2<T>;                                                                                  \
    template class GlobalAvgPool<T>;                                                                             \
    template class Flatten<T>;                                                                                   \
    template class Dense<T>;

NOMADET_INSTANTIATE_LAYERS(float)
NOMADET_INSTANTIATE_LAYERS(double)

#undef NOMADET_INSTANTIATE_LAYERS

}  // namespace nomadet::nn
