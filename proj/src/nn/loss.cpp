#include "nomadet/nn/loss.hpp"

#include <cmath>

namespace nomadet::nn {

namespace {

template <typename T>
void require_matrix(const Tensor<T>& logits) {
    if (logits.rank() != 2) throw ShapeError("logits must be B x T, got " + shape_str(logits.shape()));
}

}  // namespace

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
    require_matrix(logits);
    const int b = logits.dim(0), k = logits.dim(1);
    Tensor<T> p(logits.shape());
    for (int i = 0; i < b; ++i) {
        const T* row = logits.data() + static_cast<std::size_t>(i) * k;
        T mx = row[0];
        for (int j = 1; j < k; ++j) mx = std::max(mx, row[j]);
        double z = 0.0;
        for (int j = 0; j < k; ++j) z += std::exp(static_cast<double>(row[j] - mx));
        for (int j = 0; j < k; ++j)
            p[static_cast<std::size_t>(i) * k + j] = static_cast<T>(std::exp(static_cast<double>(row[j] - mx)) / z);
    }
    return p;
}

template <typename T>
Tensor<T> one_hot(std::span<const int> labels, int classes) {
    if (labels.empty()) throw ShapeError("one_hot needs at least one label");
    Tensor<T> y({static_cast<int>(labels.size()), classes});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= classes)
            throw DomainError("label " + std::to_string(labels[i]) + " outside [0, " + std::to_string(classes) + ")");
        y[i * static_cast<std::size_t>(classes) + static_cast<std::size_t>(labels[i])] = T{1};
    }
    return y;
}

template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, const Tensor<T>& targets) {
    require_matrix(logits);
    if (targets.shape() != logits.shape())
        throw ShapeError("targets " + shape_str(targets.shape()) + " do not match logits " + shape_str(logits.shape()));
    const int b = logits.dim(0), k = logits.dim(1);
    double total = 0.0;
    LossResult<T> r{T{0}, Tensor<T>(logits.shape())};
    for (int i = 0; i < b; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * k;
        int hot = -1;
        for (int j = 0; j < k; ++j) {
            const T y = targets[off + j];
            if (y == T{1} && hot < 0)
                hot = j;
            else if (y != T{0})
                throw DomainError("target row " + std::to_string(i) + " is not one-hot");
        }
        if (hot < 0) throw DomainError("target row " + std::to_string(i) + " is not one-hot");
        int top = 0;
        for (int j = 1; j < k; ++j)
            if (logits[off + j] > logits[off + top]) top = j;
        const double mx = logits[off + top];
        // log1p keeps tiny losses of confident rows from rounding to 0
        double rest = 0.0;
        for (int j = 0; j < k; ++j)
            if (j != top) rest += std::exp(logits[off + j] - mx);
        const double log_z = std::log1p(rest);
        const double lse = mx + log_z;
        total += (mx - logits[off + static_cast<std::size_t>(hot)]) + log_z;
        for (int j = 0; j < k; ++j) {
            const double p = std::exp(logits[off + j] - lse);
            r.grad[off + j] = static_cast<T>((p - (j == hot ? 1.0 : 0.0)) / b);
        }
    }
    r.loss = static_cast<T>(total / b);
    return r;
}

template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
    require_matrix(logits);
    if (labels.size() != static_cast<std::size_t>(logits.dim(0)))
        throw ShapeError("label count does not match the logit batch");
    return softmax_cross_entropy(logits, one_hot<T>(labels, logits.dim(1)));
}

template Tensor<float> softmax(const Tensor<float>&);
template Tensor<double> softmax(const Tensor<double>&);
template Tensor<float> one_hot(std::span<const int>, int);
template Tensor<double> one_hot(std::span<const int>, int);
template LossResult<float> softmax_cross_entropy(const Tensor<float>&, const Tensor<float>&);
template LossResult<double> softmax_cross_entropy(const Tensor<double>&, const Tensor<double>&);
template LossResult<float> softmax_cross_entropy(const Tensor<float>&, std::span<const int>);
template LossResult<double> softmax_cross_entropy(const Tensor<double>&, std::span<const int>);

}  // namespace nomadet::nn
