#pragma once

#include <span>

#include "nomadet/nn/tensor.hpp"

namespace nomadet::nn {

template <typename T>
struct LossResult {
    T loss;          ///< mean over the batch
    Tensor<T> grad;  ///< d loss / d logits = (softmax - y) / B
};

/// Row-wise softmax, log-sum-exp stabilized.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

template <typename T>
Tensor<T> one_hot(std::span<const int> labels, int classes);

/// Mean of -sum_i y_i ln softmax(a)_i over the batch. `targets` must be one-hot rows.
template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, const Tensor<T>& targets);

template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels);

}  // namespace nomadet::nn
