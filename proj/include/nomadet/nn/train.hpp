#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nomadet/nn/resnet.hpp"
#include "nomadet/sample.hpp"

namespace nomadet::nn {

struct TrainConfig {
    int epochs = 30;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int patience = 5;  ///< epochs without validation improvement before stopping; 0 disables
    int min_epochs = 0;  ///< no early stop before this epoch
    bool refresh_bn = true;  ///< recompute BN running stats over the training set after each epoch
    std::uint64_t seed = 7;

    void validate() const;
};

struct EpochRecord {
    int epoch;
    double train_loss;      ///< mean minibatch loss (training mode)
    double train_accuracy;  ///< minibatch predictions made during the epoch
    double val_accuracy;    ///< inference mode

    bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    int best_epoch = -1;
    double best_val_accuracy = 0.0;

    bool operator==(const TrainHistory&) const = default;
};

class Adam {
public:
    Adam(const std::vector<Param<float>*>& params, const TrainConfig& cfg);
    void step(const std::vector<Param<float>*>& params);

private:
    std::vector<std::vector<float>> m_, v_;
    double lr_, b1_, b2_, eps_;
    long long t_ = 0;
};

/// Stacks diagrams into a B x 1 x S x S batch.
Tensor<float> make_batch(std::span<const LabeledSample> samples, std::span<const std::size_t> indices);
Tensor<float> make_batch(std::span<const DensityDiagram> diagrams);

/// Inference-mode logits, B x classes.
Tensor<float> forward(const Model& model, std::span<const DensityDiagram> diagrams);
/// Class distribution for one diagram.
std::vector<double> predict(const Model& model, const DensityDiagram& diagram);
std::vector<int> predict_labels(const Model& model, std::span<const LabeledSample> samples, int batch_size = 32);

/// Replaces every BN running mean/variance by the average of per-batch
/// statistics over `samples` under the current weights. Parameters untouched.
void refresh_batchnorm(Model& model, std::span<const LabeledSample> samples, int batch_size);

/// Minibatch Adam on softmax cross-entropy. Returns the history; the model
/// ends up holding the weights of the best validation epoch.
TrainHistory train(Model& model, std::span<const LabeledSample> train_set, std::span<const LabeledSample> val_set,
                   const TrainConfig& cfg);

}  // namespace nomadet::nn
