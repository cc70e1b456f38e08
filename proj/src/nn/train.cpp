#include "nomadet/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "nomadet/nn/loss.hpp"

namespace nomadet::nn {

void TrainConfig::validate() const {
    if (epochs < 1) throw DomainError("epochs must be >= 1");
    if (batch_size < 2) throw DomainError("batch size must be >= 2 (batch norm needs batch statistics)");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw DomainError("learning rate must be >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw DomainError("Adam betas must be in [0, 1)");
    if (!(adam_eps > 0.0)) throw DomainError("Adam epsilon must be positive");
    if (patience < 0) throw DomainError("patience must be >= 0");
    if (min_epochs < 0) throw DomainError("min_epochs must be >= 0");
}

Adam::Adam(const std::vector<Param<float>*>& params, const TrainConfig& cfg)
    : lr_(cfg.learning_rate), b1_(cfg.beta1), b2_(cfg.beta2), eps_(cfg.adam_eps) {
    for (const auto* p : params) {
        m_.emplace_back(p->value.size(), 0.0F);
        v_.emplace_back(p->value.size(), 0.0F);
    }
}

void Adam::step(const std::vector<Param<float>*>& params) {
    if (params.size() != m_.size()) throw UsageError("optimizer was built for a different parameter list");
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    const auto b1 = static_cast<float>(b1_), b2 = static_cast<float>(b2_);
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& w = params[k]->value;
        const auto& g = params[k]->grad;
        auto& m = m_[k];
        auto& v = v_[k];
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = b1 * m[i] + (1.0F - b1) * g[i];
            v[i] = b2 * v[i] + (1.0F - b2) * g[i] * g[i];
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            w[i] -= static_cast<float>(lr_ * mhat / (std::sqrt(vhat) + eps_));
        }
    }
}

Tensor<float> make_batch(std::span<const LabeledSample> samples, std::span<const std::size_t> indices) {
    if (indices.empty()) throw ShapeError("cannot build an empty batch");
    const int s = samples[indices[0]].diagram.grid_size;
    const std::size_t px = static_cast<std::size_t>(s) * s;
    Tensor<float> x({static_cast<int>(indices.size()), 1, s, s});
    for (std::size_t b = 0; b < indices.size(); ++b) {
        const auto& d = samples[indices[b]].diagram;
        if (d.grid_size != s) throw ShapeError("diagrams in one batch must share a grid size");
        std::copy(d.grid.begin(), d.grid.end(), x.data() + b * px);
    }
    return x;
}

Tensor<float> make_batch(std::span<const DensityDiagram> diagrams) {
    if (diagrams.empty()) throw ShapeError("cannot build an empty batch");
    const int s = diagrams[0].grid_size;
    const std::size_t px = static_cast<std::size_t>(s) * s;
    Tensor<float> x({static_cast<int>(diagrams.size()), 1, s, s});
    for (std::size_t b = 0; b < diagrams.size(); ++b) {
        if (diagrams[b].grid_size != s) throw ShapeError("diagrams in one batch must share a grid size");
        std::copy(diagrams[b].grid.begin(), diagrams[b].grid.end(), x.data() + b * px);
    }
    return x;
}

Tensor<float> forward(const Model& model, std::span<const DensityDiagram> diagrams) {
    return model.infer(make_batch(diagrams));
}

std::vector<double> predict(const Model& model, const DensityDiagram& diagram) {
    const auto logits = forward(model, std::span<const DensityDiagram>(&diagram, 1)).cast<double>();
    const auto p = softmax(logits);
    return {p.values().begin(), p.values().end()};
}

namespace {

int argmax_row(const Tensor<float>& logits, int row) {
    const int k = logits.dim(1);
    const float* r = logits.data() + static_cast<std::size_t>(row) * k;
    return static_cast<int>(std::max_element(r, r + k) - r);
}

}  // namespace

std::vector<int> predict_labels(const Model& model, std::span<const LabeledSample> samples, int batch_size) {
    std::vector<int> out;
    out.reserve(samples.size());
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < samples.size(); start += static_cast<std::size_t>(batch_size)) {
        idx.clear();
        for (std::size_t i = start; i < std::min(samples.size(), start + static_cast<std::size_t>(batch_size)); ++i)
            idx.push_back(i);
        const auto logits = model.infer(make_batch(samples, idx));
        for (int b = 0; b < logits.dim(0); ++b) out.push_back(argmax_row(logits, b));
    }
    return out;
}

void refresh_batchnorm(Model& model, std::span<const LabeledSample> samples, int batch_size) {
    if (samples.size() < 2) throw DomainError("batch-norm refresh needs at least 2 samples");
    auto bns = model.batchnorms();
    std::vector<float> keep;
    for (auto* bn : bns) keep.push_back(bn->momentum);
    std::vector<std::size_t> idx;
    const auto bs = static_cast<std::size_t>(batch_size);
    int k = 0;
    for (std::size_t start = 0; start < samples.size();) {
        std::size_t end = std::min(samples.size(), start + bs);
        if (samples.size() - end == 1) ++end;
        idx.clear();
        for (std::size_t i = start; i < end; ++i) idx.push_back(i);
        // momentum k/(k+1) turns the running update into a plain mean over batches
        for (auto* bn : bns) bn->momentum = static_cast<float>(k) / static_cast<float>(k + 1);
        (void)model.forward(make_batch(samples, idx), Mode::Train);
        ++k;
        start = end;
    }
    for (std::size_t i = 0; i < bns.size(); ++i) bns[i]->momentum = keep[i];
}

TrainHistory train(Model& model, std::span<const LabeledSample> train_set, std::span<const LabeledSample> val_set,
                   const TrainConfig& cfg) {
    cfg.validate();
    if (train_set.empty()) throw DomainError("training split is empty");
    if (val_set.empty()) throw DomainError("validation split is empty");
    if (train_set.size() < 2) throw DomainError("training split needs at least 2 samples");
    const int classes = model.config().classes;
    for (const auto* set : {&train_set, &val_set})
        for (const auto& s : *set)
            if (s.label >= classes) throw DomainError("label " + std::to_string(s.label) + " outside the class range");
    // ReLU maps NaN to 0, so a poisoned input would otherwise train silently.
    for (const auto* set : {&train_set, &val_set})
        for (std::size_t i = 0; i < set->size(); ++i)
            for (float v : (*set)[i].diagram.grid)
                if (!std::isfinite(v)) throw NumericError("non-finite value in diagram of sample " + std::to_string(i));

    auto params = model.params();
    Adam opt(params, cfg);
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainHistory hist;
    std::vector<Tensor<float>> best;
    int since_best = 0;
    const auto bs = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        std::size_t correct = 0;
        std::size_t start = 0;
        while (start < order.size()) {
            std::size_t end = std::min(order.size(), start + bs);
            if (order.size() - end == 1) ++end;  // never leave a batch of one behind
            const std::span<const std::size_t> idx(order.data() + start, end - start);
            std::vector<int> labels;
            labels.reserve(idx.size());
            for (auto i : idx) labels.push_back(train_set[i].label);

            model.zero_grad();
            const auto logits = model.forward(make_batch(train_set, idx), Mode::Train);
            const auto loss = softmax_cross_entropy(logits, std::span<const int>(labels));
            if (!std::isfinite(loss.loss)) throw NumericError("training loss became non-finite at epoch " + std::to_string(epoch));
            model.backward(loss.grad);
            opt.step(params);

            loss_sum += static_cast<double>(loss.loss) * static_cast<double>(idx.size());
            for (int b = 0; b < logits.dim(0); ++b)
                if (argmax_row(logits, b) == labels[static_cast<std::size_t>(b)]) ++correct;
            start = end;
        }

        if (cfg.refresh_bn) refresh_batchnorm(model, train_set, cfg.batch_size);
        const auto preds = predict_labels(model, val_set);
        std::size_t val_correct = 0;
        for (std::size_t i = 0; i < preds.size(); ++i)
            if (preds[i] == val_set[i].label) ++val_correct;

        const auto n = static_cast<double>(train_set.size());
        const EpochRecord rec{epoch, loss_sum / n, static_cast<double>(correct) / n,
                              static_cast<double>(val_correct) / static_cast<double>(val_set.size())};
        hist.epochs.push_back(rec);

        if (hist.best_epoch < 0 || rec.val_accuracy > hist.best_val_accuracy) {
            hist.best_epoch = epoch;
            hist.best_val_accuracy = rec.val_accuracy;
            best = model.snapshot();
            since_best = 0;
        } else if (++since_best >= cfg.patience && cfg.patience > 0 && epoch >= cfg.min_epochs) {
            break;
        }
    }
    model.restore(best);
    return hist;
}

}  // namespace nomadet::nn
