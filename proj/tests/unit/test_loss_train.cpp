#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "../common/fixtures.hpp"
#include "nomadet/error.hpp"
#include "nomadet/nn/loss.hpp"
#include "nomadet/nn/train.hpp"

using namespace nomadet;
using namespace nomadet::nn;

TEST(Loss, UniformLogitsGiveLogClassCount) {
    const Tensor<double> logits({3, 4}, 0.7);
    const std::vector<int> labels{0, 2, 3};
    EXPECT_NEAR(softmax_cross_entropy(logits, std::span<const int>(labels)).loss, std::log(4.0), 1e-12);
}

TEST(Loss, DecreasesAsTrueLogitGrows) {
    double prev = INFINITY;
    const std::vector<int> labels{1};
    for (double z = 0.0; z < 40.0; z += 2.0) {
        Tensor<double> logits({1, 4}, std::vector<double>{0.3, z, -0.2, 0.1});
        const double l = softmax_cross_entropy(logits, std::span<const int>(labels)).loss;
        EXPECT_GE(l, 0.0);
        EXPECT_LT(l, prev);
        prev = l;
    }
    EXPECT_LT(prev, 1e-15);
}

TEST(Loss, MatchesHighPrecisionOracle) {
    std::ifstream is(std::string(NOMADET_TEST_DATA) + "/reference_values.json");
    const auto ref = nlohmann::json::parse(is)["softmax_ce"];
    const auto rows = ref["logits"].get<std::vector<std::vector<double>>>();
    std::vector<double> flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    const Tensor<double> logits({static_cast<int>(rows.size()), 4}, flat);
    const auto labels = ref["labels"].get<std::vector<int>>();
    EXPECT_NEAR(softmax_cross_entropy(logits, std::span<const int>(labels)).loss, ref["mean_loss"].get<double>(), 1e-10);
}

TEST(Loss, GradientIsSoftmaxMinusTargetOverBatch) {
    const Tensor<double> logits({2, 4}, std::vector<double>{1, 2, 3, 4, 0, 0, 0, 0});
    const std::vector<int> labels{3, 0};
    const auto r = softmax_cross_entropy(logits, std::span<const int>(labels));
    const auto p = softmax(logits);
    for (int b = 0; b < 2; ++b)
        for (int k = 0; k < 4; ++k) {
            const std::size_t i = static_cast<std::size_t>(b * 4 + k);
            EXPECT_NEAR(r.grad[i], (p[i] - (k == labels[static_cast<std::size_t>(b)] ? 1.0 : 0.0)) / 2.0, 1e-15);
        }
}

TEST(Loss, StableForHugeLogits) {
    const Tensor<double> logits({1, 4}, std::vector<double>{1000, -1000, 0, 500});
    const std::vector<int> labels{1};
    const auto r = softmax_cross_entropy(logits, std::span<const int>(labels));
    EXPECT_TRUE(std::isfinite(r.loss));
    EXPECT_NEAR(r.loss, 2000.0, 1e-9);
}

TEST(Loss, RejectsNonOneHotTargets) {
    const Tensor<double> logits({1, 4});
    EXPECT_THROW(softmax_cross_entropy(logits, Tensor<double>({1, 4}, std::vector<double>{0.5, 0.5, 0, 0})),
                 DomainError);
    EXPECT_THROW(softmax_cross_entropy(logits, Tensor<double>({1, 4}, std::vector<double>{0, 0, 0, 0})), DomainError);
}

TEST(Train, OverfitsToyDiagrams) {
    const auto data = fixtures::toy_diagrams();
    Model m(ArchConfig{}, 1);
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.patience = 0;
    const auto h = train(m, data, data, cfg);
    ASSERT_GE(h.epochs.size(), 5U);
    for (std::size_t e = 1; e < 5; ++e) EXPECT_LT(h.epochs[e].train_loss, h.epochs[e - 1].train_loss) << e;
    bool perfect = false;
    for (const auto& r : h.epochs) perfect = perfect || r.train_accuracy == 1.0;
    EXPECT_TRUE(perfect);
}

TEST(Train, ZeroLearningRateLeavesWeights) {
    const auto data = fixtures::toy_diagrams();
    ArchConfig arch;
    Model m(arch, 2);
    std::vector<Tensor<float>> before;
    for (auto* p : m.params()) before.push_back(p->value);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.learning_rate = 0.0;
    cfg.patience = 0;
    const auto h = train(m, data, data, cfg);
    const auto ps = m.params();
    for (std::size_t i = 0; i < ps.size(); ++i) EXPECT_EQ(ps[i]->value, before[i]) << ps[i]->name;
    for (std::size_t e = 1; e < h.epochs.size(); ++e) EXPECT_NEAR(h.epochs[e].train_loss, h.epochs[0].train_loss, 1e-6);
}

TEST(Train, SameSeedSameHistory) {
    const auto data = fixtures::toy_diagrams();
    TrainConfig cfg;
    cfg.epochs = 3;
    Model a(ArchConfig{}, 9), b(ArchConfig{}, 9);
    EXPECT_EQ(train(a, data, data, cfg), train(b, data, data, cfg));
    EXPECT_EQ(a.snapshot(), b.snapshot());
}

TEST(Train, EmptySplitsRejected) {
    const auto data = fixtures::toy_diagrams();
    Model m;
    EXPECT_THROW(train(m, {}, data, TrainConfig{}), DomainError);
    EXPECT_THROW(train(m, data, {}, TrainConfig{}), DomainError);
}

TEST(TrainConfig, Validation) {
    TrainConfig c;
    c.batch_size = 1;
    EXPECT_THROW(c.validate(), DomainError);
    c = {};
    c.beta1 = 1.0;
    EXPECT_THROW(c.validate(), DomainError);
}

TEST(Train, BatchNormRefreshForgetsPriorRunningStats) {
    const auto data = fixtures::toy_diagrams();
    Model a(ArchConfig{}, 4), b(ArchConfig{}, 4);
    for (auto* bn : b.batchnorms()) {
        std::fill(bn->state.running_mean.values().begin(), bn->state.running_mean.values().end(), 3.0F);
        std::fill(bn->state.running_var.values().begin(), bn->state.running_var.values().end(), 0.1F);
    }
    std::vector<Tensor<float>> before;
    for (auto* p : a.params()) before.push_back(p->value);
    refresh_batchnorm(a, data, 8);
    refresh_batchnorm(b, data, 8);
    const auto ba = a.batchnorms(), bb = b.batchnorms();
    ASSERT_EQ(ba.size(), bb.size());
    for (std::size_t i = 0; i < ba.size(); ++i) {
        EXPECT_EQ(ba[i]->state.running_mean, bb[i]->state.running_mean) << i;
        EXPECT_EQ(ba[i]->state.running_var, bb[i]->state.running_var) << i;
        EXPECT_FLOAT_EQ(ba[i]->momentum, bb[i]->momentum);
    }
    // weights untouched
    const auto pa = a.params();
    for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, before[i]) << pa[i]->name;
}
