#include <gtest/gtest.h>

#include <random>

#include "../common/gradcheck.hpp"
#include "nomadet/error.hpp"

using namespace nomadet;
using namespace nomadet::nn;
using gradcheck::random_tensor;

namespace {

constexpr int kTrials = 20;
constexpr double kTol = 1e-4;

void run_trials(const char* name, double (*check)(std::mt19937_64&)) {
    std::mt19937_64 rng(2024);
    for (int t = 0; t < kTrials; ++t) EXPECT_LE(check(rng), kTol) << name << " trial " << t;
}

}  // namespace

TEST(Conv2d, ScalingKernel) {
    const Tensor<double> x({1, 1, 3, 3}, 1.0), w({1, 1, 1, 1}, 2.0), b({1}, 0.0);
    const auto y = conv2d_forward(x, w, b, 1, Padding::Valid);
    EXPECT_EQ(y.shape(), (Shape{1, 1, 3, 3}));
    for (double v : y.values()) EXPECT_EQ(v, 2.0);
}

TEST(Conv2d, DeltaKernelIsIdentity) {
    std::mt19937_64 rng(1);
    const auto x = random_tensor({2, 1, 6, 6}, rng);
    Tensor<double> w({1, 1, 3, 3}, 0.0), b({1}, 0.0);
    w.at(0, 0, 1, 1) = 1.0;
    EXPECT_EQ(conv2d_forward(x, w, b, 1, Padding::Same), x);
}

TEST(Conv2d, MatchesNestedLoopOracle) {
    std::mt19937_64 rng(7);
    for (int stride : {1, 2})
        for (Padding pad : {Padding::Same, Padding::Valid}) {
            const auto x = random_tensor({1, 2, 5, 5}, rng);
            const auto w = random_tensor({3, 2, 3, 3}, rng);
            const auto b = random_tensor({3}, rng);
            const auto y = conv2d_forward(x, w, b, stride, pad);
            const int p = padding_amount(3, pad);
            const int out = conv_output_size(5, 3, stride, pad);
            ASSERT_EQ(y.shape(), (Shape{1, 3, out, out}));
            for (int o = 0; o < 3; ++o)
                for (int i = 0; i < out; ++i)
                    for (int j = 0; j < out; ++j) {
                        double s = b[static_cast<std::size_t>(o)];
                        for (int c = 0; c < 2; ++c)
                            for (int u = 0; u < 3; ++u)
                                for (int v = 0; v < 3; ++v) {
                                    const int r = i * stride + u - p, q = j * stride + v - p;
                                    if (r >= 0 && r < 5 && q >= 0 && q < 5) s += x.at(0, c, r, q) * w.at(o, c, u, v);
                                }
                        EXPECT_NEAR(y.at(0, o, i, j), s, 1e-12);
                    }
        }
}

TEST(Conv2d, OutputSizeFormula) {
    EXPECT_EQ(conv_output_size(50, 3, 2, Padding::Same), 25);
    EXPECT_EQ(conv_output_size(25, 3, 2, Padding::Same), 13);
    EXPECT_EQ(conv_output_size(13, 3, 2, Padding::Same), 7);
    EXPECT_EQ(conv_output_size(25, 1, 2, Padding::Valid), 13);
    EXPECT_EQ(conv_output_size(7, 3, 1, Padding::Valid), 5);
}

TEST(Conv2d, ShapeMismatchNamesDimensions) {
    const Tensor<double> x({1, 2, 4, 4}), w({1, 3, 3, 3}), b({1});
    try {
        conv2d_forward(x, w, b, 1, Padding::Same);
        FAIL();
    } catch (const ShapeError& e) {
        EXPECT_NE(std::string(e.what()).find('2'), std::string::npos);
        EXPECT_NE(std::string(e.what()).find('3'), std::string::npos);
    }
}

TEST(Conv2d, ZeroGradOutGivesZeroGradients) {
    std::mt19937_64 rng(3);
    const auto x = random_tensor({2, 2, 5, 5}, rng);
    const auto w = random_tensor({3, 2, 3, 3}, rng);
    const auto g = conv2d_backward(Tensor<double>({2, 3, 5, 5}), x, w, 1, Padding::Same);
    for (const auto* t : {&g.x, &g.w, &g.b})
        for (double v : t->values()) EXPECT_EQ(v, 0.0);
}

TEST(Conv2d, SinglePixelGradientIsInputPatch) {
    std::mt19937_64 rng(4);
    const auto x = random_tensor({1, 2, 5, 5}, rng);
    const auto w = random_tensor({1, 2, 3, 3}, rng);
    Tensor<double> go({1, 1, 3, 3});
    go.at(0, 0, 1, 2) = 0.5;
    const auto g = conv2d_backward(go, x, w, 1, Padding::Valid);
    for (int c = 0; c < 2; ++c)
        for (int u = 0; u < 3; ++u)
            for (int v = 0; v < 3; ++v) EXPECT_NEAR(g.w.at(0, c, u, v), 0.5 * x.at(0, c, 1 + u, 2 + v), 1e-15);
    EXPECT_NEAR(g.b[0], 0.5, 1e-15);
}

TEST(Conv2d, ModuleBackwardWithoutForwardIsUsageError) {
    Conv2d<double> c(1, 1, 3, 1, Padding::Same, "c");
    EXPECT_THROW(c.backward(Tensor<double>({1, 1, 3, 3})), UsageError);
}

TEST(BatchNorm, TrainingOutputIsStandardized) {
    std::mt19937_64 rng(9);
    const auto x = random_tensor({8, 3, 4, 4}, rng, -5.0, 9.0);
    BatchNormState<double> st{Tensor<double>({3}, 0.0), Tensor<double>({3}, 1.0)};
    const auto y = batchnorm_forward(x, Tensor<double>({3}, 1.0), Tensor<double>({3}, 0.0), st, 1e-5, 0.9,
                                     Mode::Train, static_cast<BatchNormCache<double>*>(nullptr));
    for (int c = 0; c < 3; ++c) {
        double m = 0.0, v = 0.0;
        for (int n = 0; n < 8; ++n)
            for (int i = 0; i < 16; ++i) m += y.at(n, c, i / 4, i % 4);
        m /= 128.0;
        for (int n = 0; n < 8; ++n)
            for (int i = 0; i < 16; ++i) v += std::pow(y.at(n, c, i / 4, i % 4) - m, 2);
        v /= 128.0;
        EXPECT_LT(std::abs(m), 1e-6);
        EXPECT_NEAR(v, 1.0, 1e-4);
    }
    // Running stats moved toward the batch statistics.
    for (int c = 0; c < 3; ++c) EXPECT_NE(st.running_mean[static_cast<std::size_t>(c)], 0.0);
}

TEST(BatchNorm, InferenceWithUnitStatsIsNearIdentity) {
    std::mt19937_64 rng(10);
    const auto x = random_tensor({2, 2, 3, 3}, rng);
    BatchNormState<double> st{Tensor<double>({2}, 0.0), Tensor<double>({2}, 1.0)};
    const auto y = batchnorm_forward(x, Tensor<double>({2}, 1.0), Tensor<double>({2}, 0.0), st, 1e-5, 0.9,
                                     Mode::Infer, static_cast<BatchNormCache<double>*>(nullptr));
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], x[i], 1e-5);
}

TEST(BatchNorm, SingleSampleTrainingRejected) {
    BatchNormState<double> st{Tensor<double>({2}, 0.0), Tensor<double>({2}, 1.0)};
    EXPECT_THROW(batchnorm_forward(Tensor<double>({1, 2, 3, 3}), Tensor<double>({2}, 1.0), Tensor<double>({2}), st,
                                   1e-5, 0.9, Mode::Train, static_cast<BatchNormCache<double>*>(nullptr)),
                 DomainError);
}

TEST(Relu, Definition) {
    const Tensor<double> x({2}, std::vector<double>{-1.0, 2.0});
    EXPECT_EQ(relu_forward(x).values()[0], 0.0);
    EXPECT_EQ(relu_forward(x).values()[1], 2.0);
}

TEST(MaxPool, RoutesGradientToMaximum) {
    const Tensor<double> x({1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4});
    const auto r = maxpool2_forward(x);
    ASSERT_EQ(r.y.size(), 1U);
    EXPECT_EQ(r.y[0], 4.0);
    const auto g = maxpool2_backward(Tensor<double>({1, 1, 1, 1}, 1.0), r.argmax, x.shape());
    EXPECT_EQ(g.values()[3], 1.0);
    EXPECT_EQ(g.values()[0] + g.values()[1] + g.values()[2], 0.0);
}

TEST(Dense, ShapeErrors) {
    EXPECT_THROW(dense_forward(Tensor<double>({2, 3}), Tensor<double>({4, 5}), Tensor<double>({4})), ShapeError);
}

TEST(GradientCheck, Conv) { run_trials("conv", gradcheck::check_conv); }
TEST(GradientCheck, BatchNorm) { run_trials("batchnorm", gradcheck::check_batchnorm); }
TEST(GradientCheck, Relu) { run_trials("relu", gradcheck::check_relu); }
TEST(GradientCheck, MaxPool) { run_trials("maxpool", gradcheck::check_maxpool); }
TEST(GradientCheck, AvgPool) { run_trials("avgpool", gradcheck::check_avgpool); }
TEST(GradientCheck, Dense) { run_trials("dense", gradcheck::check_dense); }
TEST(GradientCheck, Flatten) { run_trials("flatten", gradcheck::check_flatten); }
TEST(GradientCheck, SoftmaxCrossEntropy) { run_trials("softmax_ce", gradcheck::check_softmax_ce); }

TEST(GradientCheck, IdentityBlock) {
    std::mt19937_64 rng(31);
    for (int t = 0; t < kTrials; ++t) EXPECT_LE(gradcheck::check_block(rng, BlockKind::Identity), kTol) << t;
}

TEST(GradientCheck, ConvBlock) {
    std::mt19937_64 rng(32);
    for (int t = 0; t < kTrials; ++t) EXPECT_LE(gradcheck::check_block(rng, BlockKind::Conv), kTol) << t;
}

TEST(GradientCheck, TinyNetwork) {
    std::mt19937_64 rng(33);
    for (int t = 0; t < 5; ++t) EXPECT_LE(gradcheck::check_network(rng), 1e-3) << t;
}
