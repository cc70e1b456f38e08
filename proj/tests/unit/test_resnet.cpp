#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "../common/gradcheck.hpp"
#include "nomadet/error.hpp"
#include "nomadet/nn/checkpoint.hpp"
#include "nomadet/nn/train.hpp"

using namespace nomadet;
using namespace nomadet::nn;

namespace {

// Hand count: stem 416 + bn 32; CONV32 14624, ID32 18624, CONV64 57920, ID64 74112,
// CONV128 230528, ID128 295680; head 516.
constexpr std::size_t kDefaultParameterCount = 692452;

DensityDiagram random_diagram(std::mt19937_64& rng) {
    std::uniform_real_distribution<float> u(0.0F, 1.0F);
    DensityDiagram d;
    d.grid_size = 100;
    d.grid.resize(100 * 100);
    for (auto& v : d.grid) v = u(rng);
    return d;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("nomadet_" + name);
}

}  // namespace

TEST(Arch, DefaultShapeInference) {
    const auto shapes = infer_shapes(ArchConfig{});
    const std::vector<int> spatial{100, 50, 25, 25, 13, 13, 7, 7, 1, 1};
    ASSERT_EQ(shapes.size(), spatial.size());
    for (std::size_t i = 0; i < shapes.size(); ++i) EXPECT_EQ(shapes[i].height, spatial[i]) << shapes[i].name;
    EXPECT_EQ(shapes.back().channels, 4);
    std::size_t blocks = 0;
    for (const auto& b : ArchConfig{}.blocks) blocks += 1, (void)b;
    EXPECT_EQ(blocks, 6U);
}

TEST(Arch, RejectsInconsistentIdBlock) {
    ArchConfig c;
    c.blocks = {{BlockKind::Conv, 32}, {BlockKind::Identity, 48}};
    EXPECT_THROW(c.validate(), ShapeError);
}

TEST(Arch, ParameterCountIsPinned) {
    Model m;
    EXPECT_EQ(m.parameter_count(), kDefaultParameterCount);
}

TEST(Model, ForwardShapeAndFiniteLogits) {
    std::mt19937_64 rng(1);
    const Model m(ArchConfig{}, 3);
    std::vector<DensityDiagram> ds{random_diagram(rng), random_diagram(rng)};
    const auto logits = forward(m, ds);
    EXPECT_EQ(logits.shape(), (Shape{2, 4}));
    for (float v : logits.values()) EXPECT_TRUE(std::isfinite(v));
    EXPECT_EQ(forward(m, ds), logits);
}

TEST(Model, PredictIsADistribution) {
    std::mt19937_64 rng(2);
    const Model m(ArchConfig{}, 4);
    for (int i = 0; i < 3; ++i) {
        const auto p = predict(m, random_diagram(rng));
        ASSERT_EQ(p.size(), 4U);
        for (double v : p) EXPECT_GE(v, 0.0);
        EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-6);
    }
}

TEST(Model, WrongInputSizeNamesExpectedShape) {
    const Model m;
    DensityDiagram d;
    d.grid_size = 64;
    d.grid.assign(64 * 64, 0.0F);
    try {
        forward(m, std::span<const DensityDiagram>(&d, 1));
        FAIL();
    } catch (const ShapeError& e) {
        EXPECT_NE(std::string(e.what()).find("100 x 100"), std::string::npos) << e.what();
    }
}

TEST(Model, TrainAndInferAgreeAfterStatsSettle) {
    // Inference mode with running stats equal to the batch stats reproduces training mode.
    ArchConfig cfg;
    cfg.input_size = 12;
    cfg.blocks = {{BlockKind::Conv, 8}, {BlockKind::Identity, 8}};
    cfg.bn_momentum = 0.0F;
    ResNet<double> net(cfg, 5);
    std::mt19937_64 rng(6);
    const auto x = gradcheck::random_tensor({6, 1, 12, 12}, rng, 0.0, 1.0);
    const auto a = net.forward(x, Mode::Train);
    // momentum 0 copies batch stats; unbiased running variance differs by n/(n-1)
    const auto b = net.infer(x);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 0.05 * (1.0 + std::abs(a[i])));
}

TEST(ResidualBlock, ZeroBranchIdentityOnNonnegativeInput) {
    ResidualBlock<double> b(BlockKind::Identity, 3, 3, 1e-5, 0.9, "id");
    std::vector<Param<double>*> ps;
    b.collect(ps);
    for (auto* p : ps) p->value.fill(0.0);
    std::mt19937_64 rng(8);
    const auto x = gradcheck::random_tensor({2, 3, 5, 5}, rng, 0.0, 2.0);
    EXPECT_EQ(b.forward(x, Mode::Train), x);
    EXPECT_EQ(b.infer(x), x);
}

TEST(ResidualBlock, ConvBlockHalvesSpatialSize) {
    ResidualBlock<double> b(BlockKind::Conv, 3, 5, 1e-5, 0.9, "c");
    std::mt19937_64 rng(9);
    b.init(rng);
    const auto y = b.forward(gradcheck::random_tensor({2, 3, 8, 8}, rng), Mode::Train);
    EXPECT_EQ(y.shape(), (Shape{2, 5, 4, 4}));
}

TEST(ResidualBlock, IdBlockRejectsChannelChange) {
    EXPECT_THROW(ResidualBlock<double>(BlockKind::Identity, 3, 4, 1e-5, 0.9, "x"), ShapeError);
}

TEST(Checkpoint, RoundTrip) {
    Model m(ArchConfig{}, 11);
    // Non-default running stats must survive too.
    std::mt19937_64 rng(12);
    for (auto* t : m.state_tensors())
        for (auto& v : t->values()) v += 0.01F * static_cast<float>(rng() % 7);
    const auto path = temp_file("roundtrip.nmdl");
    save_checkpoint(m, path);
    auto back = load_checkpoint(path);
    EXPECT_EQ(back.config(), m.config());
    EXPECT_EQ(back.snapshot(), m.snapshot());
    std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsBadMagicVersionAndTruncation) {
    ArchConfig cfg;
    cfg.input_size = 16;
    cfg.blocks = {{BlockKind::Conv, 8}};
    Model m(cfg, 1);
    const auto path = temp_file("bad.nmdl");
    save_checkpoint(m, path);
    std::string bytes;
    {
        std::ifstream is(path, std::ios::binary);
        bytes.assign(std::istreambuf_iterator<char>(is), {});
    }
    const auto write = [&](const std::string& b) {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        os << b;
    };
    auto bad = bytes;
    bad[0] = 'X';
    write(bad);
    EXPECT_THROW(load_checkpoint(path), BadMagicError);
    bad = bytes;
    bad[4] = 9;
    write(bad);
    EXPECT_THROW(load_checkpoint(path), VersionMismatchError);
    write(bytes.substr(0, bytes.size() / 2));
    EXPECT_THROW(load_checkpoint(path), TruncatedError);
    std::filesystem::remove(path);
}
