// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
//   acceptance [--workdir DIR] [--only 1,2,...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "nomadet/baseline.hpp"
#include "nomadet/density.hpp"
#include "nomadet/harness.hpp"
#include "nomadet/nn/loss.hpp"
#include "nomadet/nn/train.hpp"
#include "nomadet/wavelet.hpp"

using namespace nomadet;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

std::vector<double> gaussian(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<double> x(n);
    for (auto& v : x) v = g(rng);
    return x;
}

// -- 1 ---------------------------------------------------------------------------

Outcome wavelet_correctness() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    double worst_rt = 0.0, worst_parseval = 0.0;
    const std::size_t lengths[] = {64, 512, 1000, 2000};
    for (int t = 0; t < 100; ++t) {
        const auto n = lengths[t % 4];
        WaveletSpec spec;
        spec.level = 1 + t % 3;
        const auto x = gaussian(n, rng);
        const auto c = dwt_multilevel(x, spec);
        double ex = 0.0, ec = 0.0, err = 0.0;
        for (double v : x) ex += v * v;
        for (double v : c.approximation) ec += v * v;
        for (const auto& d : c.details)
            for (double v : d) ec += v * v;
        const auto y = idwt_multilevel(c, spec);
        if (y.size() != n) return {false, "round trip changed the length"};
        for (std::size_t i = 0; i < n; ++i) err += (y[i] - x[i]) * (y[i] - x[i]);
        worst_rt = std::max(worst_rt, std::sqrt(err / ex));
        worst_parseval = std::max(worst_parseval, std::abs(ec - ex) / ex);
    }
    const auto h = wavelet_lowpass("sym8");
    double sum = 0.0;
    for (double v : h) sum += v;
    const double sum_err = std::abs(sum - std::numbers::sqrt2);
    const double ortho = filter_orthogonality_error(h);
    const double secs = seconds_since(t0);
    const bool ok = worst_rt <= 1e-10 && worst_parseval <= 1e-9 && sum_err <= 1e-10 && ortho <= 1e-10 && secs < 5.0;
    return {ok, fmt("round trip %.2e, Parseval %.2e, |sum h - sqrt2| %.2e, orthogonality %.2e", worst_rt,
                    worst_parseval, sum_err, ortho) +
                    fmt(", %.2fs", secs)};
}

// -- 2 ---------------------------------------------------------------------------

Outcome gradient_suite() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(202);
    using Check = std::function<double(std::mt19937_64&)>;
    const std::pair<const char*, Check> checks[] = {
        {"conv", gradcheck::check_conv},
        {"batchnorm", gradcheck::check_batchnorm},
        {"relu", gradcheck::check_relu},
        {"maxpool", gradcheck::check_maxpool},
        {"avgpool", gradcheck::check_avgpool},
        {"dense", gradcheck::check_dense},
        {"flatten", gradcheck::check_flatten},
        {"softmax_ce", gradcheck::check_softmax_ce},
        {"conv_block", [](std::mt19937_64& r) { return gradcheck::check_block(r, nn::BlockKind::Conv); }},
        {"id_block", [](std::mt19937_64& r) { return gradcheck::check_block(r, nn::BlockKind::Identity); }},
    };
    double worst = 0.0;
    std::string worst_name;
    for (const auto& [name, fn] : checks)
        for (int t = 0; t < 20; ++t) {
            const double e = fn(rng);
            if (!(e <= worst)) {
                worst = e;
                worst_name = name;
            }
        }
    const double secs = seconds_since(t0);
    return {worst <= 1e-4 && secs < 60.0,
            fmt("worst relative error %.2e", worst) + " (" + worst_name + ")" + fmt(", %.1fs", secs)};
}

// -- 3 ---------------------------------------------------------------------------

Outcome loss_sanity() {
    const nn::Tensor<double> logits({3, 4});
    const std::vector<int> labels{0, 2, 3};
    const double uniform = nn::softmax_cross_entropy(logits, std::span<const int>(labels)).loss;
    const double loss_err = std::abs(uniform - std::log(4.0));

    const auto data = fixtures::toy_diagrams();
    nn::Model m(nn::ArchConfig{}, 1);
    nn::TrainConfig cfg;
    cfg.epochs = 50;
    cfg.patience = 0;
    const auto h = nn::train(m, data, data, cfg);
    bool decreasing = h.epochs.size() >= 5;
    for (std::size_t e = 1; decreasing && e < 5; ++e) decreasing = h.epochs[e].train_loss < h.epochs[e - 1].train_loss;
    int perfect_at = -1;
    for (const auto& r : h.epochs)
        if (r.train_accuracy == 1.0) {
            perfect_at = r.epoch;
            break;
        }
    const bool ok = loss_err <= 1e-9 && decreasing && perfect_at > 0;
    return {ok, fmt("|L - ln4| %.1e, ", loss_err) + (decreasing ? "loss decreasing over 5 epochs" : "loss NOT decreasing") +
                    (perfect_at > 0 ? ", 100% train accuracy at epoch " + std::to_string(perfect_at)
                                    : ", never reached 100% train accuracy")};
}

// -- 4 ---------------------------------------------------------------------------

Outcome density_algebra() {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> off(-10.0, 10.0), logscale(-3.0, 3.0);
    int broken = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        NomaScenario sc;
        sc.symbols_per_frame = 2000;
        sc.samples_per_symbol = 1;
        sc.far_scheme = scheme_from_index(static_cast<int>(seed % 4));
        const auto s = generate_noma_frame(sc, seed).received;
        const auto base = density_diagram(s);
        std::vector<cplx> v(s.samples().begin(), s.samples().end());

        double total = 0.0;
        bool in_range = true;
        for (float g : base.grid) {
            total += g;
            in_range = in_range && g >= 0.0F && g <= 1.0F;
        }
        const auto counts = density_counts(s, base.grid_size);
        std::uint64_t n = 0;
        for (auto c : counts) n += c;

        const cplx shift(off(rng), off(rng));
        const double scale = std::exp(logscale(rng));
        std::vector<cplx> moved(v), scaled(v), shuffled(v);
        for (auto& c : moved) c += shift;
        for (auto& c : scaled) c *= scale;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const bool ok = density_diagram(SignalFrame(moved)).grid == base.grid &&
                        density_diagram(SignalFrame(scaled)).grid == base.grid &&
                        density_diagram(SignalFrame(shuffled)).grid == base.grid && n == v.size() && in_range &&
                        total > 0.0;
        if (!ok) ++broken;
    }
    return {broken == 0, std::to_string(broken) + " of 50 frames broke an invariant"};
}

// -- 5, 6, 8, 10 -------------------------------------------------------------------

ExperimentConfig desk_config(const fs::path& dir) {
    auto cfg = ExperimentConfig::desk();
    cfg.seed = 2024;
    cfg.output_dir = dir.string();
    return cfg;
}

ResultTable desk_sweep(const fs::path& dir) {
    const auto t0 = Clock::now();
    const auto cfg = desk_config(dir);
    SweepOptions opts;
    opts.on_row = [&](const ResultRow& r) {
        std::cerr << fmt("  [%7.1fs] snr %6.2f ", seconds_since(t0), r.snr_db) << method_name(r.method)
                  << fmt(" accuracy %.4f\n", r.accuracy);
    };
    auto table = run_sweep(cfg, opts);
    emit_report(table, dir);
    return table;
}

double accuracy_at(const ResultTable& t, Method m, double snr) { return t.mean_accuracy(m, snr - 0.01, snr + 0.01); }

Outcome end_to_end(const ResultTable& t, double secs) {
    const auto m = Method::ResnetDenoised;
    const double hi = t.mean_accuracy(m, 14.0, 20.0);
    const double lo = t.mean_accuracy(m, -10.0, -4.0);
    const double a14 = accuracy_at(t, m, 14.0), a20 = accuracy_at(t, m, 20.0), a10 = accuracy_at(t, m, -10.0);
    const bool ok = hi - lo >= 0.25 && a14 >= 0.80 && a20 >= 0.80 && a10 >= 0.10 && a10 <= 0.55;
    return {ok, fmt("(a) high-low gap %.3f, (b) acc@14 %.3f acc@20 %.3f, (c) acc@-10 %.3f", hi - lo, a14, a20, a10) +
                    fmt(", sweep %.0fs", secs)};
}

Outcome denoising_ablation(const ResultTable& t) {
    const double den = t.mean_accuracy(Method::ResnetDenoised, 2.0, 8.0);
    const double raw = t.mean_accuracy(Method::ResnetRaw, 2.0, 8.0);
    const auto summary = summarize(t);
    const bool flagged = summary.find("denoising helps") != std::string::npos ||
                         summary.find("denoising hurts") != std::string::npos ||
                         summary.find("denoising is neutral") != std::string::npos;
    return {den >= raw - 0.02 && flagged, fmt("denoised %.3f vs raw %.3f over SNR {2, 8}", den, raw) +
                                              (flagged ? ", report flags the effect" : ", report flag MISSING")};
}

Outcome baseline_ranking(const ResultTable& t) {
    const double res = t.mean_accuracy(Method::ResnetDenoised, -1e9, 1e9);
    const double proj = t.mean_accuracy(Method::ProjectionClustering, -1e9, 1e9);
    return {res > proj, fmt("resnet_denoised %.3f vs projection_clustering %.3f", res, proj)};
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

Outcome determinism(const fs::path& a, const fs::path& b) {
    std::string differ;
    for (const char* f : {"accuracy.csv", "confusion.json", "summary.txt"}) {
        if (!fs::exists(a / f) || !fs::exists(b / f)) return {false, std::string(f) + " missing"};
        if (slurp(a / f) != slurp(b / f)) differ += std::string(differ.empty() ? "" : ", ") + f;
    }
    return {differ.empty(), differ.empty() ? "accuracy.csv, confusion.json, summary.txt byte-identical"
                                           : "files differ: " + differ};
}

// -- 7 ---------------------------------------------------------------------------

Outcome power_ratio_trend(const fs::path& work) {
    double d3 = 0.0, d9 = 0.0;
    std::string per_seed;
    for (std::uint64_t seed : {71U, 72U, 73U}) {
        auto cfg = ExperimentConfig::desk();
        cfg.seed = seed;
        cfg.snr_start = cfg.snr_stop = 8.0;
        cfg.factor = FactorAxis::DeltaDb;
        cfg.factor_values = {"3", "9"};
        cfg.methods = {Method::ResnetDenoised};
        cfg.output_dir = (work / ("delta_seed" + std::to_string(seed))).string();
        const auto t = run_sweep(cfg);
        const double a3 = t.mean_accuracy(Method::ResnetDenoised, 7.99, 8.01, "3");
        const double a9 = t.mean_accuracy(Method::ResnetDenoised, 7.99, 8.01, "9");
        per_seed += fmt(" %.3f/%.3f", a3, a9);
        d3 += a3 / 3.0;
        d9 += a9 / 3.0;
    }
    return {d9 >= d3 - 0.02, fmt("mean acc@8dB delta 9: %.3f, delta 3: %.3f;", d9, d3) + " per seed (3/9):" + per_seed};
}

// -- 9 ---------------------------------------------------------------------------

Outcome baseline_units() {
    const ProjectionHints hints{PowerAllocation{{1.0}}, {}, {}};
    const ProjectionClassifier clf(hints);
    int correct = 0, total = 0;
    for (auto s : kAllSchemes)
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto bits = random_bits(static_cast<std::size_t>(bits_per_symbol(s)) * 1000, seed);
            correct += clf.classify(modulate(bits, s)) == s ? 1 : 0;
            ++total;
        }
    int exact = 0, fixtures = 0;
    for (int k = 2; k <= 8; ++k)
        for (std::uint64_t rep = 0; rep < 5; ++rep) {
            std::mt19937_64 rng(static_cast<std::uint64_t>(k) * 100 + rep);
            std::normal_distribution<double> g(0.0, 0.01);
            std::vector<double> p;
            for (int c = 0; c < k; ++c)
                for (int i = 0; i < 30; ++i) p.push_back(static_cast<double>(c) + g(rng));
            std::shuffle(p.begin(), p.end(), rng);
            exact += subtractive_cluster_count(p) == static_cast<std::size_t>(k) ? 1 : 0;
            ++fixtures;
        }
    return {correct == total && exact == fixtures,
            std::to_string(correct) + "/" + std::to_string(total) + " noiseless single-user frames, " +
                std::to_string(exact) + "/" + std::to_string(fixtures) + " exact cluster counts"};
}

}  // namespace

int main(int argc, char** argv) {
    fs::path work = "acceptance_work";
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--workdir" && i + 1 < argc) {
            work = argv[++i];
        } else if (a == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
        } else {
            std::cerr << "usage: acceptance [--workdir DIR] [--only 1,2,...]\n";
            return 1;
        }
    }
    const auto want = [&](int c) { return only.empty() || only.count(c) > 0; };

    int failed = 0;
    const auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
        if (!want(id)) return;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " " << name << ": " << o.detail << std::endl;
    };

    report(1, "wavelet correctness", wavelet_correctness);
    report(2, "gradient suite", gradient_suite);
    report(3, "loss sanity", loss_sanity);
    report(4, "density algebra", density_algebra);

    std::optional<ResultTable> desk;
    double desk_secs = 0.0;
    std::string desk_error;
    if (want(5) || want(6) || want(8) || want(10)) {
        fs::remove_all(work / "desk_a");
        const auto t0 = Clock::now();
        try {
            desk = desk_sweep(work / "desk_a");
        } catch (const std::exception& e) {
            desk_error = e.what();
        }
        desk_secs = seconds_since(t0);
    }
    const auto with_desk = [&](const std::function<Outcome(const ResultTable&)>& fn) {
        return [&, fn] { return desk ? fn(*desk) : Outcome{false, "desk sweep failed: " + desk_error}; };
    };
    report(5, "desk-scale end to end", with_desk([&](const ResultTable& t) { return end_to_end(t, desk_secs); }));
    report(6, "denoising ablation", with_desk(denoising_ablation));
    report(7, "power-ratio trend", [&] { return power_ratio_trend(work); });
    report(8, "baseline ranking", with_desk(baseline_ranking));
    report(9, "baseline unit correctness", baseline_units);
    report(10, "determinism", [&] {
        if (!desk) return Outcome{false, "desk sweep failed: " + desk_error};
        fs::remove_all(work / "desk_b");
        (void)desk_sweep(work / "desk_b");
        return determinism(work / "desk_a", work / "desk_b");
    });

    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
