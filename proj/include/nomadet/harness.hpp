#pragma once

// Experiment engine: SNR sweeps over one factor axis, evaluation and reports.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nomadet/datapipe.hpp"
#include "nomadet/nn/train.hpp"

namespace nomadet {

enum class Method : std::uint8_t { ResnetDenoised, ResnetRaw, ProjectionClustering };
enum class FactorAxis : std::uint8_t { None, NearScheme, UserCount, AlphaFpc, DeltaDb };

std::string_view method_name(Method m) noexcept;
Method parse_method(std::string_view name);
std::string_view factor_name(FactorAxis f) noexcept;
FactorAxis parse_factor(std::string_view name);

/// Scenario with one factor value applied. Values: scheme names for
/// near_scheme, total UT count for user_count, numbers otherwise.
NomaScenario apply_factor(NomaScenario scenario, FactorAxis axis, const std::string& value);

struct ExperimentConfig {
    NomaScenario scenario;
    double snr_start = -10.0;
    double snr_stop = 20.0;
    double snr_step = 2.0;
    FactorAxis factor = FactorAxis::None;
    std::vector<std::string> factor_values;
    std::vector<Method> methods{Method::ResnetDenoised};
    nn::TrainConfig train;
    WaveletSpec wavelet;
    int grid_size = kDefaultGridSize;
    bool pooled_training = false;  ///< one model per factor value across all SNR points
    std::string output_dir = "results";
    std::uint64_t seed = 1;

    void validate() const;
    std::vector<double> snr_points() const;
    /// factor_values, or a single "-" when the axis is None.
    std::vector<std::string> factor_levels() const;

    /// 50 samples/class at SNR -10..20 step 6, all three methods.
    static ExperimentConfig desk();
    /// 250 samples/class at SNR -10..20 step 2.
    static ExperimentConfig full();
};

using Confusion = std::array<std::array<std::uint32_t, kNumSchemes>, kNumSchemes>;

struct EvalResult {
    double accuracy = 0.0;
    Confusion confusion{};  ///< [true][predicted]
    std::size_t total() const noexcept;
};

EvalResult evaluate_predictions(std::span<const int> truth, std::span<const int> predicted);
EvalResult evaluate(const std::function<int(const LabeledSample&)>& classifier, std::span<const LabeledSample> test);
EvalResult evaluate(const nn::Model& model, std::span<const LabeledSample> test);

struct ResultRow {
    double snr_db = 0.0;
    std::string factor = "none";
    std::string factor_value = "-";
    Method method = Method::ResnetDenoised;
    double accuracy = 0.0;
    Confusion confusion{};

    bool operator==(const ResultRow&) const = default;
};

struct ResultTable {
    std::vector<ResultRow> rows;

    bool operator==(const ResultTable&) const = default;
    /// Mean accuracy of rows matching the method (and factor value, if given) within [snr_lo, snr_hi].
    double mean_accuracy(Method m, double snr_lo, double snr_hi, const std::string& factor_value = {}) const;
};

struct SweepOptions {
    bool resume = false;
    std::function<void(const ResultRow&)> on_row;
};

/// Runs every (factor value, SNR, method) cell. With a nonempty output_dir,
/// finished rows are appended to partial.jsonl; on failure a RESUME marker is
/// left next to them so a rerun with resume=true skips completed cells.
ResultTable run_sweep(const ExperimentConfig& cfg, const SweepOptions& opts = {});

/// accuracy.csv (one line per row) and confusion.json; deterministic bytes.
void emit_report(const ResultTable& table, const std::filesystem::path& dir);
ResultTable load_report(const std::filesystem::path& dir);
/// Plain-text summary: mean accuracy per (factor value, method).
std::string summarize(const ResultTable& table);

}  // namespace nomadet
