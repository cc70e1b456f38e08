#pragma once

// Dataset generation, stratified splitting and the "NMD1" container.
//
// NMD1 layout (little-endian):
//   magic "NMD1" | u16 version (1) | u32 sample_count | u32 grid_size | u64 scenario_digest
//   sample_count x (u8 label | f32 snr_db | u64 seed | grid_size^2 x f32, row-major)

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nomadet/sample.hpp"
#include "nomadet/sigsim.hpp"
#include "nomadet/wavelet.hpp"

namespace nomadet {

inline constexpr std::uint16_t kDatasetVersion = 1;

/// Receiver-side processing from the received frame to the diagram.
struct Preprocess {
    bool denoise = true;
    WaveletSpec wavelet;
    int grid_size = kDefaultGridSize;
};

/// Ordered stage names of the full pipeline, for introspection.
std::vector<std::string> pipeline_stages(const Preprocess& pre);

/// Received frame -> (optional wavelet denoise) -> symbol-centre sampling.
SignalFrame receive(const SignalFrame& received, const Preprocess& pre);

std::uint64_t sample_seed(std::uint64_t master_seed, int label, int index);

/// Digest of the scenario and preprocessing, stored in dataset headers.
std::uint64_t dataset_digest(const NomaScenario& scenario, const Preprocess& pre);

/// Regenerates sample `index` of class `label` in isolation.
LabeledSample make_sample(const NomaScenario& scenario, int label, int index, const Preprocess& pre);

/// Re-creates the received frame behind a sample.
NomaFrame regenerate_frame(const NomaScenario& scenario, int label, std::uint64_t seed);

/// samples_per_class frames for each of the four far-UT classes, class-major order.
std::vector<LabeledSample> generate_dataset(const NomaScenario& scenario, const Preprocess& pre = {});

struct DatasetSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
};

/// Stratified shuffle split. Needs at least 10 samples.
DatasetSplit split_labels(std::span<const std::uint8_t> labels, std::array<int, 3> ratios, std::uint64_t seed);
DatasetSplit split_dataset(std::span<const LabeledSample> samples, std::array<int, 3> ratios = {6, 2, 2},
                           std::uint64_t seed = 0);

std::vector<LabeledSample> select(std::span<const LabeledSample> samples, std::span<const std::size_t> indices);

struct Dataset {
    std::uint64_t scenario_digest = 0;
    int grid_size = kDefaultGridSize;
    std::vector<LabeledSample> samples;

    bool operator==(const Dataset&) const = default;
};

Dataset make_dataset(const NomaScenario& scenario, const Preprocess& pre = {});

void save_dataset(const Dataset& data, const std::filesystem::path& path);
/// Throws BadMagicError, VersionMismatchError or TruncatedError on malformed files.
Dataset load_dataset(const std::filesystem::path& path);

std::filesystem::path manifest_path(const std::filesystem::path& dataset_path);
/// Human-readable JSON sidecar with the full scenario.
void write_manifest(const NomaScenario& scenario, const Preprocess& pre, const std::filesystem::path& dataset_path);

}  // namespace nomadet
