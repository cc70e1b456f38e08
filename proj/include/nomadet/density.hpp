#pragma once

// Joint constellation density diagrams: N x N min-max binned sample counts,
// normalized to [0, 1] grayscale.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nomadet/sigsim.hpp"

namespace nomadet {

inline constexpr int kDefaultGridSize = 100;

struct DiagramMeta {
    std::uint64_t scenario_digest = 0;
    float snr_db = 0.0F;
    std::uint64_t seed = 0;

    bool operator==(const DiagramMeta&) const = default;
};

struct DensityDiagram {
    int grid_size = 0;
    std::vector<float> grid;  ///< row-major, rows follow the real axis
    DiagramMeta meta;

    float at(int row, int col) const { return grid[static_cast<std::size_t>(row) * grid_size + col]; }
    bool operator==(const DensityDiagram&) const = default;
};

/// Raw counts CT, row index from the real part, column index from the imaginary part.
std::vector<std::uint32_t> density_counts(const SignalFrame& s, int grid_size);

DensityDiagram density_diagram(const SignalFrame& s, int grid_size = kDefaultGridSize);

std::vector<DensityDiagram> batch_densify(std::span<const SignalFrame> frames, int grid_size = kDefaultGridSize);

/// 8-bit binary graymap (P5), row-major.
void write_pgm(const DensityDiagram& d, const std::filesystem::path& path);

}  // namespace nomadet
