#include "nomadet/density.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "nomadet/error.hpp"

namespace nomadet {

namespace {

struct AxisRange {
    double lo;
    double span;
};

int bin_of(double v, const AxisRange& r, int n) {
    if (!(r.span > 0.0)) return 0;
    const double pos = (v - r.lo) / r.span * n;
    const auto idx = static_cast<int>(std::floor(pos));
    return std::clamp(idx, 0, n - 1);
}

}  // namespace

std::vector<std::uint32_t> density_counts(const SignalFrame& s, int grid_size) {
    if (grid_size < 2) throw DomainError("grid size must be at least 2");
    double min_re = s[0].real(), max_re = min_re;
    double min_im = s[0].imag(), max_im = min_im;
    for (const auto& v : s.samples()) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw NumericError("non-finite sample in constellation frame");
        min_re = std::min(min_re, v.real());
        max_re = std::max(max_re, v.real());
        min_im = std::min(min_im, v.imag());
        max_im = std::max(max_im, v.imag());
    }
    const AxisRange re{min_re, max_re - min_re};
    const AxisRange im{min_im, max_im - min_im};
    const auto n = static_cast<std::size_t>(grid_size);
    std::vector<std::uint32_t> counts(n * n, 0);
    for (const auto& v : s.samples()) {
        const auto row = static_cast<std::size_t>(bin_of(v.real(), re, grid_size));
        const auto col = static_cast<std::size_t>(bin_of(v.imag(), im, grid_size));
        ++counts[row * n + col];
    }
    return counts;
}

DensityDiagram density_diagram(const SignalFrame& s, int grid_size) {
    const auto counts = density_counts(s, grid_size);
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    DensityDiagram d;
    d.grid_size = grid_size;
    d.grid.assign(counts.size(), 0.0F);
    if (*hi == *lo) return d;
    const double span = static_cast<double>(*hi - *lo);
    for (std::size_t i = 0; i < counts.size(); ++i)
        d.grid[i] = static_cast<float>(static_cast<double>(counts[i] - *lo) / span);
    return d;
}

std::vector<DensityDiagram> batch_densify(std::span<const SignalFrame> frames, int grid_size) {
    if (frames.empty()) throw DomainError("batch_densify needs at least one frame");
    std::vector<DensityDiagram> out;
    out.reserve(frames.size());
    for (const auto& f : frames) out.push_back(density_diagram(f, grid_size));
    return out;
}

void write_pgm(const DensityDiagram& d, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open " + path.string() + " for writing");
    os << "P5\n" << d.grid_size << ' ' << d.grid_size << "\n255\n";
    for (float v : d.grid) {
        const auto px = static_cast<unsigned char>(std::lround(std::clamp(v, 0.0F, 1.0F) * 255.0F));
        os.put(static_cast<char>(px));
    }
    if (!os) throw DataError("failed writing " + path.string());
}

}  // namespace nomadet
