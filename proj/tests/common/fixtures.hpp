#pragma once

#include <random>
#include <vector>

#include "nomadet/sample.hpp"

namespace fixtures {

/// 16 synthetic 100x100 diagrams, 4 per class. Class c lights up a blob in
/// quadrant c; per-sample jitter in position and brightness.
inline std::vector<nomadet::LabeledSample> toy_diagrams(std::uint64_t seed = 5) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> jitter(-6, 6);
    std::uniform_real_distribution<float> noise(0.0F, 0.05F);
    std::vector<nomadet::LabeledSample> out;
    for (int c = 0; c < 4; ++c)
        for (int i = 0; i < 4; ++i) {
            nomadet::LabeledSample s;
            s.label = static_cast<std::uint8_t>(c);
            s.seed = static_cast<std::uint64_t>(c * 4 + i);
            s.diagram.grid_size = 100;
            s.diagram.grid.resize(100 * 100);
            for (auto& v : s.diagram.grid) v = noise(rng);
            const int r0 = (c / 2) * 50 + 15 + jitter(rng), c0 = (c % 2) * 50 + 15 + jitter(rng);
            for (int r = r0; r < r0 + 20; ++r)
                for (int q = c0; q < c0 + 20; ++q) s.diagram.grid[static_cast<std::size_t>(r) * 100 + q] = 1.0F;
            out.push_back(std::move(s));
        }
    return out;
}

}  // namespace fixtures
