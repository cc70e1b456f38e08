#pragma once

#include <cstdint>

#include "nomadet/density.hpp"

namespace nomadet {

/// A density diagram with its far-UT class label and provenance.
struct LabeledSample {
    DensityDiagram diagram;
    std::uint8_t label = 0;  ///< ModScheme index 0..3
    std::uint64_t seed = 0;
    float snr_db = 0.0F;

    bool operator==(const LabeledSample&) const = default;
};

}  // namespace nomadet
