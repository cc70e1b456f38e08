#pragma once

// Reference classifier: subtractive clustering of the I/Q projections of the
// received constellation, matched against the level pattern each far-UT
// scheme would produce given the known near-UT schemes and power split.

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "nomadet/sigsim.hpp"

namespace nomadet {

struct ClusterParams {
    double radius = 0.15;          ///< r_a, fraction of the data range
    double squash_radius = 0.225;  ///< r_b
    double accept_ratio = 0.5;     ///< epsilon_up
    double reject_ratio = 0.15;    ///< epsilon_down

    void validate() const;
};

/// Chiu's subtractive clustering on 1-D points; returns the number of centres.
std::size_t subtractive_cluster_count(std::span<const double> points, const ClusterParams& params = {});

struct ProjectionHints {
    PowerAllocation alloc;                ///< near UTs first, far UT last
    std::vector<ModScheme> near_schemes;  ///< empty for a single-user frame
    ClusterParams params;
};

struct AxisCounts {
    std::size_t in_phase = 0;
    std::size_t quadrature = 0;

    bool operator==(const AxisCounts&) const = default;
};

class ProjectionClassifier {
public:
    explicit ProjectionClassifier(ProjectionHints hints);

    /// Per-axis cluster counts of the even-indexed symbols.
    AxisCounts measure(const SignalFrame& frame) const;
    ModScheme classify(const SignalFrame& frame) const;

    /// Noiseless per-axis counts predicted for each far-UT candidate.
    const std::array<AxisCounts, kNumSchemes>& patterns() const noexcept { return patterns_; }

private:
    ProjectionHints hints_;
    std::array<AxisCounts, kNumSchemes> patterns_{};
};

ModScheme projection_classify(const SignalFrame& frame, const ProjectionHints& hints);

}  // namespace nomadet
