#pragma once

// Periodized orthogonal DWT and threshold denoising of complex frames.
//
// Coefficient layout follows the common toolbox order: `details[0]` is the
// coarsest level and `details.back()` the finest. Signals whose length is not
// a multiple of 2^level are zero-padded before analysis and trimmed after
// synthesis.

#include <span>
#include <string>
#include <vector>

#include "nomadet/sigsim.hpp"

namespace nomadet {

enum class ThresholdRule { Heursure, Universal, Sure };
enum class ThresholdType { Soft, Hard };

struct WaveletSpec {
    std::string family = "sym8";
    int level = 2;
    ThresholdRule rule = ThresholdRule::Heursure;
    ThresholdType type = ThresholdType::Soft;
};

/// Analysis low-pass filter of an orthogonal family ("haar", "db4", "sym8").
std::span<const double> wavelet_lowpass(const std::string& family);

/// Checks sum(h) = sqrt(2), sum(h^2) = 1 and double-shift orthogonality.
/// Returns the largest violation.
double filter_orthogonality_error(std::span<const double> lowpass);

struct WaveletCoeffs {
    std::vector<double> approximation;
    std::vector<std::vector<double>> details;  ///< coarsest first, finest last
    std::size_t original_length = 0;
};

WaveletCoeffs dwt_multilevel(std::span<const double> x, const WaveletSpec& spec);
std::vector<double> idwt_multilevel(const WaveletCoeffs& c, const WaveletSpec& spec);

std::vector<double> soft_threshold(std::span<const double> c, double t);
std::vector<double> hard_threshold(std::span<const double> c, double t);

/// Median absolute deviation / 0.6745.
double mad_sigma(std::span<const double> d);

double universal_threshold(std::span<const double> d, double sigma);
/// Threshold minimizing Stein's unbiased risk estimate for soft thresholding.
double sure_threshold(std::span<const double> d, double sigma);
/// Universal threshold for sparse inputs, otherwise min(SURE, universal).
double heursure_threshold(std::span<const double> d, double sigma);
double select_threshold(std::span<const double> d, double sigma, ThresholdRule rule);

/// Thresholds every detail level of one real channel; noise scale from the
/// finest level, approximation untouched.
std::vector<double> denoise_real(std::span<const double> x, const WaveletSpec& spec);

/// Real and imaginary parts denoised independently then recombined.
SignalFrame denoise_frame(const SignalFrame& s, const WaveletSpec& spec = {});

}  // namespace nomadet
