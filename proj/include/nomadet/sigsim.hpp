#pragma once

// Downlink NOMA transmission: modulation, power allocation, superposition
// coding and the block-fading channel seen by the near user terminal.

#include <array>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace nomadet {

using cplx = std::complex<double>;

enum class ModScheme : std::uint8_t { PiHalfBpsk = 0, Qpsk = 1, Qam16 = 2, Qam64 = 3 };

inline constexpr std::array<ModScheme, 4> kAllSchemes = {ModScheme::PiHalfBpsk, ModScheme::Qpsk,
                                                         ModScheme::Qam16, ModScheme::Qam64};
inline constexpr int kNumSchemes = 4;

int bits_per_symbol(ModScheme scheme) noexcept;
std::string_view scheme_name(ModScheme scheme) noexcept;
/// Accepts the names produced by scheme_name ("pi2bpsk", "qpsk", "qam16", "qam64").
ModScheme parse_scheme(std::string_view name);
ModScheme scheme_from_index(int index);

/// Constellation points for the symbol at `symbol_index`, indexed by the bit
/// label (first bit most significant). Only pi/2-BPSK depends on the index.
std::vector<cplx> constellation(ModScheme scheme, std::size_t symbol_index = 0);

/// Complex baseband samples. `samples_per_symbol` > 1 marks an oversampled
/// (rectangular pulse) frame.
class SignalFrame {
public:
    explicit SignalFrame(std::vector<cplx> samples, int samples_per_symbol = 1);

    std::span<const cplx> samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    int samples_per_symbol() const noexcept { return sps_; }
    std::size_t symbol_count() const noexcept { return samples_.size() / static_cast<std::size_t>(sps_); }
    const cplx& operator[](std::size_t i) const { return samples_[i]; }

    double mean_power() const noexcept;

    bool operator==(const SignalFrame&) const = default;

private:
    std::vector<cplx> samples_;
    int sps_;
};

/// Power ratios alpha_i (summing to one) and the total transmit power P_t.
/// Stream order convention throughout: near UTs first, far UT last.
struct PowerAllocation {
    std::vector<double> ratios;
    double total_power = 1.0;

    PowerAllocation() = default;
    PowerAllocation(std::vector<double> r, double pt = 1.0);

    /// Throws DomainError unless every ratio is positive and they sum to 1 within 1e-12.
    void validate() const;
};

enum class Fading : std::uint8_t { BlockRayleigh, None };

inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

struct ChannelConfig {
    Fading fading = Fading::BlockRayleigh;
    double snr_db_near = 10.0;  ///< kNoiseless disables the noise
    double delta_db = 6.0;      ///< SNR_near - SNR_far
    bool equalize = true;       ///< perfect-CSI division by h
    std::uint64_t seed = 0;

    double far_snr_db() const noexcept { return snr_db_near - delta_db; }
};

std::vector<std::uint8_t> random_bits(std::size_t count, std::uint64_t seed);

SignalFrame modulate(std::span<const std::uint8_t> bits, ModScheme scheme);

/// Nearest-point demodulation; inverse of modulate on a noiseless symbol-rate frame.
std::vector<std::uint8_t> hard_demodulate(const SignalFrame& frame, ModScheme scheme);

/// beta(j) proportional to (g(j)/n(j))^(-alpha_fpc), normalized to sum one.
PowerAllocation fractional_power_allocation(std::span<const double> gains, std::span<const double> noise_powers,
                                            double alpha_fpc);

/// s(i) = sum_k sqrt(alpha_k P_t) x_k(i).
SignalFrame superpose(std::span<const SignalFrame> streams, const PowerAllocation& alloc);

/// One CN(0,1) coefficient per frame, additive complex Gaussian noise with
/// variance E|h s|^2 / 10^(snr/10), optional equalization by h.
SignalFrame apply_channel(const SignalFrame& signal, const ChannelConfig& cfg);

/// Rectangular pulse shaping: repeats every sample `samples_per_symbol` times.
SignalFrame oversample(const SignalFrame& symbols, int samples_per_symbol);

/// Picks the centre sample of every symbol period (symbol-rate output).
SignalFrame sample_symbol_centers(const SignalFrame& frame);

// -- scenario ---------------------------------------------------------------

struct ExplicitRatios {
    std::vector<double> ratios;  ///< near UTs first, far UT last
};

struct FpaInputs {
    std::vector<double> gains;
    std::vector<double> noise_powers;
    double alpha_fpc = 1.0;
};

/// FPA with channel gains derived from delta_db: near UT k of K gets
/// 10^(-delta_db * k / K / 10), the far UT gets 10^(-delta_db / 10).
struct DeltaFpa {
    double alpha_fpc = 1.0;
};

using PowerSource = std::variant<ExplicitRatios, FpaInputs, DeltaFpa>;

struct NomaScenario {
    std::vector<ModScheme> near_schemes{ModScheme::Qpsk};
    ModScheme far_scheme = ModScheme::PiHalfBpsk;
    PowerSource power = DeltaFpa{};
    double snr_db_near = 10.0;
    double delta_db = 6.0;
    Fading fading = Fading::BlockRayleigh;
    bool equalize = true;
    int symbols_per_frame = 2000;
    int samples_per_symbol = 16;  // sym8 spans 16 taps; at 8 the pulse edges swamp the detail bands
    int samples_per_class = 250;
    double total_power = 1.0;
    std::uint64_t seed = 1;

    std::size_t user_count() const noexcept { return near_schemes.size() + 1; }
    PowerAllocation allocation() const;
    ChannelConfig channel(std::uint64_t seed) const;
    void validate() const;
};

struct NomaFrame {
    SignalFrame received;
    ModScheme label;  ///< far UT scheme
};

/// Random bits per UT -> modulate -> pulse shape -> superpose -> channel.
NomaFrame generate_noma_frame(const NomaScenario& scenario, std::uint64_t seed);

}  // namespace nomadet
