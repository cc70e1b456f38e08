#include "nomadet/sigsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "nomadet/error.hpp"
#include "nomadet/seed.hpp"

namespace nomadet {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Gray-coded PAM level for 16QAM/64QAM in the 5G NR layout.
double pam4(int b0, int b1) { return (1 - 2 * b0) * (2 - (1 - 2 * b1)); }
double pam8(int b0, int b1, int b2) { return (1 - 2 * b0) * (4 - (1 - 2 * b1) * (2 - (1 - 2 * b2))); }

cplx map_symbol(ModScheme scheme, std::span<const std::uint8_t> b, std::size_t k) {
    switch (scheme) {
    case ModScheme::PiHalfBpsk: {
        const double v = 1.0 - 2.0 * b[0];
        return (k % 2 == 0) ? cplx(v, 0.0) : cplx(0.0, v);
    }
    case ModScheme::Qpsk:
        return cplx(1.0 - 2.0 * b[0], 1.0 - 2.0 * b[1]) / kSqrt2;
    case ModScheme::Qam16:
        return cplx(pam4(b[0], b[2]), pam4(b[1], b[3])) / std::sqrt(10.0);
    case ModScheme::Qam64:
        return cplx(pam8(b[0], b[2], b[4]), pam8(b[1], b[3], b[5])) / std::sqrt(42.0);
    }
    return {};
}

cplx complex_gaussian(std::mt19937_64& rng, double variance) {
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

}  // namespace

int bits_per_symbol(ModScheme scheme) noexcept {
    switch (scheme) {
    case ModScheme::PiHalfBpsk: return 1;
    case ModScheme::Qpsk: return 2;
    case ModScheme::Qam16: return 4;
    case ModScheme::Qam64: return 6;
    }
    return 0;
}

std::string_view scheme_name(ModScheme scheme) noexcept {
    switch (scheme) {
    case ModScheme::PiHalfBpsk: return "pi2bpsk";
    case ModScheme::Qpsk: return "qpsk";
    case ModScheme::Qam16: return "qam16";
    case ModScheme::Qam64: return "qam64";
    }
    return "?";
}

ModScheme parse_scheme(std::string_view name) {
    for (auto s : kAllSchemes)
        if (scheme_name(s) == name) return s;
    throw UsageError("unknown modulation scheme '" + std::string(name) + "' (expected pi2bpsk|qpsk|qam16|qam64)");
}

ModScheme scheme_from_index(int index) {
    if (index < 0 || index >= kNumSchemes) throw DomainError("scheme index out of range: " + std::to_string(index));
    return kAllSchemes[static_cast<std::size_t>(index)];
}

std::vector<cplx> constellation(ModScheme scheme, std::size_t symbol_index) {
    const int m = bits_per_symbol(scheme);
    std::vector<cplx> pts(std::size_t{1} << m);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(m));
    for (std::size_t label = 0; label < pts.size(); ++label) {
        for (int i = 0; i < m; ++i) bits[static_cast<std::size_t>(i)] = (label >> (m - 1 - i)) & 1U;
        pts[label] = map_symbol(scheme, bits, symbol_index);
    }
    return pts;
}

SignalFrame::SignalFrame(std::vector<cplx> samples, int samples_per_symbol)
    : samples_(std::move(samples)), sps_(samples_per_symbol) {
    if (samples_.empty()) throw DomainError("signal frame must contain at least one sample");
    if (sps_ < 1) throw DomainError("samples_per_symbol must be >= 1");
    if (samples_.size() % static_cast<std::size_t>(sps_) != 0)
        throw ShapeError("frame of " + std::to_string(samples_.size()) + " samples is not a whole number of " +
                         std::to_string(sps_) + "-sample symbols");
}

double SignalFrame::mean_power() const noexcept {
    double acc = 0.0;
    for (const auto& s : samples_) acc += std::norm(s);
    return acc / static_cast<double>(samples_.size());
}

PowerAllocation::PowerAllocation(std::vector<double> r, double pt) : ratios(std::move(r)), total_power(pt) {
    validate();
}

void PowerAllocation::validate() const {
    if (ratios.empty()) throw DomainError("power allocation needs at least one ratio");
    if (!(total_power > 0.0) || !std::isfinite(total_power)) throw DomainError("total power must be positive");
    double sum = 0.0;
    for (double a : ratios) {
        if (!(a > 0.0)) throw DomainError("power ratios must be positive");
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << "power ratios must sum to 1 (got " << sum << ")";
        throw DomainError(os.str());
    }
}

std::vector<std::uint8_t> random_bits(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> bits(count);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (i % 64 == 0) word = rng();
        bits[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1U);
    }
    return bits;
}

SignalFrame modulate(std::span<const std::uint8_t> bits, ModScheme scheme) {
    const auto m = static_cast<std::size_t>(bits_per_symbol(scheme));
    if (bits.empty() || bits.size() % m != 0)
        throw ShapeError("bit count " + std::to_string(bits.size()) + " for " + std::string(scheme_name(scheme)) +
                         " must be a positive multiple of " + std::to_string(m));
    std::vector<cplx> out(bits.size() / m);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto group = bits.subspan(k * m, m);
        for (auto b : group)
            if (b > 1) throw DomainError("bits must be 0 or 1");
        out[k] = map_symbol(scheme, group, k);
    }
    return SignalFrame(std::move(out));
}

std::vector<std::uint8_t> hard_demodulate(const SignalFrame& frame, ModScheme scheme) {
    const int m = bits_per_symbol(scheme);
    const auto even = constellation(scheme, 0);
    const auto odd = constellation(scheme, 1);
    std::vector<std::uint8_t> bits;
    bits.reserve(frame.size() * static_cast<std::size_t>(m));
    for (std::size_t k = 0; k < frame.size(); ++k) {
        const auto& pts = (k % 2 == 0) ? even : odd;
        std::size_t best = 0;
        double best_d = std::norm(frame[k] - pts[0]);
        for (std::size_t p = 1; p < pts.size(); ++p) {
            const double d = std::norm(frame[k] - pts[p]);
            if (d < best_d) {
                best_d = d;
                best = p;
            }
        }
        for (int i = 0; i < m; ++i) bits.push_back(static_cast<std::uint8_t>((best >> (m - 1 - i)) & 1U));
    }
    return bits;
}

PowerAllocation fractional_power_allocation(std::span<const double> gains, std::span<const double> noise_powers,
                                            double alpha_fpc) {
    if (gains.size() != noise_powers.size())
        throw ShapeError("gains (" + std::to_string(gains.size()) + ") and noise powers (" +
                         std::to_string(noise_powers.size()) + ") differ in length");
    if (gains.size() < 2) throw DomainError("fractional power allocation needs at least 2 users");
    if (!(alpha_fpc > 0.0 && alpha_fpc <= 1.0)) throw DomainError("alpha_fpc must lie in (0, 1]");
    std::vector<double> w(gains.size());
    for (std::size_t j = 0; j < gains.size(); ++j) {
        if (!(gains[j] > 0.0) || !(noise_powers[j] > 0.0))
            throw DomainError("channel gains and noise powers must be positive");
        w[j] = std::pow(gains[j] / noise_powers[j], -alpha_fpc);
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& v : w) v /= total;
    // Absorb the last rounding residue so the ratios sum to one.
    double rest = 1.0;
    for (std::size_t j = 0; j + 1 < w.size(); ++j) rest -= w[j];
    w.back() = rest;
    return PowerAllocation(std::move(w));
}

SignalFrame superpose(std::span<const SignalFrame> streams, const PowerAllocation& alloc) {
    alloc.validate();
    if (streams.size() != alloc.ratios.size())
        throw ShapeError("stream count " + std::to_string(streams.size()) + " does not match ratio count " +
                         std::to_string(alloc.ratios.size()));
    const std::size_t n = streams.front().size();
    for (const auto& s : streams)
        if (s.size() != n)
            throw ShapeError("stream lengths differ: " + std::to_string(n) + " vs " + std::to_string(s.size()));
    std::vector<cplx> out(n, cplx{});
    for (std::size_t k = 0; k < streams.size(); ++k) {
        const double amp = std::sqrt(alloc.ratios[k] * alloc.total_power);
        const auto x = streams[k].samples();
        for (std::size_t i = 0; i < n; ++i) out[i] += amp * x[i];
    }
    return SignalFrame(std::move(out), streams.front().samples_per_symbol());
}

SignalFrame apply_channel(const SignalFrame& signal, const ChannelConfig& cfg) {
    if (std::isnan(cfg.snr_db_near) || cfg.snr_db_near == -std::numeric_limits<double>::infinity())
        throw DomainError("snr_db_near must be finite or +inf (noiseless)");
    if (!(cfg.delta_db >= 0.0)) throw DomainError("delta_db must be >= 0");

    std::mt19937_64 rng(cfg.seed);
    const cplx h = cfg.fading == Fading::BlockRayleigh ? complex_gaussian(rng, 1.0) : cplx(1.0, 0.0);

    std::vector<cplx> out(signal.samples().begin(), signal.samples().end());
    for (auto& v : out) v *= h;

    if (std::isfinite(cfg.snr_db_near)) {
        double power = 0.0;
        for (const auto& v : out) power += std::norm(v);
        power /= static_cast<double>(out.size());
        const double variance = power / std::pow(10.0, cfg.snr_db_near / 10.0);
        if (variance > 0.0)
            for (auto& v : out) v += complex_gaussian(rng, variance);
    }
    if (cfg.equalize && h != cplx(0.0, 0.0))
        for (auto& v : out) v /= h;
    return SignalFrame(std::move(out), signal.samples_per_symbol());
}

SignalFrame oversample(const SignalFrame& symbols, int samples_per_symbol) {
    if (samples_per_symbol < 1) throw DomainError("samples_per_symbol must be >= 1");
    if (symbols.samples_per_symbol() != 1) throw UsageError("oversample expects a symbol-rate frame");
    std::vector<cplx> out;
    out.reserve(symbols.size() * static_cast<std::size_t>(samples_per_symbol));
    for (const auto& s : symbols.samples()) out.insert(out.end(), static_cast<std::size_t>(samples_per_symbol), s);
    return SignalFrame(std::move(out), samples_per_symbol);
}

SignalFrame sample_symbol_centers(const SignalFrame& frame) {
    const auto sps = static_cast<std::size_t>(frame.samples_per_symbol());
    if (sps == 1) return frame;
    std::vector<cplx> out(frame.symbol_count());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = frame[k * sps + sps / 2];
    return SignalFrame(std::move(out));
}

// -- scenario ---------------------------------------------------------------

PowerAllocation NomaScenario::allocation() const {
    const std::size_t users = user_count();
    return std::visit(
        [&](const auto& src) -> PowerAllocation {
            using T = std::decay_t<decltype(src)>;
            if constexpr (std::is_same_v<T, ExplicitRatios>) {
                if (src.ratios.size() != users)
                    throw ShapeError("scenario has " + std::to_string(users) + " UTs but " +
                                     std::to_string(src.ratios.size()) + " power ratios");
                return PowerAllocation(src.ratios, total_power);
            } else if constexpr (std::is_same_v<T, FpaInputs>) {
                if (src.gains.size() != users)
                    throw ShapeError("scenario has " + std::to_string(users) + " UTs but " +
                                     std::to_string(src.gains.size()) + " channel gains");
                auto a = fractional_power_allocation(src.gains, src.noise_powers, src.alpha_fpc);
                a.total_power = total_power;
                return a;
            } else {
                const auto near = static_cast<double>(near_schemes.size());
                std::vector<double> g(users), n(users, 1.0);
                for (std::size_t k = 0; k + 1 < users; ++k)
                    g[k] = std::pow(10.0, -delta_db * static_cast<double>(k) / near / 10.0);
                g.back() = std::pow(10.0, -delta_db / 10.0);
                auto a = fractional_power_allocation(g, n, src.alpha_fpc);
                a.total_power = total_power;
                return a;
            }
        },
        power);
}

ChannelConfig NomaScenario::channel(std::uint64_t s) const {
    ChannelConfig c;
    c.fading = fading;
    c.snr_db_near = snr_db_near;
    c.delta_db = delta_db;
    c.equalize = equalize;
    c.seed = s;
    return c;
}

void NomaScenario::validate() const {
    if (near_schemes.empty() || near_schemes.size() > 3)
        throw DomainError("scenario needs 1 to 3 near UTs (2 to 4 UTs in total)");
    if (symbols_per_frame < 1) throw DomainError("symbols_per_frame must be positive");
    if (samples_per_symbol < 1) throw DomainError("samples_per_symbol must be positive");
    if (samples_per_class < 1) throw DomainError("samples_per_class must be positive");
    if (std::isnan(snr_db_near)) throw DomainError("snr_db_near must not be NaN");
    if (!(delta_db >= 0.0) || !std::isfinite(delta_db)) throw DomainError("delta_db must be finite and >= 0");
    const auto alloc = allocation();
    const double far = alloc.ratios.back();
    for (std::size_t k = 0; k + 1 < alloc.ratios.size(); ++k)
        if (!(far > alloc.ratios[k])) throw DomainError("far UT power ratio must be strictly the largest");
}

NomaFrame generate_noma_frame(const NomaScenario& scenario, std::uint64_t seed) {
    scenario.validate();
    const auto alloc = scenario.allocation();
    const auto nsym = static_cast<std::size_t>(scenario.symbols_per_frame);

    std::vector<SignalFrame> streams;
    streams.reserve(scenario.user_count());
    for (std::size_t u = 0; u < scenario.user_count(); ++u) {
        const ModScheme s = u + 1 < scenario.user_count() ? scenario.near_schemes[u] : scenario.far_scheme;
        const auto bits = random_bits(nsym * static_cast<std::size_t>(bits_per_symbol(s)), derive_seed(seed, {1, u}));
        streams.push_back(oversample(modulate(bits, s), scenario.samples_per_symbol));
    }
    auto tx = superpose(streams, alloc);
    return {apply_channel(tx, scenario.channel(derive_seed(seed, {2}))), scenario.far_scheme};
}

}  // namespace nomadet
