#include "nomadet/wavelet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "nomadet/error.hpp"

namespace nomadet {

namespace {

// Analysis low-pass filters, identical to the reference toolbox `dec_lo`.
constexpr std::array<double, 2> kHaar = {0.7071067811865476, 0.7071067811865476};

constexpr std::array<double, 8> kDb4 = {-0.010597401785069032, 0.0328830116668852,  0.030841381835560764,
                                        -0.18703481171909309,  -0.027983769416859854, 0.6308807679298589,
                                        0.7148465705529157,    0.2303778133088965};

constexpr std::array<double, 16> kSym8 = {
    -0.0033824159510061256, -0.0005421323317911481, 0.03169508781149298,   0.007607487324917605,
    -0.1432942383508097,    -0.061273359067658524,  0.4813596512583722,    0.7771857517005235,
    0.3644418948353314,     -0.05194583810770904,   -0.027219029917056003, 0.049137179673607506,
    0.003808752013890615,   -0.01495225833704823,   -0.0003029205147213668, 0.0018899503327594609};

struct FilterBank {
    std::vector<double> lo;
    std::vector<double> hi;
};

FilterBank make_bank(const std::string& family) {
    const auto lo = wavelet_lowpass(family);
    FilterBank fb{{lo.begin(), lo.end()}, std::vector<double>(lo.size())};
    const std::size_t f = lo.size();
    for (std::size_t j = 0; j < f; ++j) fb.hi[j] = ((j % 2 == 0) ? -1.0 : 1.0) * lo[f - 1 - j];
    return fb;
}

std::size_t wrap(std::ptrdiff_t idx, std::size_t n) {
    const auto m = static_cast<std::ptrdiff_t>(n);
    idx %= m;
    return static_cast<std::size_t>(idx < 0 ? idx + m : idx);
}

// One periodized analysis step: out[i] = sum_j f[j] x[(2i + F/2 - j) mod N].
void analyze(std::span<const double> x, const FilterBank& fb, std::vector<double>& a, std::vector<double>& d) {
    const std::size_t n = x.size();
    const std::size_t half = n / 2;
    const auto f = static_cast<std::ptrdiff_t>(fb.lo.size());
    a.assign(half, 0.0);
    d.assign(half, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        double sa = 0.0;
        double sd = 0.0;
        const auto base = static_cast<std::ptrdiff_t>(2 * i) + f / 2;
        for (std::ptrdiff_t j = 0; j < f; ++j) {
            const double v = x[wrap(base - j, n)];
            sa += fb.lo[static_cast<std::size_t>(j)] * v;
            sd += fb.hi[static_cast<std::size_t>(j)] * v;
        }
        a[i] = sa;
        d[i] = sd;
    }
}

// Transpose of analyze(); exact inverse for orthogonal filters.
std::vector<double> synthesize(std::span<const double> a, std::span<const double> d, const FilterBank& fb) {
    const std::size_t n = 2 * a.size();
    const auto f = static_cast<std::ptrdiff_t>(fb.lo.size());
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto base = static_cast<std::ptrdiff_t>(2 * i) + f / 2;
        for (std::ptrdiff_t j = 0; j < f; ++j)
            x[wrap(base - j, n)] += fb.lo[static_cast<std::size_t>(j)] * a[i] + fb.hi[static_cast<std::size_t>(j)] * d[i];
    }
    return x;
}

std::size_t padded_length(std::size_t n, int level) {
    const std::size_t block = std::size_t{1} << level;
    return (n + block - 1) / block * block;
}

void check_spec(const WaveletSpec& spec) {
    if (spec.level < 1 || spec.level > 20) throw DomainError("wavelet decomposition level must be in [1, 20]");
}

}  // namespace

std::span<const double> wavelet_lowpass(const std::string& family) {
    if (family == "sym8") return kSym8;
    if (family == "db4") return kDb4;
    if (family == "haar" || family == "db1") return kHaar;
    throw UsageError("unsupported wavelet family '" + family + "' (supported: haar, db4, sym8)");
}

double filter_orthogonality_error(std::span<const double> h) {
    double err = std::abs(std::accumulate(h.begin(), h.end(), 0.0) - std::sqrt(2.0));
    for (std::size_t shift = 0; 2 * shift < h.size(); ++shift) {
        double acc = 0.0;
        for (std::size_t k = 0; k + 2 * shift < h.size(); ++k) acc += h[k] * h[k + 2 * shift];
        err = std::max(err, std::abs(acc - (shift == 0 ? 1.0 : 0.0)));
    }
    return err;
}

WaveletCoeffs dwt_multilevel(std::span<const double> x, const WaveletSpec& spec) {
    check_spec(spec);
    const auto fb = make_bank(spec.family);
    if (x.size() < fb.lo.size())
        throw ShapeError("signal of length " + std::to_string(x.size()) + " is shorter than the " + spec.family +
                         " filter; need at least " + std::to_string(fb.lo.size()) + " samples");

    std::vector<double> cur(x.begin(), x.end());
    cur.resize(padded_length(x.size(), spec.level), 0.0);

    WaveletCoeffs c;
    c.original_length = x.size();
    c.details.resize(static_cast<std::size_t>(spec.level));
    std::vector<double> a;
    for (int l = 0; l < spec.level; ++l) {
        // finest level is computed first and stored last
        analyze(cur, fb, a, c.details[static_cast<std::size_t>(spec.level - 1 - l)]);
        cur.swap(a);
    }
    c.approximation = std::move(cur);
    return c;
}

std::vector<double> idwt_multilevel(const WaveletCoeffs& c, const WaveletSpec& spec) {
    check_spec(spec);
    const auto fb = make_bank(spec.family);
    if (c.details.size() != static_cast<std::size_t>(spec.level))
        throw ShapeError("expected " + std::to_string(spec.level) + " detail levels, got " +
                         std::to_string(c.details.size()));
    if (c.original_length == 0) throw ShapeError("coefficients carry no original length");
    const std::size_t padded = padded_length(c.original_length, spec.level);
    const std::size_t coarse = padded >> spec.level;
    if (c.approximation.size() != coarse)
        throw ShapeError("approximation at level " + std::to_string(spec.level) + " must have length " +
                         std::to_string(coarse) + ", got " + std::to_string(c.approximation.size()));

    std::vector<double> cur = c.approximation;
    for (std::size_t i = 0; i < c.details.size(); ++i) {
        const int level = spec.level - static_cast<int>(i);
        const std::size_t expected = padded >> level;
        if (c.details[i].size() != expected)
            throw ShapeError("detail coefficients at level " + std::to_string(level) + " must have length " +
                             std::to_string(expected) + ", got " + std::to_string(c.details[i].size()));
        cur = synthesize(cur, c.details[i], fb);
    }
    cur.resize(c.original_length);
    return cur;
}

std::vector<double> soft_threshold(std::span<const double> c, double t) {
    if (!(t >= 0.0)) throw DomainError("threshold must be nonnegative");
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double m = std::abs(c[i]) - t;
        out[i] = m > 0.0 ? std::copysign(m, c[i]) : 0.0;
    }
    return out;
}

std::vector<double> hard_threshold(std::span<const double> c, double t) {
    if (!(t >= 0.0)) throw DomainError("threshold must be nonnegative");
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = std::abs(c[i]) > t ? c[i] : 0.0;
    return out;
}

double mad_sigma(std::span<const double> d) {
    if (d.empty()) throw DomainError("noise estimate needs at least one coefficient");
    std::vector<double> a(d.size());
    std::transform(d.begin(), d.end(), a.begin(), [](double v) { return std::abs(v); });
    const std::size_t mid = a.size() / 2;
    std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(mid), a.end());
    double med = a[mid];
    if (a.size() % 2 == 0) {
        const double lower = *std::max_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(mid));
        med = 0.5 * (med + lower);
    }
    return med / 0.6745;
}

namespace {

void check_threshold_input(std::span<const double> d, double sigma) {
    if (d.size() < 2) throw DomainError("threshold selection needs at least 2 coefficients");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("noise scale sigma must be positive");
}

bool all_zero(std::span<const double> d) {
    return std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; });
}

// SURE-minimizing threshold in units of sigma.
double sure_unit(std::span<const double> d, double sigma) {
    const std::size_t n = d.size();
    std::vector<double> sx2(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = d[i] / sigma;
        sx2[i] = v * v;
    }
    std::sort(sx2.begin(), sx2.end());
    const auto nd = static_cast<double>(n);
    double cum = 0.0;
    double best_risk = std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    for (std::size_t k = 0; k < n; ++k) {
        cum += sx2[k];
        const double risk = (nd - 2.0 * static_cast<double>(k + 1) + cum + static_cast<double>(n - 1 - k) * sx2[k]) / nd;
        if (risk < best_risk) {
            best_risk = risk;
            best = k;
        }
    }
    return std::sqrt(sx2[best]);
}

}  // namespace

double universal_threshold(std::span<const double> d, double sigma) {
    check_threshold_input(d, sigma);
    if (all_zero(d)) return 0.0;
    return sigma * std::sqrt(2.0 * std::log(static_cast<double>(d.size())));
}

double sure_threshold(std::span<const double> d, double sigma) {
    check_threshold_input(d, sigma);
    if (all_zero(d)) return 0.0;
    return sigma * sure_unit(d, sigma);
}

double heursure_threshold(std::span<const double> d, double sigma) {
    check_threshold_input(d, sigma);
    if (all_zero(d)) return 0.0;
    const auto n = static_cast<double>(d.size());
    const double universal = std::sqrt(2.0 * std::log(n));
    double energy = 0.0;
    for (double v : d) energy += (v / sigma) * (v / sigma);
    const double sparsity = (energy - n) / n;
    const double crit = std::pow(std::log2(n), 1.5) / std::sqrt(n);
    if (sparsity <= crit) return sigma * universal;
    return sigma * std::min(sure_unit(d, sigma), universal);
}

double select_threshold(std::span<const double> d, double sigma, ThresholdRule rule) {
    switch (rule) {
    case ThresholdRule::Heursure: return heursure_threshold(d, sigma);
    case ThresholdRule::Universal: return universal_threshold(d, sigma);
    case ThresholdRule::Sure: return sure_threshold(d, sigma);
    }
    return 0.0;
}

std::vector<double> denoise_real(std::span<const double> x, const WaveletSpec& spec) {
    auto c = dwt_multilevel(x, spec);
    const double sigma = mad_sigma(c.details.back());
    if (sigma > 0.0) {
        for (auto& d : c.details) {
            const double t = select_threshold(d, sigma, spec.rule);
            d = spec.type == ThresholdType::Soft ? soft_threshold(d, t) : hard_threshold(d, t);
        }
    }
    return idwt_multilevel(c, spec);
}

SignalFrame denoise_frame(const SignalFrame& s, const WaveletSpec& spec) {
    std::vector<double> re(s.size()), im(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        re[i] = s[i].real();
        im[i] = s[i].imag();
    }
    const auto dre = denoise_real(re, spec);
    const auto dim = denoise_real(im, spec);
    std::vector<cplx> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = {dre[i], dim[i]};
    return SignalFrame(std::move(out), s.samples_per_symbol());
}

}  // namespace nomadet
