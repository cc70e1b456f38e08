#include "nomadet/baseline.hpp"

#include <algorithm>
#include <cmath>

#include "nomadet/error.hpp"

namespace nomadet {

void ClusterParams::validate() const {
    if (!(radius > 0.0 && radius < 1.0)) throw DomainError("cluster radius must lie in (0, 1)");
    if (!(squash_radius > radius)) throw DomainError("squash radius must exceed the cluster radius");
    if (!(reject_ratio > 0.0 && reject_ratio < accept_ratio && accept_ratio <= 1.0))
        throw DomainError("cluster ratios must satisfy 0 < reject < accept <= 1");
}

std::size_t subtractive_cluster_count(std::span<const double> points, const ClusterParams& params) {
    params.validate();
    if (points.size() < 2) throw DomainError("subtractive clustering needs at least 2 points");
    for (double p : points)
        if (!std::isfinite(p)) throw NumericError("non-finite point in clustering input");

    // Sorting fixes the summation order, so the result is order independent.
    std::vector<double> u(points.begin(), points.end());
    std::sort(u.begin(), u.end());
    const double lo = u.front();
    const double range = u.back() - lo;
    if (!(range > 0.0)) return 1;
    for (auto& v : u) v = (v - lo) / range;

    const double alpha = 4.0 / (params.radius * params.radius);
    const double beta = 4.0 / (params.squash_radius * params.squash_radius);
    const double reach = std::sqrt(40.0 / alpha);  // exp(-40) is below double resolution of the sums
    const std::size_t n = u.size();

    std::vector<double> pot(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto begin = std::lower_bound(u.begin(), u.end(), u[i] - reach);
        const auto end = std::upper_bound(u.begin(), u.end(), u[i] + reach);
        double s = 0.0;
        for (auto it = begin; it != end; ++it) {
            const double d = u[i] - *it;
            s += std::exp(-alpha * d * d);
        }
        pot[i] = s;
    }

    std::vector<double> centers;
    const auto squash = [&](double center, double height) {
        for (std::size_t i = 0; i < n; ++i) {
            const double d = u[i] - center;
            pot[i] -= height * std::exp(-beta * d * d);
        }
    };

    auto best = static_cast<std::size_t>(std::max_element(pot.begin(), pot.end()) - pot.begin());
    const double p1 = pot[best];
    centers.push_back(u[best]);
    squash(u[best], p1);

    for (std::size_t iter = 0; iter < 4 * n; ++iter) {
        best = static_cast<std::size_t>(std::max_element(pot.begin(), pot.end()) - pot.begin());
        const double pk = pot[best];
        bool accept = false;
        if (pk > params.accept_ratio * p1) {
            accept = true;
        } else if (pk < params.reject_ratio * p1) {
            break;
        } else {
            double dmin = 1.0;
            for (double c : centers) dmin = std::min(dmin, std::abs(u[best] - c));
            accept = dmin / params.radius + pk / p1 >= 1.0;
        }
        if (!accept) {
            pot[best] = 0.0;
            continue;
        }
        centers.push_back(u[best]);
        squash(u[best], pk);
    }
    return centers.size();
}

namespace {

std::pair<std::vector<double>, std::vector<double>> even_projections(const SignalFrame& frame) {
    const auto sym = sample_symbol_centers(frame);
    std::vector<double> re, im;
    for (std::size_t k = 0; k < sym.size(); k += 2) {
        re.push_back(sym[k].real());
        im.push_back(sym[k].imag());
    }
    return {std::move(re), std::move(im)};
}

}  // namespace

ProjectionClassifier::ProjectionClassifier(ProjectionHints hints) : hints_(std::move(hints)) {
    hints_.params.validate();
    hints_.alloc.validate();
    if (hints_.alloc.ratios.size() != hints_.near_schemes.size() + 1)
        throw ShapeError("projection hints need one power ratio per near UT plus the far UT");

    // Noiseless joint constellation of the even-indexed symbols for each candidate.
    std::vector<cplx> near_pts{cplx{}};
    for (std::size_t k = 0; k < hints_.near_schemes.size(); ++k) {
        const double amp = std::sqrt(hints_.alloc.ratios[k] * hints_.alloc.total_power);
        std::vector<cplx> next;
        for (const auto& base : near_pts)
            for (const auto& p : constellation(hints_.near_schemes[k], 0)) next.push_back(base + amp * p);
        near_pts = std::move(next);
    }
    const double far_amp = std::sqrt(hints_.alloc.ratios.back() * hints_.alloc.total_power);
    for (auto s : kAllSchemes) {
        std::vector<double> re, im;
        for (const auto& f : constellation(s, 0))
            for (const auto& q : near_pts) {
                re.push_back((far_amp * f + q).real());
                im.push_back((far_amp * f + q).imag());
            }
        if (re.size() < 2) {
            re.push_back(re.front());
            im.push_back(im.front());
        }
        patterns_[static_cast<std::size_t>(s)] = {subtractive_cluster_count(re, hints_.params),
                                                  subtractive_cluster_count(im, hints_.params)};
    }
}

AxisCounts ProjectionClassifier::measure(const SignalFrame& frame) const {
    auto [re, im] = even_projections(frame);
    if (re.size() < 2) throw DomainError("projection classifier needs at least 3 symbols");
    return {subtractive_cluster_count(re, hints_.params), subtractive_cluster_count(im, hints_.params)};
}

ModScheme ProjectionClassifier::classify(const SignalFrame& frame) const {
    const auto m = measure(frame);
    const auto dist = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
    ModScheme best = kAllSchemes[0];
    std::size_t best_d = static_cast<std::size_t>(-1);
    for (auto s : kAllSchemes) {
        const auto& p = patterns_[static_cast<std::size_t>(s)];
        const std::size_t d = dist(m.in_phase, p.in_phase) + dist(m.quadrature, p.quadrature);
        if (d < best_d) {
            best_d = d;
            best = s;
        }
    }
    return best;
}

ModScheme projection_classify(const SignalFrame& frame, const ProjectionHints& hints) {
    return ProjectionClassifier(hints).classify(frame);
}

}  // namespace nomadet
