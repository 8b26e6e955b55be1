#pragma once

#include "cavity/errors.hpp"

#include <algorithm>
#include <span>

namespace cavity
{

// Trapezoid rule for the integral of a sampled function over [lo, hi] on a
// strictly increasing grid. Partial cells at the ends use linear
// interpolation of the integrand. f(i) returns the sample at xs[i].
template <class T, class F>
T trapezoid_region(std::span<const double> xs, double lo, double hi, F &&f)
{
    if (xs.size() < 2 || !(lo < hi)) {
        throw Error(ErrorKind::domain, "integration needs a grid of >= 2 points and lo < hi");
    }
    const double tol = 1e-9 * std::max(1.0, std::abs(xs.back() - xs.front()));
    if (lo < xs.front() - tol || hi > xs.back() + tol) {
        throw Error(ErrorKind::domain, "region lies outside the spatial grid");
    }
    lo = std::max(lo, xs.front());
    hi = std::min(hi, xs.back());

    auto interp = [&](double x) -> T {
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t j = static_cast<std::size_t>(it - xs.begin());
        j = std::clamp<std::size_t>(j, 1, xs.size() - 1);
        const double u = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
        return f(j - 1) * (1.0 - u) + f(j) * u;
    };

    // first node >= lo and last node <= hi
    const auto first = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), lo) - xs.begin());
    const auto past = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), hi) - xs.begin());
    if (first >= past) {
        return (interp(lo) + interp(hi)) * (0.5 * (hi - lo));
    }
    const std::size_t last = past - 1;

    T sum{};
    if (xs[first] > lo) {
        sum += (interp(lo) + f(first)) * (0.5 * (xs[first] - lo));
    }
    for (std::size_t i = first; i < last; ++i) {
        sum += (f(i) + f(i + 1)) * (0.5 * (xs[i + 1] - xs[i]));
    }
    if (xs[last] < hi) {
        sum += (f(last) + interp(hi)) * (0.5 * (hi - xs[last]));
    }
    return sum;
}

} // namespace cavity
