#include "cavity/analysis.hpp"
#include "cavity/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cavity
{

std::vector<PulseSegment> segment_pulses(std::span<const double> t, std::span<const double> power,
                                         double rel_threshold)
{
    if (t.size() != power.size() || t.size() < 2) {
        throw Error(ErrorKind::domain, "pulse segmentation needs matching series of >= 2 samples");
    }
    const double max_power = *std::max_element(power.begin(), power.end());
    std::vector<PulseSegment> out;
    if (!(max_power > 0.0)) {
        return out;
    }
    const double threshold = rel_threshold * max_power;

    // runs above threshold
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    for (std::size_t i = 0; i < power.size();) {
        if (power[i] <= threshold) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < power.size() && power[j] > threshold) {
            ++j;
        }
        runs.emplace_back(i, j);
        i = j;
    }

    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    for (std::size_t k = 0; k < runs.size(); ++k) {
        std::size_t begin = 0, end = power.size();
        if (k > 0) {
            const auto lo = power.begin() + static_cast<std::ptrdiff_t>(runs[k - 1].second);
            const auto hi = power.begin() + static_cast<std::ptrdiff_t>(runs[k].first);
            begin = static_cast<std::size_t>(std::min_element(lo, hi) - power.begin());
        }
        if (k + 1 < runs.size()) {
            const auto lo = power.begin() + static_cast<std::ptrdiff_t>(runs[k].second);
            const auto hi = power.begin() + static_cast<std::ptrdiff_t>(runs[k + 1].first);
            end = static_cast<std::size_t>(std::min_element(lo, hi) - power.begin());
        }
        PulseSegment seg;
        seg.begin = begin;
        seg.end = end;
        double moment = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            seg.energy += power[i] * dt;
            moment += t[i] * power[i] * dt;
            if (power[i] > seg.peak) {
                seg.peak = power[i];
                seg.peak_time = t[i];
            }
        }
        seg.centroid = seg.energy > 0.0 ? moment / seg.energy : t[begin];
        out.push_back(seg);
    }
    return out;
}

std::size_t count_peaks_above(std::span<const PulseSegment> pulses, double fraction_of_first)
{
    if (pulses.empty()) {
        return 0;
    }
    const double limit = fraction_of_first * pulses.front().peak;
    return static_cast<std::size_t>(std::count_if(pulses.begin(), pulses.end(),
                                                  [limit](const PulseSegment &p) { return p.peak > limit; }));
}

ExponentialFit fit_exponential(std::span<const double> t, std::span<const double> y)
{
    if (t.size() != y.size() || t.size() < 2) {
        throw Error(ErrorKind::domain, "exponential fit needs >= 2 matching samples");
    }
    const auto n = static_cast<double>(t.size());
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(y[i] > 0.0)) {
            throw Error(ErrorKind::domain, "exponential fit needs positive samples");
        }
        const double ly = std::log(y[i]);
        st += t[i];
        sy += ly;
        stt += t[i] * t[i];
        sty += t[i] * ly;
    }
    ExponentialFit fit;
    fit.rate = (n * sty - st * sy) / (n * stt - st * st);
    fit.log_amplitude = (sy - fit.rate * st) / n;
    fit.decay_time = -1.0 / fit.rate;
    return fit;
}

} // namespace cavity
