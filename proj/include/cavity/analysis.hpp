#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cavity
{

// One pulse of a detected pulse train; [begin, end) indexes the series.
struct PulseSegment
{
    std::size_t begin = 0;
    std::size_t end = 0;
    double energy = 0.0;    // integral of power dt over the segment
    double centroid = 0.0;  // power-weighted mean time
    double peak = 0.0;
    double peak_time = 0.0;
};

// Splits a power time series into pulses: runs above rel_threshold * max,
// with segment boundaries at the power minimum between neighbouring runs so
// that segment energies add up to the total.
std::vector<PulseSegment> segment_pulses(std::span<const double> t, std::span<const double> power,
                                         double rel_threshold = 1e-4);

std::size_t count_peaks_above(std::span<const PulseSegment> pulses, double fraction_of_first);

struct ExponentialFit
{
    double log_amplitude = 0.0;
    double rate = 0.0;       // d ln(y) / dt
    double decay_time = 0.0; // -1 / rate
};

// Least squares fit of ln(y) = a + rate * t.
ExponentialFit fit_exponential(std::span<const double> t, std::span<const double> y);

} // namespace cavity
