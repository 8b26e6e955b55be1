#pragma once

#include "cavity/media.hpp"
#include "cavity/pulse.hpp"

#include <span>
#include <vector>

namespace cavity
{

// Region overlaps p_ij = int_region conj(Psi_i) Psi_j dx at one time.
struct OverlapMatrix
{
    double t = 0.0;
    double p11 = 0.0;
    double p22 = 0.0;
    cplx p12;

    // |p12|^2 <= p11 p22 (+ tol)
    bool cauchy_schwarz(double tol = 1e-12) const { return std::norm(p12) <= p11 * p22 + tol; }
};

OverlapMatrix overlap_matrix(const SpaceTimeField &field1, const SpaceTimeField &field2, const RegionSpec &region,
                             double t);

// Hilbert-Schmidt distance sqrt(p11^2 + p22^2 - 2 |p12|^2) / sqrt(2). A
// radicand in (-1e-12, 0) is clamped to zero; anything below throws
// ErrorKind::numeric_inconsistency.
double hs_distance(const OverlapMatrix &p);

struct DistanceSeries
{
    std::vector<double> t;
    std::vector<double> D;
    std::vector<OverlapMatrix> overlaps;
    RegionSpec region;
    double tau_M = 0.0;
};

DistanceSeries distance_series(const SpaceTimeField &field1, const SpaceTimeField &field2, const RegionSpec &region,
                               std::span<const double> t_grid);

struct NonMarkovSeries
{
    std::vector<double> t;
    std::vector<double> ID;
    double total = 0.0;
};

// Positive-variation sum ID(t_k) = sum_{j<k} max(D_{j+1} - D_j, 0).
NonMarkovSeries nonmarkov_content(const DistanceSeries &series);

// Overlaps of the trajectory pair Psi1(x, t) and Psi2(x, t) = Psi1(x, t + tau_M)
// computed from the spectral field directly, without storing Psi(x, t). Each
// trajectory is scaled to unit total energy, control pulses included.
std::vector<OverlapMatrix> delayed_overlap_series(const SpectralField &field, const RegionSpec &region,
                                                  const TimeAxis &axis, double tau_M, int threads = 1,
                                                  double samples_per_wavelength = default_samples_per_wavelength);

DistanceSeries delayed_distance_series(const SpectralField &field, const RegionSpec &region, const TimeAxis &axis,
                                       double tau_M, int threads = 1,
                                       double samples_per_wavelength = default_samples_per_wavelength);

} // namespace cavity
