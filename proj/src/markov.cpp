#include "cavity/markov.hpp"
#include "cavity/errors.hpp"
#include "cavity/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace cavity
{

OverlapMatrix overlap_matrix(const SpaceTimeField &field1, const SpaceTimeField &field2, const RegionSpec &region,
                             double t)
{
    if (field1.x_grid != field2.x_grid || field1.t_grid != field2.t_grid) {
        throw Error(ErrorKind::incompatible_grid, "overlap needs both fields on the same space-time grid");
    }
    const std::size_t i1 = field1.time_index(t);
    const std::span<const double> xs = field1.x_grid;
    OverlapMatrix p;
    p.t = t;
    p.p11 = trapezoid_region<double>(xs, region.x_lo, region.x_hi,
                                     [&](std::size_t ix) { return field1.energy_density(i1, ix); });
    p.p22 = trapezoid_region<double>(xs, region.x_lo, region.x_hi,
                                     [&](std::size_t ix) { return field2.energy_density(i1, ix); });
    p.p12 = trapezoid_region<cplx>(xs, region.x_lo, region.x_hi,
                                   [&](std::size_t ix) { return std::conj(field1.at(i1, ix)) * field2.at(i1, ix); });
    return p;
}

double hs_distance(const OverlapMatrix &p)
{
    const double radicand = p.p11 * p.p11 + p.p22 * p.p22 - 2.0 * std::norm(p.p12);
    if (radicand < -1e-12) {
        std::ostringstream os;
        os << "Hilbert-Schmidt radicand " << radicand << " is negative at t = " << p.t;
        throw Error(ErrorKind::numeric_inconsistency, os.str());
    }
    return std::sqrt(std::max(radicand, 0.0) / 2.0);
}

DistanceSeries distance_series(const SpaceTimeField &field1, const SpaceTimeField &field2, const RegionSpec &region,
                               std::span<const double> t_grid)
{
    DistanceSeries s;
    s.region = region;
    s.t.assign(t_grid.begin(), t_grid.end());
    s.D.reserve(t_grid.size());
    s.overlaps.reserve(t_grid.size());
    for (double t : t_grid) {
        s.overlaps.push_back(overlap_matrix(field1, field2, region, t));
        s.D.push_back(hs_distance(s.overlaps.back()));
    }
    return s;
}

NonMarkovSeries nonmarkov_content(const DistanceSeries &series)
{
    NonMarkovSeries out;
    out.t = series.t;
    out.ID.assign(series.D.size(), 0.0);
    double acc = 0.0;
    for (std::size_t k = 1; k < series.D.size(); ++k) {
        acc += std::max(series.D[k] - series.D[k - 1], 0.0);
        out.ID[k] = acc;
    }
    out.total = acc;
    return out;
}

std::vector<OverlapMatrix> delayed_overlap_series(const SpectralField &field, const RegionSpec &region,
                                                  const TimeAxis &axis, double tau_M, int threads,
                                                  double samples_per_wavelength)
{
    const RegionQuadrature q = region_quadrature(region, field.stack().max_index(), samples_per_wavelength);
    const double shift_exact = tau_M / axis.dt;
    const double shift_rounded = std::round(shift_exact);
    const bool on_grid = std::abs(shift_exact - shift_rounded) <= 1e-9 * std::max(1.0, shift_rounded);

    const std::size_t n = axis.n;
    struct Acc
    {
        std::vector<double> p11, p22;
        std::vector<cplx> p12;
    };
    constexpr std::size_t block = 32;
    const std::size_t n_blocks = (q.x.size() + block - 1) / block;
    std::vector<Acc> partial(n_blocks, Acc{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                                           std::vector<cplx>(n, 0.0)});

    auto accumulate = [&](Acc &acc, double w, std::span<const cplx> psi1, std::span<const cplx> psi2) {
        for (std::size_t k = 0; k < n; ++k) {
            acc.p11[k] += w * std::norm(psi1[k]);
            acc.p22[k] += w * std::norm(psi2[k]);
            acc.p12[k] += w * std::conj(psi1[k]) * psi2[k];
        }
    };

    if (on_grid && shift_rounded >= 0.0) {
        // Psi2 on the axis is Psi1 shifted by `shift` samples
        const auto shift = static_cast<std::size_t>(shift_rounded);
        const TimeAxis extended{axis.t0, axis.dt, n + shift};
        for_each_time_series(field, q.x, extended, threads, block,
                             [&](std::size_t b, std::size_t i, std::span<const cplx> s) {
                                 accumulate(partial[b], q.w[i], s.first(n), s.subspan(shift, n));
                             });
    } else {
        // general delay: two syntheses per node
        const TimeAxis later{axis.t0 + tau_M, axis.dt, n};
        std::vector<std::vector<cplx>> psi1(q.x.size());
        for_each_time_series(field, q.x, axis, threads, block, [&](std::size_t, std::size_t i, std::span<const cplx> s) {
            psi1[i].assign(s.begin(), s.end());
        });
        for_each_time_series(field, q.x, later, threads, block, [&](std::size_t b, std::size_t i, std::span<const cplx> s) {
            accumulate(partial[b], q.w[i], psi1[i], s);
            psi1[i] = {};
        });
    }

    std::vector<OverlapMatrix> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k].t = axis.at(k);
    }
    for (const Acc &acc : partial) {
        for (std::size_t k = 0; k < n; ++k) {
            out[k].p11 += acc.p11[k];
            out[k].p22 += acc.p22[k];
            out[k].p12 += acc.p12[k];
        }
    }
    const double inv_energy = 1.0 / field.trajectory_energy();
    for (OverlapMatrix &p : out) {
        p.p11 *= inv_energy;
        p.p22 *= inv_energy;
        p.p12 *= inv_energy;
    }
    return out;
}

DistanceSeries delayed_distance_series(const SpectralField &field, const RegionSpec &region, const TimeAxis &axis,
                                       double tau_M, int threads, double samples_per_wavelength)
{
    DistanceSeries s;
    s.region = region;
    s.tau_M = tau_M;
    s.t = axis.values();
    s.overlaps = delayed_overlap_series(field, region, axis, tau_M, threads, samples_per_wavelength);
    s.D.reserve(s.overlaps.size());
    for (const OverlapMatrix &p : s.overlaps) {
        s.D.push_back(hs_distance(p));
    }
    return s;
}

} // namespace cavity
