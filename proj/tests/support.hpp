#pragma once

#include "cavity/analytic.hpp"
#include "cavity/pulse.hpp"

#include <memory>

namespace test
{

using namespace cavity;

inline constexpr double delta_r = 0.25 * units::omega0;

inline std::shared_ptr<const SpectralEnvelope> envelope(double T0_omega0, std::size_t n_omega, double t_max)
{
    const FrequencyGrid grid = make_frequency_grid(units::omega0, delta_r, n_omega, t_max);
    return std::make_shared<const SpectralEnvelope>(
        smoothed_rect_spectrum(grid, units::omega0, T0_omega0 / units::omega0, delta_r));
}

// lead pulse whose support ends `gap` before x_face
inline PulseInjection lead_before(const std::shared_ptr<const SpectralEnvelope> &env, double x_face, double gap = 1.0)
{
    return apply_injection(env, 1.0, 0.0, Incidence::left, x_face - env->support_halfwidth() - gap);
}

inline std::vector<double> power_at(const SpectralField &field, double x, const TimeAxis &axis)
{
    std::vector<double> p;
    const std::vector<double> xs{x};
    for_each_time_series(field, xs, axis, 1, 1, [&](std::size_t, std::size_t, std::span<const cplx> s) {
        for (const cplx &v : s) {
            p.push_back(std::norm(v));
        }
    });
    return p;
}

} // namespace test
