#pragma once

#include "cavity/media.hpp"
#include "cavity/scatter.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace cavity
{

// Uniform angular-frequency samples (rad/tau0, so omega0 = 2 pi).
class FrequencyGrid
{
public:
    FrequencyGrid() = default;
    FrequencyGrid(double lo, double hi, std::size_t n);

    std::size_t size() const { return n_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double spacing() const { return step_; }
    double omega(std::size_t i) const { return i + 1 == n_ ? hi_ : lo_ + step_ * static_cast<double>(i); }
    // time window after which the discrete synthesis repeats
    double period() const;

    bool operator==(const FrequencyGrid &) const = default;

private:
    double lo_ = 0.0;
    double hi_ = 0.0;
    std::size_t n_ = 0;
    double step_ = 0.0;
};

// Uniform grid over [omega0 - d_omega_r, omega0 + d_omega_r]; throws
// ErrorKind::resolution when period() <= 2 t_max.
FrequencyGrid make_frequency_grid(double omega0, double d_omega_r, std::size_t n_samples, double t_max);

// smallest n_samples accepted by make_frequency_grid
std::size_t minimum_frequency_samples(double d_omega_r, double t_max);

struct SpectralEnvelope
{
    FrequencyGrid grid;
    std::vector<cplx> alpha;
    double omega0 = units::omega0;
    double T0 = 0.0;        // half-duration, tau0
    double d_omega_r = 0.0; // smoothing bandwidth, rad/tau0

    double rise_time() const;
    // half-width of the time-domain support used for launch checks
    double support_halfwidth() const { return T0 + rise_time(); }
};

// Sinc spectrum of a rectangle of duration 2 T0, smoothed by the raised
// cosine 1 + cos(pi (w - w0) / d_omega_r), which vanishes at the band edges.
SpectralEnvelope smoothed_rect_spectrum(const FrequencyGrid &grid, double omega0, double T0, double d_omega_r);

struct PulseInjection
{
    std::shared_ptr<const SpectralEnvelope> envelope;
    cplx scale{1.0};
    double delay = 0.0;   // tau0, positive = later
    Incidence direction = Incidence::left;
    double center0 = 0.0; // envelope centre at t = delay, lambda0

    // scale * alpha * e^{i w delay} * e^{-+ i w center0 / c}
    cplx effective_alpha(std::size_t i) const;
    // envelope centre at time t while propagating freely in its lead
    double free_center(double t) const;
};

PulseInjection apply_injection(std::shared_ptr<const SpectralEnvelope> envelope, cplx scale, double delay,
                               Incidence direction, double center0);

struct TimeAxis
{
    double t0 = 0.0;
    double dt = 0.25;
    std::size_t n = 0;

    double at(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
    double back() const { return at(n - 1); }
    std::vector<double> values() const;
};

// Launch guards for a set of injections: one shared frequency grid
// (ErrorKind::incompatible_grid) and initial supports clear of the stack
// (ErrorKind::launch_position). Does not solve anything.
void check_injections(const LayerStack &stack, const std::vector<PulseInjection> &injections);

// Exact field Psi(x, t) = sum_w (dw / 2 pi) alpha_w phi_w(x) e^{-i w t} for a
// set of injections over a layer stack, normalised so that the first
// injection (the lead) alone carries unit energy in free space.
class SpectralField
{
public:
    SpectralField(LayerStack stack, std::vector<PulseInjection> injections);

    const LayerStack &stack() const { return stack_; }
    const FrequencyGrid &grid() const { return grid_; }
    const std::vector<PulseInjection> &injections() const { return injections_; }
    double normalization() const { return norm_; }
    // free-space energy of all injections together, in lead units; equals
    // 1 for the lead alone
    double trajectory_energy() const;

    // per-frequency coefficients a_w(x), so that Psi(x,t) = sum_w a_w(x) e^{-i w t}
    void coefficients_at(double x, std::span<cplx> out) const;

    cplx value(double x, double t) const;
    std::vector<cplx> snapshot(double t, std::span<const double> xs) const;

private:
    LayerStack stack_;
    std::vector<PulseInjection> injections_;
    FrequencyGrid grid_;
    double norm_ = 1.0;
    std::vector<ScatteringState> left_states_;
    std::vector<ScatteringState> right_states_;
    std::vector<cplx> left_coeff_;
    std::vector<cplx> right_coeff_;
};

// Evaluates sum_w a_w e^{-i w t_n} on a uniform time axis. Uses an FFT when
// dw * dt * N = 2 pi for an integer N, else sums directly in ascending w.
// Not thread-safe; use one per worker.
class TimeSynthesizer
{
public:
    TimeSynthesizer(const FrequencyGrid &grid, const TimeAxis &axis);
    ~TimeSynthesizer();
    TimeSynthesizer(const TimeSynthesizer &) = delete;
    TimeSynthesizer &operator=(const TimeSynthesizer &) = delete;

    bool uses_fft() const { return fft_size_ != 0; }
    void run(std::span<const cplx> coeff, std::span<cplx> out);

private:
    FrequencyGrid grid_;
    TimeAxis axis_;
    std::size_t fft_size_ = 0;
    std::vector<cplx> pre_;  // e^{-i m dw t0}
    std::vector<cplx> post_; // e^{-i w_lo t_n}
    void *buffer_ = nullptr;
    void *plan_ = nullptr;
};

// Runs fn(i, series) for every xs[i] where series = Psi(xs[i], axis).
// Indices are visited in ascending order within each block of block_size,
// blocks are handed out to workers.
void for_each_time_series(const SpectralField &field, std::span<const double> xs, const TimeAxis &axis, int threads,
                          std::size_t block_size,
                          const std::function<void(std::size_t block, std::size_t i, std::span<const cplx>)> &fn);

struct SpaceTimeField
{
    std::vector<double> x_grid;
    std::vector<double> t_grid;
    std::vector<cplx> values; // time-major: values[it * x_grid.size() + ix]
    LayerStack stack;

    std::size_t nx() const { return x_grid.size(); }
    std::size_t nt() const { return t_grid.size(); }
    cplx at(std::size_t it, std::size_t ix) const { return values[it * nx() + ix]; }
    double energy_density(std::size_t it, std::size_t ix) const { return std::norm(at(it, ix)); }
    std::size_t time_index(double t) const; // throws domain error if t is not on the grid
};

SpaceTimeField assemble_field(const LayerStack &stack, const std::vector<PulseInjection> &injections,
                              std::span<const double> x_grid, std::span<const double> t_grid, int threads = 1);

// Trapezoid integral of |Psi|^2 over the region at a time on the grid.
double region_energy(const SpaceTimeField &field, const RegionSpec &region, double t);

// Quadrature nodes and trapezoid weights covering a region uniformly.
struct RegionQuadrature
{
    std::vector<double> x;
    std::vector<double> w;
};
RegionQuadrature region_quadrature(const RegionSpec &region, double n_max,
                                   double samples_per_wavelength = default_samples_per_wavelength);

// Region energy at every time on the axis without storing the field.
std::vector<double> region_energy_series(const SpectralField &field, const RegionSpec &region, const TimeAxis &axis,
                                         int threads = 1,
                                         double samples_per_wavelength = default_samples_per_wavelength);

// Conserved energy int eps_r |Psi|^2 dx over [x_lo, x_hi] at every time on the
// axis. Quadrature nodes are aligned with the stack's interfaces. Equals
// region energy in vacuum; unlike it, stays constant while the field is
// inside dielectric layers.
std::vector<double> stored_energy_series(const SpectralField &field, double x_lo, double x_hi, const TimeAxis &axis,
                                         int threads = 1,
                                         double samples_per_wavelength = default_samples_per_wavelength);

} // namespace cavity
