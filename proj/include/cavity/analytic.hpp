#pragma once

#include "cavity/media.hpp"
#include "cavity/scatter.hpp"

#include <span>
#include <vector>

namespace cavity
{

struct ResonanceConstants
{
    double tau_RT = 0.0; // round-trip time, tau0
    double tau_Q = 0.0;  // energy ring-down time, tau0
    double Q = 0.0;
    double Gamma = 0.0;  // 1/tau_Q
    double r = 0.0;      // single-mirror |r| at omega0
    double t = 0.0;      // single-mirror |t| at omega0
};

// Single-slab power transmission |t|^2 of a lossless mirror in vacuum.
double mirror_transmission(double n_r, double L_m, double lambda);

// Round-trip model: stored energy drops by r^4 per round trip.
ResonanceConstants resonance_constants(const FabryPerotSpec &spec);

double lorentzian_spectrum(double omega, double omega0, double Gamma, double S0);

// |a (1 - x^N) / (1 - x)|^2, with the removable singularity at x = 1.
double geometric_sum(cplx a, cplx x, int N);

// |sum_n a_n x^n|^2 (Horner evaluation).
double weighted_sum(std::span<const cplx> a, cplx x);

// --- resonant ray trace ---------------------------------------------------
//
// On-resonance pulse-train model of a symmetric two-mirror cavity. Mirror
// reflection is -r and transmission is i t from either side. Time is
// measured from the arrival of the unit lead pulse at the left mirror; the
// intracavity pulse hits the left mirror at even multiples of tau_RT/2 and
// the right mirror at odd multiples.

enum class Side
{
    left,
    right,
};

struct RayInjection
{
    double arrival = 0.0; // at its mirror, relative to the lead, tau0
    Incidence direction = Incidence::left;
    cplx amplitude{1.0};  // relative to the lead
};

struct RayEvent
{
    double time = 0.0;
    Side side = Side::left;
    cplx amplitude;
};

struct RayTrace
{
    double tau_RT = 0.0;
    std::vector<RayEvent> events; // emitted amplitudes, non-negligible only
    // intracavity amplitude leaving the mirror at step s (s = 0..n_steps-1)
    std::vector<cplx> cavity;
};

// Injections must arrive on the pulse train: left-incident at multiples of
// tau_RT, right-incident at odd multiples of tau_RT/2 (ErrorKind::model_domain
// otherwise). n_round_trips round trips are traced.
RayTrace raytrace(double r, double t, double tau_RT, std::span<const RayInjection> controls, int n_round_trips);

std::vector<RayEvent> events_on(const RayTrace &trace, Side side);

// Coherent readout |sum amplitude|^2 of the first n events on one side, the
// quantity an integrating detector records when the contributions overlap.
double integrating_detector(const RayTrace &trace, Side side, std::size_t n_events);

// Intracavity energy after `step` mirror events as the explicit path sum
// |sum_m b_m (-r)^(step-m)|^2, where b_m is the amplitude coupled in at step m.
// Independent of the step recursion inside raytrace().
double cavity_energy_path_sum(double r, double t, double tau_RT, std::span<const RayInjection> controls, int step);

} // namespace cavity
