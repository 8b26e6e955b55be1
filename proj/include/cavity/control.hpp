#pragma once

#include "cavity/analytic.hpp"
#include "cavity/media.hpp"
#include "cavity/pulse.hpp"

#include <vector>

namespace cavity
{

enum class ControlIntent
{
    none,
    cancel,   // truncation after one round trip
    truncate,
    confine,
};

const char *to_string(ControlIntent intent);

struct ControlInjection
{
    PulseInjection injection;
    // arrival at its mirror relative to the lead's arrival at the left mirror
    double arrival = 0.0;
    // amplitude relative to the lead in the resonant ray model
    cplx ray_amplitude;
};

// Control pulses that accompany a lead pulse. The lead itself is not part of
// the schedule.
struct ControlSchedule
{
    ControlIntent intent = ControlIntent::none;
    int order = 0; // N for truncation, K for confinement
    std::vector<ControlInjection> controls;

    // lead first, then the controls in schedule order
    std::vector<PulseInjection> with_lead(const PulseInjection &lead) const;
    std::vector<RayInjection> rays() const;
};

// Time at which a left-incident pulse's envelope centre reaches x_face.
double arrival_time(const PulseInjection &pulse, double x_face);

// One left-incident copy of the lead with scale -r^(2N) and N round trips of
// extra delay. Removes every transmitted pulse after the N-th.
ControlSchedule design_truncation(const ResonanceConstants &res, double r, int N, const PulseInjection &lead);

// K pairs of control pulses, right-incident at the right mirror and then
// left-incident at the left mirror on successive transits. Each one is
// phased so that the leakage leaving that mirror cancels, so the stored
// amplitude grows by 1/r per transit.
ControlSchedule design_confinement(const ResonanceConstants &res, double r, double t, int K,
                                   const PulseInjection &lead, const LayerStack &stack);

RayTrace raytrace(const ResonanceConstants &res, const ControlSchedule &schedule, int n_round_trips);

} // namespace cavity
