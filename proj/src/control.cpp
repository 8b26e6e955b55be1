#include "cavity/control.hpp"
#include "cavity/errors.hpp"

#include <cmath>

namespace cavity
{

const char *to_string(ControlIntent intent)
{
    switch (intent) {
    case ControlIntent::none: return "none";
    case ControlIntent::cancel: return "cancel";
    case ControlIntent::truncate: return "truncate";
    case ControlIntent::confine: return "confine";
    }
    return "none";
}

std::vector<PulseInjection> ControlSchedule::with_lead(const PulseInjection &lead) const
{
    std::vector<PulseInjection> all;
    all.reserve(controls.size() + 1);
    all.push_back(lead);
    for (const ControlInjection &c : controls) {
        all.push_back(c.injection);
    }
    return all;
}

std::vector<RayInjection> ControlSchedule::rays() const
{
    std::vector<RayInjection> out;
    out.reserve(controls.size());
    for (const ControlInjection &c : controls) {
        out.push_back({c.arrival, c.injection.direction, c.ray_amplitude});
    }
    return out;
}

double arrival_time(const PulseInjection &pulse, double x_face)
{
    const double distance = pulse.direction == Incidence::left ? x_face - pulse.center0 : pulse.center0 - x_face;
    return pulse.delay + distance / units::c;
}

ControlSchedule design_truncation(const ResonanceConstants &res, double r, int N, const PulseInjection &lead)
{
    if (N < 1) {
        throw Error(ErrorKind::domain, "truncation order N must be >= 1");
    }
    if (!(r >= 0.0 && r < 1.0)) {
        throw Error(ErrorKind::domain, "mirror reflection amplitude must satisfy 0 <= r < 1");
    }
    const double amplitude = -std::pow(r, 2 * N);
    ControlSchedule s;
    s.intent = N == 1 ? ControlIntent::cancel : ControlIntent::truncate;
    s.order = N;
    PulseInjection control = lead;
    control.scale = amplitude * lead.scale;
    control.delay = lead.delay + N * res.tau_RT;
    s.controls.push_back({control, N * res.tau_RT, amplitude});
    return s;
}

ControlSchedule design_confinement(const ResonanceConstants &res, double r, double t, int K,
                                   const PulseInjection &lead, const LayerStack &stack)
{
    if (K < 1) {
        throw Error(ErrorKind::domain, "confinement needs K >= 1 control pairs");
    }
    if (!(r > 0.0 && r < 1.0)) {
        throw Error(ErrorKind::domain, "confinement needs 0 < r < 1");
    }
    if (lead.direction != Incidence::left) {
        throw Error(ErrorKind::domain, "confinement expects a left-incident lead");
    }
    const double half = 0.5 * res.tau_RT;
    const double lead_arrival = arrival_time(lead, stack.origin());
    const cplx trans(0.0, t);

    ControlSchedule s;
    s.intent = ControlIntent::confine;
    s.order = K;
    cplx inside = trans; // lead amplitude inside the cavity heading right
    for (int step = 1; step <= 2 * K; ++step) {
        // leakage trans*inside + (-r)*c vanishes
        const cplx c = trans * inside / r;
        inside = -inside / r;
        const double arrival = step * half;

        PulseInjection p = lead;
        p.scale = c * lead.scale;
        if (step % 2 == 0) {
            p.delay = lead.delay + arrival;
        } else {
            // right-incident: reach the right face at lead_arrival + arrival
            p.direction = Incidence::right;
            p.delay = lead.delay + ((step + 1) / 2) * res.tau_RT;
            p.center0 = stack.end() + (lead_arrival + arrival) - p.delay;
        }
        s.controls.push_back({p, arrival, c});
    }
    return s;
}

RayTrace raytrace(const ResonanceConstants &res, const ControlSchedule &schedule, int n_round_trips)
{
    const auto rays = schedule.rays();
    return raytrace(res.r, res.t, res.tau_RT, rays, n_round_trips);
}

} // namespace cavity
