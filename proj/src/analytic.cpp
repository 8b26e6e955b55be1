#include "cavity/analytic.hpp"
#include "cavity/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cavity
{

double mirror_transmission(double n_r, double L_m, double lambda)
{
    const double k1 = 2.0 * std::numbers::pi / lambda;
    const double k2 = 2.0 * std::numbers::pi * n_r / lambda;
    const double contrast = (k1 * k1 - k2 * k2) / (2.0 * k1 * k2);
    const double s = std::sin(k2 * L_m);
    return 1.0 / (1.0 + contrast * contrast * s * s);
}

ResonanceConstants resonance_constants(const FabryPerotSpec &spec)
{
    if (!(spec.L_B > 0.0) || !(spec.n_r >= 1.0)) {
        throw Error(ErrorKind::invalid_geometry, "resonance constants need L_B > 0 and n_r >= 1");
    }
    ResonanceConstants rc;
    rc.tau_RT = 2.0 * spec.L_B / units::c;
    const double T = mirror_transmission(spec.n_r, spec.mirror_thickness(), units::lambda0);
    const double R = 1.0 - T;
    if (!(R > 0.0)) {
        throw Error(ErrorKind::undefined_q, "mirrors do not reflect at omega0, Q is undefined");
    }
    rc.r = std::sqrt(R);
    rc.t = std::sqrt(T);
    rc.tau_Q = -rc.tau_RT / (4.0 * std::log(rc.r));
    rc.Q = units::omega0 * rc.tau_Q;
    rc.Gamma = 1.0 / rc.tau_Q;
    return rc;
}

double lorentzian_spectrum(double omega, double omega0, double Gamma, double S0)
{
    if (!(Gamma > 0.0)) {
        throw Error(ErrorKind::domain, "Lorentzian linewidth must be positive");
    }
    const double d = omega - omega0;
    return S0 / (d * d + 0.25 * Gamma * Gamma);
}

double geometric_sum(cplx a, cplx x, int N)
{
    if (N < 1) {
        throw Error(ErrorKind::domain, "geometric sum needs N >= 1");
    }
    if (x == cplx(1.0)) {
        return std::norm(a * static_cast<double>(N));
    }
    if (std::abs(1.0 - x) < 1e-6) {
        // closed form loses digits next to the removable singularity
        cplx s = 0.0, p = 1.0;
        for (int n = 0; n < N; ++n) {
            s += p;
            p *= x;
        }
        return std::norm(a * s);
    }
    return std::norm(a * (1.0 - std::pow(x, N)) / (1.0 - x));
}

double weighted_sum(std::span<const cplx> a, cplx x)
{
    if (a.empty()) {
        throw Error(ErrorKind::domain, "weighted sum needs at least one coefficient");
    }
    cplx s = 0.0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) {
        s = s * x + *it;
    }
    return std::norm(s);
}

namespace
{

// half-round-trip step index of an injection; parity must match its mirror
int injection_step(const RayInjection &inj, double tau_RT)
{
    const double steps = inj.arrival / (0.5 * tau_RT);
    const double rounded = std::round(steps);
    const auto s = static_cast<long>(rounded);
    const bool on_grid = std::abs(steps - rounded) <= 1e-9 * std::max(1.0, std::abs(steps));
    const bool parity_ok = inj.direction == Incidence::left ? s % 2 == 0 : s % 2 != 0;
    if (!on_grid || !parity_ok || s < 0) {
        std::ostringstream os;
        os << (inj.direction == Incidence::left ? "left" : "right") << "-incident injection arriving at "
           << inj.arrival << " tau0 is off the resonant pulse train (tau_RT = " << tau_RT << ")";
        throw Error(ErrorKind::model_domain, os.str());
    }
    return static_cast<int>(s);
}

} // namespace

RayTrace raytrace(double r, double t, double tau_RT, std::span<const RayInjection> controls, int n_round_trips)
{
    if (!(r >= 0.0 && r < 1.0) || !(tau_RT > 0.0) || n_round_trips < 1) {
        throw Error(ErrorKind::domain, "raytrace needs 0 <= r < 1, tau_RT > 0, n_round_trips >= 1");
    }
    if (std::abs(r * r + t * t - 1.0) > 1e-9) {
        throw Error(ErrorKind::domain, "raytrace needs r^2 + t^2 = 1");
    }
    const int n_steps = 2 * n_round_trips + 1;
    std::vector<cplx> external(static_cast<std::size_t>(n_steps), 0.0);
    external[0] = 1.0; // lead
    double scale = 1.0;
    for (const RayInjection &inj : controls) {
        const int s = injection_step(inj, tau_RT);
        if (s < n_steps) {
            external[static_cast<std::size_t>(s)] += inj.amplitude;
        }
        scale = std::max(scale, std::abs(inj.amplitude));
    }

    const cplx refl = -r;
    const cplx trans(0.0, t);
    const double negligible = 1e-13 * scale;

    RayTrace out;
    out.tau_RT = tau_RT;
    out.cavity.reserve(static_cast<std::size_t>(n_steps));
    cplx inside = 0.0; // amplitude arriving at the mirror from inside
    for (int s = 0; s < n_steps; ++s) {
        const cplx ext = external[static_cast<std::size_t>(s)];
        const cplx emitted = trans * inside + refl * ext;
        inside = refl * inside + trans * ext;
        out.cavity.push_back(inside);
        if (std::abs(emitted) > negligible) {
            out.events.push_back({0.5 * tau_RT * s, s % 2 == 0 ? Side::left : Side::right, emitted});
        }
    }
    return out;
}

std::vector<RayEvent> events_on(const RayTrace &trace, Side side)
{
    std::vector<RayEvent> out;
    std::copy_if(trace.events.begin(), trace.events.end(), std::back_inserter(out),
                 [side](const RayEvent &e) { return e.side == side; });
    return out;
}

double integrating_detector(const RayTrace &trace, Side side, std::size_t n_events)
{
    cplx sum = 0.0;
    std::size_t count = 0;
    for (const RayEvent &e : trace.events) {
        if (e.side != side) {
            continue;
        }
        if (count++ == n_events) {
            break;
        }
        sum += e.amplitude;
    }
    return std::norm(sum);
}

double cavity_energy_path_sum(double r, double t, double tau_RT, std::span<const RayInjection> controls, int step)
{
    // b_m: amplitude coupled into the cavity at step m
    std::vector<cplx> b(static_cast<std::size_t>(step + 1), 0.0);
    const cplx trans(0.0, t);
    b[0] = trans;
    for (const RayInjection &inj : controls) {
        const int s = injection_step(inj, tau_RT);
        if (s <= step) {
            b[static_cast<std::size_t>(s)] += trans * inj.amplitude;
        }
    }
    cplx sum = 0.0;
    for (int m = 0; m <= step; ++m) {
        sum += b[static_cast<std::size_t>(m)] * std::pow(cplx(-r), step - m);
    }
    return std::norm(sum);
}

} // namespace cavity
