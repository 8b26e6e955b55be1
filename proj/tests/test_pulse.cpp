#include "cavity/errors.hpp"
#include "cavity/pulse.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace cavity;

namespace
{

const double pi = std::numbers::pi;

std::size_t argmax_abs2(const std::vector<cplx> &v)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (std::norm(v[i]) > std::norm(v[best])) {
            best = i;
        }
    }
    return best;
}

std::vector<double> uniform(double lo, double hi, double h)
{
    std::vector<double> x;
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / h));
    for (std::size_t i = 0; i <= n; ++i) {
        x.push_back(lo + h * static_cast<double>(i));
    }
    return x;
}

} // namespace

TEST_CASE("frequency grid")
{
    const FrequencyGrid g = make_frequency_grid(units::omega0, test::delta_r, 4096, 1000.0);
    // window 2 pi / dw with dw = 2 delta_r / (n - 1)
    CHECK(g.period() == doctest::Approx(8190.0).epsilon(1e-12));
    CHECK(g.omega(0) == g.lo());
    CHECK(g.omega(g.size() - 1) == g.hi());
    CHECK(g.lo() == doctest::Approx(0.75 * units::omega0));
    CHECK(g.hi() == doctest::Approx(1.25 * units::omega0));

    SUBCASE("aliasing guard")
    {
        try {
            make_frequency_grid(units::omega0, test::delta_r, 2, 10.0);
            FAIL("expected a resolution error");
        } catch (const Error &e) {
            CHECK(e.kind() == ErrorKind::resolution);
            CHECK(std::string(e.what()).find("n_omega >=") != std::string::npos);
        }
        const std::size_t n = minimum_frequency_samples(test::delta_r, 600.0);
        CHECK_NOTHROW(make_frequency_grid(units::omega0, test::delta_r, n, 600.0));
        CHECK_THROWS_AS(make_frequency_grid(units::omega0, test::delta_r, n - 1, 600.0), Error);
    }
}

TEST_CASE("smoothed rectangle spectrum")
{
    const FrequencyGrid g = make_frequency_grid(units::omega0, test::delta_r, 2049, 1000.0);
    const SpectralEnvelope env = smoothed_rect_spectrum(g, units::omega0, 8.0, test::delta_r);
    CHECK(env.alpha[1024].real() == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(env.alpha.front() == cplx(0.0));
    CHECK(env.alpha.back() == cplx(0.0));
    // first sinc zero at pi / T0 = 256 samples from the centre
    CHECK(std::abs(env.alpha[1024 + 256]) < 1e-12);
    CHECK(std::abs(env.alpha[1024 - 256]) < 1e-12);
    CHECK(env.rise_time() == doctest::Approx(4.0));
    CHECK(env.support_halfwidth() == doctest::Approx(12.0));
    CHECK_THROWS_AS(smoothed_rect_spectrum(g, units::omega0, 0.0, test::delta_r), Error);
}

TEST_CASE("injections")
{
    const auto env = test::envelope(60.0, 2049, 600.0);
    const PulseInjection lead = apply_injection(env, 1.0, 0.0, Incidence::left, -20.0);
    for (std::size_t i : {0u, 700u, 1024u, 1500u}) {
        const double w = env->grid.omega(i);
        CHECK(std::abs(lead.effective_alpha(i) - env->alpha[i] * std::polar(1.0, w * 20.0)) < 1e-14);
    }
    const double r = 0.724138;
    const PulseInjection ctl = apply_injection(env, -r * r, 30.0, Incidence::left, -20.0);
    CHECK(std::abs(ctl.effective_alpha(1024) - (-r * r) * lead.effective_alpha(1024) *
                                                   std::polar(1.0, env->grid.omega(1024) * 30.0)) < 1e-13);
    CHECK(lead.free_center(10.0) == doctest::Approx(-10.0));
    CHECK(ctl.free_center(40.0) == doctest::Approx(-10.0));
    const PulseInjection right = apply_injection(env, 1.0, 0.0, Incidence::right, 50.0);
    CHECK(right.free_center(10.0) == doctest::Approx(40.0));
    CHECK_THROWS_AS(apply_injection(nullptr, 1.0, 0.0, Incidence::left, 0.0), Error);
}

TEST_CASE("launch guards")
{
    const LayerStack stack = build_fabry_perot(FabryPerotSpec{});
    const auto env = test::envelope(60.0, 2049, 600.0);
    const auto other = test::envelope(60.0, 2051, 600.0);
    const PulseInjection good = test::lead_before(env, stack.origin());
    CHECK_NOTHROW(check_injections(stack, {good}));

    const PulseInjection overlap = apply_injection(env, 1.0, 0.0, Incidence::left, stack.origin() - 5.0);
    try {
        check_injections(stack, {overlap});
        FAIL("expected launch error");
    } catch (const Error &e) {
        CHECK(e.kind() == ErrorKind::launch_position);
    }
    const PulseInjection mismatched = test::lead_before(other, stack.origin());
    try {
        SpectralField f(stack, {good, mismatched});
        FAIL("expected grid error");
    } catch (const Error &e) {
        CHECK(e.kind() == ErrorKind::incompatible_grid);
    }
    CHECK_THROWS_AS(check_injections(stack, {}), Error);
}

TEST_CASE("time synthesis paths agree with a direct sum")
{
    const FrequencyGrid g = make_frequency_grid(units::omega0, test::delta_r, 257, 100.0);
    std::vector<cplx> coeff(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        coeff[i] = std::polar(1.0 + 0.01 * static_cast<double>(i % 7), 0.3 * static_cast<double>(i));
    }
    for (double dt : {0.25, 0.3}) {
        const TimeAxis axis{-10.0, dt, 200};
        TimeSynthesizer synth(g, axis);
        CHECK(synth.uses_fft() == (dt == 0.25));
        std::vector<cplx> out(axis.n);
        synth.run(coeff, out);
        double worst = 0.0;
        for (std::size_t n = 0; n < axis.n; ++n) {
            cplx s = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                s += coeff[i] * std::polar(1.0, -g.omega(i) * axis.at(n));
            }
            worst = std::max(worst, std::abs(s - out[n]));
        }
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("free propagation")
{
    const LayerStack vacuum(0.0, {});
    const auto env = test::envelope(60.0, 2049, 600.0);
    const PulseInjection lead = apply_injection(env, 1.0, 0.0, Incidence::left, 0.0);
    const SpectralField field(vacuum, {lead});
    const double h = 1.0 / 32.0;
    const auto xs = uniform(-100.0, 200.0, h);

    SUBCASE("moves at c")
    {
        for (double t : {0.0, 50.0, 120.0}) {
            const auto snap = field.snapshot(t, xs);
            // peak is flat-topped; use the energy centroid
            double e = 0.0, m = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                e += std::norm(snap[i]);
                m += xs[i] * std::norm(snap[i]);
            }
            CHECK(std::abs(m / e - t) < h);
            CHECK(std::abs(xs[argmax_abs2(snap)] - t) < env->T0 + h);
        }
    }

    SUBCASE("unit energy")
    {
        const RegionSpec all = make_region("all", -100.0, 100.0);
        const TimeAxis axis{0.0, 0.25, 1};
        const auto e = region_energy_series(field, all, axis);
        CHECK(e[0] == doctest::Approx(1.0).epsilon(1e-3));
        CHECK(field.trajectory_energy() == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("translation")
    {
        const double shift = 13.37;
        const PulseInjection moved = apply_injection(env, 1.0, 0.0, Incidence::left, shift);
        const SpectralField f2(vacuum, {moved});
        double sq = 0.0;
        std::size_t count = 0;
        for (double t : {0.0, 40.0}) {
            for (double x = -40.0; x < 80.0; x += 0.37) {
                sq += std::norm(f2.value(x + shift, t) - field.value(x, t));
                ++count;
            }
        }
        CHECK(std::sqrt(sq / static_cast<double>(count)) < 1e-6);
    }
}

TEST_CASE("single frequency has constant modulus")
{
    const LayerStack vacuum(0.0, {});
    const FrequencyGrid g = make_frequency_grid(units::omega0, test::delta_r, 65, 10.0);
    SpectralEnvelope env;
    env.grid = g;
    env.alpha.assign(g.size(), 0.0);
    env.alpha[32] = 1.0;
    env.T0 = 1.0;
    env.d_omega_r = test::delta_r;
    const auto shared = std::make_shared<const SpectralEnvelope>(env);
    const SpectralField field(vacuum, {apply_injection(shared, 1.0, 0.0, Incidence::left, 0.0)});
    const double m0 = std::abs(field.value(0.0, 0.0));
    for (double x : {-7.0, 0.3, 11.0}) {
        for (double t : {0.0, 3.3, 20.0}) {
            CHECK(std::abs(field.value(x, t)) == doctest::Approx(m0).epsilon(1e-12));
        }
    }
}

TEST_CASE("region energy")
{
    const LayerStack stack = build_fabry_perot(FabryPerotSpec{});
    const auto env = test::envelope(60.0, 2049, 600.0);
    const PulseInjection lead = test::lead_before(env, stack.origin());

    SUBCASE("vanishing field")
    {
        const PulseInjection anti = apply_injection(env, -1.0, 0.0, Incidence::left, lead.center0);
        const SpectralField zero(stack, {lead, anti});
        const RegionSpec B = make_region("B", stack.interfaces()[1], stack.interfaces()[2]);
        const TimeAxis axis{0.0, 5.0, 40};
        for (double e : region_energy_series(zero, B, axis)) {
            CHECK(e == 0.0);
        }
    }

    SUBCASE("outside the grid")
    {
        const auto xs = uniform(140.0, 180.0, 0.01);
        const auto ts = std::vector<double>{0.0, 1.0};
        const SpaceTimeField st = assemble_field(stack, {lead}, xs, ts);
        CHECK_NOTHROW(region_energy(st, make_region("in", 150.0, 160.0), 1.0));
        try {
            region_energy(st, make_region("out", 100.0, 160.0), 1.0);
            FAIL("expected domain error");
        } catch (const Error &e) {
            CHECK(e.kind() == ErrorKind::domain);
        }
        CHECK_THROWS_AS(region_energy(st, make_region("in", 150.0, 160.0), 0.5), Error);
    }
}

TEST_CASE("field is linear in its injections")
{
    const LayerStack stack = build_fabry_perot(FabryPerotSpec{});
    const auto env = test::envelope(60.0, 2049, 600.0);
    const PulseInjection lead = test::lead_before(env, stack.origin());
    const cplx c = std::polar(0.52, 2.1);
    const PulseInjection ctl = apply_injection(env, c, 30.0, Incidence::left, lead.center0);
    const PulseInjection back = apply_injection(env, 0.3, 15.0, Incidence::right, stack.end() + 40.0);

    const SpectralField both(stack, {lead, ctl, back});
    const SpectralField f_lead(stack, {lead});
    // each field is normalised to its first injection, so scale back to lead units
    const SpectralField f_ctl(stack, {ctl});
    const SpectralField f_back(stack, {back});

    double worst = 0.0, peak = 0.0;
    for (double t : {0.0, 40.0, 75.0, 130.0}) {
        for (double x = 130.0; x < 220.0; x += 0.731) {
            const cplx sum = f_lead.value(x, t) + std::abs(c) * f_ctl.value(x, t) + 0.3 * f_back.value(x, t);
            const cplx direct = both.value(x, t);
            worst = std::max(worst, std::abs(sum - direct));
            peak = std::max(peak, std::abs(direct));
        }
    }
    CHECK(worst < 1e-12 * std::max(1.0, peak));
}

TEST_CASE("delayed injection is the time-shifted field")
{
    const LayerStack stack = build_fabry_perot(FabryPerotSpec{});
    const auto env = test::envelope(60.0, 2049, 600.0);
    const PulseInjection lead = test::lead_before(env, stack.origin());
    const double tau = 60.0;
    PulseInjection late = lead;
    late.delay = tau;
    const SpectralField f1(stack, {lead});
    const SpectralField f2(stack, {late});
    double worst = 0.0;
    for (double t : {60.0, 100.0, 170.0}) {
        for (double x : {120.0, 159.0, 165.3, 180.0}) {
            worst = std::max(worst, std::abs(f2.value(x, t) - f1.value(x, t - tau)));
        }
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("stored energy is conserved")
{
    const LayerStack stack = build_fabry_perot(FabryPerotSpec{});
    const auto env = test::envelope(60.0, 2049, 400.0);
    const PulseInjection lead = test::lead_before(env, stack.origin());
    const SpectralField field(stack, {lead});
    const TimeAxis axis{0.0, 5.0, 41};
    const auto e = stored_energy_series(field, -250.0, 450.0, axis, 2, 16.0);
    double worst = 0.0;
    for (double v : e) {
        worst = std::max(worst, std::abs(v / e.front() - 1.0));
    }
    CHECK(worst < 1e-3);
    CHECK(e.front() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("assembled field matches pointwise evaluation")
{
    const LayerStack stack = build_fabry_perot(FabryPerotSpec{});
    const auto env = test::envelope(60.0, 2049, 400.0);
    const PulseInjection lead = test::lead_before(env, stack.origin());
    const auto xs = uniform(150.0, 170.0, 0.5);
    const std::vector<double> ts{0.0, 30.0, 45.5, 90.0};
    const SpaceTimeField st = assemble_field(stack, {lead}, xs, ts, 2);
    const SpectralField f(stack, {lead});
    REQUIRE(st.nx() == xs.size());
    REQUIRE(st.nt() == ts.size());
    for (std::size_t it = 0; it < ts.size(); ++it) {
        for (std::size_t ix = 0; ix < xs.size(); ix += 5) {
            CHECK(std::abs(st.at(it, ix) - f.value(xs[ix], ts[it])) < 1e-12);
        }
    }
    CHECK(st.time_index(45.5) == 2);
}
