#include "cavity/pulse.hpp"
#include "cavity/errors.hpp"
#include "cavity/parallel.hpp"
#include "cavity/quadrature.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <sstream>

namespace cavity
{

namespace
{
constexpr double two_pi = 2.0 * std::numbers::pi;

// FFTW's planner is not re-entrant
std::mutex &fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}
} // namespace

FrequencyGrid::FrequencyGrid(double lo, double hi, std::size_t n) : lo_(lo), hi_(hi), n_(n)
{
    if (n < 2 || !(hi > lo)) {
        throw Error(ErrorKind::resolution, "frequency grid needs n >= 2 and hi > lo");
    }
    step_ = (hi - lo) / static_cast<double>(n - 1);
}

double FrequencyGrid::period() const
{
    return two_pi / step_;
}

std::size_t minimum_frequency_samples(double d_omega_r, double t_max)
{
    // period 2 pi (n - 1) / (2 d_omega_r) must exceed 2 t_max
    const double cells = 2.0 * d_omega_r * t_max / std::numbers::pi;
    return static_cast<std::size_t>(std::floor(cells)) + 2;
}

FrequencyGrid make_frequency_grid(double omega0, double d_omega_r, std::size_t n_samples, double t_max)
{
    if (!(d_omega_r > 0.0) || !(t_max > 0.0)) {
        throw Error(ErrorKind::domain, "frequency grid needs d_omega_r > 0 and t_max > 0");
    }
    if (n_samples < 2) {
        throw Error(ErrorKind::resolution, "frequency grid needs at least 2 samples");
    }
    FrequencyGrid g(omega0 - d_omega_r, omega0 + d_omega_r, n_samples);
    if (!(g.period() > 2.0 * t_max)) {
        std::ostringstream os;
        os << "synthesis window " << g.period() << " tau0 does not exceed 2 * t_max = " << 2.0 * t_max
           << "; use n_omega >= " << minimum_frequency_samples(d_omega_r, t_max);
        throw Error(ErrorKind::resolution, os.str());
    }
    return g;
}

double SpectralEnvelope::rise_time() const
{
    return d_omega_r > 0.0 ? two_pi / d_omega_r : 0.0;
}

SpectralEnvelope smoothed_rect_spectrum(const FrequencyGrid &grid, double omega0, double T0, double d_omega_r)
{
    if (!(T0 > 0.0) || !(d_omega_r > 0.0)) {
        throw Error(ErrorKind::domain, "smoothed rectangle needs T0 > 0 and d_omega_r > 0");
    }
    SpectralEnvelope env;
    env.grid = grid;
    env.omega0 = omega0;
    env.T0 = T0;
    env.d_omega_r = d_omega_r;
    env.alpha.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = grid.omega(i) - omega0;
        const double u = d / d_omega_r;
        if (std::abs(u) >= 1.0 - 1e-12) {
            env.alpha[i] = 0.0;
            continue;
        }
        const double arg = d * T0;
        const double sinc = std::abs(arg) < 1e-8 ? 1.0 - arg * arg / 6.0 : std::sin(arg) / arg;
        env.alpha[i] = (1.0 + std::cos(std::numbers::pi * u)) * sinc;
    }
    return env;
}

cplx PulseInjection::effective_alpha(std::size_t i) const
{
    const double w = envelope->grid.omega(i);
    const double launch = direction == Incidence::left ? -w * center0 / units::c : w * center0 / units::c;
    return scale * envelope->alpha[i] * std::polar(1.0, w * delay + launch);
}

double PulseInjection::free_center(double t) const
{
    const double travelled = units::c * (t - delay);
    return direction == Incidence::left ? center0 + travelled : center0 - travelled;
}

PulseInjection apply_injection(std::shared_ptr<const SpectralEnvelope> envelope, cplx scale, double delay,
                               Incidence direction, double center0)
{
    if (!envelope || envelope->alpha.size() != envelope->grid.size()) {
        throw Error(ErrorKind::domain, "injection needs a valid spectral envelope");
    }
    return {std::move(envelope), scale, delay, direction, center0};
}

std::vector<double> TimeAxis::values() const
{
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = at(i);
    }
    return v;
}

void check_injections(const LayerStack &stack, const std::vector<PulseInjection> &injections)
{
    if (injections.empty()) {
        throw Error(ErrorKind::domain, "field needs at least one injection");
    }
    const FrequencyGrid &grid = injections.front().envelope->grid;
    for (const PulseInjection &inj : injections) {
        if (!(inj.envelope->grid == grid)) {
            throw Error(ErrorKind::incompatible_grid, "all injections must share one frequency grid");
        }
        if (stack.empty()) {
            continue;
        }
        const double c = inj.free_center(0.0);
        const double half = inj.envelope->support_halfwidth();
        const bool clear = inj.direction == Incidence::left ? c + half <= stack.origin() : c - half >= stack.end();
        if (!clear) {
            std::ostringstream os;
            os << "injection centred at x = " << c << " (half-width " << half << ") overlaps the layer stack ["
               << stack.origin() << ", " << stack.end() << "] at t = 0";
            throw Error(ErrorKind::launch_position, os.str());
        }
    }
}

SpectralField::SpectralField(LayerStack stack, std::vector<PulseInjection> injections)
    : stack_(std::move(stack)), injections_(std::move(injections))
{
    check_injections(stack_, injections_);
    grid_ = injections_.front().envelope->grid;

    const std::size_t n = grid_.size();
    const double weight = grid_.spacing() / two_pi;
    double lead_energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        lead_energy += std::norm(injections_.front().scale * injections_.front().envelope->alpha[i]);
    }
    lead_energy *= weight;
    if (!(lead_energy > 0.0)) {
        throw Error(ErrorKind::domain, "lead injection carries no energy");
    }
    norm_ = 1.0 / std::sqrt(lead_energy);

    bool any_left = false, any_right = false;
    left_coeff_.assign(n, 0.0);
    right_coeff_.assign(n, 0.0);
    for (const PulseInjection &inj : injections_) {
        auto &dst = inj.direction == Incidence::left ? left_coeff_ : right_coeff_;
        (inj.direction == Incidence::left ? any_left : any_right) = true;
        for (std::size_t i = 0; i < n; ++i) {
            dst[i] += inj.effective_alpha(i);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        left_coeff_[i] *= weight * norm_;
        right_coeff_[i] *= weight * norm_;
    }
    if (any_left) {
        left_states_.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            left_states_.emplace_back(stack_, grid_.omega(i), Incidence::left);
        }
    }
    if (any_right) {
        right_states_.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            right_states_.emplace_back(stack_, grid_.omega(i), Incidence::right);
        }
    }
}

double SpectralField::trajectory_energy() const
{
    // incoming asymptotic states are orthonormal, so the energies add
    double sum = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        sum += std::norm(left_coeff_[i]) + std::norm(right_coeff_[i]);
    }
    return sum * two_pi / grid_.spacing();
}

void SpectralField::coefficients_at(double x, std::span<cplx> out) const
{
    const int region = stack_.region_index(x);
    const std::size_t n = grid_.size();
    for (std::size_t i = 0; i < n; ++i) {
        cplx a = 0.0;
        if (!left_states_.empty()) {
            a += left_coeff_[i] * left_states_[i].value_in(region, x);
        }
        if (!right_states_.empty()) {
            a += right_coeff_[i] * right_states_[i].value_in(region, x);
        }
        out[i] = a;
    }
}

cplx SpectralField::value(double x, double t) const
{
    std::vector<cplx> a(grid_.size());
    coefficients_at(x, a);
    cplx sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += a[i] * std::polar(1.0, -grid_.omega(i) * t);
    }
    return sum;
}

std::vector<cplx> SpectralField::snapshot(double t, std::span<const double> xs) const
{
    std::vector<cplx> out(xs.size());
    std::vector<cplx> a(grid_.size());
    std::vector<cplx> phase(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        phase[i] = std::polar(1.0, -grid_.omega(i) * t);
    }
    for (std::size_t j = 0; j < xs.size(); ++j) {
        coefficients_at(xs[j], a);
        cplx sum = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            sum += a[i] * phase[i];
        }
        out[j] = sum;
    }
    return out;
}

TimeSynthesizer::TimeSynthesizer(const FrequencyGrid &grid, const TimeAxis &axis) : grid_(grid), axis_(axis)
{
    if (axis.n == 0 || !(axis.dt > 0.0)) {
        throw Error(ErrorKind::domain, "time axis needs n > 0 and dt > 0");
    }
    const double exact = two_pi / (grid.spacing() * axis.dt);
    const double rounded = std::round(exact);
    const bool integral = std::abs(exact - rounded) <= 1e-9 * rounded;
    constexpr double max_fft = 1 << 24;
    if (integral && rounded >= static_cast<double>(std::max(grid.size(), axis.n)) && rounded <= max_fft) {
        fft_size_ = static_cast<std::size_t>(rounded);
        pre_.resize(grid.size());
        for (std::size_t m = 0; m < grid.size(); ++m) {
            pre_[m] = std::polar(1.0, -static_cast<double>(m) * grid.spacing() * axis.t0);
        }
        post_.resize(axis.n);
        for (std::size_t k = 0; k < axis.n; ++k) {
            post_[k] = std::polar(1.0, -grid.lo() * axis.at(k));
        }
        std::lock_guard lock(fftw_planner_mutex());
        auto *buf = static_cast<fftw_complex *>(fftw_malloc(sizeof(fftw_complex) * fft_size_));
        buffer_ = buf;
        plan_ = fftw_plan_dft_1d(static_cast<int>(fft_size_), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
}

TimeSynthesizer::~TimeSynthesizer()
{
    if (plan_ != nullptr) {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(static_cast<fftw_plan>(plan_));
        fftw_free(buffer_);
    }
}

void TimeSynthesizer::run(std::span<const cplx> coeff, std::span<cplx> out)
{
    const std::size_t nw = grid_.size();
    if (fft_size_ != 0) {
        auto *buf = static_cast<fftw_complex *>(buffer_);
        for (std::size_t m = 0; m < nw; ++m) {
            const cplx v = coeff[m] * pre_[m];
            buf[m][0] = v.real();
            buf[m][1] = v.imag();
        }
        for (std::size_t m = nw; m < fft_size_; ++m) {
            buf[m][0] = 0.0;
            buf[m][1] = 0.0;
        }
        fftw_execute(static_cast<fftw_plan>(plan_));
        for (std::size_t k = 0; k < axis_.n; ++k) {
            out[k] = cplx(buf[k][0], buf[k][1]) * post_[k];
        }
        return;
    }
    for (std::size_t k = 0; k < axis_.n; ++k) {
        const double t = axis_.at(k);
        const cplx step = std::polar(1.0, -grid_.spacing() * t);
        cplx ph = std::polar(1.0, -grid_.lo() * t);
        cplx sum = 0.0;
        for (std::size_t m = 0; m < nw; ++m) {
            sum += coeff[m] * ph;
            ph *= step;
        }
        out[k] = sum;
    }
}

void for_each_time_series(const SpectralField &field, std::span<const double> xs, const TimeAxis &axis, int threads,
                          std::size_t block_size,
                          const std::function<void(std::size_t block, std::size_t i, std::span<const cplx>)> &fn)
{
    block_size = std::max<std::size_t>(block_size, 1);
    const std::size_t n_blocks = (xs.size() + block_size - 1) / block_size;
    const int workers = std::max(1, std::min(threads, static_cast<int>(n_blocks)));

    struct Workspace
    {
        std::unique_ptr<TimeSynthesizer> synth;
        std::vector<cplx> coeff;
        std::vector<cplx> series;
    };
    std::vector<Workspace> ws(static_cast<std::size_t>(workers));
    for (Workspace &w : ws) {
        w.synth = std::make_unique<TimeSynthesizer>(field.grid(), axis);
        w.coeff.resize(field.grid().size());
        w.series.resize(axis.n);
    }
    parallel_for(n_blocks, workers, [&](std::size_t block, int worker) {
        Workspace &w = ws[static_cast<std::size_t>(worker)];
        const std::size_t end = std::min(xs.size(), (block + 1) * block_size);
        for (std::size_t i = block * block_size; i < end; ++i) {
            field.coefficients_at(xs[i], w.coeff);
            w.synth->run(w.coeff, w.series);
            fn(block, i, w.series);
        }
    });
}

std::size_t SpaceTimeField::time_index(double t) const
{
    auto it = std::lower_bound(t_grid.begin(), t_grid.end(), t - 1e-9);
    if (it == t_grid.end() || std::abs(*it - t) > 1e-9 * std::max(1.0, std::abs(t))) {
        throw Error(ErrorKind::domain, "time is not on the field's time grid");
    }
    return static_cast<std::size_t>(it - t_grid.begin());
}

namespace
{
bool uniform_axis(std::span<const double> t, TimeAxis &axis)
{
    if (t.size() < 2) {
        return false;
    }
    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    if (!(dt > 0.0)) {
        return false;
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (std::abs(t[i] - (t.front() + dt * static_cast<double>(i))) > 1e-9 * dt) {
            return false;
        }
    }
    axis = {t.front(), dt, t.size()};
    return true;
}
} // namespace

SpaceTimeField assemble_field(const LayerStack &stack, const std::vector<PulseInjection> &injections,
                              std::span<const double> x_grid, std::span<const double> t_grid, int threads)
{
    SpectralField field(stack, injections);
    SpaceTimeField out;
    out.x_grid.assign(x_grid.begin(), x_grid.end());
    out.t_grid.assign(t_grid.begin(), t_grid.end());
    out.stack = stack;
    const std::size_t nx = x_grid.size();
    const std::size_t nt = t_grid.size();
    out.values.assign(nx * nt, 0.0);

    TimeAxis axis;
    if (uniform_axis(t_grid, axis)) {
        for_each_time_series(field, x_grid, axis, threads, 16, [&](std::size_t, std::size_t ix, std::span<const cplx> s) {
            for (std::size_t it = 0; it < nt; ++it) {
                out.values[it * nx + ix] = s[it];
            }
        });
        return out;
    }
    parallel_for(nx, threads, [&](std::size_t ix, int) {
        std::vector<cplx> a(field.grid().size());
        field.coefficients_at(x_grid[ix], a);
        for (std::size_t it = 0; it < nt; ++it) {
            cplx sum = 0.0;
            for (std::size_t m = 0; m < a.size(); ++m) {
                sum += a[m] * std::polar(1.0, -field.grid().omega(m) * t_grid[it]);
            }
            out.values[it * nx + ix] = sum;
        }
    });
    return out;
}

double region_energy(const SpaceTimeField &field, const RegionSpec &region, double t)
{
    const std::size_t it = field.time_index(t);
    return trapezoid_region<double>(field.x_grid, region.x_lo, region.x_hi,
                                    [&](std::size_t ix) { return field.energy_density(it, ix); });
}

RegionQuadrature region_quadrature(const RegionSpec &region, double n_max, double samples_per_wavelength)
{
    RegionQuadrature q;
    q.x = make_spatial_grid(region.x_lo, region.x_hi, n_max, samples_per_wavelength);
    const std::size_t n = q.x.size();
    const double h = (region.x_hi - region.x_lo) / static_cast<double>(n - 1);
    q.w.assign(n, h);
    q.w.front() = q.w.back() = 0.5 * h;
    return q;
}

namespace
{
std::vector<double> accumulate_series(const SpectralField &field, const RegionQuadrature &q, const TimeAxis &axis,
                                      int threads)
{
    constexpr std::size_t block = 32;
    const std::size_t n_blocks = (q.x.size() + block - 1) / block;
    std::vector<std::vector<double>> partial(n_blocks, std::vector<double>(axis.n, 0.0));
    for_each_time_series(field, q.x, axis, threads, block, [&](std::size_t b, std::size_t i, std::span<const cplx> s) {
        auto &acc = partial[b];
        const double w = q.w[i];
        for (std::size_t k = 0; k < axis.n; ++k) {
            acc[k] += w * std::norm(s[k]);
        }
    });
    std::vector<double> total(axis.n, 0.0);
    for (const auto &p : partial) {
        for (std::size_t k = 0; k < axis.n; ++k) {
            total[k] += p[k];
        }
    }
    return total;
}
} // namespace

std::vector<double> region_energy_series(const SpectralField &field, const RegionSpec &region, const TimeAxis &axis,
                                         int threads, double samples_per_wavelength)
{
    const RegionQuadrature q = region_quadrature(region, field.stack().max_index(), samples_per_wavelength);
    return accumulate_series(field, q, axis, threads);
}

std::vector<double> stored_energy_series(const SpectralField &field, double x_lo, double x_hi, const TimeAxis &axis,
                                         int threads, double samples_per_wavelength)
{
    if (!(x_hi > x_lo)) {
        throw Error(ErrorKind::domain, "energy window needs x_hi > x_lo");
    }
    const LayerStack &stack = field.stack();
    std::vector<double> bounds{x_lo};
    for (double x : stack.interfaces()) {
        if (x > x_lo && x < x_hi) {
            bounds.push_back(x);
        }
    }
    bounds.push_back(x_hi);
    RegionQuadrature q;
    for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
        const RegionQuadrature piece =
            region_quadrature(make_region("piece", bounds[s], bounds[s + 1]), stack.max_index(), samples_per_wavelength);
        const double eps = stack.medium_in(stack.region_index(0.5 * (bounds[s] + bounds[s + 1]))).eps_r;
        for (std::size_t i = 0; i < piece.x.size(); ++i) {
            q.x.push_back(piece.x[i]);
            q.w.push_back(piece.w[i] * eps);
        }
    }
    return accumulate_series(field, q, axis, threads);
}

} // namespace cavity
