#include "cavity/scatter.hpp"
#include "cavity/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cavity
{

TransferMatrix interface_matrix(const Medium &left, const Medium &right, double /*omega*/)
{
    if (left == right) {
        return TransferMatrix::identity();
    }
    const double rho = left.admittance() / right.admittance();
    const double p = 0.5 * (1.0 + rho);
    const double q = 0.5 * (1.0 - rho);
    return {p, q, q, p};
}

TransferMatrix layer_matrix(const Layer &layer, double omega)
{
    if (layer.thickness == 0.0) {
        return TransferMatrix::identity();
    }
    const double phase = omega * layer.index() * layer.thickness / units::c;
    const cplx e = std::polar(1.0, phase);
    return {e, 0.0, 0.0, std::conj(e)};
}

TransferMatrix stack_matrix(const LayerStack &stack, double omega)
{
    TransferMatrix total = TransferMatrix::identity();
    Medium prev = Medium::vacuum();
    for (const Layer &layer : stack.layers()) {
        total = layer_matrix(layer, omega) * interface_matrix(prev, layer.medium(), omega) * total;
        prev = layer.medium();
    }
    return interface_matrix(prev, Medium::vacuum(), omega) * total;
}

ScatteringAmplitudes scattering_from_matrix(const TransferMatrix &m, double omega)
{
    if (std::abs(m.m22) < 1e-300) {
        throw Error(ErrorKind::numeric_degeneracy, "transfer matrix element m22 vanishes");
    }
    ScatteringAmplitudes s;
    s.omega = omega;
    // left incidence: (t, 0) = M (1, r)
    s.r_left = -m.m21 / m.m22;
    s.t_left = m.det() / m.m22;
    // right incidence: (r', 1) = M (0, t')
    s.t_right = 1.0 / m.m22;
    s.r_right = m.m12 / m.m22;
    return s;
}

ScatteringAmplitudes stack_scattering(const LayerStack &stack, double omega)
{
    if (stack.empty()) {
        ScatteringAmplitudes s;
        s.omega = omega;
        s.r_left = s.r_right = 0.0;
        s.t_left = s.t_right = 1.0;
        return s;
    }
    return scattering_from_matrix(stack_matrix(stack, omega), omega);
}

ScatteringState::ScatteringState(const LayerStack &stack, double omega, Incidence incidence)
    : omega_(omega), incidence_(incidence), amps_(stack_scattering(stack, omega)),
      interfaces_(stack.interfaces())
{
    const double k0 = omega / units::c;
    const double x0 = stack.origin();
    const double x_end = stack.end();

    cplx f, b;
    if (incidence == Incidence::left) {
        const cplx ph = std::polar(1.0, k0 * x0);
        f = ph;
        b = amps_.r_left * ph;
    } else {
        f = 0.0;
        b = amps_.t_right * std::polar(1.0, -k0 * x_end);
    }

    const auto &layers = stack.layers();
    pieces_.reserve(layers.size() + 2);
    pieces_.push_back({x0, k0, f, b});
    Medium prev = Medium::vacuum();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const Medium med = layers[i].medium();
        auto fb = interface_matrix(prev, med, omega).apply(f, b);
        pieces_.push_back({interfaces_[i], k0 * med.index(), fb[0], fb[1]});
        fb = layer_matrix(layers[i], omega).apply(fb[0], fb[1]);
        f = fb[0];
        b = fb[1];
        prev = med;
    }
    auto fb = interface_matrix(prev, Medium::vacuum(), omega).apply(f, b);
    pieces_.push_back({x_end, k0, fb[0], fb[1]});
}

cplx ScatteringState::value_in(int region, double x) const
{
    const Piece &p = piece(region);
    const cplx e = std::polar(1.0, p.k * (x - p.x_ref));
    return p.forward * e + p.backward * std::conj(e);
}

cplx ScatteringState::value(double x) const
{
    auto it = std::upper_bound(interfaces_.begin(), interfaces_.end(), x);
    return value_in(static_cast<int>(it - interfaces_.begin()) - 1, x);
}

ModeField mode_field(const LayerStack &stack, double omega, std::span<const double> grid, Incidence incidence)
{
    if (grid.size() < 2) {
        throw Error(ErrorKind::resolution, "mode field grid needs at least two samples");
    }
    const double wavelength = 2.0 * std::numbers::pi * units::c / (omega * stack.max_index());
    const double h_max = wavelength / minimum_samples_per_wavelength;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double h = grid[i] - grid[i - 1];
        if (!(h > 0.0)) {
            throw Error(ErrorKind::resolution, "mode field grid must be strictly increasing");
        }
        if (h > h_max * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "grid spacing " << h << " exceeds " << h_max << " (16 samples per wavelength at omega "
               << omega << ")";
            throw Error(ErrorKind::resolution, os.str());
        }
    }
    ScatteringState state(stack, omega, incidence);
    ModeField mf;
    mf.omega = omega;
    mf.incidence = incidence;
    mf.grid.assign(grid.begin(), grid.end());
    mf.values.reserve(grid.size());
    for (double x : grid) {
        mf.values.push_back(state.value(x));
    }
    return mf;
}

std::vector<double> make_spatial_grid(double x_lo, double x_hi, double n_max, double samples_per_wavelength)
{
    if (!(x_hi > x_lo)) {
        throw Error(ErrorKind::domain, "spatial grid needs x_hi > x_lo");
    }
    const double h_target = units::lambda0 / (n_max * samples_per_wavelength);
    const auto cells = static_cast<std::size_t>(std::ceil((x_hi - x_lo) / h_target - 1e-9));
    const std::size_t n = std::max<std::size_t>(cells, 1) + 1;
    std::vector<double> xs(n);
    const double h = (x_hi - x_lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = x_lo + h * static_cast<double>(i);
    }
    xs.back() = x_hi;
    return xs;
}

} // namespace cavity
