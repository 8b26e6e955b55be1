#pragma once

#include "cavity/media.hpp"

#include <array>
#include <complex>
#include <span>
#include <vector>

namespace cavity
{

using cplx = std::complex<double>;

enum class Incidence
{
    left,
    right,
};

// Maps (forward, backward) plane-wave amplitudes on the left of a slice to
// those on its right. Amplitudes are field amplitudes of e^{+ikx} and
// e^{-ikx} evaluated at the slice boundary.
struct TransferMatrix
{
    cplx m11{1.0}, m12{0.0}, m21{0.0}, m22{1.0};

    static TransferMatrix identity() { return {}; }
    cplx det() const { return m11 * m22 - m12 * m21; }

    // (this * rhs): apply rhs first
    TransferMatrix operator*(const TransferMatrix &rhs) const
    {
        return {m11 * rhs.m11 + m12 * rhs.m21, m11 * rhs.m12 + m12 * rhs.m22,
                m21 * rhs.m11 + m22 * rhs.m21, m21 * rhs.m12 + m22 * rhs.m22};
    }

    std::array<cplx, 2> apply(cplx forward, cplx backward) const
    {
        return {m11 * forward + m12 * backward, m21 * forward + m22 * backward};
    }
};

struct ScatteringAmplitudes
{
    double omega = 0.0;
    cplx r_left, t_left;   // incidence from the left lead
    cplx r_right, t_right; // incidence from the right lead
};

// Continuity of phi and (1/mu_r) dphi/dx across a boundary.
TransferMatrix interface_matrix(const Medium &left, const Medium &right, double omega);

// Phase accumulation exp(+-i omega n L / c) across a uniform layer.
TransferMatrix layer_matrix(const Layer &layer, double omega);

// Product of interface and layer matrices from the left lead to the right
// lead, in geometric order.
TransferMatrix stack_matrix(const LayerStack &stack, double omega);

// r and t referenced to the outer faces of the stack (origin for left
// incidence, end for right incidence).
ScatteringAmplitudes scattering_from_matrix(const TransferMatrix &m, double omega);
ScatteringAmplitudes stack_scattering(const LayerStack &stack, double omega);

// Exact scattering state for a unit incident plane wave. The incident wave
// uses the global phase e^{+i k x} (left) or e^{-i k x} (right).
class ScatteringState
{
public:
    ScatteringState(const LayerStack &stack, double omega, Incidence incidence);

    double omega() const { return omega_; }
    Incidence incidence() const { return incidence_; }
    const ScatteringAmplitudes &amplitudes() const { return amps_; }

    cplx value(double x) const;
    cplx value_in(int region, double x) const;

    // forward/backward amplitude of region (-1..layers) at its reference
    // point; the left lead is referenced to the stack origin
    struct Piece
    {
        double x_ref;
        double k;
        cplx forward;
        cplx backward;
    };
    const Piece &piece(int region) const { return pieces_[static_cast<std::size_t>(region + 1)]; }

private:
    double omega_;
    Incidence incidence_;
    ScatteringAmplitudes amps_;
    std::vector<double> interfaces_;
    std::vector<Piece> pieces_;
};

struct ModeField
{
    double omega = 0.0;
    Incidence incidence = Incidence::left;
    std::vector<double> grid;
    std::vector<cplx> values;
};

// Requires at least 16 grid samples per local wavelength in the densest
// medium; throws ErrorKind::resolution otherwise.
ModeField mode_field(const LayerStack &stack, double omega, std::span<const double> grid, Incidence incidence);

inline constexpr double default_samples_per_wavelength = 32.0;
inline constexpr double minimum_samples_per_wavelength = 16.0;

// Uniform grid over [x_lo, x_hi] with spacing no larger than
// lambda0 / (n_max * samples_per_wavelength).
std::vector<double> make_spatial_grid(double x_lo, double x_hi, double n_max,
                                      double samples_per_wavelength = default_samples_per_wavelength);

} // namespace cavity
