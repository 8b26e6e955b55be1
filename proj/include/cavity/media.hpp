#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace cavity
{

// Natural units used throughout the library: lengths in lambda0, times in
// tau0, c = 1 and therefore omega0 = 2*pi (angular frequency in rad/tau0).
namespace units
{
inline constexpr double lambda0 = 1.0;
inline constexpr double tau0 = 1.0;
inline constexpr double c = 1.0;
inline constexpr double omega0 = 2.0 * std::numbers::pi;
inline constexpr double speed_of_light_SI = 299792458.0;
inline constexpr double hbar_eV_s = 6.582119569e-16;
} // namespace units

struct UnitSystem
{
    double lambda0_SI = 1.5e-6; // m
    double tau0_SI = 5e-15;     // s

    void validate() const;

    double to_meters(double x) const { return x * lambda0_SI; }
    double to_seconds(double t) const { return t * tau0_SI; }
    double to_femtoseconds(double t) const { return t * tau0_SI * 1e15; }
    // photon energy hbar*omega0 in eV
    double photon_energy_eV() const { return units::hbar_eV_s * 2.0 * std::numbers::pi / tau0_SI; }
    // relative mismatch between lambda0/tau0 and c
    double light_speed_mismatch() const
    {
        return std::abs(lambda0_SI / tau0_SI - units::speed_of_light_SI) / units::speed_of_light_SI;
    }
};

// Piecewise-constant lossless medium.
struct Medium
{
    double eps_r = 1.0;
    double mu_r = 1.0;

    double index() const { return std::sqrt(eps_r * mu_r); }
    // n/mu_r: the weight entering the (1/mu_r) dphi/dx matching condition
    double admittance() const { return std::sqrt(eps_r / mu_r); }

    static Medium vacuum() { return {}; }
    bool operator==(const Medium &) const = default;
};

struct Layer
{
    double thickness = 0.0; // lambda0
    double eps_r = 1.0;
    double mu_r = 1.0;

    Medium medium() const { return {eps_r, mu_r}; }
    double index() const { return medium().index(); }
    bool operator==(const Layer &) const = default;
};

// Ordered layers between two semi-infinite vacuum leads. The first
// interface sits at origin.
class LayerStack
{
public:
    LayerStack() = default;
    LayerStack(double origin, std::vector<Layer> layers);

    double origin() const { return origin_; }
    double end() const { return interfaces_.back(); }
    double total_length() const { return end() - origin_; }
    const std::vector<Layer> &layers() const { return layers_; }
    bool empty() const { return layers_.empty(); }

    // origin, then the right face of each layer
    const std::vector<double> &interfaces() const { return interfaces_; }

    // -1 for the left lead, layers().size() for the right lead
    int region_index(double x) const;
    Medium medium_in(int region) const;
    double max_index() const;

    bool operator==(const LayerStack &) const = default;

private:
    double origin_ = 0.0;
    std::vector<Layer> layers_;
    std::vector<double> interfaces_{0.0};
};

struct RegionSpec
{
    std::string name;
    double x_lo = 0.0;
    double x_hi = 0.0;

    double length() const { return x_hi - x_lo; }
    bool operator==(const RegionSpec &) const = default;
};

RegionSpec make_region(std::string name, double x_lo, double x_hi);

struct FabryPerotSpec
{
    double n_r = 2.5;
    double L_B = 15.0;  // cavity length, lambda0
    double L_A = 160.0; // left lead region, lambda0
    double L_C = 120.0; // right lead region, lambda0

    // quarter-wave mirror thickness lambda0/(4 n_r)
    double mirror_thickness() const { return units::lambda0 / (4.0 * n_r); }
};

LayerStack build_fabry_perot(const FabryPerotSpec &spec);

// A, B, B' (left half of B) and C. Region A starts at x = 0.
std::vector<RegionSpec> default_regions(const LayerStack &stack, const FabryPerotSpec &spec);

const RegionSpec *find_region(const std::vector<RegionSpec> &regions, const std::string &name);

} // namespace cavity
