#pragma once

#include "cavity/analytic.hpp"
#include "cavity/control.hpp"
#include "cavity/media.hpp"
#include "cavity/pulse.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cavity
{

// Malformed or incomplete scenario file. line/column are 1-based, 0 if
// unknown; key is the dotted path of the offending entry if any.
class ConfigError : public std::runtime_error
{
public:
    ConfigError(const std::string &message, std::string key = {}, int line = 0, int column = 0);

    const std::string &key() const { return key_; }
    int line() const { return line_; }
    int column() const { return column_; }

private:
    std::string key_;
    int line_;
    int column_;
};

struct PulseConfig
{
    double T0_omega0 = 60.0;
    double d_omega_r_omega0 = 0.25;
    std::optional<double> center; // lambda0; default places the lead left of region A
    Incidence direction = Incidence::left;
    double delay = 0.0;
    cplx scale{1.0};
};

struct GridConfig
{
    std::size_t n_omega = 2049;
    double t_min = 0.0;
    double t_max = 600.0;
    double dt = 0.25;
    double samples_per_wavelength = default_samples_per_wavelength;
    std::optional<double> x_min;
    std::optional<double> x_max;
    double spacetime_dx = 0.5;
    double spacetime_dt = 1.0;
};

struct ManualInjection
{
    cplx scale{1.0};
    double delay = 0.0;
    Incidence direction = Incidence::left;
    std::optional<double> center;
};

struct ControlConfig
{
    ControlIntent intent = ControlIntent::none;
    int N = 1;
    int K = 1;
    bool auto_amplitude = true;
    std::vector<ManualInjection> injections;
};

struct MeasureConfig
{
    bool enabled = false;
    double tau_M = 60.0;
    std::vector<std::string> regions;
    // also measure the same regions with the control schedule removed
    bool include_uncontrolled = false;
};

struct OutputConfig
{
    bool spacetime = false;
    bool timeseries = true;
    bool energies = true;
    bool pulses = true;
    bool raytrace = false;
    bool spectra = false;
    std::optional<double> x_R;
    int raytrace_round_trips = 6;
};

struct Scenario
{
    std::string name;
    std::string description;
    std::string source;
    UnitSystem units;
    FabryPerotSpec fabry_perot;
    std::optional<std::vector<Layer>> layers; // explicit stack instead of the resonator
    std::optional<double> origin;
    std::vector<RegionSpec> extra_regions;
    PulseConfig pulse;
    GridConfig grid;
    ControlConfig control;
    MeasureConfig measure;
    OutputConfig output;
    std::uint64_t hash = 0; // FNV-1a of the canonical form

    std::string hash_hex() const;
};

Scenario parse_scenario(const std::string &text, const std::string &source_name = "<string>");
Scenario load_scenario(const std::filesystem::path &path);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 14695981039346656037ull);

// Everything a run needs, built from a scenario with every guard checked
// and nothing solved yet.
struct ScenarioModel
{
    LayerStack stack;
    std::vector<RegionSpec> regions;
    std::optional<ResonanceConstants> resonance; // set for the two-mirror resonator
    std::shared_ptr<const SpectralEnvelope> envelope;
    PulseInjection lead;
    ControlSchedule schedule;
    std::vector<PulseInjection> injections; // lead first
    TimeAxis axis;
    double x_R = 0.0;
    std::vector<double> spacetime_x;
    TimeAxis spacetime_axis;
    double lead_arrival = 0.0; // lead centre at the stack's first face

    const RegionSpec &region(const std::string &name) const;
};

// Guards: geometry, region names and bounds, aliasing window, spatial
// resolution, control preconditions and launch positions. Throws Error.
ScenarioModel build_model(const Scenario &scenario);

} // namespace cavity
