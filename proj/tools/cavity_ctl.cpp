// cavity-ctl: runs resonator scenarios described by TOML files.
//
// exit codes: 0 ok, 1 internal error, 2 config error, 3 guard violation,
// 4 I/O failure

#include "output.hpp"

#include "cavity/analysis.hpp"
#include "cavity/errors.hpp"
#include "cavity/markov.hpp"
#include "cavity/parallel.hpp"
#include "cavity/scenario.hpp"
#include "cavity/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <chrono>
#include <cstring>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace
{

using namespace cavity;
namespace fs = std::filesystem;
using json = nlohmann::json;

enum class Command
{
    run,
    spectra,
    raytrace,
    measure,
    validate,
};

const char *to_string(Command c)
{
    switch (c) {
    case Command::run: return "run";
    case Command::spectra: return "spectra";
    case Command::raytrace: return "raytrace";
    case Command::measure: return "measure";
    case Command::validate: return "validate";
    }
    return "run";
}

struct Options
{
    fs::path config;
    fs::path out_dir;
    int threads = 0;
    bool binary = false;
    bool quiet = false;
};

const char *remediation(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::invalid_geometry: return "check the lengths and indices under [media]";
    case ErrorKind::resolution: return "raise grid.n_omega or grid.samples_per_wavelength as reported";
    case ErrorKind::domain: return "check the value named above";
    case ErrorKind::incompatible_grid: return "all pulses must share the scenario's frequency grid";
    case ErrorKind::launch_position:
        return "move pulse.center_lambda0 (or the control centre) away from the stack";
    case ErrorKind::numeric_degeneracy: return "the stack is singular at some frequency";
    case ErrorKind::model_domain:
        return "use the two-mirror resonator and control delays on the pulse train (multiples of tau_RT/2)";
    case ErrorKind::numeric_inconsistency: return "refine grid.samples_per_wavelength";
    case ErrorKind::undefined_q: return "mirrors need n_r > 1";
    }
    return "";
}

std::string region_file_tag(const std::string &name)
{
    std::string out;
    for (char c : name) {
        if (c == '\'') {
            out += "prime";
        } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
            out += c;
        } else {
            out += '_';
        }
    }
    return out;
}

class Runner
{
public:
    Runner(const Scenario &sc, const ScenarioModel &m, const Options &opt, Command cmd)
        : sc_(sc), m_(m), opt_(opt), cmd_(cmd)
    {
    }

    void execute()
    {
        fs::create_directories(opt_.out_dir);
        const bool run = cmd_ == Command::run;
        if (cmd_ == Command::spectra || (run && sc_.output.spectra)) {
            timed("spectra", [&] { write_spectra(); });
        }
        if (cmd_ == Command::raytrace || (run && sc_.output.raytrace)) {
            timed("raytrace", [&] { write_raytrace(); });
        }
        if (run) {
            field_ = std::make_unique<SpectralField>(m_.stack, m_.injections);
            if (sc_.output.spacetime) {
                timed("spacetime", [&] { write_spacetime(); });
            }
            if (sc_.output.timeseries || sc_.output.pulses) {
                timed("timeseries", [&] { write_timeseries(); });
            }
            if (sc_.output.energies) {
                timed("energies", [&] { write_energies(); });
            }
        }
        if ((run || cmd_ == Command::measure) && sc_.measure.enabled) {
            timed("measures", [&] { write_measures(); });
        }
        write_manifest();
    }

private:
    template <class Fn>
    void timed(const char *label, Fn &&fn)
    {
        if (!opt_.quiet) {
            std::cerr << "cavity-ctl: " << label << "...\n";
        }
        const auto start = std::chrono::steady_clock::now();
        fn();
        const auto stop = std::chrono::steady_clock::now();
        timings_[label] = std::chrono::duration<double, std::milli>(stop - start).count();
    }

    void header(std::ostream &os, const std::string &what) const
    {
        os << "# cavity-ctl " << version << "\n";
        os << "# scenario=" << sc_.name << " hash=" << sc_.hash_hex() << "\n";
        os << "# " << what << "\n";
    }

    void keep(ctl::AtomicFile &f) { files_.push_back(f.commit()); }

    void write_spectra()
    {
        ctl::AtomicFile f(opt_.out_dir, "spectra.dat");
        auto &os = f.stream();
        header(os, "scattering amplitudes of the stack; omega in units of omega0");
        const bool resonator = !sc_.layers;
        LayerStack mirror;
        if (resonator) {
            const FabryPerotSpec &fp = sc_.fabry_perot;
            mirror = LayerStack(0.0, {Layer{fp.mirror_thickness(), fp.n_r * fp.n_r, 1.0}});
        }
        if (m_.resonance) {
            os << "# tau_RT=" << ctl::fmt(m_.resonance->tau_RT) << " tau_Q=" << ctl::fmt(m_.resonance->tau_Q)
               << " Q=" << ctl::fmt(m_.resonance->Q) << " r=" << ctl::fmt(m_.resonance->r)
               << " t=" << ctl::fmt(m_.resonance->t) << "\n";
        }
        os << "# columns: omega abs2_r abs2_t re_r im_r re_t im_t lead_abs2_alpha";
        if (resonator) {
            os << " mirror_abs2_t mirror_abs2_t_eq1";
        }
        if (m_.resonance) {
            os << " lorentzian";
        }
        os << "\n";
        const FrequencyGrid &g = m_.envelope->grid;
        const double peak = m_.resonance ? lorentzian_spectrum(units::omega0, units::omega0, m_.resonance->Gamma, 1.0) : 1.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double w = g.omega(i);
            const ScatteringAmplitudes a = stack_scattering(m_.stack, w);
            os << ctl::fmt(w / units::omega0) << ' ' << ctl::fmt(std::norm(a.r_left)) << ' '
               << ctl::fmt(std::norm(a.t_left)) << ' ' << ctl::fmt(a.r_left.real()) << ' '
               << ctl::fmt(a.r_left.imag()) << ' ' << ctl::fmt(a.t_left.real()) << ' '
               << ctl::fmt(a.t_left.imag()) << ' ' << ctl::fmt(std::norm(m_.envelope->alpha[i]));
            if (resonator) {
                const ScatteringAmplitudes s = stack_scattering(mirror, w);
                const double lambda = 2.0 * std::numbers::pi * units::c / w;
                os << ' ' << ctl::fmt(std::norm(s.t_left)) << ' '
                   << ctl::fmt(mirror_transmission(sc_.fabry_perot.n_r, sc_.fabry_perot.mirror_thickness(), lambda));
            }
            if (m_.resonance) {
                os << ' ' << ctl::fmt(lorentzian_spectrum(w, units::omega0, m_.resonance->Gamma, 1.0) / peak);
            }
            os << '\n';
        }
        keep(f);
    }

    void write_raytrace()
    {
        if (!m_.resonance) {
            throw Error(ErrorKind::model_domain, "the ray trace needs the two-mirror resonator with n_r > 1");
        }
        const ResonanceConstants &res = *m_.resonance;
        const RayTrace trace = raytrace(res, m_.schedule, sc_.output.raytrace_round_trips);
        ctl::AtomicFile f(opt_.out_dir, "raytrace.dat");
        auto &os = f.stream();
        header(os, "resonant ray trace; t_rel from the lead's arrival at the left mirror, t_abs in scenario time");
        os << "# control=" << to_string(m_.schedule.intent) << " order=" << m_.schedule.order
           << " tau_RT=" << ctl::fmt(res.tau_RT) << " r=" << ctl::fmt(res.r) << " t=" << ctl::fmt(res.t) << "\n";
        const std::size_t n_right = events_on(trace, Side::right).size();
        const std::size_t n_left = events_on(trace, Side::left).size();
        os << "# integrating_detector right=" << ctl::fmt(integrating_detector(trace, Side::right, n_right))
           << " left=" << ctl::fmt(integrating_detector(trace, Side::left, n_left)) << "\n";
        os << "# columns: t_rel t_abs side re im abs2\n";
        for (const RayEvent &e : trace.events) {
            os << ctl::fmt(e.time) << ' ' << ctl::fmt(e.time + m_.lead_arrival) << ' '
               << (e.side == Side::left ? "left" : "right") << ' ' << ctl::fmt(e.amplitude.real()) << ' '
               << ctl::fmt(e.amplitude.imag()) << ' ' << ctl::fmt(std::norm(e.amplitude)) << '\n';
        }
        keep(f);
    }

    void write_spacetime()
    {
        const auto &xs = m_.spacetime_x;
        const TimeAxis &ax = m_.spacetime_axis;
        const std::size_t nx = xs.size();
        std::vector<cplx> values(nx * ax.n);
        for_each_time_series(*field_, xs, ax, opt_.threads, 16, [&](std::size_t, std::size_t ix, std::span<const cplx> s) {
            for (std::size_t it = 0; it < ax.n; ++it) {
                values[it * nx + ix] = s[it];
            }
        });
        const double dx = nx > 1 ? xs[1] - xs[0] : 0.0;
        if (opt_.binary) {
            ctl::AtomicFile bin(opt_.out_dir, "spacetime.bin", true);
            for (const cplx &v : values) {
                const double e = std::norm(v);
                unsigned char bytes[8];
                std::uint64_t u;
                std::memcpy(&u, &e, 8);
                for (int b = 0; b < 8; ++b) {
                    bytes[b] = static_cast<unsigned char>(u >> (8 * b));
                }
                bin.stream().write(reinterpret_cast<const char *>(bytes), 8);
            }
            keep(bin);
            ctl::AtomicFile hdr(opt_.out_dir, "spacetime.hdr");
            header(hdr.stream(), "sidecar for spacetime.bin");
            hdr.stream() << "format=float64-le\nquantity=abs2_psi\nlayout=row-major time x space\n"
                         << "nt=" << ax.n << "\nnx=" << nx << "\nt0=" << ctl::fmt(ax.t0) << "\ndt="
                         << ctl::fmt(ax.dt) << "\nx0=" << ctl::fmt(xs.front()) << "\ndx=" << ctl::fmt(dx) << "\n";
            keep(hdr);
            return;
        }
        ctl::AtomicFile f(opt_.out_dir, "spacetime.dat");
        auto &os = f.stream();
        header(os, "space-time field");
        os << "# nt=" << ax.n << " t0=" << ctl::fmt(ax.t0) << " dt=" << ctl::fmt(ax.dt) << " nx=" << nx
           << " x0=" << ctl::fmt(xs.front()) << " dx=" << ctl::fmt(dx) << "\n";
        os << "# columns: t x re im abs2\n";
        for (std::size_t it = 0; it < ax.n; ++it) {
            const std::string t = ctl::fmt(ax.at(it));
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const cplx v = values[it * nx + ix];
                os << t << ' ' << ctl::fmt(xs[ix]) << ' ' << ctl::fmt(v.real()) << ' ' << ctl::fmt(v.imag()) << ' '
                   << ctl::fmt(std::norm(v)) << '\n';
            }
        }
        keep(f);
    }

    void write_timeseries()
    {
        const TimeAxis &ax = m_.axis;
        std::vector<cplx> series;
        const std::vector<double> xs{m_.x_R};
        for_each_time_series(*field_, xs, ax, 1, 1,
                             [&](std::size_t, std::size_t, std::span<const cplx> s) { series.assign(s.begin(), s.end()); });
        const std::vector<double> t = ax.values();
        std::vector<double> power(series.size());
        for (std::size_t i = 0; i < series.size(); ++i) {
            power[i] = std::norm(series[i]);
        }
        if (sc_.output.timeseries) {
            ctl::AtomicFile f(opt_.out_dir, "timeseries.dat");
            auto &os = f.stream();
            header(os, "field at the detector");
            os << "# x_R=" << ctl::fmt(m_.x_R) << "\n# columns: t re im abs2\n";
            for (std::size_t i = 0; i < series.size(); ++i) {
                os << ctl::fmt(t[i]) << ' ' << ctl::fmt(series[i].real()) << ' ' << ctl::fmt(series[i].imag()) << ' '
                   << ctl::fmt(power[i]) << '\n';
            }
            keep(f);
        }
        if (sc_.output.pulses) {
            const auto pulses = segment_pulses(t, power, 1e-3);
            ctl::AtomicFile f(opt_.out_dir, "pulses.dat");
            auto &os = f.stream();
            header(os, "pulses detected at the detector (threshold 1e-3 of the maximum)");
            double total = 0.0;
            for (const PulseSegment &p : pulses) {
                total += p.energy;
            }
            os << "# x_R=" << ctl::fmt(m_.x_R) << " total_energy=" << ctl::fmt(total)
               << " peaks_above_2pct=" << count_peaks_above(pulses, 0.02) << "\n";
            os << "# columns: k centroid peak_time peak energy ratio_to_previous\n";
            for (std::size_t k = 0; k < pulses.size(); ++k) {
                const PulseSegment &p = pulses[k];
                const double ratio = k > 0 ? p.energy / pulses[k - 1].energy : 0.0;
                os << k << ' ' << ctl::fmt(p.centroid) << ' ' << ctl::fmt(p.peak_time) << ' ' << ctl::fmt(p.peak)
                   << ' ' << ctl::fmt(p.energy) << ' ' << ctl::fmt(ratio) << '\n';
            }
            keep(f);
        }
    }

    void write_energies()
    {
        std::vector<std::vector<double>> series;
        for (const RegionSpec &r : m_.regions) {
            series.push_back(region_energy_series(*field_, r, m_.axis, opt_.threads, sc_.grid.samples_per_wavelength));
        }
        ctl::AtomicFile f(opt_.out_dir, "region_energy.dat");
        auto &os = f.stream();
        header(os, "energy in each region, in units of the lead pulse energy");
        os << "# columns: t";
        for (const RegionSpec &r : m_.regions) {
            os << " E_" << r.name;
        }
        os << "\n";
        for (std::size_t k = 0; k < m_.axis.n; ++k) {
            os << ctl::fmt(m_.axis.at(k));
            for (const auto &s : series) {
                os << ' ' << ctl::fmt(s[k]);
            }
            os << '\n';
        }
        keep(f);
    }

    void write_measures()
    {
        if (!field_) {
            field_ = std::make_unique<SpectralField>(m_.stack, m_.injections);
        }
        std::unique_ptr<SpectralField> uncontrolled;
        if (sc_.measure.include_uncontrolled) {
            uncontrolled = std::make_unique<SpectralField>(m_.stack, std::vector<PulseInjection>{m_.lead});
        }
        for (const std::string &name : sc_.measure.regions) {
            const RegionSpec &region = m_.region(name);
            write_measure(*field_, region, region_file_tag(name), to_string(m_.schedule.intent));
            if (uncontrolled) {
                write_measure(*uncontrolled, region, region_file_tag(name) + "_uncontrolled", "none");
            }
        }
    }

    void write_measure(const SpectralField &field, const RegionSpec &region, const std::string &tag,
                       const char *control)
    {
        const DistanceSeries d = delayed_distance_series(field, region, m_.axis, sc_.measure.tau_M, opt_.threads,
                                                         sc_.grid.samples_per_wavelength);
        const NonMarkovSeries id = nonmarkov_content(d);
        ctl::AtomicFile f(opt_.out_dir, "measure_" + tag + ".dat");
        auto &os = f.stream();
        os << "# region=" << region.name << " tau_M=" << ctl::fmt(sc_.measure.tau_M) << "\n";
        header(os, "Hilbert-Schmidt distance and non-Markovian content");
        os << "# control=" << control << " x_lo=" << ctl::fmt(region.x_lo) << " x_hi=" << ctl::fmt(region.x_hi)
           << " ID_total=" << ctl::fmt(id.total) << "\n";
        os << "# columns: t D ID\n";
        for (std::size_t k = 0; k < d.t.size(); ++k) {
            os << ctl::fmt(d.t[k]) << ' ' << ctl::fmt(d.D[k]) << ' ' << ctl::fmt(id.ID[k]) << '\n';
        }
        keep(f);
    }

    void write_manifest()
    {
        const fs::path path = opt_.out_dir / "manifest.json";
        json files = json::array();
        for (const ctl::WrittenFile &w : files_) {
            files.push_back({{"name", w.name}, {"bytes", w.bytes}, {"fnv1a", w.digest}});
        }
        bool cache_equivalent = false;
        if (fs::exists(path)) {
            try {
                std::ifstream in(path);
                const json prev = json::parse(in);
                cache_equivalent = prev.value("scenario_hash", "") == sc_.hash_hex() &&
                                   prev.value("version", "") == version &&
                                   prev.value("command", "") == to_string(cmd_) && prev.value("files", json()) == files;
            } catch (const json::exception &) {
                cache_equivalent = false;
            }
        }
        json timings = json::object();
        for (const auto &[k, v] : timings_) {
            timings[k] = v;
        }
        const json manifest{{"tool", "cavity-ctl"},
                            {"version", version},
                            {"command", to_string(cmd_)},
                            {"scenario", sc_.name},
                            {"source", sc_.source},
                            {"scenario_hash", sc_.hash_hex()},
                            {"threads", opt_.threads},
                            {"files", files},
                            {"timings_ms", timings},
                            {"cache_equivalent", cache_equivalent}};
        ctl::AtomicFile f(opt_.out_dir, "manifest.json");
        f.stream() << manifest.dump(2) << "\n";
        f.commit();
        if (!opt_.quiet) {
            std::cerr << "cavity-ctl: wrote " << files_.size() << " files to " << opt_.out_dir.string()
                      << (cache_equivalent ? " (identical to the previous run)" : "") << "\n";
        }
    }

    const Scenario &sc_;
    const ScenarioModel &m_;
    const Options &opt_;
    Command cmd_;
    std::unique_ptr<SpectralField> field_;
    std::vector<ctl::WrittenFile> files_;
    std::map<std::string, double> timings_;
};

void print_validation(const Scenario &sc, const ScenarioModel &m)
{
    std::cout << "scenario " << sc.name << " (hash " << sc.hash_hex() << ") is valid\n";
    std::cout << "  stack: " << m.stack.layers().size() << " layers on [" << m.stack.origin() << ", "
              << m.stack.end() << "]\n";
    if (m.resonance) {
        std::cout << "  tau_RT=" << m.resonance->tau_RT << " tau_Q=" << m.resonance->tau_Q << " Q=" << m.resonance->Q
                  << "\n";
    }
    std::cout << "  omega samples=" << m.envelope->grid.size() << " window=" << m.envelope->grid.period()
              << " time samples=" << m.axis.n << "\n";
    std::cout << "  control=" << to_string(m.schedule.intent) << " injections=" << m.injections.size() << "\n";
}

int dispatch(Command cmd, Options opt)
{
    Scenario sc;
    try {
        sc = load_scenario(opt.config);
    } catch (const ConfigError &e) {
        std::cerr << opt.config.string();
        if (e.line() > 0) {
            std::cerr << ':' << e.line() << ':' << e.column();
        }
        std::cerr << ": error: " << e.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error &e) {
        std::cerr << "cavity-ctl: cannot read " << opt.config.string() << ": " << e.code().message() << "\n";
        return 4;
    }

    ScenarioModel model;
    try {
        model = build_model(sc);
    } catch (const Error &e) {
        std::cerr << opt.config.string() << ": " << cavity::to_string(e.kind()) << " error: " << e.what()
                  << "\nhint: " << remediation(e.kind()) << "\n";
        return 3;
    }
    if (cmd == Command::validate) {
        if (!opt.quiet) {
            print_validation(sc, model);
        }
        return 0;
    }
    if (opt.out_dir.empty()) {
        opt.out_dir = fs::path("out") / sc.name;
    }
    if (opt.threads <= 0) {
        opt.threads = default_thread_count();
    }
    try {
        Runner(sc, model, opt, cmd).execute();
    } catch (const fs::filesystem_error &e) {
        std::cerr << "cavity-ctl: I/O failure: " << e.what() << "\n";
        return 4;
    } catch (const Error &e) {
        std::cerr << "cavity-ctl: " << cavity::to_string(e.kind()) << " error: " << e.what()
                  << "\nhint: " << remediation(e.kind()) << "\n";
        return e.kind() == ErrorKind::numeric_inconsistency || e.kind() == ErrorKind::numeric_degeneracy ? 1 : 3;
    }
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Exact photon wave-packet dynamics in one-dimensional dielectric resonators"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);
    app.fallthrough();

    Options opt;
    app.add_option("--out-dir", opt.out_dir, "output directory (default out/<scenario name>)");
    app.add_option("--threads", opt.threads, "worker threads (default CAVITY_CTL_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    app.add_flag("--binary", opt.binary, "write the space-time grid as float64 little-endian |psi|^2");
    app.add_flag("--quiet", opt.quiet, "no progress messages");

    Command cmd = Command::run;
    const std::pair<Command, const char *> subcommands[] = {
        {Command::run, "solve, assemble and measure everything the scenario requests"},
        {Command::spectra, "r(omega) and t(omega) tables"},
        {Command::raytrace, "analytic resonant pulse train"},
        {Command::measure, "Hilbert-Schmidt distance and non-Markovian content only"},
        {Command::validate, "check the scenario and its guards without solving"},
    };
    for (const auto &[c, help] : subcommands) {
        CLI::App *sub = app.add_subcommand(to_string(c), help);
        sub->add_option("config", opt.config, "scenario file")->required();
        sub->callback([&cmd, c = c] { cmd = c; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        return dispatch(cmd, opt);
    } catch (const std::exception &e) {
        std::cerr << "cavity-ctl: internal error: " << e.what() << "\n";
        return 1;
    }
}
