#include "cavity/scenario.hpp"
#include "cavity/errors.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace cavity
{

ConfigError::ConfigError(const std::string &message, std::string key, int line, int column)
    : std::runtime_error(message), key_(std::move(key)), line_(line), column_(column)
{
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed)
{
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string Scenario::hash_hex() const
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << hash;
    return os.str();
}

namespace
{

std::string join(const std::string &prefix, const std::string &key)
{
    return prefix.empty() ? key : prefix + "." + key;
}

[[noreturn]] void fail_at(const toml::node &node, const std::string &path, const std::string &what)
{
    const auto &src = node.source();
    throw ConfigError(what, path, static_cast<int>(src.begin.line), static_cast<int>(src.begin.column));
}

// Reader over one table that remembers which keys were consumed, so that
// unknown (misspelt) keys can be reported.
class TableReader
{
public:
    TableReader(const toml::table &table, std::string path) : table_(table), path_(std::move(path)) {}

    bool has(const std::string &key) const { return table_.contains(key); }

    std::optional<double> number(const std::string &key)
    {
        const toml::node *n = take(key);
        if (n == nullptr) {
            return std::nullopt;
        }
        if (auto v = n->value<double>()) {
            if (!std::isfinite(*v)) {
                fail_at(*n, join(path_, key), "'" + join(path_, key) + "' must be finite");
            }
            return *v;
        }
        fail_at(*n, join(path_, key), "'" + join(path_, key) + "' must be a number");
    }

    double number_or(const std::string &key, double fallback) { return number(key).value_or(fallback); }

    double required_number(const std::string &key)
    {
        if (auto v = number(key)) {
            return *v;
        }
        missing(key);
    }

    std::optional<std::int64_t> integer(const std::string &key)
    {
        const toml::node *n = take(key);
        if (n == nullptr) {
            return std::nullopt;
        }
        if (n->is_integer()) {
            return n->as_integer()->get();
        }
        fail_at(*n, join(path_, key), "'" + join(path_, key) + "' must be an integer");
    }

    std::optional<bool> boolean(const std::string &key)
    {
        const toml::node *n = take(key);
        if (n == nullptr) {
            return std::nullopt;
        }
        if (n->is_boolean()) {
            return n->as_boolean()->get();
        }
        fail_at(*n, join(path_, key), "'" + join(path_, key) + "' must be true or false");
    }

    std::optional<std::string> string(const std::string &key)
    {
        const toml::node *n = take(key);
        if (n == nullptr) {
            return std::nullopt;
        }
        if (n->is_string()) {
            return n->as_string()->get();
        }
        fail_at(*n, join(path_, key), "'" + join(path_, key) + "' must be a string");
    }

    const toml::array *array(const std::string &key)
    {
        const toml::node *n = take(key);
        if (n == nullptr) {
            return nullptr;
        }
        if (const toml::array *a = n->as_array()) {
            return a;
        }
        fail_at(*n, join(path_, key), "'" + join(path_, key) + "' must be an array");
    }

    [[noreturn]] void missing(const std::string &key) const
    {
        const auto &src = table_.source();
        throw ConfigError("missing required key '" + join(path_, key) + "'", join(path_, key),
                          static_cast<int>(src.begin.line), static_cast<int>(src.begin.column));
    }

    // every key must have been read
    void finish() const
    {
        for (const auto &[k, node] : table_) {
            const std::string key(k.str());
            if (!seen_.contains(key)) {
                fail_at(node, join(path_, key), "unknown key '" + join(path_, key) + "'");
            }
        }
    }

    const std::string &path() const { return path_; }

private:
    const toml::node *take(const std::string &key)
    {
        seen_.insert(key);
        return table_.get(key);
    }

    const toml::table &table_;
    std::string path_;
    std::set<std::string> seen_;
};

const toml::table &table_at(const toml::node &node, const std::string &path)
{
    if (const toml::table *t = node.as_table()) {
        return *t;
    }
    fail_at(node, path, "'" + path + "' must be a table");
}

Incidence parse_direction(const std::string &value, const toml::table &t, const std::string &path)
{
    if (value == "left" || value == "left-incident") {
        return Incidence::left;
    }
    if (value == "right" || value == "right-incident") {
        return Incidence::right;
    }
    fail_at(t, path, "'" + path + "' must be \"left\" or \"right\" (got \"" + value + "\")");
}

ControlIntent parse_intent(const std::string &value, const toml::table &t, const std::string &path)
{
    for (ControlIntent i : {ControlIntent::none, ControlIntent::cancel, ControlIntent::truncate, ControlIntent::confine}) {
        if (value == to_string(i)) {
            return i;
        }
    }
    fail_at(t, path, "'" + path + "' must be one of none, cancel, truncate, confine (got \"" + value + "\")");
}

void read_scenario_table(const toml::table &root, Scenario &s)
{
    TableReader top(root, "");
    if (root.contains("scenario")) {
        TableReader r(table_at(*root.get("scenario"), "scenario"), "scenario");
        s.name = r.string("name").value_or("");
        s.description = r.string("description").value_or("");
        r.finish();
    }

    if (!root.contains("media")) {
        top.missing("media");
    }
    {
        TableReader r(table_at(*root.get("media"), "media"), "media");
        s.units.lambda0_SI = r.number_or("lambda0_nm", 1500.0) * 1e-9;
        s.units.tau0_SI = r.number_or("tau0_fs", 5.0) * 1e-15;
        s.fabry_perot.L_A = r.number_or("L_A_lambda0", s.fabry_perot.L_A);
        s.fabry_perot.L_C = r.number_or("L_C_lambda0", s.fabry_perot.L_C);
        s.origin = r.number("origin_lambda0");
        if (const toml::array *layers = r.array("layers")) {
            std::vector<Layer> out;
            for (std::size_t i = 0; i < layers->size(); ++i) {
                const std::string path = "media.layers[" + std::to_string(i) + "]";
                TableReader l(table_at(*layers->get(i), path), path);
                Layer layer;
                layer.thickness = l.required_number("thickness_lambda0");
                layer.eps_r = l.number_or("eps_r", 1.0);
                layer.mu_r = l.number_or("mu_r", 1.0);
                l.finish();
                out.push_back(layer);
            }
            s.layers = std::move(out);
            s.fabry_perot.n_r = r.number_or("n_r", s.fabry_perot.n_r);
            s.fabry_perot.L_B = r.number_or("L_B_lambda0", s.fabry_perot.L_B);
        } else {
            s.fabry_perot.n_r = r.required_number("n_r");
            s.fabry_perot.L_B = r.required_number("L_B_lambda0");
        }
        r.finish();
    }

    if (const toml::array *regions = top.array("regions")) {
        for (std::size_t i = 0; i < regions->size(); ++i) {
            const std::string path = "regions[" + std::to_string(i) + "]";
            TableReader r(table_at(*regions->get(i), path), path);
            RegionSpec reg;
            auto name = r.string("name");
            if (!name) {
                r.missing("name");
            }
            reg.name = *name;
            reg.x_lo = r.required_number("x_lo_lambda0");
            reg.x_hi = r.required_number("x_hi_lambda0");
            r.finish();
            s.extra_regions.push_back(reg);
        }
    }

    if (!root.contains("pulse")) {
        top.missing("pulse");
    }
    {
        TableReader r(table_at(*root.get("pulse"), "pulse"), "pulse");
        s.pulse.T0_omega0 = r.required_number("T0_omega0");
        s.pulse.d_omega_r_omega0 = r.number_or("d_omega_r_omega0", 0.25);
        s.pulse.center = r.number("center_lambda0");
        s.pulse.delay = r.number_or("delay_tau0", 0.0);
        s.pulse.scale = {r.number_or("scale_re", 1.0), r.number_or("scale_im", 0.0)};
        if (auto d = r.string("direction")) {
            s.pulse.direction = parse_direction(*d, table_at(*root.get("pulse"), "pulse"), "pulse.direction");
        }
        r.finish();
    }

    if (!root.contains("grid")) {
        top.missing("grid");
    }
    {
        TableReader r(table_at(*root.get("grid"), "grid"), "grid");
        if (auto n = r.integer("n_omega")) {
            if (*n < 2) {
                fail_at(*table_at(*root.get("grid"), "grid").get("n_omega"), "grid.n_omega",
                        "'grid.n_omega' must be at least 2");
            }
            s.grid.n_omega = static_cast<std::size_t>(*n);
        }
        s.grid.t_min = r.number_or("t_min_tau0", 0.0);
        s.grid.t_max = r.required_number("t_max_tau0");
        s.grid.dt = r.number_or("dt_tau0", 0.25);
        s.grid.samples_per_wavelength = r.number_or("samples_per_wavelength", default_samples_per_wavelength);
        s.grid.x_min = r.number("x_min_lambda0");
        s.grid.x_max = r.number("x_max_lambda0");
        s.grid.spacetime_dx = r.number_or("spacetime_dx_lambda0", 0.5);
        s.grid.spacetime_dt = r.number_or("spacetime_dt_tau0", 1.0);
        r.finish();
    }

    if (root.contains("control")) {
        const toml::table &t = table_at(*root.get("control"), "control");
        TableReader r(t, "control");
        if (auto i = r.string("intent")) {
            s.control.intent = parse_intent(*i, t, "control.intent");
        }
        s.control.N = static_cast<int>(r.integer("N").value_or(1));
        s.control.K = static_cast<int>(r.integer("K").value_or(1));
        s.control.auto_amplitude = r.boolean("auto_amplitude").value_or(true);
        if (const toml::array *inj = r.array("injections")) {
            for (std::size_t i = 0; i < inj->size(); ++i) {
                const std::string path = "control.injections[" + std::to_string(i) + "]";
                const toml::table &it = table_at(*inj->get(i), path);
                TableReader ir(it, path);
                ManualInjection m;
                m.scale = {ir.number_or("scale_re", 0.0), ir.number_or("scale_im", 0.0)};
                m.delay = ir.required_number("delay_tau0");
                if (auto d = ir.string("direction")) {
                    m.direction = parse_direction(*d, it, path + ".direction");
                }
                m.center = ir.number("center_lambda0");
                ir.finish();
                s.control.injections.push_back(m);
            }
        }
        r.finish();
    }

    if (root.contains("measure")) {
        TableReader r(table_at(*root.get("measure"), "measure"), "measure");
        s.measure.enabled = r.boolean("enabled").value_or(true);
        s.measure.tau_M = r.required_number("tau_M_tau0");
        s.measure.include_uncontrolled = r.boolean("include_uncontrolled").value_or(false);
        if (const toml::array *regs = r.array("regions")) {
            for (std::size_t i = 0; i < regs->size(); ++i) {
                const toml::node *n = regs->get(i);
                if (!n->is_string()) {
                    fail_at(*n, "measure.regions", "'measure.regions' must be an array of region names");
                }
                s.measure.regions.push_back(n->as_string()->get());
            }
        } else {
            r.missing("regions");
        }
        r.finish();
    }

    if (root.contains("output")) {
        TableReader r(table_at(*root.get("output"), "output"), "output");
        s.output.spacetime = r.boolean("spacetime").value_or(s.output.spacetime);
        s.output.timeseries = r.boolean("timeseries").value_or(s.output.timeseries);
        s.output.energies = r.boolean("energies").value_or(s.output.energies);
        s.output.pulses = r.boolean("pulses").value_or(s.output.pulses);
        s.output.raytrace = r.boolean("raytrace").value_or(s.output.raytrace);
        s.output.spectra = r.boolean("spectra").value_or(s.output.spectra);
        s.output.x_R = r.number("x_R_lambda0");
        s.output.raytrace_round_trips = static_cast<int>(r.integer("raytrace_round_trips").value_or(6));
        r.finish();
    }

    static const std::set<std::string> known{"scenario", "media", "regions", "pulse",
                                             "grid",     "control", "measure", "output"};
    for (const auto &[k, node] : root) {
        if (!known.contains(std::string(k.str()))) {
            fail_at(node, std::string(k.str()), "unknown key '" + std::string(k.str()) + "'");
        }
    }
}

} // namespace

Scenario parse_scenario(const std::string &text, const std::string &source_name)
{
    toml::table root;
    try {
        root = toml::parse(text, source_name);
    } catch (const toml::parse_error &e) {
        throw ConfigError(std::string(e.description()), {}, static_cast<int>(e.source().begin.line),
                          static_cast<int>(e.source().begin.column));
    }
    Scenario s;
    s.source = source_name;
    read_scenario_table(root, s);

    std::ostringstream canonical;
    canonical << toml::toml_formatter{root};
    s.hash = fnv1a(canonical.str());
    return s;
}

Scenario load_scenario(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::filesystem::filesystem_error("cannot open scenario", path,
                                                std::make_error_code(std::errc::no_such_file_or_directory));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    Scenario s = parse_scenario(buf.str(), path.string());
    if (s.name.empty()) {
        s.name = path.stem().string();
    }
    return s;
}

const RegionSpec &ScenarioModel::region(const std::string &name) const
{
    if (const RegionSpec *r = find_region(regions, name)) {
        return *r;
    }
    throw Error(ErrorKind::domain, "unknown region '" + name + "'");
}

ScenarioModel build_model(const Scenario &sc)
{
    sc.units.validate();
    ScenarioModel m;

    // geometry and regions
    if (sc.layers) {
        const double origin = sc.origin.value_or(sc.fabry_perot.L_A);
        m.stack = LayerStack(origin, *sc.layers);
        if (!(sc.fabry_perot.L_A > 0.0) || !(sc.fabry_perot.L_C > 0.0)) {
            throw Error(ErrorKind::invalid_geometry, "L_A and L_C must be positive");
        }
        m.regions.push_back(make_region("A", origin - sc.fabry_perot.L_A, origin));
        m.regions.push_back(make_region("C", m.stack.end(), m.stack.end() + sc.fabry_perot.L_C));
    } else {
        m.stack = build_fabry_perot(sc.fabry_perot);
        m.regions = default_regions(m.stack, sc.fabry_perot);
        if (sc.fabry_perot.n_r > 1.0) {
            m.resonance = resonance_constants(sc.fabry_perot);
        }
    }
    for (const RegionSpec &extra : sc.extra_regions) {
        RegionSpec r = make_region(extra.name, extra.x_lo, extra.x_hi);
        auto it = std::find_if(m.regions.begin(), m.regions.end(), [&](const RegionSpec &x) { return x.name == r.name; });
        if (it != m.regions.end()) {
            *it = r;
        } else {
            m.regions.push_back(r);
        }
    }

    // time axis and frequency grid
    const GridConfig &g = sc.grid;
    if (!(g.dt > 0.0) || !(g.t_max > g.t_min)) {
        throw Error(ErrorKind::domain, "time grid needs dt_tau0 > 0 and t_max_tau0 > t_min_tau0");
    }
    if (g.samples_per_wavelength < minimum_samples_per_wavelength) {
        std::ostringstream os;
        os << "samples_per_wavelength = " << g.samples_per_wavelength << " is below the minimum of "
           << minimum_samples_per_wavelength << "; raise grid.samples_per_wavelength";
        throw Error(ErrorKind::resolution, os.str());
    }
    if (!(g.spacetime_dx > 0.0) || !(g.spacetime_dt > 0.0)) {
        throw Error(ErrorKind::domain, "spacetime_dx_lambda0 and spacetime_dt_tau0 must be positive");
    }
    m.axis.t0 = g.t_min;
    m.axis.dt = g.dt;
    m.axis.n = static_cast<std::size_t>(std::floor((g.t_max - g.t_min) / g.dt + 1e-9)) + 1;
    const double tau_M = sc.measure.enabled ? sc.measure.tau_M : 0.0;
    if (sc.measure.enabled && !(tau_M >= 0.0)) {
        throw Error(ErrorKind::domain, "measure.tau_M_tau0 must be >= 0");
    }
    const double t_extent = std::max(std::abs(g.t_min), std::abs(m.axis.back() + tau_M));

    const double d_omega_r = sc.pulse.d_omega_r_omega0 * units::omega0;
    if (!(sc.pulse.d_omega_r_omega0 > 0.0 && sc.pulse.d_omega_r_omega0 < 1.0)) {
        throw Error(ErrorKind::domain, "pulse.d_omega_r_omega0 must lie in (0, 1)");
    }
    if (!(sc.pulse.T0_omega0 > 0.0)) {
        throw Error(ErrorKind::domain, "pulse.T0_omega0 must be positive");
    }
    const FrequencyGrid grid = make_frequency_grid(units::omega0, d_omega_r, g.n_omega, t_extent);
    m.envelope = std::make_shared<const SpectralEnvelope>(
        smoothed_rect_spectrum(grid, units::omega0, sc.pulse.T0_omega0 / units::omega0, d_omega_r));

    // lead pulse: by default fully left of region A (or right of C), with
    // room for the second trajectory which runs tau_M ahead
    const double half = m.envelope->support_halfwidth();
    double center = 0.0;
    if (sc.pulse.center) {
        center = *sc.pulse.center;
    } else if (sc.pulse.direction == Incidence::left) {
        const RegionSpec *a = find_region(m.regions, "A");
        const double edge = a != nullptr ? a->x_lo : m.stack.origin();
        center = edge - half - 1.0 - units::c * tau_M;
    } else {
        const RegionSpec *c = find_region(m.regions, "C");
        const double edge = c != nullptr ? c->x_hi : m.stack.end();
        center = edge + half + 1.0 + units::c * tau_M;
    }
    m.lead = apply_injection(m.envelope, sc.pulse.scale, sc.pulse.delay, sc.pulse.direction, center);
    const double face = sc.pulse.direction == Incidence::left ? m.stack.origin() : m.stack.end();
    m.lead_arrival = arrival_time(m.lead, face);

    // control schedule
    const ControlConfig &c = sc.control;
    if (c.intent != ControlIntent::none && c.auto_amplitude) {
        if (!m.resonance) {
            throw Error(ErrorKind::model_domain,
                        "automatic control amplitudes need the two-mirror resonator with n_r > 1");
        }
        const ResonanceConstants &res = *m.resonance;
        switch (c.intent) {
        case ControlIntent::cancel: m.schedule = design_truncation(res, res.r, 1, m.lead); break;
        case ControlIntent::truncate: m.schedule = design_truncation(res, res.r, c.N, m.lead); break;
        case ControlIntent::confine: m.schedule = design_confinement(res, res.r, res.t, c.K, m.lead, m.stack); break;
        case ControlIntent::none: break;
        }
    } else if (c.intent != ControlIntent::none) {
        if (c.injections.empty()) {
            throw Error(ErrorKind::domain, "control.auto_amplitude = false needs control.injections");
        }
        m.schedule.intent = c.intent;
        m.schedule.order = c.intent == ControlIntent::confine ? c.K : c.N;
        for (const ManualInjection &mi : c.injections) {
            PulseInjection p = m.lead;
            p.scale = mi.scale * m.lead.scale;
            p.delay = m.lead.delay + mi.delay;
            p.direction = mi.direction;
            if (mi.center) {
                p.center0 = *mi.center;
            } else if (mi.direction != m.lead.direction) {
                // mirror image of the lead's launch point about the stack
                p.center0 = m.stack.origin() + m.stack.end() - m.lead.center0;
            }
            const double f = p.direction == Incidence::left ? m.stack.origin() : m.stack.end();
            m.schedule.controls.push_back({p, arrival_time(p, f) - m.lead_arrival, mi.scale});
        }
    }
    m.injections = m.schedule.with_lead(m.lead);
    check_injections(m.stack, m.injections);

    // measure regions
    if (sc.measure.enabled) {
        if (sc.measure.regions.empty()) {
            throw Error(ErrorKind::domain, "measure.regions is empty");
        }
        for (const std::string &name : sc.measure.regions) {
            if (find_region(m.regions, name) == nullptr) {
                std::string known;
                for (const RegionSpec &r : m.regions) {
                    known += (known.empty() ? "" : ", ") + r.name;
                }
                throw Error(ErrorKind::domain, "measure region '" + name + "' is not defined (known: " + known + ")");
            }
        }
    }

    // detector and plotting window
    if (sc.output.x_R) {
        m.x_R = *sc.output.x_R;
    } else if (const RegionSpec *cr = find_region(m.regions, "C")) {
        m.x_R = 0.5 * (cr->x_lo + cr->x_hi);
    } else {
        m.x_R = m.stack.end() + 10.0;
    }
    double lo = m.stack.origin(), hi = m.stack.end();
    for (const RegionSpec &r : m.regions) {
        lo = std::min(lo, r.x_lo);
        hi = std::max(hi, r.x_hi);
    }
    lo = g.x_min.value_or(lo);
    hi = g.x_max.value_or(hi);
    if (!(hi > lo)) {
        throw Error(ErrorKind::domain, "grid.x_max_lambda0 must exceed grid.x_min_lambda0");
    }
    const auto nx = static_cast<std::size_t>(std::floor((hi - lo) / g.spacetime_dx + 1e-9)) + 1;
    m.spacetime_x.resize(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        m.spacetime_x[i] = lo + g.spacetime_dx * static_cast<double>(i);
    }
    m.spacetime_axis.t0 = g.t_min;
    m.spacetime_axis.dt = g.spacetime_dt;
    m.spacetime_axis.n = static_cast<std::size_t>(std::floor((g.t_max - g.t_min) / g.spacetime_dt + 1e-9)) + 1;

    if (sc.output.raytrace) {
        if (!m.resonance) {
            throw Error(ErrorKind::model_domain, "the ray trace needs the two-mirror resonator with n_r > 1");
        }
        if (sc.output.raytrace_round_trips < 1) {
            throw Error(ErrorKind::domain, "output.raytrace_round_trips must be >= 1");
        }
        (void)raytrace(*m.resonance, m.schedule, 1); // arrival grid check
    }
    return m;
}

} // namespace cavity
