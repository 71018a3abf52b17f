#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ensemble/io.hpp"
#include "ensemble/scenarios.hpp"

namespace ens {

enum class Mode { simulate, compare, verify_axioms, list_scenarios };

inline std::string mode_name(Mode m) {
    switch (m) {
    case Mode::simulate: return "simulate";
    case Mode::compare: return "compare";
    case Mode::verify_axioms: return "verify-axioms";
    default: return "list-scenarios";
    }
}

struct RunConfig {
    Mode mode = Mode::simulate;
    Scenario scenario;
    std::string output_dir = "out";
    SnapshotFormat format = SnapshotFormat::csv;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    std::size_t line;
};

class Reader {
public:
    explicit Reader(std::map<std::string, Entry> e) : entries_(std::move(e)) {}

    bool has(const std::string& k) const { return entries_.count(k) != 0; }

    std::string text(const std::string& k) const { return entries_.at(k).value; }

    double number(const std::string& k) const {
        const auto& e = entries_.at(k);
        try {
            std::size_t used = 0;
            const double v = std::stod(e.value, &used);
            if (used != e.value.size()) throw std::invalid_argument("trailing text");
            return v;
        } catch (const std::logic_error&) {
            throw ConfigError("line " + std::to_string(e.line) + ": " + k + " expects a number, got '" + e.value + "'");
        }
    }

    std::uint64_t count(const std::string& k) const {
        const double v = number(k);
        if (v < 0 || v != static_cast<double>(static_cast<std::uint64_t>(v)))
            throw ConfigError("line " + std::to_string(entries_.at(k).line) + ": " + k + " expects a non-negative integer");
        return static_cast<std::uint64_t>(v);
    }

    std::vector<double> numbers(const std::string& k) const {
        std::vector<double> out;
        const auto& e = entries_.at(k);
        for (const auto& part : split(e.value, ',')) {
            try {
                out.push_back(std::stod(trim(part)));
            } catch (const std::logic_error&) {
                throw ConfigError("line " + std::to_string(e.line) + ": " + k + " expects comma-separated numbers");
            }
        }
        return out;
    }

    [[noreturn]] void fail(const std::string& k, const std::string& why) const {
        if (has(k)) throw ConfigError("line " + std::to_string(entries_.at(k).line) + ": " + k + ": " + why);
        throw ConfigError(k + ": " + why);
    }

private:
    std::map<std::string, Entry> entries_;
};

inline const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "mode",
        "seed",
        "scenario.name",
        "scenario.points",
        "scenario.lower",
        "scenario.upper",
        "scenario.masses",
        "scenario.dims_per_particle",
        "scenario.initial",
        "scenario.mu",
        "scenario.sigma",
        "scenario.k",
        "scenario.omega",
        "scenario.displacement",
        "scenario.potential",
        "scenario.spring",
        "scenario.barrier_height",
        "scenario.barrier_center",
        "scenario.barrier_width",
        "scenario.potential_file",
        "model.hbar",
        "model.A",
        "model.B",
        "model.density_floor",
        "run.dt",
        "run.t_final",
        "run.stride",
        "run.integrator",
        "run.stability_factor",
        "run.lattice_order",
        "output.dir",
        "output.format",
    };
    return keys;
}

/// Empty lists take `fill`, a single value applies to every axis, anything
/// else must have one value per axis.
inline std::vector<double> broadcast(std::vector<double> v, std::size_t d, double fill) {
    if (v.size() == d) return v;
    if (v.empty()) return std::vector<double>(d, fill);
    if (v.size() == 1) return std::vector<double>(d, v[0]);
    throw ConfigError("expected 1 or " + std::to_string(d) + " values, got " + std::to_string(v.size()));
}

} // namespace detail

inline Mode parse_mode(const std::string& s) {
    if (s == "simulate") return Mode::simulate;
    if (s == "compare") return Mode::compare;
    if (s == "verify-axioms") return Mode::verify_axioms;
    if (s == "list-scenarios") return Mode::list_scenarios;
    throw ConfigError("unknown mode '" + s + "'");
}

/// Parses the flat `key = value` format. `#` starts a comment. Every key must
/// be known and may appear once; the result is fully validated. A `mode`
/// argument (the command verb) takes precedence over the `mode` key.
inline RunConfig parse_config(const std::string& text, std::optional<Mode> mode = std::nullopt) {
    std::map<std::string, detail::Entry> entries;
    std::istringstream is(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        if (!detail::known_keys().count(key))
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        if (entries.count(key))
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        entries[key] = {value, line_no};
    }
    const detail::Reader r(std::move(entries));

    RunConfig cfg;
    if (r.has("mode")) {
        try {
            cfg.mode = parse_mode(r.text("mode"));
        } catch (const ConfigError& e) {
            r.fail("mode", e.what());
        }
    }
    if (mode) cfg.mode = *mode;
    if (r.has("seed")) cfg.seed = r.count("seed");
    if (r.has("output.dir")) cfg.output_dir = r.text("output.dir");
    if (r.has("output.format")) {
        const auto f = r.text("output.format");
        if (f == "csv") cfg.format = SnapshotFormat::csv;
        else if (f == "bin") cfg.format = SnapshotFormat::binary;
        else r.fail("output.format", "must be csv or bin");
    }

    Scenario& sc = cfg.scenario;
    if (r.has("scenario.name")) {
        try {
            sc = find_scenario(r.text("scenario.name"));
        } catch (const ConfigError& e) {
            r.fail("scenario.name", e.what());
        }
    } else if (r.has("scenario.points")) {
        sc = Scenario{};
        sc.name = "custom";
        sc.grid = GridSpec::line(256, -10.0, 10.0);
        sc.constants = Constants::quantum();
        sc.run.t_final = 1.0;
    } else if (cfg.mode == Mode::simulate || cfg.mode == Mode::compare) {
        throw ConfigError("scenario.name: a preset name or inline scenario.points is required");
    } else {
        sc = find_scenario("free-quantum-gaussian");
    }

    // Grid and metric.
    if (r.has("scenario.points") || r.has("scenario.lower") || r.has("scenario.upper")) {
        std::vector<std::size_t> pts = sc.grid.points;
        if (r.has("scenario.points")) {
            pts.clear();
            for (double v : r.numbers("scenario.points")) {
                if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) r.fail("scenario.points", "expects integers");
                pts.push_back(static_cast<std::size_t>(v));
            }
        }
        const auto lo = r.has("scenario.lower") ? r.numbers("scenario.lower") : sc.grid.lower;
        const auto hi = r.has("scenario.upper") ? r.numbers("scenario.upper") : sc.grid.upper;
        try {
            sc.grid = GridSpec(pts, detail::broadcast(lo, pts.size(), lo.empty() ? -10.0 : lo[0]),
                               detail::broadcast(hi, pts.size(), hi.empty() ? 10.0 : hi[0]));
        } catch (const ConfigError& e) {
            r.fail("scenario.points", e.what());
        }
    }
    if (r.has("scenario.masses") || r.has("scenario.dims_per_particle")) {
        const auto masses = r.has("scenario.masses") ? r.numbers("scenario.masses") : sc.metric.masses;
        const auto d = r.has("scenario.dims_per_particle") ? r.count("scenario.dims_per_particle") : sc.metric.dims_per_particle;
        try {
            sc.metric = Metric(masses, d);
        } catch (const ConfigError& e) {
            r.fail("scenario.masses", e.what());
        }
    } else if (sc.metric.dims() != sc.grid.dims()) {
        sc.metric = Metric(std::vector<double>(sc.grid.dims() / sc.metric.dims_per_particle, sc.metric.masses[0]),
                           sc.metric.dims_per_particle);
    }
    try {
        sc.metric.check(sc.grid);
    } catch (const ConfigError& e) {
        r.fail("scenario.masses", e.what());
    }

    // Constants. B follows hbar unless given, keeping a quantum preset quantum.
    const bool was_quantum = sc.constants.is_quantum_point();
    if (r.has("model.hbar")) sc.constants.hbar = r.number("model.hbar");
    if (r.has("model.A")) sc.constants.A = r.number("model.A");
    if (r.has("model.B")) sc.constants.B = r.number("model.B");
    else if (was_quantum) sc.constants.B = sc.constants.hbar * sc.constants.hbar / 8.0;
    if (!(sc.constants.hbar > 0.0)) r.fail("model.hbar", "must be positive");
    if (!(sc.constants.A >= 0.0)) r.fail("model.A", "must be non-negative");
    if (!(sc.constants.B >= 0.0)) r.fail("model.B", "must be non-negative");
    if (r.has("model.density_floor")) {
        sc.density_floor = r.number("model.density_floor");
        if (!(sc.density_floor > 0.0)) r.fail("model.density_floor", "must be positive");
    }

    // Potential.
    const std::size_t d = sc.grid.dims();
    if (r.has("scenario.potential")) {
        const auto kind = r.text("scenario.potential");
        if (kind == "free") {
            sc.potential = FreePotential{};
        } else if (kind == "harmonic") {
            sc.potential = HarmonicPotential{detail::broadcast(r.has("scenario.spring") ? r.numbers("scenario.spring")
                                                                                         : std::vector<double>{1.0},
                                                               d, 1.0)};
        } else if (kind == "barrier") {
            BarrierPotential b;
            b.height = r.has("scenario.barrier_height") ? r.number("scenario.barrier_height") : 1.0;
            b.width = r.has("scenario.barrier_width") ? r.number("scenario.barrier_width") : 1.0;
            b.center = detail::broadcast(r.has("scenario.barrier_center") ? r.numbers("scenario.barrier_center")
                                                                          : std::vector<double>{0.0},
                                         d, 0.0);
            sc.potential = b;
        } else if (kind == "sampled") {
            if (!r.has("scenario.potential_file")) r.fail("scenario.potential", "sampled needs scenario.potential_file");
            const Snapshot snap = read_snapshot(r.text("scenario.potential_file"));
            if (!(snap.grid == sc.grid)) r.fail("scenario.potential_file", "sampled potential lives on another grid");
            sc.potential = SampledPotential{snap.grid, snap.columns.at(0)};
        } else {
            r.fail("scenario.potential", "must be free, harmonic, barrier or sampled");
        }
    } else if (r.has("scenario.spring")) {
        sc.potential = HarmonicPotential{detail::broadcast(r.numbers("scenario.spring"), d, 1.0)};
    } else if (auto* h = std::get_if<HarmonicPotential>(&sc.potential); h && h->spring.size() != d) {
        h->spring = detail::broadcast(h->spring, d, 1.0);
    }

    // Initial condition.
    auto& ic = sc.initial;
    if (r.has("scenario.initial")) {
        const auto kind = r.text("scenario.initial");
        if (kind == "gaussian") ic.kind = InitialCondition::gaussian;
        else if (kind == "coherent") ic.kind = InitialCondition::coherent;
        else r.fail("scenario.initial", "must be gaussian or coherent");
    }
    if (ic.kind == InitialCondition::sampled && (r.has("scenario.points") || r.has("scenario.sigma") || r.has("scenario.mu")))
        ic.kind = InitialCondition::gaussian;
    if (r.has("scenario.mu")) ic.mu = r.numbers("scenario.mu");
    if (r.has("scenario.sigma")) ic.sigma = r.numbers("scenario.sigma");
    if (r.has("scenario.k")) ic.k = r.numbers("scenario.k");
    ic.mu = detail::broadcast(ic.mu, d, 0.0);
    ic.sigma = detail::broadcast(ic.sigma, d, 1.0);
    ic.k = detail::broadcast(ic.k, d, 0.0);
    if (r.has("scenario.omega")) ic.omega = r.number("scenario.omega");
    if (r.has("scenario.displacement")) ic.displacement = r.number("scenario.displacement");
    try {
        (void)sc.initial_state();
    } catch (const Error& e) {
        r.fail("scenario.sigma", e.what());
    }

    // Run parameters.
    RunParams& run = sc.run;
    if (r.has("run.dt")) run.dt = r.number("run.dt");
    if (r.has("run.t_final")) run.t_final = r.number("run.t_final");
    if (r.has("run.stride")) run.snapshot_stride = r.count("run.stride");
    if (r.has("run.stability_factor")) run.stability_factor = r.number("run.stability_factor");
    if (r.has("run.lattice_order")) run.lattice_order = static_cast<int>(r.count("run.lattice_order"));
    if (r.has("run.integrator")) {
        const auto i = r.text("run.integrator");
        if (i == "rk4") run.integrator = Integrator::rk4;
        else if (i == "heun") run.integrator = Integrator::heun;
        else r.fail("run.integrator", "must be rk4 or heun");
    }
    if (!(run.t_final >= 0.0)) r.fail("run.t_final", "must be >= 0");
    if (run.snapshot_stride < 1) r.fail("run.stride", "must be >= 1");
    if (!(run.stability_factor > 0.0)) r.fail("run.stability_factor", "must be positive");
    if (r.has("run.dt") && !(run.dt > 0.0)) r.fail("run.dt", "must be positive");
    try {
        Lattice::coefficients(run.lattice_order);
    } catch (const ConfigError& e) {
        r.fail("run.lattice_order", e.what());
    }
    try {
        run = resolve_run(run, sc.grid, sc.model());
    } catch (const ConfigError& e) {
        r.fail("run.dt", e.what());
    }
    return cfg;
}

/// Every setting the run used, in the same format parse_config reads.
inline std::string effective_config(const RunConfig& c) {
    const Scenario& s = c.scenario;
    std::ostringstream os;
    auto list = [](const std::vector<double>& v) { return detail::join(v, ", "); };
    os << "mode = " << mode_name(c.mode) << '\n';
    os << "seed = " << c.seed << '\n';
    os << "output.dir = " << c.output_dir << '\n';
    os << "output.format = " << (c.format == SnapshotFormat::csv ? "csv" : "bin") << '\n';
    os << "scenario.name = " << s.name << '\n';
    os << "scenario.points = " << detail::join(s.grid.points, ", ") << '\n';
    os << "scenario.lower = " << list(s.grid.lower) << '\n';
    os << "scenario.upper = " << list(s.grid.upper) << '\n';
    os << "scenario.masses = " << list(s.metric.masses) << '\n';
    os << "scenario.dims_per_particle = " << s.metric.dims_per_particle << '\n';
    if (s.initial.kind == InitialCondition::coherent) {
        os << "scenario.initial = coherent\n";
        os << "scenario.omega = " << fmt(s.initial.omega) << '\n';
        os << "scenario.displacement = " << fmt(s.initial.displacement) << '\n';
    } else {
        os << "scenario.initial = gaussian\n";
        os << "scenario.mu = " << list(s.initial.mu) << '\n';
        os << "scenario.sigma = " << list(s.initial.sigma) << '\n';
        os << "scenario.k = " << list(s.initial.k) << '\n';
    }
    os << "scenario.potential = " << potential_kind(s.potential) << '\n';
    if (const auto* h = std::get_if<HarmonicPotential>(&s.potential)) os << "scenario.spring = " << list(h->spring) << '\n';
    if (const auto* b = std::get_if<BarrierPotential>(&s.potential)) {
        os << "scenario.barrier_height = " << fmt(b->height) << '\n';
        os << "scenario.barrier_center = " << list(b->center) << '\n';
        os << "scenario.barrier_width = " << fmt(b->width) << '\n';
    }
    os << "model.hbar = " << fmt(s.constants.hbar) << '\n';
    os << "model.A = " << fmt(s.constants.A) << '\n';
    os << "model.B = " << fmt(s.constants.B) << '\n';
    os << "model.density_floor = " << fmt(s.density_floor) << '\n';
    os << "run.dt = " << fmt(s.run.dt) << '\n';
    os << "run.t_final = " << fmt(s.run.t_final) << '\n';
    os << "run.stride = " << s.run.snapshot_stride << '\n';
    os << "run.integrator = " << (s.run.integrator == Integrator::rk4 ? "rk4" : "heun") << '\n';
    os << "run.stability_factor = " << fmt(s.run.stability_factor) << '\n';
    os << "run.lattice_order = " << s.run.lattice_order << '\n';
    return os.str();
}

} // namespace ens
