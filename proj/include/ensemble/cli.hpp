#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>

#include "ensemble/axioms.hpp"
#include "ensemble/config.hpp"
#include "ensemble/io.hpp"

namespace ens {

enum ExitCode : int { exit_ok = 0, exit_tolerance = 1, exit_config = 2, exit_blowup = 3 };

/// Acceptance tolerances applied to every hydrodynamic run.
inline constexpr double kNormTolerance = 1e-8;
inline constexpr double kEnergyTolerance = 1e-6;
inline constexpr double kFidelityTolerance = 1e-5;
inline constexpr double kDensityL2Tolerance = 1e-4;

namespace detail {

inline std::filesystem::path prepare_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec || !std::filesystem::is_directory(p)) throw ConfigError("output.dir: cannot create '" + dir + "'");
    return p;
}

/// Norm and energy drift against the first snapshot. Energy drift is relative
/// to |E0|, or absolute when E0 is (numerically) zero.
inline bool conservation_ok(const std::vector<ObservableRecord>& obs, std::ostream& err) {
    bool ok = true;
    const double n0 = obs.front().norm, e0 = obs.front().energy;
    const double escale = std::max(std::abs(e0), 1e-12);
    double dn = 0.0, de = 0.0;
    for (const auto& r : obs) {
        dn = std::max(dn, std::abs(r.norm - n0));
        de = std::max(de, std::abs(r.energy - e0) / escale);
    }
    if (dn > kNormTolerance) {
        err << "tolerance: norm drift " << dn << " exceeds " << kNormTolerance << '\n';
        ok = false;
    }
    if (de > kEnergyTolerance) {
        err << "tolerance: relative energy drift " << de << " exceeds " << kEnergyTolerance << '\n';
        ok = false;
    }
    return ok;
}

inline void write_trajectory(const std::filesystem::path& dir, const Trajectory& tr, SnapshotFormat f) {
    const auto snaps = dir / "snapshots";
    std::filesystem::create_directories(snaps);
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "snapshot_%05zu.%s", i, f == SnapshotFormat::csv ? "csv" : "bin");
        write_snapshot(snaps / name, state_snapshot(tr.snapshots[i]), f);
    }
    write_observables(dir / "observables.csv", tr.observables, tr.snapshots.front().grid.dims());
}

inline int simulate(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const auto dir = prepare_dir(c.output_dir);
    std::ofstream(dir / "effective-config.txt") << effective_config(c);
    const Scenario& sc = c.scenario;
    const Trajectory tr = evolve_hydro(sc.initial_state(), sc.model(), sc.run);
    write_trajectory(dir, tr, c.format);
    for (const auto& w : tr.warnings) err << "warning: " << w << '\n';
    if (tr.failure) {
        err << "blow-up: " << *tr.failure << '\n';
        return exit_blowup;
    }
    out << sc.name << ": " << tr.snapshots.size() << " snapshots to t=" << fmt(tr.snapshots.back().time) << " in "
        << dir.string() << '\n';
    return conservation_ok(tr.observables, err) ? exit_ok : exit_tolerance;
}

inline int compare(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const Scenario& sc = c.scenario;
    const HamiltonianModel m = sc.model();
    if (!sc.constants.is_quantum_point())
        throw ConfigError("model.B: compare needs the quantum point A = 1/2, B = hbar^2/8");
    const auto dir = prepare_dir(c.output_dir);
    std::ofstream(dir / "effective-config.txt") << effective_config(c);
    const FieldState s0 = sc.initial_state();
    auto hydro = std::async(std::launch::async, [&] { return evolve_hydro(s0, m, sc.run); });
    auto ref = std::async(std::launch::async, [&] { return evolve_reference(to_wavefunction(s0, sc.constants), m, sc.run); });
    const Trajectory th = hydro.get();
    const ReferenceTrajectory tr = ref.get();
    write_observables(dir / "observables.csv", th.observables, sc.grid.dims());
    for (const auto& w : th.warnings) err << "warning: " << w << '\n';

    std::ofstream table(dir / "discrepancy.csv", std::ios::binary);
    table << "time,l2_density,sup_density,fidelity\n";
    bool ok = true;
    double worst_l2 = 0.0, worst_fid = 1.0;
    for (std::size_t k = 0; k < th.snapshots.size(); ++k) {
        const auto& w = tr.snapshots[k];
        FieldState rs{w.grid, RealField(w.psi.size()), RealField(w.psi.size(), 0.0), w.time};
        for (std::size_t j = 0; j < rs.p.size(); ++j) rs.p[j] = std::norm(w.psi[j]);
        auto cmp = compare_states(th.snapshots[k], rs, sc.constants);
        cmp.fidelity = fidelity(to_wavefunction(th.snapshots[k], sc.constants), w);
        table << fmt(th.snapshots[k].time) << ',' << fmt(cmp.l2) << ',' << fmt(cmp.sup) << ',' << fmt(cmp.fidelity) << '\n';
        worst_l2 = std::max(worst_l2, cmp.l2);
        worst_fid = std::min(worst_fid, cmp.fidelity);
        if (!(cmp.fidelity > 1.0 - kFidelityTolerance) || !(cmp.l2 < kDensityL2Tolerance)) ok = false;
    }
    if (th.failure) {
        err << "blow-up: " << *th.failure << '\n';
        return exit_blowup;
    }
    out << sc.name << ": max L2 " << worst_l2 << ", min fidelity " << fmt(worst_fid) << " over "
        << th.snapshots.size() << " snapshots\n";
    if (!ok) err << "tolerance: hydrodynamic and reference solutions disagree\n";
    const bool conserved = conservation_ok(th.observables, err);
    return ok && conserved ? exit_ok : exit_tolerance;
}

inline int verify_axioms(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const auto dir = prepare_dir(c.output_dir);
    std::ofstream(dir / "effective-config.txt") << effective_config(c);
    const auto reports = run_axiom_suite(c.seed);
    write_axiom_report(dir, reports);
    out << axiom_table(reports);
    if (!suite_ok(reports)) {
        err << "tolerance: axiom suite has failures\n";
        return exit_tolerance;
    }
    return exit_ok;
}

} // namespace detail

inline int list_scenarios(std::ostream& out) {
    for (const auto& s : preset_scenarios()) out << s.name << "  " << s.description << '\n';
    return exit_ok;
}

/// Executes a parsed configuration; errors become exit codes with one
/// diagnostic line on `err`.
inline int run(const RunConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        switch (c.mode) {
        case Mode::simulate: return detail::simulate(c, out, err);
        case Mode::compare: return detail::compare(c, out, err);
        case Mode::verify_axioms: return detail::verify_axioms(c, out, err);
        case Mode::list_scenarios: return list_scenarios(out);
        }
    } catch (const BlowUpError& e) {
        err << "blow-up: " << e.what() << '\n';
        return exit_blowup;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }
    return exit_config;
}

} // namespace ens
