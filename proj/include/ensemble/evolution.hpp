#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ensemble/diagnostics.hpp"
#include "ensemble/fft.hpp"
#include "ensemble/lattice.hpp"

namespace ens {

/// Heun is second order and only weakly stable for oscillatory systems: the
/// stiffest lattice modes grow by about (omega dt)^4 / 8 per step, so long
/// runs need a smaller stability_factor than RK4.
enum class Integrator { rk4, heun };

struct RunParams {
    double dt = 0.0; // 0 picks the stability limit
    double t_final = 0.0;
    std::size_t snapshot_stride = 10;
    Integrator integrator = Integrator::rk4;
    double stability_factor = 0.2;
    int lattice_order = 8;
};

/// Largest dt allowed: stability_factor * min(dx)^2 * m_min / hbar.
inline double stability_limit(const GridSpec& g, const HamiltonianModel& m, double factor = 0.2) {
    const double h = g.min_spacing();
    return factor * h * h * m.metric.min_mass() / m.constants.hbar;
}

/// Validates `run` and fills in dt when it was left at 0.
inline RunParams resolve_run(RunParams run, const GridSpec& g, const HamiltonianModel& m) {
    if (!(run.stability_factor > 0.0)) throw ConfigError("stability_factor must be positive");
    if (!(run.t_final >= 0.0) || !std::isfinite(run.t_final)) throw ConfigError("t_final must be >= 0");
    if (run.snapshot_stride < 1) throw ConfigError("snapshot_stride must be >= 1");
    Lattice::coefficients(run.lattice_order);
    const double limit = stability_limit(g, m, run.stability_factor);
    if (run.dt == 0.0) run.dt = limit;
    if (!(run.dt > 0.0) || !std::isfinite(run.dt)) throw ConfigError("dt must be positive");
    if (run.dt > limit * (1.0 + 1e-12))
        throw ConfigError("dt " + std::to_string(run.dt) + " exceeds the stability limit " + std::to_string(limit));
    return run;
}

/// Step count and the slightly shortened step that lands exactly on t_final.
inline std::pair<std::size_t, double> step_plan(const RunParams& run) {
    if (run.t_final == 0.0) return {0, run.dt};
    const auto n = static_cast<std::size_t>(std::ceil(run.t_final / run.dt - 1e-9));
    return {n, run.t_final / static_cast<double>(n)};
}

/// Explicit stepping of the lattice Hamilton equations.
class HydroStepper {
public:
    HydroStepper(const GridSpec& g, const HamiltonianModel& m, Integrator integ = Integrator::rk4, int order = 8)
        : lattice_(g, m, order), floor_(m.density_floor), integ_(integ) {}

    const Lattice& lattice() const { return lattice_; }

    /// Advances in place; p is clamped to the floor afterwards.
    void step(FieldState& s, double dt) const {
        const std::size_t n = s.p.size();
        RealField k1p, k1s, k2p, k2s;
        lattice_.rhs(s.p, s.S, k1p, k1s);
        RealField tp(n), ts(n);
        if (integ_ == Integrator::heun) {
            for (std::size_t j = 0; j < n; ++j) { tp[j] = s.p[j] + dt * k1p[j]; ts[j] = s.S[j] + dt * k1s[j]; }
            lattice_.rhs(tp, ts, k2p, k2s);
            for (std::size_t j = 0; j < n; ++j) {
                s.p[j] += 0.5 * dt * (k1p[j] + k2p[j]);
                s.S[j] += 0.5 * dt * (k1s[j] + k2s[j]);
            }
        } else {
            RealField k3p, k3s, k4p, k4s;
            for (std::size_t j = 0; j < n; ++j) { tp[j] = s.p[j] + 0.5 * dt * k1p[j]; ts[j] = s.S[j] + 0.5 * dt * k1s[j]; }
            lattice_.rhs(tp, ts, k2p, k2s);
            for (std::size_t j = 0; j < n; ++j) { tp[j] = s.p[j] + 0.5 * dt * k2p[j]; ts[j] = s.S[j] + 0.5 * dt * k2s[j]; }
            lattice_.rhs(tp, ts, k3p, k3s);
            for (std::size_t j = 0; j < n; ++j) { tp[j] = s.p[j] + dt * k3p[j]; ts[j] = s.S[j] + dt * k3s[j]; }
            lattice_.rhs(tp, ts, k4p, k4s);
            for (std::size_t j = 0; j < n; ++j) {
                s.p[j] += dt / 6.0 * (k1p[j] + 2.0 * k2p[j] + 2.0 * k3p[j] + k4p[j]);
                s.S[j] += dt / 6.0 * (k1s[j] + 2.0 * k2s[j] + 2.0 * k3s[j] + k4s[j]);
            }
        }
        for (double& v : s.p) v = std::max(v, floor_);
        s.time += dt;
    }

private:
    Lattice lattice_;
    double floor_;
    Integrator integ_;
};

inline FieldState step_hydro(const FieldState& s, const HamiltonianModel& m, double dt,
                             Integrator integ = Integrator::rk4, int order = 8) {
    check_shape(s);
    RunParams run;
    run.dt = dt;
    run.lattice_order = order;
    resolve_run(run, s.grid, m);
    FieldState out = s;
    HydroStepper(s.grid, m, integ, order).step(out, dt);
    for (std::size_t j = 0; j < out.p.size(); ++j)
        if (!std::isfinite(out.p[j]) || !std::isfinite(out.S[j]))
            throw BlowUpError("non-finite field at " + s.grid.describe_point(j) + " after step 1", 1);
    return out;
}

struct Trajectory {
    std::vector<FieldState> snapshots;
    std::vector<ObservableRecord> observables;
    /// Set when the run stopped early; snapshots hold everything up to then.
    std::optional<std::string> failure;
    std::size_t failed_step = 0;
    std::vector<std::string> warnings;
};

namespace detail {

/// True when the floor is active right next to a resolved point, i.e. the
/// density is developing a node rather than just having thin tails.
inline bool floor_inside_support(const FieldState& s, double floor) {
    const GridSpec& g = s.grid;
    double pmax = 0.0;
    for (double v : s.p) pmax = std::max(pmax, v);
    for (std::size_t j = 0; j < s.p.size(); ++j) {
        if (s.p[j] > floor) continue;
        for (std::size_t ax = 0; ax < g.dims(); ++ax)
            for (long d : {-1L, 1L})
                if (s.p[g.neighbour(j, ax, d)] >= 1e-6 * pmax) return true;
    }
    return false;
}

} // namespace detail

inline Trajectory evolve_hydro(const FieldState& initial, const HamiltonianModel& m, RunParams run) {
    check_shape(initial);
    require_positive(initial.p, initial.grid);
    run = resolve_run(run, initial.grid, m);
    const auto [steps, dt] = step_plan(run);
    const HydroStepper stepper(initial.grid, m, run.integrator, run.lattice_order);
    const Scheme scheme = Scheme::Lattice(run.lattice_order);

    Trajectory tr;
    FieldState s = initial;
    for (double& v : s.p) v = std::max(v, m.density_floor);
    const double norm0 = integrate(s.p, s.grid);
    bool flagged = false;
    auto record = [&] {
        tr.snapshots.push_back(s);
        tr.observables.push_back(observables(s, m, scheme));
        if (!flagged && detail::floor_inside_support(s, m.density_floor)) {
            flagged = true;
            tr.warnings.push_back("density reached the floor inside the support at t=" + std::to_string(s.time));
        }
    };
    record();
    for (std::size_t step = 1; step <= steps; ++step) {
        stepper.step(s, dt);
        if (step == steps) s.time = initial.time + run.t_final;
        for (std::size_t j = 0; j < s.p.size(); ++j)
            if (!std::isfinite(s.p[j]) || !std::isfinite(s.S[j])) {
                tr.failure = "non-finite field at " + s.grid.describe_point(j) + " in step " + std::to_string(step);
                tr.failed_step = step;
                return tr;
            }
        const double drift = std::abs(integrate(s.p, s.grid) / norm0 - 1.0);
        if (drift > 1e-3) {
            tr.failure = "norm drifted by " + std::to_string(drift) + " in step " + std::to_string(step);
            tr.failed_step = step;
            return tr;
        }
        if (step % run.snapshot_stride == 0 || step == steps) record();
    }
    return tr;
}

/// Strang split-step Fourier solver of i hbar dpsi/dt = [-(hbar^2/2) g d^2 + V] psi.
/// Needs the quantum point A = 1/2, B = hbar^2/8.
class ReferenceStepper {
public:
    ReferenceStepper(const GridSpec& g, const HamiltonianModel& m, double dt) : grid_(g), fft_(g), dt_(dt) {
        m.validate(g);
        if (!m.constants.is_quantum_point())
            throw UnsupportedConfiguration("the reference solver needs A = 1/2 and B = hbar^2/8");
        const double hb = m.constants.hbar;
        std::vector<std::vector<double>> k;
        for (std::size_t ax = 0; ax < g.dims(); ++ax) k.push_back(wavenumbers(g, ax));
        half_kinetic_.resize(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) {
            double k2 = 0.0;
            for (std::size_t ax = 0; ax < g.dims(); ++ax) {
                const double kk = k[ax][g.axis_index(j, ax)];
                k2 += m.metric.inverse_mass(ax) * kk * kk;
            }
            half_kinetic_[j] = std::polar(1.0, -hb * k2 * dt / 4.0);
        }
        const RealField V = evaluate(m.potential, g);
        potential_.resize(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) potential_[j] = std::polar(1.0, -V[j] * dt / hb);
    }

    void step(Wavefunction& w) {
        fft_.forward(w.psi);
        for (std::size_t j = 0; j < w.psi.size(); ++j) w.psi[j] *= half_kinetic_[j];
        fft_.backward(w.psi);
        for (std::size_t j = 0; j < w.psi.size(); ++j) w.psi[j] *= potential_[j];
        fft_.forward(w.psi);
        for (std::size_t j = 0; j < w.psi.size(); ++j) w.psi[j] *= half_kinetic_[j];
        fft_.backward(w.psi);
        w.time += dt_;
    }

private:
    GridSpec grid_;
    FFT fft_;
    double dt_;
    ComplexField half_kinetic_, potential_;
};

inline Wavefunction step_reference(const Wavefunction& w, const HamiltonianModel& m, double dt) {
    if (w.psi.size() != w.grid.size()) throw GridMismatch("wavefunction size does not match the grid");
    Wavefunction out = w;
    ReferenceStepper(w.grid, m, dt).step(out);
    return out;
}

struct ReferenceTrajectory {
    std::vector<Wavefunction> snapshots;
};

/// Uses the same step plan as evolve_hydro so snapshot times line up.
inline ReferenceTrajectory evolve_reference(const Wavefunction& initial, const HamiltonianModel& m, RunParams run) {
    if (initial.psi.size() != initial.grid.size()) throw GridMismatch("wavefunction size does not match the grid");
    run = resolve_run(run, initial.grid, m);
    const auto [steps, dt] = step_plan(run);
    ReferenceStepper stepper(initial.grid, m, dt);
    ReferenceTrajectory tr;
    Wavefunction w = initial;
    tr.snapshots.push_back(w);
    for (std::size_t step = 1; step <= steps; ++step) {
        stepper.step(w);
        if (step == steps) w.time = initial.time + run.t_final;
        if (step % run.snapshot_stride == 0 || step == steps) tr.snapshots.push_back(w);
    }
    return tr;
}

} // namespace ens
