#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ensemble/evolution.hpp"
#include "ensemble/fft.hpp"
#include "ensemble/hamiltonian.hpp"
#include "ensemble/scenarios.hpp"

namespace ens {

struct AxiomReport {
    std::string axiom;
    double deviation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string details;
    /// Controls are deliberately broken variants; they are expected to fail.
    bool control = false;
};

namespace detail {

inline AxiomReport make_report(std::string name, double deviation, double tol, std::string details) {
    AxiomReport r{std::move(name), deviation, tol, false, std::move(details), false};
    r.pass = deviation <= tol;
    return r;
}

/// softplus of a random low-mode Fourier series on every axis, normalized.
/// Smooth, periodic and strictly positive.
inline RealField random_density(const GridSpec& g, std::mt19937_64& rng, int modes = 4, double amplitude = 1.0) {
    std::normal_distribution<double> n(0.0, amplitude);
    RealField f(g.size(), 0.0);
    for (std::size_t ax = 0; ax < g.dims(); ++ax)
        for (int m = 1; m <= modes; ++m) {
            const double a = n(rng), b = n(rng);
            const double w = 2.0 * std::numbers::pi * m / g.length(ax);
            for (std::size_t j = 0; j < f.size(); ++j) {
                const double x = g.coordinate(ax, g.axis_index(j, ax));
                f[j] += (a * std::cos(w * x) + b * std::sin(w * x)) / m;
            }
        }
    for (double& v : f) v = std::log1p(std::exp(v));
    return normalize(f, g);
}

inline RealField random_phase(const GridSpec& g, std::mt19937_64& rng, int modes = 4, double amplitude = 1.0) {
    std::normal_distribution<double> n(0.0, amplitude);
    RealField f(g.size(), 0.0);
    for (std::size_t ax = 0; ax < g.dims(); ++ax)
        for (int m = 1; m <= modes; ++m) {
            const double a = n(rng), b = n(rng);
            const double w = 2.0 * std::numbers::pi * m / g.length(ax);
            for (std::size_t j = 0; j < f.size(); ++j) {
                const double x = g.coordinate(ax, g.axis_index(j, ax));
                f[j] += (a * std::cos(w * x) + b * std::sin(w * x)) / m;
            }
        }
    return f;
}

inline double l2(const RealField& a, const RealField& b, const GridSpec& g) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(s * g.cell_volume());
}

inline double l2(const ComplexField& a, const ComplexField& b, const GridSpec& g) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += std::norm(a[j] - b[j]);
    return std::sqrt(s * g.cell_volume());
}

} // namespace detail

/// Random smooth nodeless state on a periodic grid.
inline FieldState random_state(const GridSpec& g, std::mt19937_64& rng, bool with_phase = true) {
    FieldState s{g, detail::random_density(g, rng), RealField(g.size(), 0.0), 0.0};
    if (with_phase) s.S = detail::random_phase(g, rng);
    return s;
}

/// p proportional to exp(a cos(2 pi (x - lower) / L)) on every axis: a
/// Gaussian-like bump that is smooth across the periodic seam.
inline FieldState periodic_gaussian(const GridSpec& g, double a) {
    FieldState s{g, RealField(g.size(), 0.0), RealField(g.size(), 0.0), 0.0};
    for (std::size_t ax = 0; ax < g.dims(); ++ax)
        for (std::size_t j = 0; j < s.p.size(); ++j)
            s.p[j] += a * std::cos(2.0 * std::numbers::pi * static_cast<double>(g.axis_index(j, ax)) /
                                   static_cast<double>(g.points[ax]));
    for (double& v : s.p) v = std::exp(v);
    s.p = normalize(s.p, g);
    return s;
}

inline AxiomReport check_scale_invariance(const FieldState& s, const HamiltonianModel& m,
                                          const std::vector<double>& lambdas,
                                          InformationForm form = InformationForm::log_gradient,
                                          Scheme scheme = Scheme::Spectral()) {
    const RealField h = hamiltonian_density(s, m, scheme, form);
    double dev = 0.0;
    for (double lam : lambdas) {
        FieldState t = s;
        for (double& v : t.p) v *= lam;
        const RealField hl = hamiltonian_density(t, m, scheme, form);
        for (std::size_t j = 0; j < h.size(); ++j) dev = std::max(dev, std::abs(hl[j] - h[j]) / (1.0 + std::abs(h[j])));
    }
    return detail::make_report("scale-invariance", dev, 1e-12,
                               "max |h(lp)-h(p)|/(1+|h|) over " + std::to_string(lambdas.size()) + " factors");
}

inline AxiomReport check_positivity(const HamiltonianModel& m, const GridSpec& g, std::size_t trials,
                                    std::uint64_t seed, InformationForm form = InformationForm::log_gradient) {
    m.validate(g);
    std::mt19937_64 rng(seed);
    const double vmin = potential_minimum(evaluate(m.potential, g));
    double hmin = std::numeric_limits<double>::infinity();
    // Every other trial has S = 0 so the information term is probed on its own.
    for (std::size_t t = 0; t < trials; ++t)
        hmin = std::min(hmin, total_hamiltonian(random_state(g, rng, t % 2 == 1), m, Scheme::Spectral(), form));
    // Random states are normalized, so H >= min V when V dips below zero.
    const double bound = std::min(0.0, vmin);
    std::string details = "min H " + std::to_string(hmin) + " over " + std::to_string(trials) + " random states";
    if (vmin < 0.0) details += "; bound lowered to min V = " + std::to_string(vmin);
    return detail::make_report("positivity", std::max(0.0, bound - hmin), 1e-12, details);
}

inline AxiomReport check_uniform_minimum(const HamiltonianModel& m, const GridSpec& g, RealField S_fixed,
                                         std::size_t trials, std::uint64_t seed,
                                         InformationForm form = InformationForm::log_gradient) {
    m.validate(g);
    if (!is_free(m.potential)) throw UnsupportedConfiguration("the uniform-minimum check needs V = 0");
    if (S_fixed.empty()) S_fixed.assign(g.size(), 0.0);
    if (S_fixed.size() != g.size()) throw GridMismatch("S_fixed does not match the grid");
    std::mt19937_64 rng(seed);
    const FieldState uniform{g, RealField(g.size(), 1.0 / g.volume()), S_fixed, 0.0};
    const double hu = total_hamiltonian(uniform, m, Scheme::Spectral(), form);
    double hmin = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
        const FieldState s{g, detail::random_density(g, rng), S_fixed, 0.0};
        hmin = std::min(hmin, total_hamiltonian(s, m, Scheme::Spectral(), form));
    }
    return detail::make_report("uniform-minimum", hu - hmin, 1e-12,
                               "H(uniform) " + std::to_string(hu) + ", min over " + std::to_string(trials) +
                                   " random densities " + std::to_string(hmin));
}

/// Evolves the product of two 1D scenarios in 2D and each factor in 1D, and
/// compares p_2D with p_a p_b at every snapshot. S_2D - S_a - S_b must also be
/// constant (mod 2 pi hbar) where the density is resolved. `coupling` adds
/// c x y to the 2D potential, which breaks separability on purpose.
inline AxiomReport check_separability(const Scenario& a, const Scenario& b, RunParams run, double coupling = 0.0) {
    const Scenario ab = tensor_scenario(a, b);
    if (!(a.constants.hbar == b.constants.hbar)) throw ConfigError("incompatible constants");
    HamiltonianModel m2 = ab.model();
    if (coupling != 0.0) {
        RealField v = evaluate(m2.potential, ab.grid);
        for (std::size_t j = 0; j < v.size(); ++j)
            v[j] += coupling * ab.grid.coordinate(0, ab.grid.axis_index(j, 0)) * ab.grid.coordinate(1, ab.grid.axis_index(j, 1));
        m2.potential = SampledPotential{ab.grid, v};
    }
    const HamiltonianModel ma = a.model(), mb = b.model();
    // One dt for all three runs so the snapshots line up.
    run = resolve_run(run, ab.grid, m2);
    const Trajectory t2 = evolve_hydro(ab.initial_state(), m2, run);
    const Trajectory ta = evolve_hydro(a.initial_state(), ma, run);
    const Trajectory tb = evolve_hydro(b.initial_state(), mb, run);
    const std::string name = "separability";
    if (t2.failure || ta.failure || tb.failure)
        return detail::make_report(name, std::numeric_limits<double>::infinity(), 1e-6, "a run blew up");

    const GridSpec& g = ab.grid;
    const double two_pi_hbar = 2.0 * std::numbers::pi * a.constants.hbar;
    double dev_p = 0.0, dev_S = 0.0;
    for (std::size_t k = 0; k < t2.snapshots.size(); ++k) {
        const auto& s2 = t2.snapshots[k];
        const auto& sa = ta.snapshots[k];
        const auto& sb = tb.snapshots[k];
        RealField prod(g.size()), sum(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) {
            const std::size_t i0 = g.axis_index(j, 0), i1 = g.axis_index(j, 1);
            prod[j] = sa.p[i0] * sb.p[i1];
            sum[j] = sa.S[i0] + sb.S[i1];
        }
        dev_p = std::max(dev_p, detail::l2(s2.p, prod, g));
        const auto peak = static_cast<std::size_t>(std::max_element(s2.p.begin(), s2.p.end()) - s2.p.begin());
        const double ref = s2.S[peak] - sum[peak];
        for (std::size_t j = 0; j < g.size(); ++j)
            if (s2.p[j] >= 1e-6 * s2.p[peak])
                dev_S = std::max(dev_S, std::abs(std::remainder(s2.S[j] - sum[j] - ref, two_pi_hbar)));
    }
    return detail::make_report(name, std::max(dev_p, dev_S), 1e-6,
                               "max L2(p_2D - p_a p_b) " + std::to_string(dev_p) + ", max spread of S_2D - S_a - S_b " +
                                   std::to_string(dev_S) + " over " + std::to_string(t2.snapshots.size()) + " snapshots");
}

enum class BoostTransform {
    galilean,         // p(x - vt), S(x - vt) + m v x - m v^2 t / 2
    translation_only, // p(x - vt), S(x - vt): not a symmetry, used as a control
};

namespace detail {

/// Applies the boost at time t to psi = sqrt(p) e^{iS/hbar}. The shift by v t
/// is a Fourier phase, so it is exact for band-limited periodic psi.
inline Wavefunction boost(const Wavefunction& w, double mass, double hbar, double v, double t, BoostTransform tf) {
    const GridSpec& g = w.grid;
    Wavefunction out = w;
    FFT fft(g);
    const auto k = wavenumbers(g, 0);
    const double shift = v * t;
    fft.forward(out.psi);
    for (std::size_t j = 0; j < out.psi.size(); ++j) {
        const std::size_t n = g.points[0];
        // The Nyquist mode is treated as cos so the shifted field stays real-symmetric.
        out.psi[j] *= (j == n / 2) ? Complex(std::cos(k[j] * shift), 0.0) : std::polar(1.0, -k[j] * shift);
    }
    fft.backward(out.psi);
    if (tf == BoostTransform::galilean)
        for (std::size_t j = 0; j < out.psi.size(); ++j) {
            const double x = g.coordinate(0, j);
            out.psi[j] *= std::polar(1.0, (mass * v * x - 0.5 * mass * v * v * t) / hbar);
        }
    return out;
}

} // namespace detail

/// Compares (i) evolve then boost with (ii) boost then evolve, for a free 1D
/// scenario. The deviation is the larger of L2(p_i - p_ii) and
/// L2(psi_i - psi_ii); the latter is the density-weighted phase mismatch.
inline AxiomReport check_galilean_boost(const Scenario& sc, double v, RunParams run,
                                        BoostTransform tf = BoostTransform::galilean) {
    if (sc.grid.dims() != 1) throw ConfigError("the boost check needs a one-dimensional scenario");
    if (!is_free(sc.potential)) throw UnsupportedConfiguration("the boost check needs V = 0");
    const HamiltonianModel m = sc.model();
    run = resolve_run(run, sc.grid, m);
    const double mass = sc.metric.mass(0), hbar = sc.constants.hbar;
    const FieldState s0 = sc.initial_state();

    const Trajectory ti = evolve_hydro(s0, m, run);
    const Wavefunction w0b = detail::boost(to_wavefunction(s0, sc.constants), mass, hbar, v, 0.0, tf);
    FieldState s0b = s0;
    for (std::size_t j = 0; j < s0b.p.size(); ++j) {
        s0b.p[j] = std::max(std::norm(w0b.psi[j]), m.density_floor);
        if (tf == BoostTransform::galilean) s0b.S[j] += mass * v * sc.grid.coordinate(0, j);
    }
    const Trajectory tii = evolve_hydro(s0b, m, run);
    if (ti.failure || tii.failure)
        return detail::make_report("galilean-boost", std::numeric_limits<double>::infinity(), 1e-4, "a run blew up");

    const FieldState& fi = ti.snapshots.back();
    const FieldState& fii = tii.snapshots.back();
    const Wavefunction wi = detail::boost(to_wavefunction(fi, sc.constants), mass, hbar, v, fi.time - s0.time, tf);
    const Wavefunction wii = to_wavefunction(fii, sc.constants);
    RealField pi(wi.psi.size());
    for (std::size_t j = 0; j < pi.size(); ++j) pi[j] = std::norm(wi.psi[j]);
    const double dp = detail::l2(pi, fii.p, sc.grid);
    const double dpsi = detail::l2(wi.psi, wii.psi, sc.grid);
    return detail::make_report("galilean-boost", std::max(dp, dpsi), 1e-4,
                               "v " + std::to_string(v) + ", L2 p " + std::to_string(dp) + ", L2 psi " +
                                   std::to_string(dpsi));
}

/// The default suite on the shipped scenarios, followed by the broken-variant
/// controls. Physical checks must pass and controls must fail.
inline std::vector<AxiomReport> run_axiom_suite(std::uint64_t seed) {
    std::vector<AxiomReport> out;
    const HamiltonianModel quantum{Constants::quantum(), Metric(), FreePotential{}, kDefaultDensityFloor};
    const GridSpec ring = GridSpec::line(128, 0.0, 2.0 * std::numbers::pi);
    const FieldState gauss = periodic_gaussian(ring, 2.0);
    const std::vector<double> lambdas{0.1, 3.0, 100.0};

    out.push_back(check_scale_invariance(gauss, quantum, lambdas));
    out.push_back(check_positivity(quantum, ring, 50, seed));
    RunParams sep_run;
    sep_run.t_final = 1.0;
    sep_run.snapshot_stride = 20;
    out.push_back(check_separability(particle_scenario(1.0), particle_scenario(2.0), sep_run));
    out.back().axiom = "separability-quantum";
    out.push_back(check_separability(particle_scenario(1.0, Constants::classical()),
                                     particle_scenario(2.0, Constants::classical()), sep_run));
    out.back().axiom = "separability-classical";

    RunParams boost_run;
    boost_run.t_final = 1.0;
    boost_run.snapshot_stride = 1000;
    Scenario bq = find_scenario("free-quantum-gaussian");
    Scenario bc = find_scenario("free-classical-gaussian");
    const double v = commensurate_velocity(bq.grid, 1.0, 1.0, 6);
    out.push_back(check_galilean_boost(bq, v, boost_run));
    out.back().axiom = "galilean-boost-quantum";
    out.push_back(check_galilean_boost(bc, v, boost_run));
    out.back().axiom = "galilean-boost-classical";
    out.push_back(check_uniform_minimum(quantum, ring, {}, 100, seed));

    auto control = [&](AxiomReport r, const std::string& name) {
        r.axiom = name;
        r.control = true;
        out.push_back(std::move(r));
    };
    control(check_scale_invariance(gauss, quantum, lambdas, InformationForm::raw_gradient),
            "control:scale-invariance(raw-gradient B term)");
    control(check_positivity(quantum, ring, 50, seed, InformationForm::negated), "control:positivity(negated B term)");
    RunParams short_run = sep_run;
    short_run.t_final = 0.5;
    control(check_separability(particle_scenario(1.0), particle_scenario(2.0), short_run, 0.05),
            "control:separability(x*y coupling)");
    control(check_galilean_boost(bq, v, boost_run, BoostTransform::translation_only),
            "control:galilean-boost(translation only)");
    control(check_uniform_minimum(quantum, ring, {}, 100, seed, InformationForm::negated),
            "control:uniform-minimum(negated B term)");
    return out;
}

/// Suite verdict: every physical check passes and every control fails.
inline bool suite_ok(const std::vector<AxiomReport>& reports) {
    for (const auto& r : reports)
        if (r.pass == r.control) return false;
    return true;
}

} // namespace ens
