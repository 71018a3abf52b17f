#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "ensemble/evolution.hpp"
#include "ensemble/model.hpp"

namespace ens {

/// Floor used by the shipped scenarios. Clamped tails act as a weak
/// background wave of amplitude sqrt(floor); its interference with the packet
/// sets the accuracy of the hydrodynamic run, so the presets keep it far below
/// the generic default.
inline constexpr double kScenarioDensityFloor = 1e-24;

/// Normalized Gaussian with S = sum_k m_(k) k_k x_k, so g dS = k.
inline FieldState gaussian_packet(const GridSpec& g, const Metric& metric, const Constants& c,
                                  const std::vector<double>& mu, const std::vector<double>& sigma,
                                  const std::vector<double>& k) {
    (void)c;
    g.validate();
    metric.check(g);
    const std::size_t d = g.dims();
    if (mu.size() != d || sigma.size() != d || k.size() != d)
        throw ConfigError("gaussian packet needs mu, sigma and k for every dimension");
    for (double s : sigma)
        if (!(s > 0.0)) throw ConfigError("gaussian width must be positive");
    FieldState s{g, RealField(g.size()), RealField(g.size(), 0.0), 0.0};
    for (std::size_t j = 0; j < g.size(); ++j) {
        double e = 0.0, phase = 0.0;
        for (std::size_t ax = 0; ax < d; ++ax) {
            const double x = g.coordinate(ax, g.axis_index(j, ax));
            const double u = (x - mu[ax]) / sigma[ax];
            e += 0.5 * u * u;
            phase += metric.mass(ax) * k[ax] * x;
        }
        s.p[j] = std::exp(-e);
        s.S[j] = phase;
    }
    s.p = normalize(s.p, g);
    double edge = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
        for (std::size_t ax = 0; ax < d; ++ax) {
            const std::size_t i = g.axis_index(j, ax);
            if (i == 0 || i + 1 == g.points[ax]) edge = std::max(edge, s.p[j]);
        }
    if (edge >= 1e-12)
        throw ConfigError("box too small for the requested width: boundary density " + std::to_string(edge));
    return s;
}

/// Harmonic-oscillator coherent state: width sigma^2 = hbar/(2 m omega) on
/// every axis, centred at `displacement` along axis 0, S = 0.
inline FieldState coherent_state(const GridSpec& g, const Metric& metric, const Constants& c, double omega,
                                 double displacement) {
    if (!(omega > 0.0)) throw ConfigError("omega must be positive");
    metric.check(g);
    std::vector<double> mu(g.dims(), 0.0), sigma, k(g.dims(), 0.0);
    mu[0] = displacement;
    for (std::size_t ax = 0; ax < g.dims(); ++ax) sigma.push_back(std::sqrt(c.hbar / (2.0 * metric.mass(ax) * omega)));
    return gaussian_packet(g, metric, c, mu, sigma, k);
}

struct InitialCondition {
    enum Kind { gaussian, coherent, sampled } kind = gaussian;
    std::vector<double> mu{0.0};
    std::vector<double> sigma{1.0};
    std::vector<double> k{0.0};
    double omega = 1.0;
    double displacement = 0.0;
    FieldState state; // used by `sampled`
};

struct Scenario {
    std::string name;
    std::string description;
    GridSpec grid;
    Metric metric;
    Constants constants;
    Potential potential = FreePotential{};
    double density_floor = kScenarioDensityFloor;
    InitialCondition initial;
    RunParams run;

    HamiltonianModel model() const { return {constants, metric, potential, density_floor}; }

    FieldState initial_state() const {
        if (initial.kind == InitialCondition::coherent)
            return coherent_state(grid, metric, constants, initial.omega, initial.displacement);
        if (initial.kind == InitialCondition::sampled) return initial.state;
        return gaussian_packet(grid, metric, constants, initial.mu, initial.sigma, initial.k);
    }
};

namespace detail {

inline Scenario free_gaussian(const std::string& name, const Constants& c) {
    Scenario s;
    s.name = name;
    s.grid = GridSpec::line(512, -20.0, 20.0);
    s.constants = c;
    s.run.t_final = 2.0;
    return s;
}

inline Scenario harmonic(const std::string& name, double displacement) {
    Scenario s;
    s.name = name;
    s.grid = GridSpec::line(256, -10.0, 10.0);
    s.potential = HarmonicPotential{{1.0}};
    s.initial.kind = InitialCondition::coherent;
    s.initial.omega = 1.0;
    s.initial.displacement = displacement;
    s.run.t_final = 2.0 * std::numbers::pi;
    return s;
}

} // namespace detail

/// One free particle on [-10, 10] with 128 points; the separable preset is the
/// tensor product of two of these with masses 1 and 2.
inline Scenario particle_scenario(double mass, const Constants& c = Constants::quantum()) {
    Scenario s;
    s.name = "particle-m" + std::to_string(mass);
    s.grid = GridSpec::line(128, -10.0, 10.0);
    s.metric = Metric({mass}, 1);
    s.constants = c;
    s.run.t_final = 1.0;
    return s;
}

/// Product of two 1D scenarios: p = p_a p_b, S = S_a + S_b, V = V_a + V_b.
inline Scenario tensor_scenario(const Scenario& a, const Scenario& b) {
    if (a.grid.dims() != 1 || b.grid.dims() != 1 || a.metric.masses.size() != 1 || b.metric.masses.size() != 1)
        throw ConfigError("tensor products need two one-dimensional single-particle scenarios");
    if (a.constants.hbar != b.constants.hbar || a.constants.A != b.constants.A || a.constants.B != b.constants.B)
        throw ConfigError("tensor products need matching constants");
    Scenario s;
    s.name = a.name + "*" + b.name;
    s.grid = GridSpec({a.grid.points[0], b.grid.points[0]}, {a.grid.lower[0], b.grid.lower[0]},
                      {a.grid.upper[0], b.grid.upper[0]});
    s.metric = Metric({a.metric.masses[0], b.metric.masses[0]}, 1);
    s.constants = a.constants;
    s.density_floor = std::min(a.density_floor, b.density_floor);
    if (is_free(a.potential) && is_free(b.potential)) {
        s.potential = FreePotential{};
    } else {
        const RealField va = evaluate(a.potential, a.grid), vb = evaluate(b.potential, b.grid);
        RealField v(s.grid.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = va[s.grid.axis_index(j, 0)] + vb[s.grid.axis_index(j, 1)];
        s.potential = SampledPotential{s.grid, v};
    }
    const FieldState sa = a.initial_state(), sb = b.initial_state();
    FieldState st{s.grid, RealField(s.grid.size()), RealField(s.grid.size()), 0.0};
    for (std::size_t j = 0; j < st.p.size(); ++j) {
        const std::size_t i0 = s.grid.axis_index(j, 0), i1 = s.grid.axis_index(j, 1);
        st.p[j] = sa.p[i0] * sb.p[i1];
        st.S[j] = sa.S[i0] + sb.S[i1];
    }
    s.initial.kind = InitialCondition::sampled;
    s.initial.state = st;
    s.run = a.run;
    return s;
}

/// Box-commensurate boost: e^{i m v x / hbar} is periodic on a box of length L
/// when m v L / hbar is a multiple of 2 pi.
inline double commensurate_velocity(const GridSpec& g, double mass, double hbar, int cycles) {
    return 2.0 * std::numbers::pi * hbar * cycles / (mass * g.length(0));
}

inline std::vector<Scenario> preset_scenarios() {
    std::vector<Scenario> out;

    auto fq = detail::free_gaussian("free-quantum-gaussian", Constants::quantum());
    fq.description = "free Gaussian, sigma 1, B = hbar^2/8; spreads as sigma(t)";
    out.push_back(fq);

    auto fc = detail::free_gaussian("free-classical-gaussian", Constants::classical());
    fc.description = "free Gaussian at rest with B = 0; the density stays put";
    out.push_back(fc);

    auto hg = detail::harmonic("harmonic-ground", 0.0);
    hg.description = "harmonic trap ground state, stationary";
    out.push_back(hg);

    auto hc = detail::harmonic("harmonic-coherent", 1.0);
    hc.description = "harmonic trap coherent state displaced by 1; <x> = cos t";
    out.push_back(hc);

    auto sep = tensor_scenario(particle_scenario(1.0), particle_scenario(2.0));
    sep.name = "two-particle-separable";
    sep.initial = InitialCondition{InitialCondition::gaussian, {0.0, 0.0}, {1.0, 1.0}, {0.0, 0.0}, 1.0, 0.0, {}};
    sep.description = "two free particles of mass 1 and 2 in a product state";
    out.push_back(sep);

    auto bg = detail::free_gaussian("boosted-gaussian", Constants::quantum());
    bg.initial.k = {commensurate_velocity(bg.grid, 1.0, 1.0, 6)};
    bg.description = "free Gaussian moving with a box-commensurate velocity";
    out.push_back(bg);

    return out;
}

inline Scenario find_scenario(const std::string& name) {
    for (auto& s : preset_scenarios())
        if (s.name == name) return s;
    throw ConfigError("unknown scenario '" + name + "'");
}

} // namespace ens
