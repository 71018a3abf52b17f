#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ensemble/field_state.hpp"
#include "ensemble/hamiltonian.hpp"

namespace ens {

struct ObservableRecord {
    double time = 0.0;
    double norm = 0.0;
    double energy = 0.0;
    std::vector<double> mean;
    std::vector<double> variance;
    double max_abs_Q = 0.0;
};

/// Q is only meaningful where the density is resolved; max|Q| is taken over
/// points holding at least this fraction of the peak density.
inline constexpr double kResolvedDensityFraction = 1e-8;

/// Moments use plain Cartesian coordinates, valid while the density at the
/// box boundary is negligible. Energy and Q come from `scheme`, by default
/// the lattice that drives the evolution.
inline ObservableRecord observables(const FieldState& s, const HamiltonianModel& m,
                                    Scheme scheme = Scheme::Lattice()) {
    check_shape(s);
    const GridSpec& g = s.grid;
    ObservableRecord r;
    r.time = s.time;
    r.norm = integrate(s.p, g);
    const double dv = g.cell_volume();
    for (std::size_t ax = 0; ax < g.dims(); ++ax) {
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t j = 0; j < s.p.size(); ++j) {
            const double x = g.coordinate(ax, g.axis_index(j, ax));
            m1 += s.p[j] * x;
        }
        m1 *= dv / r.norm;
        for (std::size_t j = 0; j < s.p.size(); ++j) {
            const double x = g.coordinate(ax, g.axis_index(j, ax)) - m1;
            m2 += s.p[j] * x * x;
        }
        r.mean.push_back(m1);
        r.variance.push_back(m2 * dv / r.norm);
    }
    r.energy = total_hamiltonian(s, m, scheme);
    const RealField q = quantum_potential(s, m, scheme);
    const double pmax = *std::max_element(s.p.begin(), s.p.end());
    for (std::size_t j = 0; j < q.size(); ++j)
        if (s.p[j] >= kResolvedDensityFraction * pmax) r.max_abs_Q = std::max(r.max_abs_Q, std::abs(q[j]));
    return r;
}

struct StateComparison {
    double l2 = 0.0;
    double sup = 0.0;
    double fidelity = 0.0;
};

inline StateComparison compare_states(const FieldState& a, const FieldState& b, const Constants& c) {
    if (!(a.grid == b.grid) || a.p.size() != b.p.size()) throw GridMismatch("compared states live on different grids");
    StateComparison r;
    for (std::size_t j = 0; j < a.p.size(); ++j) {
        const double d = a.p[j] - b.p[j];
        r.l2 += d * d;
        r.sup = std::max(r.sup, std::abs(d));
    }
    r.l2 = std::sqrt(r.l2 * a.grid.cell_volume());
    r.fidelity = fidelity(to_wavefunction(a, c), to_wavefunction(b, c));
    return r;
}

/// Width of a free Gaussian packet: sigma0 sqrt(1 + (hbar t / (2 m sigma0^2))^2).
inline double free_gaussian_width(double t, double sigma0, double m, double hbar) {
    if (!(sigma0 > 0.0)) throw ConfigError("sigma0 must be positive");
    const double r = hbar * t / (2.0 * m * sigma0 * sigma0);
    return sigma0 * std::sqrt(1.0 + r * r);
}

} // namespace ens
