#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "ensemble/errors.hpp"
#include "ensemble/grid.hpp"

namespace ens {

using Complex = std::complex<double>;
using ComplexField = std::vector<Complex>;

inline constexpr double kDefaultDensityFloor = 1e-12;

/// The (hbar, A, B) triple. A = 1/2, B = hbar^2/8 is the quantum point.
struct Constants {
    double hbar = 1.0;
    double A = 0.5;
    double B = 0.125;

    Constants() = default;
    Constants(double h, double a, double b) : hbar(h), A(a), B(b) { validate(); }

    static Constants quantum(double hbar = 1.0) { return {hbar, 0.5, hbar * hbar / 8.0}; }
    static Constants classical(double hbar = 1.0) { return {hbar, 0.5, 0.0}; }

    void validate() const {
        if (!(hbar > 0.0) || !std::isfinite(hbar)) throw ConfigError("hbar must be positive");
        if (!(A >= 0.0) || !std::isfinite(A)) throw ConfigError("A must be non-negative");
        if (!(B >= 0.0) || !std::isfinite(B)) throw ConfigError("B must be non-negative");
    }
    bool is_quantum_point(double rel = 1e-12) const {
        const double bq = hbar * hbar / 8.0;
        return std::abs(A - 0.5) <= rel && std::abs(B - bq) <= rel * bq;
    }
};

/// Diagonal configuration-space metric g_kk = 1/m of the particle owning axis k.
struct Metric {
    std::vector<double> masses{1.0};
    std::size_t dims_per_particle = 1;

    Metric() = default;
    Metric(std::vector<double> m, std::size_t d) : masses(std::move(m)), dims_per_particle(d) { validate(); }

    void validate() const {
        if (masses.empty()) throw ConfigError("metric needs at least one particle");
        if (dims_per_particle == 0) throw ConfigError("dims_per_particle must be >= 1");
        for (double m : masses)
            if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("particle masses must be positive");
    }
    std::size_t dims() const { return masses.size() * dims_per_particle; }
    double mass(std::size_t axis) const { return masses.at(axis / dims_per_particle); }
    double inverse_mass(std::size_t axis) const { return 1.0 / mass(axis); }
    double min_mass() const {
        double m = masses[0];
        for (double x : masses) m = std::min(m, x);
        return m;
    }
    void check(const GridSpec& g) const {
        if (dims() != g.dims())
            throw ConfigError("metric covers " + std::to_string(dims()) + " dimensions but grid has " +
                              std::to_string(g.dims()));
    }
};

struct FieldState {
    GridSpec grid;
    RealField p;
    RealField S;
    double time = 0.0;
};

struct Wavefunction {
    GridSpec grid;
    ComplexField psi;
    double time = 0.0;
};

/// Throws unless p is finite and strictly positive. Values under the floor
/// are allowed; operators clamp them.
inline void require_positive(const RealField& p, const GridSpec& g) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!std::isfinite(p[i])) throw InvalidDensity("non-finite density at " + g.describe_point(i));
        if (p[i] <= 0.0) throw NodeError("density node at " + g.describe_point(i), i);
    }
}

inline void check_shape(const FieldState& s) {
    s.grid.validate();
    if (s.p.size() != s.grid.size() || s.S.size() != s.grid.size())
        throw GridMismatch("field sizes do not match the grid");
}

inline RealField normalize(const RealField& p, const GridSpec& g) {
    if (p.size() != g.size()) throw GridMismatch("field size does not match the grid");
    for (std::size_t i = 0; i < p.size(); ++i)
        if (!(p[i] >= 0.0) || !std::isfinite(p[i]))
            throw InvalidDensity("negative or non-finite density at " + g.describe_point(i));
    const double total = integrate(p, g);
    if (!(total > 0.0)) throw InvalidDensity("density integrates to zero");
    RealField out(p);
    for (double& v : out) v /= total;
    return out;
}

inline Wavefunction to_wavefunction(const FieldState& s, const Constants& c) {
    Wavefunction w{s.grid, ComplexField(s.p.size()), s.time};
    for (std::size_t i = 0; i < s.p.size(); ++i)
        w.psi[i] = std::polar(std::sqrt(std::max(s.p[i], 0.0)), s.S[i] / c.hbar);
    return w;
}

struct ImportedState {
    FieldState state;
    std::vector<std::string> warnings;
};

namespace detail {

inline double wrap_pi(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::remainder(a, two_pi);
    return a;
}

} // namespace detail

/// Adjacent principal-phase steps above this are reported: a step this close
/// to pi cannot be distinguished from a jump past pi.
inline constexpr double kUnwrapAmbiguity = 0.9 * std::numbers::pi;

/// Inverse Madelung map. The phase is unwrapped along the axes in
/// `axis_order` (default 0, 1, 2): first the line through the origin along
/// the first axis, then lines along the next axis starting from points
/// already fixed, and so on.
inline ImportedState from_wavefunction(const Wavefunction& w, const Constants& c,
                                       double density_floor = kDefaultDensityFloor,
                                       std::vector<std::size_t> axis_order = {}) {
    const GridSpec& g = w.grid;
    g.validate();
    if (w.psi.size() != g.size()) throw GridMismatch("wavefunction size does not match the grid");
    if (axis_order.empty())
        for (std::size_t k = 0; k < g.dims(); ++k) axis_order.push_back(k);
    if (axis_order.size() != g.dims()) throw ConfigError("axis order must list every axis once");

    ImportedState out;
    out.state.grid = g;
    out.state.time = w.time;
    out.state.p.resize(g.size());
    out.state.S.assign(g.size(), 0.0);
    RealField phase(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double rho = std::norm(w.psi[i]);
        if (!(rho > density_floor))
            throw NodeError("wavefunction node (|psi|^2 <= floor) at " + g.describe_point(i), i);
        out.state.p[i] = rho;
        phase[i] = std::arg(w.psi[i]);
    }

    RealField& S = out.state.S;
    std::vector<char> fixed(g.size(), 0);
    fixed[0] = 1;
    S[0] = phase[0];
    for (std::size_t stage = 0; stage < axis_order.size(); ++stage) {
        const std::size_t ax = axis_order[stage];
        for (std::size_t f = 0; f < g.size(); ++f) {
            if (!fixed[f] || g.axis_index(f, ax) != 0) continue;
            bool later_zero = true;
            for (std::size_t t = stage + 1; t < axis_order.size(); ++t)
                if (g.axis_index(f, axis_order[t]) != 0) later_zero = false;
            if (!later_zero) continue;
            std::size_t prev = f;
            for (std::size_t i = 1; i < g.points[ax]; ++i) {
                const std::size_t cur = g.neighbour(f, ax, static_cast<long>(i));
                const double step = detail::wrap_pi(phase[cur] - phase[prev]);
                if (std::abs(step) > kUnwrapAmbiguity)
                    out.warnings.push_back("phase step near pi between " + g.describe_point(prev) +
                                           " and " + g.describe_point(cur));
                S[cur] = S[prev] + step;
                fixed[cur] = 1;
                prev = cur;
            }
        }
    }
    for (double& v : S) v *= c.hbar;
    return out;
}

/// |<a, b>| with the grid quadrature.
inline double fidelity(const Wavefunction& a, const Wavefunction& b) {
    if (!(a.grid == b.grid)) throw GridMismatch("fidelity needs wavefunctions on one grid");
    Complex s{0.0, 0.0};
    for (std::size_t i = 0; i < a.psi.size(); ++i) s += std::conj(a.psi[i]) * b.psi[i];
    return std::abs(s) * a.grid.cell_volume();
}

inline double norm(const Wavefunction& w) {
    double s = 0.0;
    for (const auto& z : w.psi) s += std::norm(z);
    return s * w.grid.cell_volume();
}

} // namespace ens
