#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ensemble/derivatives.hpp"
#include "ensemble/lattice.hpp"
#include "ensemble/model.hpp"

namespace ens {

namespace detail {

/// First and second derivatives of p and S along every axis.
struct Gradients {
    std::vector<RealField> Sx, px, pxx;
    RealField pc; // p clamped to the floor
};

inline Backend backend_of(const Scheme& s) {
    return s.kind == Scheme::finite_difference ? Backend::finite_difference : Backend::spectral;
}

inline Gradients gradients(const FieldState& s, const HamiltonianModel& m, const Derivatives& D,
                           bool need_second = true) {
    Gradients g;
    g.pc = s.p;
    for (double& v : g.pc) v = std::max(v, m.density_floor);
    for (std::size_t ax = 0; ax < s.grid.dims(); ++ax) {
        g.Sx.push_back(D.phase_first(s.S, ax, m.constants.hbar, s.p, m.density_floor));
        g.px.push_back(D.first(s.p, ax));
        if (need_second) g.pxx.push_back(D.second(s.p, ax));
    }
    return g;
}

inline void prepare(const FieldState& s, const HamiltonianModel& m) {
    check_shape(s);
    m.validate(s.grid);
    require_positive(s.p, s.grid);
}

} // namespace detail

/// h = sum_i g_ii (A (d_i S)^2 + B (d_i ln p)^2), with d ln p taken as d p / p.
/// S is differentiated as a phase (see Derivatives::phase_first), so a linear
/// or quadratic S on a box where p vanishes at the edges is fine.
inline RealField hamiltonian_density(const FieldState& s, const HamiltonianModel& m,
                                     Scheme scheme = Scheme::Spectral(),
                                     InformationForm form = InformationForm::log_gradient) {
    detail::prepare(s, m);
    if (scheme.kind == Scheme::lattice) {
        if (form != InformationForm::log_gradient)
            throw UnsupportedConfiguration("the lattice scheme only carries the physical information term");
        return Lattice(s.grid, m, scheme.order).density(s.p, s.S);
    }
    const Derivatives D(s.grid, detail::backend_of(scheme));
    const auto g = detail::gradients(s, m, D, false);
    const auto& c = m.constants;
    RealField h(s.p.size(), 0.0);
    for (std::size_t ax = 0; ax < s.grid.dims(); ++ax) {
        const double gi = m.metric.inverse_mass(ax);
        for (std::size_t j = 0; j < h.size(); ++j) {
            const double sx = g.Sx[ax][j];
            const double lx = g.px[ax][j] / g.pc[j];
            double info = 0.0;
            switch (form) {
            case InformationForm::log_gradient: info = c.B * lx * lx; break;
            case InformationForm::raw_gradient: info = c.B * g.px[ax][j] * g.px[ax][j]; break;
            case InformationForm::negated: info = -c.B * lx * lx; break;
            }
            h[j] += gi * (c.A * sx * sx + info);
        }
    }
    return h;
}

/// H = integral of p (h + V).
inline double total_hamiltonian(const FieldState& s, const HamiltonianModel& m,
                                Scheme scheme = Scheme::Spectral(),
                                InformationForm form = InformationForm::log_gradient) {
    if (scheme.kind == Scheme::lattice) {
        detail::prepare(s, m);
        return Lattice(s.grid, m, scheme.order).energy(s.p, s.S);
    }
    const RealField h = hamiltonian_density(s, m, scheme, form);
    const RealField V = evaluate(m.potential, s.grid);
    double total = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j) total += s.p[j] * (h[j] + V[j]);
    return total * s.grid.cell_volume();
}

/// Q = -(hbar^2/8) sum_i g_ii (2 d_i^2 p / p - (d_i p)^2 / p^2).
inline RealField quantum_potential(const FieldState& s, const HamiltonianModel& m,
                                   Scheme scheme = Scheme::Spectral()) {
    detail::prepare(s, m);
    if (scheme.kind == Scheme::lattice) return Lattice(s.grid, m, scheme.order).quantum_potential(s.p);
    const Derivatives D(s.grid, detail::backend_of(scheme));
    const auto g = detail::gradients(s, m, D);
    const double hb = m.constants.hbar;
    RealField q(s.p.size(), 0.0);
    for (std::size_t ax = 0; ax < s.grid.dims(); ++ax) {
        const double gi = m.metric.inverse_mass(ax);
        for (std::size_t j = 0; j < q.size(); ++j) {
            const double lx = g.px[ax][j] / g.pc[j];
            q[j] -= hb * hb / 8.0 * gi * (2.0 * g.pxx[ax][j] / g.pc[j] - lx * lx);
        }
    }
    return q;
}

/// dH/dS = -2A sum_i d_i (g_ii p d_i S).
inline RealField continuity_rhs(const FieldState& s, const HamiltonianModel& m,
                                Scheme scheme = Scheme::Spectral()) {
    detail::prepare(s, m);
    if (scheme.kind == Scheme::lattice) {
        RealField dp, dS;
        Lattice(s.grid, m, scheme.order).rhs(s.p, s.S, dp, dS);
        return dp;
    }
    const Derivatives D(s.grid, detail::backend_of(scheme));
    RealField out(s.p.size(), 0.0);
    RealField flux(s.p.size());
    for (std::size_t ax = 0; ax < s.grid.dims(); ++ax) {
        const double gi = m.metric.inverse_mass(ax);
        const RealField Sx = D.phase_first(s.S, ax, m.constants.hbar, s.p, m.density_floor);
        for (std::size_t j = 0; j < flux.size(); ++j) flux[j] = gi * s.p[j] * Sx[j];
        const RealField div = D.first(flux, ax);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] -= 2.0 * m.constants.A * div[j];
    }
    return out;
}

/// -dH/dp = -[A g dS dS + V + B g ((d p)^2/p^2 - 2 d^2 p / p)].
inline RealField hjb_rhs(const FieldState& s, const HamiltonianModel& m,
                         Scheme scheme = Scheme::Spectral()) {
    detail::prepare(s, m);
    if (scheme.kind == Scheme::lattice) {
        RealField dp, dS;
        Lattice(s.grid, m, scheme.order).rhs(s.p, s.S, dp, dS);
        return dS;
    }
    const Derivatives D(s.grid, detail::backend_of(scheme));
    const auto g = detail::gradients(s, m, D);
    const auto& c = m.constants;
    RealField out = evaluate(m.potential, s.grid);
    for (std::size_t ax = 0; ax < s.grid.dims(); ++ax) {
        const double gi = m.metric.inverse_mass(ax);
        for (std::size_t j = 0; j < out.size(); ++j) {
            const double sx = g.Sx[ax][j];
            const double lx = g.px[ax][j] / g.pc[j];
            out[j] += gi * (c.A * sx * sx + c.B * (lx * lx - 2.0 * g.pxx[ax][j] / g.pc[j]));
        }
    }
    for (double& v : out) v = -v;
    return out;
}

/// The kinetic-plus-potential part A g dS dS + V that hjb_rhs subtracts.
inline RealField classical_part(const FieldState& s, const HamiltonianModel& m,
                                Scheme scheme = Scheme::Spectral()) {
    HamiltonianModel mc = m;
    mc.constants.B = 0.0;
    RealField out = hjb_rhs(s, mc, scheme);
    for (double& v : out) v = -v;
    return out;
}

struct DerivativeCheckReport {
    double max_relative_error = 0.0;
    double tolerance = 1e-4;
    bool pass = false;
    std::size_t sites = 0;
    std::string details;
};

/// Compares central differences of H under single-site bumps with the closed
/// form rhs fields. A bump of size b adds b to the field at site j, so
/// (H[f+b] - H[f-b]) / (2 b dV) estimates the functional derivative.
/// Bump sites are spread over the points holding at least 1e-3 of the peak
/// density; errors are relative to max(|analytic|, 1e-6 * max|rhs field|).
inline DerivativeCheckReport functional_derivative_check(const FieldState& s, const HamiltonianModel& m,
                                                         double bump, Scheme scheme = Scheme::Spectral(),
                                                         std::size_t max_sites = 8) {
    if (!(bump >= 1e-8 && bump <= 1e-3)) throw ConfigError("bump_size must lie in [1e-8, 1e-3]");
    const RealField dHdS = continuity_rhs(s, m, scheme);
    RealField dHdp = hjb_rhs(s, m, scheme);
    for (double& v : dHdp) v = -v;

    const double pmax = *std::max_element(s.p.begin(), s.p.end());
    std::vector<std::size_t> support;
    for (std::size_t j = 0; j < s.p.size(); ++j)
        if (s.p[j] >= 1e-3 * pmax) support.push_back(j);
    std::vector<std::size_t> sites;
    const std::size_t count = std::min(max_sites, support.size());
    for (std::size_t i = 0; i < count; ++i) sites.push_back(support[(2 * i + 1) * support.size() / (2 * count)]);

    auto scale_of = [](const RealField& f) {
        double mx = 0.0;
        for (double v : f) mx = std::max(mx, std::abs(v));
        return mx;
    };
    const double scale_p = scale_of(dHdp), scale_S = scale_of(dHdS);
    const double delta = bump;
    const double denom = 2.0 * bump * s.grid.cell_volume();

    DerivativeCheckReport r;
    r.sites = sites.size();
    auto rel = [](double fd, double an, double scale) {
        const double denom = std::max(std::abs(an), 1e-6 * scale);
        return denom > 0.0 ? std::abs(fd - an) / denom : std::abs(fd - an);
    };
    for (std::size_t j : sites) {
        FieldState up = s, dn = s;
        up.p[j] += delta;
        dn.p[j] -= delta;
        const double fd_p = (total_hamiltonian(up, m, scheme) - total_hamiltonian(dn, m, scheme)) / denom;
        up = s;
        dn = s;
        up.S[j] += delta;
        dn.S[j] -= delta;
        const double fd_S = (total_hamiltonian(up, m, scheme) - total_hamiltonian(dn, m, scheme)) / denom;
        r.max_relative_error = std::max({r.max_relative_error, rel(fd_p, dHdp[j], scale_p), rel(fd_S, dHdS[j], scale_S)});
    }
    r.pass = r.max_relative_error < r.tolerance;
    r.details = std::to_string(r.sites) + " bump sites, max relative error " + std::to_string(r.max_relative_error);
    return r;
}

} // namespace ens
