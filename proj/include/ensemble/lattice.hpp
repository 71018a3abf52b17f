#pragma once

#include <cmath>
#include <vector>

#include "ensemble/model.hpp"

namespace ens {

/// Phase-coherent lattice Hamiltonian.
///
/// The continuum density p (A g dS.dS + B g d ln p.d ln p) is replaced by a sum
/// over grid pairs (j, j+m) along each axis, weighted by the central
/// second-difference coefficients c_m of the requested order:
///
///   H = dV sum_j [ sum_axes g/h^2 sum_m c_m K(j, j+m) + V_j p_j ]
///   K = A kappa^2 W (1 - cos((S_k - S_j)/kappa)) + 4 B (sqrt p_k - sqrt p_j)^2
///
/// For B > 0 the weight is W = 2 sqrt(p_j p_k) and kappa = 2 sqrt(B/A); at
/// A = 1/2, B = hbar^2/8 this makes the (p, S) flow the exact image of a
/// finite-difference Schrodinger equation under psi = sqrt(p) e^{iS/hbar}.
/// For B = 0 the weight is W = p_j + p_k and kappa = hbar, which is the
/// classical Hamilton-Jacobi limit at the same consistency order.
///
/// Working with phase differences through cos/sin keeps the scheme blind to
/// 2 pi kappa jumps in S, so the linear phases of moving packets live on the
/// periodic box without seams, and low-density tails do not feed back into
/// the core the way pointwise gradients of ln p do.
class Lattice {
public:
    Lattice(const GridSpec& g, const HamiltonianModel& m, int order = 8)
        : grid_(g), model_(m), coef_(coefficients(order)), V_(evaluate(m.potential, g)) {
        m.validate(g);
        const auto& c = m.constants;
        geometric_ = c.B > 0.0 && c.A > 0.0;
        kappa_ = geometric_ ? 2.0 * std::sqrt(c.B / c.A) : c.hbar;
        for (std::size_t k = 0; k < g.dims(); ++k) {
            const double h = g.spacing(k);
            axis_weight_.push_back(m.metric.inverse_mass(k) / (h * h));
            for (std::size_t mi = 0; mi < coef_.size(); ++mi) {
                std::vector<std::size_t> fwd(g.size());
                for (std::size_t j = 0; j < g.size(); ++j) fwd[j] = g.neighbour(j, k, static_cast<long>(mi + 1));
                forward_.push_back(std::move(fwd));
            }
        }
    }

    static std::vector<double> coefficients(int order) {
        switch (order) {
        case 2: return {1.0};
        case 4: return {4.0 / 3.0, -1.0 / 12.0};
        case 6: return {3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0};
        case 8: return {8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};
        default: throw ConfigError("lattice order must be 2, 4, 6 or 8");
        }
    }

    /// Stencil half width: how far one site's equations reach.
    std::size_t radius() const { return coef_.size(); }
    const RealField& potential() const { return V_; }
    double kappa() const { return kappa_; }

    /// dp/dt = (1/dV) dH/dS and dS/dt = -(1/dV) dH/dp. Each pair (j, k = j+m)
    /// is visited once and feeds both ends.
    void rhs(const RealField& p_in, const RealField& S, RealField& dp, RealField& dS) const {
        const RealField p = clamped(p_in);
        const auto& c = model_.constants;
        const std::size_t n = grid_.size();
        RealField sq(n);
        for (std::size_t j = 0; j < n; ++j) sq[j] = std::sqrt(p[j]);
        dp.assign(n, 0.0);
        dS.assign(n, 0.0);
        const double ak = c.A * kappa_;
        const double akk = ak * kappa_;
        for (std::size_t ax = 0; ax < grid_.dims(); ++ax) {
            for (std::size_t mi = 0; mi < coef_.size(); ++mi) {
                const auto& fwd = forward_[ax * coef_.size() + mi];
                const double w = axis_weight_[ax] * coef_[mi];
                for (std::size_t j = 0; j < n; ++j) {
                    const std::size_t k = fwd[j];
                    const double rk = sq[k] / sq[j]; // sqrt(p_k / p_j)
                    const double rj = sq[j] / sq[k];
                    double sj = 4.0 * c.B * (1.0 - rk);
                    double sk = 4.0 * c.B * (1.0 - rj);
                    if (c.A > 0.0) {
                        const double th = (S[k] - S[j]) / kappa_;
                        const double sn = std::sin(th), omc = 1.0 - std::cos(th);
                        double flow;
                        if (geometric_) {
                            flow = 2.0 * ak * sq[j] * sq[k] * sn;
                            sj += akk * rk * omc;
                            sk += akk * rj * omc;
                        } else {
                            flow = ak * (p[j] + p[k]) * sn;
                            sj += akk * omc;
                            sk += akk * omc;
                        }
                        dp[j] -= w * flow;
                        dp[k] += w * flow;
                    }
                    dS[j] -= w * sj;
                    dS[k] -= w * sk;
                }
            }
        }
        for (std::size_t j = 0; j < n; ++j) dS[j] -= V_[j];
    }

    /// Per-site share of the pair energies divided by p, i.e. the lattice h.
    RealField density(const RealField& p_in, const RealField& S) const {
        const RealField p = clamped(p_in);
        RealField e(grid_.size(), 0.0);
        for (std::size_t ax = 0; ax < grid_.dims(); ++ax)
            for (std::size_t mi = 0; mi < coef_.size(); ++mi) {
                const long m = static_cast<long>(mi + 1);
                const double w = axis_weight_[ax] * coef_[mi];
                for (std::size_t j = 0; j < grid_.size(); ++j) {
                    const std::size_t k = grid_.neighbour(j, ax, m);
                    const double half = 0.5 * w * pair(p[j], p[k], S[j], S[k]);
                    e[j] += half;
                    e[k] += half;
                }
            }
        for (std::size_t j = 0; j < e.size(); ++j) e[j] /= p[j];
        return e;
    }

    double energy(const RealField& p_in, const RealField& S) const {
        const RealField p = clamped(p_in);
        double total = 0.0;
        for (std::size_t ax = 0; ax < grid_.dims(); ++ax)
            for (std::size_t mi = 0; mi < coef_.size(); ++mi) {
                const long m = static_cast<long>(mi + 1);
                const double w = axis_weight_[ax] * coef_[mi];
                double s = 0.0;
                for (std::size_t j = 0; j < grid_.size(); ++j) {
                    const std::size_t k = grid_.neighbour(j, ax, m);
                    s += pair(p[j], p[k], S[j], S[k]);
                }
                total += w * s;
            }
        for (std::size_t j = 0; j < grid_.size(); ++j) total += V_[j] * p[j];
        return total * grid_.cell_volume();
    }

    /// -(hbar^2/2) g R''/R with the same second-difference stencil, R = sqrt p.
    RealField quantum_potential(const RealField& p_in) const {
        const RealField p = clamped(p_in);
        const double hb2 = model_.constants.hbar * model_.constants.hbar;
        RealField q(grid_.size(), 0.0);
        for (std::size_t ax = 0; ax < grid_.dims(); ++ax)
            for (std::size_t mi = 0; mi < coef_.size(); ++mi) {
                const long m = static_cast<long>(mi + 1);
                const double w = axis_weight_[ax] * coef_[mi];
                for (std::size_t j = 0; j < grid_.size(); ++j) {
                    const double rp = std::sqrt(p[grid_.neighbour(j, ax, m)] / p[j]);
                    const double rm = std::sqrt(p[grid_.neighbour(j, ax, -m)] / p[j]);
                    q[j] += 0.5 * hb2 * w * (2.0 - rp - rm);
                }
            }
        return q;
    }

    RealField clamped(const RealField& p) const {
        RealField out(p);
        for (double& v : out) v = std::max(v, model_.density_floor);
        return out;
    }

private:
    double pair(double pj, double pk, double Sj, double Sk) const {
        const auto& c = model_.constants;
        double k = 0.0;
        if (c.A > 0.0) {
            const double one_minus_cos = 1.0 - std::cos((Sk - Sj) / kappa_);
            const double weight = geometric_ ? 2.0 * std::sqrt(pj * pk) : (pj + pk);
            k = c.A * kappa_ * kappa_ * weight * one_minus_cos;
        }
        const double d = std::sqrt(pk) - std::sqrt(pj);
        return k + 4.0 * c.B * d * d;
    }

    GridSpec grid_;
    HamiltonianModel model_;
    std::vector<double> coef_;
    RealField V_;
    std::vector<double> axis_weight_;
    std::vector<std::vector<std::size_t>> forward_; // [axis * radius + m - 1][j] = j + m
    bool geometric_ = false;
    double kappa_ = 1.0;
};

} // namespace ens
