#pragma once

#include <algorithm>
#include <complex>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "ensemble/fft.hpp"
#include "ensemble/grid.hpp"

namespace ens {

enum class Backend { spectral, finite_difference };

/// Pointwise derivative operators on the periodic grid. The spectral backend
/// is exact for band-limited periodic fields; the finite-difference backend is
/// the 4th-order central stencil.
class Derivatives {
public:
    Derivatives(const GridSpec& g, Backend b) : grid_(g), backend_(b) {
        if (b == Backend::spectral) {
            fft_ = std::make_unique<FFT>(g);
            for (std::size_t k = 0; k < g.dims(); ++k) k_.push_back(wavenumbers(g, k));
        }
    }

    const GridSpec& grid() const { return grid_; }
    Backend backend() const { return backend_; }

    RealField first(const RealField& f, std::size_t axis) const { return apply(f, axis, 1); }
    RealField second(const RealField& f, std::size_t axis) const { return apply(f, axis, 2); }

    /// Gradient of an action-like field S that is only defined modulo
    /// 2 pi `scale` (S/scale is a phase). The spectral backend differentiates
    /// psi = sqrt(p) e^{iS/scale} and returns scale Im(conj(psi) dpsi) / p, with
    /// p clamped to `floor` in the division; psi only has to be periodic where
    /// p is resolved. The stencil backend wraps each difference of S. Both are
    /// exact for linear phases commensurate with the box.
    RealField phase_first(const RealField& S, std::size_t axis, double scale, const RealField& p,
                          double floor) const {
        if (S.size() != grid_.size() || p.size() != grid_.size())
            throw GridMismatch("field size does not match the grid");
        RealField out(S.size());
        if (backend_ == Backend::spectral) {
            RealField re(S.size()), im(S.size());
            for (std::size_t i = 0; i < S.size(); ++i) {
                const double r = std::sqrt(p[i]);
                re[i] = r * std::cos(S[i] / scale);
                im[i] = r * std::sin(S[i] / scale);
            }
            const RealField dre = spectral(re, axis, 1), dim = spectral(im, axis, 1);
            for (std::size_t i = 0; i < S.size(); ++i)
                out[i] = scale * (re[i] * dim[i] - im[i] * dre[i]) / std::max(p[i], floor);
            return out;
        }
        const double h = grid_.spacing(axis);
        const double period = 2.0 * std::numbers::pi * scale;
        auto diff = [&](std::size_t a, std::size_t b) { return std::remainder(S[a] - S[b], period); };
        for (std::size_t i = 0; i < S.size(); ++i) {
            const std::size_t m2 = grid_.neighbour(i, axis, -2), m1 = grid_.neighbour(i, axis, -1);
            const std::size_t p1 = grid_.neighbour(i, axis, 1), p2 = grid_.neighbour(i, axis, 2);
            out[i] = (8.0 * diff(p1, m1) - diff(p2, m2)) / (12.0 * h);
        }
        return out;
    }

private:
    RealField apply(const RealField& f, std::size_t axis, int order) const {
        if (f.size() != grid_.size()) throw GridMismatch("field size does not match the grid");
        return backend_ == Backend::spectral ? spectral(f, axis, order) : stencil(f, axis, order);
    }

    RealField spectral(const RealField& f, std::size_t axis, int order) const {
        std::vector<std::complex<double>> z(f.begin(), f.end());
        fft_->forward(z);
        const auto& k = k_[axis];
        const std::size_t n = grid_.points[axis];
        for (std::size_t i = 0; i < z.size(); ++i) {
            const std::size_t j = grid_.axis_index(i, axis);
            if (order == 1)
                z[i] *= (j == n / 2) ? std::complex<double>(0.0) : std::complex<double>(0.0, k[j]);
            else
                z[i] *= -k[j] * k[j];
        }
        fft_->backward(z);
        RealField out(f.size());
        for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i].real();
        return out;
    }

    RealField stencil(const RealField& f, std::size_t axis, int order) const {
        const double h = grid_.spacing(axis);
        RealField out(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double fm2 = f[grid_.neighbour(i, axis, -2)];
            const double fm1 = f[grid_.neighbour(i, axis, -1)];
            const double fp1 = f[grid_.neighbour(i, axis, 1)];
            const double fp2 = f[grid_.neighbour(i, axis, 2)];
            if (order == 1)
                out[i] = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
            else
                out[i] = (-fm2 + 16.0 * fm1 - 30.0 * f[i] + 16.0 * fp1 - fp2) / (12.0 * h * h);
        }
        return out;
    }

    GridSpec grid_;
    Backend backend_;
    std::unique_ptr<FFT> fft_;
    std::vector<std::vector<double>> k_;
};

} // namespace ens
