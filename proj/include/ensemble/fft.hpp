#pragma once

#include <complex>
#include <cstring>
#include <mutex>
#include <numbers>
#include <vector>

#include <fftw3.h>

#include "ensemble/grid.hpp"

namespace ens {

namespace detail {
// The FFTW planner is not reentrant; execution is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace detail

/// In-place complex DFT over a whole grid. FFTW_ESTIMATE keeps plans (and so
/// results) reproducible from run to run.
class FFT {
public:
    explicit FFT(const GridSpec& g) : n_(g.size()) {
        buf_ = fftw_alloc_complex(n_);
        std::vector<int> dims(g.points.begin(), g.points.end());
        std::lock_guard lock(detail::fftw_planner_mutex());
        fwd_ = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~FFT() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }
    FFT(const FFT&) = delete;
    FFT& operator=(const FFT&) = delete;

    void forward(std::vector<std::complex<double>>& data) { run(fwd_, data, 1.0); }
    /// Normalized so backward(forward(x)) == x.
    void backward(std::vector<std::complex<double>>& data) { run(bwd_, data, 1.0 / static_cast<double>(n_)); }

private:
    void run(fftw_plan plan, std::vector<std::complex<double>>& data, double scale) {
        std::memcpy(buf_, data.data(), n_ * sizeof(fftw_complex));
        fftw_execute(plan);
        std::memcpy(static_cast<void*>(data.data()), buf_, n_ * sizeof(fftw_complex));
        if (scale != 1.0)
            for (auto& z : data) z *= scale;
    }

    std::size_t n_;
    fftw_complex* buf_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

/// Angular wavenumbers of one axis in FFT order. The Nyquist entry is kept
/// positive; callers that need an odd derivative zero it themselves.
inline std::vector<double> wavenumbers(const GridSpec& g, std::size_t axis) {
    const std::size_t n = g.points[axis];
    const double base = 2.0 * std::numbers::pi / g.length(axis);
    std::vector<double> k(n);
    for (std::size_t i = 0; i < n; ++i) {
        const long j = i <= n / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
        k[i] = base * static_cast<double>(j);
    }
    return k;
}

} // namespace ens
