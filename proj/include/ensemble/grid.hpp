#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "ensemble/errors.hpp"

namespace ens {

using RealField = std::vector<double>;

/// Periodic uniform box in 1 to 3 configuration-space dimensions.
/// Storage is row-major: the last axis varies fastest.
struct GridSpec {
    std::vector<std::size_t> points;
    std::vector<double> lower;
    std::vector<double> upper;

    GridSpec() = default;
    GridSpec(std::vector<std::size_t> pts, std::vector<double> lo, std::vector<double> hi)
        : points(std::move(pts)), lower(std::move(lo)), upper(std::move(hi)) {
        validate();
    }

    static GridSpec line(std::size_t n, double lo, double hi) { return GridSpec({n}, {lo}, {hi}); }

    void validate() const {
        const auto d = points.size();
        if (d < 1 || d > 3)
            throw ConfigError("grid must have 1, 2 or 3 dimensions");
        if (lower.size() != d || upper.size() != d)
            throw ConfigError("grid extents do not match its dimension count");
        for (std::size_t k = 0; k < d; ++k) {
            if (points[k] < 8 || points[k] % 2 != 0)
                throw ConfigError("grid axis " + std::to_string(k) + " needs an even point count >= 8");
            if (!(upper[k] > lower[k]))
                throw ConfigError("grid axis " + std::to_string(k) + " has upper <= lower");
        }
    }

    std::size_t dims() const { return points.size(); }
    std::size_t size() const {
        return std::accumulate(points.begin(), points.end(), std::size_t{1}, std::multiplies<>());
    }
    double length(std::size_t axis) const { return upper[axis] - lower[axis]; }
    double spacing(std::size_t axis) const { return length(axis) / static_cast<double>(points[axis]); }
    double min_spacing() const {
        double h = spacing(0);
        for (std::size_t k = 1; k < dims(); ++k) h = std::min(h, spacing(k));
        return h;
    }
    double cell_volume() const {
        double v = 1.0;
        for (std::size_t k = 0; k < dims(); ++k) v *= spacing(k);
        return v;
    }
    double volume() const {
        double v = 1.0;
        for (std::size_t k = 0; k < dims(); ++k) v *= length(k);
        return v;
    }
    double coordinate(std::size_t axis, std::size_t i) const {
        return lower[axis] + spacing(axis) * static_cast<double>(i);
    }

    /// Distance in flat storage between neighbours along an axis.
    std::size_t stride(std::size_t axis) const {
        std::size_t s = 1;
        for (std::size_t k = axis + 1; k < dims(); ++k) s *= points[k];
        return s;
    }
    std::size_t axis_index(std::size_t flat, std::size_t axis) const {
        return (flat / stride(axis)) % points[axis];
    }
    /// Flat index of the periodic neighbour `shift` cells away along `axis`.
    std::size_t neighbour(std::size_t flat, std::size_t axis, long shift) const {
        const long n = static_cast<long>(points[axis]);
        const long i = static_cast<long>(axis_index(flat, axis));
        long j = (i + shift) % n;
        if (j < 0) j += n;
        return flat + static_cast<std::size_t>(j - i) * stride(axis);
    }

    std::array<std::size_t, 3> unflatten(std::size_t flat) const {
        std::array<std::size_t, 3> idx{0, 0, 0};
        for (std::size_t k = 0; k < dims(); ++k) idx[k] = axis_index(flat, k);
        return idx;
    }

    /// Coordinate field of one axis.
    RealField coordinates(std::size_t axis) const {
        RealField x(size());
        for (std::size_t f = 0; f < x.size(); ++f) x[f] = coordinate(axis, axis_index(f, axis));
        return x;
    }

    std::string describe_point(std::size_t flat) const {
        std::string s = "(";
        for (std::size_t k = 0; k < dims(); ++k) {
            if (k) s += ", ";
            s += "x" + std::to_string(k) + "=" + std::to_string(coordinate(k, axis_index(flat, k)));
        }
        return s + ")";
    }

    bool operator==(const GridSpec& o) const {
        return points == o.points && lower == o.lower && upper == o.upper;
    }
};

inline double integrate(const RealField& f, const GridSpec& g) {
    double s = 0.0;
    for (double v : f) s += v;
    return s * g.cell_volume();
}

} // namespace ens
