#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "ensemble/errors.hpp"
#include "ensemble/grid.hpp"

namespace ens {

struct FreePotential {};

/// V = sum_k spring[k] x_k^2 / 2.
struct HarmonicPotential {
    std::vector<double> spring;
};

/// Gaussian bump of the given height and width centred at `center`.
struct BarrierPotential {
    double height = 0.0;
    std::vector<double> center;
    double width = 1.0;
};

struct SampledPotential {
    GridSpec grid;
    RealField values;
};

using Potential = std::variant<FreePotential, HarmonicPotential, BarrierPotential, SampledPotential>;

inline RealField evaluate(const Potential& v, const GridSpec& g) {
    RealField out(g.size(), 0.0);
    if (std::holds_alternative<FreePotential>(v)) return out;
    if (const auto* h = std::get_if<HarmonicPotential>(&v)) {
        if (h->spring.size() != g.dims()) throw ConfigError("harmonic potential needs one spring constant per dimension");
        for (std::size_t i = 0; i < out.size(); ++i)
            for (std::size_t k = 0; k < g.dims(); ++k) {
                const double x = g.coordinate(k, g.axis_index(i, k));
                out[i] += 0.5 * h->spring[k] * x * x;
            }
        return out;
    }
    if (const auto* b = std::get_if<BarrierPotential>(&v)) {
        if (b->center.size() != g.dims()) throw ConfigError("barrier center needs one coordinate per dimension");
        if (!(b->width > 0.0)) throw ConfigError("barrier width must be positive");
        for (std::size_t i = 0; i < out.size(); ++i) {
            double r2 = 0.0;
            for (std::size_t k = 0; k < g.dims(); ++k) {
                const double d = g.coordinate(k, g.axis_index(i, k)) - b->center[k];
                r2 += d * d;
            }
            out[i] = b->height * std::exp(-r2 / (2.0 * b->width * b->width));
        }
        return out;
    }
    const auto& s = std::get<SampledPotential>(v);
    if (!(s.grid == g) || s.values.size() != g.size()) throw GridMismatch("sampled potential lives on another grid");
    return s.values;
}

inline bool is_free(const Potential& v) {
    if (std::holds_alternative<FreePotential>(v)) return true;
    if (const auto* s = std::get_if<SampledPotential>(&v)) {
        for (double x : s->values)
            if (x != 0.0) return false;
        return true;
    }
    return false;
}

inline double potential_minimum(const RealField& V) {
    double m = V.empty() ? 0.0 : V[0];
    for (double x : V) m = std::min(m, x);
    return m;
}

inline std::string potential_kind(const Potential& v) {
    switch (v.index()) {
    case 0: return "free";
    case 1: return "harmonic";
    case 2: return "barrier";
    default: return "sampled";
    }
}

} // namespace ens
