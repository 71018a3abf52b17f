#pragma once

#include "ensemble/field_state.hpp"
#include "ensemble/potential.hpp"

namespace ens {

struct HamiltonianModel {
    Constants constants;
    Metric metric;
    Potential potential = FreePotential{};
    /// Densities below this are clamped wherever p divides or sits under a root.
    double density_floor = kDefaultDensityFloor;

    void validate(const GridSpec& g) const {
        constants.validate();
        metric.validate();
        metric.check(g);
        if (!(density_floor > 0.0)) throw ConfigError("density_floor must be positive");
    }
};

/// Discretization used by the Hamiltonian operators.
///  spectral / finite_difference: pointwise formulas with FFT or 4th-order
///    central derivatives.
///  lattice: the phase-coherent pair Hamiltonian that drives time evolution
///    (see lattice.hpp); `order` is its stencil accuracy.
struct Scheme {
    enum Kind { spectral, finite_difference, lattice } kind = spectral;
    int order = 8;

    static Scheme Spectral() { return {spectral, 0}; }
    static Scheme FiniteDifference() { return {finite_difference, 4}; }
    static Scheme Lattice(int order = 8) { return {lattice, order}; }
};

/// Form of the B term in h. Only `log_gradient` is physical; the others are
/// deliberately broken variants used to show the axiom checks can fail.
enum class InformationForm {
    log_gradient, // B g (d ln p)^2
    raw_gradient, // B g (d p)^2, not scale invariant
    negated,      // -B g (d ln p)^2, not positive
};

} // namespace ens
