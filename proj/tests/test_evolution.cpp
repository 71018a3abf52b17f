#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ensemble/axioms.hpp"
#include "ensemble/evolution.hpp"
#include "ensemble/scenarios.hpp"

using namespace ens;

namespace {

constexpr double pi = std::numbers::pi;

HamiltonianModel model(Constants c = Constants::quantum(), Metric m = Metric(), Potential v = FreePotential{}) {
    return {c, m, v, kScenarioDensityFloor};
}

double l2(const RealField& a, const RealField& b, const GridSpec& g) { return detail::l2(a, b, g); }

} // namespace

TEST(StepPlan, LandsOnFinalTime) {
    RunParams r;
    r.dt = 0.3;
    r.t_final = 1.0;
    const auto [n, dt] = step_plan(r);
    EXPECT_EQ(n, 4u);
    EXPECT_DOUBLE_EQ(dt, 0.25);
    r.dt = 0.25;
    EXPECT_EQ(step_plan(r).first, 4u);
    r.t_final = 0.0;
    EXPECT_EQ(step_plan(r).first, 0u);
}

TEST(StabilityGuard, RejectsLargeSteps) {
    const auto g = GridSpec::line(256, -10.0, 10.0);
    const auto m = model();
    const double limit = stability_limit(g, m);
    EXPECT_NEAR(limit, 0.2 * std::pow(20.0 / 256.0, 2), 1e-15);
    RunParams r;
    r.t_final = 1.0;
    r.dt = 10.0;
    EXPECT_THROW(resolve_run(r, g, m), ConfigError);
    r.dt = 0.0;
    EXPECT_DOUBLE_EQ(resolve_run(r, g, m).dt, limit);
    r.dt = -1.0;
    EXPECT_THROW(resolve_run(r, g, m), ConfigError);
    r.dt = 0.0;
    r.lattice_order = 5;
    EXPECT_THROW(resolve_run(r, g, m), ConfigError);
}

TEST(Hydro, UniformStateIsFixedPoint) {
    const GridSpec g({16, 16}, {0.0, 0.0}, {1.0, 1.0});
    const FieldState s{g, RealField(g.size(), 1.0), RealField(g.size(), 0.0), 0.0};
    RunParams r;
    r.t_final = 0.05;
    const auto tr = evolve_hydro(s, model(Constants::quantum(), Metric({1.0}, 2)), r);
    ASSERT_FALSE(tr.failure);
    for (std::size_t j = 0; j < g.size(); ++j) {
        EXPECT_EQ(tr.snapshots.back().p[j], 1.0);
        EXPECT_EQ(tr.snapshots.back().S[j], 0.0);
    }
    EXPECT_NEAR(tr.snapshots.back().time, 0.05, 1e-15);
}

TEST(Hydro, ClassicalPlaneWaveAction) {
    // B = 0, uniform p, S = m k x: S decreases at rate m k^2 / 2.
    const auto g = GridSpec::line(64, 0.0, 2.0 * pi);
    const double k = 3.0, mass = 1.0;
    FieldState s{g, RealField(64, 1.0 / (2 * pi)), RealField(64), 0.0};
    for (std::size_t i = 0; i < 64; ++i) s.S[i] = mass * k * g.coordinate(0, i);
    RunParams r;
    r.t_final = 0.5;
    const auto tr = evolve_hydro(s, model(Constants::classical(), Metric({mass}, 1)), r);
    ASSERT_FALSE(tr.failure);
    const auto& f = tr.snapshots.back();
    for (std::size_t i = 0; i < 64; ++i) {
        EXPECT_NEAR(f.p[i], s.p[i], 1e-12);
        EXPECT_NEAR(f.S[i] - s.S[i], -0.5 * mass * k * k * 0.5, 1e-7);
    }
}

TEST(Reference, PlaneWavePhase) {
    const auto g = GridSpec::line(32, 0.0, 2.0 * pi);
    const double k = 4.0, mass = 2.0, hbar = 0.5, t = 0.7;
    Wavefunction w{g, ComplexField(32), 0.0};
    for (std::size_t i = 0; i < 32; ++i) w.psi[i] = std::polar(1.0 / std::sqrt(2 * pi), k * g.coordinate(0, i));
    const auto m = model(Constants::quantum(hbar), Metric({mass}, 1));
    RunParams r;
    r.t_final = t;
    r.snapshot_stride = 1000000;
    const auto tr = evolve_reference(w, m, r);
    const Complex turn = std::polar(1.0, -hbar * k * k * t / (2 * mass));
    for (std::size_t i = 0; i < 32; ++i) EXPECT_LT(std::abs(tr.snapshots.back().psi[i] - w.psi[i] * turn), 1e-12);
}

TEST(Reference, FreeGaussianSpreads) {
    // sigma0 = 1, m = 1: |psi(t)|^2 is Gaussian with variance 1 + t^2/4.
    const auto g = GridSpec::line(256, -20.0, 20.0);
    const auto m = model();
    const FieldState s0 = gaussian_packet(g, m.metric, m.constants, {0.0}, {1.0}, {0.0});
    RunParams r;
    r.t_final = 1.0;
    r.snapshot_stride = 1000000;
    const auto tr = evolve_reference(to_wavefunction(s0, m.constants), m, r);
    const double var = 1.0 + 0.25;
    RealField want(g.size()), got(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.coordinate(0, i);
        want[i] = std::exp(-0.5 * x * x / var) / std::sqrt(2 * pi * var);
        got[i] = std::norm(tr.snapshots.back().psi[i]);
    }
    EXPECT_LT(l2(got, want, g), 1e-6);
}

TEST(Reference, RejectsClassicalModel) {
    const auto g = GridSpec::line(32, 0.0, 1.0);
    EXPECT_THROW(ReferenceStepper(g, model(Constants::classical()), 1e-4), UnsupportedConfiguration);
}

TEST(Hydro, ZeroTimeRunReturnsInitialState) {
    const Scenario sc = find_scenario("free-quantum-gaussian");
    RunParams r = sc.run;
    r.t_final = 0.0;
    const auto tr = evolve_hydro(sc.initial_state(), sc.model(), r);
    ASSERT_EQ(tr.snapshots.size(), 1u);
    FieldState s0 = sc.initial_state();
    for (double& v : s0.p) v = std::max(v, sc.density_floor); // runs start from the clamped state
    EXPECT_EQ(tr.snapshots[0].p, s0.p);
    EXPECT_EQ(tr.snapshots[0].S, s0.S);
    EXPECT_EQ(tr.observables.size(), 1u);
}

TEST(Hydro, HarmonicGroundStateIsStationary) {
    const Scenario sc = find_scenario("harmonic-ground");
    RunParams r = sc.run;
    r.t_final = 1.0;
    const FieldState s0 = sc.initial_state();
    const auto tr = evolve_hydro(s0, sc.model(), r);
    ASSERT_FALSE(tr.failure);
    EXPECT_LT(l2(tr.snapshots.back().p, s0.p, sc.grid), 1e-6);
    // S advances uniformly by -E t with E = 1/2 where the density lives.
    const auto& f = tr.snapshots.back();
    for (std::size_t i = 0; i < f.p.size(); ++i)
        if (s0.p[i] > 1e-6) { EXPECT_NEAR(f.S[i], -0.5, 1e-6); }
}

TEST(Hydro, CoherentStateReturns) {
    const Scenario sc = find_scenario("harmonic-coherent");
    const FieldState s0 = sc.initial_state();
    const auto tr = evolve_hydro(s0, sc.model(), sc.run);
    ASSERT_FALSE(tr.failure);
    for (const auto& o : tr.observables) EXPECT_NEAR(o.mean[0], std::cos(o.time), 1e-6) << "t=" << o.time;
    EXPECT_LT(l2(tr.snapshots.back().p, s0.p, sc.grid), 1e-6);
    const double e0 = tr.observables.front().energy;
    EXPECT_NEAR(e0, 1.0, 1e-6); // 1/2 + displacement^2 / 2
    for (const auto& o : tr.observables) EXPECT_NEAR(o.energy, e0, 1e-9 * e0);
}

TEST(Hydro, BlowUpIsDetected) {
    // B far from hbar^2/8 makes the lattice much stiffer than the step guard assumes.
    const auto g = GridSpec::line(64, 0.0, 2.0 * pi);
    std::mt19937_64 rng(9);
    const FieldState s = random_state(g, rng);
    RunParams r;
    r.t_final = 1.0;
    r.stability_factor = 0.8;
    const auto tr = evolve_hydro(s, model(Constants(1.0, 0.5, 50.0)), r);
    ASSERT_TRUE(tr.failure.has_value());
    EXPECT_GT(tr.failed_step, 0u);
    EXPECT_GE(tr.snapshots.size(), 1u);
    for (const auto& snap : tr.snapshots)
        for (double v : snap.p) EXPECT_TRUE(std::isfinite(v));
}

TEST(Hydro, RejectsNodes) {
    const auto g = GridSpec::line(16, 0.0, 1.0);
    FieldState s{g, RealField(16, 1.0), RealField(16, 0.0), 0.0};
    s.p[4] = 0.0;
    RunParams r;
    r.t_final = 0.1;
    EXPECT_THROW(evolve_hydro(s, model(), r), NodeError);
}

namespace {

/// Self-convergence error |x(dt) - x(dt/2)| at fixed final time.
double self_error(const FieldState& s, const HamiltonianModel& m, Integrator integ, double dt, double t) {
    auto run = [&](double h) {
        FieldState x = s;
        const HydroStepper st(s.grid, m, integ, 8);
        const auto n = static_cast<std::size_t>(std::llround(t / h));
        for (std::size_t i = 0; i < n; ++i) st.step(x, h);
        return x;
    };
    const FieldState a = run(dt), b = run(dt / 2);
    double e = 0.0;
    for (std::size_t j = 0; j < a.p.size(); ++j) e = std::max({e, std::abs(a.p[j] - b.p[j]), std::abs(a.S[j] - b.S[j])});
    return e;
}

} // namespace

TEST(Hydro, IntegratorOrder) {
    // A gentle smooth periodic state stays far from nodes over the horizon, so
    // the floor is inactive and the time error is the only error that changes
    // with dt. Heun is run at half the guard: it slowly amplifies the stiffest
    // lattice modes, at a rate ~ (omega dt)^4 / 8 per step.
    const auto g = GridSpec::line(32, 0.0, 2.0 * pi);
    std::mt19937_64 rng(12);
    const FieldState s{g, detail::random_density(g, rng, 4, 0.3), detail::random_phase(g, rng, 4, 0.3), 0.0};
    const auto m = model();
    const double dt = stability_limit(g, m);
    const double t = 128 * dt;
    const double r4 = self_error(s, m, Integrator::rk4, dt, t) / self_error(s, m, Integrator::rk4, dt / 2, t);
    const double r2 = self_error(s, m, Integrator::heun, dt / 2, t) / self_error(s, m, Integrator::heun, dt / 4, t);
    EXPECT_GT(r4, 14.0);
    EXPECT_LT(r4, 18.0);
    EXPECT_GT(r2, 3.6);
    EXPECT_LT(r2, 4.4);
}

TEST(Hydro, ConservesNormAndEnergy) {
    const Scenario sc = find_scenario("boosted-gaussian");
    RunParams r = sc.run;
    r.t_final = 0.5;
    const auto tr = evolve_hydro(sc.initial_state(), sc.model(), r);
    ASSERT_FALSE(tr.failure);
    const auto& o0 = tr.observables.front();
    for (const auto& o : tr.observables) {
        EXPECT_NEAR(o.norm, o0.norm, 1e-10);
        EXPECT_NEAR(o.energy, o0.energy, 1e-9 * std::abs(o0.energy));
    }
    EXPECT_TRUE(tr.warnings.empty());
}
