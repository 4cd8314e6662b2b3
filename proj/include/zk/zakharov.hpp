#pragma once

#include "zk/damped_wave.hpp"
#include "zk/noise.hpp"
#include "zk/ou_driver.hpp"
#include "zk/spectral.hpp"

#include <span>
#include <vector>

namespace zk {

struct InitialProfile {
    enum class Kind { sech, gaussian };
    Kind kind = Kind::sech;
    double amplitude = 1.0;
    double x0 = -1.0;      // pulse center; negative = center of the domain
    double velocity = 0.0; // phase tilt exp(i v (x - x0))
    double sigma = 1.0;    // gaussian width
};

struct InitialData {
    ComplexField u0;
    RealField m0; // defaults to -|u0|^2, projected mean-zero
    RealField m1;
};

// Periodized smooth pulse; m0 = -|u0|^2 suppresses the initial layer.
InitialData initial_data(const SpectralGrid& grid, const InitialProfile& profile);

struct ZakharovState {
    ComplexField u;
    RealField m;
    RealField mu; // physical-time derivative of m
    DriverState driver;
    double time = 0.0;
    double epsilon = 1.0;
};

// Strang integrator for the translated system driven by Z^eps = z^eps/sqrt(eps):
//   i du/dt = -dxx u + (m + Z^eps) u
//   eps^2 mtt + alpha eps^gamma mt = dxx (m + |u|^2)
// One step is the palindrome
//   D(dt/2) L(dt/2) V(dt/2) W(dt) V(dt/2) L(dt/2) D(dt/2)
// with exact sub-flows: D the driver advance, L the free Schroedinger group,
// V the pointwise potential phase, W the forced wave step in rescaled time.
class ZakharovSim {
public:
    struct Params {
        double epsilon = 0.1;
        double alpha = 1.0;
        double gamma = 1.0; // damping exponent: alpha_eff = alpha eps^(gamma-1)
        double dt = 0.01;
        int n_sub = 0; // EM substeps per half driver advance; 0 = auto
    };

    ZakharovSim(const NoiseOperator& phi, const Params& p);

    const Params& params() const { return params_; }
    double alpha_eff() const { return alpha_eff_; }
    const OuDriver& driver() const { return driver_; }
    int blocks_per_step() const { return 2 * n_sub_; }

    ZakharovState initial_state(const InitialData& data) const;

    // coupled mode: consumes 2*n_sub white-increment blocks, each mode-indexed
    // with variance dt/(2*n_sub)
    void strang_step(ZakharovState& s,
                     std::span<const std::vector<double>> increments) const;
    // uncoupled mode: driver advanced by exact Gaussian sampling
    void strang_step(ZakharovState& s, GaussianStream& rng) const;

    RealField reconstruct_n(const ZakharovState& s) const;

private:
    void core_step(ZakharovState& s) const;

    const NoiseOperator* phi_;
    Params params_;
    double alpha_eff_;
    int n_sub_;
    OuDriver driver_;
};

} // namespace zk
