#pragma once

#include "zk/noise.hpp"
#include "zk/ou_driver.hpp"
#include "zk/spectral.hpp"

#include <span>

namespace zk {

struct EnergyReport {
    double mass = 0.0;
    double H = 0.0;
    double K = 0.0;
    double H1 = 0.0;
    double H2 = 0.0;
    double H_eps = 0.0; // H + sqrt(eps) H1 + eps H2, assembled exactly
    double V_norm = 0.0;
    double time = 0.0;
};

double mass(const ComplexField& u);

// V = -dx^{-1} mu (mu mean-zero), quadratic products dealiased.
// H = ||dx u||^2 + (1/2)(||m||^2 + ||eps V||^2) + int m |u|^2 dx
// K = ||dx u||^2 + (1/2) ||m||^2 + (1/2) ||eps V||^2
double hamiltonian(const ComplexField& u, const RealField& m,
                   const RealField& mu, double eps);
double quadratic_energy(const ComplexField& u, const RealField& m,
                        const RealField& mu, double eps);

// 2 Re int i u dx(conj u) (dx^{-1} zeta + alpha dx^{-1} z) dx
double corrector_H1(const ComplexField& u, const OuDriver& driver,
                    const DriverState& rescaled);

// 2 int |u|^2 M^{-1}( dx z . dx M^{-1} z - E_nu[...] ) dx
double corrector_H2(const ComplexField& u, const OuDriver& driver,
                    const DriverState& rescaled);

EnergyReport modified_energy(const ComplexField& u, const RealField& m,
                             const RealField& mu, double eps,
                             const OuDriver& driver, const DriverState& rescaled,
                             bool with_correctors = true);

// One increment of the energy martingale:
// 2 Re int i u dx(conj u) sum_k dx^{-1}(phi e_k) dbeta_k dx
double martingale_X_increment(const ComplexField& u, const NoiseOperator& phi,
                              std::span<const double> white_increments);

struct GeneratorEval {
    double drift = 0.0;    // (i dxx u + i|u|^2 u - (1/2) u F, h)
    double quad_var = 0.0; // sum_k (i u (dxx)^{-1} phi e_k, h)^2
};

GeneratorEval limit_generator(const ComplexField& u, const ComplexField& h,
                              const NoiseOperator& phi);

} // namespace zk
