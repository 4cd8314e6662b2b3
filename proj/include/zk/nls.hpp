#pragma once

#include "zk/noise.hpp"
#include "zk/spectral.hpp"

#include <span>
#include <vector>

namespace zk {

struct NlsState {
    ComplexField u;
    double time = 0.0;
};

// Limit multiplicative stochastic NLS
//   i du = (-dxx u - |u|^2 u - (i/2) u F) dt - u (dxx)^{-1} phi dW
// integrated two ways: a geometric Strang scheme whose noise sub-step is the
// exact Stratonovich phase (pathwise mass-preserving), and a semi-implicit
// Ito Euler-Maruyama scheme with the explicit -(1/2) u F drift, kept for
// cross-validation.
class NlsSim {
public:
    explicit NlsSim(const NoiseOperator& phi);

    const NoiseOperator& phi() const { return *phi_; }
    const RealField& F() const { return F_; }

    NlsState initial_state(const ComplexField& u0) const;

    // increments: raw white-noise coefficients over the whole step (variance
    // dt per mode), identical to the sum of the coupled driver's blocks.
    void stratonovich_step(NlsState& s, double dt,
                           std::span<const double> increments) const;
    void ito_em_step(NlsState& s, double dt,
                     std::span<const double> increments) const;

private:
    const NoiseOperator* phi_;
    RealField F_;
};

} // namespace zk
