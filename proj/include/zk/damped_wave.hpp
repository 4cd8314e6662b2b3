#pragma once

#include "zk/spectral.hpp"

#include <array>

namespace zk {

// 2x2 real matrix acting on per-mode (n, mu) pairs.
struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    std::array<double, 2> apply(double x, double y) const {
        return {a11 * x + a12 * y, a21 * x + a22 * y};
    }
    double det() const { return a11 * a22 - a12 * a21; }
};

// m_alpha(t, xi) = exp(t * A_xi) with A_xi = [[0, 1], [-xi^2, -alpha]],
// evaluated from the closed hyperbolic/trigonometric forms with an even
// power-series branch around |xi| = alpha/2 where both closed forms lose
// digits. The (2,1) entry is -xi^2 sinh(beta t)/beta, which is the matrix
// exponential's value; the printed high-frequency transcription of this
// entry does not reduce to d/dt of the (1,1) entry and is not used.
Mat2 semigroup_multiplier(double alpha, double xi, double t);

struct WavePair {
    RealField n;
    RealField mu; // time derivative of n in the semigroup's own time

    WavePair() = default;
    WavePair(RealField n_, RealField mu_);
};

// Exact linear flow of d/dt (n, mu) = (mu, -alpha mu + dxx n).
WavePair apply_semigroup(double alpha, double t, const WavePair& pair);

// Exact solution over [0, tau] of dtt n + alpha dt n = dxx n + dxx g with g
// frozen: steady state (-g, 0) plus the semigroup on the deviation. g is
// projected to mean zero first.
WavePair forced_step(double alpha, double tau, const WavePair& pair,
                     const RealField& g);

struct TimeIntegral {
    double value = 0.0;            // quadrature of the time integral
    double truncation_bound = 0.0; // e^{-alpha t_max} envelope estimate
};

// Quadrature of int_0^inf || (S_alpha(t) pair)_component ||^2_{H^k cap H^-l} dt;
// the intersection norm squared is the sum of the two squared norms.
// component is 1 (n) or 2 (mu). Requires alpha > 0.
TimeIntegral time_integral_norm(double alpha, const WavePair& pair, int k,
                                int l, int component, double t_max,
                                double quad_tol);

} // namespace zk
