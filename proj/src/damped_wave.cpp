#include "zk/damped_wave.hpp"

#include "zk/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace zk {

namespace {

// cosh(beta t) and sinh(beta t)/beta as even functions of beta^2 = gamma,
// valid for gamma of either sign; 6-term series used near gamma = 0.
struct Evens {
    double c;  // cosh(beta t)
    double s;  // sinh(beta t) / beta
};

Evens evens_series(double gamma, double t) {
    const double g = gamma * t * t;
    double c = 0.0, s = 0.0, term_c = 1.0, term_s = t;
    c = term_c;
    s = term_s;
    for (int n = 1; n <= 6; ++n) {
        term_c *= g / ((2 * n - 1) * (2 * n));
        term_s *= g / ((2 * n) * (2 * n + 1));
        c += term_c;
        s += term_s;
    }
    return {c, s};
}

Evens evens(double gamma, double t, double branch_tol) {
    if (std::fabs(gamma) < branch_tol) return evens_series(gamma, t);
    if (gamma > 0.0) {
        const double b = std::sqrt(gamma);
        return {std::cosh(b * t), std::sinh(b * t) / b};
    }
    const double w = std::sqrt(-gamma);
    return {std::cos(w * t), std::sin(w * t) / w};
}

} // namespace

Mat2 semigroup_multiplier(double alpha, double xi, double t) {
    if (t < 0.0)
        throw std::invalid_argument("semigroup_multiplier: t must be >= 0");
    if (alpha < 0.0)
        throw std::invalid_argument("semigroup_multiplier: alpha must be >= 0");
    Mat2 m;
    if (xi == 0.0) {
        // decoupled zero mode: mu' = -alpha mu, n' = mu
        m.a11 = 1.0;
        m.a21 = 0.0;
        if (alpha == 0.0) {
            m.a12 = t;
            m.a22 = 1.0;
        } else {
            m.a22 = std::exp(-alpha * t);
            m.a12 = (1.0 - m.a22) / alpha;
        }
        return m;
    }
    // gamma = (alpha^2 - 4 xi^2)/4 = beta^2
    const double gamma = 0.25 * (alpha * alpha - 4.0 * xi * xi);
    const double branch_tol = 1e-4 * 0.25 * alpha * alpha + 1e-12;
    const double damp = std::exp(-0.5 * alpha * t);
    const double half_alpha = 0.5 * alpha;
    if (std::fabs(gamma) < branch_tol || gamma < 0.0) {
        // oscillatory branch and the power-series window around |xi| = alpha/2
        const Evens e = evens(gamma, t, branch_tol);
        m.a11 = damp * (e.c + half_alpha * e.s);
        m.a12 = damp * e.s;
        m.a21 = damp * (-xi * xi * e.s);
        m.a22 = damp * (e.c - half_alpha * e.s);
        return m;
    }
    // overdamped branch in eigen-exponential form; the coefficient
    // beta - alpha/2 = -xi^2/(beta + alpha/2) avoids the cancellation that
    // otherwise destroys m22 for large beta t
    const double beta = std::sqrt(gamma);
    const double ep = std::exp((-half_alpha + beta) * t);
    const double em = std::exp((-half_alpha - beta) * t);
    const double sum = half_alpha + beta;          // alpha/2 + beta
    const double diff = -xi * xi / sum;            // beta - alpha/2, exact sign
    m.a11 = (sum * ep + diff * em) / (2.0 * beta);
    m.a12 = (ep - em) / (2.0 * beta);
    m.a21 = -xi * xi * m.a12;
    m.a22 = (diff * ep + sum * em) / (2.0 * beta);
    return m;
}

WavePair::WavePair(RealField n_, RealField mu_)
    : n(std::move(n_)), mu(std::move(mu_)) {
    if (&n.grid() != &mu.grid())
        throw std::invalid_argument("WavePair: grid mismatch");
}

namespace {

// Multiplier tables are cached per (alpha, t) since time steps are uniform.
const std::vector<Mat2>& multiplier_table(const SpectralGrid& grid,
                                          double alpha, double t) {
    static std::mutex mu;
    static std::map<std::tuple<int, double, double, double>,
                    std::vector<Mat2>>
        cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(grid.size(), grid.length(), alpha, t);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<Mat2> table(grid.size());
    for (int j = 0; j < grid.size(); ++j)
        table[j] = semigroup_multiplier(alpha, grid.wavenumber(j), t);
    return cache.emplace(key, std::move(table)).first->second;
}

} // namespace

WavePair apply_semigroup(double alpha, double t, const WavePair& pair) {
    const SpectralGrid& grid = pair.n.grid();
    const auto& table = multiplier_table(grid, alpha, t);
    auto cn = pair.n.spectrum();
    auto cm = pair.mu.spectrum();
    for (int j = 0; j < grid.size(); ++j) {
        const Mat2& m = table[j];
        const cplx n0 = cn[j], m0 = cm[j];
        cn[j] = m.a11 * n0 + m.a12 * m0;
        cm[j] = m.a21 * n0 + m.a22 * m0;
    }
    return WavePair(RealField::from_spectrum(grid, std::move(cn)),
                    RealField::from_spectrum(grid, std::move(cm)));
}

WavePair forced_step(double alpha, double tau, const WavePair& pair,
                     const RealField& g) {
    if (tau < 0.0)
        throw std::invalid_argument("forced_step: tau must be >= 0");
    if (&g.grid() != &pair.n.grid())
        throw std::invalid_argument("forced_step: grid mismatch");
    const RealField gstar = -1.0 * g.projected_mean_zero(); // per-mode steady state
    WavePair dev(pair.n - gstar, pair.mu);
    WavePair evolved = apply_semigroup(alpha, tau, dev);
    return WavePair(evolved.n + gstar, std::move(evolved.mu));
}

TimeIntegral time_integral_norm(double alpha, const WavePair& pair, int k,
                                int l, int component, double t_max,
                                double quad_tol) {
    if (alpha <= 0.0)
        throw std::invalid_argument("time_integral_norm: non-integrable");
    if (component != 1 && component != 2)
        throw std::invalid_argument("time_integral_norm: component must be 1 or 2");
    if (std::exp(-0.5 * alpha * t_max) > quad_tol)
        throw std::invalid_argument("time_integral_norm: t_max too small for quad_tol");

    const SpectralGrid& grid = pair.n.grid();
    auto cn = pair.n.spectrum();
    auto cm = pair.mu.spectrum();
    cn[0] = cm[0] = cplx{0.0, 0.0}; // integrability needs mean-zero data

    // Panel width resolves the fastest per-mode oscillation 2*xi_max.
    const double xi_max = std::fabs(grid.wavenumber(grid.nyquist_bin()));
    const int panels = std::max(
        16, static_cast<int>(std::ceil(t_max * (2.0 * xi_max + alpha) / 3.0)));
    CompositeGauss quad(t_max, panels);

    double initial_sq = 0.0; // for the truncation estimate
    for (int j = 0; j < grid.size(); ++j)
        initial_sq += std::norm(cn[j]) + std::norm(cm[j]);

    const double value = quad.integrate([&](double t) {
        double acc = 0.0;
        for (int j = 0; j < grid.size(); ++j) {
            const double kap = grid.wavenumber(j);
            const Mat2 m = semigroup_multiplier(alpha, kap, t);
            const cplx comp = (component == 1)
                                  ? m.a11 * cn[j] + m.a12 * cm[j]
                                  : m.a21 * cn[j] + m.a22 * cm[j];
            const double k2 = kap * kap;
            double w2 = std::pow(1.0 + k2, k); // H^k weight
            if (kap != 0.0)
                w2 += std::pow(k2, -l); // homogeneous H^-l part
            else if (l == 0)
                w2 += 1.0;
            acc += w2 * std::norm(comp);
        }
        return grid.length() * acc;
    });

    TimeIntegral out;
    out.value = value;
    // contraction makes the tail integrand decay at least like e^{-alpha t}
    // times a bounded multiple of the initial weighted mass
    out.truncation_bound =
        grid.length() * initial_sq * std::exp(-alpha * t_max) / alpha;
    return out;
}

} // namespace zk
