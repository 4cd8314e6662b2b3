#include "zk/zakharov.hpp"

#include <cmath>
#include <stdexcept>

namespace zk {

InitialData initial_data(const SpectralGrid& grid,
                         const InitialProfile& profile) {
    const double L = grid.length();
    const double x0 = profile.x0 >= 0.0 ? profile.x0 : 0.5 * L;
    auto pulse = [&](double x) -> cplx {
        // distance to the pulse center measured around the torus
        double d = x - x0;
        d -= L * std::round(d / L);
        double env;
        if (profile.kind == InitialProfile::Kind::sech)
            env = profile.amplitude / std::cosh(d);
        else
            env = profile.amplitude *
                  std::exp(-d * d / (2.0 * profile.sigma * profile.sigma));
        return env * std::exp(cplx{0.0, profile.velocity * d});
    };
    InitialData out;
    out.u0 = ComplexField::sample(grid, pulse);

    // validity: the pulse must be numerically supported away from the seam
    double tail = 0.0;
    if (profile.amplitude != 0.0) {
        const double half = 0.5 * L;
        if (profile.kind == InitialProfile::Kind::sech)
            tail = std::fabs(profile.amplitude) / std::cosh(half);
        else
            tail = std::fabs(profile.amplitude) *
                   std::exp(-half * half / (2.0 * profile.sigma * profile.sigma));
        if (tail > 1e-6 * std::fabs(profile.amplitude))
            throw std::invalid_argument(
                "initial_data: profile support exceeds domain validity threshold");
    }

    std::vector<double> m0v(grid.size());
    for (int j = 0; j < grid.size(); ++j)
        m0v[j] = -std::norm(out.u0.values()[j]);
    out.m0 = RealField::from_physical(grid, std::move(m0v)).projected_mean_zero();
    out.m1 = RealField(grid);
    return out;
}

ZakharovSim::ZakharovSim(const NoiseOperator& phi, const Params& p)
    : phi_(&phi), params_(p),
      alpha_eff_(p.alpha * std::pow(p.epsilon, p.gamma - 1.0)),
      n_sub_(0), driver_(phi, alpha_eff_) {
    if (p.epsilon <= 0.0)
        throw std::invalid_argument("ZakharovSim: epsilon must be > 0");
    if (p.dt <= 0.0) throw std::invalid_argument("ZakharovSim: dt must be > 0");
    n_sub_ = (p.n_sub > 0) ? p.n_sub
                           : driver_.substeps_for(0.5 * p.dt / p.epsilon);
}

ZakharovState ZakharovSim::initial_state(const InitialData& data) const {
    ZakharovState s;
    s.u = data.u0;
    s.m = data.m0.projected_mean_zero();
    s.mu = data.m1.projected_mean_zero();
    s.driver = driver_.zero_state(DriverMode::coupled_em);
    s.epsilon = params_.epsilon;
    s.time = 0.0;
    return s;
}

namespace {

void check_finite(const ComplexField& u) {
    for (const auto& v : u.values())
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::runtime_error("blow-up suspected: non-finite field values");
}

} // namespace

void ZakharovSim::core_step(ZakharovState& s) const {
    const double dt = params_.dt;
    const double eps = params_.epsilon;
    const double inv_sqrt_eps = 1.0 / std::sqrt(eps);

    // L(dt/2): exact free flow, spectral phase e^{-i k^2 dt/2}
    ComplexField u = s.u.spectral();
    for (int j = 0; j < u.grid().size(); ++j) {
        const double k = u.grid().wavenumber(j);
        u.values()[j] *= std::exp(cplx{0.0, -k * k * dt * 0.5});
    }
    u = u.physical();

    // V(dt/2): pointwise phase with the current m and the midpoint driver
    const RealField zfield = driver_.z_field(s.driver);
    {
        const auto& mv = s.m.physical();
        const auto& zv = zfield.physical();
        for (int j = 0; j < u.grid().size(); ++j) {
            const double pot = mv[j] + inv_sqrt_eps * zv[j];
            u.values()[j] *= std::exp(cplx{0.0, -pot * dt * 0.5});
        }
    }

    // W(dt): forced wave step in rescaled time tau = dt/eps with g = |u|^2
    {
        std::vector<double> g(u.grid().size());
        for (int j = 0; j < u.grid().size(); ++j) g[j] = std::norm(u.values()[j]);
        RealField source = RealField::from_physical(u.grid(), std::move(g));
        WavePair pair(s.m, eps * s.mu); // mu_tau = eps * mu_phys
        pair = forced_step(alpha_eff_, dt / eps, pair, source);
        s.m = std::move(pair.n);
        s.mu = (1.0 / eps) * pair.mu;
    }

    // V(dt/2) with the updated m, same driver midpoint
    {
        const auto& mv = s.m.physical();
        const auto& zv = zfield.physical();
        for (int j = 0; j < u.grid().size(); ++j) {
            const double pot = mv[j] + inv_sqrt_eps * zv[j];
            u.values()[j] *= std::exp(cplx{0.0, -pot * dt * 0.5});
        }
    }

    // L(dt/2)
    u = u.spectral();
    for (int j = 0; j < u.grid().size(); ++j) {
        const double k = u.grid().wavenumber(j);
        u.values()[j] *= std::exp(cplx{0.0, -k * k * dt * 0.5});
    }
    s.u = u.physical();
    check_finite(s.u);
    s.time += dt;
}

void ZakharovSim::strang_step(
    ZakharovState& s, std::span<const std::vector<double>> increments) const {
    if (static_cast<int>(increments.size()) != 2 * n_sub_)
        throw std::invalid_argument("strang_step: driver increment mismatch");
    driver_.advance_rescaled(params_.epsilon, s.driver, 0.5 * params_.dt,
                             increments.subspan(0, n_sub_));
    core_step(s);
    driver_.advance_rescaled(params_.epsilon, s.driver, 0.5 * params_.dt,
                             increments.subspan(n_sub_, n_sub_));
}

void ZakharovSim::strang_step(ZakharovState& s, GaussianStream& rng) const {
    driver_.advance_rescaled(params_.epsilon, s.driver, 0.5 * params_.dt, rng);
    core_step(s);
    driver_.advance_rescaled(params_.epsilon, s.driver, 0.5 * params_.dt, rng);
}

RealField ZakharovSim::reconstruct_n(const ZakharovState& s) const {
    return s.m + (1.0 / std::sqrt(params_.epsilon)) * driver_.z_field(s.driver);
}

} // namespace zk
