#include "zk/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

namespace zk {

double mass(const ComplexField& u) {
    return std::pow(sobolev_norm(u, 0.0, NormKind::inhomogeneous), 2);
}

namespace {

// |u|^2 as a dealiased real field
RealField intensity(const ComplexField& u) {
    const ComplexField up = u.physical();
    std::vector<double> v(u.grid().size());
    for (int j = 0; j < u.grid().size(); ++j) v[j] = std::norm(up.values()[j]);
    return dealias(RealField::from_physical(u.grid(), std::move(v)));
}

RealField v_field(const RealField& mu) {
    return -1.0 * apply_symbol(mu, symbol_antiderivative, ZeroModePolicy::project);
}

// Re(i u dx(conj u)) as a dealiased real field
RealField momentum_density(const ComplexField& u) {
    const ComplexField up = u.physical();
    const ComplexField ux =
        apply_symbol(u, symbol_derivative, ZeroModePolicy::identity).physical();
    std::vector<double> v(u.grid().size());
    for (int j = 0; j < u.grid().size(); ++j) {
        const cplx val = cplx{0.0, 1.0} * up.values()[j] * std::conj(ux.values()[j]);
        v[j] = val.real();
    }
    return dealias(RealField::from_physical(u.grid(), std::move(v)));
}

} // namespace

double hamiltonian(const ComplexField& u, const RealField& m,
                   const RealField& mu, double eps) {
    const double gradu2 =
        std::pow(sobolev_norm(u, 1.0, NormKind::homogeneous), 2);
    const double m2 = std::pow(sobolev_norm(m, 0.0, NormKind::inhomogeneous), 2);
    const RealField V = v_field(mu);
    const double epsV2 =
        eps * eps * std::pow(sobolev_norm(V, 0.0, NormKind::inhomogeneous), 2);
    const double coupling = integral_product(dealias(m), intensity(u));
    return gradu2 + 0.5 * (m2 + epsV2) + coupling;
}

double quadratic_energy(const ComplexField& u, const RealField& m,
                        const RealField& mu, double eps) {
    const double gradu2 =
        std::pow(sobolev_norm(u, 1.0, NormKind::homogeneous), 2);
    const double m2 = std::pow(sobolev_norm(m, 0.0, NormKind::inhomogeneous), 2);
    const RealField V = v_field(mu);
    const double epsV2 =
        eps * eps * std::pow(sobolev_norm(V, 0.0, NormKind::inhomogeneous), 2);
    return gradu2 + 0.5 * m2 + 0.5 * epsV2;
}

double corrector_H1(const ComplexField& u, const OuDriver& driver,
                    const DriverState& rescaled) {
    // w = dx^{-1} zeta + alpha dx^{-1} z
    const auto& modes = driver.phi().modes();
    std::vector<double> coef(modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i)
        coef[i] = rescaled.zeta[i] + driver.alpha() * rescaled.z[i];
    const RealField w =
        apply_symbol(driver.field_from_coefficients(coef), symbol_antiderivative,
                     ZeroModePolicy::project);
    return 2.0 * integral_product(momentum_density(u), w);
}

double corrector_H2(const ComplexField& u, const OuDriver& driver,
                    const DriverState& rescaled) {
    const RealField phi2 = driver.minverse_quadratic(rescaled, 1);
    return 2.0 * integral_product(intensity(u), phi2);
}

EnergyReport modified_energy(const ComplexField& u, const RealField& m,
                             const RealField& mu, double eps,
                             const OuDriver& driver, const DriverState& rescaled,
                             bool with_correctors) {
    EnergyReport r;
    r.mass = mass(u);
    r.H = hamiltonian(u, m, mu, eps);
    r.K = quadratic_energy(u, m, mu, eps);
    const RealField V = v_field(mu);
    r.V_norm = sobolev_norm(V, 0.0, NormKind::inhomogeneous);
    if (with_correctors) {
        r.H1 = corrector_H1(u, driver, rescaled);
        r.H2 = corrector_H2(u, driver, rescaled);
    }
    r.H_eps = r.H + std::sqrt(eps) * r.H1 + eps * r.H2;
    return r;
}

double martingale_X_increment(const ComplexField& u, const NoiseOperator& phi,
                              std::span<const double> white_increments) {
    if (white_increments.size() != phi.mode_count())
        throw std::invalid_argument("martingale_X_increment: length mismatch");
    // sum_k dx^{-1}(phi e_k) dbeta_k = dx^{-1} (phi dW)
    RealField noise = phi.apply(white_increments);
    RealField anti = apply_symbol(noise, symbol_antiderivative, ZeroModePolicy::project);
    return 2.0 * integral_product(momentum_density(u), anti);
}

GeneratorEval limit_generator(const ComplexField& u, const ComplexField& h,
                              const NoiseOperator& phi) {
    GeneratorEval out;
    // drift functional
    const ComplexField uxx =
        apply_symbol(u, symbol_second_derivative, ZeroModePolicy::identity);
    const ComplexField up = u.physical();
    const ComplexField uxxp = uxx.physical();
    // F from the noise operator: sum lambda^2 / k^4 e_k^2
    const SpectralGrid& g = u.grid();
    std::vector<double> F(g.size(), 0.0);
    const double amp2 = 2.0 / g.length();
    for (const auto& m : phi.modes()) {
        if (m.lambda == 0.0) continue;
        const double c = m.lambda * m.lambda / std::pow(m.kappa, 4);
        for (int j = 0; j < g.size(); ++j) {
            const double e = m.is_sin ? std::sin(m.kappa * g.node(j))
                                      : std::cos(m.kappa * g.node(j));
            F[j] += c * amp2 * e * e;
        }
    }
    std::vector<cplx> drift(g.size());
    for (int j = 0; j < g.size(); ++j) {
        const cplx uj = up.values()[j];
        drift[j] = cplx{0.0, 1.0} * (uxxp.values()[j] + std::norm(uj) * uj) -
                   0.5 * uj * F[j];
    }
    out.drift = inner(ComplexField(g, Rep::physical, std::move(drift)), h);

    // quadratic variation: sum over modes of (i u (dxx)^{-1} phi e_k, h)^2
    const ComplexField hp = h.physical();
    for (const auto& m : phi.modes()) {
        if (m.lambda == 0.0) continue;
        const double c = -m.lambda / (m.kappa * m.kappa);
        const double amp = std::sqrt(amp2);
        double ip = 0.0;
        for (int j = 0; j < g.size(); ++j) {
            const double e = m.is_sin ? std::sin(m.kappa * g.node(j))
                                      : std::cos(m.kappa * g.node(j));
            const cplx val = cplx{0.0, 1.0} * up.values()[j] * (c * amp * e);
            ip += (val * std::conj(hp.values()[j])).real();
        }
        ip *= g.spacing();
        out.quad_var += ip * ip;
    }
    return out;
}

} // namespace zk
