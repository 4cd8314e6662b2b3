#include "zk/nls.hpp"

#include <cmath>
#include <stdexcept>

namespace zk {

NlsSim::NlsSim(const NoiseOperator& phi) : phi_(&phi) {
    // F = sum_k ((dxx)^{-1} phi e_k)^2, assembled from the basis images
    const SpectralGrid& g = phi.grid();
    std::vector<double> F(g.size(), 0.0);
    for (std::size_t m = 0; m < phi.mode_count(); ++m) {
        if (phi.modes()[m].lambda == 0.0) continue;
        const RealField b = apply_symbol(phi.basis_image(m),
                                         symbol_inverse_second_derivative,
                                         ZeroModePolicy::project);
        const auto& bv = b.physical();
        for (int j = 0; j < g.size(); ++j) F[j] += bv[j] * bv[j];
    }
    F_ = RealField::from_physical(g, std::move(F));
}

NlsState NlsSim::initial_state(const ComplexField& u0) const {
    NlsState s;
    s.u = u0.physical();
    s.time = 0.0;
    return s;
}

namespace {

ComplexField free_flow(const ComplexField& u, double t) {
    ComplexField s = u.spectral();
    for (int j = 0; j < s.grid().size(); ++j) {
        const double k = s.grid().wavenumber(j);
        s.values()[j] *= std::exp(cplx{0.0, -k * k * t});
    }
    return s.physical();
}

void check_finite(const ComplexField& u) {
    for (const auto& v : u.values())
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::runtime_error("blow-up suspected: non-finite field values");
}

} // namespace

void NlsSim::stratonovich_step(NlsState& s, double dt,
                               std::span<const double> increments) const {
    if (increments.size() != phi_->mode_count())
        throw std::invalid_argument("stratonovich_step: increment mismatch");
    ComplexField u = free_flow(s.u, 0.5 * dt);

    // nonlinear phase: exact flow of i du = -|u|^2 u dt
    for (auto& v : u.values()) v *= std::exp(cplx{0.0, std::norm(v) * dt});

    // noise phase: exact Stratonovich flow of the noise sub-equation,
    // B = (dxx)^{-1} phi dW is a real field
    const RealField B = apply_symbol(phi_->apply(increments),
                                     symbol_inverse_second_derivative,
                                     ZeroModePolicy::project);
    const auto& bv = B.physical();
    for (int j = 0; j < u.grid().size(); ++j)
        u.values()[j] *= std::exp(cplx{0.0, bv[j]});

    s.u = free_flow(u, 0.5 * dt);
    check_finite(s.u);
    s.time += dt;
}

void NlsSim::ito_em_step(NlsState& s, double dt,
                         std::span<const double> increments) const {
    if (increments.size() != phi_->mode_count())
        throw std::invalid_argument("ito_em_step: increment mismatch");
    // exact linear flow, then explicit drift and Ito increment
    ComplexField u = free_flow(s.u, dt);
    const RealField B = apply_symbol(phi_->apply(increments),
                                     symbol_inverse_second_derivative,
                                     ZeroModePolicy::project);
    const auto& bv = B.physical();
    const auto& Fv = F_.physical();
    for (int j = 0; j < u.grid().size(); ++j) {
        const cplx v = u.values()[j];
        const cplx drift =
            cplx{0.0, 1.0} * std::norm(v) * v - 0.5 * v * Fv[j];
        u.values()[j] = v + dt * drift + cplx{0.0, 1.0} * v * bv[j];
    }
    s.u = std::move(u);
    check_finite(s.u);
    s.time += dt;
}

} // namespace zk
