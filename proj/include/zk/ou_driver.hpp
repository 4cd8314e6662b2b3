#pragma once

#include "zk/damped_wave.hpp"
#include "zk/noise.hpp"
#include "zk/rng.hpp"
#include "zk/spectral.hpp"

#include <optional>
#include <span>
#include <vector>

namespace zk {

enum class DriverMode { coupled_em, exact_gaussian };

// Driving damped-wave Ornstein-Uhlenbeck process (z, zeta), stored as
// coefficients on the noise operator's trigonometric mode list.
struct DriverState {
    std::vector<double> z;
    std::vector<double> zeta;
    double time = 0.0;
    DriverMode mode = DriverMode::exact_gaussian;
};

struct ModeCovariance {
    double var_z = 0.0;
    double var_zeta = 0.0;
    double cov = 0.0;
};

// Stationary covariance of the per-mode system
// d(z, zeta) = A (z, zeta) dt + (0, lambda) dbeta, A = [[0,1],[-xi^2,-alpha]],
// obtained by solving the 3x3 Lyapunov system A S + S A^T + diag(0, lambda^2) = 0.
ModeCovariance lyapunov_covariance(double alpha, double lambda, double xi);

// Invariant-measure kernels, Fourier side.
double kernel_K1(double alpha, double xi, double eta);
double kernel_K2(double alpha, double xi, double eta);

class OuDriver {
public:
    // n_sub = 0 picks the substep count from the explicit-EM stability bound.
    OuDriver(const NoiseOperator& phi, double alpha, int n_sub = 0);

    const NoiseOperator& phi() const { return *phi_; }
    const SpectralGrid& grid() const { return phi_->grid(); }
    double alpha() const { return alpha_; }
    int substeps_for(double duration) const;

    DriverState zero_state(DriverMode mode) const;
    DriverState sample_stationary(GaussianStream& rng) const;

    // coupled_em: consumes one externally supplied white-increment block per
    // substep (each block one N(0, dt/n) coefficient per mode).
    void advance(DriverState& s, double dt,
                 std::span<const std::vector<double>> increments) const;
    // exact_gaussian: semigroup plus stochastic-convolution Gaussian with
    // quadrature covariance.
    void advance(DriverState& s, double dt, GaussianStream& rng) const;

    // Rescaled process over physical duration dt: duration dt/eps in the
    // driver's own time, raw increments scaled by 1/sqrt(eps).
    void advance_rescaled(double eps, DriverState& s, double dt,
                          std::span<const std::vector<double>> increments) const;
    void advance_rescaled(double eps, DriverState& s, double dt,
                          GaussianStream& rng) const;

    RealField z_field(const DriverState& s) const;
    RealField zeta_field(const DriverState& s) const;
    RealField field_from_coefficients(std::span<const double> coef) const;

    // M^{-1} z = (dxx)^{-1} zeta + alpha (dxx)^{-1} z
    RealField minverse_z(const DriverState& s) const;

    // M^{-1}( dx^d z . dx^d M^{-1} z - E_nu[...] ) through the double
    // time-integral representation; outer quadrature over [0, t_max] with the
    // e^{-alpha t} truncation envelope reported via truncation_bound().
    RealField minverse_quadratic(const DriverState& s, int derivative) const;
    double quadrature_t_max() const { return t_max_; }
    double truncation_bound() const;

    // E_nu[dx^d z . dx^d M^{-1} z], a fixed field (constant for paired
    // cos/sin multipliers).
    RealField stationary_product_mean(int derivative) const;

    RealField compute_F() const;
    double kernel_k(double x, double y) const;

    // sqrt( ||.||_{H^s}^2 + ||.||_{Hdot^{-s}}^2 ) of a coefficient vector.
    double intersection_norm(std::span<const double> coef, double s) const;

    void set_t_max(double t_max) { t_max_ = t_max; }

private:
    struct TailTable; // per-(derivative) cached time-integrated covariance

    const NoiseOperator* phi_;
    double alpha_;
    int n_sub_;
    double t_max_;
    mutable std::shared_ptr<const TailTable> tail_[2];
    mutable std::shared_ptr<const std::vector<ModeCovariance>> step_cov_;
    mutable double step_cov_dt_ = -1.0;

    const TailTable& tail_table(int derivative) const;
    void em_substep(DriverState& s, double dt_sub,
                    std::span<const double> block, double noise_scale) const;
};

// Stopping-time monitor: trips when
// ||z||_{H^3 cap Hdot^-3} + ||zeta||_{H^3 cap Hdot^-3} >= eps^{-delta}.
struct GrowthMonitor {
    double delta = 0.125;
    double epsilon = 1.0;
    double threshold = 1.0;
    std::optional<double> tripped_at;

    GrowthMonitor() = default;
    GrowthMonitor(double delta_, double epsilon_);

    bool check(const OuDriver& driver, const DriverState& s);
    bool tripped() const { return tripped_at.has_value(); }
};

} // namespace zk
