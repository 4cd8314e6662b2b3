#include "zk/ou_driver.hpp"

#include "zk/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace zk {

ModeCovariance lyapunov_covariance(double alpha, double lambda, double xi) {
    if (xi == 0.0)
        throw std::invalid_argument("lyapunov_covariance: no stationary measure at xi = 0");
    if (alpha <= 0.0)
        throw std::invalid_argument("lyapunov_covariance: alpha must be > 0");
    if (lambda == 0.0) return {};
    // A S + S A^T + diag(0, lambda^2) = 0 for S = [[a, c], [c, b]]:
    //   2c = 0
    //   -xi^2 a + b - alpha c = 0
    //   -2 alpha b - 2 xi^2 c = -lambda^2
    const double q = lambda * lambda;
    double m[3][4] = {
        {0.0, 0.0, 2.0, 0.0},
        {-xi * xi, 1.0, -alpha, 0.0},
        {0.0, -2.0 * alpha, -2.0 * xi * xi, -q},
    };
    // tiny Gaussian elimination with partial pivoting
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
        std::swap(m[piv], m[col]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = m[r][col] / m[col][col];
            for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
        }
    }
    ModeCovariance out;
    out.var_z = m[0][3] / m[0][0];
    out.var_zeta = m[1][3] / m[1][1];
    out.cov = m[2][3] / m[2][2];
    return out;
}

double kernel_K1(double alpha, double xi, double eta) {
    if (eta == 0.0) throw std::invalid_argument("kernel_K1: eta must be nonzero");
    const double d2 = xi * xi - eta * eta;
    const double den = d2 * d2 + 2.0 * alpha * alpha * (xi * xi + eta * eta);
    return -(1.0 / (eta * eta)) * (2.0 * alpha / den);
}

double kernel_K2(double alpha, double xi, double eta) {
    if (eta == 0.0) throw std::invalid_argument("kernel_K2: eta must be nonzero");
    const double d2 = xi * xi - eta * eta;
    const double den = d2 * d2 + 2.0 * alpha * alpha * (xi * xi + eta * eta);
    return -(1.0 / (eta * eta)) * ((alpha * alpha + d2) / den);
}

OuDriver::OuDriver(const NoiseOperator& phi, double alpha, int n_sub)
    : phi_(&phi), alpha_(alpha), n_sub_(n_sub) {
    if (alpha < 0.0) throw std::invalid_argument("OuDriver: alpha must be >= 0");
    t_max_ = (alpha > 0.0) ? 40.0 / alpha : 0.0;
}

int OuDriver::substeps_for(double duration) const {
    if (n_sub_ > 0) return n_sub_;
    const SpectralGrid& g = grid();
    const double xi_max = std::fabs(g.wavenumber(g.nyquist_bin()));
    double dt_max = 0.5 / xi_max; // resolve the fastest rotation
    if (alpha_ > 0.0)
        dt_max = std::min(dt_max, 0.8 * alpha_ / (xi_max * xi_max));
    else if (duration > 0.0)
        dt_max = std::min(dt_max, 0.02 / (xi_max * xi_max * duration));
    return std::max(1, static_cast<int>(std::ceil(duration / dt_max)));
}

DriverState OuDriver::zero_state(DriverMode mode) const {
    DriverState s;
    s.z.assign(phi_->mode_count(), 0.0);
    s.zeta.assign(phi_->mode_count(), 0.0);
    s.mode = mode;
    return s;
}

DriverState OuDriver::sample_stationary(GaussianStream& rng) const {
    if (alpha_ <= 0.0)
        throw std::invalid_argument("sample_stationary: alpha must be > 0");
    DriverState s = zero_state(DriverMode::exact_gaussian);
    const auto& modes = phi_->modes();
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (modes[i].lambda == 0.0) continue;
        const ModeCovariance cov =
            lyapunov_covariance(alpha_, modes[i].lambda, modes[i].kappa);
        // Cholesky of [[var_z, cov], [cov, var_zeta]]
        const double l11 = std::sqrt(std::max(cov.var_z, 0.0));
        const double l21 = (l11 > 0.0) ? cov.cov / l11 : 0.0;
        const double l22 =
            std::sqrt(std::max(cov.var_zeta - l21 * l21, 0.0));
        const double g1 = rng.next(), g2 = rng.next();
        s.z[i] = l11 * g1;
        s.zeta[i] = l21 * g1 + l22 * g2;
    }
    return s;
}

void OuDriver::em_substep(DriverState& s, double dt_sub,
                          std::span<const double> block,
                          double noise_scale) const {
    const auto& modes = phi_->modes();
    if (block.size() != modes.size())
        throw std::invalid_argument("OuDriver: increment length mismatch");
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const double kap = modes[i].kappa;
        const double z0 = s.z[i], w0 = s.zeta[i];
        s.z[i] = z0 + dt_sub * w0;
        s.zeta[i] = w0 + dt_sub * (-alpha_ * w0 - kap * kap * z0) +
                    modes[i].lambda * noise_scale * block[i];
    }
}

void OuDriver::advance(DriverState& s, double dt,
                       std::span<const std::vector<double>> increments) const {
    if (increments.empty())
        throw std::invalid_argument("OuDriver::advance: no increment blocks");
    const double dt_sub = dt / increments.size();
    for (const auto& block : increments) em_substep(s, dt_sub, block, 1.0);
    s.time += dt;
    s.mode = DriverMode::coupled_em;
}

void OuDriver::advance(DriverState& s, double dt, GaussianStream& rng) const {
    const auto& modes = phi_->modes();
    // exact linear flow
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const Mat2 m = semigroup_multiplier(alpha_, modes[i].kappa, dt);
        const double z0 = s.z[i], w0 = s.zeta[i];
        s.z[i] = m.a11 * z0 + m.a12 * w0;
        s.zeta[i] = m.a21 * z0 + m.a22 * w0;
    }
    // stochastic convolution covariance by quadrature, cached per dt
    if (step_cov_dt_ != dt || !step_cov_) {
        const SpectralGrid& g = grid();
        const double xi_max = std::fabs(g.wavenumber(g.nyquist_bin()));
        const int panels = std::max(
            4, static_cast<int>(std::ceil(dt * (2.0 * xi_max + alpha_) / 3.0)));
        CompositeGauss quad(dt, panels);
        auto cov = std::make_shared<std::vector<ModeCovariance>>(modes.size());
        for (std::size_t i = 0; i < modes.size(); ++i) {
            const double lam = modes[i].lambda;
            if (lam == 0.0) continue;
            const double kap = modes[i].kappa;
            ModeCovariance c;
            c.var_z = quad.integrate([&](double t) {
                const Mat2 m = semigroup_multiplier(alpha_, kap, t);
                return lam * lam * m.a12 * m.a12;
            });
            c.cov = quad.integrate([&](double t) {
                const Mat2 m = semigroup_multiplier(alpha_, kap, t);
                return lam * lam * m.a12 * m.a22;
            });
            c.var_zeta = quad.integrate([&](double t) {
                const Mat2 m = semigroup_multiplier(alpha_, kap, t);
                return lam * lam * m.a22 * m.a22;
            });
            (*cov)[i] = c;
        }
        step_cov_ = std::move(cov);
        step_cov_dt_ = dt;
    }
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (modes[i].lambda == 0.0) continue;
        const ModeCovariance& c = (*step_cov_)[i];
        const double l11 = std::sqrt(std::max(c.var_z, 0.0));
        const double l21 = (l11 > 0.0) ? c.cov / l11 : 0.0;
        const double l22 = std::sqrt(std::max(c.var_zeta - l21 * l21, 0.0));
        const double g1 = rng.next(), g2 = rng.next();
        s.z[i] += l11 * g1;
        s.zeta[i] += l21 * g1 + l22 * g2;
    }
    s.time += dt;
    s.mode = DriverMode::exact_gaussian;
}

void OuDriver::advance_rescaled(
    double eps, DriverState& s, double dt,
    std::span<const std::vector<double>> increments) const {
    if (eps <= 0.0)
        throw std::invalid_argument("advance_rescaled: eps must be > 0");
    if (increments.empty())
        throw std::invalid_argument("advance_rescaled: no increment blocks");
    const double tau = dt / eps;
    const double dt_sub = tau / increments.size();
    const double scale = 1.0 / std::sqrt(eps);
    for (const auto& block : increments) em_substep(s, dt_sub, block, scale);
    s.time += dt;
    s.mode = DriverMode::coupled_em;
}

void OuDriver::advance_rescaled(double eps, DriverState& s, double dt,
                                GaussianStream& rng) const {
    if (eps <= 0.0)
        throw std::invalid_argument("advance_rescaled: eps must be > 0");
    const double t0 = s.time;
    advance(s, dt / eps, rng);
    s.time = t0 + dt;
}

namespace {

// spectrum accumulation of sum coef_i * basis_i
std::vector<cplx> trig_synthesis(const NoiseOperator& phi,
                                 std::span<const double> coef) {
    const SpectralGrid& g = phi.grid();
    const int n = g.size();
    std::vector<cplx> c(n, cplx{0.0, 0.0});
    const double amp = std::sqrt(2.0 / g.length());
    const auto& modes = phi.modes();
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const double w = amp * coef[i] * 0.5;
        if (w == 0.0) continue;
        const int jp = modes[i].k, jm = n - modes[i].k;
        if (!modes[i].is_sin) {
            c[jp] += cplx{w, 0.0};
            c[jm] += cplx{w, 0.0};
        } else {
            c[jp] += cplx{0.0, -w};
            c[jm] += cplx{0.0, w};
        }
    }
    return c;
}

} // namespace

RealField OuDriver::z_field(const DriverState& s) const {
    return RealField::from_spectrum(grid(), trig_synthesis(*phi_, s.z));
}

RealField OuDriver::zeta_field(const DriverState& s) const {
    return RealField::from_spectrum(grid(), trig_synthesis(*phi_, s.zeta));
}

RealField OuDriver::field_from_coefficients(std::span<const double> coef) const {
    return RealField::from_spectrum(grid(), trig_synthesis(*phi_, coef));
}

RealField OuDriver::minverse_z(const DriverState& s) const {
    const auto& modes = phi_->modes();
    std::vector<double> coef(modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const double k2 = modes[i].kappa * modes[i].kappa;
        coef[i] = -(s.zeta[i] + alpha_ * s.z[i]) / k2;
    }
    return RealField::from_spectrum(grid(), trig_synthesis(*phi_, coef));
}

// ---------------------------------------------------------------------------
// M^{-1} of the quadratic functional

namespace {

// (dx^d e)(x) . [(dxx)^{-1} dx^d e](x) = -k^{2d-2}/L . (1 + sigma cos 2kx)
// with sigma = +1 when the mode kind matches the derivative parity.
struct SelfProduct {
    double scale; // the x-independent factor, sign included
    double sigma; // sign of the cos(2 kappa x) part
};

SelfProduct basis_self_product(const NoiseMode& m, double L, int d) {
    const double k2 = m.kappa * m.kappa;
    const double scale = (d == 0) ? -1.0 / (k2 * L) : -1.0 / L;
    const double sigma = (m.is_sin == (d == 1)) ? 1.0 : -1.0;
    return {scale, sigma};
}

} // namespace

struct OuDriver::TailTable {
    // int_0^{tmax} T_d(t, x_j) dt: the doubly time-integrated covariance tail
    std::vector<double> integrated;
};

const OuDriver::TailTable& OuDriver::tail_table(int derivative) const {
    if (tail_[derivative]) return *tail_[derivative];
    if (alpha_ <= 0.0)
        throw std::invalid_argument("minverse_quadratic: alpha must be > 0");
    const SpectralGrid& g = grid();
    const auto& modes = phi_->modes();

    // modes that matter for the covariance tail
    double max_rel = 0.0;
    for (const auto& m : modes) max_rel = std::max(max_rel, m.lambda * m.lambda);
    double kappa_cut = 0.0;
    for (const auto& m : modes)
        if (max_rel > 0.0 && m.lambda * m.lambda > 1e-14 * max_rel)
            kappa_cut = std::max(kappa_cut, m.kappa);

    const int panels = std::max(
        24, static_cast<int>(std::ceil(t_max_ * (2.0 * kappa_cut + alpha_) / 3.0)));
    CompositeGauss quad(t_max_, panels);
    const auto& w = quad.weights();

    auto table = std::make_shared<TailTable>();
    table->integrated.assign(g.size(), 0.0);

    for (const auto& m : modes) {
        const double lam2 = m.lambda * m.lambda;
        if (max_rel == 0.0 || lam2 <= 1e-14 * max_rel) continue;
        // suffix integrals of m12 m22 + alpha m12^2 at the outer nodes, then
        // the outer quadrature: int_0^{tmax} int_t^{tmax} f(s) ds dt
        auto suffix = quad.suffix_integrals([&](double s) {
            const Mat2 mm = semigroup_multiplier(alpha_, m.kappa, s);
            return mm.a12 * mm.a22 + alpha_ * mm.a12 * mm.a12;
        });
        double dbl = 0.0;
        for (std::size_t i = 0; i < suffix.size(); ++i) dbl += w[i] * suffix[i];

        const SelfProduct sp = basis_self_product(m, g.length(), derivative);
        const double amp = lam2 * sp.scale * dbl;
        for (int j = 0; j < g.size(); ++j)
            table->integrated[j] +=
                amp * (1.0 + sp.sigma * std::cos(2.0 * m.kappa * g.node(j)));
    }
    tail_[derivative] = table;
    return *tail_[derivative];
}

RealField OuDriver::minverse_quadratic(const DriverState& s,
                                       int derivative) const {
    if (alpha_ <= 0.0)
        throw std::invalid_argument("minverse_quadratic: alpha must be > 0");
    if (derivative != 0 && derivative != 1)
        throw std::invalid_argument("minverse_quadratic: derivative must be 0 or 1");
    const SpectralGrid& g = grid();
    const auto& modes = phi_->modes();
    const int n = g.size();

    // modes that matter for the state product term
    double rmax = 0.0;
    std::vector<double> rel(modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i) {
        rel[i] = std::fabs(s.z[i]) + std::fabs(s.zeta[i]);
        rmax = std::max(rmax, rel[i]);
    }
    double kappa_p = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i)
        if (rmax > 0.0 && rel[i] > 1e-7 * rmax)
            kappa_p = std::max(kappa_p, modes[i].kappa);

    std::vector<double> product_int(n, 0.0);
    if (rmax > 0.0) {
        const int panels = std::max(
            24,
            static_cast<int>(std::ceil(t_max_ * (2.0 * kappa_p + alpha_) / 3.0)));
        CompositeGauss quad(t_max_, panels);
        const double amp = std::sqrt(2.0 / g.length());

        std::vector<cplx> s1(n), s2(n), s3(n), f1(n), f2(n), f3(n);
        for (std::size_t qi = 0; qi < quad.size(); ++qi) {
            const double t = quad.nodes()[qi];
            const double wq = quad.weights()[qi];
            std::fill(s1.begin(), s1.end(), cplx{0.0, 0.0});
            std::fill(s2.begin(), s2.end(), cplx{0.0, 0.0});
            for (std::size_t i = 0; i < modes.size(); ++i) {
                if (rmax == 0.0 || rel[i] <= 1e-7 * rmax) continue;
                const NoiseMode& m = modes[i];
                const Mat2 mm = semigroup_multiplier(alpha_, m.kappa, t);
                const double a = mm.a11 * s.z[i] + mm.a12 * s.zeta[i];
                const double b = mm.a21 * s.z[i] + mm.a22 * s.zeta[i];
                const int jp = m.k, jm = n - m.k;
                const double wa = amp * a * 0.5, wb = amp * b * 0.5;
                if (!m.is_sin) {
                    s1[jp] += cplx{wa, 0.0};
                    s1[jm] += cplx{wa, 0.0};
                    s2[jp] += cplx{wb, 0.0};
                    s2[jm] += cplx{wb, 0.0};
                } else {
                    s1[jp] += cplx{0.0, -wa};
                    s1[jm] += cplx{0.0, wa};
                    s2[jp] += cplx{0.0, -wb};
                    s2[jm] += cplx{0.0, wb};
                }
            }
            // F1 = dx^d (.)_1 ; F2 = (dxx)^{-1} dx^d (.)_2 ; F3 likewise on (.)_1
            for (int j = 0; j < n; ++j) {
                const double k = g.wavenumber(j);
                const cplx dsym = (derivative == 0) ? cplx{1.0, 0.0} : cplx{0.0, k};
                const cplx isym =
                    (k == 0.0) ? cplx{0.0, 0.0} : cplx{-1.0 / (k * k), 0.0};
                s3[j] = s1[j] * dsym * isym;
                s1[j] = s1[j] * dsym;
                s2[j] = s2[j] * dsym * isym;
            }
            g.inverse(s1, f1);
            g.inverse(s2, f2);
            g.inverse(s3, f3);
            for (int j = 0; j < n; ++j) {
                const double v1 = f1[j].real();
                product_int[j] += wq * (v1 * f2[j].real() + alpha_ * v1 * f3[j].real());
            }
        }
    }

    const TailTable& tt = tail_table(derivative);
    std::vector<double> out(n);
    for (int j = 0; j < n; ++j) out[j] = -product_int[j] + tt.integrated[j];
    return RealField::from_physical(g, std::move(out));
}

RealField OuDriver::stationary_product_mean(int derivative) const {
    if (alpha_ <= 0.0)
        throw std::invalid_argument("stationary_product_mean: alpha must be > 0");
    const SpectralGrid& g = grid();
    const auto& modes = phi_->modes();
    std::vector<double> v(g.size(), 0.0);
    for (const auto& m : modes) {
        if (m.lambda == 0.0) continue;
        const ModeCovariance cov = lyapunov_covariance(alpha_, m.lambda, m.kappa);
        const SelfProduct sp = basis_self_product(m, g.length(), derivative);
        const double amp = (cov.cov + alpha_ * cov.var_z) * sp.scale;
        for (int j = 0; j < g.size(); ++j)
            v[j] += amp * (1.0 + sp.sigma * std::cos(2.0 * m.kappa * g.node(j)));
    }
    return RealField::from_physical(g, std::move(v));
}

RealField OuDriver::compute_F() const {
    const SpectralGrid& g = grid();
    const auto& modes = phi_->modes();
    std::vector<double> v(g.size(), 0.0);
    const double amp2 = 2.0 / g.length();
    for (const auto& m : modes) {
        if (m.lambda == 0.0) continue;
        const double c = m.lambda * m.lambda / std::pow(m.kappa, 4);
        for (int j = 0; j < g.size(); ++j) {
            const double x = g.node(j);
            const double e = m.is_sin ? std::sin(m.kappa * x) : std::cos(m.kappa * x);
            v[j] += c * amp2 * e * e;
        }
    }
    return RealField::from_physical(g, std::move(v));
}

double OuDriver::kernel_k(double x, double y) const {
    const auto& modes = phi_->modes();
    const double amp2 = 2.0 / grid().length();
    double acc = 0.0;
    for (const auto& m : modes) {
        if (m.lambda == 0.0) continue;
        const double c = m.lambda * m.lambda / std::pow(m.kappa, 4);
        const double ex = m.is_sin ? std::sin(m.kappa * x) : std::cos(m.kappa * x);
        const double ey = m.is_sin ? std::sin(m.kappa * y) : std::cos(m.kappa * y);
        acc += (-c * amp2) * (ex * ey); // grouping keeps k(x,y) = k(y,x) exact
    }
    return acc;
}

double OuDriver::intersection_norm(std::span<const double> coef,
                                   double s) const {
    const auto& modes = phi_->modes();
    double acc = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const double k2 = modes[i].kappa * modes[i].kappa;
        const double w2 = std::pow(1.0 + k2, s) + std::pow(k2, -s);
        acc += w2 * coef[i] * coef[i];
    }
    return std::sqrt(acc);
}

double OuDriver::truncation_bound() const {
    return std::exp(-alpha_ * t_max_);
}

GrowthMonitor::GrowthMonitor(double delta_, double epsilon_)
    : delta(delta_), epsilon(epsilon_) {
    if (delta <= 0.0 || delta > 0.125)
        throw std::invalid_argument("GrowthMonitor: delta must be in (0, 1/8]");
    threshold = std::pow(epsilon, -delta);
}

bool GrowthMonitor::check(const OuDriver& driver, const DriverState& s) {
    if (tripped_at) return true;
    const double norm =
        driver.intersection_norm(s.z, 3.0) + driver.intersection_norm(s.zeta, 3.0);
    if (norm >= threshold) tripped_at = s.time;
    return tripped_at.has_value();
}

} // namespace zk
