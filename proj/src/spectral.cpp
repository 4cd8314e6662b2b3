#include "zk/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace zk {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

struct SpectralGrid::Plans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    ~Plans() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }
};

SpectralGrid::SpectralGrid(int num_points, double domain_length)
    : n_(num_points), length_(domain_length), plans_(std::make_unique<Plans>()) {
    if (n_ < 8 || n_ % 2 != 0)
        throw std::invalid_argument("SpectralGrid: N must be even and >= 8");
    if (length_ <= 0.0)
        throw std::invalid_argument("SpectralGrid: L must be positive");
    wavenumbers_.resize(n_);
    for (int j = 0; j < n_; ++j) {
        int signed_j = (j <= n_ / 2 - 1) ? j : j - n_;
        if (j == n_ / 2) signed_j = -n_ / 2;
        wavenumbers_[j] = 2.0 * M_PI * signed_j / length_;
    }
    std::vector<cplx> scratch_in(n_), scratch_out(n_);
    std::lock_guard<std::mutex> lock(planner_mutex());
    plans_->fwd = fftw_plan_dft_1d(
        n_, reinterpret_cast<fftw_complex*>(scratch_in.data()),
        reinterpret_cast<fftw_complex*>(scratch_out.data()), FFTW_FORWARD,
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_->bwd = fftw_plan_dft_1d(
        n_, reinterpret_cast<fftw_complex*>(scratch_in.data()),
        reinterpret_cast<fftw_complex*>(scratch_out.data()), FFTW_BACKWARD,
        FFTW_ESTIMATE | FFTW_UNALIGNED);
}

SpectralGrid::~SpectralGrid() = default;

void SpectralGrid::forward(std::span<const cplx> physical,
                           std::span<cplx> spectral) const {
    fftw_execute_dft(plans_->fwd,
                     reinterpret_cast<fftw_complex*>(
                         const_cast<cplx*>(physical.data())),
                     reinterpret_cast<fftw_complex*>(spectral.data()));
    const double scale = 1.0 / n_;
    for (auto& c : spectral) c *= scale;
}

void SpectralGrid::inverse(std::span<const cplx> spectral,
                           std::span<cplx> physical) const {
    fftw_execute_dft(plans_->bwd,
                     reinterpret_cast<fftw_complex*>(
                         const_cast<cplx*>(spectral.data())),
                     reinterpret_cast<fftw_complex*>(physical.data()));
}

ComplexField::ComplexField(const SpectralGrid& grid, Rep rep,
                           std::vector<cplx> values)
    : grid_(&grid), rep_(rep), v_(std::move(values)) {
    if (static_cast<int>(v_.size()) != grid.size())
        throw std::invalid_argument("ComplexField: size mismatch");
}

ComplexField ComplexField::sample(const SpectralGrid& grid,
                                  const std::function<cplx(double)>& f) {
    std::vector<cplx> v(grid.size());
    for (int j = 0; j < grid.size(); ++j) v[j] = f(grid.node(j));
    return ComplexField(grid, Rep::physical, std::move(v));
}

ComplexField ComplexField::to(Rep target) const {
    if (target == rep_) return *this;
    ComplexField out(*grid_, target);
    if (target == Rep::spectral)
        grid_->forward(v_, out.v_);
    else
        grid_->inverse(v_, out.v_);
    return out;
}

cplx ComplexField::mean() const {
    if (rep_ == Rep::spectral) return v_[0];
    cplx acc{0.0, 0.0};
    for (const auto& x : v_) acc += x;
    return acc / static_cast<double>(v_.size());
}

ComplexField& ComplexField::operator+=(const ComplexField& o) {
    const ComplexField tmp = (o.rep_ == rep_) ? o : o.to(rep_);
    for (size_t i = 0; i < v_.size(); ++i) v_[i] += tmp.v_[i];
    return *this;
}

ComplexField& ComplexField::operator-=(const ComplexField& o) {
    const ComplexField tmp = (o.rep_ == rep_) ? o : o.to(rep_);
    for (size_t i = 0; i < v_.size(); ++i) v_[i] -= tmp.v_[i];
    return *this;
}

ComplexField& ComplexField::operator*=(cplx a) {
    for (auto& x : v_) x *= a;
    return *this;
}

RealField RealField::sample(const SpectralGrid& grid,
                            const std::function<double(double)>& f) {
    std::vector<double> v(grid.size());
    for (int j = 0; j < grid.size(); ++j) v[j] = f(grid.node(j));
    return from_physical(grid, std::move(v));
}

RealField RealField::from_physical(const SpectralGrid& grid,
                                   std::vector<double> v) {
    if (static_cast<int>(v.size()) != grid.size())
        throw std::invalid_argument("RealField: size mismatch");
    RealField f;
    f.grid_ = &grid;
    f.phys_ = std::move(v);
    f.phys_valid_ = true;
    return f;
}

RealField RealField::from_spectrum(const SpectralGrid& grid,
                                   std::vector<cplx> c) {
    if (static_cast<int>(c.size()) != grid.size())
        throw std::invalid_argument("RealField: size mismatch");
    // enforce conjugate symmetry: average c(k) with conj(c(-k))
    const int n = grid.size();
    for (int j = 1; j < n / 2; ++j) {
        cplx a = 0.5 * (c[j] + std::conj(c[n - j]));
        c[j] = a;
        c[n - j] = std::conj(a);
    }
    c[0] = cplx{c[0].real(), 0.0};
    c[n / 2] = cplx{c[n / 2].real(), 0.0};
    RealField f;
    f.grid_ = &grid;
    f.spec_ = std::move(c);
    f.spec_valid_ = true;
    return f;
}

void RealField::ensure_physical() const {
    if (phys_valid_) return;
    std::vector<cplx> tmp(grid_->size());
    grid_->inverse(spec_, tmp);
    phys_.resize(grid_->size());
    for (int j = 0; j < grid_->size(); ++j) phys_[j] = tmp[j].real();
    phys_valid_ = true;
}

void RealField::ensure_spectral() const {
    if (spec_valid_) return;
    std::vector<cplx> tmp(grid_->size());
    for (int j = 0; j < grid_->size(); ++j) tmp[j] = cplx{phys_[j], 0.0};
    spec_.resize(grid_->size());
    grid_->forward(tmp, spec_);
    spec_valid_ = true;
}

const std::vector<double>& RealField::physical() const {
    ensure_physical();
    return phys_;
}

std::vector<cplx> RealField::spectrum() const {
    ensure_spectral();
    return spec_;
}

double RealField::mean() const {
    if (spec_valid_) return spec_[0].real();
    ensure_physical();
    double acc = 0.0;
    for (double x : phys_) acc += x;
    return acc / phys_.size();
}

RealField RealField::projected_mean_zero() const {
    auto c = spectrum();
    c[0] = cplx{0.0, 0.0};
    return from_spectrum(*grid_, std::move(c));
}

ComplexField RealField::as_complex(Rep rep) const {
    if (rep == Rep::physical) {
        ensure_physical();
        std::vector<cplx> v(grid_->size());
        for (int j = 0; j < grid_->size(); ++j) v[j] = cplx{phys_[j], 0.0};
        return ComplexField(*grid_, Rep::physical, std::move(v));
    }
    return ComplexField(*grid_, Rep::spectral, spectrum());
}

RealField& RealField::operator+=(const RealField& o) {
    ensure_physical();
    const auto& ov = o.physical();
    for (size_t i = 0; i < phys_.size(); ++i) phys_[i] += ov[i];
    spec_valid_ = false;
    return *this;
}

RealField& RealField::operator-=(const RealField& o) {
    ensure_physical();
    const auto& ov = o.physical();
    for (size_t i = 0; i < phys_.size(); ++i) phys_[i] -= ov[i];
    spec_valid_ = false;
    return *this;
}

RealField& RealField::operator*=(double a) {
    if (phys_valid_)
        for (auto& x : phys_) x *= a;
    if (spec_valid_)
        for (auto& x : spec_) x *= a;
    return *this;
}

namespace {

std::vector<cplx> apply_symbol_spectrum(const SpectralGrid& grid,
                                        std::vector<cplx> c,
                                        const std::function<cplx(double)>& symbol,
                                        ZeroModePolicy policy) {
    double maxmag = 0.0;
    for (const auto& x : c) maxmag = std::max(maxmag, std::abs(x));
    switch (policy) {
    case ZeroModePolicy::project:
        c[0] = cplx{0.0, 0.0};
        break;
    case ZeroModePolicy::error:
        if (std::abs(c[0]) > 1e-12 * std::max(maxmag, 1e-300))
            throw std::invalid_argument("apply_symbol: non-invertible zero mode");
        c[0] = cplx{0.0, 0.0};
        break;
    case ZeroModePolicy::identity:
        c[0] *= symbol(0.0);
        break;
    }
    // The one-sided Nyquist bin stands for the cosine pair e^{+-ikx}; only
    // the even part of the symbol keeps it representable.
    const int ny = grid.nyquist_bin();
    for (int j = 1; j < grid.size(); ++j) {
        if (j == ny) continue;
        c[j] *= symbol(grid.wavenumber(j));
    }
    const double kn = grid.wavenumber(ny);
    c[ny] *= 0.5 * (symbol(kn) + symbol(-kn));
    return c;
}

} // namespace

ComplexField apply_symbol(const ComplexField& f,
                          const std::function<cplx(double)>& symbol,
                          ZeroModePolicy policy) {
    auto spec = f.spectral();
    auto c = apply_symbol_spectrum(f.grid(), std::move(spec.values()), symbol, policy);
    ComplexField out(f.grid(), Rep::spectral, std::move(c));
    return f.rep() == Rep::physical ? out.physical() : out;
}

RealField apply_symbol(const RealField& f,
                       const std::function<cplx(double)>& symbol,
                       ZeroModePolicy policy) {
    auto c = apply_symbol_spectrum(f.grid(), f.spectrum(), symbol, policy);
    return RealField::from_spectrum(f.grid(), std::move(c));
}

cplx symbol_second_derivative(double k) { return cplx{-k * k, 0.0}; }
cplx symbol_inverse_second_derivative(double k) {
    return k == 0.0 ? cplx{0.0, 0.0} : cplx{-1.0 / (k * k), 0.0};
}
cplx symbol_derivative(double k) { return cplx{0.0, k}; }
cplx symbol_antiderivative(double k) {
    return k == 0.0 ? cplx{0.0, 0.0} : cplx{0.0, -1.0 / k};
}

namespace {

double weighted_spectrum_norm(const SpectralGrid& grid, std::vector<cplx> c,
                              double s, NormKind kind) {
    if (kind == NormKind::homogeneous && s < 0.0) {
        double maxmag = 0.0;
        for (const auto& x : c) maxmag = std::max(maxmag, std::abs(x));
        if (std::abs(c[0]) > 1e-10 * std::max(maxmag, 1e-300))
            throw std::invalid_argument("sobolev_norm: zero-mode obstruction");
        c[0] = cplx{0.0, 0.0};
    }
    double acc = 0.0;
    for (int j = 0; j < grid.size(); ++j) {
        const double k = grid.wavenumber(j);
        double w2;
        if (kind == NormKind::inhomogeneous) {
            w2 = std::pow(1.0 + k * k, s);
        } else {
            if (k == 0.0) {
                w2 = (s == 0.0) ? 1.0 : 0.0;
            } else {
                w2 = std::pow(k * k, s);
            }
        }
        acc += w2 * std::norm(c[j]);
    }
    return std::sqrt(grid.length() * acc);
}

} // namespace

double sobolev_norm(const ComplexField& f, double s, NormKind kind) {
    return weighted_spectrum_norm(f.grid(), std::move(f.spectral().values()), s, kind);
}

double sobolev_norm(const RealField& f, double s, NormKind kind) {
    return weighted_spectrum_norm(f.grid(), f.spectrum(), s, kind);
}

namespace {

// C-infinity ramp from 0 at t=0 to 1 at t=1.
double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

} // namespace

RealField window_bump(const SpectralGrid& grid, double center, double radius) {
    if (radius <= 0.0 || 4.0 * radius > grid.length())
        throw std::invalid_argument("window_bump: window exceeds domain");
    std::vector<double> v(grid.size());
    const double L = grid.length();
    for (int j = 0; j < grid.size(); ++j) {
        double d = std::fabs(grid.node(j) - center);
        d = std::min(d, L - d); // periodic distance
        if (d <= radius)
            v[j] = 1.0;
        else if (d >= 2.0 * radius)
            v[j] = 0.0;
        else
            v[j] = smooth_step((2.0 * radius - d) / radius);
    }
    return RealField::from_physical(grid, std::move(v));
}

double windowed_norm(const ComplexField& f, double s, double center,
                     double radius) {
    if (s < 0.0 || s >= f.grid().size() / 4.0)
        throw std::invalid_argument("windowed_norm: order not resolvable");
    const RealField chi = window_bump(f.grid(), center, radius);
    ComplexField g = f.physical();
    const auto& w = chi.physical();
    for (int j = 0; j < f.grid().size(); ++j) g.values()[j] *= w[j];
    return sobolev_norm(g, s, NormKind::inhomogeneous);
}

double windowed_norm(const RealField& f, double s, double center,
                     double radius) {
    return windowed_norm(f.as_complex(Rep::physical), s, center, radius);
}

ComplexField dealias(const ComplexField& f) {
    auto spec = f.spectral();
    auto& c = spec.values();
    const double kcut = 2.0 / 3.0 * std::fabs(f.grid().wavenumber(f.grid().nyquist_bin()));
    for (int j = 0; j < f.grid().size(); ++j)
        if (std::fabs(f.grid().wavenumber(j)) > kcut) c[j] = cplx{0.0, 0.0};
    return f.rep() == Rep::physical ? spec.physical() : spec;
}

RealField dealias(const RealField& f) {
    auto c = f.spectrum();
    const double kcut = 2.0 / 3.0 * std::fabs(f.grid().wavenumber(f.grid().nyquist_bin()));
    for (int j = 0; j < f.grid().size(); ++j)
        if (std::fabs(f.grid().wavenumber(j)) > kcut) c[j] = cplx{0.0, 0.0};
    return RealField::from_spectrum(f.grid(), std::move(c));
}

double inner(const ComplexField& f, const ComplexField& g) {
    const ComplexField fp = f.physical();
    const ComplexField gp = g.physical();
    double acc = 0.0;
    for (int j = 0; j < f.grid().size(); ++j)
        acc += (fp.values()[j] * std::conj(gp.values()[j])).real();
    return acc * f.grid().spacing();
}

double integral(const RealField& f) {
    const auto& v = f.physical();
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc * f.grid().spacing();
}

double integral_product(const RealField& f, const RealField& g) {
    const auto& a = f.physical();
    const auto& b = g.physical();
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
    return acc * f.grid().spacing();
}

} // namespace zk
