#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace zk {

using cplx = std::complex<double>;

// Periodic collocation grid on [0, L). Owns the FFT plans; immutable and
// shareable after construction.
class SpectralGrid {
public:
    SpectralGrid(int num_points, double domain_length);
    ~SpectralGrid();
    SpectralGrid(const SpectralGrid&) = delete;
    SpectralGrid& operator=(const SpectralGrid&) = delete;

    int size() const { return n_; }
    double length() const { return length_; }
    double spacing() const { return length_ / n_; }
    double node(int j) const { return j * spacing(); }

    // Signed wavenumber of spectral bin j, FFT layout:
    // k_j = 2*pi*j/L for j in [-N/2, N/2).
    double wavenumber(int bin) const { return wavenumbers_[bin]; }
    const std::vector<double>& wavenumbers() const { return wavenumbers_; }
    int nyquist_bin() const { return n_ / 2; }

    // Coefficients of e^{i k x}: forward includes the 1/N normalization.
    void forward(std::span<const cplx> physical, std::span<cplx> spectral) const;
    void inverse(std::span<const cplx> spectral, std::span<cplx> physical) const;

private:
    int n_;
    double length_;
    std::vector<double> wavenumbers_;
    struct Plans;
    std::unique_ptr<Plans> plans_;
};

enum class Rep { physical, spectral };

class ComplexField {
public:
    ComplexField() = default;
    ComplexField(const SpectralGrid& grid, Rep rep)
        : grid_(&grid), rep_(rep), v_(grid.size(), cplx{0.0, 0.0}) {}
    ComplexField(const SpectralGrid& grid, Rep rep, std::vector<cplx> values);

    static ComplexField sample(const SpectralGrid& grid,
                               const std::function<cplx(double)>& f);

    const SpectralGrid& grid() const { return *grid_; }
    Rep rep() const { return rep_; }
    std::vector<cplx>& values() { return v_; }
    const std::vector<cplx>& values() const { return v_; }

    ComplexField to(Rep target) const;
    ComplexField physical() const { return to(Rep::physical); }
    ComplexField spectral() const { return to(Rep::spectral); }

    cplx mean() const;

    ComplexField& operator+=(const ComplexField& o);
    ComplexField& operator-=(const ComplexField& o);
    ComplexField& operator*=(cplx a);
    friend ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }
    friend ComplexField operator-(ComplexField a, const ComplexField& b) { return a -= b; }
    friend ComplexField operator*(cplx a, ComplexField f) { return f *= a; }

private:
    const SpectralGrid* grid_ = nullptr;
    Rep rep_ = Rep::physical;
    std::vector<cplx> v_;
};

// Real-valued grid function; spectral representation is kept conjugate
// symmetric by construction.
class RealField {
public:
    RealField() = default;
    explicit RealField(const SpectralGrid& grid)
        : grid_(&grid), phys_(grid.size(), 0.0), phys_valid_(true) {}

    static RealField sample(const SpectralGrid& grid,
                            const std::function<double(double)>& f);
    static RealField from_physical(const SpectralGrid& grid, std::vector<double> v);
    static RealField from_spectrum(const SpectralGrid& grid, std::vector<cplx> c);

    const SpectralGrid& grid() const { return *grid_; }

    const std::vector<double>& physical() const;
    std::vector<cplx> spectrum() const;

    double mean() const;
    RealField projected_mean_zero() const;

    ComplexField as_complex(Rep rep = Rep::physical) const;

    RealField& operator+=(const RealField& o);
    RealField& operator-=(const RealField& o);
    RealField& operator*=(double a);
    friend RealField operator+(RealField a, const RealField& b) { return a += b; }
    friend RealField operator-(RealField a, const RealField& b) { return a -= b; }
    friend RealField operator*(double a, RealField f) { return f *= a; }

private:
    const SpectralGrid* grid_ = nullptr;
    mutable std::vector<double> phys_;
    mutable std::vector<cplx> spec_;
    mutable bool phys_valid_ = false;
    mutable bool spec_valid_ = false;
    void ensure_physical() const;
    void ensure_spectral() const;
};

enum class ZeroModePolicy { project, error, identity };
enum class NormKind { inhomogeneous, homogeneous };

// Pointwise Fourier multiplier. For singular symbols the zero mode must be
// projected out or flagged.
ComplexField apply_symbol(const ComplexField& f,
                          const std::function<cplx(double)>& symbol,
                          ZeroModePolicy policy);
RealField apply_symbol(const RealField& f,
                       const std::function<cplx(double)>& symbol,
                       ZeroModePolicy policy);

// Common symbols.
cplx symbol_second_derivative(double k);         // -k^2
cplx symbol_inverse_second_derivative(double k); // -1/k^2
cplx symbol_derivative(double k);                // ik
cplx symbol_antiderivative(double k);            // 1/(ik)

double sobolev_norm(const ComplexField& f, double s, NormKind kind);
double sobolev_norm(const RealField& f, double s, NormKind kind);

// Fixed C-infinity bump: 1 on [center-R, center+R], 0 outside
// [center-2R, center+2R], measured in periodic distance.
RealField window_bump(const SpectralGrid& grid, double center, double radius);

double windowed_norm(const ComplexField& f, double s, double center, double radius);
double windowed_norm(const RealField& f, double s, double center, double radius);

// 2/3-rule dealiasing (zero bins with |k| > kmax*2/3).
ComplexField dealias(const ComplexField& f);
RealField dealias(const RealField& f);

// L2 inner product (f, g) = Re \int f conj(g) dx on the grid.
double inner(const ComplexField& f, const ComplexField& g);
double integral(const RealField& f);
double integral_product(const RealField& f, const RealField& g);

} // namespace zk
