#pragma once

#include "zk/rng.hpp"
#include "zk/spectral.hpp"

#include <map>
#include <span>
#include <vector>

namespace zk {

// One element of the orthonormal real trigonometric system
// { sqrt(2/L) cos(kx), sqrt(2/L) sin(kx) }; the constant mode is excluded
// because the smoothing operator annihilates it.
struct NoiseMode {
    int k = 0;          // integer mode index, kappa = 2*pi*k/L
    bool is_sin = false;
    double kappa = 0.0;
    double lambda = 0.0; // multiplier of phi on this mode
};

// The smoothing operator phi, diagonal on the trigonometric basis.
// lambda(0) = 0 always, so every image is mean-zero.
class NoiseOperator {
public:
    // Default profile lambda(k) = amplitude * (1 + kappa^2)^{-exponent}.
    static NoiseOperator isotropic(const SpectralGrid& grid, double amplitude,
                                   double exponent = 2.0);
    // Explicit per-|k| multiplier table (applied to both cos and sin modes).
    static NoiseOperator from_table(const SpectralGrid& grid,
                                    const std::map<int, double>& lambda_by_k);
    // Single excited mode, all other multipliers zero.
    static NoiseOperator single_mode(const SpectralGrid& grid, int k,
                                     bool is_sin, double lambda);

    const SpectralGrid& grid() const { return *grid_; }
    std::size_t mode_count() const { return modes_.size(); }
    const std::vector<NoiseMode>& modes() const { return modes_; }

    double hs_norm(double s, NormKind kind) const;

    // precomputed norms for integer orders -4..3 (homogeneous for s < 0),
    // recorded with run manifests for scaling studies
    struct HsEntry {
        int order;
        double value;
    };
    const std::vector<HsEntry>& hs_table() const { return hs_table_; }

    // basis function sqrt(2/L) cos/sin(kx) evaluated pointwise
    double basis_value(std::size_t mode, double x) const;
    RealField basis_function(std::size_t mode) const;
    RealField basis_image(std::size_t mode) const; // lambda * basis_function

    // synthesis sum_modes lambda * coef * basis_function
    RealField apply(std::span<const double> coefficients) const;

private:
    NoiseOperator(const SpectralGrid& grid, std::vector<NoiseMode> modes);
    static std::vector<NoiseMode> full_mode_list(const SpectralGrid& grid);

    const SpectralGrid* grid_ = nullptr;
    std::vector<NoiseMode> modes_;
    std::vector<HsEntry> hs_table_;
};

// One white-in-time increment: i.i.d. N(0, dt) coefficients, one per mode.
std::vector<double> sample_white_increment(std::size_t mode_count, double dt,
                                           GaussianStream& rng);

} // namespace zk
