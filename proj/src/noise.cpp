#include "zk/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace zk {

NoiseOperator::NoiseOperator(const SpectralGrid& grid,
                             std::vector<NoiseMode> modes)
    : grid_(&grid), modes_(std::move(modes)) {
    for (int s = -4; s <= 3; ++s)
        hs_table_.push_back(
            {s, hs_norm(s, s < 0 ? NormKind::homogeneous
                                 : NormKind::inhomogeneous)});
}

std::vector<NoiseMode> NoiseOperator::full_mode_list(const SpectralGrid& grid) {
    // k runs below the Nyquist mode so that both cos and sin are resolved.
    std::vector<NoiseMode> modes;
    modes.reserve(grid.size() - 2);
    for (int k = 1; k < grid.size() / 2; ++k) {
        const double kappa = 2.0 * M_PI * k / grid.length();
        modes.push_back({k, false, kappa, 0.0});
        modes.push_back({k, true, kappa, 0.0});
    }
    return modes;
}

NoiseOperator NoiseOperator::isotropic(const SpectralGrid& grid,
                                       double amplitude, double exponent) {
    if (amplitude < 0.0)
        throw std::invalid_argument("NoiseOperator: amplitude must be >= 0");
    auto modes = full_mode_list(grid);
    for (auto& m : modes)
        m.lambda = amplitude * std::pow(1.0 + m.kappa * m.kappa, -exponent);
    return NoiseOperator(grid, std::move(modes));
}

NoiseOperator NoiseOperator::from_table(const SpectralGrid& grid,
                                        const std::map<int, double>& table) {
    auto modes = full_mode_list(grid);
    for (auto& m : modes) {
        auto it = table.find(m.k);
        m.lambda = (it == table.end()) ? 0.0 : it->second;
        if (m.lambda < 0.0)
            throw std::invalid_argument("NoiseOperator: lambda must be >= 0");
    }
    return NoiseOperator(grid, std::move(modes));
}

NoiseOperator NoiseOperator::single_mode(const SpectralGrid& grid, int k,
                                         bool is_sin, double lambda) {
    auto modes = full_mode_list(grid);
    bool found = false;
    for (auto& m : modes) {
        if (m.k == k && m.is_sin == is_sin) {
            m.lambda = lambda;
            found = true;
        }
    }
    if (!found) throw std::invalid_argument("NoiseOperator: mode not on grid");
    return NoiseOperator(grid, std::move(modes));
}

double NoiseOperator::hs_norm(double s, NormKind kind) const {
    double acc = 0.0;
    for (const auto& m : modes_) {
        const double k2 = m.kappa * m.kappa;
        const double w2 = (kind == NormKind::inhomogeneous)
                              ? std::pow(1.0 + k2, s)
                              : std::pow(k2, s);
        acc += m.lambda * m.lambda * w2;
    }
    return std::sqrt(acc);
}

double NoiseOperator::basis_value(std::size_t mode, double x) const {
    const NoiseMode& m = modes_.at(mode);
    const double amp = std::sqrt(2.0 / grid_->length());
    return amp * (m.is_sin ? std::sin(m.kappa * x) : std::cos(m.kappa * x));
}

RealField NoiseOperator::basis_function(std::size_t mode) const {
    const NoiseMode& m = modes_.at(mode);
    const double amp = std::sqrt(2.0 / grid_->length());
    return RealField::sample(*grid_, [&](double x) {
        return amp * (m.is_sin ? std::sin(m.kappa * x) : std::cos(m.kappa * x));
    });
}

RealField NoiseOperator::basis_image(std::size_t mode) const {
    RealField f = basis_function(mode);
    return modes_.at(mode).lambda * f;
}

RealField NoiseOperator::apply(std::span<const double> coefficients) const {
    if (coefficients.size() != modes_.size())
        throw std::invalid_argument("NoiseOperator::apply: length mismatch");
    // accumulate in the spectrum: cos_k -> (c/2, c/2), sin_k -> (-ic/2, +ic/2)
    const int n = grid_->size();
    std::vector<cplx> c(n, cplx{0.0, 0.0});
    const double amp = std::sqrt(2.0 / grid_->length());
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        const NoiseMode& m = modes_[i];
        const double w = amp * m.lambda * coefficients[i] * 0.5;
        if (w == 0.0) continue;
        const int jp = m.k;
        const int jm = n - m.k;
        if (!m.is_sin) {
            c[jp] += cplx{w, 0.0};
            c[jm] += cplx{w, 0.0};
        } else {
            c[jp] += cplx{0.0, -w};
            c[jm] += cplx{0.0, w};
        }
    }
    return RealField::from_spectrum(*grid_, std::move(c));
}

std::vector<double> sample_white_increment(std::size_t mode_count, double dt,
                                           GaussianStream& rng) {
    if (dt < 0.0)
        throw std::invalid_argument("sample_white_increment: dt must be >= 0");
    std::vector<double> out(mode_count);
    const double sd = std::sqrt(dt);
    rng.fill(out, sd);
    return out;
}

} // namespace zk
