#include "doctest.h"

#include "zk/rng.hpp"
#include "zk/spectral.hpp"

#include <cmath>
#include <complex>
#include <vector>

using namespace zk;

namespace {

ComplexField random_complex(const SpectralGrid& g, GaussianStream& rng) {
    std::vector<cplx> v(g.size());
    for (auto& x : v) x = cplx{rng.next(), rng.next()};
    return ComplexField(g, Rep::physical, std::move(v));
}

RealField random_real(const SpectralGrid& g, GaussianStream& rng) {
    std::vector<double> v(g.size());
    for (auto& x : v) x = rng.next();
    return RealField::from_physical(g, std::move(v));
}

// Reference H^s norm of the windowed field on a fine grid: direct O(N^2)
// Fourier sums, independent of the library transform path.
double dense_windowed_norm_oracle(double s, double center, double radius,
                                  double L, int fine_n,
                                  const std::function<double(double)>& f) {
    auto smooth_step = [](double t) {
        if (t <= 0.0) return 0.0;
        if (t >= 1.0) return 1.0;
        const double a = std::exp(-1.0 / t);
        const double b = std::exp(-1.0 / (1.0 - t));
        return a / (a + b);
    };
    auto chi = [&](double x) {
        double d = std::fabs(x - center);
        d = std::min(d, L - d);
        if (d <= radius) return 1.0;
        if (d >= 2.0 * radius) return 0.0;
        return smooth_step((2.0 * radius - d) / radius);
    };
    std::vector<double> g(fine_n);
    for (int j = 0; j < fine_n; ++j) {
        const double x = j * L / fine_n;
        g[j] = chi(x) * f(x);
    }
    double acc = 0.0;
    for (int k = -fine_n / 2; k < fine_n / 2; ++k) {
        const double kap = 2.0 * M_PI * k / L;
        cplx c{0.0, 0.0};
        for (int j = 0; j < fine_n; ++j) {
            const double x = j * L / fine_n;
            c += g[j] * std::exp(cplx{0.0, -kap * x});
        }
        c /= static_cast<double>(fine_n);
        acc += std::pow(1.0 + kap * kap, s) * std::norm(c);
    }
    return std::sqrt(L * acc);
}

} // namespace

TEST_CASE("grid invariants") {
    SpectralGrid g(16, 2.0 * M_PI);
    CHECK(g.size() == 16);
    int zeros = 0;
    for (int j = 0; j < 16; ++j)
        if (g.wavenumber(j) == 0.0) ++zeros;
    CHECK(zeros == 1);
    // symmetric up to Nyquist
    for (int k = 1; k < 8; ++k)
        CHECK(g.wavenumber(k) == doctest::Approx(-g.wavenumber(16 - k)));
    CHECK(g.wavenumber(8) == doctest::Approx(-8.0));
    CHECK_THROWS(SpectralGrid(7, 1.0));
    CHECK_THROWS(SpectralGrid(4, 1.0));
    CHECK_THROWS(SpectralGrid(16, -1.0));
}

TEST_CASE("transform round trip") {
    SpectralGrid g(64, 16.0 * M_PI);
    GaussianStream rng(7);
    ComplexField f = random_complex(g, rng);
    ComplexField back = f.spectral().physical();
    double maxv = 0.0, maxerr = 0.0;
    for (int j = 0; j < g.size(); ++j) {
        maxv = std::max(maxv, std::abs(f.values()[j]));
        maxerr = std::max(maxerr, std::abs(f.values()[j] - back.values()[j]));
    }
    CHECK(maxerr <= 100.0 * 2.2e-16 * maxv);
}

TEST_CASE("real field spectrum is conjugate symmetric") {
    SpectralGrid g(32, 2.0 * M_PI);
    GaussianStream rng(3);
    RealField f = random_real(g, rng);
    auto c = f.spectrum();
    for (int j = 1; j < g.size() / 2; ++j) {
        CHECK(c[j].real() == doctest::Approx(c[g.size() - j].real()).epsilon(1e-12));
        CHECK(c[j].imag() == doctest::Approx(-c[g.size() - j].imag()).epsilon(1e-12));
    }
}

TEST_CASE("apply_symbol eigenfunction examples") {
    SpectralGrid g(32, 2.0 * M_PI);
    // dxx cos(x) = -cos(x)
    RealField f = RealField::sample(g, [](double x) { return std::cos(x); });
    RealField out = apply_symbol(f, symbol_second_derivative, ZeroModePolicy::project);
    for (int j = 0; j < g.size(); ++j)
        CHECK(out.physical()[j] ==
              doctest::Approx(-std::cos(g.node(j))).epsilon(1e-12));

    // (dxx)^{-1} cos(2x) = -cos(2x)/4
    RealField f2 = RealField::sample(g, [](double x) { return std::cos(2.0 * x); });
    RealField out2 =
        apply_symbol(f2, symbol_inverse_second_derivative, ZeroModePolicy::project);
    for (int j = 0; j < g.size(); ++j)
        CHECK(out2.physical()[j] ==
              doctest::Approx(-std::cos(2.0 * g.node(j)) / 4.0).epsilon(1e-12));

    // dx^{-1} sin(2x) = -cos(2x)/2
    RealField f3 = RealField::sample(g, [](double x) { return std::sin(2.0 * x); });
    RealField out3 = apply_symbol(f3, symbol_antiderivative, ZeroModePolicy::project);
    for (int j = 0; j < g.size(); ++j)
        CHECK(out3.physical()[j] ==
              doctest::Approx(-std::cos(2.0 * g.node(j)) / 2.0).epsilon(1e-12));
}

TEST_CASE("apply_symbol zero-mode policies") {
    SpectralGrid g(32, 2.0 * M_PI);
    RealField one = RealField::sample(g, [](double) { return 1.0; });
    CHECK_THROWS_WITH_AS(
        apply_symbol(one, symbol_inverse_second_derivative, ZeroModePolicy::error),
        doctest::Contains("non-invertible zero mode"), std::invalid_argument);
    RealField proj =
        apply_symbol(one, symbol_inverse_second_derivative, ZeroModePolicy::project);
    for (double v : proj.physical()) CHECK(v == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("apply_symbol is linear on random fields") {
    SpectralGrid g(64, 16.0 * M_PI);
    GaussianStream rng(11);
    ComplexField f = random_complex(g, rng);
    ComplexField h = random_complex(g, rng);
    const cplx a{1.3, -0.4}, b{-0.7, 2.1};
    auto sym = [](double k) { return cplx{k * k / (1.0 + k * k), 0.5 * k}; };
    ComplexField lhs = apply_symbol(a * f + b * h, sym, ZeroModePolicy::identity);
    ComplexField rhs = a * apply_symbol(f, sym, ZeroModePolicy::identity) +
                       b * apply_symbol(h, sym, ZeroModePolicy::identity);
    double scale = 0.0, err = 0.0;
    auto lp = lhs.physical(), rp = rhs.physical();
    for (int j = 0; j < g.size(); ++j) {
        scale = std::max(scale, std::abs(lp.values()[j]));
        err = std::max(err, std::abs(lp.values()[j] - rp.values()[j]));
    }
    CHECK(err <= 1e-12 * scale);
}

TEST_CASE("dxx o (dxx)^{-1} is identity on mean-zero fields") {
    SpectralGrid g(64, 16.0 * M_PI);
    GaussianStream rng(13);
    RealField f = random_real(g, rng).projected_mean_zero();
    RealField round = apply_symbol(
        apply_symbol(f, symbol_inverse_second_derivative, ZeroModePolicy::project),
        symbol_second_derivative, ZeroModePolicy::project);
    double scale = 0.0, err = 0.0;
    for (int j = 0; j < g.size(); ++j) {
        scale = std::max(scale, std::fabs(f.physical()[j]));
        err = std::max(err, std::fabs(f.physical()[j] - round.physical()[j]));
    }
    CHECK(err <= 1e-12 * scale);
}

TEST_CASE("sobolev norms of trig functions") {
    SpectralGrid g(32, 2.0 * M_PI);
    RealField c1 = RealField::sample(g, [](double x) { return std::cos(x); });
    CHECK(sobolev_norm(c1, 0.0, NormKind::inhomogeneous) ==
          doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
    CHECK(sobolev_norm(c1, 1.0, NormKind::inhomogeneous) ==
          doctest::Approx(std::sqrt(2.0 * M_PI)).epsilon(1e-13));
    RealField c2 = RealField::sample(g, [](double x) { return std::cos(2.0 * x); });
    CHECK(sobolev_norm(c2, -1.0, NormKind::homogeneous) ==
          doctest::Approx(std::sqrt(M_PI) / 2.0).epsilon(1e-13));
}

TEST_CASE("parseval identity") {
    SpectralGrid g(128, 16.0 * M_PI);
    GaussianStream rng(17);
    ComplexField f = random_complex(g, rng);
    const double lhs = std::pow(sobolev_norm(f, 0.0, NormKind::inhomogeneous), 2);
    double rhs = 0.0;
    for (const auto& v : f.values()) rhs += std::norm(v);
    rhs *= g.spacing();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("homogeneous negative order requires mean-zero") {
    SpectralGrid g(32, 2.0 * M_PI);
    RealField one = RealField::sample(g, [](double) { return 1.0; });
    CHECK_THROWS_WITH_AS(sobolev_norm(one, -1.0, NormKind::homogeneous),
                         doctest::Contains("zero-mode obstruction"),
                         std::invalid_argument);
}

TEST_CASE("windowed norm basics") {
    SpectralGrid g(256, 16.0 * M_PI);
    RealField zero(g);
    CHECK(windowed_norm(zero, 0.0, 0.0, 1.0) == doctest::Approx(0.0));

    // constant field: squeeze between the inner and outer plateau L2 masses
    RealField one = RealField::sample(g, [](double) { return 1.0; });
    const double v = windowed_norm(one, 0.0, 3.0, 1.0);
    CHECK(v >= std::sqrt(2.0) - 1e-10);  // inner plateau [-1, 1]
    CHECK(v <= std::sqrt(4.0) + 1e-10);  // outer support [-2, 2]

    CHECK_THROWS_WITH_AS(windowed_norm(one, 0.0, 0.0, 0.3 * g.length()),
                         doctest::Contains("window exceeds domain"),
                         std::invalid_argument);
}

TEST_CASE("windowed norm against dense-quadrature oracle") {
    SpectralGrid g(256, 16.0 * M_PI);
    RealField f = RealField::sample(g, [](double x) { return std::cos(x); });
    const double got = windowed_norm(f, 0.5, 0.0, M_PI / 4.0);
    const double want = dense_windowed_norm_oracle(
        0.5, 0.0, M_PI / 4.0, 16.0 * M_PI, 2048,
        [](double x) { return std::cos(x); });
    // the bump transition spans ~13 grid points at N=256; the H^{1/2}
    // discretization error of the cutoff sits well below a percent
    CHECK(got == doctest::Approx(want).epsilon(2e-3));
}

TEST_CASE("windowed norm monotone in radius") {
    SpectralGrid g(128, 16.0 * M_PI);
    GaussianStream rng(23);
    RealField f = random_real(g, rng);
    double prev = 0.0;
    for (double r : {1.0, 2.0, 3.0, 4.0}) {
        const double v = windowed_norm(f, 0.0, 8.0, r);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
}

TEST_CASE("window bump plateau and support") {
    SpectralGrid g(256, 16.0 * M_PI);
    RealField chi = window_bump(g, 8.0, 2.0);
    for (int j = 0; j < g.size(); ++j) {
        double d = std::fabs(g.node(j) - 8.0);
        d = std::min(d, g.length() - d);
        if (d <= 2.0) CHECK(chi.physical()[j] == doctest::Approx(1.0));
        if (d >= 4.0) CHECK(chi.physical()[j] == doctest::Approx(0.0));
        CHECK(chi.physical()[j] >= 0.0);
        CHECK(chi.physical()[j] <= 1.0);
    }
}
