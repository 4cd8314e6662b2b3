// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Tolerances are pinned here, not configurable.

#include "oracles.hpp"
#include "zk/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <vector>

using namespace zk;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             t0)
            .count();
    }
};

void report(int idx, const char* name, bool pass, const std::string& detail,
            double secs) {
    std::printf("[%s] criterion %2d: %-22s %s  (%.1fs)\n",
                pass ? "PASS" : "FAIL", idx, name, detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

ExperimentConfig base_config() {
    ExperimentConfig cfg;
    cfg.n = 256;
    cfg.length = 16.0 * M_PI;
    cfg.alpha = 1.0;
    cfg.noise_amplitude = 0.25;
    cfg.noise_low_cut = 1.0;
    cfg.t_final = 1.0;
    cfg.save_every = 10;
    cfg.paths = 24;
    cfg.seed = 1357911;
    cfg.metric_s = 0.5;
    return cfg;
}

RealField random_mean_zero(const SpectralGrid& g, GaussianStream& rng) {
    std::vector<double> v(g.size());
    for (auto& x : v) x = rng.next();
    return RealField::from_physical(g, std::move(v)).projected_mean_zero();
}

// 1. semigroup exactness -----------------------------------------------------
void criterion_semigroup() {
    Timer timer;
    SpectralGrid g(256, 16.0 * M_PI);
    double max_entry_err = 0.0, max_det_err = 0.0, max_law_err = 0.0;
    for (double alpha : {0.5, 1.0, 2.0}) {
        for (double t : {0.01, 0.1, 1.0, 10.0}) {
            // all grid wavenumbers plus a scan through the branch window
            std::vector<double> xis(g.wavenumbers().begin(), g.wavenumbers().end());
            for (double d : {-1e-5, -1e-7, 0.0, 1e-7, 1e-5})
                xis.push_back(0.5 * alpha + d);
            for (double xi : xis) {
                const Mat2 m = semigroup_multiplier(alpha, std::fabs(xi), t);
                const auto e = oracles::expm_damped_wave(alpha, std::fabs(xi), t);
                max_entry_err = std::max(
                    {max_entry_err, std::fabs(m.a11 - double(e[0])),
                     std::fabs(m.a12 - double(e[1])),
                     std::fabs(m.a21 - double(e[2])),
                     std::fabs(m.a22 - double(e[3]))});
                const double want = std::exp(-alpha * t);
                const double cond =
                    want + std::fabs(m.a11 * m.a22) + std::fabs(m.a12 * m.a21);
                max_det_err =
                    std::max(max_det_err, std::fabs(m.det() - want) / cond);
            }
        }
    }
    // semigroup law on random mean-zero pairs
    GaussianStream rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        WavePair pair(random_mean_zero(g, rng), random_mean_zero(g, rng));
        const double t = 0.31, s = 0.47;
        WavePair a = apply_semigroup(1.0, t, apply_semigroup(1.0, s, pair));
        WavePair b = apply_semigroup(1.0, t + s, pair);
        double scale = 1e-14, err = 0.0;
        for (int j = 0; j < g.size(); ++j) {
            scale = std::max(scale, std::fabs(b.n.physical()[j]));
            err = std::max(err, std::fabs(a.n.physical()[j] - b.n.physical()[j]));
            err = std::max(err, std::fabs(a.mu.physical()[j] - b.mu.physical()[j]));
        }
        max_law_err = std::max(max_law_err, err / scale);
    }
    const bool pass =
        max_entry_err <= 1e-10 && max_det_err <= 1e-12 && max_law_err <= 1e-12;
    report(1, "semigroup exactness", pass,
           fmt("entry %.2e (<=1e-10), det %.2e (<=1e-12 of product scale), law %.2e",
               max_entry_err, max_det_err, max_law_err),
           timer.seconds());
}

// 2. contraction --------------------------------------------------------------
void criterion_contraction() {
    Timer timer;
    SpectralGrid g(256, 16.0 * M_PI);
    GaussianStream rng(7);
    auto energy = [&](const WavePair& p) {
        return std::pow(sobolev_norm(p.n, 1.0, NormKind::inhomogeneous), 2) +
               std::pow(sobolev_norm(p.mu, 0.0, NormKind::inhomogeneous), 2) +
               std::pow(sobolev_norm(p.mu, -1.0, NormKind::homogeneous), 2);
    };
    double worst = 0.0;
    for (double alpha : {0.5, 1.0, 2.0}) {
        for (int trial = 0; trial < 100; ++trial) {
            WavePair pair(random_mean_zero(g, rng), random_mean_zero(g, rng));
            double prev = energy(pair);
            for (double t : {0.05, 0.25, 1.0}) {
                const double e = energy(apply_semigroup(alpha, t, pair));
                worst = std::max(worst, (e - prev) / prev);
                prev = e;
            }
        }
    }
    report(2, "contraction", worst <= 1e-12,
           fmt("max energy increase %.2e (<=1e-12)", worst), timer.seconds());
}

// 3. mass conservation --------------------------------------------------------
void criterion_mass() {
    Timer timer;
    ExperimentConfig cfg = base_config();
    Workbench wb(cfg);
    const double eps = 0.2;
    const InitialData data = initial_data(wb.grid(), InitialProfile{});
    const int steps = 10000;
    const double dt = 1e-4;

    ZakharovSim::Params p;
    p.epsilon = eps;
    p.alpha = cfg.alpha;
    p.dt = dt;
    ZakharovSim zsim(wb.phi(), p);
    ZakharovState zs = zsim.initial_state(data);
    PathNoise noise(GaussianStream(cfg.seed).child(0), wb.phi().mode_count(),
                    zsim.blocks_per_step(), dt);
    const double m0 = mass(zs.u);
    for (int i = 0; i < steps; ++i) zsim.strang_step(zs, noise.next_step());
    const double zak_err = std::fabs(mass(zs.u) - m0) / m0;

    NlsSim nsim(wb.phi());
    NlsState ns = nsim.initial_state(data.u0);
    GaussianStream rng(cfg.seed + 1);
    for (int i = 0; i < steps; ++i) {
        auto w = sample_white_increment(wb.phi().mode_count(), dt, rng);
        nsim.stratonovich_step(ns, dt, w);
    }
    const double nls_err = std::fabs(mass(ns.u) - m0) / m0;

    report(3, "mass conservation", zak_err <= 1e-11 && nls_err <= 1e-11,
           fmt("zakharov %.2e, nls %.2e (<=1e-11, 1e4 steps)", zak_err, nls_err),
           timer.seconds());
}

// 4. deterministic energy order -----------------------------------------------
void criterion_energy_order() {
    Timer timer;
    SpectralGrid g(256, 16.0 * M_PI);
    NoiseOperator none = NoiseOperator::isotropic(g, 0.0);
    const InitialData data = initial_data(g, InitialProfile{});
    std::vector<double> drift;
    for (double dt : {0.02, 0.01, 0.005, 0.0025}) {
        ZakharovSim::Params p;
        p.epsilon = 0.5;
        p.alpha = 0.0;
        p.dt = dt;
        p.n_sub = 1;
        ZakharovSim sim(none, p);
        ZakharovState s = sim.initial_state(data);
        const double H0 = hamiltonian(s.u, s.m, s.mu, p.epsilon);
        std::vector<std::vector<double>> blocks(
            sim.blocks_per_step(), std::vector<double>(none.mode_count(), 0.0));
        for (int i = 0; i < static_cast<int>(std::llround(1.0 / dt)); ++i)
            sim.strang_step(s, blocks);
        drift.push_back(std::fabs(hamiltonian(s.u, s.m, s.mu, p.epsilon) - H0));
    }
    bool pass = true;
    std::string detail = "ratios";
    for (std::size_t i = 0; i + 1 < drift.size(); ++i) {
        const double r = drift[i] / drift[i + 1];
        detail += fmt(" %.2f", r);
        if (r < 3.2 || r > 4.8) pass = false;
    }
    report(4, "deterministic H order", pass, detail + " (4 +- 20%)",
           timer.seconds());
}

// 5. stationary law -----------------------------------------------------------
void criterion_stationary() {
    Timer timer;
    ExperimentConfig cfg = base_config();
    Workbench wb(cfg);
    OuDriver driver(wb.phi(), cfg.alpha);
    const auto& modes = wb.phi().modes();
    const int draws = 10000;

    auto measure = [&](bool advance) {
        GaussianStream rng(cfg.seed + (advance ? 17 : 3));
        std::vector<double> accz(modes.size(), 0.0), accw(modes.size(), 0.0);
        for (int i = 0; i < draws; ++i) {
            DriverState s = driver.sample_stationary(rng);
            if (advance) driver.advance(s, 5.0, rng);
            for (std::size_t m = 0; m < modes.size(); ++m) {
                accz[m] += s.z[m] * s.z[m];
                accw[m] += s.zeta[m] * s.zeta[m];
            }
        }
        double worst = 0.0;
        for (std::size_t m = 0; m < modes.size(); ++m) {
            if (modes[m].lambda == 0.0) continue;
            const ModeCovariance c =
                lyapunov_covariance(cfg.alpha, modes[m].lambda, modes[m].kappa);
            const double se = std::sqrt(2.0 / draws);
            worst = std::max(worst,
                             std::fabs(accz[m] / draws - c.var_z) / (c.var_z * se));
            worst = std::max(
                worst, std::fabs(accw[m] / draws - c.var_zeta) / (c.var_zeta * se));
        }
        return worst;
    };
    const double fresh = measure(false);
    const double pushed = measure(true);
    report(5, "stationary law", fresh <= 4.0 && pushed <= 4.0,
           fmt("max |dev|/se: draw %.2f, advanced(t=5) %.2f (<=4)", fresh, pushed),
           timer.seconds());
}

// 6. kernel identities ----------------------------------------------------------
void criterion_kernels() {
    Timer timer;
    ExperimentConfig cfg = base_config();
    Workbench wb(cfg);
    KernelReport rep = kernel_validation(wb, 10000);
    const bool pass = rep.max_identity_error <= 1e-12 &&
                      rep.max_k1_sigma <= 4.0 && rep.max_k_sigma <= 4.0;
    report(6, "kernel identities", pass,
           fmt("|k(x,x)+F| %.2e (<=1e-12), K1 %.2f sigma, k %.2f sigma (<=4)",
               rep.max_identity_error, rep.max_k1_sigma, rep.max_k_sigma),
           timer.seconds());
}

// 7. M^{-1} linear identity ------------------------------------------------------
void criterion_minverse_identity() {
    Timer timer;
    ExperimentConfig cfg = base_config();
    Workbench wb(cfg);
    const double alpha = cfg.alpha;
    OuDriver driver(wb.phi(), alpha);
    GaussianStream rng(cfg.seed + 31);
    DriverState base = driver.sample_stationary(rng);
    const auto& modes = wb.phi().modes();

    std::vector<double> residual;
    for (int lvl = 0; lvl < 4; ++lvl) {
        const double dt = 0.1 / (1 << lvl);
        std::vector<std::vector<double>> blocks(1,
                                                std::vector<double>(modes.size()));
        GaussianStream sub = rng.child(lvl);
        sub.fill(blocks[0], std::sqrt(dt));
        DriverState s = base;
        driver.advance(s, dt, blocks);
        double max_res = 0.0;
        for (std::size_t m = 0; m < modes.size(); ++m) {
            const double k2 = modes[m].kappa * modes[m].kappa;
            const double before = -(base.zeta[m] + alpha * base.z[m]) / k2;
            const double after = -(s.zeta[m] + alpha * s.z[m]) / k2;
            const double trap = 0.5 * (base.z[m] + s.z[m]) * dt;
            const double noise = -modes[m].lambda * blocks[0][m] / k2;
            max_res =
                std::max(max_res, std::fabs(after - before - trap - noise));
        }
        residual.push_back(max_res);
    }
    // least-squares order across the three refinements
    double order_min = 1e9;
    for (std::size_t i = 0; i + 1 < residual.size(); ++i)
        order_min = std::min(order_min, std::log2(residual[i] / residual[i + 1]));
    report(7, "M^-1 linear identity", order_min >= 1.9,
           fmt("min refinement order %.3f (>=1.9)", order_min), timer.seconds());
}

// 8+9. coupled sweep: sandwich + headline convergence ---------------------------
void criteria_sweep() {
    Timer timer;
    ExperimentConfig cfg = base_config();
    cfg.eps_list = {0.4, 0.2, 0.1, 0.05};
    cfg.record_correctors = true;
    Workbench wb(cfg);

    struct PathData {
        double err = 0.0;
        bool included = false;
        std::vector<SampleRow> rows;
        int path = 0;
    };
    std::vector<double> medians;
    std::vector<int> included_counts;
    std::vector<PathData> all_paths;

    for (double eps : cfg.eps_list) {
        std::vector<PathData> results(cfg.paths);
        parallel_for_paths(cfg.paths, cfg.threads, [&](int p) {
            CoupledPathResult r = run_coupled_pair(wb, eps, 1.0, p, true);
            results[p].err = r.sup_windowed_error;
            results[p].included = !r.excluded_trip && !r.excluded_blowup;
            results[p].rows = std::move(r.zakharov.rows);
            results[p].path = p;
        });
        std::vector<double> errs;
        for (auto& r : results) {
            if (!r.included) continue;
            errs.push_back(r.err);
            all_paths.push_back(std::move(r));
        }
        included_counts.push_back(static_cast<int>(errs.size()));
        std::sort(errs.begin(), errs.end());
        medians.push_back(errs.empty() ? 0.0 : errs[errs.size() / 2]);
    }

    // criterion 8: sandwich with a single fitted constant, out-of-sample
    {
        auto violation = [](const SampleRow& r) {
            return std::max({0.25 * r.energy.K - r.energy.H_eps,
                             r.energy.H_eps - 3.0 * r.energy.K, 0.0});
        };
        double c_fit = 0.0;
        for (const auto& pd : all_paths) {
            if (pd.path % 2 != 0) continue; // calibration half
            for (const auto& row : pd.rows)
                c_fit = std::max(c_fit, violation(row));
        }
        c_fit *= 1.25; // declared margin
        double worst_excess = 0.0;
        int tested = 0;
        for (const auto& pd : all_paths) {
            if (pd.path % 2 == 0) continue; // out-of-sample half
            for (const auto& row : pd.rows) {
                worst_excess = std::max(worst_excess, violation(row) - c_fit);
                ++tested;
            }
        }
        report(8, "H_eps sandwich", worst_excess <= 0.0 && tested > 0,
               fmt("C = %.4f, out-of-sample excess %.2e over %d samples", c_fit,
                   worst_excess, tested),
               timer.seconds());
    }

    // criterion 9: strictly decreasing medians, last/first <= 0.5, runtime
    {
        bool decreasing = true;
        for (std::size_t i = 0; i + 1 < medians.size(); ++i)
            if (!(medians[i + 1] < medians[i])) decreasing = false;
        const double ratio = medians.front() > 0.0
                                 ? medians.back() / medians.front()
                                 : 1.0;
        bool enough = true;
        for (int c : included_counts)
            if (c < 20) enough = false;
        const double secs = timer.seconds();
        const bool pass =
            decreasing && ratio <= 0.5 && enough && secs <= 15.0 * 60.0;
        report(9, "epsilon convergence", pass,
               fmt("medians %.4f %.4f %.4f %.4f, last/first %.3f (<=0.5), "
                   "included %d/%d/%d/%d (>=20)",
                   medians[0], medians[1], medians[2], medians[3], ratio,
                   included_counts[0], included_counts[1], included_counts[2],
                   included_counts[3]),
               secs);
    }
}

// 10. damping failure -----------------------------------------------------------
void criterion_damping() {
    Timer timer;
    ExperimentConfig cfg = base_config();
    cfg.eps_list = {0.4, 0.2, 0.1, 0.05};
    cfg.gamma = 2.0;
    cfg.noise_amplitude = 1.0; // strong enough that damping matters
    cfg.paths = 20;
    cfg.record_correctors = false;
    Workbench wb(cfg);
    ConvergenceReport rep = damping_exponent_experiment(wb);
    const double first = rep.entries.front().median_err;
    const double last = rep.entries.back().median_err;
    const bool pass = last >= 0.5 * first && first > 0.0;
    report(10, "damping failure", pass,
           fmt("gamma=2 medians: eps=0.4 %.4f, eps=0.05 %.4f, ratio %.3f (>=0.5); "
               "trips logged %d/%d",
               first, last, first > 0 ? last / first : 0.0,
               rep.entries.front().tripped_logged,
               rep.entries.back().tripped_logged),
           timer.seconds());
}

// 11. generator drift -------------------------------------------------------------
void criterion_generator() {
    Timer timer;
    ExperimentConfig cfg = base_config();
    cfg.epsilon = 0.05;
    cfg.noise_amplitude = 0.5; // band wide enough to resolve the eps gap
    cfg.record_correctors = false;
    Workbench wb(cfg);
    GeneratorReport rep = generator_validation(wb, 200, 0.5);
    const bool pass = rep.drift_within_ci && rep.variance_within_ci;
    report(11, "generator drift", pass,
           fmt("drift diff %.2e vs ci %.2e; var %.3e vs %.3e ci %.2e",
               rep.drift_diff, rep.drift_ci, rep.var_mart, rep.var_quad,
               rep.var_ci),
           timer.seconds());
}

// 12. time-integral bound shape ---------------------------------------------------
void criterion_lemma_shape() {
    Timer timer;
    SpectralGrid g(256, 16.0 * M_PI);
    GaussianStream rng(911);
    bool pass = true;
    double worst_ratio = 0.0;
    auto mixed = [&](const RealField& f, int kk, int ll) {
        return std::pow(sobolev_norm(f, kk, NormKind::inhomogeneous), 2) +
               std::pow(sobolev_norm(f, -ll, NormKind::homogeneous), 2);
    };
    for (double alpha : {0.5, 1.0, 2.0}) {
        for (auto [k, l] : {std::pair{0, 0}, std::pair{1, 1}, std::pair{2, 0}}) {
            for (int component : {1, 2}) {
                auto rhs_for = [&](const WavePair& p) {
                    if (component == 1)
                        return mixed(p.n, k, l + 1) + mixed(p.mu, k - 1, l + 1);
                    return mixed(p.n, k + 1, l + 1) + mixed(p.mu, k, l + 1);
                };
                double C = 0.0;
                for (int i = 0; i < 50; ++i) {
                    WavePair p(random_mean_zero(g, rng), random_mean_zero(g, rng));
                    const double lhs = time_integral_norm(alpha, p, k, l,
                                                          component, 40.0 / alpha,
                                                          1e-8)
                                           .value;
                    C = std::max(C, lhs / rhs_for(p));
                }
                C *= 1.25;
                for (int i = 0; i < 50; ++i) {
                    WavePair p(random_mean_zero(g, rng), random_mean_zero(g, rng));
                    const double lhs = time_integral_norm(alpha, p, k, l,
                                                          component, 40.0 / alpha,
                                                          1e-8)
                                           .value;
                    const double r = lhs / (C * rhs_for(p));
                    worst_ratio = std::max(worst_ratio, r);
                    if (r > 1.0) pass = false;
                }
            }
        }
    }
    report(12, "time-integral bound", pass,
           fmt("worst out-of-sample lhs/(C rhs) = %.3f (<=1)", worst_ratio),
           timer.seconds());
}

} // namespace

int main() {
    std::printf("acceptance: N = 256, L = 16 pi, T = 1 desk scale\n");
    Timer total;
    criterion_semigroup();
    criterion_contraction();
    criterion_mass();
    criterion_energy_order();
    criterion_stationary();
    criterion_kernels();
    criterion_minverse_identity();
    criteria_sweep();
    criterion_damping();
    criterion_generator();
    criterion_lemma_shape();
    std::printf("%d criteria failed, total %.1fs\n", g_failures, total.seconds());
    return g_failures;
}
