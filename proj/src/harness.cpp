#include "zk/harness.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

namespace zk {

using nlohmann::json;

double ExperimentConfig::dt_for(double eps) const {
    return std::min(dt_max, cfl * eps);
}

double ExperimentConfig::pulse_center() const {
    return initial.x0 >= 0.0 ? initial.x0 : 0.5 * length;
}

std::vector<WindowSpec> ExperimentConfig::resolved_windows() const {
    if (!windows.empty()) return windows;
    return {WindowSpec{pulse_center(), 0.25 * length}};
}

void ExperimentConfig::validate() const {
    if (n < 8 || n % 2 != 0)
        throw ConfigError("grid.n", "must be even and >= 8");
    if (length <= 0.0) throw ConfigError("grid.length", "must be positive");
    if (alpha < 0.0) throw ConfigError("physics.alpha", "must be >= 0");
    if (epsilon <= 0.0) throw ConfigError("physics.epsilon", "must be > 0");
    for (std::size_t i = 0; i + 1 < eps_list.size(); ++i)
        if (eps_list[i + 1] >= eps_list[i])
            throw ConfigError("physics.eps_list", "must be strictly decreasing");
    for (double e : eps_list)
        if (e <= 0.0) throw ConfigError("physics.eps_list", "entries must be > 0");
    if (gamma < 1.0) throw ConfigError("physics.gamma", "must be >= 1");
    if (noise_amplitude < 0.0)
        throw ConfigError("noise.amplitude", "must be >= 0");
    if (noise_low_cut < 0.0)
        throw ConfigError("noise.low_cut", "must be >= 0");
    if (dt_max <= 0.0) throw ConfigError("stepping.dt_max", "must be > 0");
    if (cfl <= 0.0) throw ConfigError("stepping.cfl", "must be > 0");
    if (t_final < 0.0) throw ConfigError("stepping.t_final", "must be >= 0");
    if (save_every < 1) throw ConfigError("stepping.save_every", "must be >= 1");
    if (delta <= 0.0 || delta > 0.125)
        throw ConfigError("monitor.delta", "must lie in (0, 1/8]");
    if (paths < 1) throw ConfigError("mc.paths", "must be >= 1");
    if (metric_s < 0.0) throw ConfigError("metric.s", "must be >= 0");
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (windows[i].radius <= 0.0 || 4.0 * windows[i].radius > length)
            throw ConfigError("metric.windows[" + std::to_string(i) + "].radius",
                              "window exceeds domain");
    }
}

namespace {

template <class T>
void read_field(const json& j, const char* section, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string(section) + "." + key, "invalid value");
    }
}

} // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("(root)", std::string("config parse error: ") + e.what());
    }
    ExperimentConfig c;
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        read_field(g, "grid", "n", c.n);
        read_field(g, "grid", "length", c.length);
    }
    if (j.contains("physics")) {
        const auto& p = j["physics"];
        read_field(p, "physics", "alpha", c.alpha);
        read_field(p, "physics", "epsilon", c.epsilon);
        read_field(p, "physics", "eps_list", c.eps_list);
        read_field(p, "physics", "gamma", c.gamma);
    }
    if (j.contains("noise")) {
        const auto& nj = j["noise"];
        read_field(nj, "noise", "amplitude", c.noise_amplitude);
        read_field(nj, "noise", "exponent", c.noise_exponent);
        read_field(nj, "noise", "low_cut", c.noise_low_cut);
        if (nj.contains("table")) {
            for (auto it = nj["table"].begin(); it != nj["table"].end(); ++it) {
                try {
                    c.noise_table[std::stoi(it.key())] = it.value().get<double>();
                } catch (...) {
                    throw ConfigError("noise.table", "keys must be integer modes");
                }
            }
        }
    }
    if (j.contains("initial")) {
        const auto& ij = j["initial"];
        std::string kind = "sech";
        read_field(ij, "initial", "kind", kind);
        if (kind == "sech")
            c.initial.kind = InitialProfile::Kind::sech;
        else if (kind == "gaussian")
            c.initial.kind = InitialProfile::Kind::gaussian;
        else
            throw ConfigError("initial.kind", "must be 'sech' or 'gaussian'");
        read_field(ij, "initial", "amplitude", c.initial.amplitude);
        read_field(ij, "initial", "x0", c.initial.x0);
        read_field(ij, "initial", "velocity", c.initial.velocity);
        read_field(ij, "initial", "sigma", c.initial.sigma);
    }
    if (j.contains("stepping")) {
        const auto& sj = j["stepping"];
        read_field(sj, "stepping", "dt_max", c.dt_max);
        read_field(sj, "stepping", "cfl", c.cfl);
        read_field(sj, "stepping", "t_final", c.t_final);
        read_field(sj, "stepping", "save_every", c.save_every);
        read_field(sj, "stepping", "n_sub", c.n_sub);
    }
    if (j.contains("monitor")) {
        const auto& mj = j["monitor"];
        read_field(mj, "monitor", "delta", c.delta);
        std::string policy = "continue";
        read_field(mj, "monitor", "policy", policy);
        if (policy == "continue")
            c.trip_policy = TripPolicy::continue_run;
        else if (policy == "halt")
            c.trip_policy = TripPolicy::halt;
        else
            throw ConfigError("monitor.policy", "must be 'continue' or 'halt'");
    }
    if (j.contains("mc")) {
        const auto& mj = j["mc"];
        read_field(mj, "mc", "paths", c.paths);
        read_field(mj, "mc", "seed", c.seed);
        read_field(mj, "mc", "threads", c.threads);
    }
    if (j.contains("metric")) {
        const auto& mj = j["metric"];
        read_field(mj, "metric", "s", c.metric_s);
        if (mj.contains("windows")) {
            for (const auto& w : mj["windows"]) {
                WindowSpec ws;
                read_field(w, "metric.windows", "center", ws.center);
                read_field(w, "metric.windows", "radius", ws.radius);
                c.windows.push_back(ws);
            }
        }
    }
    if (j.contains("diagnostics")) {
        read_field(j["diagnostics"], "diagnostics", "record_correctors",
                   c.record_correctors);
    }
    if (j.contains("output")) {
        const auto& oj = j["output"];
        read_field(oj, "output", "directory", c.out_dir);
        read_field(oj, "output", "csv", c.write_csv);
        read_field(oj, "output", "ndjson", c.write_ndjson);
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("(file)", "cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string ExperimentConfig::to_json() const {
    json j;
    j["grid"] = {{"n", n}, {"length", length}};
    j["physics"] = {{"alpha", alpha},
                    {"epsilon", epsilon},
                    {"eps_list", eps_list},
                    {"gamma", gamma}};
    json table = json::object();
    for (const auto& [k, v] : noise_table) table[std::to_string(k)] = v;
    j["noise"] = {{"amplitude", noise_amplitude},
                  {"exponent", noise_exponent},
                  {"low_cut", noise_low_cut},
                  {"table", table}};
    j["initial"] = {
        {"kind", initial.kind == InitialProfile::Kind::sech ? "sech" : "gaussian"},
        {"amplitude", initial.amplitude},
        {"x0", pulse_center()},
        {"velocity", initial.velocity},
        {"sigma", initial.sigma}};
    j["stepping"] = {{"dt_max", dt_max},
                     {"cfl", cfl},
                     {"t_final", t_final},
                     {"save_every", save_every},
                     {"n_sub", n_sub},
                     {"dt", dt_for(epsilon)}};
    j["monitor"] = {{"delta", delta},
                    {"policy", trip_policy == TripPolicy::halt ? "halt" : "continue"}};
    j["mc"] = {{"paths", paths}, {"seed", seed}, {"threads", threads}};
    json wnds = json::array();
    for (const auto& w : resolved_windows())
        wnds.push_back({{"center", w.center}, {"radius", w.radius}});
    j["metric"] = {{"s", metric_s}, {"windows", wnds}};
    j["diagnostics"] = {{"record_correctors", record_correctors}};
    j["output"] = {{"directory", out_dir}, {"csv", write_csv}, {"ndjson", write_ndjson}};
    return j.dump(2);
}

std::uint64_t ExperimentConfig::hash() const {
    const std::string s = to_json();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

PathNoise::PathNoise(GaussianStream stream, std::size_t modes,
                     int blocks_per_step, double dt)
    : stream_(stream), modes_(modes), blocks_(blocks_per_step),
      block_dt_(dt / blocks_per_step) {}

const std::vector<std::vector<double>>& PathNoise::next_step() {
    current_.assign(blocks_, std::vector<double>(modes_));
    const double sd = std::sqrt(block_dt_);
    for (auto& block : current_) {
        stream_.fill(block, sd);
        checksum_.update(block);
    }
    return current_;
}

std::vector<double> PathNoise::last_step_total() const {
    std::vector<double> total(modes_, 0.0);
    for (const auto& block : current_)
        for (std::size_t i = 0; i < modes_; ++i) total[i] += block[i];
    return total;
}

Workbench::Workbench(const ExperimentConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    grid_ = std::make_unique<SpectralGrid>(cfg.n, cfg.length);
    if (!cfg.noise_table.empty()) {
        phi_ = std::make_unique<NoiseOperator>(
            NoiseOperator::from_table(*grid_, cfg.noise_table));
    } else if (cfg.noise_low_cut > 0.0) {
        std::map<int, double> table;
        const double c4 = std::pow(cfg.noise_low_cut, 4);
        for (int k = 1; k < cfg.n / 2; ++k) {
            const double kap = 2.0 * M_PI * k / cfg.length;
            const double k4 = std::pow(kap, 4);
            table[k] = cfg.noise_amplitude *
                       std::pow(1.0 + kap * kap, -cfg.noise_exponent) * k4 /
                       (c4 + k4);
        }
        phi_ = std::make_unique<NoiseOperator>(
            NoiseOperator::from_table(*grid_, table));
    } else {
        phi_ = std::make_unique<NoiseOperator>(NoiseOperator::isotropic(
            *grid_, cfg.noise_amplitude, cfg.noise_exponent));
    }
}

namespace {

InitialProfile resolved_profile(const ExperimentConfig& cfg) {
    InitialProfile p = cfg.initial;
    p.x0 = cfg.pulse_center();
    return p;
}

double boundary_amplitude(const ExperimentConfig& cfg, const ComplexField& u,
                          const RealField& m) {
    // widest excursion near the seam antipodal to the pulse
    const SpectralGrid& g = u.grid();
    const double seam = std::fmod(cfg.pulse_center() + 0.5 * cfg.length,
                                  cfg.length);
    const double halfwidth = cfg.length / 16.0;
    double amp = 0.0;
    const auto& mv = m.physical();
    const ComplexField up = u.physical();
    for (int j = 0; j < g.size(); ++j) {
        double d = std::fabs(g.node(j) - seam);
        d = std::min(d, cfg.length - d);
        if (d > halfwidth) continue;
        amp = std::max(amp, std::abs(up.values()[j]));
        amp = std::max(amp, std::fabs(mv[j]));
    }
    return amp;
}

double sup_windowed(const ExperimentConfig& cfg, const ComplexField& f) {
    double v = 0.0;
    for (const auto& w : cfg.resolved_windows())
        v = std::max(v, windowed_norm(f, cfg.metric_s, w.center, w.radius));
    return v;
}

// On the torus the wave field is mean-zero, so the translated system relaxes
// to -(|u|^2 - mass/L) rather than -|u|^2; the limit field therefore carries
// the explicit gauge phase e^{-i (mass/L) t} relative to the whole-line limit
// equation. Coupled comparisons align that gauge.
ComplexField gauge_aligned(const ComplexField& u, double cbar, double t) {
    ComplexField out = u.physical();
    const cplx phase = std::exp(cplx{0.0, -cbar * t});
    for (auto& v : out.values()) v *= phase;
    return out;
}

SampleRow make_zakharov_row(const ExperimentConfig& cfg, const ZakharovSim& sim,
                            const ZakharovState& s, bool tripped) {
    SampleRow row;
    row.time = s.time;
    row.energy = modified_energy(s.u, s.m, s.mu, s.epsilon, sim.driver(),
                                 s.driver, cfg.record_correctors);
    row.energy.time = s.time;
    row.windowed_u = sup_windowed(cfg, s.u);
    row.driver_z_norm = sim.driver().intersection_norm(s.driver.z, 3.0);
    row.driver_zeta_norm = sim.driver().intersection_norm(s.driver.zeta, 3.0);
    row.boundary_amp = boundary_amplitude(cfg, s.u, s.m);
    row.monitor_tripped = tripped;
    return row;
}

} // namespace

TrajectoryRecord run_zakharov(const Workbench& wb, double eps, double gamma,
                              std::uint64_t path_index, bool keep_snapshots) {
    const ExperimentConfig& cfg = wb.config();
    const double dt = cfg.dt_for(eps);
    const int steps = static_cast<int>(std::llround(cfg.t_final / dt));

    ZakharovSim::Params params;
    params.epsilon = eps;
    params.alpha = cfg.alpha;
    params.gamma = gamma;
    params.dt = dt;
    params.n_sub = cfg.n_sub;
    ZakharovSim sim(wb.phi(), params);

    PathNoise noise(GaussianStream(cfg.seed).child(path_index),
                    wb.phi().mode_count(), sim.blocks_per_step(), dt);
    GrowthMonitor monitor(cfg.delta, eps);

    ZakharovState s = sim.initial_state(initial_data(wb.grid(), resolved_profile(cfg)));

    TrajectoryRecord rec;
    rec.run_id = "zakharov-eps" + std::to_string(eps) + "-gamma" +
                 std::to_string(gamma) + "-path" + std::to_string(path_index);
    rec.config_hash = cfg.hash();

    auto save = [&](bool tripped) {
        rec.rows.push_back(make_zakharov_row(cfg, sim, s, tripped));
        if (keep_snapshots) rec.u_snapshots.push_back(s.u.physical());
    };
    save(false);
    for (int i = 0; i < steps; ++i) {
        try {
            sim.strang_step(s, noise.next_step());
        } catch (const std::runtime_error&) {
            rec.blew_up = true;
            break;
        }
        const bool tripped = monitor.check(sim.driver(), s.driver);
        if ((i + 1) % cfg.save_every == 0 || i + 1 == steps) save(tripped);
        if (tripped && cfg.trip_policy == TripPolicy::halt) break;
    }
    rec.tripped = monitor.tripped();
    rec.tripped_at = monitor.tripped_at.value_or(-1.0);
    rec.increment_checksum = noise.checksum();
    return rec;
}

TrajectoryRecord run_nls(const Workbench& wb, double eps, double gamma,
                         std::uint64_t path_index, bool keep_snapshots) {
    const ExperimentConfig& cfg = wb.config();
    const double dt = cfg.dt_for(eps);
    const int steps = static_cast<int>(std::llround(cfg.t_final / dt));

    // block layout mirrors the coupled Zakharov run exactly
    ZakharovSim::Params params;
    params.epsilon = eps;
    params.alpha = cfg.alpha;
    params.gamma = gamma;
    params.dt = dt;
    params.n_sub = cfg.n_sub;
    ZakharovSim layout(wb.phi(), params);

    PathNoise noise(GaussianStream(cfg.seed).child(path_index),
                    wb.phi().mode_count(), layout.blocks_per_step(), dt);

    NlsSim sim(wb.phi());
    NlsState s = sim.initial_state(
        initial_data(wb.grid(), resolved_profile(cfg)).u0);

    TrajectoryRecord rec;
    rec.run_id = "nls-eps" + std::to_string(eps) + "-path" +
                 std::to_string(path_index);
    rec.config_hash = cfg.hash();

    const RealField no_wave(wb.grid());
    auto save = [&] {
        SampleRow row;
        row.time = s.time;
        row.energy.mass = mass(s.u);
        row.energy.time = s.time;
        row.windowed_u = sup_windowed(cfg, s.u);
        row.boundary_amp = boundary_amplitude(cfg, s.u, no_wave);
        rec.rows.push_back(row);
        if (keep_snapshots) rec.u_snapshots.push_back(s.u.physical());
    };
    save();
    for (int i = 0; i < steps; ++i) {
        noise.next_step();
        try {
            sim.stratonovich_step(s, dt, noise.last_step_total());
        } catch (const std::runtime_error&) {
            rec.blew_up = true;
            break;
        }
        if ((i + 1) % cfg.save_every == 0 || i + 1 == steps) save();
    }
    rec.increment_checksum = noise.checksum();
    return rec;
}

CoupledPathResult run_coupled_pair(const Workbench& wb, double eps,
                                   double gamma, std::uint64_t path_index,
                                   bool exclude_on_trip) {
    const ExperimentConfig& cfg = wb.config();
    const double dt = cfg.dt_for(eps);
    const int steps = static_cast<int>(std::llround(cfg.t_final / dt));

    ZakharovSim::Params params;
    params.epsilon = eps;
    params.alpha = cfg.alpha;
    params.gamma = gamma;
    params.dt = dt;
    params.n_sub = cfg.n_sub;
    ZakharovSim zsim(wb.phi(), params);
    NlsSim nsim(wb.phi());

    PathNoise znoise(GaussianStream(cfg.seed).child(path_index),
                     wb.phi().mode_count(), zsim.blocks_per_step(), dt);
    PathNoise nnoise(GaussianStream(cfg.seed).child(path_index),
                     wb.phi().mode_count(), zsim.blocks_per_step(), dt);
    GrowthMonitor monitor(cfg.delta, eps);

    const InitialData data = initial_data(wb.grid(), resolved_profile(cfg));
    ZakharovState zs = zsim.initial_state(data);
    NlsState ns = nsim.initial_state(data.u0);
    const double cbar = mass(data.u0) / cfg.length;

    CoupledPathResult out;
    out.zakharov.run_id = "zakharov-eps" + std::to_string(eps) + "-gamma" +
                          std::to_string(gamma) + "-path" +
                          std::to_string(path_index);
    out.nls.run_id =
        "nls-eps" + std::to_string(eps) + "-path" + std::to_string(path_index);
    out.zakharov.config_hash = out.nls.config_hash = cfg.hash();

    auto save = [&](bool tripped) {
        out.zakharov.rows.push_back(make_zakharov_row(cfg, zsim, zs, tripped));
        SampleRow nrow;
        nrow.time = ns.time;
        nrow.energy.mass = mass(ns.u);
        nrow.windowed_u = sup_windowed(cfg, ns.u);
        out.nls.rows.push_back(nrow);
        out.sup_windowed_error = std::max(
            out.sup_windowed_error,
            sup_windowed(cfg, zs.u - gauge_aligned(ns.u, cbar, ns.time)));
    };
    save(false);
    for (int i = 0; i < steps; ++i) {
        try {
            zsim.strang_step(zs, znoise.next_step());
            nnoise.next_step();
            nsim.stratonovich_step(ns, dt, nnoise.last_step_total());
        } catch (const std::runtime_error&) {
            out.excluded_blowup = true;
            out.zakharov.blew_up = true;
            break;
        }
        const bool tripped = monitor.check(zsim.driver(), zs.driver);
        out.tripped = out.tripped || tripped;
        if (tripped && exclude_on_trip) {
            out.excluded_trip = true;
            break;
        }
        if ((i + 1) % cfg.save_every == 0 || i + 1 == steps) save(tripped);
    }
    out.zakharov.tripped = monitor.tripped();
    out.zakharov.tripped_at = monitor.tripped_at.value_or(-1.0);
    out.zakharov.increment_checksum = znoise.checksum();
    out.nls.increment_checksum = nnoise.checksum();
    return out;
}

namespace {

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * (v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - lo;
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

ConvergenceReport sweep(const Workbench& wb, double gamma,
                        bool exclude_on_trip) {
    const ExperimentConfig& cfg = wb.config();
    if (cfg.eps_list.empty())
        throw ConfigError("physics.eps_list", "missing (required for sweeps)");
    ConvergenceReport report;
    report.gamma = gamma;
    report.checksum_coupled = true;
    for (double eps : cfg.eps_list) {
        EpsSweepEntry entry;
        entry.eps = eps;
        entry.dt = cfg.dt_for(eps);
        std::vector<CoupledPathResult> results(cfg.paths);
        std::vector<char> done(cfg.paths, 0);
        parallel_for_paths(cfg.paths, cfg.threads, [&](int p) {
            results[p] = run_coupled_pair(wb, eps, gamma, p, exclude_on_trip);
            done[p] = 1;
        });
        for (int p = 0; p < cfg.paths; ++p) {
            if (!done[p]) continue;
            const auto& r = results[p];
            if (r.excluded_blowup) {
                ++entry.excluded_blowup;
                continue;
            }
            if (r.excluded_trip) {
                ++entry.excluded_trip;
                continue;
            }
            if (r.tripped) ++entry.tripped_logged;
            if (r.zakharov.increment_checksum != r.nls.increment_checksum)
                report.checksum_coupled = false;
            entry.errors.push_back(r.sup_windowed_error);
        }
        entry.paths_included = static_cast<int>(entry.errors.size());
        entry.median_err = quantile(entry.errors, 0.5);
        entry.q1_err = quantile(entry.errors, 0.25);
        entry.q3_err = quantile(entry.errors, 0.75);
        report.entries.push_back(std::move(entry));
    }
    report.strictly_decreasing = true;
    for (std::size_t i = 0; i + 1 < report.entries.size(); ++i) {
        const double a = report.entries[i].median_err;
        const double b = report.entries[i + 1].median_err;
        report.decay_ratios.push_back(a > 0.0 ? b / a : 0.0);
        if (!(b < a)) report.strictly_decreasing = false;
    }
    if (!report.entries.empty() && report.entries.front().median_err > 0.0)
        report.last_over_first =
            report.entries.back().median_err / report.entries.front().median_err;
    return report;
}

} // namespace

ConvergenceReport convergence_experiment(const Workbench& wb) {
    return sweep(wb, 1.0, true);
}

ConvergenceReport damping_exponent_experiment(const Workbench& wb) {
    return sweep(wb, wb.config().gamma, false);
}

KernelReport kernel_validation(const Workbench& wb, int samples) {
    const ExperimentConfig& cfg = wb.config();
    if (cfg.alpha <= 0.0)
        throw ConfigError("physics.alpha", "kernel validation needs alpha > 0");
    const SpectralGrid& g = wb.grid();
    OuDriver driver(wb.phi(), cfg.alpha);

    KernelReport report;
    report.samples = samples;

    // (c) analytic identity k(x,x) = -F(x)
    const RealField F = driver.compute_F();
    for (int j = 0; j < g.size(); ++j) {
        const double x = g.node(j);
        report.max_identity_error = std::max(
            report.max_identity_error,
            std::fabs(driver.kernel_k(x, x) + F.physical()[j]));
    }

    // probe grid: 5 x 5 node pairs spread over the domain
    std::vector<int> idx;
    for (int i = 0; i < 5; ++i) idx.push_back(g.size() / 10 + i * g.size() / 5);
    struct Acc {
        double sum = 0.0, sumsq = 0.0;
    };
    std::vector<Acc> acc_k1(25), acc_k(25);

    GaussianStream rng(cfg.seed ^ 0x6b65726eULL);
    for (int s = 0; s < samples; ++s) {
        DriverState state = driver.sample_stationary(rng);
        const RealField z = driver.z_field(state);
        const RealField w1 = apply_symbol(z, symbol_inverse_second_derivative,
                                          ZeroModePolicy::project);
        const RealField mz = driver.minverse_z(state);
        const auto& zv = z.physical();
        const auto& w1v = w1.physical();
        const auto& mzv = mz.physical();
        for (int a = 0; a < 5; ++a) {
            for (int b = 0; b < 5; ++b) {
                const int p = 5 * a + b;
                const double v1 = zv[idx[a]] * w1v[idx[b]];
                const double v2 =
                    zv[idx[a]] * mzv[idx[b]] + zv[idx[b]] * mzv[idx[a]];
                acc_k1[p].sum += v1;
                acc_k1[p].sumsq += v1 * v1;
                acc_k[p].sum += v2;
                acc_k[p].sumsq += v2 * v2;
            }
        }
    }

    const auto& modes = wb.phi().modes();
    for (int a = 0; a < 5; ++a) {
        for (int b = 0; b < 5; ++b) {
            const int p = 5 * a + b;
            const double x = g.node(idx[a]);
            const double y = g.node(idx[b]);

            // analytic K1 double sum collapses to the diagonal for a phi
            // diagonal on the trig basis
            double k1 = 0.0;
            const double amp2 = 2.0 / g.length();
            for (const auto& m : modes) {
                if (m.lambda == 0.0) continue;
                const double ex = m.is_sin ? std::sin(m.kappa * x)
                                           : std::cos(m.kappa * x);
                const double ey = m.is_sin ? std::sin(m.kappa * y)
                                           : std::cos(m.kappa * y);
                k1 += m.lambda * m.lambda *
                      kernel_K1(cfg.alpha, m.kappa, m.kappa) * amp2 * ex * ey;
            }

            KernelProbe probe1;
            probe1.x = x;
            probe1.y = y;
            probe1.mc = acc_k1[p].sum / samples;
            probe1.analytic = k1;
            probe1.stderr_mc = std::sqrt(
                std::max(acc_k1[p].sumsq / samples - probe1.mc * probe1.mc, 0.0) /
                samples);
            report.k1_probes.push_back(probe1);
            if (probe1.stderr_mc > 0.0)
                report.max_k1_sigma =
                    std::max(report.max_k1_sigma,
                             std::fabs(probe1.mc - probe1.analytic) / probe1.stderr_mc);

            KernelProbe probe2;
            probe2.x = x;
            probe2.y = y;
            probe2.mc = acc_k[p].sum / samples;
            probe2.analytic = driver.kernel_k(x, y);
            probe2.stderr_mc = std::sqrt(
                std::max(acc_k[p].sumsq / samples - probe2.mc * probe2.mc, 0.0) /
                samples);
            report.k_probes.push_back(probe2);
            if (probe2.stderr_mc > 0.0)
                report.max_k_sigma =
                    std::max(report.max_k_sigma,
                             std::fabs(probe2.mc - probe2.analytic) / probe2.stderr_mc);
        }
    }
    return report;
}

GeneratorReport generator_validation(const Workbench& wb, int paths,
                                     double t_final) {
    const ExperimentConfig& cfg = wb.config();
    const SpectralGrid& g = wb.grid();
    const double eps = cfg.epsilon;
    const double dt = cfg.dt_for(eps);
    const int steps = static_cast<int>(std::llround(t_final / dt));

    // test function: centered window bump (real, H^1, compact support)
    const ComplexField h =
        window_bump(g, cfg.pulse_center(), cfg.length / 8.0).as_complex();

    ZakharovSim::Params params;
    params.epsilon = eps;
    params.alpha = cfg.alpha;
    params.gamma = cfg.gamma;
    params.dt = dt;
    params.n_sub = cfg.n_sub;

    struct PathOut {
        double fd = 0.0;        // ((u_eps(T), h) - (u_eps(0), h)) / T
        double gen = 0.0;       // (1/T) int drift(u_nls) dt (trapezoid)
        double mart = 0.0;      // NLS martingale value at T
        double quad_int = 0.0;  // int quad_var(u_nls) dt (trapezoid)
    };
    std::vector<PathOut> outs(paths);

    parallel_for_paths(paths, cfg.threads, [&](int p) {
        ZakharovSim zsim(wb.phi(), params);
        NlsSim nsim(wb.phi());
        PathNoise znoise(GaussianStream(cfg.seed).child(p),
                         wb.phi().mode_count(), zsim.blocks_per_step(), dt);
        PathNoise nnoise(GaussianStream(cfg.seed).child(p),
                         wb.phi().mode_count(), zsim.blocks_per_step(), dt);
        const InitialData data = initial_data(g, resolved_profile(cfg));
        ZakharovState zs = zsim.initial_state(data);
        NlsState ns = nsim.initial_state(data.u0);
        const double cbar = mass(data.u0) / cfg.length;

        // drift of the gauge-aligned limit field: the paper drift plus the
        // explicit torus gauge rate -cbar (i u, h)
        auto eval_gauged = [&](const NlsState& s) {
            const ComplexField ug = gauge_aligned(s.u, cbar, s.time);
            GeneratorEval ev = limit_generator(ug, h, wb.phi());
            ev.drift -= cbar * inner(cplx{0.0, 1.0} * ug, h);
            return std::pair{ev, inner(ug, h)};
        };

        const double ip0 = inner(ns.u, h);
        auto [ev0, ipg0] = eval_gauged(ns);
        double drift_prev = ev0.drift;
        double quad_prev = ev0.quad_var;
        double drift_int = 0.0, quad_int = 0.0;
        for (int i = 0; i < steps; ++i) {
            zsim.strang_step(zs, znoise.next_step());
            nnoise.next_step();
            nsim.stratonovich_step(ns, dt, nnoise.last_step_total());
            auto [ev, ipg] = eval_gauged(ns);
            drift_int += 0.5 * dt * (drift_prev + ev.drift);
            quad_int += 0.5 * dt * (quad_prev + ev.quad_var);
            drift_prev = ev.drift;
            quad_prev = ev.quad_var;
            if (i + 1 == steps) {
                outs[p].mart = ipg - ipg0 - drift_int;
            }
        }
        const double T = steps * dt;
        outs[p].fd = (inner(zs.u, h) - ip0) / T;
        outs[p].gen = drift_int / T;
        outs[p].quad_int = quad_int;
    });

    GeneratorReport r;
    r.paths = paths;
    double sum_fd = 0.0, sum_gen = 0.0, sum_d = 0.0, sum_d2 = 0.0;
    double sum_m = 0.0, sum_m2 = 0.0, sum_q = 0.0, sum_q2 = 0.0;
    for (const auto& o : outs) {
        sum_fd += o.fd;
        sum_gen += o.gen;
        const double d = o.fd - o.gen;
        sum_d += d;
        sum_d2 += d * d;
        sum_m += o.mart;
        sum_m2 += o.mart * o.mart;
        sum_q += o.quad_int;
        sum_q2 += o.quad_int * o.quad_int;
    }
    const double n = paths;
    r.drift_fd = sum_fd / n;
    r.drift_generator = sum_gen / n;
    const double mean_d = sum_d / n;
    const double var_d = std::max(sum_d2 / n - mean_d * mean_d, 0.0);
    r.drift_diff = mean_d;
    r.drift_ci = 1.96 * std::sqrt(var_d / n);
    r.drift_within_ci = std::fabs(mean_d) <= r.drift_ci;

    const double mean_m = sum_m / n;
    r.var_mart = std::max(sum_m2 / n - mean_m * mean_m, 0.0);
    r.var_quad = sum_q / n;
    const double se_var = r.var_mart * std::sqrt(2.0 / std::max(n - 1.0, 1.0));
    const double var_q = std::max(sum_q2 / n - r.var_quad * r.var_quad, 0.0);
    const double se_q = std::sqrt(var_q / n);
    r.var_ci = 1.96 * (se_var + se_q);
    r.variance_within_ci = std::fabs(r.var_mart - r.var_quad) <= r.var_ci;
    return r;
}

void write_csv(const TrajectoryRecord& rec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "run_id,config_hash,time,mass,H,K,H1,H2,H_eps,V_norm,windowed_u,"
           "driver_z_norm,driver_zeta_norm,boundary_amp,monitor_tripped\n";
    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (const auto& r : rec.rows) {
        out << rec.run_id << ',' << rec.config_hash << ',' << fmt(r.time) << ','
            << fmt(r.energy.mass) << ',' << fmt(r.energy.H) << ','
            << fmt(r.energy.K) << ',' << fmt(r.energy.H1) << ','
            << fmt(r.energy.H2) << ',' << fmt(r.energy.H_eps) << ','
            << fmt(r.energy.V_norm) << ',' << fmt(r.windowed_u) << ','
            << fmt(r.driver_z_norm) << ',' << fmt(r.driver_zeta_norm) << ','
            << fmt(r.boundary_amp) << ',' << (r.monitor_tripped ? 1 : 0) << '\n';
        out.flush();
    }
}

std::string report_to_ndjson(const ConvergenceReport& r,
                             const std::string& kind) {
    json j;
    j["kind"] = kind;
    j["gamma"] = r.gamma;
    j["strictly_decreasing"] = r.strictly_decreasing;
    j["last_over_first"] = r.last_over_first;
    j["decay_ratios"] = r.decay_ratios;
    j["checksum_coupled"] = r.checksum_coupled;
    json entries = json::array();
    for (const auto& e : r.entries) {
        entries.push_back({{"eps", e.eps},
                           {"dt", e.dt},
                           {"paths_included", e.paths_included},
                           {"excluded_trip", e.excluded_trip},
                           {"excluded_blowup", e.excluded_blowup},
                           {"tripped_logged", e.tripped_logged},
                           {"median_err", e.median_err},
                           {"q1_err", e.q1_err},
                           {"q3_err", e.q3_err},
                           {"errors", e.errors}});
    }
    j["entries"] = entries;
    return j.dump();
}

std::string report_to_ndjson(const KernelReport& r) {
    json j;
    j["kind"] = "kernel-validation";
    j["samples"] = r.samples;
    j["max_identity_error"] = r.max_identity_error;
    j["max_k1_sigma"] = r.max_k1_sigma;
    j["max_k_sigma"] = r.max_k_sigma;
    auto probes = [](const std::vector<KernelProbe>& ps) {
        json arr = json::array();
        for (const auto& p : ps)
            arr.push_back({{"x", p.x},
                           {"y", p.y},
                           {"mc", p.mc},
                           {"analytic", p.analytic},
                           {"stderr", p.stderr_mc}});
        return arr;
    };
    j["k1_probes"] = probes(r.k1_probes);
    j["k_probes"] = probes(r.k_probes);
    return j.dump();
}

std::string report_to_ndjson(const GeneratorReport& r) {
    json j;
    j["kind"] = "generator-validation";
    j["paths"] = r.paths;
    j["drift_fd"] = r.drift_fd;
    j["drift_generator"] = r.drift_generator;
    j["drift_diff"] = r.drift_diff;
    j["drift_ci95"] = r.drift_ci;
    j["drift_within_ci"] = r.drift_within_ci;
    j["var_martingale"] = r.var_mart;
    j["var_quad"] = r.var_quad;
    j["var_ci95"] = r.var_ci;
    j["variance_within_ci"] = r.variance_within_ci;
    return j.dump();
}

void write_manifest(const ExperimentConfig& cfg, const std::string& command,
                    double wall_seconds, const std::string& path) {
    json j;
    j["command"] = command;
    j["config"] = json::parse(cfg.to_json());
    j["seed"] = cfg.seed;
    j["code_version"] = "zakharov 0.1.0";
    j["wall_seconds"] = wall_seconds;
    // Hilbert-Schmidt norms of the resolved noise operator, for scaling
    // studies (homogeneous for negative orders)
    {
        Workbench wb(cfg);
        json hs = json::object();
        for (const auto& e : wb.phi().hs_table())
            hs[std::to_string(e.order)] = e.value;
        j["noise_hs_norms"] = hs;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

namespace {
std::atomic<bool> g_interrupted{false};
} // namespace

void request_interrupt() { g_interrupted.store(true); }
bool interrupt_requested() { return g_interrupted.load(); }

void parallel_for_paths(int paths, int threads,
                        const std::function<void(int)>& body) {
    int n = threads > 0 ? threads
                        : static_cast<int>(std::thread::hardware_concurrency());
    n = std::max(1, std::min(n, paths));
    if (n == 1) {
        for (int p = 0; p < paths; ++p) {
            if (interrupt_requested()) return;
            body(p);
        }
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n);
    for (int t = 0; t < n; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int p = next.fetch_add(1); p < paths;
                     p = next.fetch_add(1)) {
                    if (interrupt_requested()) return;
                    body(p);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace zk
