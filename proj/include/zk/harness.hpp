#pragma once

#include "zk/diagnostics.hpp"
#include "zk/nls.hpp"
#include "zk/noise.hpp"
#include "zk/ou_driver.hpp"
#include "zk/rng.hpp"
#include "zk/spectral.hpp"
#include "zk/zakharov.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace zk {

// Thrown for malformed or inconsistent configuration; carries the offending
// field path for the CLI diagnostic (exit code 2).
struct ConfigError : std::runtime_error {
    std::string field;
    ConfigError(std::string field_, const std::string& what_)
        : std::runtime_error(what_ + " (field: " + field_ + ")"),
          field(std::move(field_)) {}
};

enum class TripPolicy { continue_run, halt };

struct WindowSpec {
    double center = 0.0;
    double radius = 0.0;
};

struct ExperimentConfig {
    // grid
    int n = 256;
    double length = 16.0 * M_PI;
    // physics
    double alpha = 1.0;
    double epsilon = 0.1;
    std::vector<double> eps_list; // strictly decreasing when present
    double gamma = 1.0;
    // noise: lambda(k) = amplitude (1+k^2)^{-exponent} k^4/(low_cut^4 + k^4).
    // The low-frequency cut keeps the Hdot^{-4} Hilbert-Schmidt norm O(1) on
    // the torus, matching the hypothesis under which the limit theorem runs;
    // low_cut = 0 disables it. An explicit table overrides the shape.
    double noise_amplitude = 0.25;
    double noise_exponent = 2.0;
    double noise_low_cut = 1.0;
    std::map<int, double> noise_table; // optional explicit multipliers
    // initial data
    InitialProfile initial; // x0 < 0 means "center of the domain"
    // stepping
    double dt_max = 0.01;
    double cfl = 0.25; // dt = min(dt_max, cfl * eps)
    double t_final = 1.0;
    int save_every = 10;
    int n_sub = 0; // 0 = auto
    // monitor
    double delta = 0.125;
    TripPolicy trip_policy = TripPolicy::continue_run;
    // monte carlo
    int paths = 20;
    std::uint64_t seed = 12345;
    int threads = 0; // 0 = hardware
    // metric
    double metric_s = 0.5;
    std::vector<WindowSpec> windows; // empty = one default window
    // diagnostics
    bool record_correctors = true;
    // output
    std::string out_dir;
    bool write_csv = true;
    bool write_ndjson = true;

    double dt_for(double eps) const;
    double pulse_center() const; // resolved x0
    std::vector<WindowSpec> resolved_windows() const;

    void validate() const; // throws ConfigError

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_json_file(const std::string& path);
    std::string to_json() const; // fully resolved, canonical key order
    std::uint64_t hash() const;  // over the canonical serialization
};

struct SampleRow {
    double time = 0.0;
    EnergyReport energy;
    double windowed_u = 0.0; // sup over configured windows
    double driver_z_norm = 0.0;
    double driver_zeta_norm = 0.0;
    double boundary_amp = 0.0;
    bool monitor_tripped = false;
};

struct TrajectoryRecord {
    std::string run_id;
    std::uint64_t config_hash = 0;
    std::vector<SampleRow> rows;
    std::uint64_t increment_checksum = 0;
    bool tripped = false;
    double tripped_at = -1.0;
    bool blew_up = false;
    // u snapshots at save times, kept for coupled-difference metrics
    std::vector<ComplexField> u_snapshots;
};

// Deterministic per-path increment stream: one block per driver substep,
// each block one N(0, dt/blocks) coefficient per noise mode.
class PathNoise {
public:
    PathNoise(GaussianStream stream, std::size_t modes, int blocks_per_step,
              double dt);
    const std::vector<std::vector<double>>& next_step();
    std::vector<double> last_step_total() const;
    std::uint64_t checksum() const { return checksum_.value(); }

private:
    GaussianStream stream_;
    std::size_t modes_;
    int blocks_;
    double block_dt_;
    std::vector<std::vector<double>> current_;
    StreamChecksum checksum_;
};

// Simulation environment shared by the runs of one experiment.
class Workbench {
public:
    explicit Workbench(const ExperimentConfig& cfg);
    const ExperimentConfig& config() const { return cfg_; }
    const SpectralGrid& grid() const { return *grid_; }
    const NoiseOperator& phi() const { return *phi_; }

private:
    ExperimentConfig cfg_;
    std::unique_ptr<SpectralGrid> grid_;
    std::unique_ptr<NoiseOperator> phi_;
};

// Single-path runs. `coupled` selects the shared-increment EM driver; the
// exact-Gaussian driver samples from `rng` instead.
TrajectoryRecord run_zakharov(const Workbench& wb, double eps, double gamma,
                              std::uint64_t path_index, bool keep_snapshots);
TrajectoryRecord run_nls(const Workbench& wb, double eps, double gamma,
                         std::uint64_t path_index, bool keep_snapshots);

// Coupled pair advanced in lockstep on independent but identically seeded
// increment streams; returns both records plus the pathwise sup error.
struct CoupledPathResult {
    TrajectoryRecord zakharov;
    TrajectoryRecord nls;
    double sup_windowed_error = 0.0;
    bool tripped = false;
    bool excluded_trip = false;
    bool excluded_blowup = false;
};
// exclude_on_trip: stop and exclude the path at the stopping time (the
// convergence sweep) versus logging the trip and completing the horizon
// (the damping-exponent sweep).
CoupledPathResult run_coupled_pair(const Workbench& wb, double eps,
                                   double gamma, std::uint64_t path_index,
                                   bool exclude_on_trip = true);

struct EpsSweepEntry {
    double eps = 0.0;
    double dt = 0.0;
    int paths_included = 0;
    int excluded_trip = 0;
    int excluded_blowup = 0;
    int tripped_logged = 0; // trips on paths kept in the statistics
    double median_err = 0.0;
    double q1_err = 0.0;
    double q3_err = 0.0;
    std::vector<double> errors;
};

struct ConvergenceReport {
    double gamma = 1.0;
    std::vector<EpsSweepEntry> entries;    // in eps_list order
    std::vector<double> decay_ratios;      // median[i+1] / median[i]
    double last_over_first = 0.0;
    bool strictly_decreasing = false;
    bool checksum_coupled = false; // all pairs consumed identical streams
};

ConvergenceReport convergence_experiment(const Workbench& wb);
ConvergenceReport damping_exponent_experiment(const Workbench& wb);

struct KernelProbe {
    double x = 0.0, y = 0.0;
    double mc = 0.0, analytic = 0.0, stderr_mc = 0.0;
};

struct KernelReport {
    int samples = 0;
    double max_identity_error = 0.0; // |k(x,x) + F(x)| over the grid
    std::vector<KernelProbe> k1_probes;
    std::vector<KernelProbe> k_probes;
    double max_k1_sigma = 0.0;
    double max_k_sigma = 0.0;
};

KernelReport kernel_validation(const Workbench& wb, int samples = 10000);

struct GeneratorReport {
    int paths = 0;
    double drift_fd = 0.0;        // finite-difference drift of E[(u_eps, h)]
    double drift_generator = 0.0; // E[(i dxx u + i|u|^2 u - u F/2, h)] on NLS
    double drift_diff = 0.0;
    double drift_ci = 0.0; // 95% band of the paired difference
    double var_mart = 0.0; // Var of the NLS martingale at T
    double var_quad = 0.0; // E int quad_var dt
    double var_ci = 0.0;
    bool drift_within_ci = false;
    bool variance_within_ci = false;
};

GeneratorReport generator_validation(const Workbench& wb, int paths = 200,
                                     double t_final = 0.5);

// output
void write_csv(const TrajectoryRecord& rec, const std::string& path);
std::string report_to_ndjson(const ConvergenceReport& r, const std::string& kind);
std::string report_to_ndjson(const KernelReport& r);
std::string report_to_ndjson(const GeneratorReport& r);
void write_manifest(const ExperimentConfig& cfg, const std::string& command,
                    double wall_seconds, const std::string& path);

// worker pool over path indices; results collected in index order
void parallel_for_paths(int paths, int threads,
                        const std::function<void(int)>& body);

// cooperative interrupt: remaining paths are skipped, partial results kept
void request_interrupt();
bool interrupt_requested();

} // namespace zk
