#include "CLI11.hpp"

#include "zk/harness.hpp"

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;

namespace {

void on_signal(int) { zk::request_interrupt(); }

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> paths;
    std::vector<double> eps_list;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("-c,--config", o.config_path, "JSON config file");
    cmd->add_option("-o,--out", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed, "base seed override");
    cmd->add_option("--paths", o.paths, "Monte Carlo path count override");
    cmd->add_option("--eps-list", o.eps_list, "epsilon sweep override")
        ->delimiter(',');
}

zk::ExperimentConfig load_config(const CommonOpts& o) {
    zk::ExperimentConfig cfg;
    if (!o.config_path.empty())
        cfg = zk::ExperimentConfig::from_json_file(o.config_path);
    if (o.seed) cfg.seed = *o.seed;
    if (o.paths) cfg.paths = *o.paths;
    if (!o.eps_list.empty()) cfg.eps_list = o.eps_list;
    if (!o.out_dir.empty()) {
        cfg.out_dir = o.out_dir;
    } else if (cfg.out_dir.empty()) {
        if (const char* env = std::getenv("ZAKHAROV_OUT_DIR")) cfg.out_dir = env;
        if (cfg.out_dir.empty()) cfg.out_dir = ".";
    }
    cfg.validate();
    return cfg;
}

std::string out_path(const zk::ExperimentConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

void append_ndjson(const zk::ExperimentConfig& cfg, const std::string& line) {
    if (!cfg.write_ndjson) return;
    std::ofstream out(out_path(cfg, "report.ndjson"), std::ios::app);
    out << line << '\n';
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

} // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    CLI::App app{"stochastic Zakharov / limit-NLS simulation toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    auto* sim_z = app.add_subcommand("simulate-zakharov",
                                     "integrate the translated Zakharov system");
    auto* sim_n = app.add_subcommand("simulate-nls",
                                     "integrate the limit stochastic NLS");
    auto* sweep_e = app.add_subcommand(
        "sweep-epsilon", "coupled-path convergence study over an epsilon list");
    auto* sweep_g = app.add_subcommand(
        "sweep-gamma", "damping-exponent study (gamma from config)");
    auto* val_k =
        app.add_subcommand("validate-kernels", "invariant-measure kernel checks");
    auto* val_g = app.add_subcommand("validate-generator",
                                     "limit-generator drift and variance checks");
    auto* show = app.add_subcommand("show-config", "echo the resolved config");
    for (auto* cmd : {sim_z, sim_n, sweep_e, sweep_g, val_k, val_g, show})
        add_common(cmd, opts);
    double gamma_override = 0.0;
    sweep_g->add_option("--gamma", gamma_override, "damping exponent override");
    int samples = 10000;
    val_k->add_option("--samples", samples, "stationary sample count");
    int gen_paths = 0;
    double gen_t = 0.5;
    val_g->add_option("--paths-gen", gen_paths, "generator ensemble size");
    val_g->add_option("--t-final", gen_t, "generator comparison horizon");

    CLI11_PARSE(app, argc, argv);

    try {
        zk::ExperimentConfig cfg = load_config(opts);
        Timer timer;

        if (show->parsed()) {
            std::cout << cfg.to_json() << std::endl;
            return 0;
        }

        zk::Workbench wb(cfg);

        if (sim_z->parsed() || sim_n->parsed()) {
            const bool zak = sim_z->parsed();
            const std::string cmd = zak ? "simulate-zakharov" : "simulate-nls";
            for (int p = 0; p < cfg.paths; ++p) {
                if (zk::interrupt_requested()) break;
                zk::TrajectoryRecord rec =
                    zak ? zk::run_zakharov(wb, cfg.epsilon, cfg.gamma, p, false)
                        : zk::run_nls(wb, cfg.epsilon, cfg.gamma, p, false);
                if (cfg.write_csv)
                    zk::write_csv(rec, out_path(cfg, rec.run_id + ".csv"));
            }
            zk::write_manifest(cfg, cmd, timer.seconds(),
                               out_path(cfg, "manifest.json"));
            return zk::interrupt_requested() ? 1 : 0;
        }

        if (sweep_e->parsed() || sweep_g->parsed()) {
            const bool eps_sweep = sweep_e->parsed();
            if (!eps_sweep && gamma_override > 0.0) cfg.gamma = gamma_override;
            if (cfg.eps_list.empty())
                throw zk::ConfigError("physics.eps_list",
                                      "missing (required for sweeps)");
            zk::Workbench wb2(cfg);
            zk::ConvergenceReport rep = eps_sweep
                                            ? zk::convergence_experiment(wb2)
                                            : zk::damping_exponent_experiment(wb2);
            const std::string kind = eps_sweep ? "epsilon-sweep" : "gamma-sweep";
            append_ndjson(cfg, zk::report_to_ndjson(rep, kind));
            zk::write_manifest(cfg, kind, timer.seconds(),
                               out_path(cfg, "manifest.json"));
            std::cout << zk::report_to_ndjson(rep, kind) << std::endl;
            return zk::interrupt_requested() ? 1 : 0;
        }

        if (val_k->parsed()) {
            zk::KernelReport rep = zk::kernel_validation(wb, samples);
            append_ndjson(cfg, zk::report_to_ndjson(rep));
            zk::write_manifest(cfg, "validate-kernels", timer.seconds(),
                               out_path(cfg, "manifest.json"));
            std::cout << zk::report_to_ndjson(rep) << std::endl;
            return 0;
        }

        if (val_g->parsed()) {
            const int npaths = gen_paths > 0 ? gen_paths : cfg.paths;
            zk::GeneratorReport rep = zk::generator_validation(wb, npaths, gen_t);
            append_ndjson(cfg, zk::report_to_ndjson(rep));
            zk::write_manifest(cfg, "validate-generator", timer.seconds(),
                               out_path(cfg, "manifest.json"));
            std::cout << zk::report_to_ndjson(rep) << std::endl;
            return 0;
        }
    } catch (const zk::ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
