#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "plstomo/harness.hpp"
#include "plstomo/projector.hpp"

namespace fs = std::filesystem;
using namespace plstomo;

namespace {

// Every config key gets a flag: dots become dashes (pls.kappa -> --pls-kappa).
// Values are applied in command-line order after any --config file.
struct ConfigCli {
    std::vector<std::pair<std::string, std::string>> overrides;
    std::string config_path;

    void attach(CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path,
                        "flat key = value configuration file");
        for (const auto& key : config_keys()) {
            std::string flag = "--" + key;
            for (auto& ch : flag)
                if (ch == '.')
                    ch = '-';
            cmd->add_option_function<std::string>(
                   flag,
                   [this, key](const std::string& value) {
                       overrides.emplace_back(key, value);
                   },
                   "config key " + key)
                ->type_name("VALUE");
        }
    }

    ExperimentConfig resolve(ExperimentConfig base) const {
        if (!config_path.empty()) {
            base = read_config(config_path);
        }
        for (const auto& [key, value] : overrides)
            config_set(base, key, value);
        return base;
    }
};

void print_report(const ResidualReport& report) {
    std::cout << "lambda  " << format_double(report.lambda) << "\n"
              << "DR      " << format_double(report.dr) << "\n";
    if (report.mr)
        std::cout << "MR      " << format_double(*report.mr) << "\n";
    if (report.sr)
        std::cout << "SR      " << format_double(*report.sr) << "\n";
    std::cout << "runtime " << format_double(report.runtime_seconds) << " s\n";
}

int cmd_phantom(const ExperimentConfig& cfg) {
    const fs::path outdir(cfg.output_dir);
    fs::create_directories(outdir);
    Phantom phantom = make_phantom(cfg.phantom);
    write_image_csv((outdir / "u_true.csv").string(), phantom.u_true);
    write_image_pgm16((outdir / "u_true.pgm").string(), phantom.u_true);
    write_image_csv((outdir / "mask_true.csv").string(), phantom.mask);
    write_image_pgm16((outdir / "mask_true.pgm").string(), phantom.mask);
    write_image_csv((outdir / "u0_true.csv").string(), phantom.u0_true);
    write_image_pgm16((outdir / "u0_true.pgm").string(), phantom.u0_true);
    write_manifest((outdir / "manifest.txt").string(), cfg);
    std::cout << "phantom " << phantom_model_name(cfg.phantom.model) << " ("
              << cfg.phantom.size << "x" << cfg.phantom.size << ") -> "
              << outdir.string() << "\n";
    return 0;
}

int cmd_project(const ExperimentConfig& cfg, bool dump_operator) {
    const fs::path outdir(cfg.output_dir);
    fs::create_directories(outdir);
    Phantom phantom = make_phantom(cfg.phantom);
    const Grid& grid = phantom.u_true.grid;
    SparseOperator w =
        assemble(cfg.geometry.build(grid, cfg.geometry.data_kernel), grid);
    Sinogram clean = apply(w, phantom.u_true);
    Sinogram noisy = add_noise_snr(clean, cfg.noise.snr_db, cfg.noise.seed);
    write_sinogram_csv((outdir / "sinogram.csv").string(), noisy);
    if (dump_operator)
        w.dump_triplets_csv((outdir / "operator.csv").string());
    write_manifest((outdir / "manifest.txt").string(), cfg);
    std::cout << "projected " << w.rows() << " rays ("
              << kernel_name(cfg.geometry.data_kernel) << " kernel) -> "
              << outdir.string() << "\n";
    return 0;
}

int cmd_reconstruct(const ExperimentConfig& cfg) {
    ExperimentResult result = run_experiment(cfg);
    print_report(result.report);
    std::cout << "outputs in " << cfg.output_dir << "\n";
    return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, double lo, double hi, int count) {
    if (count < 1 || !(lo > 0.0) || !(hi >= lo))
        throw std::invalid_argument("sweep: need 0 < lo <= hi and count >= 1");
    std::vector<double> lambdas(count);
    for (int i = 0; i < count; ++i)
        lambdas[i] = count == 1 ? lo
                                : std::pow(10.0, std::log10(lo) +
                                                     i * (std::log10(hi) -
                                                          std::log10(lo)) /
                                                         (count - 1));
    auto rows = lambda_sweep(cfg, lambdas);
    std::cout << "lambda,dr,mr,sr\n";
    for (const auto& row : rows)
        std::cout << format_double(row.lambda) << ',' << format_double(row.dr)
                  << ',' << format_double(row.mr) << ','
                  << format_double(row.sr) << "\n";
    std::cout << "sweep outputs in " << cfg.output_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"plstomo: parametric level-set reconstruction of partially "
                 "discrete tomography"};
    app.require_subcommand(1);

    std::string model_name = "A";
    auto add_model_option = [&](CLI::App* cmd) {
        cmd->add_option("-m,--model", model_name,
                        "phantom model (A, B, C, D, BinaryDemo)");
    };

    ConfigCli phantom_cli, project_cli, reconstruct_cli, sweep_cli, bench_cli;
    bool dump_operator = false;
    double sweep_lo = 1e4, sweep_hi = 1e9;
    int sweep_count = 12;

    auto* phantom_cmd =
        app.add_subcommand("phantom", "generate a phantom bundle");
    add_model_option(phantom_cmd);
    phantom_cli.attach(phantom_cmd);

    auto* project_cmd =
        app.add_subcommand("project", "project a phantom to a sinogram");
    add_model_option(project_cmd);
    project_cmd->add_flag("--dump-operator", dump_operator,
                          "also write the operator triplet CSV");
    project_cli.attach(project_cmd);

    auto* reconstruct_cmd =
        app.add_subcommand("reconstruct", "run a full experiment");
    reconstruct_cli.attach(reconstruct_cmd);

    auto* sweep_cmd = app.add_subcommand(
        "sweep", "run the experiment over a log-spaced lambda grid");
    add_model_option(sweep_cmd);
    sweep_cmd->add_option("--lambda-min", sweep_lo, "smallest lambda");
    sweep_cmd->add_option("--lambda-max", sweep_hi, "largest lambda");
    sweep_cmd->add_option("--lambda-count", sweep_count, "grid size");
    sweep_cli.attach(sweep_cmd);

    auto* bench_cmd = app.add_subcommand(
        "benchmark", "full-view noiseless protocol for a phantom model");
    add_model_option(bench_cmd);
    bench_cli.attach(bench_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(phantom_cmd)) {
            ExperimentConfig base;
            config_set(base, "phantom.model", model_name);
            return cmd_phantom(phantom_cli.resolve(base));
        }
        if (app.got_subcommand(project_cmd)) {
            ExperimentConfig base;
            config_set(base, "phantom.model", model_name);
            return cmd_project(project_cli.resolve(base), dump_operator);
        }
        if (app.got_subcommand(reconstruct_cmd)) {
            return cmd_reconstruct(reconstruct_cli.resolve(ExperimentConfig{}));
        }
        if (app.got_subcommand(sweep_cmd)) {
            ExperimentConfig base = ExperimentConfig::limited_angle(
                phantom_model_from_name(model_name));
            return cmd_sweep(sweep_cli.resolve(base), sweep_lo, sweep_hi,
                             sweep_count);
        }
        if (app.got_subcommand(bench_cmd)) {
            ExperimentConfig base =
                ExperimentConfig::benchmark(phantom_model_from_name(model_name));
            return cmd_reconstruct(bench_cli.resolve(base));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
