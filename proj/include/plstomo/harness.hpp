#pragma once

#include <limits>
#include <optional>

#include "plstomo/phantoms.hpp"
#include "plstomo/solvers.hpp"

namespace plstomo {

struct GeometryConfig {
    int angles = 180;
    double arc_start = 0.0;
    double arc_end = 3.141592653589793;
    bool include_arc_end = false; // limited-angle presets sample the endpoint
    int detectors = 256;
    // detector extent; auto (NaN bounds) spans the image diagonal
    double detector_min = std::numeric_limits<double>::quiet_NaN();
    double detector_max = std::numeric_limits<double>::quiet_NaN();
    Kernel data_kernel = Kernel::Line;
    Kernel inversion_kernel = Kernel::Joseph;

    ProjectionGeometry build(const Grid& grid, Kernel kernel) const;
};

struct NoiseConfig {
    double snr_db = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 42;
};

struct PlsConfig {
    double kappa = 0.01;
    double mu = 0.1; // experiment protocols use 0.1
    double eps_min = 0.01;
    double eta = 2.0;
    double spacing_factor = 5.0;
    int margin = 2;
    double radius_fraction = 0.2;
    double amplitude = 1.0;
    double u1 = 1.0;

    RbfConfig rbf() const { return RbfConfig{spacing_factor, margin, eta}; }
    HeavisideConfig heaviside() const {
        return HeavisideConfig{kappa, mu, eps_min};
    }
};

struct ExperimentConfig {
    PhantomSpec phantom;
    GeometryConfig geometry;
    NoiseConfig noise;
    double lambda = 1e-3;
    PlsConfig pls;
    SolveConfig solver;
    std::string output_dir = "out";
    bool allow_inverse_crime = false;

    /// Full-view protocol: 180 angles over [0, pi), detectors matching the
    /// grid, noiseless.
    static ExperimentConfig benchmark(PhantomModel model, int size = 256);
    /// Limited-data protocol: 5 angles over [0, 2pi/3], 10 dB SNR.
    static ExperimentConfig limited_angle(PhantomModel model, int size = 256);
};

// --- flat key=value configuration ------------------------------------------

/// Dotted config keys (geometry.angles, pls.kappa, ...); every key has a CLI
/// flag spelled with dashes (--geometry-angles).
std::vector<std::string> config_keys();
void config_set(ExperimentConfig& cfg, const std::string& key,
                const std::string& value);
std::string config_get(const ExperimentConfig& cfg, const std::string& key);

ExperimentConfig read_config(const std::string& path);
void apply_config_line(ExperimentConfig& cfg, const std::string& line);
/// Config echo (with version header comment) sufficient to re-run
/// bit-identically.
void write_manifest(const std::string& path, const ExperimentConfig& cfg);

// --- residual metrics -------------------------------------------------------

struct ResidualReport {
    double dr = 0.0;                // |W_data u_rec - p|
    std::optional<double> mr;       // |u_rec - u_true|
    std::optional<double> sr;       // mismatched-pixel count
    double lambda = 0.0;
    double runtime_seconds = 0.0;
};

/// DR always; MR/SR only when the ground truth is supplied.
ResidualReport residuals(const Image& u_rec, const Image& mask_rec,
                         const Image* u_true, const Image* mask_true,
                         const SparseOperator& w_data, const Sinogram& p);

/// Reconstruction mask {h_eps(A alpha) > 1/2}.
Image reconstruction_mask(const LevelSetModel& model, const Vector& alpha,
                          const Grid& grid, double eps, double mu);

// --- experiment orchestration -----------------------------------------------

struct ExperimentResult {
    Phantom phantom;
    Sinogram data;        // possibly noisy measurements
    Sinogram data_clean;  // noiseless projections
    ReconstructionState state;
    Image u_rec;
    Image mask_rec;
    ResidualReport report;
};

/// Generates the phantom, projects with the data kernel, adds noise,
/// reconstructs with the inversion-kernel operator, and writes the output
/// bundle (images, graymaps, convergence CSV, metrics CSV, manifest) to
/// cfg.output_dir. A FAILED marker file is left behind on error.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct SweepRow {
    double lambda = 0.0;
    double dr = 0.0;
    double mr = 0.0;
    double sr = 0.0;
};

/// Runs run_experiment once per lambda (shared phantom and noise realization
/// by seed determinism), each into its own subdirectory, and collects the
/// residual curves plus the noise floor |eta| into sweep.csv.
std::vector<SweepRow> lambda_sweep(const ExperimentConfig& cfg,
                                   const std::vector<double>& lambdas);

/// Tikhonov-only comparator: solve the background system with h = 0 and
/// threshold at (u1 + max u0_true) / 2.
ResidualReport thresholded_tikhonov_baseline(const ExperimentConfig& cfg);

} // namespace plstomo
