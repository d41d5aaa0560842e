#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "oracle_helpers.hpp"
#include "plstomo/harness.hpp"
#include "plstomo/projector.hpp"

using namespace plstomo;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

fs::path temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig small_limited_config(const fs::path& outdir) {
    ExperimentConfig cfg = ExperimentConfig::limited_angle(PhantomModel::A, 48);
    cfg.geometry.detectors = 48;
    cfg.solver.outer_iters = 8;
    cfg.solver.lsqr_iters = 60;
    cfg.output_dir = outdir.string();
    return cfg;
}

} // namespace

TEST_CASE("residual metrics") {
    const auto phantom = make_phantom(PhantomSpec::defaults(PhantomModel::A, 32));
    const Grid& grid = phantom.u_true.grid;
    auto geom = ProjectionGeometry::covering(uniform_angles(16, 0.0, pi), 32,
                                             grid, Kernel::Line);
    const auto w = assemble(geom, grid);
    const Sinogram p = apply(w, phantom.u_true);

    SUBCASE("perfect reconstruction zeroes every residual") {
        const auto report = residuals(phantom.u_true, phantom.mask,
                                      &phantom.u_true, &phantom.mask, w, p);
        CHECK(report.dr <= 1e-12);
        CHECK(*report.mr == 0.0);
        CHECK(*report.sr == 0.0);
    }
    SUBCASE("masks differing in exactly 7 pixels give SR = 7") {
        Image mask_rec = phantom.mask;
        int flipped = 0;
        for (int i = 0; i < grid.size() && flipped < 7; i += grid.size() / 9) {
            mask_rec.values[i] = 1.0 - mask_rec.values[i];
            ++flipped;
        }
        REQUIRE(flipped == 7);
        const auto report = residuals(phantom.u_true, mask_rec,
                                      &phantom.u_true, &phantom.mask, w, p);
        CHECK(*report.sr == 7.0);
    }
    SUBCASE("DR equals the brute-force norm on a 16x16 instance") {
        const Grid small(16, 16);
        auto g16 = ProjectionGeometry::covering(uniform_angles(8, 0.0, pi), 16,
                                                small, Kernel::Line);
        const auto w16 = assemble(g16, small);
        oracle::Rng rng(61);
        const Image u(small, rng.vector(small.size()));
        const Sinogram q(g16, rng.vector(g16.rows()));
        const auto report =
            residuals(u, Image(small), nullptr, nullptr, w16, q);
        const double brute = (oracle::dense(w16) * u.values - q.values).norm();
        CHECK(report.dr == doctest::Approx(brute).epsilon(1e-12));
        CHECK(!report.mr);
        CHECK(!report.sr);
    }
}

TEST_CASE("config keys round-trip through the manifest") {
    ExperimentConfig cfg = ExperimentConfig::limited_angle(PhantomModel::C, 96);
    cfg.pls.kappa = 0.017;
    cfg.solver.tr_radius0 = 2.5;
    cfg.noise.seed = 1234567890123ull;
    cfg.output_dir = "some/dir";

    const auto path = fs::temp_directory_path() / "plstomo_manifest.txt";
    write_manifest(path.string(), cfg);
    const ExperimentConfig back = read_config(path.string());

    for (const auto& key : config_keys())
        CHECK(config_get(back, key) == config_get(cfg, key));
    fs::remove(path);
}

TEST_CASE("config_set applies dotted keys") {
    ExperimentConfig cfg;
    config_set(cfg, "pls.kappa", "0.02");
    CHECK(cfg.pls.kappa == 0.02);
    config_set(cfg, "phantom.model", "C");
    CHECK(cfg.phantom.model == PhantomModel::C);
    CHECK(cfg.phantom.background_max == 0.8); // model implies the range
    config_set(cfg, "phantom.background_max", "0.6");
    CHECK(cfg.phantom.background_max == 0.6);
    config_set(cfg, "solver.fix_background", "true");
    CHECK(cfg.solver.fix_background);
    config_set(cfg, "noise.snr_db", "inf");
    CHECK(std::isinf(cfg.noise.snr_db));
    CHECK_THROWS_AS(config_set(cfg, "nonsense.key", "1"),
                    std::invalid_argument);
    CHECK_THROWS_AS(apply_config_line(cfg, "no equals sign"),
                    std::invalid_argument);
}

TEST_CASE("inverse-crime guard") {
    auto outdir = temp_dir("plstomo_crime");
    ExperimentConfig cfg = small_limited_config(outdir);
    cfg.geometry.inversion_kernel = Kernel::Line; // same as data kernel
    CHECK_THROWS(run_experiment(cfg));
    CHECK(fs::exists(outdir / "FAILED"));

    cfg.allow_inverse_crime = true;
    cfg.solver.outer_iters = 2;
    CHECK_NOTHROW(run_experiment(cfg));
    CHECK(!fs::exists(outdir / "FAILED"));
    fs::remove_all(outdir);
}

TEST_CASE("experiments re-run byte-identically") {
    auto dir1 = temp_dir("plstomo_det1");
    auto dir2 = temp_dir("plstomo_det2");
    ExperimentConfig cfg = small_limited_config(dir1);
    run_experiment(cfg);
    cfg.output_dir = dir2.string();
    run_experiment(cfg);

    CHECK(slurp(dir1 / "metrics.csv") == slurp(dir2 / "metrics.csv"));
    CHECK(slurp(dir1 / "convergence.csv") == slurp(dir2 / "convergence.csv"));
    CHECK(slurp(dir1 / "u_rec.csv") == slurp(dir2 / "u_rec.csv"));

    // output bundle is complete
    for (const char* name :
         {"manifest.txt", "u_rec.csv", "u_rec.pgm", "mask_rec.csv",
          "mask_rec.pgm", "u0_rec.csv", "u0_rec.pgm", "sinogram.csv",
          "convergence.csv", "metrics.csv", "timing.txt"})
        CHECK(fs::exists(dir1 / name));

    // DR in metrics.csv equals residuals() recomputed from saved artifacts
    const Image u_rec = read_image_csv((dir1 / "u_rec.csv").string());
    const Sinogram data = read_sinogram_csv((dir1 / "sinogram.csv").string());
    const auto w_data = assemble(
        cfg.geometry.build(u_rec.grid, cfg.geometry.data_kernel), u_rec.grid);
    const auto recomputed =
        residuals(u_rec, Image(u_rec.grid), nullptr, nullptr, w_data, data);
    const std::string metrics = slurp(dir1 / "metrics.csv");
    CHECK(metrics.find(format_double(recomputed.dr)) != std::string::npos);

    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("lambda sweep") {
    SUBCASE("identical lambda entries give identical rows") {
        auto outdir = temp_dir("plstomo_sweep_eq");
        ExperimentConfig cfg = small_limited_config(outdir);
        cfg.solver.outer_iters = 4;
        const auto rows = lambda_sweep(cfg, {1e-3, 1e-3});
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].dr == rows[1].dr);
        CHECK(rows[0].mr == rows[1].mr);
        CHECK(rows[0].sr == rows[1].sr);
        CHECK(fs::exists(outdir / "sweep.csv"));
        CHECK(fs::exists(outdir / "lambda_00" / "metrics.csv"));
        CHECK(fs::exists(outdir / "lambda_01" / "metrics.csv"));
        fs::remove_all(outdir);
    }
    SUBCASE("grid validation") {
        auto outdir = temp_dir("plstomo_sweep_bad");
        ExperimentConfig cfg = small_limited_config(outdir);
        CHECK_THROWS_AS(lambda_sweep(cfg, {}), std::invalid_argument);
        CHECK_THROWS_AS(lambda_sweep(cfg, {1.0, 0.5}), std::invalid_argument);
        CHECK_THROWS_AS(lambda_sweep(cfg, {-1.0, 1.0}), std::invalid_argument);
        fs::remove_all(outdir);
    }
    SUBCASE("noiseless benchmark: DR grows with lambda on the lower tail") {
        auto outdir = temp_dir("plstomo_sweep_tail");
        ExperimentConfig cfg = ExperimentConfig::benchmark(PhantomModel::A, 64);
        cfg.geometry.angles = 24;
        cfg.geometry.detectors = 64;
        cfg.pls.kappa = 0.002;
        cfg.solver.outer_iters = 40;
        cfg.output_dir = outdir.string();
        const auto rows = lambda_sweep(cfg, {1e-9, 1e-7, 1e-5, 1e-3});
        REQUIRE(rows.size() == 4);
        CHECK(rows[0].dr <= rows[1].dr);
        CHECK(rows[1].dr <= rows[2].dr);
        CHECK(rows[2].dr <= rows[3].dr);
        fs::remove_all(outdir);
    }
}

TEST_CASE("thresholded Tikhonov baseline produces a report") {
    auto outdir = temp_dir("plstomo_baseline");
    ExperimentConfig cfg = small_limited_config(outdir);
    const auto report = thresholded_tikhonov_baseline(cfg);
    CHECK(report.dr > 0.0);
    CHECK(report.sr.has_value());
    fs::remove_all(outdir);
}
