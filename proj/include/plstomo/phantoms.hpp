#pragma once

#include <cstdint>

#include "plstomo/core.hpp"

namespace plstomo {

enum class PhantomModel { A, B, C, D, BinaryDemo };

std::string phantom_model_name(PhantomModel m);
PhantomModel phantom_model_from_name(const std::string& name);

/// Partially discrete phantom: a smooth background in [0, background_max]
/// carrying a constant-valued anomaly of grey value anomaly_value.
struct PhantomSpec {
    PhantomModel model = PhantomModel::A;
    int size = 256;
    double background_max = 0.5;
    double anomaly_value = 1.0;
    std::uint64_t seed = 1;

    /// Spec with the conventional background range for the model
    /// (A/B: 0.5, C/D: 0.8, BinaryDemo: 0).
    static PhantomSpec defaults(PhantomModel model, int size = 256,
                                std::uint64_t seed = 1);
};

struct Phantom {
    Image u_true;  // composed image
    Image mask;    // binary anomaly indicator
    Image u0_true; // background field
};

/// Deterministic procedural phantom: the anomaly is the positive region of a
/// generator level-set built from smooth primitives (lobed blobs for A/B, an
/// open annulus for C/D, a star-shaped blob for BinaryDemo), the background a
/// low-order polynomial plus Gaussian bumps rescaled to [0, background_max].
Phantom make_phantom(const PhantomSpec& spec);

/// Adds zero-mean Gaussian noise rescaled so that
/// 10 log10(|p|^2 / |eta|^2) equals snr_db exactly for the drawn realization.
/// An infinite snr_db returns the input unchanged; |p| = 0 is an error.
Sinogram add_noise_snr(const Sinogram& p, double snr_db, std::uint64_t seed);

} // namespace plstomo
