#include "plstomo/phantoms.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>

namespace plstomo {

namespace {

constexpr double pi = std::numbers::pi;

// Uniform in [0, 1) from the top 53 bits; avoids the implementation-defined
// std distributions so realizations are pinned to the seed everywhere.
double next_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double next_normal(std::mt19937_64& rng) {
    double u1 = next_uniform(rng);
    while (u1 == 0.0)
        u1 = next_uniform(rng);
    const double u2 = next_uniform(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
}

double jitter(std::mt19937_64& rng, double scale = 0.015) {
    return (2.0 * next_uniform(rng) - 1.0) * scale;
}

double gauss_bump(const Point2& x, const Point2& c, double sigma) {
    return std::exp(-(x - c).squaredNorm() / (2.0 * sigma * sigma));
}

// C^1 soft min/max keep composed anomaly boundaries smooth.
double smooth_min(double a, double b, double s) {
    return 0.5 * (a + b - std::sqrt((a - b) * (a - b) + s * s));
}
double smooth_max(double a, double b, double s) {
    return 0.5 * (a + b + std::sqrt((a - b) * (a - b) + s * s));
}

struct Lobe {
    Point2 center;
    double sigma;
    double amplitude;
};

double lobes_level(const Point2& x, const std::vector<Lobe>& lobes,
                   double threshold) {
    double v = 0.0;
    for (const auto& l : lobes)
        v += l.amplitude * gauss_bump(x, l.center, l.sigma);
    return v - threshold;
}

// Open annulus ("C" shape): a ring band with a disc-shaped gap cut out.
double open_annulus_level(const Point2& x, const Point2& center, double r0,
                          double band, double gap_angle, double gap_radius) {
    const double rho = (x - center).norm();
    const double ring = 1.0 - std::pow((rho - r0) / band, 2);
    const Point2 gap =
        center + r0 * Point2{std::cos(gap_angle), std::sin(gap_angle)};
    const double cut = (x - gap).squaredNorm() / (gap_radius * gap_radius) - 1.0;
    return smooth_min(ring, cut, 0.2);
}

struct Generator {
    std::function<double(const Point2&)> anomaly;    // level set, > 0 inside
    std::function<double(const Point2&)> background; // raw, rescaled later
};

Generator make_generator(PhantomModel model, std::mt19937_64& rng) {
    Generator g;
    switch (model) {
    case PhantomModel::A: {
        std::vector<Lobe> lobes = {
            {{0.50 + jitter(rng), 0.55 + jitter(rng)}, 0.16, 1.00},
            {{0.37 + jitter(rng), 0.42 + jitter(rng)}, 0.12, 0.90},
            {{0.63 + jitter(rng), 0.41 + jitter(rng)}, 0.11, 0.85},
            {{0.55 + jitter(rng), 0.67 + jitter(rng)}, 0.10, 0.80},
        };
        g.anomaly = [lobes](const Point2& x) {
            return lobes_level(x, lobes, 0.55);
        };
        g.background = [](const Point2& x) {
            return 0.5 * x.x() - 0.3 * x.y() +
                   0.6 * gauss_bump(x, {0.22, 0.72}, 0.16) +
                   0.5 * gauss_bump(x, {0.78, 0.20}, 0.20);
        };
        break;
    }
    case PhantomModel::B: {
        std::vector<Lobe> lobes = {
            {{0.34 + jitter(rng), 0.36 + jitter(rng)}, 0.13, 0.95},
            {{0.50 + jitter(rng), 0.50 + jitter(rng)}, 0.11, 0.85},
            {{0.66 + jitter(rng), 0.60 + jitter(rng)}, 0.12, 0.90},
            {{0.42 + jitter(rng), 0.62 + jitter(rng)}, 0.09, 0.70},
        };
        g.anomaly = [lobes](const Point2& x) {
            return lobes_level(x, lobes, 0.50);
        };
        g.background = [](const Point2& x) {
            return 0.3 * x.x() + 0.45 * x.y() +
                   0.55 * gauss_bump(x, {0.70, 0.75}, 0.18) +
                   0.45 * gauss_bump(x, {0.25, 0.30}, 0.22);
        };
        break;
    }
    case PhantomModel::C: {
        const Point2 center{0.50 + jitter(rng), 0.48 + jitter(rng)};
        g.anomaly = [center](const Point2& x) {
            return open_annulus_level(x, center, 0.26, 0.085, 0.5 * pi, 0.13);
        };
        g.background = [](const Point2& x) {
            return -0.5 * x.x() + 0.2 * x.y() +
                   0.7 * gauss_bump(x, {0.30, 0.30}, 0.20) +
                   0.6 * gauss_bump(x, {0.75, 0.65}, 0.17);
        };
        break;
    }
    case PhantomModel::D: {
        const Point2 center{0.43 + jitter(rng), 0.52 + jitter(rng)};
        const Lobe blob{{0.66 + jitter(rng), 0.62 + jitter(rng)}, 0.12, 1.2};
        g.anomaly = [center, blob](const Point2& x) {
            const double ring =
                open_annulus_level(x, center, 0.22, 0.08, -0.25 * pi, 0.11);
            const double b =
                blob.amplitude * gauss_bump(x, blob.center, blob.sigma) - 0.55;
            return smooth_max(ring, b, 0.15);
        };
        g.background = [](const Point2& x) {
            return 0.4 * x.x() + 0.4 * x.y() +
                   0.5 * gauss_bump(x, {0.20, 0.80}, 0.18) +
                   0.65 * gauss_bump(x, {0.80, 0.30}, 0.20);
        };
        break;
    }
    case PhantomModel::BinaryDemo: {
        const Point2 center{0.5 + jitter(rng), 0.5 + jitter(rng)};
        g.anomaly = [center](const Point2& x) {
            const Point2 rel = x - center;
            const double rho = rel.norm();
            const double ang = std::atan2(rel.y(), rel.x());
            const double radius = 0.27 + 0.055 * std::sin(3.0 * ang + 0.4) +
                                  0.04 * std::sin(5.0 * ang + 1.7);
            return radius - rho;
        };
        g.background = [](const Point2&) { return 0.0; };
        break;
    }
    }
    return g;
}

} // namespace

std::string phantom_model_name(PhantomModel m) {
    switch (m) {
    case PhantomModel::A: return "A";
    case PhantomModel::B: return "B";
    case PhantomModel::C: return "C";
    case PhantomModel::D: return "D";
    case PhantomModel::BinaryDemo: return "BinaryDemo";
    }
    throw std::invalid_argument("unknown phantom model");
}

PhantomModel phantom_model_from_name(const std::string& name) {
    if (name == "A" || name == "a") return PhantomModel::A;
    if (name == "B" || name == "b") return PhantomModel::B;
    if (name == "C" || name == "c") return PhantomModel::C;
    if (name == "D" || name == "d") return PhantomModel::D;
    if (name == "BinaryDemo" || name == "binarydemo" || name == "binary")
        return PhantomModel::BinaryDemo;
    throw std::invalid_argument("unknown phantom model: " + name);
}

PhantomSpec PhantomSpec::defaults(PhantomModel model, int size,
                                  std::uint64_t seed) {
    PhantomSpec spec;
    spec.model = model;
    spec.size = size;
    spec.seed = seed;
    switch (model) {
    case PhantomModel::A:
    case PhantomModel::B: spec.background_max = 0.5; break;
    case PhantomModel::C:
    case PhantomModel::D: spec.background_max = 0.8; break;
    case PhantomModel::BinaryDemo: spec.background_max = 0.0; break;
    }
    return spec;
}

Phantom make_phantom(const PhantomSpec& spec) {
    if (spec.size < 32)
        throw std::invalid_argument("make_phantom: size must be at least 32");
    if (spec.background_max < 0.0)
        throw std::invalid_argument("make_phantom: negative background_max");

    std::mt19937_64 rng(spec.seed);
    const Generator gen = make_generator(spec.model, rng);
    const Grid grid(spec.size, spec.size);

    Image u0(grid);
    Image mask(grid);
    for (int i = 0; i < grid.ny(); ++i) {
        for (int j = 0; j < grid.nx(); ++j) {
            const Point2 x = grid.pixel_center(i, j);
            const int idx = grid.index(i, j);
            u0.values[idx] = gen.background(x);
            mask.values[idx] = gen.anomaly(x) > 0.0 ? 1.0 : 0.0;
        }
    }

    // rescale the raw background to hit [0, background_max] exactly
    const double lo = u0.values.minCoeff();
    const double hi = u0.values.maxCoeff();
    if (hi > lo && spec.background_max > 0.0)
        u0.values = (u0.values.array() - lo) * (spec.background_max / (hi - lo));
    else
        u0.values.setZero();

    Image u = u0;
    for (int idx = 0; idx < grid.size(); ++idx)
        if (mask.values[idx] > 0.0)
            u.values[idx] = spec.anomaly_value;

    return Phantom{std::move(u), std::move(mask), std::move(u0)};
}

Sinogram add_noise_snr(const Sinogram& p, double snr_db, std::uint64_t seed) {
    if (std::isinf(snr_db) && snr_db > 0.0)
        return p;
    const double p_norm = p.values.norm();
    if (p_norm == 0.0)
        throw std::invalid_argument("add_noise_snr: zero data has no SNR");

    std::mt19937_64 rng(seed);
    Vector eta(p.values.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i)
        eta[i] = next_normal(rng);

    // rescale so the realized SNR is exact
    eta *= p_norm * std::pow(10.0, -snr_db / 20.0) / eta.norm();
    return Sinogram(p.geometry, p.values + eta);
}

} // namespace plstomo
