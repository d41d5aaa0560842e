#include "plstomo/heaviside.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace plstomo {

namespace {

constexpr double pi = std::numbers::pi;

void check_params(double eps, double mu) {
    if (!(eps > 0.0))
        throw std::invalid_argument("heaviside: eps must be positive");
    if (!(mu > 0.0) || !(mu < 1.0))
        throw std::invalid_argument("heaviside: mu must lie in (0, 1)");
}

// Plateau height; chosen so the delta integrates to one.
inline double plateau(double eps, double mu) { return 1.0 / ((1.0 + mu) * eps); }

// Band coordinate mapping |x| in [mu eps, eps] onto s in [1, -1].
inline double band_coord(double a, double eps, double mu) {
    return ((1.0 + mu) * eps - 2.0 * a) / ((1.0 - mu) * eps);
}

inline double dirac_unchecked(double x, double eps, double mu) {
    const double a = std::abs(x);
    if (a >= eps)
        return 0.0;
    const double h = plateau(eps, mu);
    if (a <= mu * eps)
        return h;
    const double s = band_coord(a, eps, mu);
    return 0.5 * h * (1.0 + s + std::sin(pi * s) / pi);
}

inline double heaviside_unchecked(double x, double eps, double mu) {
    if (x <= -eps)
        return 0.0;
    if (x >= eps)
        return 1.0;
    if (x < 0.0)
        return 1.0 - heaviside_unchecked(-x, eps, mu);
    const double h = plateau(eps, mu);
    if (x <= mu * eps)
        return 0.5 + h * x;
    // integral of the ramp from mu eps to x, in band coordinates
    const double s = band_coord(x, eps, mu);
    const double pi2 = pi * pi;
    const double bracket =
        1.5 + 1.0 / pi2 - s - 0.5 * s * s + std::cos(pi * s) / pi2;
    return 0.5 + h * mu * eps + 0.25 * h * (1.0 - mu) * eps * bracket;
}

} // namespace

double dirac(double x, double eps, double mu) {
    check_params(eps, mu);
    return dirac_unchecked(x, eps, mu);
}

double heaviside(double x, double eps, double mu) {
    check_params(eps, mu);
    return heaviside_unchecked(x, eps, mu);
}

Vector dirac(const Vector& x, double eps, double mu) {
    check_params(eps, mu);
    Vector out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        out[i] = dirac_unchecked(x[i], eps, mu);
    return out;
}

Vector heaviside(const Vector& x, double eps, double mu) {
    check_params(eps, mu);
    Vector out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        out[i] = heaviside_unchecked(x[i], eps, mu);
    return out;
}

double compute_epsilon(const Vector& phi, double dx, double kappa,
                       double eps_min) {
    if (phi.size() == 0)
        throw std::invalid_argument("compute_epsilon: empty field");
    if (!(dx > 0.0))
        throw std::invalid_argument("compute_epsilon: dx must be positive");
    const double range = phi.maxCoeff() - phi.minCoeff();
    if (range == 0.0)
        return eps_min;
    return kappa * range / dx;
}

} // namespace plstomo
