#pragma once

#include "plstomo/core.hpp"

namespace plstomo {

/// Parameters of the compact smoothed Heaviside pair.
struct HeavisideConfig {
    double kappa = 0.01;    // width parameter of the epsilon heuristic
    double mu = 1.0 / 3.0;  // plateau/inclination parameter, in (0, 1)
    double eps_min = 0.01;  // floor returned for a flat level-set field
};

/// Compact smoothed Dirac delta with half-width eps and plateau fraction mu:
/// constant at height 1/((1+mu) eps) on [-mu eps, mu eps], a smooth sine
/// S-ramp on each transition band, zero outside [-eps, eps]. Even, C^1 and
/// unit-mass for every mu in (0, 1). Throws for eps <= 0 or mu outside (0,1).
double dirac(double x, double eps, double mu);

/// Antiderivative of dirac with h(-eps) = 0, h(0) = 1/2, h(eps) = 1;
/// monotone nondecreasing, h' = dirac everywhere.
double heaviside(double x, double eps, double mu);

Vector dirac(const Vector& x, double eps, double mu);
Vector heaviside(const Vector& x, double eps, double mu);

/// Adaptive Heaviside width: eps = kappa * (max(phi) - min(phi)) / dx.
/// A flat field (max == min) returns the configured floor eps_min.
double compute_epsilon(const Vector& phi, double dx, double kappa,
                       double eps_min);

} // namespace plstomo
