#pragma once

// Test-only oracles, kept independent of the implementation paths they check.

#include <cmath>
#include <functional>
#include <random>

#include "plstomo/projector.hpp"

namespace oracle {

using plstomo::Matrix;
using plstomo::SpMat;
using plstomo::Vector;

inline Matrix dense(const SpMat& m) { return Matrix(m); }

inline Matrix dense(const plstomo::SparseOperator& w) {
    return Matrix(w.matrix());
}

// Uniform in [-1, 1) pinned to the seed (no library distributions).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : rng_(seed) {}

    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    double symmetric() { return 2.0 * uniform() - 1.0; }

    Vector vector(Eigen::Index n) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v[i] = symmetric();
        return v;
    }

  private:
    std::mt19937_64 rng_;
};

// Recursive adaptive Simpson quadrature.
inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol = 1e-12,
                               int depth = 40) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    std::function<double(double, double, double, double, double, double, int)>
        recurse = [&](double lo, double hi, double flo, double fhi, double fmid,
                      double eps, int d) -> double {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) < 15.0 * eps)
            return left + right + (left + right - whole) / 15.0;
        return recurse(lo, mid, flo, fmid, flm, 0.5 * eps, d - 1) +
               recurse(mid, hi, fmid, fhi, frm, 0.5 * eps, d - 1);
    };
    return recurse(a, b, fa, fb, fm, tol, depth);
}

// The piecewise Dirac delta exactly as printed (valid as stated only at
// mu = 1/3, where all five branches join continuously).
inline double dirac_printed(double x, double eps, double mu) {
    if (x <= -eps || x >= eps)
        return 0.0;
    const double ramp_scale = 1.0 / (4.0 * (1.0 - mu) * eps);
    if (x <= -mu * eps) {
        const double t = (x + (1.0 - mu) * eps) / (mu * eps);
        return ramp_scale * (1.0 + t + std::sin(M_PI * t) / M_PI);
    }
    if (x <= mu * eps)
        return 1.0 / (2.0 * (1.0 - mu) * eps);
    const double t = (x - (1.0 - mu) * eps) / (mu * eps);
    return ramp_scale * (1.0 - t - std::sin(M_PI * t) / M_PI);
}

// Central finite difference.
inline double central_difference(const std::function<double(double)>& f,
                                 double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

} // namespace oracle
