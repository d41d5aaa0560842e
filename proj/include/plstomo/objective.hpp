#pragma once

#include "plstomo/heaviside.hpp"
#include "plstomo/linear_operator.hpp"
#include "plstomo/projector.hpp"

namespace plstomo {

/// Composes the partially discrete image
///   u = (1 - h_eps(A alpha)) .* u0 + h_eps(A alpha) * u1.
/// Pixels with A alpha >= eps get exactly u1; those with A alpha <= -eps get
/// exactly u0.
Image compose_image(const Vector& alpha, const Image& u0, double u1,
                    const SpMat& A, double eps, double mu);

/// Data-misfit residual
///   r(alpha) = W [ (u1 - u0) .* h_eps(A alpha) ] - (p - W u0),
/// identical to W compose_image(alpha, ...) - p.
Vector residual(const Vector& alpha, const Vector& u0, double u1,
                const SparseOperator& w, const SpMat& A, const Vector& p,
                double eps, double mu);

struct ValueGradient {
    double value = 0.0;
    Vector gradient;
};

/// f(alpha) = 1/2 |r(alpha)|^2 with gradient A^T D^T W^T r, where
/// D = diag((u1 - u0) .* h'_eps(A alpha)). Throws if an intermediate value
/// turns non-finite.
ValueGradient objective_value_and_gradient(const Vector& alpha,
                                           const Vector& u0, double u1,
                                           const SparseOperator& w,
                                           const SpMat& A, const Vector& p,
                                           double eps, double mu);

/// Gauss-Newton Hessian action H v = A^T D^T W^T W D A v, never materialized.
Vector gn_hessian_apply(const Vector& alpha, const Vector& v, const Vector& u0,
                        double u1, const SparseOperator& w, const SpMat& A,
                        double eps, double mu);

/// Stacked second-order finite-difference smoother [L_x; L_y] with weight
/// lambda. Interior rows only, [1, -2, 1] / dx^2 stencils; L annihilates
/// bilinear images exactly.
struct RegularizerL {
    SpMat L;
    double lambda = 0.0;
    Vector column_norms; // per-column 2-norms of L, cached at build
};

RegularizerL build_regularizer(const Grid& grid, double lambda = 0.0);

/// The inner (background) problem of the reduced objective: the stacked
/// system  min_u0 | [W diag(1 - h); sqrt(lambda) L] u0 - [p - W(h u1); 0] |,
/// returned Jacobi column-scaled (the 1/dx^2 stencil scale makes the raw
/// stack numerically intractable for LSQR); recover() maps back to u0.
LeastSquaresSystem background_system(const Vector& alpha, double u1,
                                     const SparseOperator& w, const SpMat& A,
                                     const Vector& p, const RegularizerL& reg,
                                     double eps, double mu);

/// Plain Tikhonov stack min_u | [W; sqrt(lambda) L] u - [p; 0] |, column
/// scaled the same way.
LeastSquaresSystem tikhonov_system(const SparseOperator& w, const Vector& p,
                                   const RegularizerL& reg);

} // namespace plstomo
