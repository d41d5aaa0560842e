#pragma once

#include <functional>

#include "plstomo/core.hpp"

namespace plstomo {

/// Matrix-free linear map given by an apply/adjoint pair.
struct LinearOperator {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    std::function<Vector(const Vector&)> apply;
    std::function<Vector(const Vector&)> apply_adjoint;
};

/// Least-squares problem min_x | op x - rhs |. When column_scaling is
/// non-empty, op is the Jacobi column-scaled reparametrization: the solver's
/// iterate y maps back to the original unknown as x = column_scaling .* y
/// (same minimizer, far better conditioning).
struct LeastSquaresSystem {
    LinearOperator op;
    Vector rhs;
    Vector column_scaling;

    /// Original-variable solution from a solver iterate.
    Vector recover(const Vector& y) const {
        return column_scaling.size() ? Vector(column_scaling.cwiseProduct(y))
                                     : y;
    }
    /// Solver-variable warm start from an original-variable guess.
    Vector scale_initial(const Vector& x) const {
        return column_scaling.size() ? Vector(x.cwiseQuotient(column_scaling))
                                     : x;
    }
};

} // namespace plstomo
