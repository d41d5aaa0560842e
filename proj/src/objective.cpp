#include "plstomo/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace plstomo {

namespace {

void check_alpha(const Vector& alpha, const SpMat& A) {
    if (alpha.size() != A.cols())
        throw std::invalid_argument("alpha length does not match kernel matrix");
}

} // namespace

Image compose_image(const Vector& alpha, const Image& u0, double u1,
                    const SpMat& A, double eps, double mu) {
    check_alpha(alpha, A);
    if (u0.values.size() != A.rows())
        throw std::invalid_argument("compose_image: u0 does not match kernel matrix");
    const Vector h = heaviside(A * alpha, eps, mu);
    Vector u = (1.0 - h.array()) * u0.values.array() + h.array() * u1;
    return Image(u0.grid, std::move(u));
}

Vector residual(const Vector& alpha, const Vector& u0, double u1,
                const SparseOperator& w, const SpMat& A, const Vector& p,
                double eps, double mu) {
    check_alpha(alpha, A);
    if (u0.size() != w.cols() || u0.size() != A.rows())
        throw std::invalid_argument("residual: u0 dimension mismatch");
    if (p.size() != w.rows())
        throw std::invalid_argument("residual: data dimension mismatch");
    const Vector h = heaviside(A * alpha, eps, mu);
    const Vector inner = (u1 - u0.array()) * h.array();
    return w.apply(inner) - (p - w.apply(u0));
}

ValueGradient objective_value_and_gradient(const Vector& alpha,
                                           const Vector& u0, double u1,
                                           const SparseOperator& w,
                                           const SpMat& A, const Vector& p,
                                           double eps, double mu) {
    check_alpha(alpha, A);
    const Vector phi = A * alpha;
    const Vector h = heaviside(phi, eps, mu);
    const Vector r =
        w.apply(((u1 - u0.array()) * h.array()).matrix()) - (p - w.apply(u0));
    const Vector d = (u1 - u0.array()) * dirac(phi, eps, mu).array();

    ValueGradient out;
    out.value = 0.5 * r.squaredNorm();
    out.gradient = A.transpose() * d.cwiseProduct(w.apply_adjoint(r));
    if (!std::isfinite(out.value) || !out.gradient.allFinite())
        throw std::runtime_error("objective: non-finite value or gradient");
    return out;
}

Vector gn_hessian_apply(const Vector& alpha, const Vector& v, const Vector& u0,
                        double u1, const SparseOperator& w, const SpMat& A,
                        double eps, double mu) {
    check_alpha(alpha, A);
    if (v.size() != A.cols())
        throw std::invalid_argument("gn_hessian_apply: v dimension mismatch");
    const Vector d =
        (u1 - u0.array()) * dirac(A * alpha, eps, mu).array();
    const Vector jv = w.apply(d.cwiseProduct(A * v));
    return A.transpose() * d.cwiseProduct(w.apply_adjoint(jv));
}

namespace {

// Stacked operator [W diag(mask); sqrt(lambda) L] with Jacobi column scaling
// s_j = 1 / |column_j|; the solver variable y recovers as u0 = s .* y.
LeastSquaresSystem scaled_stack(const SparseOperator& w, const RegularizerL& reg,
                                Vector mask, Vector rhs_data) {
    const double sqrt_lambda = std::sqrt(reg.lambda);
    const Eigen::Index m_data = w.rows();
    const Eigen::Index m_reg = reg.L.rows();
    const Eigen::Index n = w.cols();

    Vector scaling(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double d = std::hypot(mask[j] * w.column_norms()[j],
                                    sqrt_lambda * reg.column_norms[j]);
        scaling[j] = d > 0.0 ? 1.0 / d : 1.0;
    }

    LeastSquaresSystem sys;
    sys.op.rows = m_data + m_reg;
    sys.op.cols = n;
    sys.column_scaling = scaling;
    // w and reg.L are borrowed and must outlive the system
    const SparseOperator* wp = &w;
    const SpMat* lp = &reg.L;
    sys.op.apply = [wp, lp, mask, scaling, sqrt_lambda, m_data,
                    m_reg](const Vector& y) {
        const Vector v = scaling.cwiseProduct(y);
        Vector out(m_data + m_reg);
        out.head(m_data) = wp->apply(mask.cwiseProduct(v));
        out.tail(m_reg) = sqrt_lambda * (*lp * v);
        return out;
    };
    sys.op.apply_adjoint = [wp, lp, mask, scaling, sqrt_lambda, m_data,
                            m_reg](const Vector& z) {
        Vector out = mask.cwiseProduct(wp->apply_adjoint(z.head(m_data)));
        out += sqrt_lambda * (lp->transpose() * z.tail(m_reg));
        return Vector(scaling.cwiseProduct(out));
    };

    sys.rhs = Vector::Zero(m_data + m_reg);
    sys.rhs.head(m_data) = std::move(rhs_data);
    return sys;
}

} // namespace

RegularizerL build_regularizer(const Grid& grid, double lambda) {
    if (grid.nx() < 3 || grid.ny() < 3)
        throw std::invalid_argument("build_regularizer: grid must be at least 3x3");
    if (lambda < 0.0)
        throw std::invalid_argument("build_regularizer: negative lambda");

    const int nx = grid.nx();
    const int ny = grid.ny();
    const double sx = 1.0 / (grid.dx() * grid.dx());
    const double sy = 1.0 / (grid.dy() * grid.dy());

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(3 * (static_cast<size_t>(ny) * (nx - 2) +
                          static_cast<size_t>(nx) * (ny - 2)));
    int row = 0;
    for (int i = 0; i < ny; ++i) {
        for (int j = 1; j < nx - 1; ++j, ++row) {
            triplets.emplace_back(row, grid.index(i, j - 1), sx);
            triplets.emplace_back(row, grid.index(i, j), -2.0 * sx);
            triplets.emplace_back(row, grid.index(i, j + 1), sx);
        }
    }
    for (int j = 0; j < nx; ++j) {
        for (int i = 1; i < ny - 1; ++i, ++row) {
            triplets.emplace_back(row, grid.index(i - 1, j), sy);
            triplets.emplace_back(row, grid.index(i, j), -2.0 * sy);
            triplets.emplace_back(row, grid.index(i + 1, j), sy);
        }
    }

    RegularizerL reg;
    reg.L.resize(row, grid.size());
    reg.L.setFromTriplets(triplets.begin(), triplets.end());
    reg.L.makeCompressed();
    reg.lambda = lambda;

    reg.column_norms = Vector::Zero(grid.size());
    const SpMat lt = reg.L.transpose();
    for (int j = 0; j < lt.outerSize(); ++j) {
        double sum = 0.0;
        for (SpMat::InnerIterator it(lt, j); it; ++it)
            sum += it.value() * it.value();
        reg.column_norms[j] = std::sqrt(sum);
    }
    return reg;
}

LeastSquaresSystem background_system(const Vector& alpha, double u1,
                                     const SparseOperator& w, const SpMat& A,
                                     const Vector& p, const RegularizerL& reg,
                                     double eps, double mu) {
    check_alpha(alpha, A);
    if (reg.lambda < 0.0)
        throw std::invalid_argument("background_system: negative lambda");
    if (p.size() != w.rows())
        throw std::invalid_argument("background_system: data dimension mismatch");

    const Vector h = heaviside(A * alpha, eps, mu);
    Vector one_minus_h = 1.0 - h.array();
    Vector rhs_data = p - w.apply((u1 * h.array()).matrix());
    return scaled_stack(w, reg, std::move(one_minus_h), std::move(rhs_data));
}

LeastSquaresSystem tikhonov_system(const SparseOperator& w, const Vector& p,
                                   const RegularizerL& reg) {
    if (reg.lambda < 0.0)
        throw std::invalid_argument("tikhonov_system: negative lambda");
    if (p.size() != w.rows())
        throw std::invalid_argument("tikhonov_system: data dimension mismatch");
    return scaled_stack(w, reg, Vector::Ones(w.cols()), p);
}

} // namespace plstomo
