#include "plstomo/solvers.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace plstomo {

void SolveConfig::validate() const {
    if (outer_iters < 1 || lsqr_iters < 1 || tr_cg_iters < 1 ||
        tr_steps_per_outer < 1)
        throw std::invalid_argument("SolveConfig: iteration counts must be >= 1");
    if (!(lsqr_tol > 0.0) || !(convergence_tol > 0.0))
        throw std::invalid_argument("SolveConfig: tolerances must be positive");
    if (!(tr_radius0 > 0.0) || !(tr_radius_max >= tr_radius0))
        throw std::invalid_argument("SolveConfig: bad trust-region radii");
}

LsqrResult lsqr(const LinearOperator& op, const Vector& rhs, int max_iters,
                double tol, const Vector* x0) {
    if (rhs.size() != op.rows)
        throw std::invalid_argument("lsqr: rhs dimension mismatch");
    if (x0 && x0->size() != op.cols)
        throw std::invalid_argument("lsqr: warm start dimension mismatch");

    LsqrResult result;
    result.x = x0 ? *x0 : Vector::Zero(op.cols);

    // warm start by solving for the correction against the shifted residual
    Vector u = x0 ? Vector(rhs - op.apply(*x0)) : rhs;
    Vector x = Vector::Zero(op.cols);

    double beta = u.norm();
    if (beta == 0.0) {
        result.converged = true;
        return result;
    }
    u /= beta;
    Vector v = op.apply_adjoint(u);
    double alpha = v.norm();
    if (alpha == 0.0) {
        // rhs orthogonal to the range: x0 already minimizes
        result.converged = true;
        result.residual_norm = beta;
        return result;
    }
    v /= alpha;

    Vector w = v;
    double phi_bar = beta;
    double rho_bar = alpha;
    double a_norm_sq = alpha * alpha + beta * beta;

    for (int it = 1; it <= max_iters; ++it) {
        // Golub-Kahan bidiagonalization step
        u = op.apply(v) - alpha * u;
        beta = u.norm();
        if (beta > 0.0)
            u /= beta;
        a_norm_sq += beta * beta;
        v = op.apply_adjoint(u) - beta * v;
        alpha = v.norm();
        if (alpha > 0.0)
            v /= alpha;
        a_norm_sq += alpha * alpha;

        // plane rotation eliminating the subdiagonal
        const double rho = std::hypot(rho_bar, beta);
        const double c = rho_bar / rho;
        const double s = beta / rho;
        const double theta = s * alpha;
        rho_bar = -c * alpha;
        const double phi = c * phi_bar;
        phi_bar = s * phi_bar;

        x += (phi / rho) * w;
        w = v - (theta / rho) * w;

        result.iterations = it;
        result.residual_norm = phi_bar;
        result.atr_norm = phi_bar * alpha * std::abs(c);
        if (!std::isfinite(phi_bar) || !x.allFinite())
            throw std::runtime_error("lsqr: non-finite iterate at iteration " +
                                     std::to_string(it));

        const double a_norm = std::sqrt(a_norm_sq);
        if (result.atr_norm <= tol * a_norm * result.residual_norm) {
            result.converged = true;
            break;
        }
        if (alpha == 0.0) { // exact solution reached
            result.converged = true;
            break;
        }
    }

    result.x += x;
    return result;
}

TrustRegionStep trust_region_step(const TrustRegionProblem& problem,
                                  const Vector& alpha, double f,
                                  const Vector& grad, double radius,
                                  int cg_iters, double radius_max) {
    if (!(radius > 0.0))
        throw std::invalid_argument("trust_region_step: radius must be positive");

    TrustRegionStep out;
    out.alpha = alpha;
    out.radius = radius;
    out.f_new = f;

    const double g_norm = grad.norm();
    if (g_norm == 0.0) { // stationary: zero step, radius unchanged
        out.accepted = true;
        return out;
    }

    // Steihaug-CG on the quadratic model m(s) = f + g.s + s.H s / 2
    Vector s = Vector::Zero(alpha.size());
    Vector r = grad;
    Vector d = -grad;
    double r_sq = r.squaredNorm();
    const double r_tol_sq = r_sq * 1e-16;

    auto boundary_tau = [&](const Vector& base, const Vector& dir) {
        const double dd = dir.squaredNorm();
        const double sd = base.dot(dir);
        const double ss = base.squaredNorm();
        return (-sd + std::sqrt(sd * sd + dd * (radius * radius - ss))) / dd;
    };

    for (int it = 0; it < cg_iters; ++it) {
        const Vector hd = problem.hessian_apply(alpha, d);
        const double d_hd = d.dot(hd);
        if (d_hd <= 0.0) { // nonpositive curvature: go to the boundary
            s += boundary_tau(s, d) * d;
            out.on_boundary = true;
            break;
        }
        const double step = r_sq / d_hd;
        if ((s + step * d).norm() >= radius) {
            s += boundary_tau(s, d) * d;
            out.on_boundary = true;
            break;
        }
        s += step * d;
        r += step * hd;
        const double r_sq_next = r.squaredNorm();
        if (r_sq_next <= r_tol_sq)
            break;
        d = -r + (r_sq_next / r_sq) * d;
        r_sq = r_sq_next;
    }

    const Vector hs = problem.hessian_apply(alpha, s);
    out.predicted = -(grad.dot(s) + 0.5 * s.dot(hs));
    if (!(out.predicted > 0.0)) { // degenerate model
        out.radius = 0.25 * radius;
        return out;
    }

    const double f_trial = problem.value(alpha + s);
    out.actual = f - f_trial;
    const double rho = out.actual / out.predicted;

    if (rho < 0.1) {
        out.radius = 0.25 * radius;
        return out; // rejected: alpha unchanged
    }
    out.accepted = true;
    out.alpha = alpha + s;
    out.f_new = f_trial;
    if (rho > 0.75 && s.norm() >= 0.99 * radius)
        out.radius = std::min(2.0 * radius, radius_max);
    return out;
}

void write_history_csv(const std::string& path,
                       const std::vector<IterationRecord>& history) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << "iteration,f,grad_norm,dr,eps,radius,accepted\n";
    for (const auto& rec : history)
        out << rec.iteration << ',' << format_double(rec.f) << ','
            << format_double(rec.grad_norm) << ',' << format_double(rec.dr)
            << ',' << format_double(rec.eps) << ',' << format_double(rec.radius)
            << ',' << (rec.accepted ? 1 : 0) << '\n';
}

ReconstructionState joint_reconstruct(const Sinogram& p,
                                      const SparseOperator& w,
                                      const LevelSetModel& model, double u1,
                                      const RegularizerL& reg,
                                      const Image& u0_init,
                                      const HeavisideConfig& heaviside_cfg,
                                      const SolveConfig& cfg) {
    cfg.validate();
    if (!p.values.allFinite())
        throw std::invalid_argument("joint_reconstruct: non-finite data");
    if (p.values.size() != w.rows())
        throw std::invalid_argument("joint_reconstruct: data does not match operator");
    if (u0_init.values.size() != w.cols())
        throw std::invalid_argument("joint_reconstruct: u0 does not match operator");

    const SpMat& A = model.A;
    const double dx = w.grid().dx();
    const double mu = heaviside_cfg.mu;

    ReconstructionState state{model.alpha, u0_init, 0.0, {}, u0_init};
    state.history.reserve(cfg.outer_iters);

    double radius = cfg.tr_radius0;
    double eps = heaviside_cfg.eps_min;
    int rising_accepted = 0;

    for (int k = 0; k < cfg.outer_iters; ++k) {
        eps = compute_epsilon(A * state.alpha, dx, heaviside_cfg.kappa,
                              heaviside_cfg.eps_min);

        int lsqr_used = 0;
        if (!cfg.fix_background) {
            auto sys = background_system(state.alpha, u1, w, A, p.values, reg,
                                         eps, mu);
            const Vector warm = sys.scale_initial(state.u0.values);
            auto bg = lsqr(sys.op, sys.rhs, cfg.lsqr_iters, cfg.lsqr_tol, &warm);
            state.u0.values = sys.recover(bg.x);
            lsqr_used = bg.iterations;
        }

        auto vg = objective_value_and_gradient(state.alpha, state.u0.values, u1,
                                               w, A, p.values, eps, mu);
        IterationRecord rec;
        rec.iteration = k;
        rec.grad_norm = vg.gradient.norm();
        rec.eps = eps;
        rec.f_before = vg.value;
        rec.lsqr_iterations = lsqr_used;

        if (rec.grad_norm < cfg.convergence_tol) {
            rec.f = vg.value;
            rec.dr = std::sqrt(2.0 * vg.value);
            rec.radius = radius;
            state.history.push_back(rec);
            break;
        }

        TrustRegionProblem problem;
        problem.value = [&](const Vector& a) {
            const Vector r = residual(a, state.u0.values, u1, w, A, p.values,
                                      eps, mu);
            return 0.5 * r.squaredNorm();
        };
        problem.hessian_apply = [&](const Vector& a, const Vector& v) {
            return gn_hessian_apply(a, v, state.u0.values, u1, w, A, eps, mu);
        };

        double f = vg.value;
        Vector grad = vg.gradient;
        bool accepted_any = false;
        for (int s = 0; s < cfg.tr_steps_per_outer; ++s) {
            auto step = trust_region_step(problem, state.alpha, f, grad, radius,
                                          cfg.tr_cg_iters, cfg.tr_radius_max);
            radius = step.radius;
            if (step.accepted) {
                accepted_any = accepted_any || step.alpha != state.alpha;
                state.alpha = step.alpha;
                f = step.f_new;
                if (s + 1 < cfg.tr_steps_per_outer)
                    grad = objective_value_and_gradient(state.alpha,
                                                        state.u0.values, u1, w,
                                                        A, p.values, eps, mu)
                               .gradient;
            }
        }

        rec.f = f;
        rec.dr = std::sqrt(2.0 * f); // r(alpha) = W u - p, so DR = sqrt(2 f)
        rec.radius = radius;
        rec.accepted = accepted_any;
        state.history.push_back(rec);

        // accepted steps decrease f by construction; a sustained rise is a bug
        if (accepted_any && f > rec.f_before) {
            if (++rising_accepted >= 5)
                throw std::runtime_error(
                    "joint_reconstruct: objective rose over five consecutive "
                    "accepted steps");
        } else if (accepted_any) {
            rising_accepted = 0;
        }
    }

    state.eps = eps;
    state.u = compose_image(state.alpha, state.u0, u1, A, eps, mu);
    return state;
}

} // namespace plstomo
