#pragma once

#include <functional>
#include <optional>

#include "plstomo/linear_operator.hpp"
#include "plstomo/objective.hpp"
#include "plstomo/rbf.hpp"

namespace plstomo {

struct SolveConfig {
    int outer_iters = 50;       // K: outer alternating iterations
    int lsqr_iters = 200;       // LSQR cap per background solve
    double lsqr_tol = 1e-6;     // relative residual-gradient tolerance
    int tr_cg_iters = 10;       // Steihaug-CG cap per trust-region step
    double tr_radius0 = 1.0;
    double tr_radius_max = 1e3;
    double convergence_tol = 1e-8; // early exit on |grad f|
    int tr_steps_per_outer = 1;
    bool fix_background = false;   // keep u0 at its initial value

    void validate() const;
};

struct LsqrResult {
    Vector x;
    int iterations = 0;
    double residual_norm = 0.0;   // estimated |op x - rhs|
    double atr_norm = 0.0;        // estimated |op^T (op x - rhs)|
    bool converged = false;
};

/// LSQR (Paige & Saunders) on the Golub-Kahan bidiagonalization. Stops at the
/// iteration cap or once |op^T r| < tol * |op| * |r|. An optional x0 warm
/// start shifts the system to its residual. Throws if iterates turn
/// non-finite.
LsqrResult lsqr(const LinearOperator& op, const Vector& rhs, int max_iters,
                double tol, const Vector* x0 = nullptr);

/// Callbacks for the trust-region step: objective value, value-with-gradient,
/// and Gauss-Newton Hessian action at a fixed linearization point.
struct TrustRegionProblem {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&, const Vector&)> hessian_apply;
};

struct TrustRegionStep {
    Vector alpha;
    double radius = 0.0;
    bool accepted = false;
    double f_new = 0.0;       // objective at the returned alpha
    double predicted = 0.0;   // model reduction
    double actual = 0.0;      // observed reduction
    bool on_boundary = false;
};

/// One Steihaug-CG trust-region step on the Gauss-Newton model. Standard
/// rho-test: accept above 0.1, expand (x2, capped) above 0.75 when the step
/// reaches the boundary, shrink (x0.25) below 0.1. A nonpositive predicted
/// reduction rejects and shrinks.
TrustRegionStep trust_region_step(const TrustRegionProblem& problem,
                                  const Vector& alpha, double f,
                                  const Vector& grad, double radius,
                                  int cg_iters, double radius_max);

struct IterationRecord {
    int iteration = 0;
    double f = 0.0;         // objective after the alpha update
    double grad_norm = 0.0; // |grad f| before the alpha update
    double dr = 0.0;        // data residual |W u - p|
    double eps = 0.0;
    double radius = 0.0;
    bool accepted = false;
    double f_before = 0.0;  // objective before the alpha update
    int lsqr_iterations = 0;
};

struct ReconstructionState {
    Vector alpha;
    Image u0;
    double eps = 0.0;
    std::vector<IterationRecord> history;
    Image u; // composed reconstruction
};

/// CSV with columns iteration,f,grad_norm,dr,eps,radius,accepted.
void write_history_csv(const std::string& path,
                       const std::vector<IterationRecord>& history);

/// Alternating joint loop: per outer iteration recompute the Heaviside
/// width from the level-set range, solve the Tikhonov background system by
/// warm-started LSQR, then take trust-region Gauss-Newton steps on alpha.
/// Exits early once |grad f| drops below convergence_tol. Aborts if the
/// objective rises over five consecutive accepted steps.
ReconstructionState joint_reconstruct(const Sinogram& p,
                                      const SparseOperator& w,
                                      const LevelSetModel& model, double u1,
                                      const RegularizerL& reg,
                                      const Image& u0_init,
                                      const HeavisideConfig& heaviside_cfg,
                                      const SolveConfig& cfg);

} // namespace plstomo
