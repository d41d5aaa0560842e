#pragma once

#include <Eigen/SparseCore>

#include "plstomo/core.hpp"

namespace plstomo {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Discretized Radon transform W assembled as an explicit sparse matrix.
/// The transpose is stored alongside so both W and W^T apply as row-major
/// products; the adjoint is exact by construction.
class SparseOperator {
  public:
    SparseOperator(SpMat w, ProjectionGeometry geometry, Grid grid);

    Eigen::Index rows() const { return w_.rows(); }
    Eigen::Index cols() const { return w_.cols(); }
    Kernel kernel() const { return geometry_.kernel; }
    const ProjectionGeometry& geometry() const { return geometry_; }
    const Grid& grid() const { return grid_; }
    const SpMat& matrix() const { return w_; }
    const SpMat& transpose_matrix() const { return wt_; }
    /// Per-column 2-norms, cached at assembly.
    const Vector& column_norms() const { return col_norms_; }

    /// p = W u. Throws on dimension mismatch.
    Vector apply(const Vector& u) const;
    /// u = W^T p. Throws on dimension mismatch.
    Vector apply_adjoint(const Vector& p) const;

    /// Triplet CSV (row,col,weight) for cross-implementation diffing.
    void dump_triplets_csv(const std::string& path) const;

  private:
    SpMat w_;
    SpMat wt_;
    ProjectionGeometry geometry_;
    Grid grid_;
    Vector col_norms_;
};

/// Assembles W for the geometry's kernel. Line rows hold exact ray-pixel
/// intersection lengths (Siddon); Joseph rows hold linear-interpolation
/// weights along the driving axis scaled by the step length. Rays that miss
/// the grid yield empty rows.
SparseOperator assemble(const ProjectionGeometry& geometry, const Grid& grid);

Sinogram apply(const SparseOperator& w, const Image& u);
Image apply_adjoint(const SparseOperator& w, const Sinogram& p);

} // namespace plstomo
