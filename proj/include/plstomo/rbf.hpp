#pragma once

#include "plstomo/core.hpp"
#include "plstomo/projector.hpp"

namespace plstomo {

/// Node lattice parameters for the level-set parametrization.
struct RbfConfig {
    double spacing_factor = 5.0; // node spacing in model-pixel units
    int margin = 2;              // node rows beyond the model grid
    double eta = 2.0;            // neighbor-influence factor
};

/// Wendland basis (1 - r)_+^8 (32 r^3 + 25 r^2 + 8 r + 1).
/// Compactly supported on [0, 1); throws for negative r.
double wendland(double r);

/// Regular RBF node lattice with the width scale beta = 1 / (eta * spacing).
struct NodeGrid {
    std::vector<Point2> nodes;
    int nodes_x = 0;
    int nodes_y = 0;
    double spacing = 0.0; // physical lattice pitch
    double beta = 0.0;
};

/// Lattice with pitch spacing_factor * dx, centered on the extent and
/// extended `margin` lattice steps beyond each side.
NodeGrid build_nodes(const Grid& grid, const RbfConfig& cfg);

/// Kernel matrix a_ij = wendland(beta * |x_i - chi_j|), stored row-sparse
/// (each row touches only nodes within radius 1/beta of the pixel).
SpMat kernel_matrix(const std::vector<Point2>& nodes, double beta,
                    const Grid& grid);

/// Positive weights for nodes within radius_fraction * extent width of the
/// domain center, negative elsewhere: a centered initial blob.
Vector initial_alpha(const std::vector<Point2>& nodes, const Grid& grid,
                     double radius_fraction = 0.2, double amplitude = 1.0);

/// RBF parametrization of the level-set function phi = A alpha.
struct LevelSetModel {
    NodeGrid nodes;
    SpMat A;      // grid.size() x nodes.size()
    Vector alpha; // owned by the solver loop

    Vector phi() const { return A * alpha; }

    static LevelSetModel create(const Grid& grid, const RbfConfig& cfg,
                                double radius_fraction = 0.2,
                                double amplitude = 1.0);
};

} // namespace plstomo
