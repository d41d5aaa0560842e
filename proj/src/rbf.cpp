#include "plstomo/rbf.hpp"

#include <cmath>
#include <stdexcept>

namespace plstomo {

double wendland(double r) {
    if (r < 0.0)
        throw std::invalid_argument("wendland: negative radius");
    if (r >= 1.0)
        return 0.0;
    const double q = 1.0 - r;
    const double q2 = q * q;
    const double q4 = q2 * q2;
    return q4 * q4 * (((32.0 * r + 25.0) * r + 8.0) * r + 1.0);
}

NodeGrid build_nodes(const Grid& grid, const RbfConfig& cfg) {
    if (cfg.spacing_factor < 1.0)
        throw std::invalid_argument("RbfConfig: spacing_factor < 1");
    if (cfg.margin < 0)
        throw std::invalid_argument("RbfConfig: negative margin");
    if (!(cfg.eta > 0.0))
        throw std::invalid_argument("RbfConfig: eta must be positive");

    const Extent& e = grid.extent();
    const double spacing = cfg.spacing_factor * grid.dx();

    auto axis_nodes = [&](int pixel_count, double lo, double hi) {
        const int interior =
            static_cast<int>(std::ceil(pixel_count / cfg.spacing_factor));
        const int total = interior + 2 * cfg.margin;
        // center the interior lattice on the extent, then extend outward
        const double offset = 0.5 * ((hi - lo) - (interior - 1) * spacing);
        std::vector<double> xs(total);
        for (int j = 0; j < total; ++j)
            xs[j] = lo + offset + (j - cfg.margin) * spacing;
        return xs;
    };

    const auto xs = axis_nodes(grid.nx(), e.x0, e.x1);
    const auto ys = axis_nodes(grid.ny(), e.y0, e.y1);

    NodeGrid result;
    result.nodes_x = static_cast<int>(xs.size());
    result.nodes_y = static_cast<int>(ys.size());
    result.spacing = spacing;
    result.beta = 1.0 / (cfg.eta * spacing);
    result.nodes.reserve(xs.size() * ys.size());
    for (double y : ys)
        for (double x : xs)
            result.nodes.emplace_back(x, y);
    return result;
}

SpMat kernel_matrix(const std::vector<Point2>& nodes, double beta,
                    const Grid& grid) {
    if (nodes.empty())
        throw std::invalid_argument("kernel_matrix: no nodes");
    if (!(beta > 0.0))
        throw std::invalid_argument("kernel_matrix: beta must be positive");

    const double radius = 1.0 / beta;
    std::vector<Eigen::Triplet<double>> triplets;
    const Extent& e = grid.extent();

    for (size_t j = 0; j < nodes.size(); ++j) {
        // pixel bounding box of the node's support disc
        const auto& chi = nodes[j];
        const int row_lo = std::max(
            0, static_cast<int>(std::floor((chi.y() - radius - e.y0) / grid.dy() - 0.5)));
        const int row_hi = std::min(
            grid.ny() - 1,
            static_cast<int>(std::ceil((chi.y() + radius - e.y0) / grid.dy() - 0.5)));
        const int col_lo = std::max(
            0, static_cast<int>(std::floor((chi.x() - radius - e.x0) / grid.dx() - 0.5)));
        const int col_hi = std::min(
            grid.nx() - 1,
            static_cast<int>(std::ceil((chi.x() + radius - e.x0) / grid.dx() - 0.5)));
        for (int i = row_lo; i <= row_hi; ++i) {
            for (int c = col_lo; c <= col_hi; ++c) {
                const double r = beta * (grid.pixel_center(i, c) - chi).norm();
                if (r >= 1.0)
                    continue;
                triplets.emplace_back(grid.index(i, c), static_cast<int>(j),
                                      wendland(r));
            }
        }
    }

    SpMat a(grid.size(), static_cast<Eigen::Index>(nodes.size()));
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    return a;
}

Vector initial_alpha(const std::vector<Point2>& nodes, const Grid& grid,
                     double radius_fraction, double amplitude) {
    if (!(radius_fraction > 0.0) || !(radius_fraction < 1.0))
        throw std::invalid_argument("initial_alpha: radius_fraction outside (0,1)");
    const Point2 center = grid.extent().center();
    const double radius = radius_fraction * grid.extent().width();
    Vector alpha(static_cast<Eigen::Index>(nodes.size()));
    for (size_t j = 0; j < nodes.size(); ++j)
        alpha[static_cast<Eigen::Index>(j)] =
            (nodes[j] - center).norm() <= radius ? amplitude : -amplitude;
    return alpha;
}

LevelSetModel LevelSetModel::create(const Grid& grid, const RbfConfig& cfg,
                                    double radius_fraction, double amplitude) {
    LevelSetModel model;
    model.nodes = build_nodes(grid, cfg);
    model.A = kernel_matrix(model.nodes.nodes, model.nodes.beta, grid);
    model.alpha =
        initial_alpha(model.nodes.nodes, grid, radius_fraction, amplitude);
    return model;
}

} // namespace plstomo
