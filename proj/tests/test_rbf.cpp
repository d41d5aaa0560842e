#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <set>

#include "oracle_helpers.hpp"
#include "plstomo/rbf.hpp"

using namespace plstomo;

TEST_CASE("wendland basis values") {
    CHECK(wendland(0.0) == 1.0);
    CHECK(wendland(1.0) == 0.0);
    CHECK(wendland(1.5) == 0.0);
    // 0.5^8 * (32/8 + 25/4 + 4 + 1)
    CHECK(wendland(0.5) == doctest::Approx(0.0595703125).epsilon(1e-15));
    CHECK_THROWS_AS(wendland(-0.1), std::invalid_argument);
}

TEST_CASE("node lattice counts and width scale") {
    SUBCASE("256-pixel axis, spacing 5, margin 2 gives 56 nodes per axis") {
        const Grid grid(256, 256);
        const auto nodes = build_nodes(grid, RbfConfig{5.0, 2, 2.0});
        CHECK(nodes.nodes_x == 56);
        CHECK(nodes.nodes_y == 56);
        CHECK(nodes.nodes.size() == 56u * 56u);
        // brute enumeration: count distinct x coordinates
        std::set<double> xs;
        for (const auto& p : nodes.nodes)
            xs.insert(p.x());
        CHECK(xs.size() == 56);
        CHECK(nodes.beta == doctest::Approx(25.6).epsilon(1e-12));
    }
    SUBCASE("margin 0, spacing = axis length leaves a single center node") {
        const Grid grid(16, 16);
        const auto nodes = build_nodes(grid, RbfConfig{16.0, 0, 2.0});
        REQUIRE(nodes.nodes.size() == 1);
        CHECK(nodes.nodes[0].x() == doctest::Approx(0.5));
        CHECK(nodes.nodes[0].y() == doctest::Approx(0.5));
    }
    SUBCASE("margin nodes lie outside the extent") {
        const Grid grid(64, 64);
        const auto nodes = build_nodes(grid, RbfConfig{8.0, 2, 2.0});
        int outside = 0;
        for (const auto& p : nodes.nodes)
            outside += (p.x() < 0.0 || p.x() > 1.0 || p.y() < 0.0 || p.y() > 1.0);
        CHECK(outside > 0);
    }
}

TEST_CASE("kernel matrix against brute-force evaluation") {
    const Grid grid(4, 4);
    const std::vector<Point2> nodes = {{0.375, 0.625}, {0.9, 0.1}};
    const double beta = 2.5;
    const auto a = kernel_matrix(nodes, beta, grid);
    const Matrix dense = oracle::dense(a);

    const auto centers = pixel_centers(grid);
    for (int i = 0; i < grid.size(); ++i)
        for (int j = 0; j < 2; ++j) {
            const double expected = wendland(beta * (centers[i] - nodes[j]).norm());
            CHECK(dense(i, j) == doctest::Approx(expected).epsilon(1e-15));
        }
}

TEST_CASE("pixel coincident with a node gives entry one") {
    const Grid grid(2, 2);
    const auto a = kernel_matrix({grid.pixel_center(0, 0)}, 3.0, grid);
    CHECK(oracle::dense(a)(0, 0) == 1.0);
}

TEST_CASE("node beyond the support radius of every pixel gives a zero column") {
    const Grid grid(8, 8);
    const auto a = kernel_matrix({{0.5, 0.5}, {7.0, 7.0}}, 4.0, grid);
    const Matrix dense = oracle::dense(a);
    CHECK(dense.col(1).norm() == 0.0);
    CHECK(dense.col(0).norm() > 0.0);
}

TEST_CASE("translation equivariance of the kernel matrix") {
    const Grid grid(12, 12, Extent{0.0, 1.0, 0.0, 1.0});
    const Grid shifted(12, 12, Extent{0.5, 1.5, 0.25, 1.25});
    std::vector<Point2> nodes = {{0.3, 0.4}, {0.7, 0.2}, {0.5, 0.9}};
    std::vector<Point2> shifted_nodes;
    for (const auto& p : nodes)
        shifted_nodes.emplace_back(p.x() + 0.5, p.y() + 0.25);

    const Matrix a = oracle::dense(kernel_matrix(nodes, 3.0, grid));
    const Matrix b = oracle::dense(kernel_matrix(shifted_nodes, 3.0, shifted));
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("column support stays within the RBF radius") {
    const Grid grid(64, 64);
    const RbfConfig cfg; // spacing 5, eta 2
    const auto nodes = build_nodes(grid, cfg);
    const auto a = kernel_matrix(nodes.nodes, nodes.beta, grid);

    // support radius is eta * spacing_factor pixels; allow one pixel of slack
    const double radius_px = cfg.eta * cfg.spacing_factor + 1.0;
    const double bound = std::numbers::pi * radius_px * radius_px;
    const SpMat a_col = SpMat(a.transpose());
    for (int j = 0; j < a_col.outerSize(); ++j) {
        int nnz = 0;
        for (SpMat::InnerIterator it(a_col, j); it; ++it)
            ++nnz;
        CHECK(nnz <= bound);
    }
}

TEST_CASE("initial alpha signs") {
    const Grid grid(64, 64);
    const auto nodes = build_nodes(grid, RbfConfig{8.0, 1, 2.0});

    SUBCASE("center node positive, corner nodes negative") {
        const Vector alpha = initial_alpha(nodes.nodes, grid, 0.2, 1.0);
        // nearest node to the center
        int center_idx = 0, corner_idx = 0;
        double best_center = 1e9, best_corner = -1e9;
        for (size_t j = 0; j < nodes.nodes.size(); ++j) {
            const double d = (nodes.nodes[j] - Point2{0.5, 0.5}).norm();
            if (d < best_center) {
                best_center = d;
                center_idx = static_cast<int>(j);
            }
            if (d > best_corner) {
                best_corner = d;
                corner_idx = static_cast<int>(j);
            }
        }
        CHECK(alpha[center_idx] == 1.0);
        CHECK(alpha[corner_idx] == -1.0);
    }
    SUBCASE("radius fraction near one floods the domain with +amplitude") {
        const Vector alpha = initial_alpha(nodes.nodes, grid, 0.999, 1.0);
        bool interior_all_positive = true;
        for (size_t j = 0; j < nodes.nodes.size(); ++j) {
            const auto& p = nodes.nodes[j];
            if (p.x() >= 0.0 && p.x() <= 1.0 && p.y() >= 0.0 && p.y() <= 1.0)
                interior_all_positive &= alpha[static_cast<int>(j)] > 0.0;
        }
        CHECK(interior_all_positive);
        CHECK_THROWS_AS(initial_alpha(nodes.nodes, grid, 1.5, 1.0),
                        std::invalid_argument);
    }
    SUBCASE("phi = A alpha changes sign with defaults") {
        const auto model = LevelSetModel::create(grid, RbfConfig{});
        const Vector phi = model.phi();
        CHECK(phi.minCoeff() < 0.0);
        CHECK(phi.maxCoeff() > 0.0);
    }
}

TEST_CASE("196 RBFs represent a smooth shape on a 256^2 grid") {
    const Grid grid(256, 256);
    // spacing 25.6 px -> ceil(256 / 25.6) + 2*2 = 14 nodes per axis
    const auto nodes = build_nodes(grid, RbfConfig{25.6, 2, 2.0});
    REQUIRE(nodes.nodes.size() == 196);
    const auto a = kernel_matrix(nodes.nodes, nodes.beta, grid);

    // smooth wavy target shape, signed level-set style field
    Vector target(grid.size());
    const auto centers = pixel_centers(grid);
    for (int i = 0; i < grid.size(); ++i) {
        const Point2 rel = centers[i] - Point2{0.5, 0.5};
        const double ang = std::atan2(rel.y(), rel.x());
        const double radius = 0.25 + 0.07 * std::sin(3.0 * ang);
        target[i] = radius - rel.norm();
    }

    // least-squares fit of alpha via the normal equations
    const Matrix ata = (a.transpose() * a).toDense();
    const Vector atb = a.transpose() * target;
    const Vector alpha = ata.ldlt().solve(atb);
    const Vector phi = a * alpha;

    int mismatched = 0;
    for (int i = 0; i < grid.size(); ++i)
        mismatched += (phi[i] > 0.0) != (target[i] > 0.0);
    CHECK(static_cast<double>(mismatched) / grid.size() < 0.02);
}
