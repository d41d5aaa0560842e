#include "plstomo/projector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <vector>

namespace plstomo {

namespace {

struct Ray {
    Point2 origin;    // point on the ray
    Point2 direction; // unit vector along the ray
};

// Ray for (angle, shift): the line { x : n(theta) . (x - c) = s } traversed
// along d(theta) = (-sin theta, cos theta).
Ray make_ray(double theta, double shift, const Extent& extent) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const Point2 normal{c, s};
    return {extent.center() + shift * normal, Point2{-s, c}};
}

// Clips the ray parameter to the extent box; returns false on a miss.
bool clip_to_extent(const Ray& ray, const Extent& extent, double& t_enter,
                    double& t_exit) {
    t_enter = -std::numeric_limits<double>::infinity();
    t_exit = std::numeric_limits<double>::infinity();
    const double lo[2] = {extent.x0, extent.y0};
    const double hi[2] = {extent.x1, extent.y1};
    for (int axis = 0; axis < 2; ++axis) {
        const double o = ray.origin[axis];
        const double d = ray.direction[axis];
        if (d == 0.0) {
            if (o < lo[axis] || o > hi[axis])
                return false;
            continue;
        }
        double t0 = (lo[axis] - o) / d;
        double t1 = (hi[axis] - o) / d;
        if (t0 > t1)
            std::swap(t0, t1);
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
    }
    return t_exit > t_enter;
}

using TripletList = std::vector<Eigen::Triplet<double>>;

// Siddon-style exact intersection lengths: collect the ray parameters of all
// grid-line crossings inside [t_enter, t_exit] and emit one entry per cell
// segment, classified by the segment midpoint.
void line_kernel_row(int row, const Ray& ray, const Grid& grid,
                     TripletList& out) {
    double t_enter, t_exit;
    if (!clip_to_extent(ray, grid.extent(), t_enter, t_exit))
        return;

    const Extent& e = grid.extent();
    std::vector<double> ts;
    ts.reserve(grid.nx() + grid.ny() + 2);
    ts.push_back(t_enter);
    ts.push_back(t_exit);
    auto add_axis_crossings = [&](double origin, double direction, double lo,
                                  double pitch, int count) {
        if (direction == 0.0)
            return;
        for (int k = 1; k < count; ++k) {
            const double t = (lo + k * pitch - origin) / direction;
            if (t > t_enter && t < t_exit)
                ts.push_back(t);
        }
    };
    add_axis_crossings(ray.origin.x(), ray.direction.x(), e.x0, grid.dx(),
                       grid.nx());
    add_axis_crossings(ray.origin.y(), ray.direction.y(), e.y0, grid.dy(),
                       grid.ny());
    std::sort(ts.begin(), ts.end());

    for (size_t k = 0; k + 1 < ts.size(); ++k) {
        const double length = ts[k + 1] - ts[k];
        if (length <= 0.0)
            continue;
        const double t_mid = 0.5 * (ts[k] + ts[k + 1]);
        const Point2 mid = ray.origin + t_mid * ray.direction;
        const int col = static_cast<int>(std::floor((mid.x() - e.x0) / grid.dx()));
        const int irow = static_cast<int>(std::floor((mid.y() - e.y0) / grid.dy()));
        if (col < 0 || col >= grid.nx() || irow < 0 || irow >= grid.ny())
            continue;
        out.emplace_back(row, grid.index(irow, col), length);
    }
}

// Joseph kernel: one sample per pixel line of the driving axis (the axis most
// parallel to the ray), linear interpolation across the other axis, weights
// scaled by the ray length per driving step. Samples falling outside the
// extent are dropped; interpolation is clamped at the grid edge.
void joseph_kernel_row(int row, const Ray& ray, const Grid& grid,
                       TripletList& out) {
    const Extent& e = grid.extent();
    const bool drive_y = std::abs(ray.direction.y()) >= std::abs(ray.direction.x());

    const int n_drive = drive_y ? grid.ny() : grid.nx();
    const int n_cross = drive_y ? grid.nx() : grid.ny();
    const double drive_lo = drive_y ? e.y0 : e.x0;
    const double cross_lo = drive_y ? e.x0 : e.y0;
    const double cross_hi = drive_y ? e.x1 : e.y1;
    const double drive_pitch = drive_y ? grid.dy() : grid.dx();
    const double cross_pitch = drive_y ? grid.dx() : grid.dy();
    const double d_drive = drive_y ? ray.direction.y() : ray.direction.x();
    const double d_cross = drive_y ? ray.direction.x() : ray.direction.y();
    const double o_drive = drive_y ? ray.origin.y() : ray.origin.x();
    const double o_cross = drive_y ? ray.origin.x() : ray.origin.y();

    if (d_drive == 0.0)
        return; // degenerate: ray perpendicular to driving axis
    const double step_length = drive_pitch / std::abs(d_drive);

    for (int k = 0; k < n_drive; ++k) {
        const double drive_pos = drive_lo + (k + 0.5) * drive_pitch;
        const double t = (drive_pos - o_drive) / d_drive;
        const double cross_pos = o_cross + t * d_cross;
        if (cross_pos < cross_lo || cross_pos > cross_hi)
            continue;
        double c = (cross_pos - cross_lo) / cross_pitch - 0.5;
        // snap roundoff-level offsets so samples on a pixel center stay
        // single-entry instead of leaking 1e-16-weight dust
        if (std::abs(c - std::round(c)) < 1e-12)
            c = std::round(c);
        int j0;
        double w;
        if (n_cross == 1) {
            j0 = 0;
            w = 0.0;
        } else {
            j0 = static_cast<int>(std::floor(c));
            w = c - j0;
            if (j0 < 0) {
                j0 = 0;
                w = 0.0;
            } else if (j0 >= n_cross - 1) {
                j0 = n_cross - 2;
                w = 1.0;
            }
        }
        const int col0 = drive_y ? grid.index(k, j0) : grid.index(j0, k);
        const int col1 = drive_y ? grid.index(k, j0 + 1) : grid.index(j0 + 1, k);
        if (w < 1.0)
            out.emplace_back(row, col0, (1.0 - w) * step_length);
        if (w > 0.0)
            out.emplace_back(row, col1, w * step_length);
    }
}

} // namespace

SparseOperator::SparseOperator(SpMat w, ProjectionGeometry geometry, Grid grid)
    : w_(std::move(w)), geometry_(std::move(geometry)), grid_(grid) {
    if (w_.rows() != geometry_.rows() || w_.cols() != grid_.size())
        throw std::invalid_argument("SparseOperator: shape mismatch");
    wt_ = w_.transpose();
    wt_.makeCompressed();
    col_norms_ = Vector::Zero(w_.cols());
    for (int j = 0; j < wt_.outerSize(); ++j) {
        double sum = 0.0;
        for (SpMat::InnerIterator it(wt_, j); it; ++it)
            sum += it.value() * it.value();
        col_norms_[j] = std::sqrt(sum);
    }
}

Vector SparseOperator::apply(const Vector& u) const {
    if (u.size() != cols())
        throw std::invalid_argument("SparseOperator::apply: dimension mismatch");
    return w_ * u;
}

Vector SparseOperator::apply_adjoint(const Vector& p) const {
    if (p.size() != rows())
        throw std::invalid_argument(
            "SparseOperator::apply_adjoint: dimension mismatch");
    return wt_ * p;
}

void SparseOperator::dump_triplets_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << "row,col,weight\n";
    for (int i = 0; i < w_.outerSize(); ++i)
        for (SpMat::InnerIterator it(w_, i); it; ++it)
            out << it.row() << ',' << it.col() << ','
                << format_double(it.value()) << '\n';
}

SparseOperator assemble(const ProjectionGeometry& geometry, const Grid& grid) {
    TripletList triplets;
    const size_t per_row = geometry.kernel == Kernel::Line
                               ? grid.nx() + grid.ny()
                               : 2 * std::max(grid.nx(), grid.ny());
    triplets.reserve(per_row * geometry.rows());

    int row = 0;
    for (double theta : geometry.angles) {
        for (int k = 0; k < geometry.detectors; ++k, ++row) {
            const Ray ray = make_ray(theta, geometry.shift(k), grid.extent());
            if (geometry.kernel == Kernel::Line)
                line_kernel_row(row, ray, grid, triplets);
            else
                joseph_kernel_row(row, ray, grid, triplets);
        }
    }

    SpMat w(geometry.rows(), grid.size());
    w.setFromTriplets(triplets.begin(), triplets.end());
    w.makeCompressed();
    return SparseOperator(std::move(w), geometry, grid);
}

Sinogram apply(const SparseOperator& w, const Image& u) {
    if (!(u.grid == w.grid()))
        throw std::invalid_argument("apply: image grid does not match operator");
    return Sinogram(w.geometry(), w.apply(u.values));
}

Image apply_adjoint(const SparseOperator& w, const Sinogram& p) {
    if (p.geometry.rows() != w.rows())
        throw std::invalid_argument(
            "apply_adjoint: sinogram does not match operator");
    return Image(w.grid(), w.apply_adjoint(p.values));
}

} // namespace plstomo
