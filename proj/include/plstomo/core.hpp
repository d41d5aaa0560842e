#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace plstomo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Point2 = Eigen::Vector2d;

inline constexpr const char* version_string = "0.1.0";

/// Physical bounds of the reconstruction domain. Defaults to the unit square.
struct Extent {
    double x0 = 0.0;
    double x1 = 1.0;
    double y0 = 0.0;
    double y1 = 1.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    Point2 center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
    double diagonal() const;

    bool operator==(const Extent&) const = default;
};

/// Regular pixel discretization of a rectangular domain. Pixels are stored
/// row-major with the row index running along y, so pixel (i, j) covers
/// [x0 + j*dx, x0 + (j+1)*dx] x [y0 + i*dy, y0 + (i+1)*dy].
class Grid {
  public:
    Grid(int nx, int ny, Extent extent = {});

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int size() const { return nx_ * ny_; }
    double dx() const { return dx_; }
    double dy() const { return dy_; }
    const Extent& extent() const { return extent_; }

    int index(int row, int col) const { return row * nx_ + col; }
    std::pair<int, int> row_col(int index) const {
        return {index / nx_, index % nx_};
    }

    Point2 pixel_center(int row, int col) const {
        return {extent_.x0 + (col + 0.5) * dx_, extent_.y0 + (row + 0.5) * dy_};
    }

    /// Index of the pixel whose center is closest to `point` (clamped to the
    /// grid, so points outside the extent map to a boundary pixel).
    int nearest_pixel(const Point2& point) const;

    bool operator==(const Grid&) const = default;

  private:
    int nx_;
    int ny_;
    Extent extent_;
    double dx_;
    double dy_;
};

/// Pixel centers in row-major order.
std::vector<Point2> pixel_centers(const Grid& grid);

/// Scalar field sampled at pixel centers: attenuation u, background u0, or a
/// level-set field phi. Values are validated to be finite at construction.
struct Image {
    Grid grid;
    Vector values;

    explicit Image(Grid g) : grid(g), values(Vector::Zero(g.size())) {}
    Image(Grid g, Vector v);

    double operator[](int i) const { return values[i]; }
    double& operator[](int i) { return values[i]; }
    double at(int row, int col) const { return values[grid.index(row, col)]; }

    Image& operator+=(const Image& other);
    /// Elementwise (Hadamard) product.
    Image& hadamard(const Image& other);
};

enum class Kernel { Line, Joseph };

std::string kernel_name(Kernel k);
Kernel kernel_from_name(const std::string& name);

/// Parallel-beam sampling: a list of angles, each observed by `detectors`
/// equispaced shifts. The shift s parametrizes the ray
/// { x : n(theta) . (x - c) = s } with n(theta) = (cos theta, sin theta) and
/// c the domain center. Rows of the resulting operator are ordered
/// angle-major: row = angle_index * detectors + detector_index.
struct ProjectionGeometry {
    std::vector<double> angles;
    int detectors = 1;
    double detector_min = 0.0;
    double detector_max = 0.0;
    Kernel kernel = Kernel::Line;

    ProjectionGeometry() = default;
    ProjectionGeometry(std::vector<double> angles_, int detectors_,
                       double det_min, double det_max,
                       Kernel kernel_ = Kernel::Line);

    int rows() const { return static_cast<int>(angles.size()) * detectors; }
    /// Detector shifts are equispaced midpoints across the extent.
    double shift(int detector_index) const {
        return detector_min + (detector_index + 0.5) *
                                  (detector_max - detector_min) / detectors;
    }

    /// Geometry whose detector extent spans the image diagonal, centered on
    /// the domain center (covers the whole grid at every angle).
    static ProjectionGeometry covering(std::vector<double> angles_,
                                       int detectors_, const Grid& grid,
                                       Kernel kernel_ = Kernel::Line);
};

/// `count` equispaced angles over [first, last); with `include_last` the
/// spacing is (last - first) / (count - 1) and the endpoint is sampled.
std::vector<double> uniform_angles(int count, double first, double last,
                                   bool include_last = false);

/// Measurement vector with its (angle, shift) sampling.
struct Sinogram {
    ProjectionGeometry geometry;
    Vector values;

    explicit Sinogram(ProjectionGeometry g)
        : geometry(std::move(g)), values(Vector::Zero(geometry.rows())) {}
    Sinogram(ProjectionGeometry g, Vector v);
};

// --- serialization --------------------------------------------------------

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

/// Full-precision CSV matrix, one line per grid row.
void write_image_csv(const std::string& path, const Image& image);
Image read_image_csv(const std::string& path, Extent extent = {});

/// 16-bit binary PGM (P5, maxval 65535, big-endian samples), linearly scaled
/// to [min, max]. Rows are written top-down (largest y first).
void write_image_pgm16(const std::string& path, const Image& image);

/// CSV with a '#'-prefixed header block recording angles, detector count,
/// detector extent and kernel, then one line of values per angle.
void write_sinogram_csv(const std::string& path, const Sinogram& sino);
Sinogram read_sinogram_csv(const std::string& path);

void write_vector_csv(const std::string& path, const Vector& v);
Vector read_vector_csv(const std::string& path);

void write_points_csv(const std::string& path, const std::vector<Point2>& pts);

} // namespace plstomo
