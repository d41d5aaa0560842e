#include "plstomo/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace plstomo {

double Extent::diagonal() const { return std::hypot(width(), height()); }

Grid::Grid(int nx, int ny, Extent extent)
    : nx_(nx), ny_(ny), extent_(extent) {
    if (nx <= 0 || ny <= 0)
        throw std::invalid_argument("Grid: pixel counts must be positive");
    if (!(extent.x1 > extent.x0) || !(extent.y1 > extent.y0))
        throw std::invalid_argument("Grid: extent must have positive area");
    dx_ = extent.width() / nx;
    dy_ = extent.height() / ny;
}

int Grid::nearest_pixel(const Point2& point) const {
    auto clamp = [](int v, int hi) { return std::min(std::max(v, 0), hi); };
    int col = clamp(static_cast<int>(std::floor((point.x() - extent_.x0) / dx_)), nx_ - 1);
    int row = clamp(static_cast<int>(std::floor((point.y() - extent_.y0) / dy_)), ny_ - 1);
    return index(row, col);
}

std::vector<Point2> pixel_centers(const Grid& grid) {
    std::vector<Point2> centers;
    centers.reserve(grid.size());
    for (int i = 0; i < grid.ny(); ++i)
        for (int j = 0; j < grid.nx(); ++j)
            centers.push_back(grid.pixel_center(i, j));
    return centers;
}

Image::Image(Grid g, Vector v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size())
        throw std::invalid_argument("Image: value count does not match grid");
    if (!values.allFinite())
        throw std::invalid_argument("Image: non-finite values");
}

Image& Image::operator+=(const Image& other) {
    if (!(grid == other.grid))
        throw std::invalid_argument("Image: grid mismatch");
    values += other.values;
    return *this;
}

Image& Image::hadamard(const Image& other) {
    if (!(grid == other.grid))
        throw std::invalid_argument("Image: grid mismatch");
    values = values.cwiseProduct(other.values);
    return *this;
}

std::string kernel_name(Kernel k) {
    return k == Kernel::Line ? "line" : "joseph";
}

Kernel kernel_from_name(const std::string& name) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower == "line")
        return Kernel::Line;
    if (lower == "joseph")
        return Kernel::Joseph;
    throw std::invalid_argument("unknown projection kernel: " + name);
}

ProjectionGeometry::ProjectionGeometry(std::vector<double> angles_,
                                       int detectors_, double det_min,
                                       double det_max, Kernel kernel_)
    : angles(std::move(angles_)), detectors(detectors_),
      detector_min(det_min), detector_max(det_max), kernel(kernel_) {
    if (angles.empty())
        throw std::invalid_argument("ProjectionGeometry: no angles");
    if (detectors < 1)
        throw std::invalid_argument("ProjectionGeometry: detectors < 1");
    if (!(detector_max > detector_min))
        throw std::invalid_argument("ProjectionGeometry: empty detector extent");
}

ProjectionGeometry ProjectionGeometry::covering(std::vector<double> angles_,
                                                int detectors_,
                                                const Grid& grid,
                                                Kernel kernel_) {
    const double half = 0.5 * grid.extent().diagonal();
    return {std::move(angles_), detectors_, -half, half, kernel_};
}

std::vector<double> uniform_angles(int count, double first, double last,
                                   bool include_last) {
    if (count < 1)
        throw std::invalid_argument("uniform_angles: count < 1");
    std::vector<double> angles(count);
    if (count == 1) {
        angles[0] = first;
        return angles;
    }
    const double step = (last - first) / (include_last ? count - 1 : count);
    for (int i = 0; i < count; ++i)
        angles[i] = first + i * step;
    return angles;
}

Sinogram::Sinogram(ProjectionGeometry g, Vector v)
    : geometry(std::move(g)), values(std::move(v)) {
    if (values.size() != geometry.rows())
        throw std::invalid_argument("Sinogram: value count does not match geometry");
    if (!values.allFinite())
        throw std::invalid_argument("Sinogram: non-finite values");
}

// --- serialization --------------------------------------------------------

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && (*first == ' ' || *first == '\t'))
        ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{})
        throw std::invalid_argument("cannot parse number: '" + s + "'");
    return v;
}

namespace {

std::ofstream open_out(const std::string& path, bool binary = false) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path, bool binary = false) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in)
        throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

std::vector<double> parse_csv_line(const std::string& line) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        row.push_back(parse_double(cell));
    return row;
}

void write_matrix_rows(std::ofstream& out, const Vector& values, int ncols) {
    const int nrows = static_cast<int>(values.size()) / ncols;
    for (int i = 0; i < nrows; ++i) {
        for (int j = 0; j < ncols; ++j) {
            if (j)
                out << ',';
            out << format_double(values[i * ncols + j]);
        }
        out << '\n';
    }
}

} // namespace

void write_image_csv(const std::string& path, const Image& image) {
    auto out = open_out(path);
    write_matrix_rows(out, image.values, image.grid.nx());
}

Image read_image_csv(const std::string& path, Extent extent) {
    auto in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        rows.push_back(parse_csv_line(line));
    }
    if (rows.empty())
        throw std::runtime_error("empty image CSV: " + path);
    const int ny = static_cast<int>(rows.size());
    const int nx = static_cast<int>(rows[0].size());
    Vector values(nx * ny);
    for (int i = 0; i < ny; ++i) {
        if (static_cast<int>(rows[i].size()) != nx)
            throw std::runtime_error("ragged image CSV: " + path);
        for (int j = 0; j < nx; ++j)
            values[i * nx + j] = rows[i][j];
    }
    return Image(Grid(nx, ny, extent), std::move(values));
}

void write_image_pgm16(const std::string& path, const Image& image) {
    auto out = open_out(path, true);
    const int nx = image.grid.nx();
    const int ny = image.grid.ny();
    out << "P5\n" << nx << " " << ny << "\n65535\n";
    const double lo = image.values.minCoeff();
    const double hi = image.values.maxCoeff();
    const double scale = hi > lo ? 65535.0 / (hi - lo) : 0.0;
    std::vector<unsigned char> bytes;
    bytes.reserve(static_cast<size_t>(nx) * ny * 2);
    for (int i = ny - 1; i >= 0; --i) {
        for (int j = 0; j < nx; ++j) {
            auto v = static_cast<std::uint16_t>(
                std::lround((image.values[i * nx + j] - lo) * scale));
            bytes.push_back(static_cast<unsigned char>(v >> 8));
            bytes.push_back(static_cast<unsigned char>(v & 0xff));
        }
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

void write_sinogram_csv(const std::string& path, const Sinogram& sino) {
    auto out = open_out(path);
    out << "# plstomo sinogram\n# angles:";
    for (size_t i = 0; i < sino.geometry.angles.size(); ++i)
        out << (i ? "," : " ") << format_double(sino.geometry.angles[i]);
    out << "\n# detectors: " << sino.geometry.detectors << "\n";
    out << "# detector_extent: " << format_double(sino.geometry.detector_min)
        << "," << format_double(sino.geometry.detector_max) << "\n";
    out << "# kernel: " << kernel_name(sino.geometry.kernel) << "\n";
    write_matrix_rows(out, sino.values, sino.geometry.detectors);
}

Sinogram read_sinogram_csv(const std::string& path) {
    auto in = open_in(path);
    std::vector<double> angles;
    int detectors = -1;
    double det_min = 0.0, det_max = 0.0;
    Kernel kernel = Kernel::Line;
    std::vector<double> values;
    std::string line;
    auto header_value = [](const std::string& l) {
        return l.substr(l.find(':') + 1);
    };
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (line[0] == '#') {
            if (line.find("# angles:") == 0) {
                angles = parse_csv_line(header_value(line));
            } else if (line.find("# detectors:") == 0) {
                detectors = static_cast<int>(parse_double(header_value(line)));
            } else if (line.find("# detector_extent:") == 0) {
                auto ext = parse_csv_line(header_value(line));
                if (ext.size() != 2)
                    throw std::runtime_error("bad detector_extent in " + path);
                det_min = ext[0];
                det_max = ext[1];
            } else if (line.find("# kernel:") == 0) {
                std::string name = header_value(line);
                name.erase(0, name.find_first_not_of(' '));
                kernel = kernel_from_name(name);
            }
            continue;
        }
        auto row = parse_csv_line(line);
        values.insert(values.end(), row.begin(), row.end());
    }
    if (angles.empty() || detectors < 1)
        throw std::runtime_error("sinogram CSV missing header block: " + path);
    ProjectionGeometry geom(angles, detectors, det_min, det_max, kernel);
    Vector v = Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    return Sinogram(std::move(geom), std::move(v));
}

void write_vector_csv(const std::string& path, const Vector& v) {
    auto out = open_out(path);
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out << format_double(v[i]) << '\n';
}

Vector read_vector_csv(const std::string& path) {
    auto in = open_in(path);
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        values.push_back(parse_double(line));
    }
    Vector v = Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    return v;
}

void write_points_csv(const std::string& path, const std::vector<Point2>& pts) {
    auto out = open_out(path);
    for (const auto& p : pts)
        out << format_double(p.x()) << ',' << format_double(p.y()) << '\n';
}

} // namespace plstomo
