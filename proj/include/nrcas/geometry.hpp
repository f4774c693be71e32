#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

namespace nrcas {

// Element position in wavelengths.
struct Position {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Position &) const = default;
};

enum class Axis { x, y };

// Fixed set of element positions (lambda units). Element indices exposed by the
// public API and by the CSV files are 1-based.
class ArrayGeometry {
  public:
    explicit ArrayGeometry(std::vector<Position> positions);

    std::size_t size() const { return positions_.size(); }
    std::span<const Position> positions() const { return positions_; }
    const Position &operator[](std::size_t i) const { return positions_[i]; }

    // Largest distance between any element and the array centroid.
    double radius() const;

    // True when every element lies on the x axis (or on the y axis).
    bool on_axis(Axis axis) const;

  private:
    std::vector<Position> positions_;
};

ArrayGeometry make_linear(int n, double spacing, Axis axis);

// Row-major: element index = q * nx + p, position (p * spacing, q * spacing).
ArrayGeometry make_planar_grid(int nx, int ny, double spacing);

struct Rectangle {
    double x_min, x_max, y_min, y_max;
    bool operator==(const Rectangle &) const = default;
};

struct Circle {
    double x_c, y_c, radius;
    bool operator==(const Circle &) const = default;
};

struct IndexSet {
    std::vector<std::size_t> indices; // 1-based
    bool operator==(const IndexSet &) const = default;
};

class ApertureRegion {
  public:
    using Shape = std::variant<Rectangle, Circle, IndexSet>;

    explicit ApertureRegion(Shape shape);

    static ApertureRegion rectangle(double x_min, double x_max, double y_min, double y_max);
    static ApertureRegion circle(double x_c, double y_c, double radius);
    static ApertureRegion index_set(std::vector<std::size_t> indices);

    const Shape &shape() const { return shape_; }
    bool operator==(const ApertureRegion &) const = default;

  private:
    Shape shape_;
};

// Absolute slack used for the closed-boundary containment test, in lambda.
inline constexpr double kRegionBoundarySlack = 1e-9;

// 1-based indices of the elements inside the (closed) region, ascending.
// Index sets referring past the end of the geometry raise InvalidArgument.
std::vector<std::size_t> elements_in_region(const ArrayGeometry &geom, const ApertureRegion &region);

// CSV with header index,x_lambda,y_lambda.
ArrayGeometry load_geometry_csv(const std::filesystem::path &path);
void write_geometry_csv(const std::filesystem::path &path, const ArrayGeometry &geom);

} // namespace nrcas
