#include "nrcas/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "io_util.hpp"
#include "nrcas/errors.hpp"

namespace nrcas {

ArrayGeometry::ArrayGeometry(std::vector<Position> positions) : positions_(std::move(positions)) {
    if (positions_.empty()) throw InvalidArgument("geometry needs at least one element");
    std::set<std::pair<double, double>> seen;
    for (std::size_t i = 0; i < positions_.size(); ++i) {
        const auto &p = positions_[i];
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw InvalidArgument("element " + std::to_string(i + 1) + " has a non-finite position");
        if (!seen.emplace(p.x, p.y).second)
            throw InvalidArgument("element " + std::to_string(i + 1) + " duplicates an earlier position");
    }
}

double ArrayGeometry::radius() const {
    double cx = 0, cy = 0;
    for (const auto &p : positions_) {
        cx += p.x;
        cy += p.y;
    }
    cx /= static_cast<double>(size());
    cy /= static_cast<double>(size());
    double r = 0;
    for (const auto &p : positions_) r = std::max(r, std::hypot(p.x - cx, p.y - cy));
    return r;
}

bool ArrayGeometry::on_axis(Axis axis) const {
    return std::all_of(positions_.begin(), positions_.end(),
                       [axis](const Position &p) { return axis == Axis::x ? p.y == 0.0 : p.x == 0.0; });
}

ArrayGeometry make_linear(int n, double spacing, Axis axis) {
    if (n < 1) throw InvalidArgument("make_linear: n must be positive");
    if (!(spacing > 0)) throw InvalidArgument("make_linear: spacing must be positive");
    std::vector<Position> pos(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        double c = k * spacing;
        pos[static_cast<std::size_t>(k)] = axis == Axis::x ? Position{c, 0.0} : Position{0.0, c};
    }
    return ArrayGeometry(std::move(pos));
}

ArrayGeometry make_planar_grid(int nx, int ny, double spacing) {
    if (nx < 1 || ny < 1) throw InvalidArgument("make_planar_grid: nx and ny must be positive");
    if (!(spacing > 0)) throw InvalidArgument("make_planar_grid: spacing must be positive");
    std::vector<Position> pos;
    pos.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    for (int q = 0; q < ny; ++q)
        for (int p = 0; p < nx; ++p) pos.push_back({p * spacing, q * spacing});
    return ArrayGeometry(std::move(pos));
}

ApertureRegion::ApertureRegion(Shape shape) : shape_(std::move(shape)) {
    if (auto *r = std::get_if<Rectangle>(&shape_)) {
        if (!(r->x_min < r->x_max) || !(r->y_min < r->y_max))
            throw InvalidArgument("rectangle region needs x_min < x_max and y_min < y_max");
    } else if (auto *c = std::get_if<Circle>(&shape_)) {
        if (!(c->radius > 0)) throw InvalidArgument("circle region needs a positive radius");
    } else {
        auto &idx = std::get<IndexSet>(shape_).indices;
        std::set<std::size_t> seen;
        for (auto i : idx) {
            if (i < 1) throw InvalidArgument("index set entries are 1-based");
            if (!seen.insert(i).second) throw InvalidArgument("index set has duplicate entry " + std::to_string(i));
        }
    }
}

ApertureRegion ApertureRegion::rectangle(double x_min, double x_max, double y_min, double y_max) {
    return ApertureRegion(Rectangle{x_min, x_max, y_min, y_max});
}

ApertureRegion ApertureRegion::circle(double x_c, double y_c, double radius) {
    return ApertureRegion(Circle{x_c, y_c, radius});
}

ApertureRegion ApertureRegion::index_set(std::vector<std::size_t> indices) {
    return ApertureRegion(IndexSet{std::move(indices)});
}

std::vector<std::size_t> elements_in_region(const ArrayGeometry &geom, const ApertureRegion &region) {
    std::vector<std::size_t> out;
    const double eps = kRegionBoundarySlack;
    if (auto *set = std::get_if<IndexSet>(&region.shape())) {
        for (auto i : set->indices)
            if (i > geom.size())
                throw InvalidArgument("index " + std::to_string(i) + " exceeds element count " +
                                      std::to_string(geom.size()));
        out = set->indices;
        std::sort(out.begin(), out.end());
        return out;
    }
    for (std::size_t n = 0; n < geom.size(); ++n) {
        const auto &p = geom[n];
        bool inside;
        if (auto *r = std::get_if<Rectangle>(&region.shape()))
            inside = p.x >= r->x_min - eps && p.x <= r->x_max + eps && p.y >= r->y_min - eps && p.y <= r->y_max + eps;
        else {
            const auto &c = std::get<Circle>(region.shape());
            inside = std::hypot(p.x - c.x_c, p.y - c.y_c) <= c.radius + eps;
        }
        if (inside) out.push_back(n + 1);
    }
    return out;
}

ArrayGeometry load_geometry_csv(const std::filesystem::path &path) {
    auto table = detail::read_csv(path);
    int ci = table.column("index"), cx = table.column("x_lambda"), cy = table.column("y_lambda");
    if (ci < 0 || cx < 0 || cy < 0) throw InputError(path.string() + ": expected header index,x_lambda,y_lambda");
    std::vector<Position> pos(table.rows.size());
    std::vector<bool> filled(pos.size(), false);
    for (const auto &row : table.rows) {
        double idx = row[static_cast<std::size_t>(ci)];
        if (idx != std::floor(idx) || idx < 1 || idx > static_cast<double>(pos.size()))
            throw InputError(path.string() + ": index out of range");
        auto k = static_cast<std::size_t>(idx) - 1;
        if (filled[k]) throw InputError(path.string() + ": repeated index " + std::to_string(k + 1));
        filled[k] = true;
        pos[k] = {row[static_cast<std::size_t>(cx)], row[static_cast<std::size_t>(cy)]};
    }
    try {
        return ArrayGeometry(std::move(pos));
    } catch (const InvalidArgument &e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_geometry_csv(const std::filesystem::path &path, const ArrayGeometry &geom) {
    auto out = detail::open_output(path);
    out << "index,x_lambda,y_lambda\n";
    for (std::size_t n = 0; n < geom.size(); ++n)
        out << n + 1 << ',' << detail::fmt(geom[n].x) << ',' << detail::fmt(geom[n].y) << '\n';
}

} // namespace nrcas
