#include "nrcas/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "io_util.hpp"
#include "nrcas/errors.hpp"

namespace nrcas {

namespace {

constexpr double pi = std::numbers::pi;

double deg2rad(double d) { return d * pi / 180.0; }
double rad2deg(double r) { return r * 180.0 / pi; }

void require_same_size(std::size_t a, std::size_t b, const char *what) {
    if (a != b)
        throw InvalidArgument(std::string(what) + ": sample count mismatch (" + std::to_string(a) + " vs " +
                              std::to_string(b) + ")");
}

} // namespace

AngularGrid::AngularGrid(std::vector<AngularSample> samples, bool one_dimensional)
    : samples_(std::move(samples)), one_dimensional_(one_dimensional) {
    if (samples_.empty()) throw InvalidArgument("angular grid is empty");
    for (const auto &s : samples_)
        if (!(s.weight >= 0) || !std::isfinite(s.theta) || !std::isfinite(s.phi))
            throw InvalidArgument("angular grid has a negative weight or non-finite angle");
}

AngularGrid AngularGrid::linear_u(std::size_t m, double phi) {
    if (m < 2) throw InvalidArgument("linear_u: need at least 2 samples");
    std::vector<AngularSample> s(m);
    const double du = 2.0 / static_cast<double>(m - 1);
    for (std::size_t i = 0; i < m; ++i) {
        double u = std::clamp(-1.0 + du * static_cast<double>(i), -1.0, 1.0);
        double w = pi * du * ((i == 0 || i + 1 == m) ? 0.5 : 1.0);
        s[i] = {std::asin(u), phi, w};
    }
    return AngularGrid(std::move(s), true);
}

AngularGrid AngularGrid::hemisphere(std::size_t n_theta, std::size_t n_phi) {
    if (n_theta < 1 || n_phi < 1) throw InvalidArgument("hemisphere: resolution must be positive");
    const double dt = 0.5 * pi / static_cast<double>(n_theta);
    const double dp = 2.0 * pi / static_cast<double>(n_phi);
    std::vector<AngularSample> s;
    s.reserve(n_theta * n_phi);
    for (std::size_t k = 1; k <= n_theta; ++k) {
        double th = dt * static_cast<double>(k);
        double w = std::sin(th) * dt * dp * (k == n_theta ? 0.5 : 1.0);
        for (std::size_t l = 0; l < n_phi; ++l) s.push_back({th, dp * static_cast<double>(l), w});
    }
    return AngularGrid(std::move(s), false);
}

AngularGrid AngularGrid::full_sphere(std::size_t n_theta, std::size_t n_phi) {
    if (n_theta < 1 || n_phi < 1) throw InvalidArgument("full_sphere: resolution must be positive");
    const double dt = pi / static_cast<double>(n_theta);
    const double dp = 2.0 * pi / static_cast<double>(n_phi);
    std::vector<AngularSample> s;
    s.reserve(n_theta * n_phi);
    for (std::size_t k = 0; k < n_theta; ++k) {
        double th = dt * (static_cast<double>(k) + 0.5);
        double w = std::sin(th) * dt * dp;
        for (std::size_t l = 0; l < n_phi; ++l) s.push_back({th, dp * static_cast<double>(l), w});
    }
    return AngularGrid(std::move(s), false);
}

AngularGrid AngularGrid::full_sphere_linear(std::size_t m, double phi) {
    auto g = linear_u(m, phi);
    for (auto &s : g.samples_) s.weight *= 2.0;
    return g;
}

double AngularGrid::total_weight() const {
    double t = 0;
    for (const auto &s : samples_) t += s.weight;
    return t;
}

AngularGrid default_synthesis_grid(const ArrayGeometry &geom, std::size_t oversampling) {
    if (oversampling < 1) throw InvalidArgument("oversampling must be positive");
    const std::size_t n = geom.size();
    if (geom.on_axis(Axis::x)) return AngularGrid::linear_u(std::max<std::size_t>(2, oversampling * n), 0.0);
    if (geom.on_axis(Axis::y)) return AngularGrid::linear_u(std::max<std::size_t>(2, oversampling * n), 0.5 * pi);
    // n_phi = 2 n_theta and n_theta^2 ~ oversampling * N / 2 gives M ~ oversampling * N.
    auto n_theta = static_cast<std::size_t>(std::lround(std::sqrt(0.5 * static_cast<double>(oversampling * n))));
    n_theta = std::max<std::size_t>(n_theta, 1);
    while (2 * n_theta * n_theta < n) ++n_theta;
    return AngularGrid::hemisphere(n_theta, 2 * n_theta);
}

AngularGrid default_q_grid(const ArrayGeometry &geom) {
    const double extent = 2.0 * geom.radius();
    const auto cells = static_cast<std::size_t>(std::ceil(extent));
    if (geom.on_axis(Axis::x) || geom.on_axis(Axis::y)) {
        double phi = geom.on_axis(Axis::x) ? 0.0 : 0.5 * pi;
        return AngularGrid::full_sphere_linear(std::max<std::size_t>(4001, 400 * cells + 1), phi);
    }
    std::size_t n_theta = std::max<std::size_t>(90, 24 * cells);
    return AngularGrid::full_sphere(n_theta, 2 * n_theta);
}

AngularGrid cut_grid(double phi_deg, double step_deg) {
    if (!(step_deg > 0) || step_deg > 90) throw InvalidArgument("cut step must be in (0, 90] degrees");
    auto m = static_cast<std::size_t>(std::lround(180.0 / step_deg)) + 1;
    std::vector<AngularSample> s(m);
    for (std::size_t i = 0; i < m; ++i) {
        double th = std::min(90.0, -90.0 + step_deg * static_cast<double>(i));
        s[i] = {deg2rad(th), deg2rad(phi_deg), 0.0};
    }
    return AngularGrid(std::move(s), true);
}

PatternSamples PatternSamples::from_field(Eigen::VectorXcd values) {
    PatternSamples p;
    p.power = values.cwiseAbs2();
    p.values = std::move(values);
    return p;
}

PatternMask::PatternMask(Eigen::VectorXd lower_, Eigen::VectorXd upper_)
    : lower(std::move(lower_)), upper(std::move(upper_)) {
    require_same_size(static_cast<std::size_t>(lower.size()), static_cast<std::size_t>(upper.size()), "PatternMask");
    for (Eigen::Index m = 0; m < lower.size(); ++m) {
        if (!(lower[m] >= 0) || !(upper[m] >= 0)) throw InvalidArgument("mask values must be non-negative");
        if (lower[m] > upper[m])
            throw InvalidArgument("mask lower bound exceeds upper bound at sample " + std::to_string(m));
    }
}

PatternSamples array_factor(const ArrayGeometry &geom, const ExcitationVector &w, const AngularGrid &grid) {
    require_same_size(w.size(), geom.size(), "array_factor");
    Eigen::VectorXcd af(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const auto &s = grid[m];
        const double u = std::sin(s.theta) * std::cos(s.phi);
        const double v = std::sin(s.theta) * std::sin(s.phi);
        std::complex<double> acc = 0;
        for (std::size_t n = 0; n < geom.size(); ++n)
            acc += w[n] * std::polar(1.0, 2.0 * pi * (geom[n].x * u + geom[n].y * v));
        af[static_cast<Eigen::Index>(m)] = acc;
    }
    return PatternSamples::from_field(std::move(af));
}

double mask_matching(const PatternSamples &p, const PatternMask &mask, const AngularGrid &grid) {
    require_same_size(p.size(), mask.size(), "mask_matching");
    require_same_size(p.size(), grid.size(), "mask_matching");
    const double pmax = p.power.size() ? p.power.maxCoeff() : 0.0;
    const double scale = pmax > 0 ? 1.0 / pmax : 1.0;
    double acc = 0;
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const auto i = static_cast<Eigen::Index>(m);
        const double pm = p.power[i] * scale;
        double e = 0;
        if (pm - mask.upper[i] >= 0) e += pm - mask.upper[i];
        if (mask.lower[i] - pm >= 0) e += mask.lower[i] - pm;
        acc += grid[m].weight * e;
    }
    return acc / (2.0 * pi);
}

double pattern_tolerance(const PatternSamples &p, const PatternSamples &p_ref, const AngularGrid &grid) {
    require_same_size(p.size(), p_ref.size(), "pattern_tolerance");
    require_same_size(p.size(), grid.size(), "pattern_tolerance");
    double num = 0, den = 0;
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const auto i = static_cast<Eigen::Index>(m);
        num += grid[m].weight * std::abs(p.power[i] - p_ref.power[i]);
        den += grid[m].weight * p_ref.power[i];
    }
    if (!(den > 0)) throw NumericalError("pattern_tolerance: divide by zero (reference pattern has no power)");
    return num / den;
}

double q_factor(const ExcitationVector &w, const PatternSamples &p, const AngularGrid &grid) {
    require_same_size(p.size(), grid.size(), "q_factor");
    double den = 0;
    for (std::size_t m = 0; m < grid.size(); ++m) den += grid[m].weight * p.power[static_cast<Eigen::Index>(m)];
    if (!(den > 0)) throw NumericalError("q_factor: divide by zero (pattern has no power)");
    return w.weights().squaredNorm() / den;
}

void validate(const MaskDescriptor &d) {
    auto bad = [](const std::string &msg) { throw InvalidArgument("mask: " + msg); };
    if (!(d.sll_db < 0)) bad("sll_db must be negative");
    if (d.sll_alt_db && !(*d.sll_alt_db < 0)) bad("sll_alt_db must be negative");
    if (!(d.rpe_db >= 0)) bad("rpe_db must be non-negative");
    if (!(d.transition_deg >= 0)) bad("transition_deg must be non-negative");
    for (double f : {d.fnbw_deg, d.fnbw_x_deg.value_or(d.fnbw_deg), d.fnbw_y_deg.value_or(d.fnbw_deg)}) {
        if (!(f > 0 && f < 180)) bad("fnbw must lie in (0, 180) degrees");
        if (!(2 * d.transition_deg < f)) bad("transition bands leave no shaped region");
    }
    if (d.kind == MaskKind::cosecant_squared && !(d.csc_start_deg > 0 && d.csc_start_deg < 90))
        bad("csc_start_deg must lie in (0, 90)");
    if (d.lobe_start_deg) {
        double a = *d.lobe_start_deg;
        if (a < -90 || a + d.fnbw_deg > 90) bad("main lobe must lie within [-90, 90] degrees");
    }
}

PatternMask build_mask(const MaskDescriptor &d, const AngularGrid &grid) {
    validate(d);
    const auto m = static_cast<Eigen::Index>(grid.size());
    Eigen::VectorXd lm = Eigen::VectorXd::Zero(m), um(m);
    const double sll = std::pow(10.0, d.sll_db / 10.0);
    const double sll_alt = std::pow(10.0, d.sll_alt_db.value_or(d.sll_db) / 10.0);
    const double ripple = std::pow(10.0, -d.rpe_db / 10.0);
    constexpr double eps = 1e-12;

    if (grid.one_dimensional()) {
        const double a = d.lobe_start_deg.value_or(-0.5 * d.fnbw_deg);
        const double b = a + d.fnbw_deg;
        const double sa = a + d.transition_deg, sb = b - d.transition_deg;
        const double csc0 = std::pow(std::sin(deg2rad(d.csc_start_deg)), 2);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double th = rad2deg(grid[static_cast<std::size_t>(i)].theta);
            if (th < a - eps || th > b + eps) {
                um[i] = th < 0 ? sll_alt : sll;
            } else if (th < sa - eps || th > sb + eps) {
                um[i] = 1.0;
            } else {
                double shape = 1.0;
                if (d.kind == MaskKind::cosecant_squared && th > d.csc_start_deg)
                    shape = csc0 / std::pow(std::sin(deg2rad(th)), 2);
                um[i] = shape;
                lm[i] = shape * ripple;
            }
        }
        return PatternMask(std::move(lm), std::move(um));
    }

    if (d.kind == MaskKind::cosecant_squared)
        throw InvalidArgument("mask: cosecant-squared masks need a one-dimensional grid");
    const double fx = d.fnbw_x_deg.value_or(d.fnbw_deg), fy = d.fnbw_y_deg.value_or(d.fnbw_deg);
    const double ax = std::sin(deg2rad(0.5 * fx)), ay = std::sin(deg2rad(0.5 * fy));
    const double sx = std::sin(deg2rad(0.5 * fx - d.transition_deg));
    const double sy = std::sin(deg2rad(0.5 * fy - d.transition_deg));
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto &s = grid[static_cast<std::size_t>(i)];
        const double u = std::sin(s.theta) * std::cos(s.phi), v = std::sin(s.theta) * std::sin(s.phi);
        const double r_lobe = std::hypot(u / ax, v / ay), r_shaped = std::hypot(u / sx, v / sy);
        if (r_lobe > 1 + eps) {
            um[i] = u < 0 ? sll_alt : sll;
        } else {
            um[i] = 1.0;
            if (r_shaped <= 1 + eps) lm[i] = ripple;
        }
    }
    return PatternMask(std::move(lm), std::move(um));
}

void write_pattern_csv(const std::filesystem::path &path, const PatternSamples &p, const AngularGrid &grid) {
    require_same_size(p.size(), grid.size(), "write_pattern_csv");
    auto out = detail::open_output(path);
    out << "theta_deg,phi_deg,power_db,power_linear\n";
    const double pmax = p.power.size() ? p.power.maxCoeff() : 0.0;
    for (std::size_t m = 0; m < grid.size(); ++m) {
        double lin = pmax > 0 ? p.power[static_cast<Eigen::Index>(m)] / pmax : 0.0;
        double db = lin > 0 ? std::max(kReportFloorDb, 10.0 * std::log10(lin)) : kReportFloorDb;
        out << detail::fmt(rad2deg(grid[m].theta)) << ',' << detail::fmt(rad2deg(grid[m].phi)) << ','
            << detail::fmt(db) << ',' << detail::fmt(lin) << '\n';
    }
}

void write_mask_csv(const std::filesystem::path &path, const PatternMask &mask, const AngularGrid &grid) {
    require_same_size(mask.size(), grid.size(), "write_mask_csv");
    auto out = detail::open_output(path);
    out << "theta_deg,phi_deg,lm_linear,um_linear\n";
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const auto i = static_cast<Eigen::Index>(m);
        out << detail::fmt(rad2deg(grid[m].theta)) << ',' << detail::fmt(rad2deg(grid[m].phi)) << ','
            << detail::fmt(mask.lower[i]) << ',' << detail::fmt(mask.upper[i]) << '\n';
    }
}

PatternMask load_mask_csv(const std::filesystem::path &path, const AngularGrid &grid) {
    auto table = detail::read_csv(path);
    int ct = table.column("theta_deg"), cp = table.column("phi_deg");
    int cl = table.column("lm_linear"), cu = table.column("um_linear");
    if (ct < 0 || cp < 0 || cl < 0 || cu < 0)
        throw InputError(path.string() + ": expected header theta_deg,phi_deg,lm_linear,um_linear");
    if (table.rows.size() != grid.size())
        throw InputError(path.string() + ": " + std::to_string(table.rows.size()) + " rows for a grid of " +
                         std::to_string(grid.size()) + " samples");
    const auto m = static_cast<Eigen::Index>(grid.size());
    Eigen::VectorXd lm(m), um(m);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto &row = table.rows[k];
        if (std::abs(row[static_cast<std::size_t>(ct)] - rad2deg(grid[k].theta)) > 1e-6 ||
            std::abs(row[static_cast<std::size_t>(cp)] - rad2deg(grid[k].phi)) > 1e-6)
            throw InputError(path.string() + ": row " + std::to_string(k + 1) + " does not match the grid angles");
        lm[static_cast<Eigen::Index>(k)] = row[static_cast<std::size_t>(cl)];
        um[static_cast<Eigen::Index>(k)] = row[static_cast<std::size_t>(cu)];
    }
    try {
        return PatternMask(std::move(lm), std::move(um));
    } catch (const InvalidArgument &e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

} // namespace nrcas
