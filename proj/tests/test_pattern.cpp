#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "nrcas/errors.hpp"
#include "nrcas/pattern.hpp"

using namespace nrcas;
using cd = std::complex<double>;
constexpr double pi = std::numbers::pi;

namespace {

Eigen::VectorXcd random_weights(std::size_t n, std::mt19937_64 &rng) {
    std::normal_distribution<double> nd;
    Eigen::VectorXcd w(static_cast<Eigen::Index>(n));
    for (auto &z : w) z = {nd(rng), nd(rng)};
    return w;
}

// Independent evaluation with explicit cos/sin.
Eigen::VectorXd power_oracle(const ArrayGeometry &g, const Eigen::VectorXcd &w, const AngularGrid &grid) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t m = 0; m < grid.size(); ++m) {
        double re = 0, im = 0;
        for (std::size_t n = 0; n < g.size(); ++n) {
            double arg = 2 * pi *
                         (g[n].x * std::sin(grid[m].theta) * std::cos(grid[m].phi) +
                          g[n].y * std::sin(grid[m].theta) * std::sin(grid[m].phi));
            double a = w[static_cast<Eigen::Index>(n)].real(), b = w[static_cast<Eigen::Index>(n)].imag();
            re += a * std::cos(arg) - b * std::sin(arg);
            im += a * std::sin(arg) + b * std::cos(arg);
        }
        p[static_cast<Eigen::Index>(m)] = re * re + im * im;
    }
    return p;
}

} // namespace

TEST(Grid, LinearUSpansVisibleRange) {
    auto g = AngularGrid::linear_u(256, pi / 2);
    EXPECT_TRUE(g.one_dimensional());
    EXPECT_NEAR(std::sin(g[0].theta), -1.0, 1e-15);
    EXPECT_NEAR(std::sin(g[255].theta), 1.0, 1e-15);
    EXPECT_NEAR(g.total_weight(), 2 * pi, 1e-12);
}

TEST(Grid, DefaultSizes) {
    auto lin = default_synthesis_grid(make_linear(32, 0.3, Axis::y));
    EXPECT_EQ(lin.size(), 256u);
    EXPECT_TRUE(lin.one_dimensional());
    EXPECT_NEAR(lin[0].phi, pi / 2, 1e-15);
    auto planar = default_synthesis_grid(make_planar_grid(16, 16, 0.45));
    EXPECT_EQ(planar.size(), 2048u);
    EXPECT_FALSE(planar.one_dimensional());
    for (const auto &s : planar.samples()) {
        EXPECT_GT(s.theta, 0.0);
        EXPECT_LE(s.theta, pi / 2 + 1e-15);
        EXPECT_GE(s.phi, 0.0);
        EXPECT_LT(s.phi, 2 * pi);
    }
    for (int n : {2, 3, 5, 7}) {
        auto g = ArrayGeometry({{0, 0}, {0.3, 0.4}, {0.9, 0.1}, {1.2, 0.8}, {0.5, 1.5}, {2, 2}, {1, 2.5}});
        EXPECT_GE(default_synthesis_grid(g, 1).size(), g.size()) << n;
    }
}

TEST(Grid, FullSphereQuadrature) {
    for (const auto &g : {default_q_grid(make_linear(32, 0.3, Axis::y)), default_q_grid(make_planar_grid(8, 8, 0.45)),
                          default_q_grid(make_planar_grid(16, 16, 0.45))})
        EXPECT_NEAR(g.total_weight() / (4 * pi), 1.0, 1e-3);
}

TEST(ArrayFactor, TrivialCases) {
    auto single = make_linear(1, 0.5, Axis::x);
    auto grid = AngularGrid::hemisphere(6, 12);
    auto p = array_factor(single, ExcitationVector(Eigen::VectorXcd::Ones(1)), grid);
    for (std::size_t m = 0; m < grid.size(); ++m) EXPECT_NEAR(std::abs(p.values[static_cast<Eigen::Index>(m)] - cd(1)), 0, 1e-15);

    auto pair = make_linear(2, 0.5, Axis::x);
    AngularGrid broadside({{0.0, 0.0, 1.0}}, false);
    auto q = array_factor(pair, ExcitationVector(Eigen::VectorXcd::Ones(2)), broadside);
    EXPECT_NEAR(std::abs(q.values[0] - cd(2)), 0, 1e-15);
    EXPECT_THROW(array_factor(pair, ExcitationVector(Eigen::VectorXcd::Ones(3)), broadside), InvalidArgument);
}

TEST(ArrayFactor, MatchesDoubleLoopOracle) {
    std::mt19937_64 rng(11);
    for (const auto &g : {make_linear(32, 0.3, Axis::y), make_planar_grid(5, 4, 0.45)}) {
        auto grid = default_synthesis_grid(g);
        auto w = random_weights(g.size(), rng);
        auto p = array_factor(g, ExcitationVector(w), grid);
        auto oracle = power_oracle(g, w, grid);
        EXPECT_EQ(p.power, p.values.cwiseAbs2());
        EXPECT_LT((p.power - oracle).cwiseAbs().maxCoeff() / oracle.maxCoeff(), 1e-12);
    }
}

TEST(ArrayFactor, Linearity) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    auto g = make_planar_grid(4, 3, 0.45);
    auto grid = default_synthesis_grid(g);
    for (int trial = 0; trial < 20; ++trial) {
        auto w1 = random_weights(g.size(), rng), w2 = random_weights(g.size(), rng);
        cd a{nd(rng), nd(rng)}, b{nd(rng), nd(rng)};
        auto lhs = array_factor(g, ExcitationVector(a * w1 + b * w2), grid).values;
        Eigen::VectorXcd rhs = a * array_factor(g, ExcitationVector(w1), grid).values + b * array_factor(g, ExcitationVector(w2), grid).values;
        EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12 * (1 + rhs.cwiseAbs().maxCoeff()));
    }
}

TEST(MaskMatching, InsideIsZero) {
    auto grid = AngularGrid::linear_u(50, 0);
    Eigen::VectorXd lm = Eigen::VectorXd::Constant(50, 0.2), um = Eigen::VectorXd::Constant(50, 1.0);
    PatternMask mask(lm, um);
    Eigen::VectorXcd f = Eigen::VectorXcd::Constant(50, cd(std::sqrt(0.6), 0));
    f[7] = 1.0; // peak sample sits on UM
    EXPECT_EQ(mask_matching(PatternSamples::from_field(f), mask, grid), 0.0);
}

TEST(MaskMatching, SingleViolation) {
    auto grid = AngularGrid::linear_u(50, 0);
    Eigen::VectorXd lm = Eigen::VectorXd::Zero(50), um = Eigen::VectorXd::Constant(50, 0.5);
    um[0] = 1.0;
    Eigen::VectorXcd f = Eigen::VectorXcd::Constant(50, cd(std::sqrt(0.25), 0));
    f[0] = 1.0;
    f[10] = std::sqrt(0.6);
    const double got = mask_matching(PatternSamples::from_field(f), PatternMask(lm, um), grid);
    EXPECT_NEAR(got, 0.1 * grid[10].weight / (2 * pi), 1e-15);
}

TEST(MaskMatching, NonNegativeAndZeroIffInside) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ud(0, 1);
    auto grid = AngularGrid::linear_u(64, 0);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd lm(64), um(64);
        Eigen::VectorXcd f(64);
        bool inside = true;
        for (int m = 0; m < 64; ++m) {
            double a = ud(rng), b = ud(rng);
            lm[m] = std::min(a, b) * 0.5;
            um[m] = std::max(a, b);
            f[m] = std::sqrt(ud(rng));
        }
        f[0] = 1.0;
        um[0] = 1.0;
        auto p = PatternSamples::from_field(f);
        Eigen::VectorXd pn = p.power / p.power.maxCoeff();
        for (int m = 0; m < 64; ++m) inside &= lm[m] <= pn[m] && pn[m] <= um[m];
        double phi = mask_matching(p, PatternMask(lm, um), grid);
        EXPECT_GE(phi, 0.0);
        EXPECT_EQ(phi == 0.0, inside);
    }
}

TEST(PatternTolerance, Basics) {
    auto grid = AngularGrid::linear_u(40, 0);
    std::mt19937_64 rng(9);
    Eigen::VectorXcd f = random_weights(40, rng);
    auto p = PatternSamples::from_field(f);
    EXPECT_EQ(pattern_tolerance(p, p, grid), 0.0);
    auto p2 = PatternSamples::from_field(std::sqrt(2.0) * f);
    EXPECT_NEAR(pattern_tolerance(p2, p, grid), 1.0, 1e-12);
    auto g = PatternSamples::from_field(random_weights(40, rng));
    auto gs = PatternSamples::from_field(3.0 * g.values);
    auto ps = PatternSamples::from_field(3.0 * p.values);
    EXPECT_NEAR(pattern_tolerance(gs, ps, grid), pattern_tolerance(g, p, grid), 1e-12);
    auto zero = PatternSamples::from_field(Eigen::VectorXcd::Zero(40));
    EXPECT_THROW(pattern_tolerance(p, zero, grid), NumericalError);
}

TEST(QFactor, IsotropicElement) {
    auto g = make_linear(1, 0.5, Axis::x);
    auto q = AngularGrid::full_sphere(180, 360);
    ExcitationVector w(Eigen::VectorXcd::Ones(1));
    EXPECT_NEAR(q_factor(w, array_factor(g, w, q), q) * 4 * pi, 1.0, 1e-3);
}

TEST(QFactor, InvariantToPhaseAndScale) {
    std::mt19937_64 rng(1);
    auto g = make_linear(8, 0.3, Axis::y);
    auto grid = default_q_grid(g);
    Eigen::VectorXcd w = random_weights(8, rng);
    const double q0 = q_factor(ExcitationVector(w), array_factor(g, ExcitationVector(w), grid), grid);
    Eigen::VectorXcd w2 = cd(-1.7, 2.3) * w;
    const double q1 = q_factor(ExcitationVector(w2), array_factor(g, ExcitationVector(w2), grid), grid);
    EXPECT_NEAR(q1 / q0, 1.0, 1e-12);
    EXPECT_THROW(q_factor(ExcitationVector(w), PatternSamples::from_field(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid.size()))), grid),
                 NumericalError);
}

TEST(QFactor, UniformHalfWaveArrayMatchesClosedForm) {
    // Broadside uniform array with d = lambda/2: radiated integral is 4 pi N for unit weights.
    auto g = make_linear(10, 0.5, Axis::x);
    auto grid = default_q_grid(g);
    ExcitationVector w(Eigen::VectorXcd::Ones(10));
    EXPECT_NEAR(q_factor(w, array_factor(g, w, grid), grid), 10.0 / (4 * pi * 10), 1e-6);
}

TEST(Mask, CosecantShape) {
    MaskDescriptor d;
    d.kind = MaskKind::cosecant_squared;
    d.sll_db = -20;
    d.rpe_db = 1.0;
    d.fnbw_deg = 68;
    d.transition_deg = 14;
    d.lobe_start_deg = -10;
    d.csc_start_deg = 10;
    auto grid = AngularGrid::linear_u(256, pi / 2);
    auto mask = build_mask(d, grid);
    EXPECT_NEAR(mask.upper.maxCoeff(), 1.0, 1e-15);
    const double ripple = std::pow(10.0, -0.1);
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const auto i = static_cast<Eigen::Index>(m);
        const double th = grid[m].theta * 180 / pi;
        EXPECT_LE(mask.lower[i], mask.upper[i]);
        if (th < -10 - 1e-9 || th > 58 + 1e-9) {
            EXPECT_NEAR(mask.upper[i], 0.01, 1e-15);
            EXPECT_EQ(mask.lower[i], 0.0);
        } else if (th >= 4 && th <= 44) {
            double shape = th <= 10 ? 1.0 : std::pow(std::sin(10 * pi / 180) / std::sin(th * pi / 180), 2);
            EXPECT_NEAR(mask.upper[i], shape, 1e-12);
            EXPECT_NEAR(mask.lower[i], shape * ripple, 1e-12);
        } else if (th > -10 + 1e-9 && th < 4 - 1e-9) {
            EXPECT_EQ(mask.lower[i], 0.0);
            EXPECT_EQ(mask.upper[i], 1.0);
        }
    }
}

TEST(Mask, FlatTopZeroRippleCollapses) {
    MaskDescriptor d;
    d.kind = MaskKind::flat_top;
    d.rpe_db = 0;
    d.fnbw_deg = 50;
    d.transition_deg = 10;
    auto grid = AngularGrid::hemisphere(20, 40);
    auto mask = build_mask(d, grid);
    int shaped = 0;
    for (Eigen::Index m = 0; m < mask.lower.size(); ++m)
        if (mask.lower[m] > 0) {
            EXPECT_EQ(mask.lower[m], mask.upper[m]);
            ++shaped;
        }
    EXPECT_GT(shaped, 0);
}

TEST(Mask, PlanarAsymmetricSidelobes) {
    MaskDescriptor d;
    d.kind = MaskKind::flat_top;
    d.fnbw_deg = 50;
    d.sll_db = -20;
    d.sll_alt_db = -25;
    d.rpe_db = 0.5;
    d.transition_deg = 12;
    auto grid = AngularGrid::hemisphere(20, 40);
    auto mask = build_mask(d, grid);
    const double sx = std::sin(25 * pi / 180);
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const auto i = static_cast<Eigen::Index>(m);
        double u = std::sin(grid[m].theta) * std::cos(grid[m].phi), v = std::sin(grid[m].theta) * std::sin(grid[m].phi);
        if (std::hypot(u, v) > sx + 1e-9) EXPECT_NEAR(mask.upper[i], u < 0 ? std::pow(10, -2.5) : 0.01, 1e-15);
        else EXPECT_EQ(mask.upper[i], 1.0);
    }
}

TEST(Mask, RejectsBadDescriptors) {
    auto grid = AngularGrid::linear_u(64, 0);
    MaskDescriptor d;
    d.sll_db = 3;
    EXPECT_THROW(build_mask(d, grid), InvalidArgument);
    d = {};
    d.fnbw_deg = 190;
    EXPECT_THROW(build_mask(d, grid), InvalidArgument);
    d = {};
    d.rpe_db = -1;
    EXPECT_THROW(build_mask(d, grid), InvalidArgument);
    d = {};
    d.kind = MaskKind::cosecant_squared;
    EXPECT_THROW(build_mask(d, AngularGrid::hemisphere(4, 8)), InvalidArgument);
    d = {};
    d.fnbw_deg = 20;
    d.transition_deg = 10;
    EXPECT_THROW(build_mask(d, grid), InvalidArgument);
}

TEST(Mask, CsvRoundTrip) {
    auto dir = std::filesystem::temp_directory_path() / "nrcas_mask_test";
    auto grid = AngularGrid::hemisphere(6, 12);
    MaskDescriptor d;
    d.fnbw_deg = 60;
    auto mask = build_mask(d, grid);
    write_mask_csv(dir / "m.csv", mask, grid);
    auto back = load_mask_csv(dir / "m.csv", grid);
    EXPECT_LT((back.lower - mask.lower).cwiseAbs().maxCoeff(), 1e-11);
    EXPECT_LT((back.upper - mask.upper).cwiseAbs().maxCoeff(), 1e-11);
    EXPECT_THROW(load_mask_csv(dir / "m.csv", AngularGrid::hemisphere(5, 12)), InputError);
    std::filesystem::remove_all(dir);
}

TEST(PatternCsv, FloorOnlyInReport) {
    auto dir = std::filesystem::temp_directory_path() / "nrcas_pattern_test";
    auto grid = AngularGrid::linear_u(3, 0);
    Eigen::VectorXcd f(3);
    f << 1.0, 0.0, 0.5;
    write_pattern_csv(dir / "p.csv", PatternSamples::from_field(f), grid);
    std::ifstream in(dir / "p.csv");
    std::string header, l1, l2;
    std::getline(in, header);
    std::getline(in, l1);
    std::getline(in, l2);
    EXPECT_EQ(header, "theta_deg,phi_deg,power_db,power_linear");
    EXPECT_NE(l2.find("-120"), std::string::npos);
    std::filesystem::remove_all(dir);
}
