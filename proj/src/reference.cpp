#include "nrcas/reference.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>

#include "io_util.hpp"
#include "nrcas/errors.hpp"

namespace nrcas {

namespace {

struct Score {
    double mask = 0;     // against the true mask
    double margined = 0; // against the tightened mask
    bool operator<(const Score &o) const { return mask < o.mask || (mask == o.mask && margined < o.margined); }
};

PatternMask tightened(const PatternMask &mask, double lobe_margin_db, double sidelobe_margin_db) {
    const double up = std::pow(10.0, lobe_margin_db / 10.0);
    const double down = std::pow(10.0, -sidelobe_margin_db / 10.0);
    Eigen::VectorXd lm = mask.lower, um = mask.upper;
    for (Eigen::Index m = 0; m < lm.size(); ++m) {
        if (mask.lower[m] > 0) {
            lm[m] = std::min(mask.lower[m] * up, mask.upper[m]);
        } else {
            um[m] = mask.upper[m] * down;
        }
    }
    return PatternMask(std::move(lm), std::move(um));
}

// Smooth random phase over the visible region, polynomial in the direction cosines.
Eigen::VectorXd initial_phase(const AngularGrid &grid, std::mt19937_64 &rng) {
    double c[7];
    const double scale[7] = {1, 1, 5, 5, 10, 10, 10};
    for (int k = 0; k < 7; ++k) c[k] = scale[k] * detail::normal01(rng);
    Eigen::VectorXd ph(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const auto &s = grid[m];
        double u, v;
        if (grid.one_dimensional()) {
            u = std::sin(s.theta);
            v = 0;
        } else {
            u = std::sin(s.theta) * std::cos(s.phi);
            v = std::sin(s.theta) * std::sin(s.phi);
        }
        ph[static_cast<Eigen::Index>(m)] =
            c[0] * u * u * u + c[1] * v * v * v + c[2] * u * u + c[3] * v * v + c[4] * u + c[5] * v + c[6];
    }
    return ph;
}

} // namespace

ReferenceResult synthesize_reference(const RadiationOperator &op, const PatternMask &mask, const AngularGrid &grid,
                                     const ProjectionSettings &settings) {
    if (settings.max_iters < 1) throw InvalidArgument("reference fitter needs max_iters >= 1");
    if (!(settings.lobe_margin_db >= 0) || !(settings.sidelobe_margin_db >= 0))
        throw InvalidArgument("reference margins must be non-negative");
    if (mask.size() != op.rows() || grid.size() != op.rows())
        throw InvalidArgument("mask, grid and operator sample counts differ");

    const TruncationReport rank = select_rank(op, settings.chi);
    const auto s = static_cast<Eigen::Index>(rank.s);
    const Eigen::MatrixXcd us = op.left().leftCols(s);
    const Eigen::MatrixXcd vs = op.right().leftCols(s);
    const Eigen::VectorXd inv_sigma = op.sigma().head(s).cwiseInverse();
    auto pinv = [&](const Eigen::VectorXcd &f) -> Eigen::VectorXcd {
        return vs * (inv_sigma.asDiagonal() * (us.adjoint() * f));
    };

    const PatternMask target = tightened(mask, settings.lobe_margin_db, settings.sidelobe_margin_db);
    const bool has_shaped = (mask.lower.array() > 0).any();
    Eigen::VectorXd start_mag(target.lower.size());
    for (Eigen::Index m = 0; m < start_mag.size(); ++m) {
        const double mid = std::sqrt(0.5 * (target.lower[m] + target.upper[m]));
        start_mag[m] = has_shaped ? (mask.lower[m] > 0 ? mid : 0.0) : std::sqrt(target.upper[m]);
    }

    ReferenceResult result;
    Score best{INFINITY, INFINITY};
    Eigen::VectorXcd best_w = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(op.cols()));

    for (std::size_t attempt = 0; attempt <= settings.restarts && !result.converged; ++attempt) {
        std::seed_seq seq{static_cast<std::uint64_t>(settings.seed), static_cast<std::uint64_t>(attempt)};
        std::mt19937_64 rng(seq);
        ++result.attempts;
        const Eigen::VectorXd ph = initial_phase(grid, rng);
        Eigen::VectorXcd f0(start_mag.size());
        for (Eigen::Index m = 0; m < f0.size(); ++m) f0[m] = std::polar(start_mag[m], ph[m]);
        Eigen::VectorXcd w = pinv(f0);

        for (std::size_t it = 0; it < settings.max_iters; ++it) {
            ++result.iterations;
            const PatternSamples p = PatternSamples::from_field(op.apply(w));
            const Score sc{mask_matching(p, mask, grid), mask_matching(p, target, grid)};
            if (sc < best) {
                best = sc;
                best_w = w;
            }
            result.history.push_back(best.mask);
            if (best.mask <= settings.tolerance && best.margined <= settings.tolerance) {
                result.converged = true;
                break;
            }
            const double pmax = p.power.maxCoeff();
            if (!(pmax > 0)) break;
            Eigen::VectorXcd f(p.values.size());
            for (Eigen::Index m = 0; m < f.size(); ++m) {
                const double pn = std::clamp(p.power[m] / pmax, target.lower[m], target.upper[m]);
                f[m] = std::polar(std::sqrt(pn * pmax), std::arg(p.values[m]));
            }
            w = pinv(f);
        }
    }

    result.weights = ExcitationVector(best_w);
    result.mask_matching = best.mask;
    return result;
}

LoadedReference load_reference(const std::filesystem::path &path, const ArrayGeometry &geom, const PatternMask &mask,
                               const AngularGrid &grid) {
    LoadedReference out;
    out.weights = load_excitation_csv(path);
    if (out.weights.size() != geom.size())
        throw InputError(path.string() + ": " + std::to_string(out.weights.size()) + " excitations for " +
                         std::to_string(geom.size()) + " elements");
    out.mask_matching = mask_matching(array_factor(geom, out.weights, grid), mask, grid);
    if (out.mask_matching > 0) {
        out.warning = "reference pattern violates the mask (mask matching " + detail::fmt(out.mask_matching) + ")";
        std::cerr << "warning: " << path.string() << ": " << *out.warning << '\n';
    }
    return out;
}

} // namespace nrcas
