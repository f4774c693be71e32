#include "nrcas/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "io_util.hpp"
#include "nrcas/errors.hpp"

namespace nrcas {

void validate(const PsoConfig &cfg) {
    auto bad = [](const std::string &msg) { throw InvalidArgument("pso: " + msg); };
    if (cfg.swarm_size == 1) bad("swarm_size must be at least 2");
    if (cfg.max_iters < 1) bad("max_iters must be at least 1");
    if (!(cfg.search_bound >= 0) || !std::isfinite(cfg.search_bound)) bad("search_bound must be positive");
    if (!(cfg.search_bound_factor > 0) || !std::isfinite(cfg.search_bound_factor))
        bad("search_bound_factor must be positive");
    if (!(cfg.velocity_clamp > 0 && cfg.velocity_clamp <= 1)) bad("velocity_clamp must lie in (0, 1]");
    if (!std::isfinite(cfg.inertia) || !std::isfinite(cfg.cognitive) || !std::isfinite(cfg.social))
        bad("coefficients must be finite");
    if (std::isnan(cfg.target_cost)) bad("target_cost must be a number");
}

QuantizedConstraint QuantizedConstraint::from_bits(int bits) {
    if (bits < 1 || bits > 16) throw InvalidArgument("quantization bits must lie in [1, 16]");
    QuantizedConstraint q;
    const int count = 1 << bits;
    for (int k = 1; k <= count; ++k) q.levels.push_back(static_cast<double>(k) / count);
    return q;
}

double cost_drr(const ExcitationVector &w) {
    if (w.size() == 0) throw InvalidArgument("cost_drr: empty excitation");
    const Eigen::VectorXd a = w.amplitudes();
    return a.maxCoeff() / std::max(a.minCoeff(), kDrrGuard);
}

double cost_forbidden(const ExcitationVector &w, const ArrayGeometry &geom, const ApertureRegion &region) {
    if (w.size() != geom.size()) throw InvalidArgument("cost_forbidden: excitation length differs from geometry");
    double c = 0;
    for (auto idx : elements_in_region(geom, region)) c += w.amplitude(idx - 1);
    return c;
}

static void check_levels(const std::vector<double> &levels) {
    if (levels.empty()) throw InvalidArgument("quantized levels must not be empty");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] > 0) || !std::isfinite(levels[i])) throw InvalidArgument("quantized levels must be positive");
        if (i && !(levels[i] > levels[i - 1])) throw InvalidArgument("quantized levels must be strictly increasing");
    }
}

double cost_quantized(const ExcitationVector &w, const std::vector<double> &levels) {
    check_levels(levels);
    double c = 0;
    for (std::size_t n = 0; n < w.size(); ++n) {
        const double a = w.amplitude(n);
        // nearest level via binary search on the sorted list
        auto it = std::lower_bound(levels.begin(), levels.end(), a);
        double d = std::numeric_limits<double>::infinity();
        if (it != levels.end()) d = *it - a;
        if (it != levels.begin()) d = std::min(d, a - *(it - 1));
        c += d;
    }
    return c;
}

std::function<double(const ExcitationVector &)> make_cost(const ConstraintSpec &spec, const ArrayGeometry &geom) {
    if (std::holds_alternative<DrrConstraint>(spec)) return [](const ExcitationVector &w) { return cost_drr(w); };
    if (auto *f = std::get_if<ForbiddenConstraint>(&spec)) {
        auto idx = elements_in_region(geom, f->region);
        if (idx.empty()) throw InvalidArgument("forbidden region contains no elements");
        const std::size_t n = geom.size();
        return [idx, n](const ExcitationVector &w) {
            if (w.size() != n) throw InvalidArgument("cost_forbidden: excitation length differs from geometry");
            double c = 0;
            for (auto i : idx) c += w.amplitude(i - 1);
            return c;
        };
    }
    const auto levels = std::get<QuantizedConstraint>(spec).levels;
    check_levels(levels);
    return [levels](const ExcitationVector &w) { return cost_quantized(w, levels); };
}

NrResult optimize_nr(const RadiationOperator &op, const TruncationReport &rank, const ExcitationVector &w_ra,
                     const std::function<double(const ExcitationVector &)> &cost, const PsoConfig &cfg,
                     const CandidateObserver &observer) {
    validate(cfg);
    if (rank.s >= op.cols()) throw InvalidArgument("no NR degrees of freedom (S = N)");
    if (w_ra.size() != op.cols()) throw InvalidArgument("RA excitation length differs from operator");

    const std::size_t dim = 2 * rank.null_dimension();
    const std::size_t swarm = cfg.swarm_size ? cfg.swarm_size : std::max<std::size_t>(2, rank.null_dimension());
    double bound = cfg.search_bound;
    if (bound == 0) {
        const double amax = w_ra.size() ? w_ra.amplitudes().maxCoeff() : 0.0;
        bound = cfg.search_bound_factor * (amax > 0 ? amax : 1.0);
    }
    const double vmax = cfg.velocity_clamp * bound;

    NrResult res;
    res.search_bound = bound;
    res.swarm_size = swarm;

    auto evaluate = [&](const std::vector<double> &x) {
        const NrCoefficients g = NrCoefficients::from_real(x.data(), dim);
        const ExcitationVector w = assemble(w_ra, nr_excitations(op, rank, g));
        if (observer) observer(g, w);
        ++res.evaluations;
        const double c = cost(w);
        return std::isnan(c) ? std::numeric_limits<double>::infinity() : c;
    };

    std::mt19937_64 rng(cfg.seed);
    std::vector<std::vector<double>> x(swarm, std::vector<double>(dim, 0.0));
    std::vector<std::vector<double>> v(swarm, std::vector<double>(dim, 0.0));
    // Particle 0 stays at gamma = 0; the others are drawn in particle-major order.
    for (std::size_t t = 1; t < swarm; ++t)
        for (std::size_t d = 0; d < dim; ++d) x[t][d] = bound * (2.0 * detail::uniform01(rng) - 1.0);

    std::vector<double> fit(swarm);
    for (std::size_t t = 0; t < swarm; ++t) fit[t] = evaluate(x[t]);
    auto pbest = x;
    auto pfit = fit;
    std::size_t g = static_cast<std::size_t>(std::min_element(pfit.begin(), pfit.end()) - pfit.begin());
    std::vector<double> gbest = pbest[g];
    double gfit = pfit[g];

    std::vector<std::size_t> snaps = cfg.snapshot_iterations;
    std::sort(snaps.begin(), snaps.end());
    auto record = [&](std::size_t i) {
        res.trace.records.push_back({i, gfit});
        if (std::binary_search(snaps.begin(), snaps.end(), i))
            res.trace.snapshots.emplace_back(i, NrCoefficients::from_real(gbest.data(), dim));
        if (!res.trace.converged_at && gfit <= cfg.target_cost) res.trace.converged_at = i;
    };
    record(0);

    for (std::size_t i = 1; i <= cfg.max_iters && !res.trace.converged_at; ++i) {
        for (std::size_t t = 0; t < swarm; ++t) {
            for (std::size_t d = 0; d < dim; ++d) {
                const double r1 = detail::uniform01(rng);
                const double r2 = detail::uniform01(rng);
                double vel = cfg.inertia * v[t][d] + cfg.cognitive * r1 * (pbest[t][d] - x[t][d]) +
                             cfg.social * r2 * (gbest[d] - x[t][d]);
                vel = std::clamp(vel, -vmax, vmax);
                double pos = x[t][d] + vel;
                if (pos > bound) {
                    pos = 2.0 * bound - pos;
                    vel = -vel;
                } else if (pos < -bound) {
                    pos = -2.0 * bound - pos;
                    vel = -vel;
                }
                x[t][d] = std::clamp(pos, -bound, bound);
                v[t][d] = vel;
            }
        }
        for (std::size_t t = 0; t < swarm; ++t) fit[t] = evaluate(x[t]);
        // synchronous update after all evaluations of the iteration
        for (std::size_t t = 0; t < swarm; ++t) {
            if (fit[t] < pfit[t]) {
                pfit[t] = fit[t];
                pbest[t] = x[t];
            }
        }
        g = static_cast<std::size_t>(std::min_element(pfit.begin(), pfit.end()) - pfit.begin());
        if (pfit[g] < gfit) {
            gfit = pfit[g];
            gbest = pbest[g];
        }
        record(i);
    }

    res.gamma = NrCoefficients::from_real(gbest.data(), dim);
    res.weights = assemble(w_ra, nr_excitations(op, rank, res.gamma));
    return res;
}

NrResult optimize_nr(const RadiationOperator &op, const TruncationReport &rank, const ExcitationVector &w_ra,
                     const ConstraintSpec &constraint, const ArrayGeometry &geom, const PsoConfig &cfg) {
    if (geom.size() != op.cols()) throw InvalidArgument("geometry does not match operator");
    return optimize_nr(op, rank, w_ra, make_cost(constraint, geom), cfg);
}

void write_trace_csv(const std::filesystem::path &path, const ConvergenceTrace &trace) {
    auto out = detail::open_output(path);
    out << "iteration,best_cost\n";
    for (const auto &r : trace.records) out << r.iteration << ',' << detail::fmt(r.best_cost) << '\n';
}

void write_gamma_csv(const std::filesystem::path &path, const NrCoefficients &gamma) {
    auto out = detail::open_output(path);
    out << "q,gamma_re,gamma_im,gamma_mag,gamma_phase_deg\n";
    for (Eigen::Index q = 0; q < gamma.gamma.size(); ++q) {
        const auto z = gamma.gamma[q];
        out << q + 1 << ',' << detail::fmt(z.real()) << ',' << detail::fmt(z.imag()) << ',' << detail::fmt(std::abs(z))
            << ',' << detail::fmt(principal_phase(z) * 180.0 / std::numbers::pi) << '\n';
    }
}

} // namespace nrcas
