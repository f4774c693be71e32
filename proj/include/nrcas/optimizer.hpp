#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "nrcas/excitation.hpp"
#include "nrcas/geometry.hpp"
#include "nrcas/operator.hpp"

namespace nrcas {

struct PsoConfig {
    std::size_t swarm_size = 0; // 0: N - S
    double inertia = 0.4;
    double cognitive = 2.0;
    double social = 2.0;
    std::size_t max_iters = 500;
    double target_cost = 0.0;
    std::uint64_t seed = 1;
    double search_bound = 0.0;        // 0: search_bound_factor * max alpha^RA
    double search_bound_factor = 2.0;
    double velocity_clamp = 0.5;      // fraction of the search bound
    std::vector<std::size_t> snapshot_iterations;

    bool operator==(const PsoConfig &) const = default;
};

// Throws InvalidArgument; swarm_size 0 and search_bound 0 are accepted as "derive".
void validate(const PsoConfig &cfg);

inline constexpr double kDrrGuard = 1e-12;

struct DrrConstraint {
    bool operator==(const DrrConstraint &) const = default;
};

struct ForbiddenConstraint {
    ApertureRegion region;
    bool operator==(const ForbiddenConstraint &) const = default;
};

struct QuantizedConstraint {
    std::vector<double> levels;
    static QuantizedConstraint from_bits(int bits); // k / 2^B, k = 1..2^B
    bool operator==(const QuantizedConstraint &) const = default;
};

using ConstraintSpec = std::variant<DrrConstraint, ForbiddenConstraint, QuantizedConstraint>;

double cost_drr(const ExcitationVector &w);
double cost_forbidden(const ExcitationVector &w, const ArrayGeometry &geom, const ApertureRegion &region);
double cost_quantized(const ExcitationVector &w, const std::vector<double> &levels);

// Cost function bound to a geometry; validates the constraint once.
std::function<double(const ExcitationVector &)> make_cost(const ConstraintSpec &spec, const ArrayGeometry &geom);

struct TraceRecord {
    std::size_t iteration = 0;
    double best_cost = 0.0;
};

struct ConvergenceTrace {
    std::vector<TraceRecord> records;
    std::vector<std::pair<std::size_t, NrCoefficients>> snapshots;
    std::optional<std::size_t> converged_at;
};

struct NrResult {
    NrCoefficients gamma;
    ExcitationVector weights;
    ConvergenceTrace trace;
    double search_bound = 0.0;
    std::size_t swarm_size = 0;
    std::size_t evaluations = 0;
};

using CandidateObserver = std::function<void(const NrCoefficients &, const ExcitationVector &)>;

// Global-best synchronous PSO over the interleaved real parameters of gamma.
NrResult optimize_nr(const RadiationOperator &op, const TruncationReport &rank, const ExcitationVector &w_ra,
                     const std::function<double(const ExcitationVector &)> &cost, const PsoConfig &cfg,
                     const CandidateObserver &observer = {});

NrResult optimize_nr(const RadiationOperator &op, const TruncationReport &rank, const ExcitationVector &w_ra,
                     const ConstraintSpec &constraint, const ArrayGeometry &geom, const PsoConfig &cfg);

// iteration,best_cost
void write_trace_csv(const std::filesystem::path &path, const ConvergenceTrace &trace);

// q,gamma_re,gamma_im,gamma_mag,gamma_phase_deg
void write_gamma_csv(const std::filesystem::path &path, const NrCoefficients &gamma);

} // namespace nrcas
