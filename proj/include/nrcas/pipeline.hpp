#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nrcas/config.hpp"
#include "nrcas/geometry.hpp"
#include "nrcas/operator.hpp"
#include "nrcas/optimizer.hpp"
#include "nrcas/pattern.hpp"
#include "nrcas/reference.hpp"

namespace nrcas {

// Everything derived from a config before any synthesis happens.
struct Scenario {
    ScenarioConfig config;
    ArrayGeometry geometry;
    AngularGrid grid;
    AngularGrid q_grid;
    PatternMask mask;
    std::shared_ptr<const RadiationOperator> op;
    TruncationReport rank;
};

Scenario prepare_scenario(const ScenarioConfig &cfg, OperatorCache *cache = nullptr);

ArrayGeometry build_geometry(const GeometrySpec &spec);
AngularGrid build_grid(const GridSpec &spec, const ArrayGeometry &geom);

struct Metrics {
    double mask_matching = 0.0;
    std::optional<double> xi; // against the supplied reference
    double drr = 0.0;
    double q = 0.0;
    double constraint_cost = 0.0;
};

Metrics evaluate_metrics(const Scenario &sc, const ExcitationVector &w, const ExcitationVector *reference = nullptr);

struct ReferenceOutcome {
    ExcitationVector weights;
    double mask_matching = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
    std::string source;
};

// Synthesized references are rescaled to unit peak amplitude; file references are used as given.
ReferenceOutcome resolve_reference(const Scenario &sc);

struct SynthesisResult {
    ReferenceOutcome reference;
    ExcitationVector w_ra;
    ExcitationVector w_nr;
    NrResult nr;
    Metrics ref_metrics, ra_metrics, final_metrics;
    double xi_final_vs_ra = 0.0;
    double leakage_field = 0.0; // ||AF(w) - AF(w_ra)||_2 on the synthesis grid
    double leakage_limit = 0.0; // sigma_{S+1} ||gamma||_2
    bool target_reached = false;
    std::optional<ExcitationVector> zeroed; // hard-zeroing post-step result
    std::optional<Metrics> zeroed_metrics;
    nlohmann::json summary;
};

SynthesisResult synthesize(const Scenario &sc);

// CLI commands: each writes its artifacts to cfg.output.directory and
// returns the JSON report that was written.
nlohmann::json cmd_decompose(const ScenarioConfig &cfg);
nlohmann::json cmd_reference(const ScenarioConfig &cfg);
nlohmann::json cmd_synthesize(const ScenarioConfig &cfg, bool *target_reached = nullptr);
nlohmann::json cmd_evaluate(const ScenarioConfig &cfg, const std::filesystem::path &excitations,
                            const std::optional<std::filesystem::path> &reference);

std::vector<double> effective_phi_cuts(const Scenario &sc);

} // namespace nrcas
