#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nrcas/excitation.hpp"
#include "nrcas/geometry.hpp"
#include "nrcas/operator.hpp"
#include "nrcas/pattern.hpp"

namespace nrcas {

struct ProjectionSettings {
    std::size_t max_iters = 2000;
    std::uint64_t seed = 1;
    std::size_t restarts = 0;
    double tolerance = 1e-6;
    // Truncation threshold of the pseudoinverse used in the realizability step.
    double chi = 1e-3;
    // The fitter targets a mask tightened by these margins so that the result
    // keeps some slack against the true mask.
    double lobe_margin_db = 0.0;
    double sidelobe_margin_db = 0.0;

    bool operator==(const ProjectionSettings &) const = default;
};

struct FileSource {
    std::filesystem::path path;
    bool operator==(const FileSource &) const = default;
};

struct ReferenceResult {
    ExcitationVector weights;
    double mask_matching = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t attempts = 0;
    std::vector<double> history; // best-so-far mask matching per iteration
};

ReferenceResult synthesize_reference(const RadiationOperator &op, const PatternMask &mask,
                                     const AngularGrid &grid, const ProjectionSettings &settings);

struct LoadedReference {
    ExcitationVector weights;
    double mask_matching = 0.0;
    std::optional<std::string> warning;
};

// Loads excitations and checks them against the geometry; a mask violation is
// reported as a warning (also logged to stderr).
LoadedReference load_reference(const std::filesystem::path &path, const ArrayGeometry &geom,
                               const PatternMask &mask, const AngularGrid &grid);

} // namespace nrcas
