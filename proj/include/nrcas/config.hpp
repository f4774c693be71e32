#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nrcas/geometry.hpp"
#include "nrcas/optimizer.hpp"
#include "nrcas/pattern.hpp"
#include "nrcas/reference.hpp"

namespace nrcas {

// Minimal TOML subset: [section] headers, key = value, strings, booleans,
// integers, floats and (possibly multi-line) arrays of those, # comments.
struct TomlValue;
using TomlArray = std::vector<TomlValue>;
struct TomlValue {
    std::variant<bool, std::int64_t, double, std::string, TomlArray> data;
    bool operator==(const TomlValue &) const = default;
};
using TomlTable = std::map<std::string, std::map<std::string, TomlValue>>;

TomlTable parse_toml(const std::string &text);

struct GeometrySpec {
    std::string kind = "linear"; // linear | planar | file
    int n = 1;
    int nx = 1;
    int ny = 1;
    double spacing = 0.5;
    Axis axis = Axis::y;
    std::string path;
    bool operator==(const GeometrySpec &) const = default;
};

struct GridSpec {
    std::size_t oversampling = 8;
    std::size_t samples = 0; // 1-D override of M
    std::size_t n_theta = 0; // planar override
    std::size_t n_phi = 0;
    bool operator==(const GridSpec &) const = default;
};

struct ReferenceConfig {
    std::string source = "projection"; // projection | file
    std::string path;
    ProjectionSettings projection;
    std::optional<double> chi; // defaults to the operator chi
    bool operator==(const ReferenceConfig &) const = default;
};

struct OutputConfig {
    std::string directory = "out";
    std::vector<double> phi_cuts; // empty: array axis (1-D) or {0, 90}
    double cut_step_deg = 0.5;
    double hard_zero_threshold = 0.0; // forbidden-region post-step, 0 = off
    bool operator==(const OutputConfig &) const = default;
};

struct ScenarioConfig {
    std::string name = "scenario";
    GeometrySpec geometry;
    GridSpec grid;
    MaskDescriptor mask;
    ReferenceConfig reference;
    double chi = 1e-3;
    ConstraintSpec constraint = DrrConstraint{};
    PsoConfig pso;
    OutputConfig output;

    bool operator==(const ScenarioConfig &) const = default;
};

// Relative paths inside the config are resolved against `base_dir`.
ScenarioConfig parse_config(const std::string &text, const std::filesystem::path &base_dir = {});
ScenarioConfig load_config(const std::filesystem::path &path);
std::string serialize_config(const ScenarioConfig &cfg);

} // namespace nrcas
