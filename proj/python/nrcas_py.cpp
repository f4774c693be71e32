#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "nrcas/config.hpp"
#include "nrcas/errors.hpp"
#include "nrcas/geometry.hpp"
#include "nrcas/operator.hpp"
#include "nrcas/optimizer.hpp"
#include "nrcas/pattern.hpp"
#include "nrcas/pipeline.hpp"
#include "nrcas/reference.hpp"

namespace py = pybind11;
using namespace nrcas;

namespace {

py::object to_python(const nlohmann::json &j) { return py::module_::import("json").attr("loads")(j.dump()); }

std::vector<std::pair<double, double>> positions(const ArrayGeometry &g) {
    std::vector<std::pair<double, double>> out;
    for (const auto &p : g.positions()) out.emplace_back(p.x, p.y);
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Phased-array synthesis with minimum-norm and non-radiating excitations";

    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<InputError>(m, "InputError", PyExc_OSError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::enum_<Axis>(m, "Axis").value("x", Axis::x).value("y", Axis::y);

    py::class_<ArrayGeometry>(m, "ArrayGeometry")
        .def(py::init([](const std::vector<std::pair<double, double>> &pos) {
                 std::vector<Position> p;
                 for (auto [x, y] : pos) p.push_back({x, y});
                 return ArrayGeometry(std::move(p));
             }),
             py::arg("positions"))
        .def("__len__", &ArrayGeometry::size)
        .def_property_readonly("positions", &positions);

    m.def("make_linear", &make_linear, py::arg("n"), py::arg("spacing"), py::arg("axis") = Axis::y);
    m.def("make_planar_grid", &make_planar_grid, py::arg("nx"), py::arg("ny"), py::arg("spacing"));

    py::class_<ApertureRegion>(m, "ApertureRegion")
        .def_static("rectangle", &ApertureRegion::rectangle)
        .def_static("circle", &ApertureRegion::circle)
        .def_static("index_set", &ApertureRegion::index_set);
    m.def("elements_in_region", &elements_in_region);

    py::class_<AngularGrid>(m, "AngularGrid")
        .def_static("linear_u", &AngularGrid::linear_u)
        .def_static("hemisphere", &AngularGrid::hemisphere)
        .def_static("full_sphere", &AngularGrid::full_sphere)
        .def_static("full_sphere_linear", &AngularGrid::full_sphere_linear)
        .def("__len__", &AngularGrid::size)
        .def_property_readonly("one_dimensional", &AngularGrid::one_dimensional)
        .def_property_readonly("total_weight", &AngularGrid::total_weight)
        .def_property_readonly("theta", [](const AngularGrid &g) {
            std::vector<double> v;
            for (const auto &s : g.samples()) v.push_back(s.theta);
            return v;
        })
        .def_property_readonly("phi", [](const AngularGrid &g) {
            std::vector<double> v;
            for (const auto &s : g.samples()) v.push_back(s.phi);
            return v;
        })
        .def_property_readonly("weights", [](const AngularGrid &g) {
            std::vector<double> v;
            for (const auto &s : g.samples()) v.push_back(s.weight);
            return v;
        });
    m.def("default_synthesis_grid", &default_synthesis_grid, py::arg("geom"), py::arg("oversampling") = 8);
    m.def("default_q_grid", &default_q_grid);

    py::class_<PatternSamples>(m, "PatternSamples")
        .def(py::init(&PatternSamples::from_field))
        .def_readonly("values", &PatternSamples::values)
        .def_readonly("power", &PatternSamples::power);

    py::class_<PatternMask>(m, "PatternMask")
        .def(py::init<Eigen::VectorXd, Eigen::VectorXd>(), py::arg("lower"), py::arg("upper"))
        .def_readonly("lower", &PatternMask::lower)
        .def_readonly("upper", &PatternMask::upper);

    py::enum_<MaskKind>(m, "MaskKind")
        .value("cosecant_squared", MaskKind::cosecant_squared)
        .value("flat_top", MaskKind::flat_top);

    py::class_<MaskDescriptor>(m, "MaskDescriptor")
        .def(py::init<>())
        .def_readwrite("kind", &MaskDescriptor::kind)
        .def_readwrite("sll_db", &MaskDescriptor::sll_db)
        .def_readwrite("rpe_db", &MaskDescriptor::rpe_db)
        .def_readwrite("fnbw_deg", &MaskDescriptor::fnbw_deg)
        .def_readwrite("fnbw_x_deg", &MaskDescriptor::fnbw_x_deg)
        .def_readwrite("fnbw_y_deg", &MaskDescriptor::fnbw_y_deg)
        .def_readwrite("transition_deg", &MaskDescriptor::transition_deg)
        .def_readwrite("lobe_start_deg", &MaskDescriptor::lobe_start_deg)
        .def_readwrite("csc_start_deg", &MaskDescriptor::csc_start_deg)
        .def_readwrite("sll_alt_db", &MaskDescriptor::sll_alt_db);
    m.def("build_mask", &build_mask);

    auto as_excitation = [](const Eigen::VectorXcd &w) { return ExcitationVector(w); };
    m.def("array_factor", [=](const ArrayGeometry &g, const Eigen::VectorXcd &w, const AngularGrid &grid) {
        return array_factor(g, as_excitation(w), grid);
    });
    m.def("mask_matching", &mask_matching);
    m.def("pattern_tolerance", &pattern_tolerance);
    m.def("q_factor", [=](const Eigen::VectorXcd &w, const PatternSamples &p, const AngularGrid &grid) {
        return q_factor(as_excitation(w), p, grid);
    });

    py::class_<RadiationOperator, std::shared_ptr<RadiationOperator>>(m, "RadiationOperator")
        .def_static("build", [](const ArrayGeometry &g, const AngularGrid &grid) {
            return std::make_shared<RadiationOperator>(RadiationOperator::build(g, grid));
        })
        .def_property_readonly("matrix", &RadiationOperator::matrix)
        .def_property_readonly("left", &RadiationOperator::left)
        .def_property_readonly("sigma", &RadiationOperator::sigma)
        .def_property_readonly("right", &RadiationOperator::right)
        .def("normalized_spectrum", &RadiationOperator::normalized_spectrum);

    py::class_<TruncationReport>(m, "TruncationReport")
        .def_readonly("chi", &TruncationReport::chi)
        .def_readonly("s", &TruncationReport::s)
        .def_readonly("spectrum", &TruncationReport::spectrum)
        .def_readonly("leakage_bound", &TruncationReport::leakage_bound);
    m.def("select_rank", &select_rank);

    m.def("minimum_norm_excitations", [](const RadiationOperator &op, const TruncationReport &r,
                                         const Eigen::VectorXcd &af_ref) {
        return minimum_norm_excitations(op, r, PatternSamples::from_field(af_ref)).weights();
    });
    m.def("nr_excitations", [](const RadiationOperator &op, const TruncationReport &r, const Eigen::VectorXcd &g) {
        return nr_excitations(op, r, NrCoefficients{g}).weights();
    });
    m.def("assemble", [=](const Eigen::VectorXcd &a, const Eigen::VectorXcd &b) {
        return assemble(as_excitation(a), as_excitation(b)).weights();
    });

    m.def("cost_drr", [=](const Eigen::VectorXcd &w) { return cost_drr(as_excitation(w)); });
    m.def("cost_forbidden", [=](const Eigen::VectorXcd &w, const ArrayGeometry &g, const ApertureRegion &r) {
        return cost_forbidden(as_excitation(w), g, r);
    });
    m.def("cost_quantized", [=](const Eigen::VectorXcd &w, const std::vector<double> &levels) {
        return cost_quantized(as_excitation(w), levels);
    });

    py::class_<PsoConfig>(m, "PsoConfig")
        .def(py::init<>())
        .def_readwrite("swarm_size", &PsoConfig::swarm_size)
        .def_readwrite("inertia", &PsoConfig::inertia)
        .def_readwrite("cognitive", &PsoConfig::cognitive)
        .def_readwrite("social", &PsoConfig::social)
        .def_readwrite("max_iters", &PsoConfig::max_iters)
        .def_readwrite("target_cost", &PsoConfig::target_cost)
        .def_readwrite("seed", &PsoConfig::seed)
        .def_readwrite("search_bound", &PsoConfig::search_bound)
        .def_readwrite("search_bound_factor", &PsoConfig::search_bound_factor)
        .def_readwrite("velocity_clamp", &PsoConfig::velocity_clamp);

    // cost is any Python callable taking the complex excitation vector.
    m.def("optimize_nr", [](const RadiationOperator &op, const TruncationReport &r, const Eigen::VectorXcd &w_ra,
                            const std::function<double(const Eigen::VectorXcd &)> &cost, const PsoConfig &cfg) {
        auto res = optimize_nr(op, r, ExcitationVector(w_ra),
                               [&](const ExcitationVector &w) { return cost(w.weights()); }, cfg);
        std::vector<double> trace;
        for (const auto &rec : res.trace.records) trace.push_back(rec.best_cost);
        py::dict out;
        out["gamma"] = res.gamma.gamma;
        out["weights"] = res.weights.weights();
        out["trace"] = trace;
        out["converged_at"] = res.trace.converged_at ? py::cast(*res.trace.converged_at) : py::none();
        return out;
    });

    py::class_<ProjectionSettings>(m, "ProjectionSettings")
        .def(py::init<>())
        .def_readwrite("max_iters", &ProjectionSettings::max_iters)
        .def_readwrite("seed", &ProjectionSettings::seed)
        .def_readwrite("restarts", &ProjectionSettings::restarts)
        .def_readwrite("tolerance", &ProjectionSettings::tolerance)
        .def_readwrite("chi", &ProjectionSettings::chi)
        .def_readwrite("lobe_margin_db", &ProjectionSettings::lobe_margin_db)
        .def_readwrite("sidelobe_margin_db", &ProjectionSettings::sidelobe_margin_db);
    m.def("synthesize_reference", [](const RadiationOperator &op, const PatternMask &mask, const AngularGrid &grid,
                                     const ProjectionSettings &s) {
        auto r = synthesize_reference(op, mask, grid, s);
        py::dict out;
        out["weights"] = r.weights.weights();
        out["mask_matching"] = r.mask_matching;
        out["converged"] = r.converged;
        out["iterations"] = r.iterations;
        return out;
    });

    m.def("serialize_config", [](const std::string &text) { return serialize_config(parse_config(text)); },
          "Parse a scenario config and return its canonical text form");
    m.def("decompose", [](const std::filesystem::path &config, std::optional<std::string> output) {
        auto cfg = load_config(config);
        if (output) cfg.output.directory = *output;
        return to_python(cmd_decompose(cfg));
    }, py::arg("config"), py::arg("output") = py::none());
    m.def("synthesize", [](const std::filesystem::path &config, std::optional<std::string> output) {
        auto cfg = load_config(config);
        if (output) cfg.output.directory = *output;
        return to_python(cmd_synthesize(cfg));
    }, py::arg("config"), py::arg("output") = py::none());
    m.def("evaluate", [](const std::filesystem::path &config, const std::filesystem::path &excitations,
                         std::optional<std::filesystem::path> reference, std::optional<std::string> output) {
        auto cfg = load_config(config);
        if (output) cfg.output.directory = *output;
        return to_python(cmd_evaluate(cfg, excitations, reference));
    }, py::arg("config"), py::arg("excitations"), py::arg("reference") = py::none(), py::arg("output") = py::none());
}
