#include "nrcas/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "io_util.hpp"
#include "nrcas/errors.hpp"

namespace nrcas {

namespace {

using nlohmann::json;

json r12(double v) {
    if (!std::isfinite(v)) return nullptr;
    return detail::round12(v);
}

json metrics_json(const Metrics &m) {
    json j;
    j["mask_matching"] = r12(m.mask_matching);
    j["xi"] = m.xi ? r12(*m.xi) : json(nullptr);
    j["drr"] = r12(m.drr);
    j["q"] = r12(m.q);
    j["constraint_cost"] = r12(m.constraint_cost);
    return j;
}

const char *constraint_name(const ConstraintSpec &c) {
    if (std::holds_alternative<DrrConstraint>(c)) return "drr";
    if (std::holds_alternative<ForbiddenConstraint>(c)) return "forbidden";
    return "quantized";
}

std::string cut_name(double phi) {
    std::string s = detail::fmt(phi);
    for (auto &c : s)
        if (c == '.') c = 'p';
    return "phi" + s;
}

void write_json(const std::filesystem::path &path, const json &j) {
    auto out = detail::open_output(path);
    out << j.dump(2) << '\n';
}

void write_cuts(const Scenario &sc, const std::filesystem::path &dir, const std::string &tag,
                const ExcitationVector &w) {
    for (double phi : effective_phi_cuts(sc)) {
        const AngularGrid cut = cut_grid(phi, sc.config.output.cut_step_deg);
        write_pattern_csv(dir / ("pattern_" + tag + "_" + cut_name(phi) + ".csv"), array_factor(sc.geometry, w, cut),
                          cut);
    }
}

PatternSamples field(const Scenario &sc, const ExcitationVector &w) {
    return PatternSamples::from_field(sc.op->apply(w.weights()));
}

} // namespace

ArrayGeometry build_geometry(const GeometrySpec &spec) {
    try {
        if (spec.kind == "linear") return make_linear(spec.n, spec.spacing, spec.axis);
        if (spec.kind == "planar") return make_planar_grid(spec.nx, spec.ny, spec.spacing);
    } catch (const InvalidArgument &e) {
        throw ConfigError(std::string("[geometry] ") + e.what());
    }
    if (spec.kind == "file") return load_geometry_csv(spec.path);
    throw ConfigError("[geometry] unknown kind " + spec.kind);
}

AngularGrid build_grid(const GridSpec &spec, const ArrayGeometry &geom) {
    AngularGrid def = default_synthesis_grid(geom, spec.oversampling);
    if (def.one_dimensional()) {
        if (spec.samples) return AngularGrid::linear_u(spec.samples, def[0].phi);
        return def;
    }
    if (spec.n_theta) return AngularGrid::hemisphere(spec.n_theta, spec.n_phi);
    return def;
}

Scenario prepare_scenario(const ScenarioConfig &cfg, OperatorCache *cache) {
    ArrayGeometry geom = build_geometry(cfg.geometry);
    AngularGrid grid = build_grid(cfg.grid, geom);
    if (grid.size() < geom.size())
        throw ConfigError("[grid] " + std::to_string(grid.size()) + " samples for " + std::to_string(geom.size()) +
                          " elements; need M >= N");
    PatternMask mask = [&] {
        try {
            return build_mask(cfg.mask, grid);
        } catch (const InvalidArgument &e) {
            throw ConfigError(std::string("[mask] ") + e.what());
        }
    }();
    auto op = cache ? cache->get(geom, grid)
                    : std::make_shared<const RadiationOperator>(RadiationOperator::build(geom, grid));
    TruncationReport rank = [&] {
        try {
            return select_rank(*op, cfg.chi);
        } catch (const InvalidArgument &e) {
            throw ConfigError(std::string("[operator] ") + e.what());
        }
    }();
    AngularGrid q_grid = default_q_grid(geom);
    return Scenario{cfg, std::move(geom), std::move(grid), std::move(q_grid), std::move(mask), std::move(op),
                    std::move(rank)};
}

std::vector<double> effective_phi_cuts(const Scenario &sc) {
    if (!sc.config.output.phi_cuts.empty()) return sc.config.output.phi_cuts;
    if (sc.grid.one_dimensional()) return {sc.grid[0].phi * 180.0 / std::numbers::pi};
    return {0.0, 90.0};
}

Metrics evaluate_metrics(const Scenario &sc, const ExcitationVector &w, const ExcitationVector *reference) {
    if (w.size() != sc.geometry.size())
        throw InputError("excitation has " + std::to_string(w.size()) + " entries for " +
                         std::to_string(sc.geometry.size()) + " elements");
    Metrics m;
    const PatternSamples p = field(sc, w);
    m.mask_matching = mask_matching(p, sc.mask, sc.grid);
    if (reference) {
        if (reference->size() != w.size()) throw InputError("reference length differs from the excitation length");
        m.xi = pattern_tolerance(p, field(sc, *reference), sc.grid);
    }
    m.drr = cost_drr(w);
    m.q = q_factor(w, array_factor(sc.geometry, w, sc.q_grid), sc.q_grid);
    m.constraint_cost = make_cost(sc.config.constraint, sc.geometry)(w);
    return m;
}

ReferenceOutcome resolve_reference(const Scenario &sc) {
    ReferenceOutcome out;
    const auto &rc = sc.config.reference;
    out.source = rc.source;
    if (rc.source == "file") {
        auto loaded = load_reference(rc.path, sc.geometry, sc.mask, sc.grid);
        out.weights = loaded.weights;
        out.mask_matching = loaded.mask_matching;
        out.converged = loaded.mask_matching == 0;
        return out;
    }
    ReferenceResult r = synthesize_reference(*sc.op, sc.mask, sc.grid, rc.projection);
    const double amax = r.weights.amplitudes().maxCoeff();
    if (!(amax > 0)) throw NumericalError("reference fitter returned all-zero excitations");
    out.weights = ExcitationVector(r.weights.weights() / amax);
    out.mask_matching = mask_matching(field(sc, out.weights), sc.mask, sc.grid);
    out.converged = r.converged;
    out.iterations = r.iterations;
    return out;
}

SynthesisResult synthesize(const Scenario &sc) {
    SynthesisResult res;
    res.reference = resolve_reference(sc);
    const ExcitationVector &w_ref = res.reference.weights;

    res.w_ra = minimum_norm_excitations(*sc.op, sc.rank, field(sc, w_ref));
    if (sc.rank.s >= sc.geometry.size()) throw ConfigError("no NR degrees of freedom (S = N); lower chi");
    res.nr = optimize_nr(*sc.op, sc.rank, res.w_ra, sc.config.constraint, sc.geometry, sc.config.pso);
    res.w_nr = nr_excitations(*sc.op, sc.rank, res.nr.gamma);
    const ExcitationVector &w = res.nr.weights;

    res.ref_metrics = evaluate_metrics(sc, w_ref, &w_ref);
    res.ra_metrics = evaluate_metrics(sc, res.w_ra, &w_ref);
    res.final_metrics = evaluate_metrics(sc, w, &w_ref);
    res.xi_final_vs_ra = pattern_tolerance(field(sc, w), field(sc, res.w_ra), sc.grid);
    res.leakage_field = sc.op->apply(w.weights() - res.w_ra.weights()).norm();
    res.leakage_limit = sc.rank.leakage_bound * res.nr.gamma.gamma.norm();
    res.target_reached = res.nr.trace.converged_at.has_value();

    const double thr = sc.config.output.hard_zero_threshold;
    auto *forbidden = std::get_if<ForbiddenConstraint>(&sc.config.constraint);
    if (thr > 0 && forbidden) {
        Eigen::VectorXcd z = w.weights();
        for (auto idx : elements_in_region(sc.geometry, forbidden->region))
            if (std::abs(z[static_cast<Eigen::Index>(idx - 1)]) <= thr) z[static_cast<Eigen::Index>(idx - 1)] = 0;
        res.zeroed = ExcitationVector(z);
        res.zeroed_metrics = evaluate_metrics(sc, *res.zeroed, &w_ref);
    }

    json &j = res.summary;
    j["scenario"] = sc.config.name;
    j["n"] = sc.geometry.size();
    j["m"] = sc.grid.size();
    j["chi"] = r12(sc.rank.chi);
    j["s"] = sc.rank.s;
    j["sigma_s_plus_1"] = r12(sc.rank.leakage_bound);
    j["reference"] = {{"source", res.reference.source},
                      {"mask_matching", r12(res.reference.mask_matching)},
                      {"converged", res.reference.converged},
                      {"iterations", res.reference.iterations}};
    j["metrics"] = {{"reference", metrics_json(res.ref_metrics)},
                    {"ra", metrics_json(res.ra_metrics)},
                    {"final", metrics_json(res.final_metrics)}};
    j["xi_final_vs_ra"] = r12(res.xi_final_vs_ra);
    j["constraint"] = {{"kind", constraint_name(sc.config.constraint)},
                       {"cost_before", r12(res.ra_metrics.constraint_cost)},
                       {"cost_after", r12(res.final_metrics.constraint_cost)},
                       {"target_cost", r12(sc.config.pso.target_cost)},
                       {"target_reached", res.target_reached}};
    j["pso"] = {{"swarm_size", res.nr.swarm_size},
                {"max_iters", sc.config.pso.max_iters},
                {"seed", sc.config.pso.seed},
                {"search_bound", r12(res.nr.search_bound)},
                {"iterations_run", res.nr.trace.records.back().iteration},
                {"evaluations", res.nr.evaluations},
                {"converged_at", res.nr.trace.converged_at ? json(*res.nr.trace.converged_at) : json(nullptr)}};
    j["leakage"] = {{"field_change_norm", r12(res.leakage_field)},
                    {"bound", r12(res.leakage_limit)},
                    {"gamma_norm", r12(res.nr.gamma.gamma.norm())}};
    if (res.zeroed_metrics)
        j["hard_zero"] = {{"threshold", r12(thr)}, {"metrics", metrics_json(*res.zeroed_metrics)}};
    return res;
}

json cmd_decompose(const ScenarioConfig &cfg) {
    const Scenario sc = prepare_scenario(cfg);
    const std::filesystem::path dir = cfg.output.directory;
    write_spectrum_csv(dir / "spectrum.csv", *sc.op);
    write_truncation_json(dir / "truncation.json", sc.rank);
    json j = {{"n", sc.geometry.size()},
              {"m", sc.grid.size()},
              {"chi", r12(sc.rank.chi)},
              {"s", sc.rank.s},
              {"sigma_s_plus_1", r12(sc.rank.leakage_bound)},
              {"null_dimension", sc.rank.null_dimension()}};
    return j;
}

json cmd_reference(const ScenarioConfig &cfg) {
    const Scenario sc = prepare_scenario(cfg);
    const std::filesystem::path dir = cfg.output.directory;
    const ReferenceOutcome ref = resolve_reference(sc);
    write_excitation_csv(dir / "w_ref.csv", ref.weights);
    write_mask_csv(dir / "mask.csv", sc.mask, sc.grid);
    write_cuts(sc, dir, "ref", ref.weights);
    const Metrics m = evaluate_metrics(sc, ref.weights);
    json j = {{"source", ref.source},
              {"mask_matching", r12(ref.mask_matching)},
              {"converged", ref.converged},
              {"iterations", ref.iterations},
              {"metrics", metrics_json(m)}};
    write_json(dir / "reference.json", j);
    return j;
}

json cmd_synthesize(const ScenarioConfig &cfg, bool *target_reached) {
    const Scenario sc = prepare_scenario(cfg);
    const std::filesystem::path dir = cfg.output.directory;
    const SynthesisResult res = synthesize(sc);

    {
        auto out = detail::open_output(dir / "config.toml");
        out << serialize_config(cfg);
    }
    write_spectrum_csv(dir / "spectrum.csv", *sc.op);
    write_truncation_json(dir / "truncation.json", sc.rank);
    write_mask_csv(dir / "mask.csv", sc.mask, sc.grid);
    write_excitation_csv(dir / "w_ref.csv", res.reference.weights);
    write_excitation_csv(dir / "w_ra.csv", res.w_ra);
    write_excitation_csv(dir / "w_nr.csv", res.w_nr);
    write_excitation_csv(dir / "w_final.csv", res.nr.weights);
    write_gamma_csv(dir / "gamma.csv", res.nr.gamma);
    write_trace_csv(dir / "trace.csv", res.nr.trace);
    for (const auto &[it, g] : res.nr.trace.snapshots)
        write_gamma_csv(dir / ("gamma_iter" + std::to_string(it) + ".csv"), g);
    write_cuts(sc, dir, "ref", res.reference.weights);
    write_cuts(sc, dir, "ra", res.w_ra);
    write_cuts(sc, dir, "final", res.nr.weights);
    write_pattern_csv(dir / "pattern_final_grid.csv", field(sc, res.nr.weights), sc.grid);
    if (res.zeroed) write_excitation_csv(dir / "w_final_zeroed.csv", *res.zeroed);
    write_json(dir / "summary.json", res.summary);
    if (target_reached) *target_reached = res.target_reached;
    return res.summary;
}

json cmd_evaluate(const ScenarioConfig &cfg, const std::filesystem::path &excitations,
                  const std::optional<std::filesystem::path> &reference) {
    const Scenario sc = prepare_scenario(cfg);
    const std::filesystem::path dir = cfg.output.directory;
    const ExcitationVector w = load_excitation_csv(excitations);
    std::optional<ExcitationVector> ref;
    if (reference) ref = load_excitation_csv(*reference);
    const Metrics m = evaluate_metrics(sc, w, ref ? &*ref : nullptr);
    write_cuts(sc, dir, "eval", w);
    json j = metrics_json(m);
    j["constraint_kind"] = constraint_name(cfg.constraint);
    write_json(dir / "evaluation.json", j);
    return j;
}

} // namespace nrcas
