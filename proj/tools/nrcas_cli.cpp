// Command-line front end: decompose, reference, synthesize, evaluate.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nrcas/config.hpp"
#include "nrcas/errors.hpp"
#include "nrcas/pipeline.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kInput = 3, kNumerical = 4, kTargetMissed = 5 };

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string output;
    std::vector<double> phi_cuts;
};

void add_common(CLI::App *cmd, Common &c) {
    cmd->add_option("--config", c.config, "Scenario config (TOML)")->required();
    cmd->add_option("--seed", c.seed, "Override the PSO and reference fitter seeds");
    cmd->add_option("--output", c.output, "Output directory");
    cmd->add_option("--phi-cuts", c.phi_cuts, "Pattern cut planes in degrees")->delimiter(',');
}

nrcas::ScenarioConfig load(const Common &c) {
    auto cfg = nrcas::load_config(c.config);
    if (c.seed) {
        cfg.pso.seed = *c.seed;
        cfg.reference.projection.seed = *c.seed;
    }
    if (!c.output.empty()) cfg.output.directory = c.output;
    if (!c.phi_cuts.empty()) cfg.output.phi_cuts = c.phi_cuts;
    return cfg;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"NR-CAS phased-array synthesis"};
    app.require_subcommand(1);

    Common decompose_opts, reference_opts, synth_opts, eval_opts;
    auto *decompose = app.add_subcommand("decompose", "Singular value spectrum and truncation rank");
    add_common(decompose, decompose_opts);
    auto *reference = app.add_subcommand("reference", "Resolve or synthesize the reference excitations");
    add_common(reference, reference_opts);
    auto *synth = app.add_subcommand("synthesize", "Run the full pipeline");
    add_common(synth, synth_opts);
    auto *eval = app.add_subcommand("evaluate", "Metrics for an excitation file");
    add_common(eval, eval_opts);
    std::string excitations, eval_reference;
    eval->add_option("--excitations", excitations, "Excitation CSV")->required();
    eval->add_option("--reference", eval_reference, "Reference excitation CSV for the pattern tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        nlohmann::json report;
        int code = kOk;
        if (*decompose) {
            report = nrcas::cmd_decompose(load(decompose_opts));
        } else if (*reference) {
            report = nrcas::cmd_reference(load(reference_opts));
        } else if (*synth) {
            bool reached = false;
            auto cfg = load(synth_opts);
            report = nrcas::cmd_synthesize(cfg, &reached);
            if (cfg.pso.target_cost > 0 && !reached) code = kTargetMissed;
        } else {
            std::optional<std::filesystem::path> ref;
            if (!eval_reference.empty()) ref = eval_reference;
            report = nrcas::cmd_evaluate(load(eval_opts), excitations, ref);
        }
        std::cout << report.dump(2) << std::endl;
        return code;
    } catch (const nrcas::ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const nrcas::InvalidArgument &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const nrcas::InputError &e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInput;
    } catch (const nrcas::NumericalError &e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::filesystem::filesystem_error &e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInput;
    }
}
