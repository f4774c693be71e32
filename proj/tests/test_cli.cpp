#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nrcas/pipeline.hpp"

using namespace nrcas;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run_cli(const std::string &args) {
    Run r;
    const std::string cmd = std::string(NRCAS_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE *p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path fresh_dir(const std::string &name) {
    auto d = fs::temp_directory_path() / ("nrcas_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

void write_text(const fs::path &p, const std::string &text) {
    std::ofstream(p) << text;
}

// 10 elements at 0.3 lambda: small enough for a sub-second pipeline run.
std::string small_config(const fs::path &out, const std::string &chi = "0.02") {
    std::ostringstream s;
    s << "[scenario]\nname = \"small\"\n"
      << "[geometry]\nkind = \"linear\"\nn = 10\nspacing = 0.3\naxis = \"y\"\n"
      << "[mask]\nkind = \"flat_top\"\nsll_db = -15.0\nrpe_db = 1.0\nfnbw_deg = 70.0\ntransition_deg = 15.0\n"
      << "[operator]\nchi = " << chi << "\n"
      << "[reference]\nmax_iters = 300\nrestarts = 2\n"
      << "[pso]\nmax_iters = 40\nseed = 3\n"
      << "[output]\ndirectory = \"" << out.string() << "\"\n";
    return s.str();
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

} // namespace

TEST(Cli, ExitCodes) {
    auto dir = fresh_dir("codes");
    EXPECT_EQ(run_cli("").code, 2);
    EXPECT_EQ(run_cli("decompose --config " + (dir / "missing.toml").string()).code, 2);

    write_text(dir / "bad.toml", "[geometry]\nkind = \"hexagonal\"\n");
    EXPECT_EQ(run_cli("decompose --config " + (dir / "bad.toml").string()).code, 2);

    write_text(dir / "ok.toml", small_config(dir / "out"));
    auto dec = run_cli("decompose --config " + (dir / "ok.toml").string());
    ASSERT_EQ(dec.code, 0);
    EXPECT_EQ(json::parse(dec.out)["n"], 10);
    EXPECT_TRUE(fs::exists(dir / "out" / "spectrum.csv"));

    write_text(dir / "garbage.csv", "index,amplitude,phase_deg\n1,abc,0\n");
    EXPECT_EQ(run_cli("evaluate --config " + (dir / "ok.toml").string() + " --excitations " +
                      (dir / "garbage.csv").string())
                  .code,
              3);
    EXPECT_EQ(run_cli("evaluate --config " + (dir / "ok.toml").string() + " --excitations " +
                      (dir / "nothing.csv").string())
                  .code,
              3);

    // A tiny threshold keeps every singular value: nothing left to optimize.
    write_text(dir / "full.toml", small_config(dir / "out_full", "1e-9"));
    EXPECT_EQ(run_cli("synthesize --config " + (dir / "full.toml").string()).code, 2);
}

TEST(Cli, SynthesizeThenEvaluateReproducesSummary) {
    auto dir = fresh_dir("roundtrip");
    write_text(dir / "cfg.toml", small_config(dir / "run"));
    auto syn = run_cli("synthesize --config " + (dir / "cfg.toml").string() + " --seed 5");
    ASSERT_EQ(syn.code, 0) << syn.out;
    const json summary = json::parse(syn.out);
    EXPECT_EQ(summary["pso"]["seed"], 5);
    for (const char *f : {"config.toml", "spectrum.csv", "truncation.json", "mask.csv", "w_ref.csv", "w_ra.csv",
                          "w_nr.csv", "w_final.csv", "gamma.csv", "trace.csv", "summary.json",
                          "pattern_final_phi90.csv", "pattern_final_grid.csv"})
        EXPECT_TRUE(fs::exists(dir / "run" / f)) << f;

    // Evaluate from the written config so the overridden seed is irrelevant.
    const std::string base = "evaluate --config " + (dir / "run" / "config.toml").string() + " --output " +
                             (dir / "eval").string() + " --reference " + (dir / "run" / "w_ref.csv").string();
    for (const char *stage : {"ra", "final"}) {
        auto ev = run_cli(base + " --excitations " + (dir / "run" / (std::string("w_") + stage + ".csv")).string());
        ASSERT_EQ(ev.code, 0) << stage;
        const json e = json::parse(ev.out);
        const json &m = summary["metrics"][stage];
        for (const char *k : {"mask_matching", "xi", "drr", "q", "constraint_cost"})
            EXPECT_TRUE(close(e[k].get<double>(), m[k].get<double>()))
                << stage << " " << k << ": " << e[k] << " vs " << m[k];
    }
}

TEST(Cli, UniformWeightsViolateCosecantMask) {
    auto dir = fresh_dir("uniform");
    write_text(dir / "cfg.toml", "[geometry]\nkind = \"linear\"\nn = 32\nspacing = 0.3\naxis = \"y\"\n"
                                 "[mask]\nkind = \"cosecant_squared\"\nsll_db = -20.0\nrpe_db = 1.0\nfnbw_deg = 68.0\n"
                                 "lobe_start_deg = -10.0\ntransition_deg = 14.0\ncsc_start_deg = 10.0\n"
                                 "[output]\ndirectory = \"" +
                                     (dir / "out").string() + "\"\n");
    std::ostringstream w;
    w << "index,amplitude,phase_deg\n";
    for (int n = 1; n <= 32; ++n) w << n << ",1,0\n";
    write_text(dir / "uniform.csv", w.str());
    auto ev = run_cli("evaluate --config " + (dir / "cfg.toml").string() + " --excitations " +
                      (dir / "uniform.csv").string());
    ASSERT_EQ(ev.code, 0);
    EXPECT_GT(json::parse(ev.out)["mask_matching"].get<double>(), 0.0);
    EXPECT_DOUBLE_EQ(json::parse(ev.out)["drr"].get<double>(), 1.0);
}

TEST(Cli, TargetNotReachedExitsFive) {
    auto dir = fresh_dir("target");
    auto text = small_config(dir / "out");
    text.replace(text.find("seed = 3\n"), 9, "seed = 3\ntarget_cost = 1.0\n"); // DRR >= 1 with equality only if uniform
    write_text(dir / "cfg.toml", text);
    auto r = run_cli("synthesize --config " + (dir / "cfg.toml").string());
    EXPECT_EQ(r.code, 5);
    EXPECT_FALSE(json::parse(r.out)["constraint"]["target_reached"].get<bool>());
    EXPECT_TRUE(fs::exists(dir / "out" / "summary.json"));
}
