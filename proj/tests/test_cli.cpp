#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "heatlab/config.hpp"

namespace fs = std::filesystem;

namespace {

std::string bin_path() {
    const char* env = std::getenv("HEATLAB_BIN");
    REQUIRE(env != nullptr);
    return env;
}

fs::path work_dir() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() / "heatlab_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path write_config(const std::string& name, const std::string& body) {
    fs::path p = work_dir() / name;
    std::ofstream out(p);
    out << body;
    return p;
}

struct CliResult {
    int code = -1;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    fs::path log = work_dir() / "last_output.txt";
    std::string cmd = bin_path() + " " + args + " > " + log.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("params: certified set exits 0 and prints the derived delta") {
    auto cfg = write_config("params_ok.cfg",
                            "N = 2\n"
                            "alpha = 0.7853981633974483\n"
                            "beta = 3.141592653589793\n"
                            "lambda = 1\n"
                            "Lambda = 1.0001\n"
                            "R = 10\n"
                            "epsilon = 0.1\n");
    auto r = run_cli("params --config " + cfg.string());
    CHECK(r.code == 0);
    CHECK(r.output.find("0.324547") != std::string::npos);
    CHECK(r.output.find("gap_certified  = yes") != std::string::npos);
}

TEST_CASE("params: wide envelope is not certified") {
    auto cfg = write_config("params_wide.cfg",
                            "alpha = 0.7853981633974483\n"
                            "beta = 3.141592653589793\n"
                            "lambda = 0.07957747154594767\n"
                            "Lambda = 4\n"
                            "R = 10\n"
                            "epsilon = 0.1\n");
    auto r = run_cli("params --config " + cfg.string());
    CHECK(r.code == 2);
}

TEST_CASE("params: infeasible window equation exits 2") {
    auto cfg = write_config("params_infeasible.cfg",
                            "alpha = 0.5\n"
                            "beta = 3\n"
                            "lambda = 1\n"
                            "Lambda = 1.0001\n"
                            "R = 1.5\n"
                            "epsilon = 0.1\n");
    CHECK(run_cli("params --config " + cfg.string()).code == 2);
}

TEST_CASE("params: unknown or missing keys exit 1") {
    auto bad = write_config("params_badkey.cfg",
                            "alpha = 0.5\nbeta = 3\nlambda = 1\nLambda = 2\nR = 10\n"
                            "epsilon = 0.1\nbogus = 7\n");
    CHECK(run_cli("params --config " + bad.string()).code == 1);

    auto missing = write_config("params_missing.cfg", "beta = 3\nlambda = 1\nLambda = 2\nR = 10\n");
    CHECK(run_cli("params --config " + missing.string()).code == 1);

    CHECK(run_cli("params --config " + (work_dir() / "does_not_exist.cfg").string()).code == 1);
}

TEST_CASE("geometry-check: sandwich pass and fail") {
    auto good = write_config("geo_good.cfg",
                             "kind = sandwich\n"
                             "arcs = [0.7853981633974483,0.7853981633974483]\n"
                             "p = 0.7853981633974483\n"
                             "h = 0.3\n"
                             "check_samples = 20000\n");
    CHECK(run_cli("geometry-check --config " + good.string()).code == 0);

    auto bad = write_config("geo_bad.cfg",
                            "kind = sandwich\n"
                            "arcs = [0.7853981633974483,0.7853981633974483]\n"
                            "p = 0.7853981633974483\n"
                            "h = 0.3\n"
                            "check_samples = 50000\n"
                            "bump_x = 0\n"
                            "bump_y = 8\n"
                            "bump_radius = 1\n");
    auto r = run_cli("geometry-check --config " + bad.string());
    CHECK(r.code == 5);
    CHECK(r.output.find("witness") != std::string::npos);
}

TEST_CASE("series: evaluates the constant-sigma series") {
    auto cfg = write_config("series.cfg",
                            "alpha = 0.7853981633974483\n"
                            "beta = 3.141592653589793\n"
                            "delta = 0.3247\n"
                            "R = 10\n"
                            "sigma = 1\n"
                            "times = 1\n");
    auto r = run_cli("series --config " + cfg.string());
    CHECK(r.code == 0);
    CHECK(r.output.find("0.46337") != std::string::npos);
}

TEST_CASE("simulate: half-plane CSV, determinism, and meta sidecar") {
    auto cfg = write_config("sim_half.cfg",
                            "kind = halfplane\n"
                            "grid_L = 4\n"
                            "grid_h = 0.1\n"
                            "t_end = 0.5\n"
                            "sample_times = 0.25,0.5\n");
    fs::path out1 = work_dir() / "sim1";
    fs::path out2 = work_dir() / "sim2";
    CHECK(run_cli("simulate --config " + cfg.string() + " --out " + out1.string()).code == 0);
    CHECK(run_cli("simulate --config " + cfg.string() + " --out " + out2.string()).code == 0);

    std::string csv1 = slurp(out1 / "series.csv");
    CHECK(csv1 == slurp(out2 / "series.csv")); // byte-identical reruns
    CHECK(csv1.rfind("t,probe_0\n", 0) == 0);
    CHECK(csv1.find("0.5,0.5") != std::string::npos);
    CHECK(slurp(out1 / "meta.txt").find("truncation_budget") != std::string::npos);
}

TEST_CASE("simulate: budget and convergence failures map to exit codes") {
    auto too_long = write_config("sim_long.cfg",
                                 "kind = halfplane\ngrid_L = 4\ngrid_h = 0.1\n"
                                 "t_end = 500\nsample_times = 500\n");
    CHECK(run_cli("simulate --config " + too_long.string()).code == 3);

    auto no_conv = write_config("sim_noconv.cfg",
                                "kind = halfplane\ngrid_L = 4\ngrid_h = 0.1\n"
                                "t_end = 0.5\nsample_times = 0.5\ncg_maxiter = 1\n");
    CHECK(run_cli("simulate --config " + no_conv.string()).code == 4);

    auto bad_spec = write_config("sim_badspec.cfg",
                                 "kind = oscillatory\n"
                                 "arcs = [0,0.39269908169872414];[0,1.5707963267948966]\n"
                                 "R = 4\ngrid_L = 4\ngrid_h = 0.1\n"
                                 "t_end = 0.5\nsample_times = 0.5\n");
    CHECK(run_cli("simulate --config " + bad_spec.string()).code == 5); // delta missing
}

TEST_CASE("experiment selfsim: k=1 passes") {
    auto cfg = write_config("exp_selfsim.cfg",
                            "arcs = [0.7853981633974483,0.7853981633974483]\n"
                            "grid_L = 4\ngrid_h = 0.1\nks = 1\n");
    fs::path out = work_dir() / "selfsim";
    auto r = run_cli("experiment selfsim --config " + cfg.string() + " --out " + out.string());
    CHECK(r.code == 0);
    CHECK(slurp(out / "selfsim_summary.csv").find(",1,") != std::string::npos);
}

TEST_CASE("experiment stabilize: failing sandwich exits 5") {
    auto cfg = write_config("exp_stab_bad.cfg",
                            "kind = sandwich\n"
                            "arcs = [1.5707963267948966,0.39269908169872414];"
                            "[4.71238898038469,0.39269908169872414]\n"
                            "p = 1.5707963267948966\n"
                            "h = 0.3\n"
                            "grid_L = 4\ngrid_h = 0.1\nt_end = 1\ncheck_samples = 1000\n");
    CHECK(run_cli("experiment stabilize --config " + cfg.string() + " --out " +
                  (work_dir() / "stab_bad").string())
              .code == 5);
}

TEST_CASE("experiment oscillate: constant sigma passes with oracle agreement") {
    auto cfg = write_config("exp_osc.cfg",
                            "kind = oscillatory\n"
                            "arcs = [0,0.39269908169872414];[0,1.5707963267948966]\n"
                            "R = 4\n"
                            "epsilon = 0.25\n"
                            "n_max = 2\n"
                            "lambda = 1\nLambda = 2\n"
                            "n_probes = 1\n"
                            "oracle_rtol = 0.05\n"
                            "grid_L = 4\ngrid_h = 0.05\n");
    fs::path out = work_dir() / "osc";
    auto r = run_cli("experiment oscillate --config " + cfg.string() + " --out " + out.string());
    CHECK(r.code == 0);
    std::string traj = slurp(out / "oscillate_trajectory.csv");
    CHECK(traj.find("t_1") != std::string::npos);
    CHECK(slurp(out / "oscillate_report.txt").find("PASS") != std::string::npos);
}

TEST_CASE("bad command line exits 1") {
    CHECK(run_cli("frobnicate").code == 1);
    CHECK(run_cli("params").code == 1); // --config is required
}

TEST_CASE("geometry-check: cone with a starshaped base passes") {
    auto cfg = write_config("geo_cone.cfg",
                            "kind = cone\n"
                            "arcs = [0.5,0.7853981633974483]\n"
                            "p = 0.5\n");
    auto r = run_cli("geometry-check --config " + cfg.string());
    CHECK(r.code == 0);
    CHECK(r.output.find("starshaped w.r.t. p = yes") != std::string::npos);
}

TEST_CASE("domain specs round-trip through the plain-text form") {
    using heatlab::config::Config;
    using heatlab::config::DomainSpec;
    const std::string bodies[] = {
        "kind = cone\narcs = [0.5,0.7853981633974483];[2.5,0.25]\n",
        "kind = sandwich\narcs = [0.78539816339744828,0.78539816339744828]\n"
        "p = 0.78539816339744828\nh = 0.3\nomega_shift = 0.15\n"
        "bump_x = 2\nbump_y = -0.1\nbump_radius = 0.05\n",
        "kind = oscillatory\narcs = [0,0.39269908169872414];[0,1.5707963267948966]\n"
        "delta = 0.3247\nR = 10\nn_max = 2\n",
    };
    for (const auto& body : bodies) {
        auto cfg = Config::parse_string(body);
        auto spec = DomainSpec::from_config(cfg);
        cfg.reject_unconsumed();
        auto cfg2 = Config::parse_string(spec.to_text());
        auto spec2 = DomainSpec::from_config(cfg2);
        cfg2.reject_unconsumed();
        CHECK(spec2.to_text() == spec.to_text());
        // the rebuilt indicator agrees pointwise
        auto d1 = spec.build();
        auto d2 = spec2.build();
        for (const auto& p : heatlab::geometry::disk_samples(2000, 5.0)) CHECK(d1(p) == d2(p));
    }
}
