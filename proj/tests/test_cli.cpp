#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cmchain/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("cmchain_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json slurp_json(const fs::path& p) { return json::parse(slurp(p)); }

int run(std::initializer_list<std::string> args) {
    return cmchain::cli_main(std::vector<std::string>(args));
}

}  // namespace

TEST_CASE("localize run writes the documented CSV and a near -1 fit") {
    TempDir tmp("localize");
    const fs::path cfg = tmp.path / "pinned.cfg";
    {
        std::ofstream out(cfg);
        out << "[system]\n"
               "n = 16\n"
               "trap.kind = pinning\n"
               "trap.k_pin = 1.0\n"
               "interaction.kind = nn\n"
               "interaction.g = 1.0\n"
               "scaling_preset = assumption_preserving\n";
    }
    CHECK(run({"localize", "--config", cfg.string(), "--n", "16,64,256,1024",
               "--out", (tmp.path / "out").string()}) == 0);

    const std::string csv = slurp(tmp.path / "out" / "localize.csv");
    CHECK(csv.rfind("n,var_x,var_p,gap4,gap6,xi,sp_var\n", 0) == 0);

    const json summary = slurp_json(tmp.path / "out" / "localize_summary.json");
    CHECK(summary["schema_version"] == 1);
    CHECK(summary["all_invariants_pass"] == true);
    const double exponent = summary["fits"]["var_x"]["exponent"].get<double>();
    CHECK(std::abs(exponent + 1.0) <= 0.05);
}

TEST_CASE("missing config exits 2 and leaves no files behind") {
    TempDir tmp("missing");
    const fs::path out = tmp.path / "out";
    CHECK(run({"localize", "--config", (tmp.path / "missing.cfg").string(), "--out",
               out.string()}) == 2);
    CHECK((!fs::exists(out) || fs::is_empty(out)));
}

TEST_CASE("unknown subcommand exits 2") {
    TempDir tmp("unknown");
    CHECK(run({"no-such-scenario", "--out", tmp.path.string()}) == 2);
}

TEST_CASE("experiment sweep rows decouple from the coupling") {
    TempDir tmp("sweep");
    CHECK(run({"experiment-sweep", "--nu", "0.5,1,2", "--g", "0,1,10", "--out",
               tmp.path.string()}) == 0);
    std::istringstream csv(slurp(tmp.path / "experiment_sweep.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "nu,g,var_x");
    while (std::getline(csv, line)) {
        const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
        const double nu = std::stod(line.substr(0, c1));
        const double var_x = std::stod(line.substr(c2 + 1));
        CHECK(var_x == doctest::Approx(0.5 / nu).epsilon(1e-10));  // hbar/(2 M nu)
    }
}

TEST_CASE("identical runs are byte-identical across thread counts") {
    TempDir a("det_a"), b("det_b");
    CHECK(run({"experiment-sweep", "--nu", "0.5,1,2,4", "--g", "0,0.5,1,2,8",
               "--threads", "1", "--out", a.path.string()}) == 0);
    CHECK(run({"experiment-sweep", "--nu", "0.5,1,2,4", "--g", "0,0.5,1,2,8",
               "--threads", "7", "--out", b.path.string()}) == 0);
    CHECK(slurp(a.path / "experiment_sweep.csv") == slurp(b.path / "experiment_sweep.csv"));
    CHECK(slurp(a.path / "experiment_sweep_summary.json") ==
          slurp(b.path / "experiment_sweep_summary.json"));
}

TEST_CASE("kohn run reports both variance normalizations") {
    TempDir tmp("kohn");
    CHECK(run({"kohn", "--out", tmp.path.string()}) == 0);
    const json summary = slurp_json(tmp.path / "kohn_summary.json");
    CHECK(summary["var_x_expected_half"].get<double>() == doctest::Approx(0.5));
    CHECK(summary["var_x_paper_normalization"].get<double>() == doctest::Approx(1.0));
    CHECK(summary["all_invariants_pass"] == true);
}

TEST_CASE("dynamics run writes both trajectories") {
    TempDir tmp("dyn");
    CHECK(run({"dynamics", "--periods", "2", "--out", tmp.path.string()}) == 0);
    CHECK(slurp(tmp.path / "dynamics.csv").rfind("t,x_cm,p_cm,energy,var_x\n", 0) == 0);
    CHECK(fs::exists(tmp.path / "dynamics_classical.csv"));
    const json summary = slurp_json(tmp.path / "dynamics_summary.json");
    CHECK(summary["all_invariants_pass"] == true);
}

TEST_CASE("commutator and converge runs satisfy their invariants") {
    TempDir tmp("misc");
    CHECK(run({"commutator", "--k", "3", "--out", tmp.path.string()}) == 0);
    CHECK(run({"converge", "--out", tmp.path.string()}) == 0);
    CHECK(run({"finite-volume", "--out", tmp.path.string()}) == 0);
    CHECK(slurp(tmp.path / "converge.csv").rfind("skip,d2\n", 0) == 0);
    CHECK(slurp(tmp.path / "finite_volume.csv").rfind("n,paper_bound,exact_tail\n", 0) == 0);
}

TEST_CASE("invalid flag values exit 2") {
    TempDir tmp("badflag");
    CHECK(run({"localize", "--n", "16,8", "--out", tmp.path.string()}) == 2);
}
