#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::path(NANOTHERM_CLI_WORKDIR);

struct Result {
    int code = -1;
    std::string err;
};

Result nanotherm(const std::string& args) {
    fs::create_directories(kWork);
    const auto err_file = kWork / "stderr.txt";
    const std::string cmd = "NANOTHERM_CACHE_DIR='" + (kWork / "cache").string() + "' '" NANOTHERM_CLI_EXE "' " + args +
                            " > '" + (kWork / "stdout.txt").string() + "' 2> '" + err_file.string() + "'";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(err_file);
    std::ostringstream s;
    s << in.rdbuf();
    r.err = s.str();
    return r;
}

std::string out_dir(const std::string& name) { return (kWork / name).string(); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Data rows of a table written by the tool, split on commas; comments and the header row skipped.
std::vector<std::vector<std::string>> rows(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::vector<std::vector<std::string>> out;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        out.push_back(cells);
    }
    return out;
}

double summary_value(const fs::path& p, const std::string& key) {
    for (const auto& r : rows(p))
        if (r[0] == key) return std::stod(r[1]);
    FAIL("missing summary key " << key);
    return 0.0;
}

const std::string kPlanck = " --set radiation.radiator=planck --set heating.eta_abs=2e-2";

}  // namespace

TEST_CASE("default configuration round-trips through the config file") {
    REQUIRE(nanotherm("--emit-default-config").code == 0);
    const auto cfg = kWork / "default.ini";
    fs::copy_file(kWork / "stdout.txt", cfg, fs::copy_options::overwrite_existing);
    REQUIRE(nanotherm("-o " + out_dir("p1") + " profile").code == 0);
    REQUIRE(nanotherm("--config " + cfg.string() + " -o " + out_dir("p2") + " profile").code == 0);
    CHECK(slurp(kWork / "p1/profile.csv") == slurp(kWork / "p2/profile.csv"));
}

TEST_CASE("output tables carry version, config hash and column units") {
    REQUIRE(nanotherm("-o " + out_dir("p1") + " profile").code == 0);
    std::ifstream in(kWork / "p1/profile.csv");
    std::string l1, l2, l3;
    std::getline(in, l1), std::getline(in, l2), std::getline(in, l3);
    CHECK(l1.rfind("# nanotherm ", 0) == 0);
    CHECK(l2.rfind("# config_hash: ", 0) == 0);
    CHECK(l3 == "# columns: z_m [m]; radius_m [m]");
    CHECK(fs::exists(kWork / "p1/manifest.json"));
    CHECK(rows(kWork / "p1/profile.csv").size() > 100);
}

TEST_CASE("configuration errors exit with code 2 and name the field") {
    auto r = nanotherm("-o " + out_dir("e") + " --set geometry.nope=1 profile");
    CHECK(r.code == 2);
    CHECK(r.err.find("geometry.nope") != std::string::npos);
    r = nanotherm("-o " + out_dir("e") + " --set materials.nk_table=/does/not/exist emissivity");
    CHECK(r.code == 2);
    CHECK(r.err.find("materials.nk_table") != std::string::npos);
    r = nanotherm("-o " + out_dir("e") + " sweep --values ''");
    CHECK(r.code == 2);
    CHECK(r.err.find("sweep.values") != std::string::npos);
    CHECK(nanotherm("-o " + out_dir("e") + " --set heating.model=laser simulate").code == 2);
    CHECK(nanotherm("--bogus-flag profile").code == 2);
}

TEST_CASE("emissivity band is non-empty and reruns are byte-identical") {
    REQUIRE(nanotherm("-o " + out_dir("em1") + " emissivity --radius 250e-9").code == 0);
    REQUIRE(nanotherm("-o " + out_dir("em2") + " emissivity --radius 250e-9").code == 0);
    CHECK(slurp(kWork / "em1/emissivity.csv") == slurp(kWork / "em2/emissivity.csv"));
    const auto t = rows(kWork / "em1/emissivity.csv");
    REQUIRE(t.size() > 100);
    for (const auto& r : t) {
        CHECK(std::stod(r[2]) >= 0.0);
        CHECK(std::stod(r[2]) <= std::stod(r[3]));
    }
}

TEST_CASE("simulate writes traces with a budget residual below 1 %") {
    REQUIRE(nanotherm("-o " + out_dir("sim") + kPlanck + " simulate").code == 0);
    for (const char* f : {"trace.csv", "staircase.csv", "budget.csv", "summary.csv", "manifest.json"})
        CHECK(fs::exists(kWork / "sim" / f));
    const auto budget = rows(kWork / "sim/budget.csv");
    REQUIRE(!budget.empty());
    for (const auto& r : budget) CHECK(std::stod(r[6]) < 0.01);
    CHECK(summary_value(kWork / "sim/summary.csv", "dLopt_max") > 1e-5);

    REQUIRE(nanotherm("-o " + out_dir("sim2") + kPlanck + " simulate").code == 0);
    CHECK(slurp(kWork / "sim/trace.csv") == slurp(kWork / "sim2/trace.csv"));
}

TEST_CASE("zero heating power gives a flat path-length trace") {
    REQUIRE(nanotherm("-o " + out_dir("zero") + kPlanck + " simulate --power 0").code == 0);
    for (const auto& r : rows(kWork / "zero/trace.csv")) CHECK(std::stod(r[2]) == 0.0);
}

TEST_CASE("power sweep gives one monotone row per grid point") {
    REQUIRE(nanotherm("-o " + out_dir("sw") + kPlanck + " sweep --values 0.01,0.02,0.03").code == 0);
    const auto t = rows(kWork / "sw/sweep.csv");
    REQUIRE(t.size() == 3);
    CHECK(std::stod(t[0][2]) < std::stod(t[1][2]));
    CHECK(std::stod(t[1][2]) < std::stod(t[2][2]));
}

TEST_CASE("sweeps are independent of the thread count") {
    REQUIRE(nanotherm("-o " + out_dir("t1") + kPlanck + " --threads 1 sweep --mode equilibrium --values 0.01,0.02,0.03")
                .code == 0);
    REQUIRE(nanotherm("-o " + out_dir("t2") + kPlanck + " --threads 3 sweep --mode equilibrium --values 0.01,0.02,0.03")
                .code == 0);
    CHECK(slurp(kWork / "t1/sweep_runs.csv") == slurp(kWork / "t2/sweep_runs.csv"));
}

TEST_CASE("failed sweep points are recorded and exit with code 4") {
    const auto r = nanotherm("-o " + out_dir("partial") + kPlanck + " sweep --mode equilibrium --values 0.01,100");
    CHECK(r.code == 4);
    const auto t = rows(kWork / "partial/sweep_runs.csv");
    REQUIRE(t.size() == 2);
    CHECK(t[0][2] == "ok");
    CHECK(t[1][2] == "failed");
}

TEST_CASE("fit-eta recovers a planted absorbed fraction") {
    REQUIRE(nanotherm("-o " + out_dir("fit") + kPlanck + " fit-eta --synthetic-eta 3e-2").code == 0);
    CHECK(summary_value(kWork / "fit/summary.csv", "eta_mean") == doctest::Approx(3e-2).epsilon(0.05));

    REQUIRE(nanotherm("-o " + out_dir("fit2") + kPlanck + " fit-eta --data " + (kWork / "fit/data.csv").string())
                .code == 0);
    CHECK(summary_value(kWork / "fit2/summary.csv", "eta_mean") == doctest::Approx(3e-2).epsilon(0.05));
}

TEST_CASE("malformed fit data reports the row number") {
    const auto bad = kWork / "bad.csv";
    std::ofstream(bad) << "P_heat_W,dLopt_max_m\n0.01,1e-5\n0.02,1e-5\n0.03,oops\n";
    const auto r = nanotherm("-o " + out_dir("fitbad") + " fit-eta --data " + bad.string());
    CHECK(r.code == 2);
    CHECK(r.err.find("row 3") != std::string::npos);
}

TEST_CASE("stability table decreases with temperature") {
    REQUIRE(nanotherm("-o " + out_dir("stab") + " stability").code == 0);
    const auto t = rows(kWork / "stab/stability.csv");
    REQUIRE(t.size() == 29);
    for (std::size_t i = 1; i < t.size(); ++i) {
        CHECK(std::stod(t[i][3]) < std::stod(t[i - 1][3]));
        CHECK(std::stod(t[i][4]) < std::stod(t[i - 1][4]));
    }
    CHECK(summary_value(kWork / "stab/summary.csv", "sigma_residual") > 1e5);
}
