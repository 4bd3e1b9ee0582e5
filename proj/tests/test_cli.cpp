#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dprime_app.hpp"

namespace fs = std::filesystem;
using dprime::app::json;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = dprime::app::run(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "dprime_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

} // namespace

TEST(CliCircle, UnitCircle) {
    const Outcome o = run({"circle", "--R", "1", "--omega", "1"});
    ASSERT_EQ(o.code, 0) << o.err;
    const json j = json::parse(o.out);
    EXPECT_EQ(j["schema"], 1);
    EXPECT_EQ(j["command"], "circle");
    EXPECT_NEAR(j["k_star"].get<double>(), 2.20077003059412152399, 1e-12);
    EXPECT_NEAR(j["lambda1"].get<double>(), -4.84338872756125058871, 1e-11);
    EXPECT_TRUE(j["bracket"]["holds"].get<bool>());
    EXPECT_TRUE(j["indicator_bound"]["holds"].get<bool>());
    EXPECT_LE(j["transmission"]["jump_condition"].get<double>(), 1e-10 * j["transmission"]["scale"].get<double>());
}

TEST(CliCircle, LimitsOfTheRadius) {
    const json big = json::parse(run({"circle", "--R", "1e6", "--omega", "1"}).out);
    EXPECT_LE(std::abs(big["lambda1"].get<double>() + 4.0), 1e-3);
    const json small = json::parse(run({"circle", "--R", "0.01", "--omega", "1"}).out);
    EXPECT_LE(small["lambda1"].get<double>(), -200.0);
}

TEST(CliCircle, CsvFormat) {
    const Outcome o = run({"circle", "--R", "2", "--format", "csv"});
    ASSERT_EQ(o.code, 0);
    std::istringstream is(o.out);
    std::string header, row;
    std::getline(is, header);
    std::getline(is, row);
    EXPECT_EQ(header.rfind("R,omega,k_star,lambda1,residual", 0), 0u);
    EXPECT_EQ(row.rfind("2,1,2.0492663877530", 0), 0u) << row;
}

TEST(CliSweep, IncreasingEigenvalues) {
    const Outcome o = run({"sweep", "--omega", "1", "--r-min", "0.1", "--r-max", "100", "--r-count", "40"});
    ASSERT_EQ(o.code, 0) << o.err;
    const json j = json::parse(o.out);
    EXPECT_TRUE(j["lambda1_increasing"].get<bool>());
    EXPECT_TRUE(j["k_star_decreasing"].get<bool>());
    ASSERT_EQ(j["rows"].size(), 40u);
    EXPECT_DOUBLE_EQ(j["rows"][0]["R"].get<double>(), 0.1);
    EXPECT_DOUBLE_EQ(j["rows"][39]["R"].get<double>(), 100.0);
    EXPECT_EQ(run({"sweep", "--radii", "2", "1"}).code, 1);
}

TEST(CliBound, EllipseQuotientIsNegative) {
    const fs::path profiles = scratch("profiles.csv");
    const Outcome o = run({"bound", "--contour", "ellipse", "--aspect", "2", "--profile-out", profiles.string(),
                           "--grid", "64"});
    ASSERT_EQ(o.code, 0) << o.err;
    const json j = json::parse(o.out);
    EXPECT_LT(j["domain_quotient"]["quotient"].get<double>(), 0.0);
    EXPECT_TRUE(j["ordered"].get<bool>());
    EXPECT_GT(j["margin"].get<double>(), 0.2);
    EXPECT_NEAR(j["in_radius"].get<double>(), 0.64852339241014240057, 1e-6);
    const std::string csv = slurp(profiles);
    EXPECT_EQ(csv.rfind("side,t,A,L\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 65);
}

TEST(CliFem, SingleSolveWithExports) {
    const fs::path mesh = scratch("mesh.txt"), eig = scratch("eig.csv");
    const Outcome o = run({"fem", "--h", "0.08", "--R_out", "4", "--mesh-out", mesh.string(), "--eigen-out",
                           eig.string()});
    ASSERT_EQ(o.code, 0) << o.err;
    const json j = json::parse(o.out);
    EXPECT_LT(j["lambda1"].get<double>(), 0.0);
    EXPECT_EQ(j["eigenvalues_below"], 1);
    EXPECT_EQ(slurp(mesh).rfind("dprime-mesh 1\n", 0), 0u);
    EXPECT_EQ(slurp(eig).rfind("node,x,y,side,value\n", 0), 0u);
}

TEST(CliFem, ConvergenceTableErrorsDecrease) {
    const Outcome o = run({"fem", "--h-list", "0.08", "0.04", "--R_out", "5", "--format", "csv"});
    ASSERT_EQ(o.code, 0) << o.err;
    std::istringstream is(o.out);
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "h,R_out,lambda1,error,observed_order,nodes");
    std::vector<double> errors;
    while (std::getline(is, line)) {
        std::stringstream ss(line);
        std::string f;
        for (int i = 0; i < 4; ++i) std::getline(ss, f, ',');
        errors.push_back(std::stod(f));
    }
    ASSERT_EQ(errors.size(), 2u);
    EXPECT_LT(errors[1], errors[0]);
}

TEST(CliVerify, CircleFamilyPasses) {
    const fs::path cfg = scratch("family.json");
    std::ofstream(cfg) << R"({"family": [{"type": "circle"}, {"type": "ellipse", "aspect": 1.5}], "h": 0.08})";
    const Outcome o = run({"verify-theorem", "--config", cfg.string()});
    ASSERT_EQ(o.code, 0) << o.err;
    const json j = json::parse(o.out);
    EXPECT_TRUE(j["all_passed"].get<bool>());
    ASSERT_EQ(j["contours"].size(), 2u);
    const json& circle = j["contours"][0];
    EXPECT_NEAR(circle["domain_bound"].get<double>(), circle["lambda1_circle"].get<double>(), 1e-6);
}

TEST(CliVerify, ImpossibleSlackFailsWithCodeThree) {
    const fs::path cfg = scratch("strict.json");
    std::ofstream(cfg) << R"({"family": [{"type": "circle"}], "h": 0.08, "refine": false, "fem_slack": 1e-12})";
    // A coarse P1 value lies above the bound, so a vanishing slack must fail.
    const Outcome o = run({"verify-theorem", "--config", cfg.string()});
    EXPECT_EQ(o.code, 3);
    EXPECT_FALSE(json::parse(o.out)["all_passed"].get<bool>());
}

TEST(CliConfig, FileWinsWithWarning) {
    const fs::path cfg = scratch("circle.json");
    std::ofstream(cfg) << R"({"R": 2.0, "omega": 1.0})";
    const Outcome o = run({"circle", "--R", "1", "--config", cfg.string()});
    ASSERT_EQ(o.code, 0);
    EXPECT_NE(o.err.find("warning"), std::string::npos);
    EXPECT_DOUBLE_EQ(json::parse(o.out)["R"].get<double>(), 2.0);
}

TEST(CliConfig, ErrorsMapToCodeOne) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"circle", "--R", "-1"}).code, 1);
    EXPECT_EQ(run({"circle", "--R", "abc"}).code, 1);
    EXPECT_EQ(run({"bound", "--contour", "triangle"}).code, 1);
    EXPECT_EQ(run({"circle", "--format", "xml"}).code, 1);
    EXPECT_EQ(run({"nonsense"}).code, 1);
    const fs::path bad = scratch("bad.json");
    std::ofstream(bad) << "{ not json";
    EXPECT_EQ(run({"circle", "--config", bad.string()}).code, 1);
    const fs::path wrong = scratch("wrong.json");
    std::ofstream(wrong) << R"({"command": "sweep"})";
    EXPECT_EQ(run({"circle", "--config", wrong.string()}).code, 1);
    EXPECT_EQ(run({"fem", "--h", "0.5"}).code, 1);
}

TEST(CliConfig, NumericFailureMapsToCodeTwo) {
    // An unreachable eigen residual exhausts the iteration budget.
    const Outcome o = run({"fem", "--h", "0.09", "--R_out", "3", "--fem-tol", "1e-300"});
    EXPECT_EQ(o.code, 2) << o.out;
    EXPECT_NE(o.err.find("numeric failure"), std::string::npos);
}

TEST(CliHelp, DocumentsCsvColumnsAndExitsCleanly) {
    const Outcome o = run({"--help"});
    EXPECT_EQ(o.code, 0);
    EXPECT_NE(o.out.find("CSV columns"), std::string::npos);
    EXPECT_NE(o.out.find("verify-theorem"), std::string::npos);
}

TEST(CliDeterminism, ByteIdenticalReruns) {
    for (const std::vector<std::string>& args :
         {std::vector<std::string>{"circle", "--R", "0.7", "--omega", "2"},
          std::vector<std::string>{"sweep", "--r-count", "12"},
          std::vector<std::string>{"bound", "--contour", "perturbed", "--mode", "3"},
          std::vector<std::string>{"fem", "--contour", "ellipse", "--h", "0.09", "--R_out", "3.5"}}) {
        const Outcome a = run(args), b = run(args);
        ASSERT_EQ(a.code, 0) << a.err;
        EXPECT_EQ(a.out, b.out);
    }
}

TEST(CliBinary, RunsAsProcess) {
    const fs::path out = scratch("binary.json");
    const std::string cmd = std::string(DPRIME_CLI_PATH) + " circle --R 1 --output " + out.string();
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_EQ(json::parse(slurp(out))["schema"], 1);
    const std::string bad = std::string(DPRIME_CLI_PATH) + " circle --R -3 2>/dev/null";
    const int status = std::system(bad.c_str());
    EXPECT_EQ(WEXITSTATUS(status), 1);
}
