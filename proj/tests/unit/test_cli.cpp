#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "inflscope/cli.hpp"
#include "support.hpp"

using namespace inflscope;
using namespace testing;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

/// Synthetic fixtures shared by every test in this file.
const TempDir& fixtures() {
    static TempDir dir;
    static const bool written = [] {
        const auto r = invoke({"synth", "--out", dir.file("data")});
        REQUIRE(r.code == 0);
        return true;
    }();
    (void)written;
    return dir;
}

std::string data(const std::string& name) { return fixtures().file("data/" + name); }

nlohmann::json manifest_of(const std::string& dir) {
    return nlohmann::json::parse(slurp(fs::path(dir) / "manifest.json"));
}

/// Every file below `dir` except the manifest, keyed by relative path.
std::map<std::string, std::string> outputs_of(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() != "manifest.json")
            out[fs::relative(e.path(), dir).string()] = slurp(e.path());
    return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("synth writes every fixture") {
    for (const char* f : {"cpi.csv", "equity.csv", "rank_perturbation.csv", "sector_returns.csv", "sector_map.csv",
                          "asset_returns.csv", "shifted_slopes.csv", "portfolio_instances.json"})
        CHECK(fs::exists(data(f)));
    CHECK(manifest_of(fixtures().file("data"))["status"] == "complete");
}

TEST_CASE("trajectory on the synthetic panel") {
    TempDir tmp;
    const auto r = invoke({"trajectory", "--cpi", data("cpi.csv"), "--out", tmp.file("t"), "--clusters", "3",
                           "--eigenvectors"});
    REQUIRE(r.code == 0);
    for (const char* f : {"distance_matrix.csv", "dendrogram.json", "spectrum.csv", "similarity.json",
                          "eigenvectors.csv", "clusters.json"})
        CHECK(fs::exists(tmp.file("t/") + f));
    const auto m = manifest_of(tmp.file("t"));
    CHECK(m["status"] == "complete");
    CHECK(m["command"] == "trajectory");
    CHECK(m["inputs"]["cpi"]["sha256"].get<std::string>().size() == 64);
    CHECK(m["parameters"]["delta"] == 2.5);
    CHECK(m["outputs"].size() == 6);
}

TEST_CASE("configuration errors exit 2") {
    TempDir tmp;
    CHECK(invoke({"trajectory", "--cpi", tmp.file("missing.csv"), "--out", tmp.file("t")}).code == 2);
    CHECK(invoke({"trajectory", "--out", tmp.file("t")}).code == 2);
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"frobnicate"}).code == 2);
    const auto delta = invoke({"trajectory", "--cpi", data("cpi.csv"), "--out", tmp.file("t"), "--delta", "0"});
    CHECK(delta.code == 2);
    CHECK(delta.err.find("threshold must be positive") != std::string::npos);
    CHECK(invoke({"trajectory", "--cpi", data("cpi.csv"), "--out", tmp.file("t"), "--linkage", "ward"}).code == 2);
    CHECK(invoke({"optimize", "--asset-returns", data("asset_returns.csv"), "--out", tmp.file("o"),
                  "--core-weight", "0.95"})
              .code == 2);
    const auto version = invoke({"--version"});
    CHECK(version.code == 0);
    CHECK(version.out.find("0.1.0") != std::string::npos);
}

TEST_CASE("data errors exit 3") {
    TempDir tmp;
    const auto r = invoke({"centrality", "--cpi", data("cpi.csv"), "--out", tmp.file("c"), "--window", "800"});
    CHECK(r.code == 3);
    CHECK(r.err.find("--window") != std::string::npos);
    const auto bad = tmp.write("bad.csv", "date,A\n2000-01,1\n2000-02,-1\n2000-03,2\n");
    CHECK(invoke({"trajectory", "--cpi", bad, "--out", tmp.file("t")}).code == 3);
}

TEST_CASE("misaligned robustness inputs exit 3") {
    TempDir tmp;
    std::string cpi = "date,X\n", eq = "date,X\n";
    for (int k = 0; k < 40; ++k) {
        cpi += Date{1990, 1, 1}.add_months(k).iso(false) + "," + std::to_string(100 + k) + "\n";
        eq += Date{2000, 1, 1}.add_months(k).iso(false) + "," + std::to_string(50 + k % 7) + "\n";
    }
    const auto r = invoke({"robustness", "--cpi", tmp.write("cpi.csv", cpi), "--equity-index",
                           tmp.write("eq.csv", eq), "--out", tmp.file("r")});
    CHECK(r.code == 3);
}

TEST_CASE("robustness skips the quarterly series with a warning") {
    TempDir tmp;
    const auto r = invoke({"robustness", "--cpi", data("cpi.csv"), "--equity-index", data("equity.csv"), "--out",
                           tmp.file("r")});
    REQUIRE(r.code == 0);
    CHECK(r.err.find("warning:") != std::string::npos);
    CHECK(r.err.find("Australia") != std::string::npos);
    const std::string csv = slurp(tmp.file("r/robustness.csv"));
    CHECK(csv.rfind("entity,ER,n_extreme,n_stable,mean_discrepancy\n", 0) == 0);
    CHECK(csv.find("Australia") == std::string::npos);
    CHECK(fs::exists(tmp.file("r/samples/Japan.csv")));
}

TEST_CASE("sector correlation warns about a single-member sector") {
    TempDir tmp;
    const auto r = invoke({"sectorcorr", "--sector-returns", data("sector_returns.csv"), "--sector-map",
                           data("sector_map.csv"), "--out", tmp.file("s")});
    REQUIRE(r.code == 0);
    CHECK(r.err.find("single member") != std::string::npos);
    const std::string summary = slurp(tmp.file("s/sector_summary.csv"));
    CHECK(summary.rfind("sector,mu,S_n,n_windows\n", 0) == 0);
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 5);
}

TEST_CASE("optimize with defaults") {
    TempDir tmp;
    const auto r = invoke({"optimize", "--asset-returns", data("asset_returns.csv"), "--out", tmp.file("o"),
                           "--sweep", "0.3,0.9"});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(tmp.file("o/weights.csv")));
    CHECK(slurp(tmp.file("o/weight_stats.csv")).rfind("asset,mean_weight,weight_variance\n", 0) == 0);
    CHECK(slurp(tmp.file("o/sweep.csv")).find("infeasible") != std::string::npos);
    const auto m = manifest_of(tmp.file("o"));
    CHECK(m["parameters"]["core_weight"] == 0.4);
    CHECK(m["parameters"]["window"] == 250);
    CHECK(m["inputs"].contains("asset_returns"));
}

TEST_CASE("centrality with a split") {
    TempDir tmp;
    const auto r = invoke({"centrality", "--cpi", data("cpi.csv"), "--out", tmp.file("c"), "--split", "1990-01"});
    REQUIRE(r.code == 0);
    for (const char* f : {"slopes.csv", "offsets.csv", "offsets_signed.csv", "centrality.json",
                          "offsets_dendrogram.json", "centrality_before.json", "centrality_after.json"})
        CHECK(fs::exists(tmp.file("c/") + f));
    const auto j = nlohmann::json::parse(slurp(tmp.file("c/centrality.json")));
    CHECK(j["model"] == "M1");
    CHECK(j["ranking"].size() == 8);
}

TEST_CASE("the manifest is written before the analysis") {
    TempDir tmp;
    // The split is only rejected after the run directory exists.
    const auto r = invoke({"centrality", "--cpi", data("cpi.csv"), "--out", tmp.file("c"), "--split", "1950-01"});
    CHECK(r.code == 3);
    const auto m = manifest_of(tmp.file("c"));
    CHECK(m["status"] == "running");
    CHECK(m["command"] == "centrality");
}

TEST_CASE("config files set defaults and command-line values win") {
    TempDir tmp;
    const auto bad = tmp.write("bad.ini", "delta=0\n");
    const auto cfg = tmp.write("run.ini", "# trajectory defaults\ncpi=" + data("cpi.csv") + "\ndelta=0.3\nlinkage=single\n");
    const auto unknown = tmp.write("unknown.ini", "bogus=1\n");
    CHECK(invoke({"trajectory", "--config", bad, "--cpi", data("cpi.csv"), "--out", tmp.file("a")}).code == 2);
    CHECK(invoke({"trajectory", "--config", bad, "--cpi", data("cpi.csv"), "--out", tmp.file("b"), "--delta", "1"})
              .code == 0);
    CHECK(manifest_of(tmp.file("b"))["parameters"]["delta"] == 1.0);
    REQUIRE(invoke({"--config", cfg, "trajectory", "--out", tmp.file("c")}).code == 0);
    const auto m = manifest_of(tmp.file("c"));
    CHECK(m["parameters"]["delta"] == 0.3);
    CHECK(m["parameters"]["linkage"] == "single");
    CHECK(invoke({"trajectory", "--config", unknown, "--cpi", data("cpi.csv"), "--out", tmp.file("d")}).code == 2);
}

TEST_CASE("repeated runs are byte-identical apart from the manifest") {
    TempDir tmp;
    for (const char* dir : {"a", "b"}) {
        REQUIRE(invoke({"trajectory", "--cpi", data("cpi.csv"), "--out", tmp.file(std::string(dir) + "/t")}).code ==
                0);
        REQUIRE(invoke({"centrality", "--cpi", data("cpi.csv"), "--out", tmp.file(std::string(dir) + "/c")}).code ==
                0);
    }
    const auto a = outputs_of(tmp.file("a")), b = outputs_of(tmp.file("b"));
    CHECK(a.size() == 9);
    CHECK(a == b);
    CHECK(manifest_of(tmp.file("a/t"))["inputs"] == manifest_of(tmp.file("b/t"))["inputs"]);
}

TEST_CASE("report summarises completed runs") {
    TempDir tmp;
    REQUIRE(invoke({"trajectory", "--cpi", data("cpi.csv"), "--out", tmp.file("t"), "--delta", "0.3"}).code == 0);
    REQUIRE(invoke({"centrality", "--cpi", data("cpi.csv"), "--out", tmp.file("c")}).code == 0);
    REQUIRE(invoke({"report", "--run", tmp.file("t"), "--run", tmp.file("c"), "--out", tmp.file("rep")}).code == 0);
    const std::string md = slurp(tmp.file("rep/report.md"));
    CHECK(md.find(manifest_of(tmp.file("t"))["inputs"]["cpi"]["sha256"].get<std::string>()) != std::string::npos);
    CHECK(md.find("Australia") != std::string::npos);
    CHECK(md.find(tmp.path().string()) == std::string::npos);
    CHECK(invoke({"report", "--run", tmp.file("nothing"), "--out", tmp.file("rep2")}).code == 2);
}

}
