#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "nftgraph/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = nftgraph::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path work() {
    auto dir = fs::temp_directory_path() / "nftgraph_cli_tests";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("usage errors and help") {
    CHECK(cli({}).code == 1);
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({"metrics"}).code == 1);
    CHECK(cli({"frobnicate"}).code == 1);
    CHECK(cli({"metrics", "--input", "x.csv", "--granularity", "fortnight"}).code == 1);
    CHECK(cli({"stats", "--input", (work() / "missing.csv").string()}).code == 2);
}

TEST_CASE("fixture, build, stats and metrics pipeline") {
    const auto dir = work();
    const auto csv = (dir / "fx.csv").string(), ledger = (dir / "fx.json").string(), cache = (dir / "fx.lglb").string();
    REQUIRE(cli({"fixture", "--scale", "1500", "--seed", "4", "--output", csv, "--ledger", ledger}).code == 0);
    const auto truth = json::parse(slurp(ledger));
    REQUIRE(cli({"build", "--input", csv, "--cache", cache}).code == 0);

    const auto from_csv = cli({"stats", "--input", csv});
    const auto from_cache = cli({"stats", "--input", cache});
    REQUIRE(from_csv.code == 0);
    const auto a = json::parse(from_csv.out), b = json::parse(from_cache.out);
    CHECK(a["graph"]["digest"] == b["graph"]["digest"]);
    CHECK(a["graph"]["edges"] == truth["edges"]);
    CHECK(a["mint_nodes"] == truth["mint_nodes"]);

    const auto out1 = dir / "m1", out2 = dir / "m2";
    const auto m1 = cli({"metrics", "--input", cache, "--out-dir", out1.string(), "--granularity", "quarter"});
    const auto m2 = cli({"metrics", "--input", cache, "--out-dir", out2.string(), "--granularity", "quarter"});
    REQUIRE(m1.code == 0);
    auto r1 = json::parse(m1.out), r2 = json::parse(m2.out);
    r1.erase("config");
    r2.erase("config");
    CHECK(r1 == r2);
    for (const char* f : {"metrics.csv", "fig1a_nodes.csv", "fig1d_degree.csv", "fig2c_mutual_days.csv",
                          "fig7a_holdings.csv", "fig9a_tea.csv", "fig9b_tet.csv"}) {
        CHECK(fs::exists(out1 / f));
        CHECK(slurp(out1 / f) == slurp(out2 / f));
    }
    const auto report = json::parse(m1.out);
    CHECK(report["config"]["granularity"] == "quarter");
    CHECK(report["periods"].size() > 1);
}

TEST_CASE("anomaly and csm subcommands report the planted structures") {
    const auto dir = work();
    const auto csv = (dir / "fx2.csv").string(), ledger = (dir / "fx2.json").string();
    REQUIRE(cli({"fixture", "--scale", "1200", "--output", csv, "--ledger", ledger}).code == 0);
    const auto an = cli({"anomaly", "--input", csv});
    REQUIRE(an.code == 0);
    std::istringstream lines(an.out);
    std::string line;
    std::size_t suspicious = 0, bots = 0;
    json summary;
    while (std::getline(lines, line)) {
        auto j = json::parse(line);
        if (j["type"] == "suspicious_pair") ++suspicious;
        if (j["type"] == "bot") ++bots;
        if (j["type"] == "summary") summary = j;
    }
    CHECK(suspicious == 10);
    CHECK(bots == 1);
    CHECK(summary["flagged_pairs"] == 10);

    const auto out = (dir / "csm.csv").string();
    REQUIRE(cli({"csm", "--input", csv, "--dedup", "--queries", "p1", "p2", "--output", out}).code == 0);
    const auto text = slurp(out);
    CHECK(text.rfind("query,matches,elapsed_ms,timed_out\np1,7,", 0) == 0);
    const auto side = json::parse(slurp(out + ".json"));
    CHECK(side["queries"][0]["mappings"] == 21);
}

TEST_CASE("ingest, export-ml and eval subcommands") {
    const auto dir = work();
    const auto raw = (dir / "raw.csv").string(), norm = (dir / "norm.csv").string(), exp = (dir / "exp.json").string();
    REQUIRE(cli({"fixture", "--raw", "--valid", "300", "--erc20", "20", "--duplicates", "7", "--malformed", "5",
                 "--output", raw, "--ledger", exp})
                .code == 0);
    const auto ing = cli({"ingest", "--input", raw, "--output", norm, "--now", "2000000000"});
    REQUIRE(ing.code == 0);
    const auto expected = json::parse(slurp(exp))["expected_stats"];
    CHECK(json::parse(ing.out)["stats"] == expected);

    const auto ml = dir / "ml";
    fs::remove_all(ml);
    REQUIRE(cli({"export-ml", "--input", norm, "--granularity", "month", "--negatives", "3", "--out-dir", ml.string()})
                .code == 0);
    CHECK(fs::exists(ml / "series.json"));
    CHECK(cli({"export-ml", "--input", norm, "--split", "random", "--out-dir", ml.string()}).code == 1);

    const auto scores = dir / "scores.csv";
    {
        std::ofstream s(scores);
        s << "positive_id,pos";
        for (int i = 0; i < 100; ++i) s << ",n" << i;
        s << "\n0,0.5";
        for (int i = 0; i < 100; ++i) s << ',' << (i < 2 ? 0.9 : 0.1);
        s << '\n';
    }
    const auto ev = cli({"eval", "--scores", scores.string()});
    REQUIRE(ev.code == 0);
    const auto r = json::parse(ev.out);
    CHECK(r["auc"] == 0.98);
    CHECK(r["mrr"] == 0.333333333);
}

TEST_CASE("round9 keeps nine significant digits") {
    CHECK(nftgraph::cli::round9(1.0 / 3.0) == 0.333333333);
    CHECK(nftgraph::cli::round9(123456789.123) == 123456789.0);
    CHECK(nftgraph::cli::round9(0.98) == 0.98);
}
