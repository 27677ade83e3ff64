#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "nftgraph/mlbench.hpp"
#include "support.hpp"

using namespace nftgraph;
using testing::error_of;
using testing::transfer;
namespace fs = std::filesystem;

namespace {

constexpr Timestamp kJan1 = 1609459200;  // 2021-01-01

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// Day 0: node 1 trades with nodes 3..22; day 1: the single pair 1 -> 2.
std::vector<TransferEvent> star_then_pair() {
    std::vector<TransferEvent> evs;
    std::uint64_t seq = 0;
    for (std::uint32_t v = 3; v <= 22; ++v) evs.push_back(transfer(1, v, kJan1 + static_cast<Timestamp>(v), seq, seq)), ++seq;
    evs.push_back(transfer(1, 2, kJan1 + 86400 + 5, seq, seq));
    return evs;
}

}  // namespace

TEST_CASE("split protocols") {
    for (std::size_t t : {1u, 4u, 5u, 7u, 10u, 23u}) {
        const auto plan = make_split(t, SplitMode::Fixed);
        std::size_t test = 0;
        for (auto r : plan.roles) test += r == Role::Test;
        CHECK(test == (t + 4) / 5);
        for (std::size_t i = 0; i < t; ++i) CHECK((plan.roles[i] == Role::Test) == (i >= t - test));
    }
    const auto nf = make_split(10, SplitMode::NodeFixed);
    CHECK(std::count(nf.roles.begin(), nf.roles.end(), Role::Train) == 8);
    CHECK(nf.roles[8] == Role::Val);
    CHECK(nf.roles[9] == Role::Test);
    const auto live = make_split(4, SplitMode::LiveUpdate);
    CHECK(live.roles[0] == Role::Train);
    CHECK(live.roles[3] == Role::Test);
    CHECK(parse_split_mode("live_update") == SplitMode::LiveUpdate);
    CHECK_FALSE(parse_split_mode("random"));
}

TEST_CASE("trader class thresholds are right-closed") {
    CHECK(classify_gap(86400) == TraderClass::Daily);
    CHECK(classify_gap(86401) == TraderClass::Weekly);
    CHECK(classify_gap(7 * 86400) == TraderClass::Weekly);
    CHECK(classify_gap(7 * 86400 + 1) == TraderClass::Monthly);
    CHECK(classify_gap(30 * 86400) == TraderClass::Monthly);
    CHECK(classify_gap(30 * 86400 + 1) == TraderClass::Yearly);
    CHECK(classify_gap(365 * 86400) == TraderClass::Yearly);
    CHECK(classify_gap(365 * 86400 + 1) == TraderClass::Remaining);
}

TEST_CASE("trader labels use the largest gap and ignore Null-incident transfers") {
    const std::vector<TransferEvent> evs{transfer(0, 1, kJan1, 1, 0), transfer(1, 2, kJan1 + 10, 1, 1),
                                         transfer(2, 1, kJan1 + 10 + 86400, 1, 2),
                                         transfer(1, 0, kJan1 + 10 + 86400 * 3, 1, 3)};
    const auto labels = trader_labels(build_graph(evs));
    REQUIRE(labels.size() == 2);
    CHECK(labels[0].address == testing::addr(1));
    CHECK(labels[0].max_gap == 86400);
    CHECK(labels[0].cls == TraderClass::Daily);
    CHECK(labels[0].transactions == 2);
    for (const auto& l : trader_labels(build_graph(evs), false))
        if (l.address == testing::addr(1)) CHECK(l.cls == TraderClass::Weekly);
}

TEST_CASE("ranking arithmetic") {
    std::vector<double> negs(100, 0.1);
    negs[0] = 0.9;
    negs[1] = 0.8;
    const auto [auc, rr] = score_record(0.5, negs);
    CHECK(auc == doctest::Approx(0.98).epsilon(1e-15));
    CHECK(rr == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    const std::vector<double> ties{0.5, 0.5};
    const auto [tauc, trr] = score_record(0.5, ties);
    CHECK(tauc == 0.5);
    CHECK(trr == 0.5);
}

TEST_CASE("score files") {
    std::istringstream link("positive_id,pos,n1,n2\n0,0.9,0.1,0.95\n1,0.9,0.1,0.2\n");
    const auto r = eval_scores(link, MlTask::Link);
    CHECK(r.records == 2);
    CHECK(r.k == 2);
    CHECK(r.auc == doctest::Approx(0.75));
    CHECK(r.mrr == doctest::Approx(0.75));
    std::istringstream node("node_id,true_label,predicted_label\n1,daily,daily\n2,daily,weekly\n3,weekly,weekly\n");
    const auto n = eval_scores(node, MlTask::Node);
    CHECK(n.accuracy == doctest::Approx(2.0 / 3.0));
    CHECK(n.recall_by_class.at("daily") == 0.5);
    CHECK(n.macro_recall == doctest::Approx(0.75));

    std::istringstream ragged("0,0.9,0.1\n1,0.9,0.1,0.2\n");
    CHECK(error_of([&] { eval_scores(ragged, MlTask::Link); }) == ErrorCode::BadRecord);
    std::istringstream nan("0,nan,0.1\n");
    CHECK(error_of([&] { eval_scores(nan, MlTask::Link); }) == ErrorCode::BadRecord);
    std::istringstream empty("positive_id,pos,n1\n");
    CHECK(error_of([&] { eval_scores(empty, MlTask::Link); }) == ErrorCode::BadRecord);
}

TEST_CASE("snapshots partition the kept edges") {
    Rng rng(4);
    auto evs = testing::random_events(rng, 30, 400, kJan1, 86400 * 90);
    evs.push_back(transfer(0, 1, kJan1 + 5, 99999, 99999));
    testing::sort_events(evs);
    const auto g = build_graph(evs);
    const auto s = build_snapshots(g, Granularity::Week);
    CHECK(s.kept.size() == 400);
    std::size_t covered = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(s.snapshots[i].begin == covered);
        covered = s.snapshots[i].end_offset;
        if (i > 0) CHECK(s.snapshots[i].period == s.snapshots[i - 1].period + 1);
        for (auto e : s.period_edges(i)) {
            CHECK(g.edges()[e].ts >= s.snapshots[i].start);
            CHECK(g.edges()[e].ts < s.snapshots[i].end);
        }
    }
    CHECK(covered == s.kept.size());
}

TEST_CASE("negative samples respect exclusions") {
    Rng rng(12);
    const auto g = build_graph(testing::random_events(rng, 40, 500, kJan1, 86400 * 20));
    const auto s = build_snapshots(g, Granularity::Day);
    for (std::size_t i = 1; i < s.size(); ++i) {
        const auto nodes = s.nodes_by(i);
        const std::set<NodeId> present(nodes.begin(), nodes.end());
        NegativeSamples ns;
        try {
            ns = sample_negatives(s, i, 5, 77);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InsufficientNodes);
            continue;
        }
        const auto again = sample_negatives(s, i, 5, 77);
        CHECK(again.negatives == ns.negatives);
        std::map<NodeId, std::set<NodeId>> targets;
        for (auto [u, v] : ns.positives) targets[u].insert(v);
        for (std::size_t p = 0; p < ns.positives.size(); ++p) {
            const auto [u, v] = ns.positives[p];
            const auto& negs = ns.negatives[p];
            CHECK(negs.size() == 5);
            CHECK(std::set<NodeId>(negs.begin(), negs.end()).size() == 5);
            for (auto w : negs) {
                CHECK(present.count(w));
                CHECK(w != u);
                CHECK(w != v);
                CHECK_FALSE(targets[u].count(w));
            }
        }
    }
}

TEST_CASE("negative targets are uniform over eligible nodes") {
    const auto g = build_graph(star_then_pair());
    const auto s = build_snapshots(g, Granularity::Day);
    REQUIRE(s.size() == 2);
    std::map<NodeId, int> counts;
    const int draws = 20000;
    for (int seed = 0; seed < draws; ++seed) {
        const auto ns = sample_negatives(s, 1, 1, static_cast<std::uint64_t>(seed));
        REQUIRE(ns.negatives.size() == 1);
        ++counts[ns.negatives[0][0]];
    }
    CHECK(counts.size() == 20);  // nodes 3..22
    double chi2 = 0;
    const double expected = draws / 20.0;
    for (auto [node, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 43.82);  // p = 0.001 with 19 degrees of freedom
    CHECK(error_of([&] { sample_negatives(s, 1, 21, 1); }) == ErrorCode::InsufficientNodes);
    CHECK(sample_negatives(s, 1, 20, 1).negatives[0].size() == 20);
}

TEST_CASE("early stopping mask size") {
    for (std::size_t n : {0u, 1u, 9u, 10u, 15u, 1234u}) {
        const auto m = early_stop_mask(n, 5);
        CHECK(m.size() == n);
        CHECK(static_cast<std::size_t>(std::count(m.begin(), m.end(), 1)) == static_cast<std::size_t>(std::llround(0.1 * n)));
    }
}

TEST_CASE("feature exports are complete and reproducible") {
    Rng rng(21);
    const auto g = build_graph(testing::random_events(rng, 60, 800, kJan1, 86400 * 10));
    const auto s = build_snapshots(g, Granularity::Day);
    const auto dir = fs::temp_directory_path() / "nftgraph_export_tests";
    fs::remove_all(dir);
    ExportOptions opt;
    opt.negatives = 5;
    const auto a = export_features(s, dir / "a", opt);
    const auto b = export_features(s, dir / "b", opt);
    CHECK(a.snapshots == s.size());
    const auto roles = make_split(s.size(), SplitMode::Fixed).roles;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%04zu", i);
        CHECK(fs::exists(dir / "a" / name / "edges.csv"));
        CHECK(fs::exists(dir / "a" / name / "manifest.json"));
        CHECK(fs::exists(dir / "a" / name / "negatives.csv") == (roles[i] != Role::Train));
        CHECK(slurp(dir / "a" / name / "edges.csv") == slurp(dir / "b" / name / "edges.csv"));
        if (roles[i] != Role::Train)
            CHECK(slurp(dir / "a" / name / "negatives.csv") == slurp(dir / "b" / name / "negatives.csv"));
        for (const auto& f : edge_features(s, i)) CHECK(f.tx_count >= 1);
    }
    CHECK(slurp(dir / "a" / "addresses.csv") == slurp(dir / "b" / "addresses.csv"));

    opt.task = MlTask::Node;
    opt.split = SplitMode::LiveUpdate;
    export_features(s, dir / "c", opt);
    CHECK(fs::exists(dir / "c" / "snapshot_0001" / "early_stop.csv"));
    const auto nodes = slurp(dir / "c" / "snapshot_0000" / "nodes.csv");
    CHECK(nodes.rfind("address_id,degree,label\n", 0) == 0);
}
