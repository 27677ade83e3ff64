#include <map>
#include <set>

#include "doctest.h"
#include "nftgraph/anomaly.hpp"
#include "support.hpp"

using namespace nftgraph;
using testing::addr;
using testing::transfer;

namespace {

constexpr Timestamp kT0 = 1609459200;

struct OraclePair {
    Timestamp interval;
    std::uint64_t between;
};

/// Quadratic scan over every pair of opposing transfers.
std::map<std::pair<Address, Address>, OraclePair> oracle_simultaneous(const std::vector<TransferEvent>& evs,
                                                                      Timestamp threshold) {
    std::map<std::pair<Address, Address>, OraclePair> out;
    for (std::size_t i = 0; i < evs.size(); ++i)
        for (std::size_t j = 0; j < evs.size(); ++j) {
            const auto &x = evs[i], &y = evs[j];
            if (x.from == x.to || x.from == kNullAddress || x.to == kNullAddress) continue;
            if (!(x.from < x.to) || y.from != x.to || y.to != x.from) continue;
            const Timestamp gap = std::llabs(x.timestamp - y.timestamp);
            auto [it, fresh] = out.try_emplace({x.from, x.to}, OraclePair{gap, 0});
            if (!fresh) it->second.interval = std::min(it->second.interval, gap);
        }
    for (auto it = out.begin(); it != out.end();) {
        if (it->second.interval > threshold) {
            it = out.erase(it);
            continue;
        }
        for (const auto& e : evs)
            if ((e.from == it->first.first && e.to == it->first.second) ||
                (e.from == it->first.second && e.to == it->first.first))
                ++it->second.between;
        ++it;
    }
    return out;
}

std::map<Address, std::uint64_t> oracle_tx(const std::vector<TransferEvent>& evs) {
    std::map<Address, std::uint64_t> tx;
    for (const auto& e : evs) {
        ++tx[e.from];
        if (e.to != e.from) ++tx[e.to];
    }
    return tx;
}

std::set<std::pair<Address, Address>> flagged_set(const TemporalGraph& g, std::span<const SimultaneousPair> cand,
                                                  SuspicionConfig cfg) {
    std::set<std::pair<Address, Address>> s;
    for (const auto& p : suspicious_pairs(g, cand, cfg)) s.insert({p.address_a, p.address_b});
    return s;
}

}  // namespace

TEST_CASE("simultaneous pairs and rule hits match a quadratic oracle") {
    Rng rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const auto n = static_cast<std::uint32_t>(2 + rng.below(15));
        auto evs = testing::random_events(rng, n, 1 + rng.below(120), kT0, 86400 * 20);
        const Timestamp threshold = static_cast<Timestamp>(rng.below(3 * 86400));
        const auto g = build_graph(evs);
        const auto cand = simultaneous_bidirectional(g, threshold);
        const auto oracle = oracle_simultaneous(evs, threshold);
        REQUIRE(cand.size() == oracle.size());
        const auto tx = oracle_tx(evs);
        const SuspicionConfig cfg{1 + rng.below(8), 0.1 + 0.8 * rng.unit()};
        std::size_t expected_flags = 0;
        for (const auto& p : cand) {
            const auto key = std::make_pair(g.node(p.a).address, g.node(p.b).address);
            REQUIRE(oracle.count(key));
            CHECK(p.interval == oracle.at(key).interval);
            const auto ta = tx.at(key.first), tb = tx.at(key.second), between = oracle.at(key).between;
            const bool low = ta < cfg.min_tx || tb < cfg.min_tx;
            const bool high = static_cast<double>(between) / static_cast<double>(ta) > cfg.ratio ||
                              static_cast<double>(between) / static_cast<double>(tb) > cfg.ratio;
            if (low || high) ++expected_flags;
        }
        const auto flagged = suspicious_pairs(g, cand, cfg);
        CHECK(flagged.size() == expected_flags);
        for (const auto& p : flagged) {
            CHECK(p.evidence.tx_a == tx.at(p.address_a));
            CHECK(p.evidence.tx_b == tx.at(p.address_b));
            CHECK(p.evidence.between == oracle.at({p.address_a, p.address_b}).between);
            CHECK(p.rule_hits != 0);
        }
    }
}

TEST_CASE("rule thresholds are monotone") {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto evs = testing::random_events(rng, 12, 150, kT0, 86400 * 5);
        const auto g = build_graph(evs);
        const auto cand = simultaneous_bidirectional(g);
        for (std::uint64_t m = 1; m < 10; ++m) {
            const auto lo = flagged_set(g, cand, {m, 2.0});
            const auto hi = flagged_set(g, cand, {m + 1, 2.0});
            CHECK(std::includes(hi.begin(), hi.end(), lo.begin(), lo.end()));
        }
        for (double r = 0.05; r < 1.0; r += 0.1) {
            const auto lo = flagged_set(g, cand, {0, r});
            const auto hi = flagged_set(g, cand, {0, r + 0.1});
            CHECK(std::includes(lo.begin(), lo.end(), hi.begin(), hi.end()));
        }
    }
}

TEST_CASE("simultaneity threshold is inclusive and Null is excluded") {
    std::vector<TransferEvent> evs{transfer(1, 2, kT0, 1, 0), transfer(2, 1, kT0 + 86400, 1, 1),
                                         transfer(0, 3, kT0, 2, 2), transfer(3, 0, kT0 + 1, 2, 3)};
    auto sorted = evs;
    testing::sort_events(sorted);
    const auto g = build_graph(sorted);
    const auto c = simultaneous_bidirectional(g);
    REQUIRE(c.size() == 1);
    CHECK(c[0].interval == 86400);
    CHECK(simultaneous_bidirectional(g, 86399).empty());
    CHECK(simultaneous_bidirectional(g, 86400, true).size() == 2);
    const auto f = suspicious_pairs(g, c);
    REQUIRE(f.size() == 1);
    CHECK(f[0].rule_hits == (kLowActivity | kHighRatio));
    CHECK(f[0].evidence.ratio_a == 1.0);
}

TEST_CASE("bot scan finds sequential token runs") {
    std::vector<TransferEvent> evs;
    std::uint64_t seq = 0;
    for (std::uint64_t t = 1; t <= 120; ++t) evs.push_back(transfer(0, 5, kT0 + 60 * static_cast<Timestamp>(t), t, seq++, 7));
    // a second address with a run of 99 and a slow address with a run of 100
    for (std::uint64_t t = 1; t <= 99; ++t) evs.push_back(transfer(0, 6, kT0 + 60 * static_cast<Timestamp>(t), 1000 + t, seq++, 8));
    for (std::uint64_t t = 1; t <= 100; ++t) evs.push_back(transfer(0, 9, kT0 + 601 * static_cast<Timestamp>(t), 5000 + t, seq++, 9));
    testing::sort_events(evs);
    const auto bots = bot_scan(build_graph(evs));
    REQUIRE(bots.size() == 1);
    CHECK(bots[0].address == addr(5));
    CHECK(bots[0].direction == BotDirection::Incoming);
    CHECK(bots[0].run_length == 120);
    CHECK(bots[0].median_interval_seconds == 60.0);
    CHECK(bots[0].first_token == Uint256(1));
    CHECK(bots[0].last_token == Uint256(120));
    CHECK(bots[0].length_score == 1.2);
    CHECK(bots[0].tempo_score == 10.0);

    BotConfig loose;
    loose.min_run = 99;
    loose.max_median_interval = 601;
    CHECK(bot_scan(build_graph(evs), loose).size() == 3);
}

TEST_CASE("a token id gap splits a run") {
    std::vector<TransferEvent> evs;
    for (std::uint64_t t = 1; t <= 150; ++t)
        evs.push_back(transfer(4, static_cast<std::uint32_t>(100 + t), kT0 + static_cast<Timestamp>(t), t == 80 ? 500 : t, t));
    testing::sort_events(evs);
    const auto bots = bot_scan(build_graph(evs));
    REQUIRE(bots.size() == 0);
    BotConfig cfg;
    cfg.min_run = 70;
    const auto runs = bot_scan(build_graph(evs), cfg);
    REQUIRE(runs.size() == 2);
    CHECK(runs[0].direction == BotDirection::Outgoing);
    CHECK(runs[0].run_length == 79);
    CHECK(runs[1].run_length == 70);
}
