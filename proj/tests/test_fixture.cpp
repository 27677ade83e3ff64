#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "nftgraph/anomaly.hpp"
#include "nftgraph/csm.hpp"
#include "nftgraph/fixture.hpp"
#include "nftgraph/metrics.hpp"
#include "support.hpp"

using namespace nftgraph;

TEST_CASE("planted fixture ledger agrees with the built graph") {
    const auto f = make_fixture({FixtureProfile::Planted, 3, 2000});
    const auto& l = f.ledger;
    CHECK(std::is_sorted(f.events.begin(), f.events.end(), transfer_less));
    const auto g = build_graph(f.events);
    CHECK(g.edge_count() == l.edges);
    CHECK(g.node_count() == l.nodes);
    CHECK(g.token_count() == l.tokens);
    CHECK(g.contract_count() == l.contracts);
    std::uint64_t mint_nodes = 0, mints = 0;
    for (NodeId u = 0; u < g.node_count(); ++u)
        if (!g.is_null(u) && g.node(u).entered_via_mint) ++mint_nodes;
    for (const auto& e : g.edges()) mints += g.is_null(e.src);
    CHECK(mint_nodes == l.mint_nodes);
    CHECK(mints == l.mint_events);

    const auto split = split_stream(g, l.initial_until);
    StreamConfig cfg;
    cfg.dedup_automorphisms = true;
    const std::vector<QueryGraph> p1{builtin_pattern(1)};
    const auto run = run_stream(split.initial, split.stream, p1, cfg);
    CHECK(run[0].deduped == l.wash_cycles.size());
    CHECK(run[0].mappings == 3 * l.wash_cycles.size());

    const auto flagged = suspicious_pairs(g, simultaneous_bidirectional(g));
    std::set<std::pair<Address, Address>> got, want;
    for (const auto& p : flagged) got.insert({p.address_a, p.address_b});
    for (const auto& p : l.simultaneous_pairs)
        if (p.rule_hits) want.insert({p.a, p.b});
    CHECK(got == want);
    for (const auto& p : flagged)
        for (const auto& t : l.simultaneous_pairs)
            if (t.a == p.address_a && t.b == p.address_b) CHECK(p.rule_hits == t.rule_hits);

    std::set<Address> bots;
    for (const auto& b : bot_scan(g)) bots.insert(b.address);
    CHECK(bots == std::set<Address>(l.bots.begin(), l.bots.end()));

    std::map<std::string, std::uint64_t> hist;
    for (const auto& t : trader_labels(g)) ++hist[std::string(to_string(t.cls))];
    CHECK(hist == l.trader_classes);
    const auto labels = trader_labels(g);
    for (const auto& [a, cls] : l.planted_traders) {
        auto it = std::find_if(labels.begin(), labels.end(), [&](const TraderLabel& t) { return t.address == a; });
        REQUIRE(it != labels.end());
        CHECK(it->cls == cls);
    }

    const auto top = holder_stats(g, *g.max_time()).top(10);
    REQUIRE(top.size() == l.top_holders.size());
    for (std::size_t i = 0; i < top.size(); ++i) {
        CHECK(top[i].address == l.top_holders[i].address);
        CHECK(top[i].tokens == l.top_holders[i].tokens);
        CHECK(top[i].collections == l.top_holders[i].collections);
    }
    for (const auto& [a, ts] : l.first_seen) CHECK(g.node(*g.find(a)).first_seen == ts);
}

TEST_CASE("fixtures are pure functions of their options") {
    for (auto p : {FixtureProfile::Uniform, FixtureProfile::Preferential, FixtureProfile::Planted}) {
        const auto a = make_fixture({p, 5, 800});
        const auto b = make_fixture({p, 5, 800});
        const auto c = make_fixture({p, 6, 800});
        CHECK(a.events == b.events);
        CHECK(ledger_json(a.ledger) == ledger_json(b.ledger));
        CHECK(a.events != c.events);
        CHECK(parse_profile(to_string(p)) == p);
    }
    CHECK(make_fixture({FixtureProfile::Uniform, 1, 500}).events.size() == 500);
    CHECK(make_fixture({FixtureProfile::Planted, 1, 0}).events.empty());
    CHECK_FALSE(parse_profile("zipf"));
}

TEST_CASE("preferential profile is heavy-tailed") {
    const auto f = make_fixture({FixtureProfile::Preferential, 1, 10000});
    const auto view = simple_view(build_graph(f.events));
    std::vector<std::size_t> deg;
    for (std::uint32_t u = 0; u < view.node_count(); ++u) deg.push_back(view.total_degree(u));
    std::sort(deg.begin(), deg.end());
    const auto median = deg[deg.size() / 2];
    CHECK(deg.back() >= 10 * std::max<std::size_t>(median, 1));
}

TEST_CASE("scale zero writes a header-only file") {
    std::ostringstream os;
    write_transfer_csv(os, make_fixture({FixtureProfile::Planted, 1, 0}).events);
    CHECK(os.str() == std::string(kTransferCsvHeader) + "\n");
}

TEST_CASE("ledger json carries the planted truth") {
    const auto f = make_fixture({FixtureProfile::Planted, 1, 600});
    const auto j = nlohmann::json::parse(ledger_json(f.ledger));
    CHECK(j["wash_cycles"].size() == 7);
    CHECK(j["edges"] == f.events.size());
    CHECK(j["bot_run_length"] == 150);
}

TEST_CASE("raw fixtures render the same rows for the same seed") {
    RawFixtureSpec spec{40, 5, 3, 4, 3, 6, false};
    std::ostringstream a, b;
    const auto sa = write_raw_fixture(a, spec, 2);
    const auto sb = write_raw_fixture(b, spec, 2);
    CHECK(a.str() == b.str());
    CHECK(sa == sb);
    CHECK(sa.records_read == 40 + 5 + 3 + 1 + 4 + 3 + 6);
    CHECK(sa.balanced());
}
