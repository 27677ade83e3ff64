#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nftgraph/ingest.hpp"
#include "nftgraph/mlbench.hpp"

namespace nftgraph {

enum class FixtureProfile { Uniform, Preferential, Planted };

std::optional<FixtureProfile> parse_profile(std::string_view s);
std::string_view to_string(FixtureProfile p);

struct FixtureOptions {
    FixtureProfile profile = FixtureProfile::Planted;
    std::uint64_t seed = 1;
    std::size_t scale = 10000;  // background transfers; 0 yields an empty file
};

struct PlantedPair {
    Address a;  // a < b
    Address b;
    std::uint8_t rule_hits = 0;  // expected RuleHit bits, 0 for pairs that must not be flagged
};

struct HolderTruth {
    Address address;
    std::uint64_t tokens = 0;
    std::uint64_t collections = 0;
};

/// Ground truth recorded by the generator from its own bookkeeping.
struct FixtureLedger {
    FixtureProfile profile = FixtureProfile::Planted;
    std::uint64_t seed = 0;
    std::size_t scale = 0;

    std::uint64_t nodes = 0;  // including Null when present
    std::uint64_t edges = 0;
    std::uint64_t tokens = 0;
    std::uint64_t contracts = 0;
    std::uint64_t mint_events = 0;
    std::uint64_t mint_nodes = 0;     // first incident transfer is a mint into the node
    std::uint64_t nonmint_nodes = 0;  // all other non-Null nodes

    Timestamp initial_until = 0;  // end of the initial graph for stream experiments
    std::vector<std::array<Address, 3>> wash_cycles;
    std::vector<PlantedPair> simultaneous_pairs;
    std::vector<Address> bots;
    Address bot_contract;
    std::size_t bot_run_length = 0;

    std::map<std::string, std::uint64_t> trader_classes;  // over all nodes, Null-incident transfers ignored
    std::vector<std::pair<Address, TraderClass>> planted_traders;
    std::vector<HolderTruth> top_holders;  // at the last timestamp, top 10
    std::vector<std::pair<Address, Timestamp>> first_seen;  // planted nodes
};

struct Fixture {
    std::vector<TransferEvent> events;  // canonical order
    FixtureLedger ledger;
};

Fixture make_fixture(const FixtureOptions& opt);
std::string ledger_json(const FixtureLedger& ledger);

/// Composition of a raw event-log file for ingest tests.
struct RawFixtureSpec {
    std::size_t valid = 900;          // 4-topic Transfer rows on conforming contracts
    std::size_t erc20 = 100;          // 3-topic Transfer rows on their own contracts
    std::size_t mixed_valid = 0;      // 4-topic rows on a contract that also emits one 3-topic row
    std::size_t wrong_topic = 0;      // Approval rows
    std::size_t malformed = 0;        // short addresses, non-numeric blocks, Null to Null transfers
    std::size_t duplicates = 0;       // verbatim repeats of valid rows
    bool json = false;                // JSONL instead of CSV rows
};

/// Writes the rows (CSV with header unless json) and returns the counters ingest must report.
IngestStats write_raw_fixture(std::ostream& out, const RawFixtureSpec& spec, std::uint64_t seed);

}  // namespace nftgraph
