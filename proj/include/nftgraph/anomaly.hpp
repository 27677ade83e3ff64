#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nftgraph/graph.hpp"

namespace nftgraph {

/// Unordered pair with opposing edges; `a` has the smaller address.
struct SimultaneousPair {
    NodeId a = 0;
    NodeId b = 0;
    Timestamp interval = 0;  // minimal |t(a->b) - t(b->a)| over all opposing edge combinations
};

/// Pairs with opposing edges at most `threshold_seconds` apart, sorted by addresses.
std::vector<SimultaneousPair> simultaneous_bidirectional(const TemporalGraph& g,
                                                         Timestamp threshold_seconds = kSecondsPerDay,
                                                         bool include_null = false);

enum RuleHit : std::uint8_t { kLowActivity = 1, kHighRatio = 2 };

struct PairEvidence {
    std::uint64_t tx_a = 0;     // all incident multigraph edges of a
    std::uint64_t tx_b = 0;
    std::uint64_t between = 0;  // multigraph edges a->b plus b->a
    double ratio_a = 0;         // between / tx_a
    double ratio_b = 0;
};

struct SuspiciousPair {
    NodeId a = 0;
    NodeId b = 0;
    Address address_a;
    Address address_b;
    Timestamp interval = 0;
    std::uint8_t rule_hits = 0;
    PairEvidence evidence;
};

struct SuspicionConfig {
    std::uint64_t min_tx = 5;
    double ratio = 0.8;
};

/// LOW_ACTIVITY: either endpoint has fewer than min_tx transactions.
/// HIGH_RATIO: for either endpoint the pair's share of its transactions exceeds `ratio`.
std::vector<SuspiciousPair> suspicious_pairs(const TemporalGraph& g, std::span<const SimultaneousPair> candidates,
                                             const SuspicionConfig& cfg = {});

struct BotConfig {
    std::size_t min_run = 100;
    double max_median_interval = 600;  // seconds
    bool include_null = false;
};

enum class BotDirection { Outgoing, Incoming };

struct BotReport {
    NodeId node = 0;
    Address address;
    Address contract;
    BotDirection direction = BotDirection::Outgoing;
    std::size_t run_length = 0;
    double median_interval_seconds = 0;
    Uint256 first_token;
    Uint256 last_token;
    Timestamp run_start = 0;
    Timestamp run_end = 0;
    double length_score = 0;  // run_length / min_run
    double tempo_score = 0;   // max_median_interval / median interval
};

/// Maximal runs of transfers, per address, contract and direction, whose token ids rise by
/// exactly one; runs of at least min_run with a small median gap are reported.
std::vector<BotReport> bot_scan(const TemporalGraph& g, const BotConfig& cfg = {});

}  // namespace nftgraph
