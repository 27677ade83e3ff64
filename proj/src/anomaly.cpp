#include "nftgraph/anomaly.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace nftgraph {

namespace {

struct TimedPair {
    std::uint64_t key;
    Timestamp ts;
};

std::uint64_t pair_key(NodeId u, NodeId v) { return static_cast<std::uint64_t>(u) << 32 | v; }

// Smallest |x - y| between two ascending sequences.
Timestamp min_gap(std::span<const TimedPair> xs, std::span<const TimedPair> ys) {
    Timestamp best = std::numeric_limits<Timestamp>::max();
    std::size_t i = 0, j = 0;
    while (i < xs.size() && j < ys.size()) {
        const Timestamp d = xs[i].ts - ys[j].ts;
        best = std::min(best, d < 0 ? -d : d);
        if (d < 0) ++i;
        else ++j;
    }
    return best;
}

}  // namespace

std::vector<SimultaneousPair> simultaneous_bidirectional(const TemporalGraph& g, Timestamp threshold_seconds,
                                                         bool include_null) {
    std::vector<TimedPair> timed;
    timed.reserve(g.edge_count());
    for (const auto& e : g.edges()) {
        if (e.src == e.dst) continue;
        if (!include_null && (g.is_null(e.src) || g.is_null(e.dst))) continue;
        timed.push_back({pair_key(e.src, e.dst), e.ts});
    }
    // stable: timestamps stay ascending inside each pair
    std::stable_sort(timed.begin(), timed.end(), [](const TimedPair& x, const TimedPair& y) { return x.key < y.key; });

    auto range_of = [&](std::uint64_t key) -> std::span<const TimedPair> {
        auto lo = std::lower_bound(timed.begin(), timed.end(), key,
                                   [](const TimedPair& p, std::uint64_t k) { return p.key < k; });
        auto hi = lo;
        while (hi != timed.end() && hi->key == key) ++hi;
        return {lo, hi};
    };

    std::vector<SimultaneousPair> out;
    for (std::size_t i = 0; i < timed.size();) {
        std::size_t j = i;
        while (j < timed.size() && timed[j].key == timed[i].key) ++j;
        const auto u = static_cast<NodeId>(timed[i].key >> 32);
        const auto v = static_cast<NodeId>(timed[i].key & 0xffffffffU);
        if (u < v) {
            auto rev = range_of(pair_key(v, u));
            if (!rev.empty()) {
                const Timestamp gap = min_gap({timed.data() + i, j - i}, rev);
                if (gap <= threshold_seconds) {
                    SimultaneousPair p{u, v, gap};
                    if (g.node(v).address < g.node(u).address) std::swap(p.a, p.b);
                    out.push_back(p);
                }
            }
        }
        i = j;
    }
    std::sort(out.begin(), out.end(), [&](const SimultaneousPair& x, const SimultaneousPair& y) {
        const auto& xa = g.node(x.a).address;
        const auto& ya = g.node(y.a).address;
        if (xa != ya) return xa < ya;
        return g.node(x.b).address < g.node(y.b).address;
    });
    return out;
}

std::vector<SuspiciousPair> suspicious_pairs(const TemporalGraph& g, std::span<const SimultaneousPair> candidates,
                                             const SuspicionConfig& cfg) {
    // multigraph edge counts between the candidate endpoints
    std::vector<std::uint64_t> wanted;
    wanted.reserve(candidates.size());
    for (const auto& c : candidates) wanted.push_back(pair_key(std::min(c.a, c.b), std::max(c.a, c.b)));
    std::sort(wanted.begin(), wanted.end());
    std::vector<std::uint64_t> between(wanted.size(), 0);
    if (!wanted.empty()) {
        for (const auto& e : g.edges()) {
            if (e.src == e.dst) continue;
            const auto key = pair_key(std::min(e.src, e.dst), std::max(e.src, e.dst));
            auto it = std::lower_bound(wanted.begin(), wanted.end(), key);
            if (it != wanted.end() && *it == key) ++between[static_cast<std::size_t>(it - wanted.begin())];
        }
    }

    std::vector<SuspiciousPair> out;
    for (const auto& c : candidates) {
        const auto key = pair_key(std::min(c.a, c.b), std::max(c.a, c.b));
        const auto idx = static_cast<std::size_t>(std::lower_bound(wanted.begin(), wanted.end(), key) - wanted.begin());
        SuspiciousPair sp;
        sp.a = c.a;
        sp.b = c.b;
        sp.address_a = g.node(c.a).address;
        sp.address_b = g.node(c.b).address;
        sp.interval = c.interval;
        auto& ev = sp.evidence;
        ev.tx_a = g.node(c.a).tx_count;
        ev.tx_b = g.node(c.b).tx_count;
        ev.between = between[idx];
        ev.ratio_a = ev.tx_a ? static_cast<double>(ev.between) / static_cast<double>(ev.tx_a) : 0.0;
        ev.ratio_b = ev.tx_b ? static_cast<double>(ev.between) / static_cast<double>(ev.tx_b) : 0.0;
        if (ev.tx_a < cfg.min_tx || ev.tx_b < cfg.min_tx) sp.rule_hits |= kLowActivity;
        if (ev.ratio_a > cfg.ratio || ev.ratio_b > cfg.ratio) sp.rule_hits |= kHighRatio;
        if (sp.rule_hits != 0) out.push_back(sp);
    }
    return out;
}

std::vector<BotReport> bot_scan(const TemporalGraph& g, const BotConfig& cfg) {
    struct Slot {
        NodeId node;
        std::uint32_t contract;
        std::uint8_t dir;
        std::uint32_t edge;
        auto key() const { return std::tuple(node, contract, dir, edge); }
    };
    std::vector<Slot> slots;
    slots.reserve(g.edge_count() * 2);
    const auto edges = g.edges();
    for (std::uint32_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        const auto contract = g.token(e.token).contract;
        if (cfg.include_null || !g.is_null(e.src)) slots.push_back({e.src, contract, 0, i});
        if (cfg.include_null || !g.is_null(e.dst)) slots.push_back({e.dst, contract, 1, i});
    }
    std::sort(slots.begin(), slots.end(), [](const Slot& x, const Slot& y) { return x.key() < y.key(); });

    std::vector<BotReport> out;
    std::vector<Timestamp> gaps;
    auto emit = [&](std::size_t begin, std::size_t end) {
        const std::size_t len = end - begin;
        if (len < cfg.min_run || len < 2) return;
        gaps.clear();
        for (std::size_t k = begin + 1; k < end; ++k) gaps.push_back(edges[slots[k].edge].ts - edges[slots[k - 1].edge].ts);
        std::sort(gaps.begin(), gaps.end());
        const std::size_t m = gaps.size();
        const double median = m % 2 ? static_cast<double>(gaps[m / 2])
                                    : (static_cast<double>(gaps[m / 2 - 1]) + static_cast<double>(gaps[m / 2])) / 2.0;
        if (median > cfg.max_median_interval) return;
        BotReport r;
        r.node = slots[begin].node;
        r.address = g.node(r.node).address;
        r.contract = g.contract_address(slots[begin].contract);
        r.direction = slots[begin].dir == 0 ? BotDirection::Outgoing : BotDirection::Incoming;
        r.run_length = len;
        r.median_interval_seconds = median;
        r.first_token = g.token(edges[slots[begin].edge].token).id;
        r.last_token = g.token(edges[slots[end - 1].edge].token).id;
        r.run_start = edges[slots[begin].edge].ts;
        r.run_end = edges[slots[end - 1].edge].ts;
        r.length_score = static_cast<double>(len) / static_cast<double>(std::max<std::size_t>(cfg.min_run, 1));
        r.tempo_score = median > 0 ? cfg.max_median_interval / median : std::numeric_limits<double>::infinity();
        out.push_back(r);
    };

    for (std::size_t i = 0; i < slots.size();) {
        std::size_t group_end = i;
        while (group_end < slots.size() && slots[group_end].node == slots[i].node &&
               slots[group_end].contract == slots[i].contract && slots[group_end].dir == slots[i].dir)
            ++group_end;
        std::size_t run_begin = i;
        for (std::size_t k = i + 1; k <= group_end; ++k) {
            const bool continues = k < group_end && g.token(edges[slots[k].edge].token).id ==
                                                        g.token(edges[slots[k - 1].edge].token).id.next();
            if (!continues) {
                emit(run_begin, k);
                run_begin = k;
            }
        }
        i = group_end;
    }
    std::sort(out.begin(), out.end(), [](const BotReport& x, const BotReport& y) {
        return std::tie(x.address, x.contract, x.direction, x.run_start) <
               std::tie(y.address, y.contract, y.direction, y.run_start);
    });
    return out;
}

}  // namespace nftgraph
