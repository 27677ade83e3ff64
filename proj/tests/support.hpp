#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "nftgraph/calendar.hpp"
#include "nftgraph/csm.hpp"
#include "nftgraph/error.hpp"
#include "nftgraph/graph.hpp"
#include "nftgraph/util.hpp"

namespace testing {

using namespace nftgraph;

/// Code of the nftgraph::Error thrown by f, or nullopt when nothing is thrown.
template <class F>
std::optional<ErrorCode> error_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

// --- Keccak-256 (original padding, as used by Ethereum) ----------------------------

inline void keccak_f(std::uint64_t st[25]) {
    static constexpr std::uint64_t rc[24] = {
        0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL, 0x8000000080008000ULL,
        0x000000000000808bULL, 0x0000000080000001ULL, 0x8000000080008081ULL, 0x8000000000008009ULL,
        0x000000000000008aULL, 0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
        0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL, 0x8000000000008003ULL,
        0x8000000000008002ULL, 0x8000000000000080ULL, 0x000000000000800aULL, 0x800000008000000aULL,
        0x8000000080008081ULL, 0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL};
    static constexpr int rotc[24] = {1, 3, 6, 10, 15, 21, 28, 36, 45, 55, 2, 14, 27, 41, 56, 8, 25, 43, 62, 18, 39, 61, 20, 44};
    static constexpr int piln[24] = {10, 7, 11, 17, 18, 3, 5, 16, 8, 21, 24, 4, 15, 23, 19, 13, 12, 2, 20, 14, 22, 9, 6, 1};
    auto rotl = [](std::uint64_t x, int s) { return (x << s) | (x >> (64 - s)); };
    for (int round = 0; round < 24; ++round) {
        std::uint64_t bc[5];
        for (int i = 0; i < 5; ++i) bc[i] = st[i] ^ st[i + 5] ^ st[i + 10] ^ st[i + 15] ^ st[i + 20];
        for (int i = 0; i < 5; ++i) {
            const std::uint64_t t = bc[(i + 4) % 5] ^ rotl(bc[(i + 1) % 5], 1);
            for (int j = 0; j < 25; j += 5) st[j + i] ^= t;
        }
        std::uint64_t t = st[1];
        for (int i = 0; i < 24; ++i) {
            const int j = piln[i];
            const std::uint64_t tmp = st[j];
            st[j] = rotl(t, rotc[i]);
            t = tmp;
        }
        for (int j = 0; j < 25; j += 5) {
            for (int i = 0; i < 5; ++i) bc[i] = st[j + i];
            for (int i = 0; i < 5; ++i) st[j + i] ^= (~bc[(i + 1) % 5]) & bc[(i + 2) % 5];
        }
        st[0] ^= rc[round];
    }
}

inline std::string keccak256_hex(std::string_view msg) {
    constexpr std::size_t rate = 136;
    std::vector<std::uint8_t> buf(msg.begin(), msg.end());
    buf.push_back(0x01);
    while (buf.size() % rate != 0) buf.push_back(0);
    buf.back() |= 0x80;
    std::uint64_t st[25] = {};
    for (std::size_t off = 0; off < buf.size(); off += rate) {
        for (std::size_t i = 0; i < rate / 8; ++i) {
            std::uint64_t w = 0;
            for (int b = 0; b < 8; ++b) w |= std::uint64_t{buf[off + 8 * i + b]} << (8 * b);
            st[i] ^= w;
        }
        keccak_f(st);
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out = "0x";
    for (int i = 0; i < 32; ++i) {
        const auto byte = static_cast<std::uint8_t>(st[i / 8] >> (8 * (i % 8)));
        out += digits[byte >> 4];
        out += digits[byte & 15];
    }
    return out;
}

// --- synthetic inputs ----------------------------------------------------------------

inline Address addr(std::uint32_t i) {
    Address a;
    a.bytes[0] = 0xa0;
    a.bytes[16] = static_cast<std::uint8_t>(i >> 24);
    a.bytes[17] = static_cast<std::uint8_t>(i >> 16);
    a.bytes[18] = static_cast<std::uint8_t>(i >> 8);
    a.bytes[19] = static_cast<std::uint8_t>(i);
    return a;
}

inline Hash32 tx(std::uint64_t i) {
    Hash32 h;
    for (int b = 0; b < 8; ++b) h.bytes[31 - b] = static_cast<std::uint8_t>(i >> (8 * b));
    h.bytes[0] = 0x7e;
    return h;
}

/// Transfer from -> to; endpoint index 0 maps to the Null address.
inline TransferEvent transfer(std::uint32_t from, std::uint32_t to, Timestamp ts, std::uint64_t token,
                              std::uint64_t seq = 0, std::uint32_t contract = 1) {
    TransferEvent ev;
    ev.block_number = 1 + static_cast<std::uint64_t>(ts - kChainStartTimestamp) / 13;
    ev.timestamp = ts;
    ev.tx_hash = tx(seq);
    ev.log_index = seq;
    ev.contract = addr(0xc0000000U + contract);
    ev.from = from == 0 ? kNullAddress : addr(from);
    ev.to = to == 0 ? kNullAddress : addr(to);
    ev.token_id = Uint256(token);
    return ev;
}

inline void sort_events(std::vector<TransferEvent>& evs) {
    std::sort(evs.begin(), evs.end(), transfer_less);
}

/// Random transfers among `nodes` addresses (ids 1..nodes), no Null, possibly with self-loops.
inline std::vector<TransferEvent> random_events(Rng& rng, std::uint32_t nodes, std::size_t count, Timestamp t0,
                                                Timestamp span) {
    std::vector<TransferEvent> evs;
    for (std::size_t i = 0; i < count; ++i) {
        const auto u = static_cast<std::uint32_t>(1 + rng.below(nodes));
        const auto v = static_cast<std::uint32_t>(1 + rng.below(nodes));
        const auto ts = t0 + static_cast<Timestamp>(rng.below(static_cast<std::uint64_t>(span)));
        evs.push_back(transfer(u, v, ts, i, i));
    }
    sort_events(evs);
    return evs;
}

// --- metric oracles over distinct pairs -----------------------------------------------

/// Dense adjacency matrix of distinct pairs; self-loops dropped.
struct Dense {
    std::size_t n = 0;
    std::vector<std::vector<char>> adj;
    std::size_t m = 0;
};

inline Dense dense_from_events(const std::vector<TransferEvent>& evs) {
    std::map<Address, std::size_t> ids;
    for (const auto& e : evs) {
        if (e.from != kNullAddress) ids.emplace(e.from, 0);
        if (e.to != kNullAddress) ids.emplace(e.to, 0);
    }
    std::size_t next = 0;
    for (auto& [a, id] : ids) id = next++;
    Dense d;
    d.n = ids.size();
    d.adj.assign(d.n, std::vector<char>(d.n, 0));
    for (const auto& e : evs) {
        if (e.from == kNullAddress || e.to == kNullAddress || e.from == e.to) continue;
        auto& cell = d.adj[ids[e.from]][ids[e.to]];
        if (!cell) ++d.m;
        cell = 1;
    }
    return d;
}

inline std::vector<long long> total_degrees(const Dense& d) {
    std::vector<long long> k(d.n, 0);
    for (std::size_t i = 0; i < d.n; ++i)
        for (std::size_t j = 0; j < d.n; ++j)
            if (d.adj[i][j]) ++k[i], ++k[j];
    return k;
}

inline std::optional<double> oracle_assortativity(const Dense& d) {
    const auto k = total_degrees(d);
    long long s1 = 0, s2 = 0, p = 0;
    for (std::size_t i = 0; i < d.n; ++i)
        for (std::size_t j = 0; j < d.n; ++j)
            if (d.adj[i][j]) {
                p += k[i] * k[j];
                s1 += k[i] + k[j];
                s2 += k[i] * k[i] + k[j] * k[j];
            }
    const long long m = static_cast<long long>(d.m);
    const long long num = 4 * m * p - s1 * s1;
    const long long den = 2 * m * s2 - s1 * s1;
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

inline double oracle_density(const Dense& d) {
    return static_cast<double>(d.m) / (static_cast<double>(d.n) * static_cast<double>(d.n - 1));
}

inline double oracle_reciprocity(const Dense& d) {
    std::size_t both = 0;
    for (std::size_t i = 0; i < d.n; ++i)
        for (std::size_t j = 0; j < d.n; ++j)
            if (d.adj[i][j] && d.adj[j][i]) ++both;
    return static_cast<double>(both) / static_cast<double>(d.m);
}

inline double oracle_avg_clustering(const Dense& d) {
    double sum = 0;
    for (std::size_t i = 0; i < d.n; ++i) {
        std::vector<std::size_t> nb;
        for (std::size_t j = 0; j < d.n; ++j)
            if (j != i && (d.adj[i][j] || d.adj[j][i])) nb.push_back(j);
        if (nb.size() < 2) continue;
        std::size_t links = 0;
        for (auto a : nb)
            for (auto b : nb)
                if (a != b && d.adj[a][b]) ++links;
        sum += static_cast<double>(links) / static_cast<double>(nb.size() * (nb.size() - 1));
    }
    return d.n == 0 ? 0.0 : sum / static_cast<double>(d.n);
}

/// Floyd-Warshall on the undirected projection, then the interpolated 0.9 quantile.
inline std::optional<double> oracle_effective_diameter(const Dense& d, bool clamp = true) {
    constexpr int inf = std::numeric_limits<int>::max() / 4;
    std::vector<std::vector<int>> dist(d.n, std::vector<int>(d.n, inf));
    for (std::size_t i = 0; i < d.n; ++i) {
        dist[i][i] = 0;
        for (std::size_t j = 0; j < d.n; ++j)
            if (d.adj[i][j] || d.adj[j][i]) dist[i][j] = std::min(dist[i][j], 1);
    }
    for (std::size_t k = 0; k < d.n; ++k)
        for (std::size_t i = 0; i < d.n; ++i)
            for (std::size_t j = 0; j < d.n; ++j)
                if (dist[i][k] + dist[k][j] < dist[i][j]) dist[i][j] = dist[i][k] + dist[k][j];
    std::map<int, double> hist;
    double total = 0;
    for (std::size_t i = 0; i < d.n; ++i)
        for (std::size_t j = 0; j < d.n; ++j)
            if (i != j && dist[i][j] < inf) hist[dist[i][j]] += 1, total += 1;
    if (total == 0) return std::nullopt;
    // shortest-path distances are contiguous, so g is interpolated between d - 1 and d
    double prev_g = 0;
    double cum = 0;
    for (auto [dd, c] : hist) {
        cum += c;
        const double g = cum / total;
        if (g >= 0.9) {
            const double x = (dd - 1) + (0.9 - prev_g) / (g - prev_g);
            return clamp ? std::max(1.0, x) : x;
        }
        prev_g = g;
    }
    return std::nullopt;
}

/// Unordered reciprocal pairs with the day bucket of the gap between the earliest edge each way.
inline std::map<std::int64_t, std::uint64_t> oracle_mutual_histogram(const std::vector<TransferEvent>& evs) {
    std::map<std::pair<Address, Address>, Timestamp> first;
    for (const auto& e : evs) {
        if (e.from == e.to || e.from == kNullAddress || e.to == kNullAddress) continue;
        auto key = std::make_pair(e.from, e.to);
        auto it = first.find(key);
        if (it == first.end() || e.timestamp < it->second) first[key] = e.timestamp;
    }
    std::map<std::int64_t, std::uint64_t> hist;
    for (const auto& [key, ts] : first) {
        if (!(key.first < key.second)) continue;
        auto rev = first.find({key.second, key.first});
        if (rev == first.end()) continue;
        ++hist[std::llabs(ts - rev->second) / kSecondsPerDay];
    }
    return hist;
}

struct OracleTea {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> per_period;  // (recurring, new), contiguous periods
    std::uint64_t train_only = 0, test_only = 0, both = 0;
};

inline OracleTea oracle_tea(const std::vector<TransferEvent>& evs, Granularity gran, Timestamp split) {
    OracleTea out;
    std::map<std::int64_t, std::set<std::pair<Address, Address>>> by_period;
    std::map<std::pair<Address, Address>, std::pair<bool, bool>> sides;
    Timestamp lo = std::numeric_limits<Timestamp>::max(), hi = std::numeric_limits<Timestamp>::min();
    for (const auto& e : evs) {
        lo = std::min(lo, e.timestamp);
        hi = std::max(hi, e.timestamp);
        if (e.from == e.to || e.from == kNullAddress || e.to == kNullAddress) continue;
        by_period[period_index(e.timestamp, gran)].insert({e.from, e.to});
        auto& s = sides[{e.from, e.to}];
        (e.timestamp >= split ? s.second : s.first) = true;
    }
    if (evs.empty()) return out;
    std::set<std::pair<Address, Address>> seen;
    for (auto p = period_index(lo, gran); p <= period_index(hi, gran); ++p) {
        std::uint64_t rec = 0, fresh = 0;
        for (const auto& pr : by_period[p]) (seen.count(pr) ? rec : fresh) += 1;
        for (const auto& pr : by_period[p]) seen.insert(pr);
        out.per_period.push_back({rec, fresh});
    }
    for (const auto& [pr, s] : sides) {
        if (s.first && s.second) ++out.both;
        else if (s.first) ++out.train_only;
        else ++out.test_only;
    }
    return out;
}

// --- subgraph matching oracle ----------------------------------------------------------

/// All injective direction-preserving embeddings of q into the pair set, by plain enumeration.
/// With `dedup`, embeddings with the same image edge set count once.
inline std::uint64_t oracle_match_count(const std::set<Pair>& pairs, std::size_t n, const QueryGraph& q, bool dedup) {
    std::vector<std::uint32_t> m(q.size());
    std::vector<char> used(n, 0);
    std::uint64_t count = 0;
    std::set<std::vector<Pair>> images;
    auto rec = [&](auto&& self, std::size_t x) -> void {
        if (x == q.size()) {
            for (auto [a, b] : q.edges)
                if (!pairs.count({m[a], m[b]})) return;
            if (dedup) {
                std::vector<Pair> img;
                for (auto [a, b] : q.edges) img.push_back({m[a], m[b]});
                std::sort(img.begin(), img.end());
                images.insert(img);
            } else {
                ++count;
            }
            return;
        }
        for (std::uint32_t v = 0; v < n; ++v) {
            if (used[v]) continue;
            m[x] = v;
            bool ok = true;
            for (auto [a, b] : q.edges)
                if (a <= x && b <= x && (a == x || b == x) && !pairs.count({m[a], m[b]})) ok = false;
            if (!ok) continue;
            used[v] = 1;
            self(self, x + 1);
            used[v] = 0;
        }
    };
    rec(rec, 0);
    return dedup ? images.size() : count;
}

}  // namespace testing
