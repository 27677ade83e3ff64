#include "nftgraph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <tuple>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "nftgraph/error.hpp"
#include "nftgraph/util.hpp"

namespace nftgraph {

namespace {

std::uint64_t pair_key(std::uint32_t u, std::uint32_t v) { return static_cast<std::uint64_t>(u) << 32 | v; }

bool skip_edge(const TemporalGraph& g, const Edge& e, SimpleViewFlags flags) {
    if (!flags.include_null && (g.is_null(e.src) || g.is_null(e.dst))) return true;
    if (!flags.include_self_loops && e.src == e.dst) return true;
    return false;
}

}  // namespace

// --- growth ------------------------------------------------------------------

PeriodSeries<GrowthRecord> growth_series(const TemporalGraph& g, Granularity gran, SimpleViewFlags flags) {
    if (g.edge_count() == 0) return PeriodSeries<GrowthRecord>{gran, {}};
    auto series = make_periods<GrowthRecord>(*g.min_time(), *g.max_time(), gran);
    const std::int64_t first_index = series.buckets.front().index;
    auto bucket_of = [&](Timestamp ts) -> GrowthRecord& {
        return series.buckets[static_cast<std::size_t>(period_index(ts, gran) - first_index)].value;
    };

    for (NodeId u = 0; u < g.node_count(); ++u) {
        if (!flags.include_null && g.is_null(u)) continue;
        const auto& n = g.node(u);
        auto& rec = bucket_of(n.first_seen);
        ++rec.new_nodes;
        if (n.entered_via_mint) ++rec.new_mint_nodes;
        else ++rec.new_nonmint_nodes;
    }

    struct EdgeShares {
        std::uint64_t new_new = 0, new_old = 0, old_old = 0;
    };
    std::vector<EdgeShares> shares(series.buckets.size());
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(g.edge_count());
    for (const auto& e : g.edges()) {
        if (!flags.include_null && (g.is_null(e.src) || g.is_null(e.dst))) continue;
        if (!seen.insert(pair_key(e.src, e.dst)).second) continue;
        const auto p = period_index(e.ts, gran);
        auto& rec = series.buckets[static_cast<std::size_t>(p - first_index)].value;
        if (e.src == e.dst) {
            ++rec.new_self_loops;
            if (!flags.include_self_loops) continue;
        } else if (seen.contains(pair_key(e.dst, e.src))) {
            rec.new_bidirectional_edges += 2;
        }
        ++rec.new_edges;
        const bool src_new = period_index(g.node(e.src).first_seen, gran) == p;
        const bool dst_new = period_index(g.node(e.dst).first_seen, gran) == p;
        auto& sh = shares[static_cast<std::size_t>(p - first_index)];
        if (src_new && dst_new) ++sh.new_new;
        else if (src_new || dst_new) ++sh.new_old;
        else ++sh.old_old;
    }
    for (std::size_t i = 0; i < series.buckets.size(); ++i) {
        auto& rec = series.buckets[i].value;
        if (rec.new_edges == 0) continue;
        const double total = static_cast<double>(rec.new_edges);
        rec.pct_edges_new_new = 100.0 * static_cast<double>(shares[i].new_new) / total;
        rec.pct_edges_new_old = 100.0 * static_cast<double>(shares[i].new_old) / total;
        rec.pct_edges_old_old = 100.0 * static_cast<double>(shares[i].old_old) / total;
    }
    return series;
}

// --- structural metrics --------------------------------------------------------

std::size_t degree_of(const SimpleDigraph& view, std::uint32_t u, DegreeMode mode) {
    switch (mode) {
        case DegreeMode::In: return view.in_degree(u);
        case DegreeMode::Out: return view.out_degree(u);
        case DegreeMode::Total: break;
    }
    return view.total_degree(u);
}

std::optional<double> assortativity(const SimpleDigraph& view, DegreeMode mode) {
    const auto m = view.pair_count();
    if (m == 0) throw Error(ErrorCode::EmptyView, "assortativity needs at least one pair");
    // With A = sum k_i k_j, B = sum (k_i + k_j), C = sum (k_i^2 + k_j^2) the ratio reduces to
    // (4|E| A - B^2) / (2|E| C - B^2), evaluated exactly in integers.
    __int128 a = 0, b = 0, c = 0;
    for (const auto& [i, j] : view.pairs()) {
        const __int128 ki = static_cast<__int128>(degree_of(view, i, mode));
        const __int128 kj = static_cast<__int128>(degree_of(view, j, mode));
        a += ki * kj;
        b += ki + kj;
        c += ki * ki + kj * kj;
    }
    const __int128 e = static_cast<__int128>(m);
    const __int128 num = 4 * e * a - b * b;
    const __int128 den = 2 * e * c - b * b;
    if (den == 0) return std::nullopt;
    return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

double density(const SimpleDigraph& view) {
    const auto n = view.node_count();
    if (n < 2) throw Error(ErrorCode::TooSmall, "density needs at least two vertices");
    return static_cast<double>(view.pair_count()) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double reciprocity(const SimpleDigraph& view) {
    if (view.pair_count() == 0) throw Error(ErrorCode::EmptyView, "reciprocity needs at least one pair");
    std::uint64_t mutual = 0;
    for (const auto& [i, j] : view.pairs())
        if (view.has_pair(j, i)) ++mutual;
    return static_cast<double>(mutual) / static_cast<double>(view.pair_count());
}

std::vector<double> local_clustering(const SimpleDigraph& view) {
    const auto n = view.node_count();
    std::vector<double> c(n, 0.0);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        std::vector<std::uint32_t> mark(n, UINT32_MAX);
        std::vector<std::uint32_t> hood;
        for (std::size_t idx = begin; idx < end; ++idx) {
            const auto i = static_cast<std::uint32_t>(idx);
            hood.clear();
            for (auto j : view.out(i))
                if (j != i && mark[j] != i) {
                    mark[j] = i;
                    hood.push_back(j);
                }
            for (auto j : view.in(i))
                if (j != i && mark[j] != i) {
                    mark[j] = i;
                    hood.push_back(j);
                }
            if (hood.size() < 2) continue;
            std::uint64_t links = 0;
            for (auto j : hood)
                for (auto k : view.out(j))
                    if (k != j && mark[k] == i) ++links;
            const double h = static_cast<double>(hood.size());
            c[i] = static_cast<double>(links) / (h * (h - 1));
        }
    });
    return c;
}

double avg_clustering(const SimpleDigraph& view) {
    if (view.node_count() == 0) return 0.0;
    auto c = local_clustering(view);
    double sum = 0;
    for (double v : c) sum += v;  // fixed order keeps the result schedule-independent
    return sum / static_cast<double>(c.size());
}

std::map<std::size_t, std::uint64_t> degree_histogram(const SimpleDigraph& view, DegreeMode mode) {
    std::map<std::size_t, std::uint64_t> h;
    for (std::uint32_t u = 0; u < view.node_count(); ++u) ++h[degree_of(view, u, mode)];
    return h;
}

DistanceDistribution distance_distribution(const SimpleDigraph& view, const EffectiveDiameterConfig& cfg) {
    const auto n = view.node_count();
    // undirected projection as CSR
    std::vector<std::size_t> off(n + 1, 0);
    std::vector<std::uint32_t> adj;
    {
        std::vector<std::vector<std::uint32_t>> tmp(n);
        for (const auto& [u, v] : view.pairs()) {
            if (u == v) continue;
            tmp[u].push_back(v);
            tmp[v].push_back(u);
        }
        for (std::size_t u = 0; u < n; ++u) {
            auto& l = tmp[u];
            std::sort(l.begin(), l.end());
            l.erase(std::unique(l.begin(), l.end()), l.end());
            off[u + 1] = off[u] + l.size();
        }
        adj.reserve(off[n]);
        for (auto& l : tmp) adj.insert(adj.end(), l.begin(), l.end());
    }

    DistanceDistribution dist;
    std::vector<std::uint32_t> sources;
    if (n <= cfg.exact_threshold) {
        sources.resize(n);
        std::iota(sources.begin(), sources.end(), 0u);
    } else {
        dist.exact = false;
        std::vector<std::uint32_t> all(n);
        std::iota(all.begin(), all.end(), 0u);
        Rng rng(cfg.seed);
        const auto k = std::min(cfg.sample_sources, n);
        for (std::size_t i = 0; i < k; ++i) std::swap(all[i], all[i + rng.below(n - i)]);
        sources.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    }
    dist.sources = sources.size();

    std::vector<std::vector<std::uint64_t>> partial;
    std::mutex partial_mutex;
    parallel_for(sources.size(), [&](std::size_t begin, std::size_t end) {
        std::vector<std::uint64_t> counts(1, 0);
        std::vector<std::uint32_t> depth(n, UINT32_MAX);
        std::vector<std::uint32_t> frontier, next, visited;
        for (std::size_t s = begin; s < end; ++s) {
            const auto src = sources[s];
            for (auto v : visited) depth[v] = UINT32_MAX;
            visited.assign(1, src);
            depth[src] = 0;
            frontier.assign(1, src);
            std::uint32_t d = 0;
            while (!frontier.empty()) {
                ++d;
                next.clear();
                for (auto u : frontier)
                    for (std::size_t p = off[u]; p < off[u + 1]; ++p) {
                        auto w = adj[p];
                        if (depth[w] != UINT32_MAX) continue;
                        depth[w] = d;
                        next.push_back(w);
                        visited.push_back(w);
                    }
                if (!next.empty()) {
                    if (counts.size() <= d) counts.resize(d + 1, 0);
                    counts[d] += next.size();
                }
                frontier.swap(next);
            }
        }
        std::lock_guard lock(partial_mutex);
        partial.push_back(std::move(counts));
    });
    dist.count_at.assign(1, 0);
    for (const auto& counts : partial) {
        if (dist.count_at.size() < counts.size()) dist.count_at.resize(counts.size(), 0);
        for (std::size_t d = 1; d < counts.size(); ++d) dist.count_at[d] += counts[d];
    }
    for (std::size_t d = 1; d < dist.count_at.size(); ++d) dist.reachable_pairs += dist.count_at[d];
    return dist;
}

double interpolate_quantile_distance(const DistanceDistribution& dist, double quantile, bool clamp_at_one) {
    if (dist.reachable_pairs == 0) throw Error(ErrorCode::NoPairs, "no vertex reaches another");
    // Work in integers scaled by 1e6 so textbook cases land on the nearest double.
    constexpr long long kScale = 1000000;
    const auto q = static_cast<__int128>(std::llround(quantile * kScale));
    const auto total = static_cast<__int128>(dist.reachable_pairs);
    __int128 cum_prev = 0;
    for (std::size_t d = 1; d < dist.count_at.size(); ++d) {
        const auto here = static_cast<__int128>(dist.count_at[d]);
        const __int128 cum = cum_prev + here;
        if (cum * kScale >= q * total && here > 0) {
            // x = (d - 1) + (q - g(d-1)) / (g(d) - g(d-1))
            const __int128 num = static_cast<__int128>(d - 1) * kScale * here + q * total - cum_prev * kScale;
            const __int128 den = static_cast<__int128>(kScale) * here;
            double x = static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
            return clamp_at_one ? std::max(1.0, x) : x;
        }
        cum_prev = cum;
    }
    return static_cast<double>(dist.count_at.size() - 1);
}

double effective_diameter(const SimpleDigraph& view, const EffectiveDiameterConfig& cfg) {
    if (view.node_count() == 0) throw Error(ErrorCode::NoPairs, "empty view");
    return interpolate_quantile_distance(distance_distribution(view, cfg), cfg.quantile, cfg.clamp_at_one);
}

// --- mutual edges ----------------------------------------------------------------

double MutualIntervals::cumulative(std::int64_t bucket) const {
    if (pairs.empty()) return 0.0;
    std::uint64_t below = 0;
    for (const auto& [b, c] : histogram) {
        if (b > bucket) break;
        below += c;
    }
    return static_cast<double>(below) / static_cast<double>(pairs.size());
}

MutualIntervals mutual_edge_intervals(const TemporalGraph& g, SimpleViewFlags flags, Timestamp bucket_seconds) {
    MutualIntervals out;
    out.bucket_seconds = bucket_seconds;
    std::unordered_map<std::uint64_t, Timestamp> earliest;
    earliest.reserve(g.edge_count());
    flags.include_self_loops = false;
    for (const auto& e : g.edges()) {
        if (skip_edge(g, e, flags)) continue;
        earliest.try_emplace(pair_key(e.src, e.dst), e.ts);  // edges are time-ordered
    }
    for (const auto& [key, ts] : earliest) {
        const auto u = static_cast<NodeId>(key >> 32);
        const auto v = static_cast<NodeId>(key & 0xffffffffU);
        if (u > v) continue;
        auto rev = earliest.find(pair_key(v, u));
        if (rev == earliest.end()) continue;
        out.pairs.push_back({u, v, ts, rev->second});
    }
    std::sort(out.pairs.begin(), out.pairs.end(),
              [](const MutualPair& x, const MutualPair& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
    for (const auto& p : out.pairs) ++out.histogram[p.interval() / bucket_seconds];
    return out;
}

// --- active periods ------------------------------------------------------------------

double ActivePeriods::share(std::int64_t days) const {
    if (nodes_considered == 0) return 0.0;
    auto it = nodes_by_days.find(days);
    return it == nodes_by_days.end() ? 0.0
                                      : static_cast<double>(it->second) / static_cast<double>(nodes_considered);
}

ActivePeriods active_periods(const TemporalGraph& g, bool include_null) {
    ActivePeriods out;
    std::map<std::int64_t, std::uint64_t> tx_sum;
    for (NodeId u = 0; u < g.node_count(); ++u) {
        if (!include_null && g.is_null(u)) continue;
        const auto& n = g.node(u);
        if (n.tx_count < 2) continue;
        const std::int64_t bucket = (n.last_seen - n.first_seen) / kSecondsPerDay + 1;
        ++out.nodes_by_days[bucket];
        tx_sum[bucket] += n.tx_count;
        ++out.nodes_considered;
    }
    for (const auto& [bucket, count] : out.nodes_by_days)
        out.mean_tx_by_days[bucket] = static_cast<double>(tx_sum[bucket]) / static_cast<double>(count);
    return out;
}

// --- holders -----------------------------------------------------------------------------

HolderRow HolderStats::lookup(const TemporalGraph& g, const Address& a) const {
    HolderRow row;
    row.address = a;
    auto id = g.find(a);
    if (!id) return row;
    row.node = *id;
    row.is_null = g.is_null(*id);
    auto it = std::lower_bound(holders.begin(), holders.end(), *id,
                               [](const HolderRow& r, NodeId v) { return r.node < v; });
    if (it != holders.end() && it->node == *id) return *it;
    return row;
}

std::vector<HolderRow> HolderStats::top(std::size_t k, bool include_null) const {
    std::vector<HolderRow> rows;
    for (const auto& r : holders)
        if (include_null || !r.is_null) rows.push_back(r);
    std::sort(rows.begin(), rows.end(), [](const HolderRow& x, const HolderRow& y) {
        if (x.tokens != y.tokens) return x.tokens > y.tokens;
        if (x.collections != y.collections) return x.collections > y.collections;
        return x.address < y.address;
    });
    if (rows.size() > k) rows.resize(k);
    return rows;
}

HolderStats holder_stats(const TemporalGraph& g, Timestamp t) {
    HolderStats out;
    out.cutoff = t;
    constexpr NodeId kNone = UINT32_MAX;
    std::vector<NodeId> owner(g.token_count(), kNone);
    for (const auto& e : g.snapshot(t).edges()) owner[e.token] = e.dst;

    std::vector<std::pair<NodeId, std::uint32_t>> holdings;  // (owner, contract)
    holdings.reserve(owner.size());
    for (std::uint32_t tok = 0; tok < owner.size(); ++tok)
        if (owner[tok] != kNone) holdings.emplace_back(owner[tok], g.token(tok).contract);
    std::sort(holdings.begin(), holdings.end());
    for (std::size_t i = 0; i < holdings.size();) {
        HolderRow row;
        row.node = holdings[i].first;
        row.address = g.node(row.node).address;
        row.is_null = g.is_null(row.node);
        std::uint32_t last_contract = UINT32_MAX;
        for (; i < holdings.size() && holdings[i].first == row.node; ++i) {
            ++row.tokens;
            if (holdings[i].second != last_contract) {
                ++row.collections;
                last_contract = holdings[i].second;
            }
        }
        out.holders.push_back(row);
    }
    return out;
}

// --- hub correlation ---------------------------------------------------------------------

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = x.size();
    if (n < 2 || y.size() != n) throw Error(ErrorCode::Degenerate, "need at least two paired samples");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) throw Error(ErrorCode::Degenerate, "zero variance");
    return sxy / std::sqrt(sxx * syy);
}

HubCorrelation hub_correlation(const TemporalGraph& g, Granularity gran, std::int64_t period, SimpleViewFlags flags) {
    const Timestamp end = period_end(period, gran);
    const Timestamp next_end = period_end(period + 1, gran);
    const auto view = simple_view(g, end - 1, flags);

    HubCorrelation out;
    const auto ids = view.original_ids();
    std::unordered_map<NodeId, std::size_t> slot;
    for (std::uint32_t v = 0; v < view.node_count(); ++v) {
        slot.emplace(ids[v], out.degree.size());
        out.degree.push_back(static_cast<double>(view.total_degree(v)));
    }
    out.new_contacts.assign(out.degree.size(), 0.0);

    std::unordered_set<std::uint64_t> counted;
    auto fresh = [&](NodeId w) {
        const auto fs = g.node(w).first_seen;
        return fs >= end && fs < next_end;
    };
    const auto begin_idx = g.edges_until(end - 1);
    const auto end_idx = g.edges_until(next_end - 1);
    for (std::size_t i = begin_idx; i < end_idx; ++i) {
        const auto& e = g.edges()[i];
        if (e.src == e.dst) continue;
        if (!flags.include_null && (g.is_null(e.src) || g.is_null(e.dst))) continue;
        for (auto [old_node, new_node] : {std::pair{e.src, e.dst}, std::pair{e.dst, e.src}}) {
            auto it = slot.find(old_node);
            if (it == slot.end() || !fresh(new_node)) continue;
            if (counted.insert(pair_key(old_node, new_node)).second) out.new_contacts[it->second] += 1.0;
        }
    }
    out.nodes = out.degree.size();
    out.r = pearson(out.degree, out.new_contacts);
    return out;
}

// --- TEA / TET ---------------------------------------------------------------------------

TeaTet tea_tet(const TemporalGraph& g, Granularity gran, Timestamp split_time, SimpleViewFlags flags) {
    TeaTet out;
    out.tea.granularity = gran;
    if (g.edge_count() == 0) return out;
    out.tea = make_periods<TeaCounts>(*g.min_time(), *g.max_time(), gran);
    const std::int64_t first_index = out.tea.buckets.front().index;

    struct PairState {
        std::int64_t last_period;
        bool train;
        bool test;
    };
    std::unordered_map<std::uint64_t, PairState> state;
    for (const auto& e : g.edges()) {
        if (skip_edge(g, e, flags)) continue;
        const auto p = period_index(e.ts, gran);
        auto& counts = out.tea.buckets[static_cast<std::size_t>(p - first_index)].value;
        const bool test_side = e.ts >= split_time;
        auto [it, inserted] = state.try_emplace(pair_key(e.src, e.dst), PairState{p, !test_side, test_side});
        if (inserted) {
            ++counts.fresh;
            continue;
        }
        auto& st = it->second;
        if (test_side) st.test = true;
        else st.train = true;
        if (st.last_period != p) {
            ++counts.recurring;
            st.last_period = p;
        }
    }
    out.tet.reserve(state.size());
    for (const auto& [key, st] : state) {
        const TetClass cls = st.train && st.test ? TetClass::Both : (st.train ? TetClass::TrainOnly : TetClass::TestOnly);
        out.tet.push_back({{static_cast<std::uint32_t>(key >> 32), static_cast<std::uint32_t>(key & 0xffffffffU)}, cls});
        switch (cls) {
            case TetClass::TrainOnly: ++out.train_only; break;
            case TetClass::TestOnly: ++out.test_only; break;
            case TetClass::Both: ++out.both; break;
        }
    }
    std::sort(out.tet.begin(), out.tet.end());
    return out;
}

// --- report --------------------------------------------------------------------------------

MetricsReport compute_report(const SimpleDigraph& view, const ReportConfig& cfg) {
    MetricsReport r;
    r.nodes = view.node_count();
    r.pairs = view.pair_count();
    if (view.pair_count() > 0) {
        r.assortativity = assortativity(view, cfg.degree_mode);
        r.reciprocity = reciprocity(view);
    }
    if (view.node_count() >= 2) r.density = density(view);
    r.avg_clustering = avg_clustering(view);
    if (cfg.with_diameter && view.pair_count() > 0) {
        try {
            r.effective_diameter = effective_diameter(view, cfg.diameter);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoPairs) throw;
        }
    }
    r.degree_histogram = degree_histogram(view, cfg.degree_mode);
    return r;
}

}  // namespace nftgraph
