#include "nftgraph/graph.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "nftgraph/error.hpp"

namespace nftgraph {

// --- SnapshotView ------------------------------------------------------------

SnapshotView::SnapshotView(const TemporalGraph& g, Timestamp cutoff)
    : g_(&g), cutoff_(cutoff), edge_end_(g.edges_until(cutoff)), node_end_(g.nodes_until(cutoff)) {}

std::span<const Edge> SnapshotView::edges() const { return g_->edges().first(edge_end_); }

// --- TemporalGraph -----------------------------------------------------------

std::optional<NodeId> TemporalGraph::find(const Address& a) const {
    auto it = index_.find(a);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t TemporalGraph::edges_until(Timestamp t) const {
    auto it = std::upper_bound(edges_.begin(), edges_.end(), t,
                               [](Timestamp v, const Edge& e) { return v < e.ts; });
    return static_cast<std::size_t>(it - edges_.begin());
}

std::size_t TemporalGraph::nodes_until(Timestamp t) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t,
                               [](Timestamp v, const NodeRecord& n) { return v < n.first_seen; });
    return static_cast<std::size_t>(it - nodes_.begin());
}

std::optional<Timestamp> TemporalGraph::min_time() const {
    if (edges_.empty()) return std::nullopt;
    return edges_.front().ts;
}

std::optional<Timestamp> TemporalGraph::max_time() const {
    if (edges_.empty()) return std::nullopt;
    return edges_.back().ts;
}

std::string TemporalGraph::summary_digest() const {
    Fnv1a h;
    h.update_pod(nodes_.size());
    for (const auto& n : nodes_) {
        h.update(n.address.bytes);
        h.update_pod(n.first_seen);
        h.update_pod(n.last_seen);
        h.update_pod(n.tx_count);
        h.update_pod(static_cast<std::uint8_t>(n.entered_via_mint));
    }
    h.update_pod(edges_.size());
    for (const auto& e : edges_) {
        h.update_pod(e.src);
        h.update_pod(e.dst);
        h.update_pod(e.ts);
        h.update_pod(e.token);
    }
    for (const auto& c : contracts_) h.update(c.bytes);
    for (std::size_t t = 0; t < tokens_.size(); ++t) {
        h.update_pod(tokens_[t].contract);
        h.update(tokens_[t].id.to_be_bytes());
        h.update_pod(owners_[t]);
    }
    return h.hex();
}

namespace {

constexpr char kCacheMagic[4] = {'L', 'G', 'L', 'B'};
constexpr std::uint16_t kCacheVersion = 1;

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw Error(ErrorCode::BadCache, "truncated cache");
    return v;
}

}  // namespace

void TemporalGraph::save_cache(std::ostream& out) const {
    out.write(kCacheMagic, 4);
    put(out, kCacheVersion);
    put<std::uint64_t>(out, nodes_.size());
    for (const auto& n : nodes_) {
        out.write(reinterpret_cast<const char*>(n.address.bytes.data()), 20);
        put(out, n.first_seen);
        put(out, n.last_seen);
        put(out, n.tx_count);
        put<std::uint8_t>(out, n.entered_via_mint ? 1 : 0);
    }
    put<std::uint64_t>(out, contracts_.size());
    for (const auto& c : contracts_) out.write(reinterpret_cast<const char*>(c.bytes.data()), 20);
    put<std::uint64_t>(out, tokens_.size());
    for (const auto& t : tokens_) {
        put(out, t.contract);
        auto be = t.id.to_be_bytes();
        out.write(reinterpret_cast<const char*>(be.data()), 32);
    }
    put<std::uint64_t>(out, edges_.size());
    for (const auto& e : edges_) {
        put(out, e.src);
        put(out, e.dst);
        put(out, e.ts);
        put(out, e.token);
    }
    if (!out) throw Error(ErrorCode::Io, "cache write failure");
}

TemporalGraph TemporalGraph::load_cache(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kCacheMagic, 4) != 0)
        throw Error(ErrorCode::BadCache, "bad magic");
    if (auto v = get<std::uint16_t>(in); v != kCacheVersion)
        throw Error(ErrorCode::BadCache, "unsupported cache version " + std::to_string(v));

    TemporalGraph g;
    auto n_nodes = get<std::uint64_t>(in);
    g.nodes_.resize(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        auto& n = g.nodes_[i];
        if (!in.read(reinterpret_cast<char*>(n.address.bytes.data()), 20)) throw Error(ErrorCode::BadCache, "truncated");
        n.first_seen = get<Timestamp>(in);
        n.last_seen = get<Timestamp>(in);
        n.tx_count = get<std::uint64_t>(in);
        n.entered_via_mint = get<std::uint8_t>(in) != 0;
        g.index_.emplace(n.address, static_cast<NodeId>(i));
        if (n.address == kNullAddress) g.null_ = static_cast<NodeId>(i);
    }
    auto n_contracts = get<std::uint64_t>(in);
    g.contracts_.resize(n_contracts);
    for (auto& c : g.contracts_)
        if (!in.read(reinterpret_cast<char*>(c.bytes.data()), 20)) throw Error(ErrorCode::BadCache, "truncated");
    auto n_tokens = get<std::uint64_t>(in);
    g.tokens_.resize(n_tokens);
    for (auto& t : g.tokens_) {
        t.contract = get<std::uint32_t>(in);
        std::array<std::uint8_t, 32> be;
        if (!in.read(reinterpret_cast<char*>(be.data()), 32)) throw Error(ErrorCode::BadCache, "truncated");
        t.id = Uint256::from_be_bytes(be);
        if (t.contract >= n_contracts) throw Error(ErrorCode::BadCache, "token references unknown contract");
    }
    auto n_edges = get<std::uint64_t>(in);
    g.edges_.resize(n_edges);
    g.owners_.assign(n_tokens, 0);
    for (auto& e : g.edges_) {
        e.src = get<NodeId>(in);
        e.dst = get<NodeId>(in);
        e.ts = get<Timestamp>(in);
        e.token = get<std::uint32_t>(in);
        if (e.src >= n_nodes || e.dst >= n_nodes || e.token >= n_tokens)
            throw Error(ErrorCode::BadCache, "edge references unknown node or token");
        g.owners_[e.token] = e.dst;
    }
    return g;
}

// --- GraphBuilder ------------------------------------------------------------

GraphBuilder::GraphBuilder() = default;

NodeId GraphBuilder::intern_node(const Address& a, Timestamp ts) {
    auto [it, inserted] = g_.index_.try_emplace(a, static_cast<NodeId>(g_.nodes_.size()));
    if (inserted) {
        NodeRecord rec;
        rec.address = a;
        rec.first_seen = ts;
        rec.last_seen = ts;
        g_.nodes_.push_back(rec);
        if (a == kNullAddress) g_.null_ = it->second;
    }
    return it->second;
}

void GraphBuilder::add(const TransferEvent& ev) {
    if (!g_.edges_.empty() && ev.timestamp < last_ts_)
        throw Error(ErrorCode::UnsortedInput,
                    "timestamp " + std::to_string(ev.timestamp) + " after " + std::to_string(last_ts_));
    last_ts_ = ev.timestamp;

    const std::size_t before = g_.nodes_.size();
    NodeId src = intern_node(ev.from, ev.timestamp);
    NodeId dst = intern_node(ev.to, ev.timestamp);
    // a receiver first seen on a mint entered the graph via mint
    if (g_.nodes_.size() > before && dst >= before && ev.from == kNullAddress && ev.to != kNullAddress)
        g_.nodes_[dst].entered_via_mint = true;

    auto& s = g_.nodes_[src];
    s.last_seen = ev.timestamp;
    ++s.tx_count;
    if (dst != src) {
        auto& d = g_.nodes_[dst];
        d.last_seen = ev.timestamp;
        ++d.tx_count;
    }

    auto [cit, cnew] = contract_index_.try_emplace(ev.contract, static_cast<std::uint32_t>(g_.contracts_.size()));
    if (cnew) g_.contracts_.push_back(ev.contract);
    TokenKey key{cit->second, ev.token_id};
    auto [tit, tnew] = token_index_.try_emplace(key, static_cast<std::uint32_t>(g_.tokens_.size()));
    if (tnew) {
        g_.tokens_.push_back(key);
        g_.owners_.push_back(dst);
    } else {
        g_.owners_[tit->second] = dst;
    }
    g_.edges_.push_back({src, dst, ev.timestamp, tit->second});
}

TemporalGraph GraphBuilder::finish() {
    TemporalGraph out = std::move(g_);
    g_ = TemporalGraph{};
    contract_index_.clear();
    token_index_.clear();
    return out;
}

TemporalGraph build_graph(std::span<const TransferEvent> events) {
    GraphBuilder b;
    for (const auto& ev : events) b.add(ev);
    return b.finish();
}

TemporalGraph build_graph(std::istream& normalized_csv) {
    GraphBuilder b;
    TransferReader reader(normalized_csv);
    TransferEvent ev;
    while (reader.next(ev)) b.add(ev);
    return b.finish();
}

TemporalGraph build_graph(const std::filesystem::path& normalized_csv) {
    std::ifstream in(normalized_csv, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + normalized_csv.string());
    return build_graph(in);
}

Timestamp node_age(const TemporalGraph& g, const Address& u, Timestamp t) {
    auto id = g.find(u);
    if (!id) throw Error(ErrorCode::UnknownNode, u.hex());
    Timestamp born = g.node(*id).first_seen;
    if (t < born) throw Error(ErrorCode::NegativeAge, u.hex() + " first seen at " + std::to_string(born));
    return t - born;
}

// --- SimpleDigraph -----------------------------------------------------------

SimpleDigraph::SimpleDigraph(std::size_t node_count, std::vector<Pair> pairs, bool allow_self_loops,
                             std::vector<NodeId> original_ids)
    : n_(node_count), pairs_(std::move(pairs)), original_(std::move(original_ids)) {
    if (!allow_self_loops)
        std::erase_if(pairs_, [](const Pair& p) { return p.first == p.second; });
    std::sort(pairs_.begin(), pairs_.end());
    pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());

    out_off_.assign(n_ + 1, 0);
    in_off_.assign(n_ + 1, 0);
    for (const auto& [u, v] : pairs_) {
        ++out_off_[u + 1];
        ++in_off_[v + 1];
        if (u == v) self_loops_ = true;
    }
    for (std::size_t i = 0; i < n_; ++i) {
        out_off_[i + 1] += out_off_[i];
        in_off_[i + 1] += in_off_[i];
    }
    out_adj_.resize(pairs_.size());
    in_adj_.resize(pairs_.size());
    auto out_pos = out_off_;
    auto in_pos = in_off_;
    // pairs are sorted by (u, v), so out lists come out sorted; in lists are sorted by u as well
    for (const auto& [u, v] : pairs_) {
        out_adj_[out_pos[u]++] = v;
        in_adj_[in_pos[v]++] = u;
    }
}

bool SimpleDigraph::has_pair(std::uint32_t u, std::uint32_t v) const {
    auto o = out(u);
    return std::binary_search(o.begin(), o.end(), v);
}

SimpleDigraph simple_view(const TemporalGraph& g, Timestamp t, SimpleViewFlags flags) {
    const std::size_t n_prefix = g.nodes_until(t);
    const bool drop_null = !flags.include_null && g.null_node() && *g.null_node() < n_prefix;
    std::vector<NodeId> original;
    std::vector<std::uint32_t> dense;
    if (drop_null) {
        NodeId null_id = *g.null_node();
        original.reserve(n_prefix - 1);
        dense.assign(n_prefix, UINT32_MAX);
        for (NodeId u = 0; u < n_prefix; ++u) {
            if (u == null_id) continue;
            dense[u] = static_cast<std::uint32_t>(original.size());
            original.push_back(u);
        }
    } else {
        original.resize(n_prefix);
        for (NodeId u = 0; u < n_prefix; ++u) original[u] = u;
    }

    std::vector<Pair> pairs;
    auto edges = g.edges().first(g.edges_until(t));
    pairs.reserve(edges.size());
    for (const auto& e : edges) {
        if (drop_null) {
            if (g.is_null(e.src) || g.is_null(e.dst)) continue;
            pairs.emplace_back(dense[e.src], dense[e.dst]);
        } else {
            pairs.emplace_back(e.src, e.dst);
        }
    }
    auto n = original.size();
    return SimpleDigraph(n, std::move(pairs), flags.include_self_loops, std::move(original));
}

SimpleDigraph simple_view(const TemporalGraph& g, SimpleViewFlags flags) {
    return simple_view(g, g.max_time().value_or(0), flags);
}

SimpleDigraph peel_degree_one(const SimpleDigraph& view) {
    const auto n = view.node_count();
    std::vector<char> removed(n, 0);
    for (std::uint32_t u = 0; u < n; ++u)
        if (view.total_degree(u) == 1) removed[u] = 1;

    std::vector<Pair> kept_pairs;
    std::vector<char> touched(n, 0);
    for (const auto& [u, v] : view.pairs()) {
        if (removed[u] || removed[v]) continue;
        kept_pairs.emplace_back(u, v);
        touched[u] = touched[v] = 1;
    }
    std::vector<std::uint32_t> dense(n, UINT32_MAX);
    std::vector<NodeId> original;
    auto src_ids = view.original_ids();
    for (std::uint32_t u = 0; u < n; ++u) {
        if (!touched[u]) continue;
        dense[u] = static_cast<std::uint32_t>(original.size());
        original.push_back(src_ids.empty() ? u : src_ids[u]);
    }
    for (auto& [u, v] : kept_pairs) {
        u = dense[u];
        v = dense[v];
    }
    const auto count = original.size();
    return SimpleDigraph(count, std::move(kept_pairs), view.has_self_loops(), std::move(original));
}

}  // namespace nftgraph
