#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nftgraph/ingest.hpp"
#include "nftgraph/types.hpp"

namespace nftgraph {

struct NodeRecord {
    Address address;
    Timestamp first_seen = 0;  // t(u)
    Timestamp last_seen = 0;
    std::uint64_t tx_count = 0;  // incident multigraph edges, a self-loop counts once
    bool entered_via_mint = false;
};

/// One transfer in the temporal multigraph. `token` indexes TemporalGraph::token().
struct Edge {
    NodeId src = 0;
    NodeId dst = 0;
    Timestamp ts = 0;
    std::uint32_t token = 0;
};

struct TokenKey {
    std::uint32_t contract = 0;
    Uint256 id;
    friend bool operator==(const TokenKey&, const TokenKey&) = default;
};

class TemporalGraph;

/// Prefix G_t of a temporal graph: every node and edge with timestamp <= cutoff.
class SnapshotView {
public:
    SnapshotView(const TemporalGraph& g, Timestamp cutoff);

    Timestamp cutoff() const { return cutoff_; }
    std::span<const Edge> edges() const;
    /// Nodes of the prefix are exactly ids [0, node_count()) since ids follow first appearance.
    std::size_t node_count() const { return node_end_; }
    bool contains(NodeId u) const { return u < node_end_; }
    const TemporalGraph& graph() const { return *g_; }

private:
    const TemporalGraph* g_;
    Timestamp cutoff_;
    std::size_t edge_end_;
    std::size_t node_end_;
};

/// Append-only directed temporal multigraph over addresses with a token ledger.
/// Node ids are assigned in order of first appearance, so they are sorted by first_seen.
class TemporalGraph {
public:
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    std::size_t token_count() const { return tokens_.size(); }
    std::size_t contract_count() const { return contracts_.size(); }

    std::span<const Edge> edges() const { return edges_; }
    std::span<const NodeRecord> nodes() const { return nodes_; }
    const NodeRecord& node(NodeId u) const { return nodes_[u]; }
    std::optional<NodeId> find(const Address& a) const;
    std::optional<NodeId> null_node() const { return null_; }
    bool is_null(NodeId u) const { return null_ && *null_ == u; }

    const Address& contract_address(std::uint32_t c) const { return contracts_[c]; }
    const TokenKey& token(std::uint32_t t) const { return tokens_[t]; }
    /// Owner after the last transfer of the token.
    NodeId owner(std::uint32_t t) const { return owners_[t]; }

    /// Number of edges with ts <= t.
    std::size_t edges_until(Timestamp t) const;
    /// Number of nodes with first_seen <= t.
    std::size_t nodes_until(Timestamp t) const;
    SnapshotView snapshot(Timestamp t) const { return SnapshotView(*this, t); }

    std::optional<Timestamp> min_time() const;
    std::optional<Timestamp> max_time() const;

    /// Content digest of nodes, edges and ledger; identical input yields an identical digest.
    std::string summary_digest() const;

    /// Binary cache: "LGLB", u16 version, then node, contract, token and edge tables.
    void save_cache(std::ostream& out) const;
    static TemporalGraph load_cache(std::istream& in);

private:
    friend class GraphBuilder;

    std::vector<NodeRecord> nodes_;
    std::vector<Edge> edges_;
    std::vector<Address> contracts_;
    std::vector<TokenKey> tokens_;
    std::vector<NodeId> owners_;
    std::unordered_map<Address, NodeId> index_;
    std::optional<NodeId> null_;
};

/// Single-writer incremental construction from canonically sorted transfers.
class GraphBuilder {
public:
    GraphBuilder();
    /// Throws Error(UnsortedInput) if the timestamp regresses.
    void add(const TransferEvent& ev);
    TemporalGraph finish();

private:
    NodeId intern_node(const Address& a, Timestamp ts);

    TemporalGraph g_;
    std::unordered_map<Address, std::uint32_t> contract_index_;
    struct TokenKeyHash {
        std::size_t operator()(const TokenKey& k) const noexcept { return k.id.hash() ^ (k.contract * 0x9e3779b9U); }
    };
    std::unordered_map<TokenKey, std::uint32_t, TokenKeyHash> token_index_;
    Timestamp last_ts_ = 0;
};

TemporalGraph build_graph(std::span<const TransferEvent> events);
TemporalGraph build_graph(std::istream& normalized_csv);
TemporalGraph build_graph(const std::filesystem::path& normalized_csv);

/// a_t(u) = t - t(u). Throws Error(UnknownNode) or Error(NegativeAge).
Timestamp node_age(const TemporalGraph& g, const Address& u, Timestamp t);

// --- deduplicated view -------------------------------------------------------

struct SimpleViewFlags {
    bool include_null = false;
    bool include_self_loops = false;
};

using Pair = std::pair<std::uint32_t, std::uint32_t>;

/// Distinct ordered pairs over a dense vertex range [0, node_count()).
class SimpleDigraph {
public:
    SimpleDigraph() = default;
    /// Sorts and deduplicates the pairs; self-loops are dropped unless allowed.
    SimpleDigraph(std::size_t node_count, std::vector<Pair> pairs, bool allow_self_loops = false,
                  std::vector<NodeId> original_ids = {});

    std::size_t node_count() const { return n_; }
    std::size_t pair_count() const { return pairs_.size(); }
    std::span<const Pair> pairs() const { return pairs_; }

    std::span<const std::uint32_t> out(std::uint32_t u) const {
        return {out_adj_.data() + out_off_[u], out_adj_.data() + out_off_[u + 1]};
    }
    std::span<const std::uint32_t> in(std::uint32_t u) const {
        return {in_adj_.data() + in_off_[u], in_adj_.data() + in_off_[u + 1]};
    }
    std::size_t out_degree(std::uint32_t u) const { return out_off_[u + 1] - out_off_[u]; }
    std::size_t in_degree(std::uint32_t u) const { return in_off_[u + 1] - in_off_[u]; }
    std::size_t total_degree(std::uint32_t u) const { return out_degree(u) + in_degree(u); }
    bool has_pair(std::uint32_t u, std::uint32_t v) const;
    bool has_self_loops() const { return self_loops_; }

    /// Temporal-graph node id of each dense vertex; empty for synthetic graphs.
    std::span<const NodeId> original_ids() const { return original_; }

private:
    std::size_t n_ = 0;
    std::vector<Pair> pairs_;
    std::vector<std::size_t> out_off_{0}, in_off_{0};
    std::vector<std::uint32_t> out_adj_, in_adj_;
    std::vector<NodeId> original_;
    bool self_loops_ = false;
};

/// Distinct ordered pairs among edges with ts <= t. Vertices are the prefix nodes,
/// minus the null address when excluded, renumbered densely in node-id order.
SimpleDigraph simple_view(const TemporalGraph& g, Timestamp t, SimpleViewFlags flags = {});
SimpleDigraph simple_view(const TemporalGraph& g, SimpleViewFlags flags = {});

/// One round of removing vertices of total degree 1 and their pairs. Vertices left
/// without any pair afterwards are dropped as well.
SimpleDigraph peel_degree_one(const SimpleDigraph& view);

}  // namespace nftgraph
