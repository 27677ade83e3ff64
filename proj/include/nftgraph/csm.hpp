#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nftgraph/graph.hpp"

namespace nftgraph {

inline constexpr std::size_t kMaxQueryVertices = 16;

/// Small connected directed pattern. Vertices are dense [0, size()).
struct QueryGraph {
    std::string name;
    std::vector<std::optional<int>> labels;  // nullopt = wildcard
    std::vector<Pair> edges;

    std::size_t size() const { return labels.size(); }
    std::size_t out_degree(std::uint32_t x) const;
    std::size_t in_degree(std::uint32_t x) const;
    bool has_edge(std::uint32_t x, std::uint32_t y) const;
};

/// Lines `v <id> <label|*>` and `e <src> <dst>`; `#` starts a comment, `;` separates lines.
/// Throws Error(Parse), Error(Disconnected) or Error(TooLarge).
QueryGraph parse_query(std::string_view text, std::string name = {});
QueryGraph load_query(const std::filesystem::path& path);

/// p1..p5: 3-cycle, 2-cycle, 4-cycle, 3-cycle with its first edge reversed too,
/// two 3-cycles sharing one edge.
QueryGraph builtin_pattern(int index);
std::vector<QueryGraph> builtin_patterns();
std::string format_query(const QueryGraph& q);

/// Permutations of query vertices preserving edges and labels.
std::vector<std::vector<std::uint32_t>> automorphisms(const QueryGraph& q);

struct Match {
    std::vector<std::uint32_t> mapping;  // query vertex -> data vertex
    Pair trigger{0, 0};
    Timestamp trigger_ts = 0;

    friend bool operator==(const Match& a, const Match& b) { return a.mapping == b.mapping; }
};

/// Data vertex labels; an empty vector means unlabeled data, which only wildcard vertices match.
using LabelMap = std::vector<int>;

struct StaticMatchOptions {
    bool dedup_automorphisms = false;
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// Exhaustive backtracking over all injective, direction- and label-preserving embeddings.
/// Matches sorted by mapping. Throws Error(Timeout) past the deadline.
std::vector<Match> match_static(const SimpleDigraph& view, const QueryGraph& q, const LabelMap& labels = {},
                                const StaticMatchOptions& opt = {});

struct StreamEdge {
    std::uint32_t src = 0;
    std::uint32_t dst = 0;
    Timestamp ts = 0;
};

struct MatchOptions {
    bool dedup_automorphisms = false;
    std::optional<Timestamp> window;  // max span of the mapped pairs' first-insertion times
    double time_limit_ms = 3.6e6;
};

/// Incremental matcher for one query over a growing simple digraph.
class MatchContext {
public:
    MatchContext(QueryGraph q, LabelMap labels, MatchOptions opt = {});

    /// Adds a pair to the data graph without reporting matches.
    void load(const StreamEdge& e);
    /// New matches using the pair (src, dst). Empty when the pair already exists or is a self-loop.
    /// Throws Error(Timeout) once the accumulated query time exceeds the limit.
    std::vector<Match> insert_edge(const StreamEdge& e);

    const QueryGraph& query() const { return q_; }
    std::size_t vertex_count() const { return out_.size(); }
    std::size_t pair_count() const { return pair_ts_.size(); }
    bool has_pair(std::uint32_t u, std::uint32_t v) const;
    SimpleDigraph view() const;

    /// Data vertices currently admissible for query vertex x (label and degree filter).
    std::size_t candidate_count(std::uint32_t x) const;
    bool is_candidate(std::uint32_t x, std::uint32_t v) const;

    std::uint64_t mappings() const { return mappings_; }
    std::uint64_t deduped() const { return deduped_; }
    double elapsed_ms() const { return elapsed_ms_; }
    bool timed_out() const { return timed_out_; }

private:
    struct Step {
        std::uint32_t vertex;
        std::uint32_t anchor;  // already mapped query neighbour
        bool from_anchor;      // query edge anchor -> vertex
    };

    void ensure_vertex(std::uint32_t v);
    bool add_pair(const StreamEdge& e);
    void refresh_candidates(std::uint32_t v);
    bool admissible(std::uint32_t x, std::uint32_t v) const;
    bool canonical(const std::vector<std::uint32_t>& m) const;
    bool is_mapped(std::uint32_t x, std::size_t edge_index, std::size_t depth) const;
    void extend(std::size_t edge_index, std::size_t depth, const StreamEdge& trigger, std::vector<Match>& out);
    Timestamp pair_time(std::uint32_t u, std::uint32_t v) const;

    QueryGraph q_;
    LabelMap labels_;
    MatchOptions opt_;
    std::vector<std::vector<std::uint32_t>> out_, in_;
    std::unordered_map<std::uint64_t, Timestamp> pair_ts_;
    std::vector<std::vector<char>> cand_;  // [query vertex][data vertex]
    std::vector<std::size_t> cand_count_;
    std::vector<std::vector<Step>> plans_;  // per query edge
    std::vector<std::vector<std::uint32_t>> autos_;
    std::vector<std::uint32_t> map_;
    std::vector<char> used_;
    std::uint64_t mappings_ = 0;
    std::uint64_t deduped_ = 0;
    double elapsed_ms_ = 0;
    bool timed_out_ = false;
    std::chrono::steady_clock::time_point deadline_;
    std::uint64_t steps_ = 0;
};

struct StreamConfig {
    std::optional<Timestamp> window;
    double time_limit_ms = 3.6e6;
    std::size_t label_pool = 0;  // 0 = unlabeled
    bool label_queries = false;  // draw labels for wildcard query vertices from the same pool
    std::uint64_t seed = 1;
    bool dedup_automorphisms = false;
    std::size_t drop_top_hubs = 0;
};

struct QueryRun {
    std::string query;
    std::uint64_t matches = 0;  // per dedup_automorphisms
    std::uint64_t mappings = 0;
    std::uint64_t deduped = 0;
    double elapsed_ms = 0;
    bool timed_out = false;
};

std::vector<QueryRun> run_stream(std::span<const StreamEdge> initial, std::span<const StreamEdge> stream,
                                 std::span<const QueryGraph> queries, const StreamConfig& cfg = {});

struct StreamSplit {
    std::vector<StreamEdge> initial;
    std::vector<StreamEdge> stream;
};

/// Edges at or before `initial_until` seed the graph, later ones form the stream. Vertex ids are
/// graph node ids; self-loops are skipped and Null-incident edges follow `include_null`.
StreamSplit split_stream(const TemporalGraph& g, Timestamp initial_until, bool include_null = false);

/// Drops every edge touching one of the k vertices of highest total degree over both parts.
void drop_top_hubs(StreamSplit& split, std::size_t k);

}  // namespace nftgraph
