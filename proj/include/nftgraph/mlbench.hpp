#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nftgraph/calendar.hpp"
#include "nftgraph/graph.hpp"

namespace nftgraph {

struct Snapshot {
    std::int64_t period = 0;
    std::string label;
    Timestamp start = 0;  // inclusive
    Timestamp end = 0;    // exclusive
    std::size_t begin = 0;  // [begin, end_offset) into SnapshotSeries::kept
    std::size_t end_offset = 0;
};

/// Calendar snapshots over the kept edges. Snapshot i's period edges are kept[begin, end_offset);
/// its cumulative graph holds kept[0, end_offset).
struct SnapshotSeries {
    const TemporalGraph* graph = nullptr;
    Granularity granularity = Granularity::Day;
    bool exclude_null = true;
    std::vector<std::uint32_t> kept;  // edge indices, time order
    std::vector<Snapshot> snapshots;

    std::size_t size() const { return snapshots.size(); }
    std::span<const std::uint32_t> period_edges(std::size_t i) const;
    std::span<const std::uint32_t> cumulative_edges(std::size_t i) const;
    /// Sorted node ids touched by the cumulative edges of snapshot i.
    std::vector<NodeId> nodes_by(std::size_t i) const;
    /// Distinct (src, dst) pairs of snapshot i's period, self-loops dropped, sorted.
    std::vector<Pair> period_pairs(std::size_t i) const;
};

SnapshotSeries build_snapshots(const TemporalGraph& g, Granularity gran, bool exclude_null = true);

enum class SplitMode { Fixed, LiveUpdate, NodeFixed };
enum class Role { Train, Val, Test };

std::optional<SplitMode> parse_split_mode(std::string_view s);
std::string_view to_string(SplitMode m);
std::string_view to_string(Role r);

struct SplitPlan {
    SplitMode mode = SplitMode::Fixed;
    std::vector<Role> roles;
};

/// fixed: last ceil(T/5) snapshots test. node_fixed: first floor(0.8T) train, up to floor(0.9T) val,
/// rest test. live_update: the first snapshot trains, every later one is evaluated.
SplitPlan make_split(std::size_t snapshot_count, SplitMode mode);

/// Exactly round(fraction * n) of n edges marked, chosen by a seeded shuffle.
std::vector<char> early_stop_mask(std::size_t n, std::uint64_t seed, double fraction = 0.1);

struct NegativeSamples {
    std::vector<Pair> positives;
    std::vector<std::vector<NodeId>> negatives;  // k targets per positive
};

/// For every period pair (u, v): k distinct targets among nodes present by the period end,
/// never v, u, or a target w with (u, w) in the same period. Throws Error(InsufficientNodes).
NegativeSamples sample_negatives(const SnapshotSeries& s, std::size_t index, std::size_t k, std::uint64_t seed);

enum class TraderClass { Daily, Weekly, Monthly, Yearly, Remaining };

std::string_view to_string(TraderClass c);
/// Right-closed thresholds: 1, 7, 30 and 365 days.
TraderClass classify_gap(Timestamp max_gap);

struct TraderLabel {
    NodeId node = 0;
    Address address;
    TraderClass cls = TraderClass::Remaining;
    Timestamp max_gap = 0;
    std::uint64_t transactions = 0;
};

/// Largest gap between consecutive transactions per node; single-transaction nodes are dropped.
/// With exclude_null, Null-incident transfers are ignored entirely.
std::vector<TraderLabel> trader_labels(const TemporalGraph& g, bool exclude_null = true);

enum class MlTask { Link, Node };

struct ExportOptions {
    MlTask task = MlTask::Link;
    SplitMode split = SplitMode::Fixed;
    std::size_t negatives = 100;
    std::uint64_t seed = 1;
    double early_stop_fraction = 0.1;
};

struct PairFeature {
    NodeId src = 0;
    NodeId dst = 0;
    std::uint64_t tx_count = 0;  // transfers src -> dst up to the period end
    Timestamp last_ts = 0;
};

/// Period pairs of snapshot i with cumulative features, sorted by (src, dst).
std::vector<PairFeature> edge_features(const SnapshotSeries& s, std::size_t i);
/// (node, total degree in the cumulative simple view) for every node present by the period end.
std::vector<std::pair<NodeId, std::size_t>> node_features(const SnapshotSeries& s, std::size_t i);

struct ExportSummary {
    std::size_t snapshots = 0;
    std::size_t positives = 0;
    std::vector<std::string> skipped_negatives;  // snapshot labels lacking enough nodes
};

/// Writes snapshot_NNNN/{edges.csv,nodes.csv,manifest.json[,negatives.csv][,early_stop.csv]}
/// plus series.json and addresses.csv under `dir`.
ExportSummary export_features(const SnapshotSeries& s, const std::filesystem::path& dir, const ExportOptions& opt,
                              const std::string& config_json = "{}");

struct EvalResult {
    MlTask task = MlTask::Link;
    std::size_t records = 0;
    std::size_t k = 0;
    double auc = 0;
    double mrr = 0;
    double accuracy = 0;
    double macro_recall = 0;
    std::map<std::string, double> recall_by_class;
};

/// Link: rows `positive_id,pos_score,neg_1..neg_k`. Node: rows `node_id,true_label,predicted_label`.
/// An optional header row is skipped. Throws Error(BadRecord).
EvalResult eval_scores(std::istream& in, MlTask task);

/// AUC and reciprocal rank of one positive against its negatives; ties count half.
std::pair<double, double> score_record(double positive, std::span<const double> negatives);

}  // namespace nftgraph
