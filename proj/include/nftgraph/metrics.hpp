#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nftgraph/calendar.hpp"
#include "nftgraph/graph.hpp"

namespace nftgraph {

// --- calendar series ---------------------------------------------------------

template <class T>
struct PeriodBucket {
    std::int64_t index = 0;
    std::string label;
    Timestamp start = 0;  // inclusive
    Timestamp end = 0;    // exclusive
    T value{};
};

/// Contiguous calendar buckets covering the data range.
template <class T>
struct PeriodSeries {
    Granularity granularity = Granularity::Year;
    std::vector<PeriodBucket<T>> buckets;
};

/// Empty buckets from the period of `first` through the period of `last`.
template <class T>
PeriodSeries<T> make_periods(Timestamp first, Timestamp last, Granularity g) {
    PeriodSeries<T> s;
    s.granularity = g;
    for (auto i = period_index(first, g), stop = period_index(last, g); i <= stop; ++i)
        s.buckets.push_back({i, period_label(i, g), period_start(i, g), period_end(i, g), T{}});
    return s;
}

// --- growth ------------------------------------------------------------------

struct GrowthRecord {
    std::uint64_t new_nodes = 0;
    std::uint64_t new_mint_nodes = 0;
    std::uint64_t new_nonmint_nodes = 0;
    std::uint64_t new_edges = 0;                // distinct pairs first formed in the period
    std::uint64_t new_bidirectional_edges = 0;  // ordered pairs whose reverse first coexists in the period
    std::uint64_t new_self_loops = 0;
    double pct_edges_new_old = 0;
    double pct_edges_new_new = 0;
    double pct_edges_old_old = 0;
};

/// A node is new in the period of its first edge; a new pair is new-new when both
/// endpoints are new in that period, new-old when exactly one is.
PeriodSeries<GrowthRecord> growth_series(const TemporalGraph& g, Granularity gran, SimpleViewFlags flags = {});

// --- structural metrics over a simple view -------------------------------------

enum class DegreeMode { Total, In, Out };

std::size_t degree_of(const SimpleDigraph& view, std::uint32_t u, DegreeMode mode);

/// Degree assortativity over the pairs of the view. nullopt when the variance term
/// vanishes (e.g. regular graphs). Throws Error(EmptyView) without pairs.
std::optional<double> assortativity(const SimpleDigraph& view, DegreeMode mode = DegreeMode::Total);

/// |E| / (|V| (|V| - 1)). Throws Error(TooSmall) below two vertices.
double density(const SimpleDigraph& view);

/// Fraction of pairs (i, j) whose reverse (j, i) is also present. Throws Error(EmptyView).
double reciprocity(const SimpleDigraph& view);

/// c_i over the in/out neighbourhood N_i; vertices with |N_i| < 2 contribute 0.
std::vector<double> local_clustering(const SimpleDigraph& view);
double avg_clustering(const SimpleDigraph& view);

std::map<std::size_t, std::uint64_t> degree_histogram(const SimpleDigraph& view, DegreeMode mode = DegreeMode::Total);

struct EffectiveDiameterConfig {
    std::size_t exact_threshold = 10000;
    std::size_t sample_sources = 1000;
    std::uint64_t seed = 1;
    double quantile = 0.9;
    // No reachable pair is closer than 1 hop, so the interpolated value is floored at 1.
    bool clamp_at_one = true;
};

/// Histogram of hop distances between ordered reachable pairs on the undirected projection.
struct DistanceDistribution {
    std::vector<std::uint64_t> count_at;  // count_at[d], d >= 1; count_at[0] unused
    std::uint64_t reachable_pairs = 0;
    std::size_t sources = 0;
    bool exact = true;
};

DistanceDistribution distance_distribution(const SimpleDigraph& view, const EffectiveDiameterConfig& cfg = {});

/// Linear interpolation of x with g(x) = quantile where g is the cumulative distance
/// distribution and g(0) = 0. Throws Error(NoPairs) on an empty distribution.
double interpolate_quantile_distance(const DistanceDistribution& dist, double quantile, bool clamp_at_one);

double effective_diameter(const SimpleDigraph& view, const EffectiveDiameterConfig& cfg = {});

// --- temporal behaviours ------------------------------------------------------

struct MutualPair {
    NodeId a = 0;  // a < b
    NodeId b = 0;
    Timestamp first_ab = 0;  // earliest a -> b
    Timestamp first_ba = 0;  // earliest b -> a
    Timestamp interval() const { return first_ab > first_ba ? first_ab - first_ba : first_ba - first_ab; }
};

struct MutualIntervals {
    Timestamp bucket_seconds = kSecondsPerDay;
    std::vector<MutualPair> pairs;               // sorted by (a, b)
    std::map<std::int64_t, std::uint64_t> histogram;  // bucket -> pair count

    /// Fraction of pairs whose bucket is <= `bucket`.
    double cumulative(std::int64_t bucket) const;
};

/// Unordered pairs with edges in both directions; interval between the earliest edge each way.
MutualIntervals mutual_edge_intervals(const TemporalGraph& g, SimpleViewFlags flags = {},
                                      Timestamp bucket_seconds = kSecondsPerDay);

struct ActivePeriods {
    std::map<std::int64_t, std::uint64_t> nodes_by_days;  // 1-based day bucket -> nodes
    std::map<std::int64_t, double> mean_tx_by_days;       // 1-based day bucket -> mean tx_count
    std::uint64_t nodes_considered = 0;

    double share(std::int64_t days) const;
};

/// Span between first and last transaction, floor(span / 1 day) + 1; single-transaction nodes dropped.
ActivePeriods active_periods(const TemporalGraph& g, bool include_null = true);

struct HolderRow {
    NodeId node = 0;
    Address address;
    std::uint64_t tokens = 0;
    std::uint64_t collections = 0;
    bool is_null = false;
};

struct HolderStats {
    Timestamp cutoff = 0;
    std::vector<HolderRow> holders;  // accounts holding at least one token, by node id

    HolderRow lookup(const TemporalGraph& g, const Address& a) const;
    /// Sorted by tokens desc, collections desc, address asc.
    std::vector<HolderRow> top(std::size_t k, bool include_null = true) const;
};

/// An account holds a token iff it received the token's latest transfer at or before t.
HolderStats holder_stats(const TemporalGraph& g, Timestamp t);

struct HubCorrelation {
    double r = 0;
    std::size_t nodes = 0;
    std::vector<double> degree;       // x per node present by the end of the period
    std::vector<double> new_contacts;  // y per node
};

/// Pearson r between node degree at the end of period `period` and the number of distinct
/// neighbours first seen in the following period that connect to it during that period.
/// Throws Error(Degenerate) on zero variance.
HubCorrelation hub_correlation(const TemporalGraph& g, Granularity gran, std::int64_t period,
                               SimpleViewFlags flags = {});

double pearson(const std::vector<double>& x, const std::vector<double>& y);

enum class TetClass { TrainOnly, TestOnly, Both };

struct TeaCounts {
    std::uint64_t recurring = 0;
    std::uint64_t fresh = 0;
};

struct TeaTet {
    PeriodSeries<TeaCounts> tea;
    std::vector<std::pair<Pair, TetClass>> tet;  // (src, dst) node ids, sorted
    std::uint64_t train_only = 0;
    std::uint64_t test_only = 0;
    std::uint64_t both = 0;
};

/// TEA counts distinct pairs per period as recurring (seen in an earlier period) or new.
/// TET classes each distinct pair by occurrence before / at-or-after split_time.
TeaTet tea_tet(const TemporalGraph& g, Granularity gran, Timestamp split_time, SimpleViewFlags flags = {});

// --- reports -------------------------------------------------------------------

struct MetricsReport {
    std::size_t nodes = 0;
    std::size_t pairs = 0;
    std::optional<double> assortativity;
    std::optional<double> density;
    std::optional<double> reciprocity;
    double avg_clustering = 0;
    std::optional<double> effective_diameter;
    std::map<std::size_t, std::uint64_t> degree_histogram;
};

struct ReportConfig {
    DegreeMode degree_mode = DegreeMode::Total;
    EffectiveDiameterConfig diameter;
    bool with_diameter = true;
};

/// Every structural metric of a view; metrics whose preconditions fail are left empty.
MetricsReport compute_report(const SimpleDigraph& view, const ReportConfig& cfg = {});

}  // namespace nftgraph
