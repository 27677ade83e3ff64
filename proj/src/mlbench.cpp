#include "nftgraph/mlbench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>
#include <unordered_map>

#include "json.hpp"
#include "nftgraph/error.hpp"
#include "nftgraph/util.hpp"

namespace nftgraph {

namespace {

std::uint64_t key_of(NodeId u, NodeId v) { return static_cast<std::uint64_t>(u) << 32 | v; }

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + p.string());
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::optional<double> parse_score(std::string_view s) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace

// --- snapshots -----------------------------------------------------------------

std::span<const std::uint32_t> SnapshotSeries::period_edges(std::size_t i) const {
    const auto& s = snapshots.at(i);
    return std::span<const std::uint32_t>(kept).subspan(s.begin, s.end_offset - s.begin);
}

std::span<const std::uint32_t> SnapshotSeries::cumulative_edges(std::size_t i) const {
    return std::span<const std::uint32_t>(kept).first(snapshots.at(i).end_offset);
}

std::vector<NodeId> SnapshotSeries::nodes_by(std::size_t i) const {
    std::vector<char> seen(graph->node_count(), 0);
    for (auto idx : cumulative_edges(i)) {
        const auto& e = graph->edges()[idx];
        seen[e.src] = seen[e.dst] = 1;
    }
    std::vector<NodeId> out;
    for (NodeId u = 0; u < seen.size(); ++u)
        if (seen[u]) out.push_back(u);
    return out;
}

std::vector<Pair> SnapshotSeries::period_pairs(std::size_t i) const {
    std::vector<Pair> out;
    for (auto idx : period_edges(i)) {
        const auto& e = graph->edges()[idx];
        if (e.src != e.dst) out.emplace_back(e.src, e.dst);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

SnapshotSeries build_snapshots(const TemporalGraph& g, Granularity gran, bool exclude_null) {
    SnapshotSeries s;
    s.graph = &g;
    s.granularity = gran;
    s.exclude_null = exclude_null;
    const auto edges = g.edges();
    for (std::uint32_t i = 0; i < edges.size(); ++i)
        if (!exclude_null || (!g.is_null(edges[i].src) && !g.is_null(edges[i].dst))) s.kept.push_back(i);
    if (s.kept.empty()) return s;
    const auto first = period_index(edges[s.kept.front()].ts, gran);
    const auto last = period_index(edges[s.kept.back()].ts, gran);
    std::size_t pos = 0;
    for (auto p = first; p <= last; ++p) {
        Snapshot snap;
        snap.period = p;
        snap.label = period_label(p, gran);
        snap.start = period_start(p, gran);
        snap.end = period_end(p, gran);
        snap.begin = pos;
        while (pos < s.kept.size() && edges[s.kept[pos]].ts < snap.end) ++pos;
        snap.end_offset = pos;
        s.snapshots.push_back(std::move(snap));
    }
    return s;
}

// --- splits --------------------------------------------------------------------

std::optional<SplitMode> parse_split_mode(std::string_view s) {
    if (s == "fixed") return SplitMode::Fixed;
    if (s == "live_update" || s == "live-update") return SplitMode::LiveUpdate;
    if (s == "node_fixed" || s == "node-fixed") return SplitMode::NodeFixed;
    return std::nullopt;
}

std::string_view to_string(SplitMode m) {
    switch (m) {
        case SplitMode::Fixed: return "fixed";
        case SplitMode::LiveUpdate: return "live_update";
        case SplitMode::NodeFixed: return "node_fixed";
    }
    return "?";
}

std::string_view to_string(Role r) {
    switch (r) {
        case Role::Train: return "train";
        case Role::Val: return "val";
        case Role::Test: return "test";
    }
    return "?";
}

SplitPlan make_split(std::size_t t, SplitMode mode) {
    SplitPlan plan;
    plan.mode = mode;
    plan.roles.assign(t, Role::Train);
    switch (mode) {
        case SplitMode::Fixed: {
            const std::size_t test = (t + 4) / 5;
            for (std::size_t i = t - test; i < t; ++i) plan.roles[i] = Role::Test;
            break;
        }
        case SplitMode::NodeFixed: {
            const std::size_t train = t * 8 / 10;
            const std::size_t val = t * 9 / 10;
            for (std::size_t i = train; i < t; ++i) plan.roles[i] = i < val ? Role::Val : Role::Test;
            break;
        }
        case SplitMode::LiveUpdate:
            for (std::size_t i = 1; i < t; ++i) plan.roles[i] = Role::Test;
            break;
    }
    return plan;
}

std::vector<char> early_stop_mask(std::size_t n, std::uint64_t seed, double fraction) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);
    const auto m = std::min(n, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
    std::vector<char> mask(n, 0);
    for (std::size_t i = 0; i < m; ++i) mask[order[i]] = 1;
    return mask;
}

// --- negatives -----------------------------------------------------------------

NegativeSamples sample_negatives(const SnapshotSeries& s, std::size_t index, std::size_t k, std::uint64_t seed) {
    NegativeSamples out;
    out.positives = s.period_pairs(index);
    const auto eligible = s.nodes_by(index);
    if (eligible.size() < k + 1)
        throw Error(ErrorCode::InsufficientNodes, "snapshot " + s.snapshots[index].label + " has " +
                                                      std::to_string(eligible.size()) + " nodes, need " +
                                                      std::to_string(k + 1));
    Rng rng(derive_seed(seed, index));
    std::vector<char> excluded(s.graph->node_count(), 0);
    std::vector<char> chosen(s.graph->node_count(), 0);
    std::vector<NodeId> pool;
    for (std::size_t p = 0; p < out.positives.size();) {
        const NodeId u = out.positives[p].first;
        std::size_t q = p;
        while (q < out.positives.size() && out.positives[q].first == u) ++q;
        std::vector<NodeId> marks{u};
        for (std::size_t j = p; j < q; ++j) marks.push_back(out.positives[j].second);
        for (auto w : marks) excluded[w] = 1;
        std::size_t blocked = 0;
        for (auto w : marks) blocked += std::binary_search(eligible.begin(), eligible.end(), w) ? 1 : 0;
        const std::size_t available = eligible.size() - blocked;
        if (available < k)
            throw Error(ErrorCode::InsufficientNodes, "source " + std::to_string(u) + " has only " +
                                                          std::to_string(available) + " eligible targets");
        const bool rejection = available * 2 >= eligible.size();
        if (!rejection) {
            pool.clear();
            for (auto w : eligible)
                if (!excluded[w]) pool.push_back(w);
        }
        for (std::size_t j = p; j < q; ++j) {
            std::vector<NodeId> picks;
            picks.reserve(k);
            if (rejection) {
                while (picks.size() < k) {
                    const NodeId w = eligible[rng.below(eligible.size())];
                    if (excluded[w] || chosen[w]) continue;
                    chosen[w] = 1;
                    picks.push_back(w);
                }
                for (auto w : picks) chosen[w] = 0;
            } else {
                for (std::size_t r = 0; r < k; ++r) {
                    std::swap(pool[r], pool[r + rng.below(pool.size() - r)]);
                    picks.push_back(pool[r]);
                }
            }
            out.negatives.push_back(std::move(picks));
        }
        for (auto w : marks) excluded[w] = 0;
        p = q;
    }
    return out;
}

// --- trader labels -------------------------------------------------------------

std::string_view to_string(TraderClass c) {
    switch (c) {
        case TraderClass::Daily: return "daily";
        case TraderClass::Weekly: return "weekly";
        case TraderClass::Monthly: return "monthly";
        case TraderClass::Yearly: return "yearly";
        case TraderClass::Remaining: return "remaining";
    }
    return "?";
}

TraderClass classify_gap(Timestamp gap) {
    if (gap <= kSecondsPerDay) return TraderClass::Daily;
    if (gap <= 7 * kSecondsPerDay) return TraderClass::Weekly;
    if (gap <= 30 * kSecondsPerDay) return TraderClass::Monthly;
    if (gap <= 365 * kSecondsPerDay) return TraderClass::Yearly;
    return TraderClass::Remaining;
}

std::vector<TraderLabel> trader_labels(const TemporalGraph& g, bool exclude_null) {
    const auto n = g.node_count();
    std::vector<Timestamp> last(n, 0), gap(n, 0);
    std::vector<std::uint64_t> count(n, 0);
    auto touch = [&](NodeId u, Timestamp ts) {
        if (count[u]) gap[u] = std::max(gap[u], ts - last[u]);
        last[u] = ts;
        ++count[u];
    };
    for (const auto& e : g.edges()) {
        if (exclude_null && (g.is_null(e.src) || g.is_null(e.dst))) continue;
        touch(e.src, e.ts);
        if (e.dst != e.src) touch(e.dst, e.ts);
    }
    std::vector<TraderLabel> out;
    for (NodeId u = 0; u < n; ++u) {
        if (count[u] < 2 || (exclude_null && g.is_null(u))) continue;
        out.push_back({u, g.node(u).address, classify_gap(gap[u]), gap[u], count[u]});
    }
    return out;
}

// --- features and export ---------------------------------------------------------

std::vector<PairFeature> edge_features(const SnapshotSeries& s, std::size_t i) {
    const auto pairs = s.period_pairs(i);
    std::unordered_map<std::uint64_t, std::size_t> slot;
    std::vector<PairFeature> out;
    out.reserve(pairs.size());
    for (auto [u, v] : pairs) {
        slot.emplace(key_of(u, v), out.size());
        out.push_back({u, v, 0, 0});
    }
    for (auto idx : s.cumulative_edges(i)) {
        const auto& e = s.graph->edges()[idx];
        auto it = slot.find(key_of(e.src, e.dst));
        if (it == slot.end()) continue;
        auto& f = out[it->second];
        ++f.tx_count;
        f.last_ts = std::max(f.last_ts, e.ts);
    }
    return out;
}

std::vector<std::pair<NodeId, std::size_t>> node_features(const SnapshotSeries& s, std::size_t i) {
    std::vector<std::uint64_t> keys;
    for (auto idx : s.cumulative_edges(i)) {
        const auto& e = s.graph->edges()[idx];
        if (e.src != e.dst) keys.push_back(key_of(e.src, e.dst));
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    std::vector<std::size_t> degree(s.graph->node_count(), 0);
    for (auto k : keys) {
        ++degree[k >> 32];
        ++degree[k & 0xffffffffU];
    }
    std::vector<std::pair<NodeId, std::size_t>> out;
    for (auto u : s.nodes_by(i)) out.emplace_back(u, degree[u]);
    return out;
}

ExportSummary export_features(const SnapshotSeries& s, const std::filesystem::path& dir, const ExportOptions& opt,
                              const std::string& config_json) {
    using nlohmann::json;
    std::filesystem::create_directories(dir);
    const auto plan = make_split(s.size(), opt.split);
    ExportSummary summary;
    summary.snapshots = s.size();

    std::map<NodeId, TraderClass> labels;
    if (opt.task == MlTask::Node)
        for (const auto& l : trader_labels(*s.graph, s.exclude_null)) labels[l.node] = l.cls;

    {
        auto out = open_out(dir / "addresses.csv");
        out << "address_id,address\n";
        for (NodeId u = 0; u < s.graph->node_count(); ++u)
            if (!(s.exclude_null && s.graph->is_null(u))) out << u << ',' << s.graph->node(u).address.hex() << '\n';
    }

    json series;
    series["config"] = json::parse(config_json);
    series["granularity"] = std::string(to_string(s.granularity));
    series["split"] = std::string(to_string(opt.split));
    series["task"] = opt.task == MlTask::Link ? "link" : "node";
    series["seed"] = opt.seed;
    series["exclude_null"] = s.exclude_null;
    series["snapshots"] = json::array();

    std::uint64_t positive_id = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto& snap = s.snapshots[i];
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%04zu", i);
        const auto sub = dir / name;
        std::filesystem::create_directories(sub);

        const auto edges = edge_features(s, i);
        {
            auto out = open_out(sub / "edges.csv");
            out << "src,dst,tx_count,last_ts\n";
            for (const auto& f : edges) out << f.src << ',' << f.dst << ',' << f.tx_count << ',' << f.last_ts << '\n';
        }
        const auto nodes = node_features(s, i);
        {
            auto out = open_out(sub / "nodes.csv");
            out << (opt.task == MlTask::Node ? "address_id,degree,label\n" : "address_id,degree\n");
            for (auto [u, d] : nodes) {
                if (opt.task == MlTask::Link) {
                    out << u << ",1\n";
                    continue;
                }
                out << u << ',' << d << ',';
                if (auto it = labels.find(u); it != labels.end()) out << to_string(it->second);
                out << '\n';
            }
        }

        json manifest;
        manifest["granularity"] = std::string(to_string(s.granularity));
        manifest["index"] = i;
        manifest["label"] = snap.label;
        manifest["start"] = snap.start;
        manifest["end"] = snap.end;
        manifest["role"] = std::string(to_string(plan.roles[i]));
        manifest["seed"] = opt.seed;
        manifest["task"] = opt.task == MlTask::Link ? "link" : "node";
        manifest["node_feature"] = opt.task == MlTask::Link ? "constant" : "cumulative_total_degree";
        manifest["edges"] = edges.size();
        manifest["nodes"] = nodes.size();
        manifest["negatives_file"] = nullptr;

        if (opt.task == MlTask::Link && plan.roles[i] != Role::Train && !edges.empty()) {
            try {
                const auto neg = sample_negatives(s, i, opt.negatives, opt.seed);
                auto out = open_out(sub / "negatives.csv");
                out << "positive_id,src,dst";
                for (std::size_t j = 1; j <= opt.negatives; ++j) out << ",neg_" << j;
                out << '\n';
                for (std::size_t p = 0; p < neg.positives.size(); ++p) {
                    out << positive_id++ << ',' << neg.positives[p].first << ',' << neg.positives[p].second;
                    for (auto w : neg.negatives[p]) out << ',' << w;
                    out << '\n';
                }
                summary.positives += neg.positives.size();
                manifest["negatives_file"] = "negatives.csv";
                manifest["negatives_k"] = opt.negatives;
            } catch (const Error& err) {
                if (err.code() != ErrorCode::InsufficientNodes) throw;
                summary.skipped_negatives.push_back(snap.label);
                manifest["negatives_skipped"] = err.what();
            }
        }
        if (opt.split == SplitMode::LiveUpdate) {
            const auto mask = early_stop_mask(edges.size(), derive_seed(opt.seed, 0x5eed0000ULL + i), opt.early_stop_fraction);
            auto out = open_out(sub / "early_stop.csv");
            out << "src,dst,early_stop\n";
            for (std::size_t r = 0; r < edges.size(); ++r)
                out << edges[r].src << ',' << edges[r].dst << ',' << int(mask[r]) << '\n';
            manifest["early_stop_file"] = "early_stop.csv";
        }
        {
            auto out = open_out(sub / "manifest.json");
            out << manifest.dump(2) << '\n';
        }
        series["snapshots"].push_back(
            {{"dir", name}, {"label", snap.label}, {"start", snap.start}, {"end", snap.end},
             {"role", std::string(to_string(plan.roles[i]))}});
    }
    auto out = open_out(dir / "series.json");
    out << series.dump(2) << '\n';
    return summary;
}

// --- evaluation ----------------------------------------------------------------

std::pair<double, double> score_record(double positive, std::span<const double> negatives) {
    std::size_t below = 0, ties = 0, above = 0;
    for (double n : negatives) {
        if (n < positive) ++below;
        else if (n > positive) ++above;
        else ++ties;
    }
    const double k = static_cast<double>(negatives.size());
    const double auc = (static_cast<double>(below) + 0.5 * static_cast<double>(ties)) / k;
    const double rank = 1.0 + static_cast<double>(above) + static_cast<double>(ties) / 2.0;
    return {auc, 1.0 / rank};
}

EvalResult eval_scores(std::istream& in, MlTask task) {
    EvalResult r;
    r.task = task;
    std::string line;
    std::size_t line_no = 0;
    double auc_sum = 0, rr_sum = 0;
    std::size_t correct = 0;
    std::map<std::string, std::pair<std::size_t, std::size_t>> per_class;  // truth -> (hits, total)
    std::vector<double> negs;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        auto bad = [&](const std::string& why) {
            return Error(ErrorCode::BadRecord, "line " + std::to_string(line_no) + ": " + why);
        };
        if (task == MlTask::Link) {
            if (f.size() < 3) throw bad("expected positive_id,pos_score,neg_scores...");
            const auto pos = parse_score(f[1]);
            if (!pos) {
                if (line_no == 1) continue;
                throw bad("bad positive score '" + std::string(f[1]) + "'");
            }
            const std::size_t k = f.size() - 2;
            if (r.records == 0) r.k = k;
            else if (k != r.k) throw bad("expected " + std::to_string(r.k) + " negative scores, got " + std::to_string(k));
            negs.clear();
            for (std::size_t j = 2; j < f.size(); ++j) {
                const auto v = parse_score(f[j]);
                if (!v) throw bad("bad negative score '" + std::string(f[j]) + "'");
                negs.push_back(*v);
            }
            const auto [auc, rr] = score_record(*pos, negs);
            auc_sum += auc;
            rr_sum += rr;
        } else {
            if (f.size() != 3) throw bad("expected node_id,true_label,predicted_label");
            if (line_no == 1 && f[1] == "true_label") continue;
            if (f[1].empty()) throw bad("empty true label");
            auto& c = per_class[std::string(f[1])];
            ++c.second;
            if (f[1] == f[2]) {
                ++c.first;
                ++correct;
            }
        }
        ++r.records;
    }
    if (r.records == 0) throw Error(ErrorCode::BadRecord, "no score records");
    const double n = static_cast<double>(r.records);
    if (task == MlTask::Link) {
        r.auc = auc_sum / n;
        r.mrr = rr_sum / n;
    } else {
        r.accuracy = static_cast<double>(correct) / n;
        double sum = 0;
        for (const auto& [cls, c] : per_class) {
            const double rec = static_cast<double>(c.first) / static_cast<double>(c.second);
            r.recall_by_class[cls] = rec;
            sum += rec;
        }
        r.macro_recall = sum / static_cast<double>(per_class.size());
    }
    return r;
}

}  // namespace nftgraph
