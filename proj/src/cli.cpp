#include "nftgraph/cli.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nftgraph/anomaly.hpp"
#include "nftgraph/csm.hpp"
#include "nftgraph/error.hpp"
#include "nftgraph/fixture.hpp"
#include "nftgraph/ingest.hpp"
#include "nftgraph/metrics.hpp"
#include "nftgraph/mlbench.hpp"

namespace nftgraph::cli {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct RunConfig {
    std::vector<std::string> inputs;
    std::string output;
    std::string report;
    std::string out_dir;
    std::string cache;
    std::string ledger;
    std::string granularity = "year";
    bool include_null = false;
    bool include_self_loops = false;
    Timestamp threshold_seconds = kSecondsPerDay;
    std::uint64_t min_tx = 5;
    double ratio = 0.8;
    std::size_t min_run = 100;
    double max_median_interval = 600;
    Timestamp window = -1;
    double time_limit_ms = 3.6e6;
    std::size_t label_pool = 0;
    bool label_queries = false;
    std::uint64_t seed = 1;
    bool dedup = false;
    std::size_t drop_top_hubs = 0;
    Timestamp initial_until = 1640995200;
    std::vector<std::string> queries;
    std::string split = "fixed";
    std::string task = "link";
    std::size_t negatives = 100;
    std::string profile = "planted";
    std::size_t scale = 10000;
    unsigned threads = 0;
    std::size_t diameter_sources = 1000;
    std::size_t exact_threshold = 10000;
    bool no_diameter = false;
    Timestamp split_time = -1;
    Timestamp now = 0;
    std::string address;
    Timestamp at = -1;
    bool raw = false;
    RawFixtureSpec raw_spec{};
};

ordered_json config_json(const std::string& command, const RunConfig& c) {
    ordered_json j;
    j["command"] = command;
    j["inputs"] = c.inputs;
    j["output"] = c.output;
    j["out_dir"] = c.out_dir;
    j["cache"] = c.cache;
    j["granularity"] = c.granularity;
    j["include_null"] = c.include_null;
    j["include_self_loops"] = c.include_self_loops;
    j["threshold_seconds"] = c.threshold_seconds;
    j["min_tx"] = c.min_tx;
    j["ratio"] = c.ratio;
    j["min_run"] = c.min_run;
    j["max_median_interval"] = c.max_median_interval;
    j["window"] = c.window < 0 ? ordered_json(nullptr) : ordered_json(c.window);
    j["time_limit_ms"] = c.time_limit_ms;
    j["label_pool"] = c.label_pool;
    j["label_queries"] = c.label_queries;
    j["seed"] = c.seed;
    j["dedup"] = c.dedup;
    j["drop_top_hubs"] = c.drop_top_hubs;
    j["initial_until"] = c.initial_until;
    j["queries"] = c.queries;
    j["split"] = c.split;
    j["task"] = c.task;
    j["negatives"] = c.negatives;
    j["profile"] = c.profile;
    j["scale"] = c.scale;
    j["diameter_sources"] = c.diameter_sources;
    j["exact_threshold"] = c.exact_threshold;
    j["no_diameter"] = c.no_diameter;
    j["split_time"] = c.split_time < 0 ? ordered_json(nullptr) : ordered_json(c.split_time);
    return j;
}

std::string file_digest(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + p.string());
    Fnv1a h;
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h.update(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
    }
    return h.hex();
}

ordered_json inputs_json(const std::vector<std::string>& paths) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : paths) arr.push_back({{"path", p}, {"fnv1a64", file_digest(p)}});
    return arr;
}

ordered_json num(double v) { return std::isfinite(v) ? ordered_json(round9(v)) : ordered_json(nullptr); }
ordered_json num(const std::optional<double>& v) { return v ? num(*v) : ordered_json(nullptr); }

std::string fmt9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_text(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + p.string());
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write failure on " + p.string());
}

void emit_report(const RunConfig& c, const ordered_json& j, std::ostream& out) {
    if (c.report.empty()) out << j.dump(2) << '\n';
    else write_text(c.report, j.dump(2) + "\n");
}

Granularity granularity_of(const std::string& s) {
    auto g = parse_granularity(s);
    if (!g) throw Error(ErrorCode::Usage, "unknown granularity '" + s + "'");
    return *g;
}

const std::string& single_input(const RunConfig& c) {
    if (c.inputs.size() != 1) throw Error(ErrorCode::Usage, "expected exactly one --input");
    return c.inputs.front();
}

TemporalGraph load_graph(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + p.string());
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() == 4 && std::memcmp(magic, "LGLB", 4) == 0) {
        in.seekg(0);
        return TemporalGraph::load_cache(in);
    }
    in.close();
    return build_graph(p);
}

ordered_json graph_json(const TemporalGraph& g) {
    ordered_json j;
    j["nodes"] = g.node_count();
    j["edges"] = g.edge_count();
    j["tokens"] = g.token_count();
    j["contracts"] = g.contract_count();
    j["digest"] = g.summary_digest();
    return j;
}

SimpleViewFlags flags_of(const RunConfig& c) { return {c.include_null, c.include_self_loops}; }

// --- subcommands ------------------------------------------------------------------

int cmd_ingest(const RunConfig& c, std::ostream& out) {
    if (c.output.empty()) throw Error(ErrorCode::Usage, "--output is required");
    std::vector<fs::path> paths(c.inputs.begin(), c.inputs.end());
    const auto stats = normalize_stream(paths, c.output, {c.threads, c.now});
    ordered_json j;
    j["config"] = config_json("ingest", c);
    j["inputs"] = inputs_json(c.inputs);
    j["output"] = {{"path", c.output}, {"fnv1a64", file_digest(c.output)}};
    j["stats"] = {{"records_read", stats.records_read},
                  {"transfers_emitted", stats.transfers_emitted},
                  {"skipped_wrong_topic", stats.skipped_wrong_topic},
                  {"skipped_non_conforming", stats.skipped_non_conforming},
                  {"skipped_duplicate", stats.skipped_duplicate},
                  {"skipped_malformed", stats.skipped_malformed}};
    j["balanced"] = stats.balanced();
    emit_report(c, j, out);
    return kOk;
}

int cmd_build(const RunConfig& c, std::ostream& out) {
    if (c.cache.empty()) throw Error(ErrorCode::Usage, "--cache is required");
    const auto g = load_graph(single_input(c));
    {
        std::ofstream f(c.cache, std::ios::binary);
        if (!f) throw Error(ErrorCode::Io, "cannot write " + c.cache);
        g.save_cache(f);
    }
    ordered_json j;
    j["config"] = config_json("build", c);
    j["inputs"] = inputs_json(c.inputs);
    j["graph"] = graph_json(g);
    j["cache"] = {{"path", c.cache}, {"fnv1a64", file_digest(c.cache)}};
    emit_report(c, j, out);
    return kOk;
}

int cmd_stats(const RunConfig& c, std::ostream& out) {
    const auto g = load_graph(single_input(c));
    ordered_json j;
    j["config"] = config_json("stats", c);
    j["inputs"] = inputs_json(c.inputs);
    j["graph"] = graph_json(g);
    std::uint64_t mint_nodes = 0, nonmint = 0;
    for (NodeId u = 0; u < g.node_count(); ++u) {
        if (g.is_null(u)) continue;
        (g.node(u).entered_via_mint ? mint_nodes : nonmint) += 1;
    }
    j["mint_nodes"] = mint_nodes;
    j["nonmint_nodes"] = nonmint;
    j["has_null"] = g.null_node().has_value();
    j["first_timestamp"] = g.min_time() ? ordered_json(*g.min_time()) : ordered_json(nullptr);
    j["last_timestamp"] = g.max_time() ? ordered_json(*g.max_time()) : ordered_json(nullptr);
    const auto view = simple_view(g, flags_of(c));
    j["simple_view"] = {{"vertices", view.node_count()}, {"pairs", view.pair_count()}};
    if (!c.address.empty()) {
        const auto a = Address::parse(c.address);
        if (!a) throw Error(ErrorCode::Usage, "bad --address");
        const Timestamp at = c.at >= 0 ? c.at : g.max_time().value_or(0);
        j["node_age"] = {{"address", a->hex()}, {"at", at}, {"seconds", node_age(g, *a, at)}};
    }
    emit_report(c, j, out);
    return kOk;
}

int cmd_metrics(const RunConfig& c, std::ostream& out) {
    const auto gran = granularity_of(c.granularity);
    const auto g = load_graph(single_input(c));
    const auto flags = flags_of(c);
    ordered_json j;
    j["config"] = config_json("metrics", c);
    j["inputs"] = inputs_json(c.inputs);
    j["graph"] = graph_json(g);
    std::ostringstream tidy;
    tidy << "period,metric,value\n";
    auto row = [&](const std::string& period, const char* metric, const ordered_json& v) {
        tidy << period << ',' << metric << ',';
        if (v.is_number_float()) tidy << fmt9(v.get<double>());
        else if (!v.is_null()) tidy << v.dump();
        tidy << '\n';
    };

    const fs::path dir = c.out_dir;
    const bool figures = !c.out_dir.empty();
    if (figures) fs::create_directories(dir);

    j["periods"] = ordered_json::array();
    if (!g.min_time()) {
        emit_report(c, j, out);
        if (figures) write_text(dir / "metrics.csv", tidy.str());
        return kOk;
    }

    ReportConfig rc;
    rc.with_diameter = !c.no_diameter;
    rc.diameter.sample_sources = c.diameter_sources;
    rc.diameter.exact_threshold = c.exact_threshold;
    rc.diameter.seed = c.seed;
    const auto growth = growth_series(g, gran, flags);
    std::ostringstream f1a, f1b, f1c;
    f1a << "period,new_nodes,new_mint_nodes,new_nonmint_nodes\n";
    f1b << "period,new_edges,new_bidirectional_edges,new_self_loops\n";
    f1c << "period,pct_new_old,pct_new_new,pct_old_old\n";
    for (const auto& b : growth.buckets) {
        const auto view = simple_view(g, b.end - 1, flags);
        const auto rep = compute_report(view, rc);
        const auto& gr = b.value;
        ordered_json p;
        p["period"] = b.label;
        p["start"] = b.start;
        p["end"] = b.end;
        p["nodes"] = rep.nodes;
        p["pairs"] = rep.pairs;
        p["assortativity"] = num(rep.assortativity);
        p["density"] = num(rep.density);
        p["reciprocity"] = num(rep.reciprocity);
        p["avg_clustering"] = num(rep.avg_clustering);
        p["effective_diameter"] = num(rep.effective_diameter);
        p["new_nodes"] = gr.new_nodes;
        p["new_mint_nodes"] = gr.new_mint_nodes;
        p["new_nonmint_nodes"] = gr.new_nonmint_nodes;
        p["new_edges"] = gr.new_edges;
        p["new_bidirectional_edges"] = gr.new_bidirectional_edges;
        p["new_self_loops"] = gr.new_self_loops;
        p["pct_edges_new_old"] = num(gr.pct_edges_new_old);
        p["pct_edges_new_new"] = num(gr.pct_edges_new_new);
        p["pct_edges_old_old"] = num(gr.pct_edges_old_old);
        for (auto it = p.begin(); it != p.end(); ++it)
            if (it.key() != "period" && it.key() != "start" && it.key() != "end") row(b.label, it.key().c_str(), it.value());
        j["periods"].push_back(std::move(p));
        f1a << b.label << ',' << gr.new_nodes << ',' << gr.new_mint_nodes << ',' << gr.new_nonmint_nodes << '\n';
        f1b << b.label << ',' << gr.new_edges << ',' << gr.new_bidirectional_edges << ',' << gr.new_self_loops << '\n';
        f1c << b.label << ',' << fmt9(gr.pct_edges_new_old) << ',' << fmt9(gr.pct_edges_new_new) << ','
            << fmt9(gr.pct_edges_old_old) << '\n';
    }

    const auto final_view = simple_view(g, flags);
    std::ostringstream f1d;
    f1d << "degree,count\n";
    for (auto [d, n] : degree_histogram(final_view)) f1d << d << ',' << n << '\n';

    std::ostringstream f2ab;
    f2ab << "period,next_period,r,nodes\n";
    j["hub_correlation"] = ordered_json::array();
    for (std::size_t i = 0; i + 1 < growth.buckets.size(); ++i) {
        const auto& b = growth.buckets[i];
        ordered_json h{{"period", b.label}, {"next_period", growth.buckets[i + 1].label}};
        try {
            const auto hc = hub_correlation(g, gran, b.index, flags);
            h["r"] = num(hc.r);
            h["nodes"] = hc.nodes;
            f2ab << b.label << ',' << growth.buckets[i + 1].label << ',' << fmt9(hc.r) << ',' << hc.nodes << '\n';
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Degenerate) throw;
            h["r"] = nullptr;
            f2ab << b.label << ',' << growth.buckets[i + 1].label << ",,\n";
        }
        j["hub_correlation"].push_back(std::move(h));
    }

    const auto mutual = mutual_edge_intervals(g, flags);
    std::ostringstream f2c, f2d;
    f2c << "days,pairs\n";
    f2d << "days,cumulative_share\n";
    for (auto [d, n] : mutual.histogram) {
        f2c << d << ',' << n << '\n';
        f2d << d << ',' << fmt9(mutual.cumulative(d)) << '\n';
    }
    j["mutual"] = {{"pairs", mutual.pairs.size()},
                   {"share_within_1_day", mutual.pairs.empty() ? ordered_json(nullptr) : num(mutual.cumulative(0))},
                   {"share_within_90_days", mutual.pairs.empty() ? ordered_json(nullptr) : num(mutual.cumulative(89))}};

    const auto active = active_periods(g, c.include_null);
    std::ostringstream f6a, f6b;
    f6a << "days,nodes,share\n";
    f6b << "days,mean_tx\n";
    for (auto [d, n] : active.nodes_by_days)
        f6a << d << ',' << n << ',' << fmt9(static_cast<double>(n) / static_cast<double>(active.nodes_considered)) << '\n';
    for (auto [d, m] : active.mean_tx_by_days) f6b << d << ',' << fmt9(m) << '\n';
    j["active_periods"] = {{"nodes_considered", active.nodes_considered},
                           {"share_one_day", active.nodes_considered ? num(active.share(1)) : ordered_json(nullptr)}};

    const auto holders = holder_stats(g, *g.max_time());
    std::ostringstream f7a, top10;
    f7a << "address_id,tokens,collections\n";
    for (const auto& h : holders.holders)
        if (c.include_null || !h.is_null) f7a << h.node << ',' << h.tokens << ',' << h.collections << '\n';
    top10 << "rank,address,tokens,collections\n";
    j["top_holders"] = ordered_json::array();
    std::size_t rank = 0;
    for (const auto& h : holders.top(10, c.include_null)) {
        top10 << ++rank << ',' << h.address.hex() << ',' << h.tokens << ',' << h.collections << '\n';
        j["top_holders"].push_back({{"address", h.address.hex()}, {"tokens", h.tokens}, {"collections", h.collections}});
    }

    const Timestamp split =
        c.split_time >= 0 ? c.split_time : *g.min_time() + (*g.max_time() - *g.min_time()) * 8 / 10;
    const auto tt = tea_tet(g, gran, split, flags);
    std::ostringstream f9a, f9b;
    f9a << "period,recurring,new\n";
    for (const auto& b : tt.tea.buckets) f9a << b.label << ',' << b.value.recurring << ',' << b.value.fresh << '\n';
    f9b << "class,pairs\ntrain_only," << tt.train_only << "\ntest_only," << tt.test_only << "\nboth," << tt.both << '\n';
    j["tea_tet"] = {{"split_time", split}, {"train_only", tt.train_only}, {"test_only", tt.test_only}, {"both", tt.both}};

    if (figures) {
        write_text(dir / "metrics.csv", tidy.str());
        write_text(dir / "fig1a_nodes.csv", f1a.str());
        write_text(dir / "fig1b_edges.csv", f1b.str());
        write_text(dir / "fig1c_edge_ratio.csv", f1c.str());
        write_text(dir / "fig1d_degree.csv", f1d.str());
        write_text(dir / "fig2ab_hub_correlation.csv", f2ab.str());
        write_text(dir / "fig2c_mutual_days.csv", f2c.str());
        write_text(dir / "fig2d_mutual_ratio.csv", f2d.str());
        write_text(dir / "fig4_properties.csv", tidy.str());
        write_text(dir / "fig6a_active_days.csv", f6a.str());
        write_text(dir / "fig6b_active_tx.csv", f6b.str());
        write_text(dir / "fig7a_holdings.csv", f7a.str());
        write_text(dir / "top10_holders.csv", top10.str());
        write_text(dir / "fig9a_tea.csv", f9a.str());
        write_text(dir / "fig9b_tet.csv", f9b.str());
    }
    emit_report(c, j, out);
    return kOk;
}

int cmd_anomaly(const RunConfig& c, std::ostream& out) {
    const auto g = load_graph(single_input(c));
    const auto candidates = simultaneous_bidirectional(g, c.threshold_seconds, c.include_null);
    const auto flagged = suspicious_pairs(g, candidates, {c.min_tx, c.ratio});
    const auto bots = bot_scan(g, {c.min_run, c.max_median_interval, c.include_null});
    std::ostringstream lines;
    for (const auto& p : flagged) {
        ordered_json j;
        j["type"] = "suspicious_pair";
        j["a"] = p.address_a.hex();
        j["b"] = p.address_b.hex();
        j["interval_seconds"] = p.interval;
        j["rule_hits"] = ordered_json::array();
        if (p.rule_hits & kLowActivity) j["rule_hits"].push_back("LOW_ACTIVITY");
        if (p.rule_hits & kHighRatio) j["rule_hits"].push_back("HIGH_RATIO");
        j["evidence"] = {{"tx_a", p.evidence.tx_a}, {"tx_b", p.evidence.tx_b}, {"between", p.evidence.between},
                         {"ratio_a", num(p.evidence.ratio_a)}, {"ratio_b", num(p.evidence.ratio_b)}};
        lines << j.dump() << '\n';
    }
    for (const auto& b : bots) {
        ordered_json j;
        j["type"] = "bot";
        j["address"] = b.address.hex();
        j["contract"] = b.contract.hex();
        j["direction"] = b.direction == BotDirection::Outgoing ? "outgoing" : "incoming";
        j["run_length"] = b.run_length;
        j["median_interval_seconds"] = num(b.median_interval_seconds);
        j["first_token"] = b.first_token.to_decimal();
        j["last_token"] = b.last_token.to_decimal();
        j["run_start"] = b.run_start;
        j["run_end"] = b.run_end;
        j["length_score"] = num(b.length_score);
        j["tempo_score"] = num(b.tempo_score);
        lines << j.dump() << '\n';
    }
    ordered_json summary;
    summary["type"] = "summary";
    summary["simultaneous_pairs"] = candidates.size();
    summary["flagged_pairs"] = flagged.size();
    summary["flagged_fraction"] =
        candidates.empty() ? ordered_json(nullptr)
                           : num(static_cast<double>(flagged.size()) / static_cast<double>(candidates.size()));
    summary["bot_runs"] = bots.size();
    summary["config"] = config_json("anomaly", c);
    summary["inputs"] = inputs_json(c.inputs);
    lines << summary.dump() << '\n';
    if (c.output.empty()) out << lines.str();
    else write_text(c.output, lines.str());
    return kOk;
}

std::vector<QueryGraph> load_queries(const RunConfig& c) {
    if (c.queries.empty()) return builtin_patterns();
    std::vector<QueryGraph> qs;
    for (const auto& q : c.queries) {
        if (q.size() == 2 && q[0] == 'p' && q[1] >= '1' && q[1] <= '5' && !fs::exists(q)) qs.push_back(builtin_pattern(q[1] - '0'));
        else qs.push_back(load_query(q));
    }
    return qs;
}

int cmd_csm(const RunConfig& c, std::ostream& out) {
    const auto g = load_graph(single_input(c));
    const auto queries = load_queries(c);
    auto split = split_stream(g, c.initial_until, c.include_null);
    StreamConfig sc;
    if (c.window >= 0) sc.window = c.window;
    sc.time_limit_ms = c.time_limit_ms;
    sc.label_pool = c.label_pool;
    sc.label_queries = c.label_queries;
    sc.seed = c.seed;
    sc.dedup_automorphisms = c.dedup;
    sc.drop_top_hubs = c.drop_top_hubs;
    const auto runs = run_stream(split.initial, split.stream, queries, sc);

    std::ostringstream csv;
    csv << "query,matches,elapsed_ms,timed_out\n";
    ordered_json j;
    j["config"] = config_json("csm", c);
    j["inputs"] = inputs_json(c.inputs);
    j["initial_edges"] = split.initial.size();
    j["stream_edges"] = split.stream.size();
    j["queries"] = ordered_json::array();
    bool any_timeout = false;
    for (const auto& r : runs) {
        csv << r.query << ',' << r.matches << ',' << fmt9(r.elapsed_ms) << ',' << (r.timed_out ? "true" : "false") << '\n';
        j["queries"].push_back({{"query", r.query},
                                {"mappings", r.mappings},
                                {"deduped", r.deduped},
                                {"elapsed_ms", num(r.elapsed_ms)},
                                {"timed_out", r.timed_out}});
        any_timeout = any_timeout || r.timed_out;
    }
    if (c.output.empty()) out << csv.str();
    else write_text(c.output, csv.str());
    if (!c.report.empty()) write_text(c.report, j.dump(2) + "\n");
    else if (!c.output.empty()) write_text(c.output + ".json", j.dump(2) + "\n");
    return any_timeout ? kTimeout : kOk;
}

int cmd_export_ml(const RunConfig& c, std::ostream& out) {
    if (c.out_dir.empty()) throw Error(ErrorCode::Usage, "--out-dir is required");
    const auto gran = granularity_of(c.granularity);
    const auto mode = parse_split_mode(c.split);
    if (!mode) throw Error(ErrorCode::Usage, "unknown split mode '" + c.split + "'");
    if (c.task != "link" && c.task != "node") throw Error(ErrorCode::Usage, "unknown task '" + c.task + "'");
    const auto g = load_graph(single_input(c));
    const auto series = build_snapshots(g, gran, !c.include_null);
    ExportOptions opt;
    opt.task = c.task == "link" ? MlTask::Link : MlTask::Node;
    opt.split = *mode;
    opt.negatives = c.negatives;
    opt.seed = c.seed;
    ordered_json cfg = config_json("export-ml", c);
    cfg["inputs_fnv1a64"] = inputs_json(c.inputs);
    const auto summary = export_features(series, c.out_dir, opt, cfg.dump());
    ordered_json j;
    j["config"] = config_json("export-ml", c);
    j["inputs"] = inputs_json(c.inputs);
    j["snapshots"] = summary.snapshots;
    j["positives"] = summary.positives;
    j["negatives_skipped"] = summary.skipped_negatives;
    emit_report(c, j, out);
    return kOk;
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
    if (c.task != "link" && c.task != "node") throw Error(ErrorCode::Usage, "unknown task '" + c.task + "'");
    std::ifstream in(single_input(c), std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + single_input(c));
    const auto r = eval_scores(in, c.task == "link" ? MlTask::Link : MlTask::Node);
    ordered_json j;
    j["config"] = config_json("eval", c);
    j["inputs"] = inputs_json(c.inputs);
    j["records"] = r.records;
    if (r.task == MlTask::Link) {
        j["k"] = r.k;
        j["auc"] = num(r.auc);
        j["mrr"] = num(r.mrr);
    } else {
        j["accuracy"] = num(r.accuracy);
        j["macro_recall"] = num(r.macro_recall);
        ordered_json per = ordered_json::object();
        for (const auto& [k, v] : r.recall_by_class) per[k] = num(v);
        j["recall_by_class"] = per;
    }
    emit_report(c, j, out);
    return kOk;
}

int cmd_fixture(RunConfig c, std::ostream& out) {
    if (c.output.empty()) c.output = "fixture.csv";
    if (c.raw) {
        std::ostringstream rows;
        const auto expect = write_raw_fixture(rows, c.raw_spec, c.seed);
        write_text(c.output, rows.str());
        ordered_json j;
        j["config"] = config_json("fixture", c);
        j["expected_stats"] = {{"records_read", expect.records_read},
                               {"transfers_emitted", expect.transfers_emitted},
                               {"skipped_wrong_topic", expect.skipped_wrong_topic},
                               {"skipped_non_conforming", expect.skipped_non_conforming},
                               {"skipped_duplicate", expect.skipped_duplicate},
                               {"skipped_malformed", expect.skipped_malformed}};
        if (c.ledger.empty()) out << j.dump(2) << '\n';
        else write_text(c.ledger, j.dump(2) + "\n");
        return kOk;
    }
    const auto profile = parse_profile(c.profile);
    if (!profile) throw Error(ErrorCode::Usage, "unknown profile '" + c.profile + "'");
    const auto f = make_fixture({*profile, c.seed, c.scale});
    {
        std::ostringstream csv;
        write_transfer_csv(csv, f.events);
        write_text(c.output, csv.str());
    }
    const auto ledger = ledger_json(f.ledger);
    if (c.ledger.empty()) out << ledger << '\n';
    else write_text(c.ledger, ledger + "\n");
    return kOk;
}

void add_common(CLI::App* sub, RunConfig& c) {
    sub->add_option("--report", c.report, "Write the JSON report here instead of stdout");
    sub->add_option("--threads", c.threads, "Worker threads (0 = hardware)")->capture_default_str();
}

void add_input(CLI::App* sub, RunConfig& c) {
    sub->add_option("--input", c.inputs, "Normalized transfer CSV or graph cache")->required()->expected(1);
}

void add_view_flags(CLI::App* sub, RunConfig& c) {
    sub->add_flag("--include-null,!--exclude-null", c.include_null, "Keep the Null address (default: excluded)");
    sub->add_flag("--include-self-loops", c.include_self_loops, "Keep self-loops in simple views");
}

int dispatch(const std::string& name, const RunConfig& c, std::ostream& out) {
    if (name == "ingest") return cmd_ingest(c, out);
    if (name == "build") return cmd_build(c, out);
    if (name == "stats") return cmd_stats(c, out);
    if (name == "metrics") return cmd_metrics(c, out);
    if (name == "anomaly") return cmd_anomaly(c, out);
    if (name == "csm") return cmd_csm(c, out);
    if (name == "export-ml") return cmd_export_ml(c, out);
    if (name == "eval") return cmd_eval(c, out);
    if (name == "fixture") return cmd_fixture(c, out);
    throw Error(ErrorCode::Usage, "unknown subcommand " + name);
}

}  // namespace

double round9(double v) {
    if (!std::isfinite(v)) return v;
    return std::strtod(fmt9(v).c_str(), nullptr);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"NFT transfer graph toolkit"};
    app.name("nftgraph");
    app.require_subcommand(1);

    auto* ingest = app.add_subcommand("ingest", "Decode raw event logs into the normalized transfer CSV");
    ingest->add_option("--input", c.inputs, "Raw log files (CSV or JSONL)")->required()->expected(1, -1);
    ingest->add_option("--output", c.output, "Normalized transfer CSV")->required();
    ingest->add_option("--now", c.now, "Upper bound for block timestamps (default: wall clock)");
    add_common(ingest, c);

    auto* build = app.add_subcommand("build", "Build the temporal graph and write a binary cache");
    add_input(build, c);
    build->add_option("--cache", c.cache, "Cache file to write")->required();
    add_common(build, c);

    auto* stats = app.add_subcommand("stats", "Graph summary");
    add_input(stats, c);
    add_view_flags(stats, c);
    stats->add_option("--address", c.address, "Report the age of this node");
    stats->add_option("--at", c.at, "Timestamp for --address (default: last timestamp)");
    add_common(stats, c);

    auto* metrics = app.add_subcommand("metrics", "Per-period structural and temporal metrics");
    add_input(metrics, c);
    add_view_flags(metrics, c);
    metrics->add_option("--granularity", c.granularity, "day|week|month|quarter|half-year|year")->capture_default_str();
    metrics->add_option("--out-dir", c.out_dir, "Directory for tidy and figure CSVs");
    metrics->add_option("--seed", c.seed, "Seed for sampled diameters")->capture_default_str();
    metrics->add_option("--diameter-sources", c.diameter_sources, "BFS sources when sampling")->capture_default_str();
    metrics->add_option("--exact-threshold", c.exact_threshold, "Exact diameter up to this many vertices")->capture_default_str();
    metrics->add_flag("--no-diameter", c.no_diameter, "Skip effective diameters");
    metrics->add_option("--split-time", c.split_time, "TET split timestamp (default: 80% of the time range)");
    add_common(metrics, c);

    auto* anomaly = app.add_subcommand("anomaly", "Suspicious simultaneous pairs and bot runs as JSONL");
    add_input(anomaly, c);
    anomaly->add_flag("--include-null,!--exclude-null", c.include_null, "Keep the Null address (default: excluded)");
    anomaly->add_option("--output", c.output, "JSONL destination (default: stdout)");
    anomaly->add_option("--threshold-seconds", c.threshold_seconds, "Simultaneity threshold")->capture_default_str();
    anomaly->add_option("--min-tx", c.min_tx, "LOW_ACTIVITY threshold")->capture_default_str();
    anomaly->add_option("--ratio", c.ratio, "HIGH_RATIO threshold")->capture_default_str();
    anomaly->add_option("--min-run", c.min_run, "Shortest reported token-id run")->capture_default_str();
    anomaly->add_option("--max-median-interval", c.max_median_interval, "Largest median gap of a bot run (s)")
        ->capture_default_str();
    add_common(anomaly, c);

    auto* csm = app.add_subcommand("csm", "Continuous subgraph matching over the transfer stream");
    add_input(csm, c);
    csm->add_flag("--include-null,!--exclude-null", c.include_null, "Keep the Null address (default: excluded)");
    csm->add_option("--queries", c.queries, "Query files, or p1..p5 (default: all built-in patterns)")->expected(0, -1);
    csm->add_option("--initial-until", c.initial_until, "Last timestamp of the initial graph")->capture_default_str();
    csm->add_option("--window", c.window, "Max span of a match's edge times in seconds (-1 = none)")->capture_default_str();
    csm->add_option("--time-limit-ms", c.time_limit_ms, "Query time budget per pattern")->capture_default_str();
    csm->add_option("--label-pool", c.label_pool, "Random vertex labels from this many values (0 = none)")
        ->capture_default_str();
    csm->add_flag("--label-queries", c.label_queries, "Also label wildcard query vertices");
    csm->add_option("--seed", c.seed, "Label seed")->capture_default_str();
    csm->add_flag("--dedup", c.dedup, "Count automorphic mappings once");
    csm->add_option("--drop-top-hubs", c.drop_top_hubs, "Remove the k highest-degree vertices first")->capture_default_str();
    csm->add_option("--output", c.output, "CSV destination (default: stdout)");
    add_common(csm, c);

    auto* ml = app.add_subcommand("export-ml", "Snapshot exports for temporal GNN benchmarks");
    add_input(ml, c);
    ml->add_flag("--include-null,!--exclude-null", c.include_null, "Keep Null-incident transfers (default: removed)");
    ml->add_option("--granularity", c.granularity, "day|week|month")->capture_default_str();
    ml->add_option("--split", c.split, "fixed|live_update|node_fixed")->capture_default_str();
    ml->add_option("--task", c.task, "link|node")->capture_default_str();
    ml->add_option("--negatives", c.negatives, "Negatives per positive")->capture_default_str();
    ml->add_option("--seed", c.seed, "Sampling seed")->capture_default_str();
    ml->add_option("--out-dir", c.out_dir, "Export directory")->required();
    add_common(ml, c);

    auto* ev = app.add_subcommand("eval", "Score externally produced predictions");
    ev->add_option("--scores", c.inputs, "Score CSV")->required()->expected(1);
    ev->add_option("--task", c.task, "link|node")->capture_default_str();
    add_common(ev, c);

    auto* fx = app.add_subcommand("fixture", "Synthetic transfers with a ground-truth ledger");
    fx->add_option("--profile", c.profile, "uniform|preferential|planted")->capture_default_str();
    fx->add_option("--seed", c.seed, "Generator seed")->capture_default_str();
    fx->add_option("--scale", c.scale, "Background transfers (0 = header only)")->capture_default_str();
    fx->add_option("--output", c.output, "Transfer CSV, raw log file with --raw (default: fixture.csv)");
    fx->add_option("--ledger", c.ledger, "Ledger JSON destination (default: stdout)");
    fx->add_flag("--raw", c.raw, "Emit raw event logs instead of normalized transfers");
    fx->add_option("--valid", c.raw_spec.valid, "Raw: conforming Transfer rows")->capture_default_str();
    fx->add_option("--erc20", c.raw_spec.erc20, "Raw: 3-topic Transfer rows")->capture_default_str();
    fx->add_option("--mixed", c.raw_spec.mixed_valid, "Raw: 4-topic rows on a contract with one 3-topic row")
        ->capture_default_str();
    fx->add_option("--wrong-topic", c.raw_spec.wrong_topic, "Raw: Approval rows")->capture_default_str();
    fx->add_option("--malformed", c.raw_spec.malformed, "Raw: malformed rows")->capture_default_str();
    fx->add_option("--duplicates", c.raw_spec.duplicates, "Raw: repeated rows")->capture_default_str();
    fx->add_flag("--jsonl", c.raw_spec.json, "Raw: JSON lines instead of CSV");
    add_common(fx, c);

    std::vector<std::string> storage;
    storage.reserve(args.size() + 1);
    storage.push_back("nftgraph");
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    const auto* chosen = app.get_subcommands().front();
    try {
        return dispatch(chosen->get_name(), c, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        switch (e.code()) {
            case ErrorCode::Usage: return kUsage;
            case ErrorCode::Timeout: return kTimeout;
            default: return kDataError;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace nftgraph::cli
