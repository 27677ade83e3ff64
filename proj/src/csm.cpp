#include "nftgraph/csm.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "nftgraph/error.hpp"
#include "nftgraph/util.hpp"

namespace nftgraph {

namespace {

std::uint64_t key_of(std::uint32_t u, std::uint32_t v) { return static_cast<std::uint64_t>(u) << 32 | v; }

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

long long parse_int(std::string_view s, std::size_t line_no) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || v < 0)
        throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": bad integer '" + std::string(s) + "'");
    return v;
}

bool weakly_connected(const QueryGraph& q) {
    if (q.size() <= 1) return true;
    std::vector<std::uint32_t> parent(q.size());
    std::iota(parent.begin(), parent.end(), 0U);
    auto find = [&](std::uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (auto [a, b] : q.edges) parent[find(a)] = find(b);
    const auto root = find(0);
    for (std::uint32_t x = 1; x < q.size(); ++x)
        if (find(x) != root) return false;
    return true;
}

bool label_ok(const QueryGraph& q, const LabelMap& labels, std::uint32_t x, std::uint32_t v) {
    if (!q.labels[x]) return true;
    return v < labels.size() && labels[v] == *q.labels[x];
}

bool is_canonical(const std::vector<std::uint32_t>& m, const std::vector<std::vector<std::uint32_t>>& autos) {
    for (const auto& s : autos) {
        for (std::size_t i = 0; i < m.size(); ++i) {
            const auto image = m[s[i]];
            if (image < m[i]) return false;
            if (image > m[i]) break;
        }
    }
    return true;
}

}  // namespace

std::size_t QueryGraph::out_degree(std::uint32_t x) const {
    return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(), [&](const Pair& e) { return e.first == x; }));
}

std::size_t QueryGraph::in_degree(std::uint32_t x) const {
    return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(), [&](const Pair& e) { return e.second == x; }));
}

bool QueryGraph::has_edge(std::uint32_t x, std::uint32_t y) const {
    return std::find(edges.begin(), edges.end(), Pair{x, y}) != edges.end();
}

QueryGraph parse_query(std::string_view text, std::string name) {
    QueryGraph q;
    q.name = std::move(name);
    std::map<long long, std::uint32_t> ids;
    std::set<Pair> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find_first_of("\n;", pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (end == text.size() || text[end] == '\n') ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto tok = split_ws(line);
        if (tok.empty()) continue;
        const auto where = "line " + std::to_string(line_no) + ": ";
        if (tok[0] == "v") {
            if (tok.size() != 3) throw Error(ErrorCode::Parse, where + "expected 'v <id> <label|*>'");
            if (!q.edges.empty()) throw Error(ErrorCode::Parse, where + "vertex declared after edges");
            const auto id = parse_int(tok[1], line_no);
            if (ids.count(id)) throw Error(ErrorCode::Parse, where + "duplicate vertex " + std::string(tok[1]));
            if (q.labels.size() >= kMaxQueryVertices)
                throw Error(ErrorCode::TooLarge, "query has more than " + std::to_string(kMaxQueryVertices) + " vertices");
            ids[id] = static_cast<std::uint32_t>(q.labels.size());
            if (tok[2] == "*") q.labels.emplace_back();
            else q.labels.emplace_back(static_cast<int>(parse_int(tok[2], line_no)));
        } else if (tok[0] == "e") {
            if (tok.size() != 3) throw Error(ErrorCode::Parse, where + "expected 'e <src> <dst>'");
            const auto a = ids.find(parse_int(tok[1], line_no));
            const auto b = ids.find(parse_int(tok[2], line_no));
            if (a == ids.end() || b == ids.end()) throw Error(ErrorCode::Parse, where + "edge uses an undeclared vertex");
            if (a->second == b->second) throw Error(ErrorCode::Parse, where + "self-loop in query");
            const Pair e{a->second, b->second};
            if (!seen.insert(e).second) throw Error(ErrorCode::Parse, where + "duplicate edge");
            q.edges.push_back(e);
        } else {
            throw Error(ErrorCode::Parse, where + "unknown directive '" + std::string(tok[0]) + "'");
        }
    }
    if (q.labels.empty()) throw Error(ErrorCode::Parse, "query has no vertices");
    if (!weakly_connected(q)) throw Error(ErrorCode::Disconnected, "query graph is not connected");
    return q;
}

QueryGraph load_query(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_query(ss.str(), path.stem().string());
}

QueryGraph builtin_pattern(int index) {
    static const char* const kText[] = {
        "v 0 *\nv 1 *\nv 2 *\ne 0 1\ne 1 2\ne 2 0\n",
        "v 0 *\nv 1 *\ne 0 1\ne 1 0\n",
        "v 0 *\nv 1 *\nv 2 *\nv 3 *\ne 0 1\ne 1 2\ne 2 3\ne 3 0\n",
        "v 0 *\nv 1 *\nv 2 *\ne 0 1\ne 1 2\ne 2 0\ne 1 0\n",
        "v 0 *\nv 1 *\nv 2 *\nv 3 *\ne 0 1\ne 1 2\ne 2 0\ne 1 3\ne 3 0\n",
    };
    if (index < 1 || index > 5) throw Error(ErrorCode::Usage, "no built-in pattern p" + std::to_string(index));
    return parse_query(kText[index - 1], "p" + std::to_string(index));
}

std::vector<QueryGraph> builtin_patterns() {
    std::vector<QueryGraph> out;
    for (int i = 1; i <= 5; ++i) out.push_back(builtin_pattern(i));
    return out;
}

std::string format_query(const QueryGraph& q) {
    std::ostringstream os;
    if (!q.name.empty()) os << "# " << q.name << '\n';
    for (std::size_t x = 0; x < q.size(); ++x) {
        os << "v " << x << ' ';
        if (q.labels[x]) os << *q.labels[x];
        else os << '*';
        os << '\n';
    }
    for (auto [a, b] : q.edges) os << "e " << a << ' ' << b << '\n';
    return os.str();
}

std::vector<std::vector<std::uint32_t>> automorphisms(const QueryGraph& q) {
    const auto n = static_cast<std::uint32_t>(q.size());
    std::vector<std::vector<std::uint32_t>> out;
    std::vector<std::uint32_t> perm(n);
    std::vector<char> used(n, 0);
    std::function<void(std::uint32_t)> rec = [&](std::uint32_t i) {
        if (i == n) {
            out.push_back(perm);
            return;
        }
        for (std::uint32_t c = 0; c < n; ++c) {
            if (used[c] || q.labels[c] != q.labels[i]) continue;
            if (q.out_degree(c) != q.out_degree(i) || q.in_degree(c) != q.in_degree(i)) continue;
            bool ok = true;
            for (std::uint32_t j = 0; j < i && ok; ++j)
                ok = q.has_edge(i, j) == q.has_edge(c, perm[j]) && q.has_edge(j, i) == q.has_edge(perm[j], c);
            if (!ok) continue;
            used[c] = 1;
            perm[i] = c;
            rec(i + 1);
            used[c] = 0;
        }
    };
    rec(0);
    return out;
}

std::vector<Match> match_static(const SimpleDigraph& view, const QueryGraph& q, const LabelMap& labels,
                                const StaticMatchOptions& opt) {
    const auto n = static_cast<std::uint32_t>(q.size());
    const auto nv = static_cast<std::uint32_t>(view.node_count());
    const auto autos = opt.dedup_automorphisms ? automorphisms(q) : std::vector<std::vector<std::uint32_t>>{};
    std::vector<Match> out;
    std::vector<std::uint32_t> m(n);
    std::vector<char> used(nv, 0);
    std::uint64_t steps = 0;
    std::function<void(std::uint32_t)> rec = [&](std::uint32_t i) {
        if (i == n) {
            if (opt.dedup_automorphisms && !is_canonical(m, autos)) return;
            out.push_back({m, {0, 0}, 0});
            return;
        }
        for (std::uint32_t v = 0; v < nv; ++v) {
            if (opt.deadline && (++steps & 0x3ff) == 0 && std::chrono::steady_clock::now() > *opt.deadline)
                throw Error(ErrorCode::Timeout, "static matching exceeded its deadline");
            if (used[v] || !label_ok(q, labels, i, v)) continue;
            bool ok = true;
            for (auto [a, b] : q.edges) {
                if (a == i && b < i) ok = view.has_pair(v, m[b]);
                else if (b == i && a < i) ok = view.has_pair(m[a], v);
                if (!ok) break;
            }
            if (!ok) continue;
            used[v] = 1;
            m[i] = v;
            rec(i + 1);
            used[v] = 0;
        }
    };
    rec(0);
    return out;
}

MatchContext::MatchContext(QueryGraph q, LabelMap labels, MatchOptions opt)
    : q_(std::move(q)), labels_(std::move(labels)), opt_(opt) {
    const auto n = static_cast<std::uint32_t>(q_.size());
    cand_.assign(n, {});
    cand_count_.assign(n, 0);
    map_.assign(n, 0);
    autos_ = automorphisms(q_);
    for (const auto& [x, y] : q_.edges) {
        std::vector<char> mapped(n, 0);
        mapped[x] = mapped[y] = 1;
        std::vector<Step> plan;
        for (std::uint32_t k = 2; k < n; ++k) {
            std::optional<Step> best;
            std::size_t best_deg = 0;
            for (std::uint32_t w = 0; w < n; ++w) {
                if (mapped[w]) continue;
                std::optional<Step> link;
                for (auto [a, b] : q_.edges) {
                    if (a == w && mapped[b]) link = Step{w, b, false};
                    else if (b == w && mapped[a]) link = Step{w, a, true};
                    if (link) break;
                }
                if (!link) continue;
                const auto deg = q_.out_degree(w) + q_.in_degree(w);
                if (!best || deg > best_deg) {
                    best = link;
                    best_deg = deg;
                }
            }
            mapped[best->vertex] = 1;
            plan.push_back(*best);
        }
        plans_.push_back(std::move(plan));
    }
    for (std::uint32_t v = 0; v < labels_.size(); ++v) ensure_vertex(v);
}

void MatchContext::ensure_vertex(std::uint32_t v) {
    while (out_.size() <= v) {
        const auto id = static_cast<std::uint32_t>(out_.size());
        out_.emplace_back();
        in_.emplace_back();
        used_.push_back(0);
        for (auto& c : cand_) c.push_back(0);
        refresh_candidates(id);
    }
}

bool MatchContext::admissible(std::uint32_t x, std::uint32_t v) const {
    return label_ok(q_, labels_, x, v) && out_[v].size() >= q_.out_degree(x) && in_[v].size() >= q_.in_degree(x);
}

void MatchContext::refresh_candidates(std::uint32_t v) {
    for (std::uint32_t x = 0; x < q_.size(); ++x) {
        const char now = admissible(x, v) ? 1 : 0;
        if (now != cand_[x][v]) {
            cand_count_[x] += now ? 1 : static_cast<std::size_t>(-1);
            cand_[x][v] = now;
        }
    }
}

std::size_t MatchContext::candidate_count(std::uint32_t x) const { return cand_count_[x]; }

bool MatchContext::is_candidate(std::uint32_t x, std::uint32_t v) const { return v < out_.size() && cand_[x][v]; }

bool MatchContext::has_pair(std::uint32_t u, std::uint32_t v) const { return pair_ts_.count(key_of(u, v)) != 0; }

Timestamp MatchContext::pair_time(std::uint32_t u, std::uint32_t v) const { return pair_ts_.at(key_of(u, v)); }

SimpleDigraph MatchContext::view() const {
    std::vector<Pair> pairs;
    pairs.reserve(pair_ts_.size());
    for (const auto& [k, ts] : pair_ts_) pairs.emplace_back(static_cast<std::uint32_t>(k >> 32), static_cast<std::uint32_t>(k));
    return SimpleDigraph(out_.size(), std::move(pairs));
}

bool MatchContext::add_pair(const StreamEdge& e) {
    ensure_vertex(std::max(e.src, e.dst));
    if (e.src == e.dst) return false;
    if (!pair_ts_.emplace(key_of(e.src, e.dst), e.ts).second) return false;
    out_[e.src].push_back(e.dst);
    in_[e.dst].push_back(e.src);
    refresh_candidates(e.src);
    refresh_candidates(e.dst);
    return true;
}

void MatchContext::load(const StreamEdge& e) { add_pair(e); }

bool MatchContext::canonical(const std::vector<std::uint32_t>& m) const { return is_canonical(m, autos_); }

void MatchContext::extend(std::size_t edge_index, std::size_t depth, const StreamEdge& trigger, std::vector<Match>& out) {
    if ((++steps_ & 0x3ff) == 0 && std::chrono::steady_clock::now() > deadline_)
        throw Error(ErrorCode::Timeout, "query " + q_.name + " exceeded its time limit");
    const auto& plan = plans_[edge_index];
    if (depth == plan.size()) {
        if (opt_.window) {
            Timestamp lo = trigger.ts, hi = trigger.ts;
            for (auto [a, b] : q_.edges) {
                const auto t = pair_time(map_[a], map_[b]);
                lo = std::min(lo, t);
                hi = std::max(hi, t);
            }
            if (hi - lo > *opt_.window) return;
        }
        ++mappings_;
        const bool canon = canonical(map_);
        if (canon) ++deduped_;
        if (!opt_.dedup_automorphisms || canon) out.push_back({map_, {trigger.src, trigger.dst}, trigger.ts});
        return;
    }
    const auto& step = plan[depth];
    const auto base = map_[step.anchor];
    const auto& pool = step.from_anchor ? out_[base] : in_[base];
    for (const auto v : pool) {
        if (used_[v] || !cand_[step.vertex][v]) continue;
        bool ok = true;
        for (auto [a, b] : q_.edges) {
            if (a == step.vertex && b != step.vertex) {
                if (!is_mapped(b, edge_index, depth)) continue;
                ok = has_pair(v, map_[b]);
            } else if (b == step.vertex) {
                if (!is_mapped(a, edge_index, depth)) continue;
                ok = has_pair(map_[a], v);
            }
            if (!ok) break;
        }
        if (!ok) continue;
        used_[v] = 1;
        map_[step.vertex] = v;
        extend(edge_index, depth + 1, trigger, out);
        used_[v] = 0;
    }
}

bool MatchContext::is_mapped(std::uint32_t x, std::size_t edge_index, std::size_t depth) const {
    const auto [a, b] = q_.edges[edge_index];
    if (x == a || x == b) return true;
    const auto& plan = plans_[edge_index];
    for (std::size_t i = 0; i < depth; ++i)
        if (plan[i].vertex == x) return true;
    return false;
}

std::vector<Match> MatchContext::insert_edge(const StreamEdge& e) {
    if (!add_pair(e)) return {};
    if (timed_out_) throw Error(ErrorCode::Timeout, "query " + q_.name + " exceeded its time limit");
    const auto start = std::chrono::steady_clock::now();
    deadline_ = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double, std::milli>(std::max(0.0, opt_.time_limit_ms - elapsed_ms_)));
    std::vector<Match> out;
    try {
        for (std::size_t i = 0; i < q_.edges.size(); ++i) {
            const auto [x, y] = q_.edges[i];
            if (!cand_[x][e.src] || !cand_[y][e.dst]) continue;
            bool closed = true;
            for (auto [a, b] : q_.edges)
                if (a == y && b == x) closed = has_pair(e.dst, e.src);
            if (!closed) continue;
            map_[x] = e.src;
            map_[y] = e.dst;
            used_[e.src] = used_[e.dst] = 1;
            try {
                extend(i, 0, e, out);
            } catch (...) {
                used_[e.src] = used_[e.dst] = 0;
                throw;
            }
            used_[e.src] = used_[e.dst] = 0;
        }
    } catch (const Error& err) {
        if (err.code() == ErrorCode::Timeout) {
            timed_out_ = true;
            std::fill(used_.begin(), used_.end(), 0);
        }
        elapsed_ms_ += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        throw;
    }
    elapsed_ms_ += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    std::sort(out.begin(), out.end(), [](const Match& a, const Match& b) { return a.mapping < b.mapping; });
    return out;
}

std::vector<QueryRun> run_stream(std::span<const StreamEdge> initial, std::span<const StreamEdge> stream,
                                 std::span<const QueryGraph> queries, const StreamConfig& cfg) {
    StreamSplit split{{initial.begin(), initial.end()}, {stream.begin(), stream.end()}};
    if (cfg.drop_top_hubs) drop_top_hubs(split, cfg.drop_top_hubs);

    std::uint32_t max_vertex = 0;
    for (const auto* part : {&split.initial, &split.stream})
        for (const auto& e : *part) max_vertex = std::max({max_vertex, e.src + 1, e.dst + 1});

    LabelMap labels;
    if (cfg.label_pool > 0) {
        Rng rng(derive_seed(cfg.seed, 0));
        labels.resize(max_vertex);
        for (auto& l : labels) l = static_cast<int>(rng.below(cfg.label_pool));
    }

    std::vector<QueryRun> runs(queries.size());
    parallel_for(queries.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t qi = begin; qi < end; ++qi) {
            QueryGraph q = queries[qi];
            if (cfg.label_queries && cfg.label_pool > 0) {
                Rng rng(derive_seed(cfg.seed, 1 + qi));
                for (auto& l : q.labels)
                    if (!l) l = static_cast<int>(rng.below(cfg.label_pool));
            }
            MatchContext ctx(q, labels, {cfg.dedup_automorphisms, cfg.window, cfg.time_limit_ms});
            for (const auto& e : split.initial) ctx.load(e);
            auto& run = runs[qi];
            run.query = q.name;
            try {
                for (const auto& e : split.stream) ctx.insert_edge(e);
            } catch (const Error& err) {
                if (err.code() != ErrorCode::Timeout) throw;
            }
            run.mappings = ctx.mappings();
            run.deduped = ctx.deduped();
            run.matches = cfg.dedup_automorphisms ? run.deduped : run.mappings;
            run.elapsed_ms = ctx.elapsed_ms();
            run.timed_out = ctx.timed_out();
        }
    }, 0);
    return runs;
}

StreamSplit split_stream(const TemporalGraph& g, Timestamp initial_until, bool include_null) {
    StreamSplit s;
    for (const auto& e : g.edges()) {
        if (e.src == e.dst) continue;
        if (!include_null && (g.is_null(e.src) || g.is_null(e.dst))) continue;
        (e.ts <= initial_until ? s.initial : s.stream).push_back({e.src, e.dst, e.ts});
    }
    return s;
}

void drop_top_hubs(StreamSplit& split, std::size_t k) {
    if (k == 0) return;
    std::unordered_set<std::uint64_t> pairs;
    std::unordered_map<std::uint32_t, std::size_t> degree;
    for (const auto* part : {&split.initial, &split.stream})
        for (const auto& e : *part)
            if (pairs.insert(key_of(e.src, e.dst)).second) {
                ++degree[e.src];
                ++degree[e.dst];
            }
    std::vector<std::pair<std::size_t, std::uint32_t>> ranked;
    ranked.reserve(degree.size());
    for (auto [v, d] : degree) ranked.emplace_back(d, v);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::unordered_set<std::uint32_t> hubs;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) hubs.insert(ranked[i].second);
    auto touches = [&](const StreamEdge& e) { return hubs.count(e.src) || hubs.count(e.dst); };
    std::erase_if(split.initial, touches);
    std::erase_if(split.stream, touches);
}

}  // namespace nftgraph
