#include "nftgraph/fixture.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "nftgraph/anomaly.hpp"
#include "nftgraph/util.hpp"

namespace nftgraph {

namespace {

constexpr Timestamp kBackgroundStart = 1546300800;  // 2019-01-01
constexpr Timestamp kBackgroundEnd = 1672531199;    // 2022-12-31 23:59:59
constexpr Timestamp kStreamStart = 1640995200;      // 2022-01-01
constexpr Timestamp kDay = kSecondsPerDay;

struct Pending {
    Timestamp ts;
    std::uint64_t seq;
    Address contract;
    Address from;
    Address to;
    Uint256 token;
};

class Generator {
public:
    explicit Generator(std::uint64_t seed) : seed_(seed), rng_(derive_seed(seed, 1)) {}

    Rng& rng() { return rng_; }

    Address fresh_address() {
        while (true) {
            Address a;
            for (std::size_t i = 0; i < a.bytes.size(); ++i) a.bytes[i] = static_cast<std::uint8_t>(rng_.below(256));
            if (!a.is_zero() && used_.insert(a).second) return a;
        }
    }

    Uint256 fresh_token(const Address& contract) {
        while (true) {
            Uint256 id = Uint256(rng_.next());
            if (tokens_.insert({contract, id}).second) return id;
        }
    }

    void reserve_token(const Address& contract, const Uint256& id) { tokens_.insert({contract, id}); }

    void emit(Timestamp ts, const Address& contract, const Address& from, const Address& to, const Uint256& id) {
        pending_.push_back({ts, seq_++, contract, from, to, id});
    }

    std::vector<TransferEvent> finish() {
        std::sort(pending_.begin(), pending_.end(),
                  [](const Pending& a, const Pending& b) { return a.ts != b.ts ? a.ts < b.ts : a.seq < b.seq; });
        std::vector<TransferEvent> out;
        out.reserve(pending_.size());
        std::uint64_t last_block = 0, log_index = 0;
        for (std::size_t i = 0; i < pending_.size(); ++i) {
            const auto& p = pending_[i];
            TransferEvent ev;
            ev.timestamp = p.ts;
            ev.block_number = 1 + static_cast<std::uint64_t>(p.ts - kChainStartTimestamp) / 13;
            log_index = ev.block_number == last_block ? log_index + 1 : 0;
            last_block = ev.block_number;
            ev.log_index = log_index;
            for (std::size_t w = 0; w < 4; ++w) {
                const auto word = derive_seed(seed_ ^ 0x7478686173680000ULL, i * 4 + w);
                for (std::size_t b = 0; b < 8; ++b) ev.tx_hash.bytes[w * 8 + b] = static_cast<std::uint8_t>(word >> (56 - 8 * b));
            }
            ev.contract = p.contract;
            ev.from = p.from;
            ev.to = p.to;
            ev.token_id = p.token;
            out.push_back(ev);
        }
        return out;
    }

private:
    struct TokenHash {
        std::size_t operator()(const std::pair<Address, Uint256>& k) const noexcept {
            return std::hash<Address>{}(k.first) ^ k.second.hash();
        }
    };

    std::uint64_t seed_;
    Rng rng_;
    std::uint64_t seq_ = 0;
    std::unordered_set<Address> used_;
    std::unordered_set<std::pair<Address, Uint256>, TokenHash> tokens_;
    std::vector<Pending> pending_;
};

std::vector<Timestamp> sorted_times(Rng& rng, std::size_t n, Timestamp lo, Timestamp hi) {
    std::vector<Timestamp> ts(n);
    for (auto& t : ts) t = lo + static_cast<Timestamp>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
    std::sort(ts.begin(), ts.end());
    return ts;
}

struct LiveToken {
    Address contract;
    Uint256 id;
    std::size_t owner;
};

// Every transfer moves a token to a strictly higher-ranked account, so the background has no cycles
// and no opposing edges.
void rank_dag_background(Generator& gen, std::size_t scale) {
    auto& rng = gen.rng();
    const std::size_t n = std::max<std::size_t>(50, scale / 6);
    std::vector<Address> rank(n);
    for (auto& a : rank) a = gen.fresh_address();
    std::vector<Address> contracts(8);
    for (auto& c : contracts) c = gen.fresh_address();
    const auto times = sorted_times(rng, scale, kBackgroundStart, kBackgroundEnd);
    std::vector<LiveToken> live;
    for (std::size_t i = 0; i < scale; ++i) {
        if (live.empty() || rng.unit() < 0.3) {
            const auto& c = contracts[rng.below(contracts.size())];
            const auto r = static_cast<std::size_t>(rng.below(n - 1));
            const auto id = gen.fresh_token(c);
            gen.emit(times[i], c, kNullAddress, rank[r], id);
            live.push_back({c, id, r});
            continue;
        }
        const auto k = static_cast<std::size_t>(rng.below(live.size()));
        auto& tok = live[k];
        const auto next = tok.owner + 1 + static_cast<std::size_t>(rng.below(n - 1 - tok.owner));
        gen.emit(times[i], tok.contract, rank[tok.owner], rank[next], tok.id);
        tok.owner = next;
        if (next == n - 1) {
            live[k] = live.back();
            live.pop_back();
        }
    }
}

void open_background(Generator& gen, std::size_t scale, bool preferential) {
    auto& rng = gen.rng();
    std::vector<Address> pool(std::max<std::size_t>(20, scale / 5));
    for (auto& a : pool) a = gen.fresh_address();
    std::vector<Address> contracts(8);
    for (auto& c : contracts) c = gen.fresh_address();
    std::vector<std::size_t> receptions;  // one entry per received transfer
    auto pick_receiver = [&](std::size_t avoid) {
        while (true) {
            std::size_t r;
            if (preferential && !receptions.empty() && rng.unit() < 0.85) {
                r = receptions[rng.below(receptions.size())];
            } else if (preferential && rng.unit() < 0.5) {
                pool.push_back(gen.fresh_address());
                r = pool.size() - 1;
            } else {
                r = static_cast<std::size_t>(rng.below(pool.size()));
            }
            if (r != avoid) return r;
        }
    };
    const auto times = sorted_times(rng, scale, kBackgroundStart, kBackgroundEnd);
    std::vector<LiveToken> live;
    for (std::size_t i = 0; i < scale; ++i) {
        if (live.empty() || rng.unit() < 0.3) {
            const auto& c = contracts[rng.below(contracts.size())];
            const auto r = pick_receiver(static_cast<std::size_t>(-1));
            const auto id = gen.fresh_token(c);
            gen.emit(times[i], c, kNullAddress, pool[r], id);
            receptions.push_back(r);
            live.push_back({c, id, r});
            continue;
        }
        const auto k = static_cast<std::size_t>(rng.below(live.size()));
        auto& tok = live[k];
        if (!preferential && rng.unit() < 0.02) {
            gen.emit(times[i], tok.contract, pool[tok.owner], kNullAddress, tok.id);
            live[k] = live.back();
            live.pop_back();
            continue;
        }
        const auto r = pick_receiver(tok.owner);
        gen.emit(times[i], tok.contract, pool[tok.owner], pool[r], tok.id);
        receptions.push_back(r);
        tok.owner = r;
    }
}

PlantedPair ordered(const Address& x, const Address& y, std::uint8_t hits) {
    return x < y ? PlantedPair{x, y, hits} : PlantedPair{y, x, hits};
}

void plant(Generator& gen, FixtureLedger& ledger) {
    ledger.initial_until = kStreamStart;

    // wash 3-cycles: minted during the initial period, traded around in the stream
    const auto wash = gen.fresh_address();
    for (int i = 0; i < 7; ++i) {
        const auto a = gen.fresh_address(), b = gen.fresh_address(), c = gen.fresh_address();
        const auto id = gen.fresh_token(wash);
        gen.emit(1622505600 + i * kDay, wash, kNullAddress, a, id);
        const Timestamp t = 1646092800 + i * 10 * kDay;
        gen.emit(t, wash, a, b, id);
        gen.emit(t + 600, wash, b, c, id);
        gen.emit(t + 1200, wash, c, a, id);
        ledger.wash_cycles.push_back({a, b, c});
    }

    const auto pairs = gen.fresh_address();
    // one quick exchange between otherwise silent accounts
    for (int i = 0; i < 5; ++i) {
        const auto x = gen.fresh_address(), y = gen.fresh_address();
        const auto id = gen.fresh_token(pairs);
        const Timestamp t = 1580515200 + i * 3 * kDay;
        gen.emit(t, pairs, kNullAddress, x, id);
        gen.emit(t + 1000, pairs, x, y, id);
        gen.emit(t + 1060, pairs, y, x, id);
        ledger.simultaneous_pairs.push_back(ordered(x, y, kLowActivity | kHighRatio));
    }
    // ten back-and-forth trades that dominate both accounts' activity
    for (int i = 0; i < 5; ++i) {
        const auto p = gen.fresh_address(), q = gen.fresh_address();
        const auto id = gen.fresh_token(pairs);
        const Timestamp t = 1588291200 + i * 3 * kDay;
        gen.emit(t, pairs, kNullAddress, p, id);
        for (int k = 0; k < 10; ++k) gen.emit(t + 1000 + k * 300, pairs, k % 2 ? q : p, k % 2 ? p : q, id);
        ledger.simultaneous_pairs.push_back(ordered(p, q, kHighRatio));
    }
    // active accounts with a single quick exchange: simultaneous but unflagged
    for (int i = 0; i < 5; ++i) {
        const auto r = gen.fresh_address(), s = gen.fresh_address();
        const Timestamp t = 1596240000 + i * 3 * kDay;
        std::vector<Uint256> r_tokens, s_tokens;
        for (int k = 0; k < 5; ++k) {
            r_tokens.push_back(gen.fresh_token(pairs));
            gen.emit(t + k * 100, pairs, kNullAddress, r, r_tokens.back());
        }
        for (int k = 0; k < 4; ++k) {
            s_tokens.push_back(gen.fresh_token(pairs));
            gen.emit(t + 500 + k * 100, pairs, kNullAddress, s, s_tokens.back());
        }
        for (int k = 0; k < 4; ++k) gen.emit(t + 2000 + k * 100, pairs, r, gen.fresh_address(), r_tokens[k]);
        for (int k = 0; k < 4; ++k) gen.emit(t + 3000 + k * 100, pairs, s, gen.fresh_address(), s_tokens[k]);
        gen.emit(t + 5000, pairs, r, s, r_tokens[4]);
        gen.emit(t + 8600, pairs, s, r, r_tokens[4]);
        ledger.simultaneous_pairs.push_back(ordered(r, s, 0));
    }
    std::sort(ledger.simultaneous_pairs.begin(), ledger.simultaneous_pairs.end(),
              [](const PlantedPair& x, const PlantedPair& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });

    // sequential minter
    const auto bot = gen.fresh_address();
    ledger.bot_contract = gen.fresh_address();
    ledger.bot_run_length = 150;
    for (std::uint64_t k = 1; k <= 150; ++k) {
        const auto id = Uint256(k);
        gen.reserve_token(ledger.bot_contract, id);
        gen.emit(1630454400 + static_cast<Timestamp>(k - 1) * 120, ledger.bot_contract, kNullAddress, bot, id);
    }
    ledger.bots.push_back(bot);

    // traders whose only two outgoing transfers are exactly one class gap apart
    const auto trade = gen.fresh_address();
    const Timestamp gaps[] = {kDay, 7 * kDay, 30 * kDay, 365 * kDay, 400 * kDay};
    const TraderClass classes[] = {TraderClass::Daily, TraderClass::Weekly, TraderClass::Monthly, TraderClass::Yearly,
                                   TraderClass::Remaining};
    for (int c = 0; c < 5; ++c) {
        for (int j = 0; j < 20; ++j) {
            const auto t = gen.fresh_address();
            const Timestamp s0 = 1551398400 + (c * 20 + j) * 2 * kDay;
            const auto a = gen.fresh_token(trade), b = gen.fresh_token(trade);
            gen.emit(s0 - 100, trade, kNullAddress, t, a);
            gen.emit(s0 + gaps[c] - 100, trade, kNullAddress, t, b);
            gen.emit(s0, trade, t, gen.fresh_address(), a);
            gen.emit(s0 + gaps[c], trade, t, gen.fresh_address(), b);
            ledger.planted_traders.emplace_back(t, classes[c]);
        }
    }
}

std::string trader_class_name(Timestamp gap) {
    if (gap <= 86400) return "daily";
    if (gap <= 604800) return "weekly";
    if (gap <= 2592000) return "monthly";
    if (gap <= 31536000) return "yearly";
    return "remaining";
}

void tally(const std::vector<TransferEvent>& events, FixtureLedger& ledger) {
    struct Seen {
        Timestamp first = 0;
        bool mint_entry = false;
        std::uint64_t trades = 0;  // Null-free transfers
        Timestamp last_trade = 0;
        Timestamp max_gap = 0;
    };
    std::map<Address, Seen> seen;
    std::map<std::pair<Address, Uint256>, Address> owner;
    std::set<Address> contracts;
    for (const auto& ev : events) {
        ++ledger.edges;
        contracts.insert(ev.contract);
        owner[{ev.contract, ev.token_id}] = ev.to;
        if (ev.from == kNullAddress) ++ledger.mint_events;
        for (const auto* who : {&ev.from, &ev.to}) {
            if (who == &ev.to && ev.to == ev.from) break;
            auto [it, fresh] = seen.try_emplace(*who);
            if (fresh) {
                it->second.first = ev.timestamp;
                it->second.mint_entry = who == &ev.to && ev.from == kNullAddress && ev.to != kNullAddress;
            }
            if (ev.from == kNullAddress || ev.to == kNullAddress) continue;
            auto& s = it->second;
            if (s.trades) s.max_gap = std::max(s.max_gap, ev.timestamp - s.last_trade);
            s.last_trade = ev.timestamp;
            ++s.trades;
        }
    }
    ledger.nodes = seen.size();
    ledger.tokens = owner.size();
    ledger.contracts = contracts.size();
    for (const auto& [addr, s] : seen) {
        if (addr == kNullAddress) continue;
        if (s.mint_entry) ++ledger.mint_nodes;
        else ++ledger.nonmint_nodes;
        if (s.trades >= 2) ++ledger.trader_classes[trader_class_name(s.max_gap)];
    }

    std::map<Address, std::pair<std::uint64_t, std::set<Address>>> holdings;
    for (const auto& [key, who] : owner) {
        auto& h = holdings[who];
        ++h.first;
        h.second.insert(key.first);
    }
    std::vector<HolderTruth> holders;
    for (const auto& [who, h] : holdings) holders.push_back({who, h.first, h.second.size()});
    std::sort(holders.begin(), holders.end(), [](const HolderTruth& a, const HolderTruth& b) {
        if (a.tokens != b.tokens) return a.tokens > b.tokens;
        if (a.collections != b.collections) return a.collections > b.collections;
        return a.address < b.address;
    });
    holders.resize(std::min<std::size_t>(holders.size(), 10));
    ledger.top_holders = std::move(holders);

    std::vector<Address> watched(ledger.bots);
    for (const auto& c : ledger.wash_cycles) watched.insert(watched.end(), c.begin(), c.end());
    for (const auto& a : watched)
        if (auto it = seen.find(a); it != seen.end()) ledger.first_seen.emplace_back(a, it->second.first);
}

}  // namespace

std::optional<FixtureProfile> parse_profile(std::string_view s) {
    if (s == "uniform") return FixtureProfile::Uniform;
    if (s == "preferential") return FixtureProfile::Preferential;
    if (s == "planted") return FixtureProfile::Planted;
    return std::nullopt;
}

std::string_view to_string(FixtureProfile p) {
    switch (p) {
        case FixtureProfile::Uniform: return "uniform";
        case FixtureProfile::Preferential: return "preferential";
        case FixtureProfile::Planted: return "planted";
    }
    return "?";
}

Fixture make_fixture(const FixtureOptions& opt) {
    Fixture f;
    f.ledger.profile = opt.profile;
    f.ledger.seed = opt.seed;
    f.ledger.scale = opt.scale;
    if (opt.scale == 0) return f;
    Generator gen(opt.seed);
    switch (opt.profile) {
        case FixtureProfile::Uniform: open_background(gen, opt.scale, false); break;
        case FixtureProfile::Preferential: open_background(gen, opt.scale, true); break;
        case FixtureProfile::Planted:
            rank_dag_background(gen, opt.scale);
            plant(gen, f.ledger);
            break;
    }
    f.events = gen.finish();
    tally(f.events, f.ledger);
    return f;
}

std::string ledger_json(const FixtureLedger& l) {
    using nlohmann::json;
    json j;
    j["profile"] = std::string(to_string(l.profile));
    j["seed"] = l.seed;
    j["scale"] = l.scale;
    j["nodes"] = l.nodes;
    j["edges"] = l.edges;
    j["tokens"] = l.tokens;
    j["contracts"] = l.contracts;
    j["mint_events"] = l.mint_events;
    j["mint_nodes"] = l.mint_nodes;
    j["nonmint_nodes"] = l.nonmint_nodes;
    j["initial_until"] = l.initial_until;
    j["wash_cycles"] = json::array();
    for (const auto& c : l.wash_cycles) j["wash_cycles"].push_back({c[0].hex(), c[1].hex(), c[2].hex()});
    j["simultaneous_pairs"] = json::array();
    for (const auto& p : l.simultaneous_pairs) {
        json rules = json::array();
        if (p.rule_hits & kLowActivity) rules.push_back("LOW_ACTIVITY");
        if (p.rule_hits & kHighRatio) rules.push_back("HIGH_RATIO");
        j["simultaneous_pairs"].push_back({{"a", p.a.hex()}, {"b", p.b.hex()}, {"rule_hits", rules}});
    }
    j["bots"] = json::array();
    for (const auto& b : l.bots) j["bots"].push_back(b.hex());
    j["bot_contract"] = l.bots.empty() ? json(nullptr) : json(l.bot_contract.hex());
    j["bot_run_length"] = l.bot_run_length;
    j["trader_classes"] = l.trader_classes;
    j["planted_traders"] = json::array();
    for (const auto& [a, c] : l.planted_traders) j["planted_traders"].push_back({{"address", a.hex()}, {"class", to_string(c)}});
    j["top_holders"] = json::array();
    for (const auto& h : l.top_holders)
        j["top_holders"].push_back({{"address", h.address.hex()}, {"tokens", h.tokens}, {"collections", h.collections}});
    j["first_seen"] = json::array();
    for (const auto& [a, t] : l.first_seen) j["first_seen"].push_back({{"address", a.hex()}, {"timestamp", t}});
    return j.dump(2);
}

// --- raw event logs --------------------------------------------------------------

namespace {

enum class RowKind : std::uint8_t { Valid, Erc20, Mixed, MixedArity, WrongTopic, Malformed };

constexpr std::string_view kApprovalTopic = "0x8c5be1e5ebec7d5bd14f71427d1e84f3dd0314c0f7b2291e5b200ac8c7c3b925";

Address derived_address(std::uint64_t seed, std::uint64_t stream) {
    Address a;
    for (std::size_t w = 0; w < 3; ++w) {
        const auto word = derive_seed(seed, stream * 3 + w);
        for (std::size_t b = 0; b < 8 && w * 8 + b < 20; ++b) a.bytes[w * 8 + b] = static_cast<std::uint8_t>(word >> (8 * b));
    }
    a.bytes[0] |= 1;
    return a;
}

std::string word_hex(const Address& a) { return "0x000000000000000000000000" + a.hex().substr(2); }

std::string render(RowKind kind, std::uint64_t index, std::uint64_t seed, bool json) {
    Rng rng(derive_seed(seed, (static_cast<std::uint64_t>(kind) << 40) | index));
    const Timestamp ts = 1609459200 + static_cast<Timestamp>(rng.below(365 * kDay));
    const std::uint64_t block = 1 + static_cast<std::uint64_t>(ts - kChainStartTimestamp) / 13;
    Hash32 tx;
    for (auto& b : tx.bytes) b = static_cast<std::uint8_t>(rng.below(256));
    tx.bytes[0] = static_cast<std::uint8_t>(kind);
    tx.bytes[1] = static_cast<std::uint8_t>(index >> 24);
    tx.bytes[2] = static_cast<std::uint8_t>(index >> 16);
    tx.bytes[3] = static_cast<std::uint8_t>(index >> 8);
    tx.bytes[4] = static_cast<std::uint8_t>(index);
    const std::uint64_t log_index = rng.below(200);

    auto person = [&] { return derived_address(seed ^ 0x5050ULL, rng.below(1000)); };
    Address contract;
    std::vector<std::string> topics;
    std::string data = "0x";
    std::string contract_hex;
    std::string block_text = std::to_string(block);
    const std::string transfer(kTransferTopicHex);
    switch (kind) {
        case RowKind::Valid:
        case RowKind::Malformed: {
            contract = derived_address(seed ^ 0xc0c0ULL, rng.below(10));
            const bool mint = rng.below(5) == 0;
            const Address from = mint ? kNullAddress : person();
            Address to = person();
            Uint256 id = Uint256(rng.next());
            topics = {transfer, word_hex(from), word_hex(to), Hash32{id.to_be_bytes()}.hex()};
            if (kind == RowKind::Malformed) {
                switch (index % 3) {
                    case 0: contract_hex = contract.hex().substr(0, 40); break;  // 19 bytes
                    case 1: block_text = "block" + std::to_string(index); break;
                    default: topics[1] = topics[2] = word_hex(kNullAddress); break;
                }
            }
            break;
        }
        case RowKind::Erc20: {
            contract = derived_address(seed ^ 0xe20e20ULL, rng.below(10));
            topics = {transfer, word_hex(person()), word_hex(person())};
            data = Hash32{Uint256(rng.next()).to_be_bytes()}.hex();
            break;
        }
        case RowKind::Mixed:
        case RowKind::MixedArity: {
            contract = derived_address(seed ^ 0x313131ULL, 0);
            topics = {transfer, word_hex(person()), word_hex(person())};
            if (kind == RowKind::Mixed) topics.push_back(Hash32{Uint256(rng.next()).to_be_bytes()}.hex());
            else data = Hash32{Uint256(rng.next()).to_be_bytes()}.hex();
            break;
        }
        case RowKind::WrongTopic: {
            contract = derived_address(seed ^ 0xc0c0ULL, rng.below(10));
            topics = {std::string(kApprovalTopic), word_hex(person()), word_hex(person()),
                      Hash32{Uint256(rng.next()).to_be_bytes()}.hex()};
            break;
        }
    }
    if (contract_hex.empty()) contract_hex = contract.hex();

    std::string out;
    if (json) {
        nlohmann::ordered_json j;
        j["block_number"] = block_text;
        j["block_timestamp"] = ts;
        j["transaction_hash"] = tx.hex();
        j["log_index"] = log_index;
        j["address"] = contract_hex;
        j["topics"] = topics;
        j["data"] = data;
        out = j.dump();
    } else {
        out = block_text + ',' + std::to_string(ts) + ',' + tx.hex() + ',' + std::to_string(log_index) + ',' + contract_hex + ',';
        for (std::size_t i = 0; i < topics.size(); ++i) out += (i ? "|" : "") + topics[i];
        out += ',' + data;
    }
    return out;
}

}  // namespace

IngestStats write_raw_fixture(std::ostream& out, const RawFixtureSpec& spec, std::uint64_t seed) {
    std::vector<RowKind> kinds;
    kinds.insert(kinds.end(), spec.valid, RowKind::Valid);
    kinds.insert(kinds.end(), spec.erc20, RowKind::Erc20);
    kinds.insert(kinds.end(), spec.mixed_valid, RowKind::Mixed);
    if (spec.mixed_valid) kinds.push_back(RowKind::MixedArity);
    kinds.insert(kinds.end(), spec.wrong_topic, RowKind::WrongTopic);
    kinds.insert(kinds.end(), spec.malformed, RowKind::Malformed);
    Rng rng(derive_seed(seed, 0x0f1e));
    rng.shuffle(kinds);

    if (!spec.json) out << kRawCsvHeader << '\n';
    std::uint64_t counters[6] = {};
    for (auto k : kinds) out << render(k, counters[static_cast<int>(k)]++, seed, spec.json) << '\n';
    for (std::size_t d = 0; d < spec.duplicates && spec.valid; ++d)
        out << render(RowKind::Valid, (d * 7919) % spec.valid, seed, spec.json) << '\n';

    IngestStats s;
    s.records_read = kinds.size() + (spec.valid ? spec.duplicates : 0);
    s.transfers_emitted = spec.valid;
    s.skipped_wrong_topic = spec.wrong_topic;
    s.skipped_non_conforming = spec.erc20 + (spec.mixed_valid ? spec.mixed_valid + 1 : 0);
    s.skipped_duplicate = spec.valid ? spec.duplicates : 0;
    s.skipped_malformed = spec.malformed;
    return s;
}

}  // namespace nftgraph
