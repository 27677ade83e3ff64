#include "nftgraph/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <future>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "nftgraph/error.hpp"

namespace nftgraph {

const Hash32& transfer_topic() {
    static const Hash32 topic = *Hash32::parse(kTransferTopicHex);
    return topic;
}

namespace {

[[noreturn]] void malformed(const std::string& why) { throw Error(ErrorCode::Malformed, why); }

std::uint64_t parse_u64(std::string_view s, const char* field) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        malformed(std::string("non-numeric ") + field);
    return v;
}

Address parse_address(std::string_view s) {
    auto a = Address::parse(s);
    if (!a) malformed("address length");
    return *a;
}

Hash32 parse_hash(std::string_view s, const char* field) {
    auto h = Hash32::parse(s);
    if (!h) malformed(std::string("bad 32-byte hex in ") + field);
    return *h;
}

std::string normalize_data(std::string_view s) {
    if (s.size() < 2 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X')) malformed("data must be 0x-prefixed");
    std::string out = "0x";
    s.remove_prefix(2);
    if (s.size() % 2 != 0) malformed("odd-length data");
    for (char c : s) {
        if (c >= 'A' && c <= 'F') c = static_cast<char>(c - 'A' + 'a');
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) malformed("non-hex data");
        out.push_back(c);
    }
    return out;
}

void add_topic(RawLog& raw, std::string_view s) {
    if (raw.topic_count >= 4) malformed("more than 4 topics");
    raw.topics[raw.topic_count++] = parse_hash(s, "topics");
}

void check_timestamp(Timestamp ts, Timestamp now) {
    if (ts < kChainStartTimestamp || ts > now) malformed("block_timestamp out of range");
}

std::uint64_t json_u64(const nlohmann::json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) malformed(std::string("missing key ") + key);
    if (it->is_number_unsigned()) return it->get<std::uint64_t>();
    if (it->is_number_integer()) {
        auto v = it->get<std::int64_t>();
        if (v < 0) malformed(std::string("negative ") + key);
        return static_cast<std::uint64_t>(v);
    }
    if (it->is_string()) return parse_u64(it->get_ref<const std::string&>(), key);
    malformed(std::string("non-numeric ") + key);
}

const std::string& json_str(const nlohmann::json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) malformed(std::string("missing key ") + key);
    if (!it->is_string()) malformed(std::string("non-string ") + key);
    return it->get_ref<const std::string&>();
}

RawLog parse_json_line(std::string_view line) {
    nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) malformed("invalid JSON");
    RawLog raw;
    raw.block_number = json_u64(obj, "block_number");
    raw.block_timestamp = static_cast<Timestamp>(json_u64(obj, "block_timestamp"));
    raw.tx_hash = parse_hash(json_str(obj, "transaction_hash"), "transaction_hash");
    raw.log_index = json_u64(obj, "log_index");
    raw.contract = parse_address(json_str(obj, "address"));
    auto topics = obj.find("topics");
    if (topics == obj.end() || !topics->is_array()) malformed("missing key topics");
    for (const auto& t : *topics) {
        if (!t.is_string()) malformed("non-string topic");
        add_topic(raw, t.get_ref<const std::string&>());
    }
    raw.data = normalize_data(json_str(obj, "data"));
    return raw;
}

RawLog parse_csv_line(std::string_view line) {
    std::array<std::string_view, 7> fields;
    std::size_t n = 0;
    while (true) {
        auto comma = line.find(',');
        if (n == fields.size()) malformed("too many CSV columns");
        fields[n++] = line.substr(0, comma);
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
    }
    if (n != fields.size()) malformed("expected 7 CSV columns");
    RawLog raw;
    raw.block_number = parse_u64(fields[0], "block_number");
    raw.block_timestamp = static_cast<Timestamp>(parse_u64(fields[1], "block_timestamp"));
    raw.tx_hash = parse_hash(fields[2], "transaction_hash");
    raw.log_index = parse_u64(fields[3], "log_index");
    raw.contract = parse_address(fields[4]);
    std::string_view topics = fields[5];
    while (!topics.empty()) {
        auto bar = topics.find('|');
        add_topic(raw, topics.substr(0, bar));
        if (bar == std::string_view::npos) break;
        topics.remove_prefix(bar + 1);
    }
    raw.data = normalize_data(fields[6]);
    return raw;
}

Timestamp wall_clock() {
    using namespace std::chrono;
    return duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

}  // namespace

RawLog parse_log_line(std::string_view line, Timestamp now) {
    line = trim(line);
    if (line.empty()) malformed("empty line");
    RawLog raw = line.front() == '{' ? parse_json_line(line) : parse_csv_line(line);
    if (raw.topic_count == 0) malformed("no topics");
    check_timestamp(raw.block_timestamp, now == 0 ? wall_clock() : now);
    return raw;
}

DecodeResult decode_transfer(const RawLog& raw) {
    if (raw.topic_count == 0 || raw.topics[0] != transfer_topic()) return SkipReason::WrongTopic;
    if (raw.topic_count != 4) return SkipReason::Arity;
    TransferEvent ev;
    ev.block_number = raw.block_number;
    ev.timestamp = raw.block_timestamp;
    ev.tx_hash = raw.tx_hash;
    ev.log_index = raw.log_index;
    ev.contract = raw.contract;
    // indexed address topics are left-padded to 32 bytes
    std::copy_n(raw.topics[1].bytes.begin() + 12, 20, ev.from.bytes.begin());
    std::copy_n(raw.topics[2].bytes.begin() + 12, 20, ev.to.bytes.begin());
    ev.token_id = Uint256::from_be_bytes(std::span<const std::uint8_t, 32>(raw.topics[3].bytes));
    if (ev.is_mint() && ev.is_burn()) return SkipReason::NullToNull;
    return ev;
}

std::vector<ContractClass> classify_contracts(std::span<const ContractObservation> observations) {
    std::vector<ContractClass> out;
    std::unordered_map<Address, std::size_t> index;
    for (const auto& obs : observations) {
        if (!obs.transfer_topic) continue;
        auto [it, inserted] = index.try_emplace(obs.contract, out.size());
        if (inserted) out.push_back({obs.contract, ContractKind::Erc721, 0});
        auto& cls = out[it->second];
        ++cls.log_count;
        if (!obs.four_topics) cls.kind = ContractKind::NonConforming;
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.contract < b.contract; });
    return out;
}

bool transfer_less(const TransferEvent& a, const TransferEvent& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    if (a.block_number != b.block_number) return a.block_number < b.block_number;
    if (a.log_index != b.log_index) return a.log_index < b.log_index;
    return a.tx_hash < b.tx_hash;
}

namespace {

struct ParsedFile {
    std::vector<RawLog> logs;
    std::uint64_t records = 0;
    std::uint64_t malformed = 0;
};

ParsedFile parse_file(const std::filesystem::path& path, Timestamp now) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    ParsedFile out;
    std::string line;
    while (std::getline(in, line)) {
        auto body = trim(line);
        if (body.empty() || body == kRawCsvHeader) continue;
        ++out.records;
        try {
            out.logs.push_back(parse_log_line(body, now));
        } catch (const Error&) {
            ++out.malformed;
        }
    }
    if (in.bad()) throw Error(ErrorCode::Io, "read failure on " + path.string());
    return out;
}

struct LogKey {
    Hash32 tx;
    std::uint64_t log_index;
    bool operator==(const LogKey&) const = default;
};

struct LogKeyHash {
    std::size_t operator()(const LogKey& k) const noexcept {
        return std::hash<Hash32>{}(k.tx) ^ (k.log_index * 0x9e3779b97f4a7c15ULL);
    }
};

}  // namespace

IngestResult ingest_files(std::span<const std::filesystem::path> inputs, const IngestOptions& opts) {
    const Timestamp now = opts.now == 0 ? wall_clock() : opts.now;
    unsigned threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.threads;

    // Shards parse independently; merge order is input order.
    std::vector<ParsedFile> parsed(inputs.size());
    for (std::size_t begin = 0; begin < inputs.size(); begin += threads) {
        std::size_t end = std::min(inputs.size(), begin + threads);
        std::vector<std::future<ParsedFile>> jobs;
        for (std::size_t i = begin; i < end; ++i)
            jobs.push_back(std::async(std::launch::async, parse_file, std::cref(inputs[i]), now));
        for (std::size_t i = begin; i < end; ++i) parsed[i] = jobs[i - begin].get();
    }

    IngestResult result;
    auto& stats = result.stats;
    std::unordered_set<LogKey, LogKeyHash> seen;
    std::vector<ContractObservation> observations;
    std::vector<TransferEvent> candidates;
    std::vector<Address> arity_contracts;

    for (auto& file : parsed) {
        stats.records_read += file.records;
        stats.skipped_malformed += file.malformed;
        seen.reserve(seen.size() + file.logs.size());
        for (const auto& raw : file.logs) {
            if (!seen.insert({raw.tx_hash, raw.log_index}).second) {
                ++stats.skipped_duplicate;
                continue;
            }
            auto decoded = decode_transfer(raw);
            const bool is_transfer_topic = raw.topics[0] == transfer_topic();
            observations.push_back({raw.contract, is_transfer_topic, raw.topic_count == 4});
            if (auto* ev = std::get_if<TransferEvent>(&decoded)) {
                candidates.push_back(*ev);
                continue;
            }
            switch (std::get<SkipReason>(decoded)) {
                case SkipReason::WrongTopic: ++stats.skipped_wrong_topic; break;
                // every arity violation disqualifies its contract
                case SkipReason::Arity: ++stats.skipped_non_conforming; break;
                case SkipReason::NullToNull: ++stats.skipped_malformed; break;
            }
        }
        file.logs.clear();
        file.logs.shrink_to_fit();
    }

    result.contracts = classify_contracts(observations);
    std::unordered_set<Address> rejected;
    for (const auto& c : result.contracts)
        if (c.kind == ContractKind::NonConforming) rejected.insert(c.contract);

    result.events.reserve(candidates.size());
    for (auto& ev : candidates) {
        if (rejected.contains(ev.contract)) {
            ++stats.skipped_non_conforming;
        } else {
            result.events.push_back(ev);
        }
    }
    std::sort(result.events.begin(), result.events.end(), transfer_less);
    stats.transfers_emitted = result.events.size();
    return result;
}

IngestStats normalize_stream(std::span<const std::filesystem::path> inputs, const std::filesystem::path& output,
                             const IngestOptions& opts) {
    auto result = ingest_files(inputs, opts);
    auto tmp = output;
    tmp += ".partial";
    try {
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error(ErrorCode::Io, "cannot create " + tmp.string());
            write_transfer_csv(out, result.events);
            out.flush();
            if (!out) throw Error(ErrorCode::Io, "write failure on " + tmp.string());
        }
        std::filesystem::rename(tmp, output);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw;
    }
    return result.stats;
}

// --- normalized CSV ----------------------------------------------------------

std::string format_transfer_row(const TransferEvent& ev) {
    std::string row;
    row.reserve(256);
    row += std::to_string(ev.timestamp);
    row += ',';
    row += std::to_string(ev.block_number);
    row += ',';
    row += ev.tx_hash.hex();
    row += ',';
    row += std::to_string(ev.log_index);
    row += ',';
    row += ev.contract.hex();
    row += ',';
    row += ev.from.hex();
    row += ',';
    row += ev.to.hex();
    row += ',';
    row += ev.token_id.to_decimal();
    return row;
}

TransferEvent parse_transfer_row(std::string_view row) {
    row = trim(row);
    std::array<std::string_view, 8> f;
    std::size_t n = 0;
    while (true) {
        auto comma = row.find(',');
        if (n == f.size()) malformed("too many columns in transfer row");
        f[n++] = row.substr(0, comma);
        if (comma == std::string_view::npos) break;
        row.remove_prefix(comma + 1);
    }
    if (n != f.size()) malformed("expected 8 columns in transfer row");
    TransferEvent ev;
    ev.timestamp = static_cast<Timestamp>(parse_u64(f[0], "timestamp"));
    ev.block_number = parse_u64(f[1], "block_number");
    ev.tx_hash = parse_hash(f[2], "tx_hash");
    ev.log_index = parse_u64(f[3], "log_index");
    ev.contract = parse_address(f[4]);
    ev.from = parse_address(f[5]);
    ev.to = parse_address(f[6]);
    auto token = Uint256::from_decimal(f[7]);
    if (!token) malformed("token_id is not a canonical uint256 decimal");
    ev.token_id = *token;
    return ev;
}

void write_transfer_csv(std::ostream& out, std::span<const TransferEvent> events) {
    out << kTransferCsvHeader << '\n';
    for (const auto& ev : events) out << format_transfer_row(ev) << '\n';
}

TransferReader::TransferReader(std::istream& in) : in_(in) {}

bool TransferReader::next(TransferEvent& ev) {
    while (std::getline(in_, line_)) {
        ++line_no_;
        auto body = trim(line_);
        if (body.empty()) continue;
        if (line_no_ == 1) {
            if (body != kTransferCsvHeader) malformed("unexpected transfer CSV header");
            continue;
        }
        try {
            ev = parse_transfer_row(body);
        } catch (const Error& e) {
            malformed("line " + std::to_string(line_no_) + ": " + e.what());
        }
        return true;
    }
    if (in_.bad()) throw Error(ErrorCode::Io, "read failure");
    return false;
}

std::vector<TransferEvent> read_transfer_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    TransferReader reader(in);
    std::vector<TransferEvent> out;
    TransferEvent ev;
    while (reader.next(ev)) out.push_back(ev);
    return out;
}

}  // namespace nftgraph
