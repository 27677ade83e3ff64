#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nftgraph/types.hpp"

namespace nftgraph {

/// keccak256("Transfer(address,address,uint256)"), topics[0] of every Transfer log.
inline constexpr std::string_view kTransferTopicHex =
    "0xddf252ad1be2c89b69c2b068fc378daa952ba7f163c4a11628f55a4df523b3ef";

const Hash32& transfer_topic();

/// One exported event log row.
struct RawLog {
    std::uint64_t block_number = 0;
    Timestamp block_timestamp = 0;
    Hash32 tx_hash;
    std::uint64_t log_index = 0;
    Address contract;
    std::array<Hash32, 4> topics{};
    std::uint8_t topic_count = 0;
    std::string data = "0x";  // lowercase hex, possibly just "0x"

    std::span<const Hash32> topic_span() const { return {topics.data(), topic_count}; }
};

struct TransferEvent {
    std::uint64_t block_number = 0;
    Timestamp timestamp = 0;
    Hash32 tx_hash;
    std::uint64_t log_index = 0;
    Address contract;
    Address from;
    Address to;
    Uint256 token_id;

    bool is_mint() const { return from == kNullAddress; }
    bool is_burn() const { return to == kNullAddress; }

    friend bool operator==(const TransferEvent&, const TransferEvent&) = default;
};

enum class SkipReason { WrongTopic, Arity, NullToNull };

using DecodeResult = std::variant<TransferEvent, SkipReason>;

enum class ContractKind { Erc721, NonConforming };

struct ContractClass {
    Address contract;
    ContractKind kind = ContractKind::Erc721;
    std::uint64_t log_count = 0;  // Transfer-topic logs seen
};

struct ContractObservation {
    Address contract;
    bool transfer_topic = false;  // topics[0] == Transfer
    bool four_topics = false;
};

struct IngestStats {
    std::uint64_t records_read = 0;
    std::uint64_t transfers_emitted = 0;
    std::uint64_t skipped_wrong_topic = 0;
    std::uint64_t skipped_non_conforming = 0;
    std::uint64_t skipped_duplicate = 0;
    std::uint64_t skipped_malformed = 0;

    std::uint64_t skipped_total() const {
        return skipped_wrong_topic + skipped_non_conforming + skipped_duplicate + skipped_malformed;
    }
    bool balanced() const { return records_read == transfers_emitted + skipped_total(); }

    friend bool operator==(const IngestStats&, const IngestStats&) = default;
};

/// Column order of raw CSV input; the header line itself is skipped by readers.
inline constexpr std::string_view kRawCsvHeader =
    "block_number,block_timestamp,transaction_hash,log_index,address,topics,data";

/// Parses one JSONL object or one raw CSV row (auto-detected by a leading '{').
/// `now` bounds block timestamps from above; defaults to the wall clock.
/// Throws Error(Malformed).
RawLog parse_log_line(std::string_view line, Timestamp now = 0);

DecodeResult decode_transfer(const RawLog& raw);

/// A contract is ERC721 iff every Transfer-topic log it emitted carried 4 topics.
/// Contracts without Transfer-topic logs are omitted. Output sorted by address.
std::vector<ContractClass> classify_contracts(std::span<const ContractObservation> observations);

struct IngestResult {
    std::vector<TransferEvent> events;  // sorted canonical order
    IngestStats stats;
    std::vector<ContractClass> contracts;
};

struct IngestOptions {
    unsigned threads = 0;  // 0 = hardware concurrency
    Timestamp now = 0;     // 0 = wall clock
};

/// Full in-memory pipeline over raw log files: parse, dedupe, decode, classify, sort.
IngestResult ingest_files(std::span<const std::filesystem::path> inputs, const IngestOptions& opts = {});

/// Runs ingest_files and writes the normalized transfer CSV. The output is written to a
/// temporary sibling first; on any error no partial output is left behind.
IngestStats normalize_stream(std::span<const std::filesystem::path> inputs,
                             const std::filesystem::path& output, const IngestOptions& opts = {});

/// Canonical ordering of normalized transfers.
bool transfer_less(const TransferEvent& a, const TransferEvent& b);

// --- normalized transfer CSV -------------------------------------------------

inline constexpr std::string_view kTransferCsvHeader =
    "timestamp,block_number,tx_hash,log_index,contract,from,to,token_id";

std::string format_transfer_row(const TransferEvent& ev);
TransferEvent parse_transfer_row(std::string_view row);

void write_transfer_csv(std::ostream& out, std::span<const TransferEvent> events);

/// Streams a normalized CSV one event at a time.
class TransferReader {
public:
    explicit TransferReader(std::istream& in);
    /// False at end of input. Throws Error(Malformed) with the line number on bad rows.
    bool next(TransferEvent& ev);

private:
    std::istream& in_;
    std::string line_;
    std::uint64_t line_no_ = 0;
};

std::vector<TransferEvent> read_transfer_csv(const std::filesystem::path& path);

}  // namespace nftgraph
