#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "nftgraph/fixture.hpp"
#include "nftgraph/ingest.hpp"
#include "support.hpp"

using namespace nftgraph;
using testing::error_of;
namespace fs = std::filesystem;

namespace {

const fs::path kData = NFTGRAPH_TEST_DATA;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / "nftgraph_ingest_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::string pad(const std::string& addr) { return "0x000000000000000000000000" + addr.substr(2); }

std::string csv_row(const std::string& topics, const std::string& data = "0x") {
    return "10000001,1600000100,0x0101010101010101010101010101010101010101010101010101010101010101,0,"
           "0x00000000000000000000000000000000000000aa," + topics + "," + data;
}

const std::string kA1 = "0x0000000000000000000000000000000000000001";
const std::string kA2 = "0x0000000000000000000000000000000000000002";
const std::string kTok = "0x00000000000000000000000000000000000000000000000000000000000000ff";

}  // namespace

TEST_CASE("golden raw file yields exact counters and the expected normalized output") {
    const fs::path out1 = scratch("golden1.csv"), out2 = scratch("golden2.csv");
    const std::vector<fs::path> in{kData / "golden_raw.csv"};
    const auto s1 = normalize_stream(in, out1, {1, 2000000000});
    const auto s2 = normalize_stream(in, out2, {2, 2000000000});
    CHECK(s1.records_read == 15);
    CHECK(s1.transfers_emitted == 5);
    CHECK(s1.skipped_wrong_topic == 1);
    CHECK(s1.skipped_non_conforming == 3);
    CHECK(s1.skipped_duplicate == 2);
    CHECK(s1.skipped_malformed == 4);
    CHECK(s1.balanced());
    CHECK(s1 == s2);
    CHECK(slurp(out1) == slurp(kData / "golden_expected.csv"));
    CHECK(slurp(out1) == slurp(out2));
}

TEST_CASE("decode of a four-topic transfer") {
    const auto raw = parse_log_line(csv_row(std::string(kTransferTopicHex) + "|" + pad(kA1) + "|" + pad(kA2) + "|" + kTok),
                                    2000000000);
    auto res = decode_transfer(raw);
    REQUIRE(std::holds_alternative<TransferEvent>(res));
    const auto& ev = std::get<TransferEvent>(res);
    CHECK(ev.from.hex() == kA1);
    CHECK(ev.to.hex() == kA2);
    CHECK(ev.token_id == Uint256(255));
    CHECK_FALSE(ev.is_mint());
}

TEST_CASE("skip reasons") {
    const std::string t = std::string(kTransferTopicHex);
    auto three = parse_log_line(csv_row(t + "|" + pad(kA1) + "|" + pad(kA2), kTok), 2000000000);
    CHECK(std::get<SkipReason>(decode_transfer(three)) == SkipReason::Arity);
    auto approval = parse_log_line(
        csv_row("0x8c5be1e5ebec7d5bd14f71427d1e84f3dd0314c0f7b2291e5b200ac8c7c3b925|" + pad(kA1) + "|" + pad(kA2) + "|" + kTok),
        2000000000);
    CHECK(std::get<SkipReason>(decode_transfer(approval)) == SkipReason::WrongTopic);
    const std::string null = "0x0000000000000000000000000000000000000000";
    auto nn = parse_log_line(csv_row(t + "|" + pad(null) + "|" + pad(null) + "|" + kTok), 2000000000);
    CHECK(std::get<SkipReason>(decode_transfer(nn)) == SkipReason::NullToNull);
}

TEST_CASE("malformed lines are rejected") {
    const std::string t = std::string(kTransferTopicHex);
    CHECK(error_of([&] { parse_log_line("1,2,3", 2000000000); }) == ErrorCode::Malformed);
    CHECK(error_of([&] { parse_log_line("{not json", 2000000000); }) == ErrorCode::Malformed);
    CHECK(error_of([&] { parse_log_line(csv_row(t + "|" + pad(kA1) + "|" + pad(kA2) + "|" + kTok), 1500000000); }) ==
          ErrorCode::Malformed);
    CHECK(error_of([&] { parse_log_line(csv_row(t + "|" + t + "|" + t + "|" + t + "|" + t), 2000000000); }) ==
          ErrorCode::Malformed);
}

TEST_CASE("json and csv renderings decode identically") {
    const std::string t = std::string(kTransferTopicHex);
    const auto csv = parse_log_line(csv_row(t + "|" + pad(kA1) + "|" + pad(kA2) + "|" + kTok), 2000000000);
    const std::string json =
        R"({"block_number":"10000001","block_timestamp":1600000100,"transaction_hash":"0x0101010101010101010101010101010101010101010101010101010101010101","log_index":0,"address":"0x00000000000000000000000000000000000000aa","topics":[")" +
        t + "\",\"" + pad(kA1) + "\",\"" + pad(kA2) + "\",\"" + kTok + R"("],"data":"0x"})";
    const auto js = parse_log_line(json, 2000000000);
    CHECK(std::get<TransferEvent>(decode_transfer(csv)) == std::get<TransferEvent>(decode_transfer(js)));
}

TEST_CASE("a single three-topic transfer disqualifies its contract") {
    Address c1, c2;
    c1.bytes[19] = 1;
    c2.bytes[19] = 2;
    std::vector<ContractObservation> obs{{c1, true, true}, {c1, true, false}, {c2, true, true}, {c2, false, false}};
    const auto cls = classify_contracts(obs);
    REQUIRE(cls.size() == 2);
    CHECK(cls[0].contract == c1);
    CHECK(cls[0].kind == ContractKind::NonConforming);
    CHECK(cls[1].kind == ContractKind::Erc721);
    CHECK(cls[1].log_count == 1);
}

TEST_CASE("normalized rows round-trip") {
    auto ev = testing::transfer(1, 2, 1600000000, 77, 3);
    ev.token_id = *Uint256::from_decimal("340282366920938463463374607431768211457");
    const auto row = format_transfer_row(ev);
    CHECK(parse_transfer_row(row) == ev);
    CHECK(error_of([&] { parse_transfer_row("1,2,3"); }) == ErrorCode::Malformed);
}

TEST_CASE("ingest counters balance on generated raw files") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        for (bool json : {false, true}) {
            RawFixtureSpec spec{200, 30, 12, 17, 9, 25, json};
            const auto path = scratch("raw_" + std::to_string(seed) + (json ? ".jsonl" : ".csv"));
            IngestStats expect;
            {
                std::ofstream out(path, std::ios::binary);
                expect = write_raw_fixture(out, spec, seed);
            }
            const std::vector<fs::path> in{path};
            const auto got = ingest_files(in, {1, 2000000000});
            CHECK(got.stats == expect);
            CHECK(got.stats.balanced());
            CHECK(got.stats.skipped_total() + got.events.size() == got.stats.records_read);
            CHECK(std::is_sorted(got.events.begin(), got.events.end(), transfer_less));
        }
    }
}

TEST_CASE("inputs are merged in order and duplicates across files are dropped") {
    RawFixtureSpec spec{50, 0, 0, 0, 0, 0, false};
    const auto p1 = scratch("m1.csv"), p2 = scratch("m2.csv");
    {
        std::ofstream a(p1, std::ios::binary), b(p2, std::ios::binary);
        write_raw_fixture(a, spec, 9);
        write_raw_fixture(b, spec, 9);
    }
    const std::vector<fs::path> in{p1, p2};
    const auto r = ingest_files(in, {0, 2000000000});
    CHECK(r.stats.records_read == 100);
    CHECK(r.stats.skipped_duplicate == 50);
    CHECK(r.stats.transfers_emitted == 50);
}

TEST_CASE("failed normalization leaves no output behind") {
    const auto out = scratch("never.csv");
    fs::remove(out);
    const std::vector<fs::path> in{scratch("does_not_exist.csv")};
    CHECK(error_of([&] { normalize_stream(in, out); }) == ErrorCode::Io);
    CHECK_FALSE(fs::exists(out));
}
