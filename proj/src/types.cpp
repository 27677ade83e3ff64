#include "nftgraph/types.hpp"

#include <algorithm>
#include <cstdio>

#include "nftgraph/error.hpp"

namespace nftgraph {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::Malformed: return "MALFORMED";
        case ErrorCode::Io: return "IO";
        case ErrorCode::UnsortedInput: return "UNSORTED_INPUT";
        case ErrorCode::UnknownNode: return "UNKNOWN_NODE";
        case ErrorCode::NegativeAge: return "NEGATIVE_AGE";
        case ErrorCode::EmptyView: return "EMPTY_VIEW";
        case ErrorCode::TooSmall: return "TOO_SMALL";
        case ErrorCode::NoPairs: return "NO_PAIRS";
        case ErrorCode::Degenerate: return "DEGENERATE";
        case ErrorCode::Parse: return "PARSE";
        case ErrorCode::Disconnected: return "DISCONNECTED";
        case ErrorCode::TooLarge: return "TOO_LARGE";
        case ErrorCode::Timeout: return "TIMEOUT";
        case ErrorCode::InsufficientNodes: return "INSUFFICIENT_NODES";
        case ErrorCode::BadRecord: return "BAD_RECORD";
        case ErrorCode::BadCache: return "BAD_CACHE";
        case ErrorCode::Usage: return "USAGE";
    }
    return "UNKNOWN";
}

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

bool decode_hex(std::string_view text, std::span<std::uint8_t> out) {
    if (text.size() >= 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) text.remove_prefix(2);
    if (text.size() != out.size() * 2) return false;
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = hex_value(text[2 * i]);
        int lo = hex_value(text[2 * i + 1]);
        if (hi < 0 || lo < 0) return false;
        out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
    }
    return true;
}

std::string encode_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(2 + bytes.size() * 2, '0');
    s[1] = 'x';
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        s[2 + 2 * i] = digits[bytes[i] >> 4];
        s[3 + 2 * i] = digits[bytes[i] & 0xf];
    }
    return s;
}

Uint256 Uint256::from_be_bytes(std::span<const std::uint8_t, 32> word) {
    Uint256 v;
    for (int limb = 0; limb < 4; ++limb) {
        std::uint64_t x = 0;
        for (int b = 0; b < 8; ++b) x = x << 8 | word[(3 - limb) * 8 + b];
        v.limbs_[limb] = x;
    }
    return v;
}

std::array<std::uint8_t, 32> Uint256::to_be_bytes() const {
    std::array<std::uint8_t, 32> out{};
    for (int limb = 0; limb < 4; ++limb)
        for (int b = 0; b < 8; ++b)
            out[(3 - limb) * 8 + b] = static_cast<std::uint8_t>(limbs_[limb] >> (56 - 8 * b));
    return out;
}

std::optional<Uint256> Uint256::from_decimal(std::string_view text) {
    if (text.empty() || text.size() > 78) return std::nullopt;
    if (text.size() > 1 && text[0] == '0') return std::nullopt;
    Uint256 v;
    for (char c : text) {
        if (c < '0' || c > '9') return std::nullopt;
        // v = v * 10 + digit, detecting overflow out of the top limb
        unsigned __int128 carry = static_cast<unsigned>(c - '0');
        for (auto& limb : v.limbs_) {
            unsigned __int128 t = static_cast<unsigned __int128>(limb) * 10 + carry;
            limb = static_cast<std::uint64_t>(t);
            carry = t >> 64;
        }
        if (carry != 0) return std::nullopt;
    }
    return v;
}

std::string Uint256::to_decimal() const {
    auto work = limbs_;
    std::string digits;
    auto is_zero = [&] { return work[0] == 0 && work[1] == 0 && work[2] == 0 && work[3] == 0; };
    if (is_zero()) return "0";
    while (!is_zero()) {
        // divide by 10^19 and emit the remainder as 19 digits
        constexpr std::uint64_t chunk = 10000000000000000000ULL;
        unsigned __int128 rem = 0;
        for (int i = 3; i >= 0; --i) {
            unsigned __int128 cur = rem << 64 | work[i];
            work[i] = static_cast<std::uint64_t>(cur / chunk);
            rem = cur % chunk;
        }
        auto r = static_cast<std::uint64_t>(rem);
        for (int i = 0; i < 19; ++i) {
            digits.push_back(static_cast<char>('0' + r % 10));
            r /= 10;
        }
    }
    while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
    std::reverse(digits.begin(), digits.end());
    return digits;
}

Uint256 Uint256::next() const {
    Uint256 v = *this;
    for (auto& limb : v.limbs_)
        if (++limb != 0) break;
    return v;
}

std::size_t Uint256::hash() const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (auto limb : limbs_) {
        h ^= limb + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
}

void Fnv1a::update(std::span<const std::uint8_t> data) {
    for (auto b : data) {
        state_ ^= b;
        state_ *= 0x100000001b3ULL;
    }
}

std::string Fnv1a::hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
    return buf;
}

}  // namespace nftgraph
