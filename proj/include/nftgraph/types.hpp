#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace nftgraph {

using Timestamp = std::int64_t;  // unix seconds, UTC
using NodeId = std::uint32_t;

inline constexpr Timestamp kSecondsPerDay = 86400;

/// First block timestamp of Ethereum mainnet after genesis; earlier times are invalid.
inline constexpr Timestamp kChainStartTimestamp = 1438269973;

/// Decodes exactly `out.size()` bytes from a hex string with optional 0x prefix.
/// Returns false on bad length or non-hex characters.
bool decode_hex(std::string_view text, std::span<std::uint8_t> out);

/// Lowercase 0x-prefixed hex of the bytes.
std::string encode_hex(std::span<const std::uint8_t> bytes);

template <std::size_t N>
struct FixedBytes {
    std::array<std::uint8_t, N> bytes{};

    static std::optional<FixedBytes> parse(std::string_view hex) {
        FixedBytes out;
        if (!decode_hex(hex, out.bytes)) return std::nullopt;
        return out;
    }

    std::string hex() const { return encode_hex(bytes); }

    bool is_zero() const {
        for (auto b : bytes)
            if (b != 0) return false;
        return true;
    }

    friend auto operator<=>(const FixedBytes&, const FixedBytes&) = default;
    friend bool operator==(const FixedBytes&, const FixedBytes&) = default;
};

using Address = FixedBytes<20>;
using Hash32 = FixedBytes<32>;

inline constexpr Address kNullAddress{};

/// Unsigned 256-bit integer, enough for ERC-721 token ids.
class Uint256 {
public:
    constexpr Uint256() = default;
    constexpr explicit Uint256(std::uint64_t v) : limbs_{v, 0, 0, 0} {}

    /// Big-endian 32-byte word, as stored in an event topic.
    static Uint256 from_be_bytes(std::span<const std::uint8_t, 32> word);
    /// Canonical decimal without sign or leading zeros; nullopt on overflow or junk.
    static std::optional<Uint256> from_decimal(std::string_view text);

    std::string to_decimal() const;
    std::array<std::uint8_t, 32> to_be_bytes() const;

    bool fits_u64() const { return limbs_[1] == 0 && limbs_[2] == 0 && limbs_[3] == 0; }
    std::uint64_t low_u64() const { return limbs_[0]; }

    /// Wrapping increment.
    Uint256 next() const;

    std::size_t hash() const;

    friend bool operator==(const Uint256&, const Uint256&) = default;
    friend std::strong_ordering operator<=>(const Uint256& a, const Uint256& b) {
        for (int i = 3; i >= 0; --i)
            if (auto c = a.limbs_[i] <=> b.limbs_[i]; c != 0) return c;
        return std::strong_ordering::equal;
    }

private:
    std::array<std::uint64_t, 4> limbs_{};  // little-endian limbs
};

/// 64-bit FNV-1a, used for content digests in reports and summaries.
class Fnv1a {
public:
    void update(std::span<const std::uint8_t> data);
    void update(std::string_view s) {
        update(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    }
    template <class T>
        requires std::is_trivially_copyable_v<T>
    void update_pod(const T& v) {
        update(std::span(reinterpret_cast<const std::uint8_t*>(&v), sizeof(T)));
    }
    std::uint64_t value() const { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace nftgraph

template <std::size_t N>
struct std::hash<nftgraph::FixedBytes<N>> {
    std::size_t operator()(const nftgraph::FixedBytes<N>& v) const noexcept {
        // Addresses and hashes are already uniformly distributed.
        std::uint64_t h = 0;
        std::memcpy(&h, v.bytes.data() + N - 8, 8);
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

template <>
struct std::hash<nftgraph::Uint256> {
    std::size_t operator()(const nftgraph::Uint256& v) const noexcept { return v.hash(); }
};
