#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "nftgraph/types.hpp"

namespace nftgraph {

/// UTC calendar buckets. Weeks are ISO weeks starting Monday; quarters are 3-month blocks.
enum class Granularity { Day, Week, Month, Quarter, HalfYear, Year };

std::optional<Granularity> parse_granularity(std::string_view name);
std::string_view to_string(Granularity g);

struct CivilDate {
    int year;
    unsigned month;  // 1..12
    unsigned day;    // 1..31
};

std::int64_t days_from_civil(CivilDate d);
CivilDate civil_from_days(std::int64_t days);

/// Ordinal of the period containing ts; consecutive periods have consecutive ordinals.
std::int64_t period_index(Timestamp ts, Granularity g);
/// Inclusive start of the period with the given ordinal.
Timestamp period_start(std::int64_t index, Granularity g);
/// Exclusive end, i.e. the start of the next period.
inline Timestamp period_end(std::int64_t index, Granularity g) { return period_start(index + 1, g); }
/// Human-readable label: 2021-03-04, 2021-W09, 2021-03, 2021-Q1, 2021-H1, 2021.
std::string period_label(std::int64_t index, Granularity g);

}  // namespace nftgraph
