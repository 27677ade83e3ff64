#include "nftgraph/calendar.hpp"

#include <cstdio>

namespace nftgraph {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// Monday 1969-12-29 starts ISO week ordinal 0.
constexpr std::int64_t kWeekEpochOffsetDays = 3;

}  // namespace

std::optional<Granularity> parse_granularity(std::string_view name) {
    if (name == "day") return Granularity::Day;
    if (name == "week") return Granularity::Week;
    if (name == "month") return Granularity::Month;
    if (name == "3-month" || name == "quarter") return Granularity::Quarter;
    if (name == "half-year") return Granularity::HalfYear;
    if (name == "year") return Granularity::Year;
    return std::nullopt;
}

std::string_view to_string(Granularity g) {
    switch (g) {
        case Granularity::Day: return "day";
        case Granularity::Week: return "week";
        case Granularity::Month: return "month";
        case Granularity::Quarter: return "3-month";
        case Granularity::HalfYear: return "half-year";
        case Granularity::Year: return "year";
    }
    return "?";
}

// Howard Hinnant's proleptic Gregorian conversions.
std::int64_t days_from_civil(CivilDate d) {
    std::int64_t y = d.year - (d.month <= 2 ? 1 : 0);
    const std::int64_t era = floor_div(y, 400);
    const std::int64_t yoe = y - era * 400;
    const std::int64_t mp = (d.month + 9) % 12;
    const std::int64_t doy = (153 * mp + 2) / 5 + d.day - 1;
    const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = floor_div(z, 146097);
    const std::int64_t doe = z - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    const auto day = static_cast<unsigned>(doy - (153 * mp + 2) / 5 + 1);
    const auto month = static_cast<unsigned>(mp < 10 ? mp + 3 : mp - 9);
    const auto year = static_cast<int>(yoe + era * 400 + (month <= 2 ? 1 : 0));
    return {year, month, day};
}

std::int64_t period_index(Timestamp ts, Granularity g) {
    const std::int64_t days = floor_div(ts, kSecondsPerDay);
    if (g == Granularity::Day) return days;
    if (g == Granularity::Week) return floor_div(days + kWeekEpochOffsetDays, 7);
    const CivilDate d = civil_from_days(days);
    const std::int64_t months = static_cast<std::int64_t>(d.year) * 12 + (d.month - 1);
    switch (g) {
        case Granularity::Month: return months;
        case Granularity::Quarter: return floor_div(months, 3);
        case Granularity::HalfYear: return floor_div(months, 6);
        case Granularity::Year: return d.year;
        default: return 0;
    }
}

Timestamp period_start(std::int64_t index, Granularity g) {
    auto month_start = [](std::int64_t months) {
        CivilDate d{static_cast<int>(floor_div(months, 12)), static_cast<unsigned>(months - floor_div(months, 12) * 12 + 1), 1};
        return days_from_civil(d) * kSecondsPerDay;
    };
    switch (g) {
        case Granularity::Day: return index * kSecondsPerDay;
        case Granularity::Week: return (index * 7 - kWeekEpochOffsetDays) * kSecondsPerDay;
        case Granularity::Month: return month_start(index);
        case Granularity::Quarter: return month_start(index * 3);
        case Granularity::HalfYear: return month_start(index * 6);
        case Granularity::Year: return month_start(index * 12);
    }
    return 0;
}

std::string period_label(std::int64_t index, Granularity g) {
    char buf[32];
    const CivilDate start = civil_from_days(floor_div(period_start(index, g), kSecondsPerDay));
    switch (g) {
        case Granularity::Day:
            std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", start.year, start.month, start.day);
            break;
        case Granularity::Week: {
            // ISO year and week number are those of the week's Thursday
            const std::int64_t thursday = floor_div(period_start(index, g), kSecondsPerDay) + 3;
            const CivilDate th = civil_from_days(thursday);
            const std::int64_t jan1 = days_from_civil({th.year, 1, 1});
            std::snprintf(buf, sizeof buf, "%04d-W%02lld", th.year,
                          static_cast<long long>((thursday - jan1) / 7 + 1));
            break;
        }
        case Granularity::Month:
            std::snprintf(buf, sizeof buf, "%04d-%02u", start.year, start.month);
            break;
        case Granularity::Quarter:
            std::snprintf(buf, sizeof buf, "%04d-Q%u", start.year, (start.month - 1) / 3 + 1);
            break;
        case Granularity::HalfYear:
            std::snprintf(buf, sizeof buf, "%04d-H%u", start.year, (start.month - 1) / 6 + 1);
            break;
        case Granularity::Year:
            std::snprintf(buf, sizeof buf, "%04d", start.year);
            break;
    }
    return buf;
}

}  // namespace nftgraph
