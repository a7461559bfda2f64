#include "coshare/event.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <istream>
#include <limits>
#include <ostream>

#include "coshare/errors.hpp"

namespace coshare {

namespace {

// Howard Hinnant's days-from-civil: days since 1970-01-01 for a proleptic
// Gregorian date.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u
                         + static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = static_cast<int>(yr + (m <= 2));
}

bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len, unsigned& out) {
    if (pos + len > s.size()) return false;
    unsigned v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        char c = s[i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + static_cast<unsigned>(c - '0');
    }
    out = v;
    return true;
}

constexpr std::array<unsigned, 13> kDaysInMonth = {0, 31, 28, 31, 30, 31, 30,
                                                   31, 31, 30, 31, 30, 31};

bool is_leap(int y) { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

} // namespace

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
    // Strict "YYYY-MM-DD HH:MM:SS".
    if (text.size() != 19) return std::nullopt;
    if (text[4] != '-' || text[7] != '-' || text[10] != ' ' || text[13] != ':' ||
        text[16] != ':')
        return std::nullopt;
    unsigned y, mo, d, h, mi, s;
    if (!parse_fixed_uint(text, 0, 4, y) || !parse_fixed_uint(text, 5, 2, mo) ||
        !parse_fixed_uint(text, 8, 2, d) || !parse_fixed_uint(text, 11, 2, h) ||
        !parse_fixed_uint(text, 14, 2, mi) || !parse_fixed_uint(text, 17, 2, s))
        return std::nullopt;
    if (mo < 1 || mo > 12) return std::nullopt;
    unsigned dim = kDaysInMonth[mo];
    if (mo == 2 && is_leap(static_cast<int>(y))) dim = 29;
    if (d < 1 || d > dim) return std::nullopt;
    if (h > 23 || mi > 59 || s > 59) return std::nullopt;
    return days_from_civil(static_cast<int>(y), static_cast<int>(mo), static_cast<int>(d)) * 86400
           + h * 3600 + mi * 60 + s;
}

std::string format_timestamp(std::int64_t ts) {
    std::int64_t days = ts / 86400;
    std::int64_t sec = ts % 86400;
    if (sec < 0) {
        sec += 86400;
        --days;
    }
    int y;
    unsigned mo, d;
    civil_from_days(days, y, mo, d);
    unsigned h = static_cast<unsigned>(sec / 3600);
    unsigned mi = static_cast<unsigned>(sec % 3600 / 60);
    unsigned s = static_cast<unsigned>(sec % 60);
    char buf[20];
    auto put2 = [](char* p, unsigned v) {
        p[0] = static_cast<char>('0' + v / 10);
        p[1] = static_cast<char>('0' + v % 10);
    };
    buf[0] = static_cast<char>('0' + y / 1000 % 10);
    buf[1] = static_cast<char>('0' + y / 100 % 10);
    buf[2] = static_cast<char>('0' + y / 10 % 10);
    buf[3] = static_cast<char>('0' + y % 10);
    buf[4] = '-';
    put2(buf + 5, mo);
    buf[7] = '-';
    put2(buf + 8, d);
    buf[10] = ' ';
    put2(buf + 11, h);
    buf[13] = ':';
    put2(buf + 14, mi);
    buf[16] = ':';
    put2(buf + 17, s);
    buf[19] = '\0';
    return std::string(buf, 19);
}

Dataset::Dataset(std::vector<AttackEvent> events) : events_(std::move(events)) {
    if (events_.empty()) return;
    std::int64_t min_ts = std::numeric_limits<std::int64_t>::max();
    std::int64_t max_ts = std::numeric_limits<std::int64_t>::min();
    for (std::size_t i = 0; i < events_.size(); ++i) {
        const AttackEvent& e = events_[i];
        min_ts = std::min(min_ts, e.timestamp);
        max_ts = std::max(max_ts, e.timestamp);
        victim_index_[e.contributor].push_back(i);
    }
    std::int64_t day0 = min_ts / 86400;
    if (min_ts < 0 && min_ts % 86400 != 0) --day0;
    timeline_.t0 = day0 * 86400;
    timeline_.days = timeline_.day_of(max_ts);
}

Dataset::Dataset(std::vector<AttackEvent> events, Timeline timeline)
    : events_(std::move(events)), timeline_(timeline) {
    for (std::size_t i = 0; i < events_.size(); ++i)
        victim_index_[events_[i].contributor].push_back(i);
}

std::vector<std::string> Dataset::victims() const {
    std::vector<std::string> out;
    out.reserve(victim_index_.size());
    for (const auto& [id, _] : victim_index_) out.push_back(id);
    return out;
}

std::span<const std::size_t> Dataset::victim_events(const std::string& id) const {
    auto it = victim_index_.find(id);
    if (it == victim_index_.end()) return {};
    return it->second;
}

bool SourceSet::contains(Ipv4 ip) const {
    return std::binary_search(ips.begin(), ips.end(), ip);
}

int FormatDescriptor::column_count() const {
    return std::max({col_contributor, col_source, col_port, col_timestamp}) + 1;
}

std::size_t ParseReport::rejected() const {
    std::size_t total = 0;
    for (const auto& [_, n] : rejected_by_reason) total += n;
    return total;
}

ParseResult parse_log(std::istream& in, const FormatDescriptor& format) {
    if (in.bad()) throw DataError("parse_log: unreadable input stream");

    ParseReport report;
    std::vector<AttackEvent> events;
    std::string line;
    const int need = format.column_count();

    while (std::getline(in, line)) {
        if (is_blank(line)) continue;
        ++report.lines;

        auto fields = split_fields(line, format.delimiter);
        if (static_cast<int>(fields.size()) < need) {
            ++report.rejected_by_reason["missing_fields"];
            continue;
        }

        std::string_view contributor = trim(fields[static_cast<std::size_t>(format.col_contributor)]);
        std::string_view source = trim(fields[static_cast<std::size_t>(format.col_source)]);
        std::string_view port_text = trim(fields[static_cast<std::size_t>(format.col_port)]);
        std::string_view ts_text = trim(fields[static_cast<std::size_t>(format.col_timestamp)]);

        if (contributor.empty()) {
            ++report.rejected_by_reason["empty_contributor"];
            continue;
        }

        std::optional<Ipv4> ip = parse_ipv4(source);
        if (!ip) {
            ++report.rejected_by_reason["bad_source_ip"];
            continue;
        }

        int port = 0;
        auto [pend, pec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
        if (pec != std::errc{} || pend != port_text.data() + port_text.size()) {
            ++report.rejected_by_reason["bad_port"];
            continue;
        }

        std::int64_t ts = 0;
        if (format.ts_format == FormatDescriptor::TimestampFormat::calendar) {
            std::optional<std::int64_t> parsed = parse_timestamp(ts_text);
            if (!parsed) {
                ++report.rejected_by_reason["bad_timestamp"];
                continue;
            }
            ts = *parsed;
        } else {
            auto [tend, tec] = std::from_chars(ts_text.data(), ts_text.data() + ts_text.size(), ts);
            if (tec != std::errc{} || tend != ts_text.data() + ts_text.size()) {
                ++report.rejected_by_reason["bad_timestamp"];
                continue;
            }
        }

        events.push_back(AttackEvent{std::string(contributor), *ip, port, ts});
        ++report.accepted;
    }
    if (in.bad()) throw DataError("parse_log: read failure mid-stream");

    if (report.lines > 0 && report.rejected() * 2 > report.lines)
        throw DataError("parse_log: over half of non-blank lines malformed; "
                        "wrong format descriptor?");

    return ParseResult{Dataset(std::move(events)), std::move(report)};
}

void serialize(const Dataset& dataset, std::ostream& out, const FormatDescriptor& format) {
    const int cols = format.column_count();
    std::vector<std::string> fields(static_cast<std::size_t>(cols));
    for (const AttackEvent& e : dataset.events()) {
        for (std::string& f : fields) f.clear();
        fields[static_cast<std::size_t>(format.col_contributor)] = e.contributor;
        fields[static_cast<std::size_t>(format.col_source)] = format_ipv4(e.source_ip);
        fields[static_cast<std::size_t>(format.col_port)] = std::to_string(e.target_port);
        fields[static_cast<std::size_t>(format.col_timestamp)] =
            format.ts_format == FormatDescriptor::TimestampFormat::calendar
                ? format_timestamp(e.timestamp)
                : std::to_string(e.timestamp);
        for (int c = 0; c < cols; ++c) {
            if (c) out << format.delimiter;
            out << fields[static_cast<std::size_t>(c)];
        }
        out << '\n';
    }
    if (!out) throw DataError("serialize: write failure");
}

std::pair<Dataset, CleanReport> clean(const Dataset& dataset, const ReservedBlocks& reserved) {
    CleanReport report;
    std::vector<AttackEvent> kept;
    kept.reserve(dataset.size());
    for (const AttackEvent& e : dataset.events()) {
        if (e.target_port < 0 || e.target_port > 65535) {
            ++report.invalid_port;
            continue;
        }
        if (const ReservedBlocks::Entry* entry = reserved.match(e.source_ip)) {
            ++report.non_routable;
            ++report.by_block[entry->name];
            continue;
        }
        kept.push_back(e);
    }
    return {Dataset(std::move(kept)), std::move(report)};
}

std::pair<Dataset, FilterReport> filter_contributors(const Dataset& dataset) {
    FilterReport report;
    std::vector<AttackEvent> kept;
    kept.reserve(dataset.size());

    std::map<std::string, std::pair<std::size_t, std::pair<int, bool>>> info;
    // per contributor: event count, (first day seen, multiple days?)
    for (const AttackEvent& e : dataset.events()) {
        int day = dataset.day_of(e);
        auto [it, fresh] = info.try_emplace(e.contributor, 0u, std::pair<int, bool>{day, false});
        ++it->second.first;
        if (!fresh && it->second.second.first != day) it->second.second.second = true;
    }

    std::map<std::string, bool> drop;
    for (const auto& [id, data] : info) {
        const auto& [count, days] = data;
        bool single_event = count == 1;
        bool single_small_day = !days.second && count < 20;
        drop[id] = single_event || single_small_day;
        if (single_event)
            ++report.single_event_contributors;
        else if (single_small_day)
            ++report.single_day_contributors;
    }

    for (const AttackEvent& e : dataset.events()) {
        if (drop[e.contributor]) {
            ++report.events_removed;
            continue;
        }
        kept.push_back(e);
    }
    return {Dataset(std::move(kept)), report};
}

SourceSet source_set(const Dataset& dataset, const std::string& victim, DayRange window) {
    SourceSet out;
    out.owner = victim;
    out.window = window;
    for (std::size_t i : dataset.victim_events(victim)) {
        const AttackEvent& e = dataset.events()[i];
        if (window.contains(dataset.day_of(e))) out.ips.push_back(e.source_ip);
    }
    std::sort(out.ips.begin(), out.ips.end());
    out.ips.erase(std::unique(out.ips.begin(), out.ips.end()), out.ips.end());
    return out;
}

} // namespace coshare
