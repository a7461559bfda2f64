#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coshare/ip.hpp"

namespace coshare {

/// One log line: who reported it, who attacked, which port, when.
struct AttackEvent {
    std::string contributor;
    Ipv4 source_ip = 0;
    int target_port = 0;
    std::int64_t timestamp = 0; // seconds since epoch, UTC

    friend bool operator==(const AttackEvent&, const AttackEvent&) = default;
};

/// Inclusive day-number range.
struct DayRange {
    int first = 1;
    int last = 1;
    bool contains(int day) const { return day >= first && day <= last; }
    friend bool operator==(const DayRange&, const DayRange&) = default;
};

/// Maps timestamps to day numbers 1..T. Day 1 starts at UTC midnight of
/// the earliest event's day.
struct Timeline {
    std::int64_t t0 = 0;
    int days = 0;

    int day_of(std::int64_t ts) const {
        std::int64_t delta = ts - t0;
        std::int64_t day = delta / 86400;
        if (delta < 0 && delta % 86400 != 0) --day; // floor
        return static_cast<int>(day) + 1;
    }
    std::int64_t day_start(int day) const { return t0 + std::int64_t{day - 1} * 86400; }
};

/// Immutable, indexable collection of attack events with per-victim views.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<AttackEvent> events);
    /// Keeps the given day numbering instead of deriving it from the
    /// events; lets a victim-sampled subset stay aligned with its
    /// parent dataset.
    Dataset(std::vector<AttackEvent> events, Timeline timeline);

    const std::vector<AttackEvent>& events() const { return events_; }
    std::size_t size() const { return events_.size(); }
    bool empty() const { return events_.empty(); }

    const Timeline& timeline() const { return timeline_; }
    int days() const { return timeline_.days; }
    int day_of(const AttackEvent& e) const { return timeline_.day_of(e.timestamp); }
    DayRange full_range() const { return {1, timeline_.days}; }

    /// Contributor ids in lexicographic order.
    std::vector<std::string> victims() const;
    std::size_t victim_count() const { return victim_index_.size(); }
    bool has_victim(const std::string& id) const { return victim_index_.count(id) != 0; }

    /// Event positions for one contributor, in dataset order. Empty for
    /// unknown contributors.
    std::span<const std::size_t> victim_events(const std::string& id) const;

private:
    std::vector<AttackEvent> events_;
    Timeline timeline_;
    std::map<std::string, std::vector<std::size_t>> victim_index_;
};

/// Unique source addresses of one victim over a day window. `ips` is
/// kept sorted so set operations are merges.
struct SourceSet {
    std::string owner;
    std::vector<Ipv4> ips;
    DayRange window;

    std::size_t size() const { return ips.size(); }
    bool empty() const { return ips.empty(); }
    bool contains(Ipv4 ip) const;
};

/// Column order and timestamp encoding of a CSV log.
struct FormatDescriptor {
    enum class TimestampFormat { calendar, epoch_seconds };

    int col_contributor = 0;
    int col_source = 1;
    int col_port = 2;
    int col_timestamp = 3;
    TimestampFormat ts_format = TimestampFormat::calendar;
    char delimiter = ',';

    int column_count() const;
};

struct ParseReport {
    std::size_t lines = 0;    // non-blank lines seen
    std::size_t accepted = 0; // events produced
    std::map<std::string, std::size_t> rejected_by_reason;

    std::size_t rejected() const;
};

struct ParseResult {
    Dataset dataset;
    ParseReport report;
};

/// Reads a line-oriented CSV log. Malformed lines are counted per
/// reason, never fatal, except that more than 50% malformed lines
/// signal a wrong descriptor and raise DataError. An unreadable stream
/// raises DataError.
ParseResult parse_log(std::istream& in, const FormatDescriptor& format = {});

/// Writes the canonical CSV form (dotted-quad without zero padding,
/// "YYYY-MM-DD HH:MM:SS" timestamps). parse_log(serialize(d)) == d on
/// the event multiset.
void serialize(const Dataset& dataset, std::ostream& out, const FormatDescriptor& format = {});

struct CleanReport {
    std::size_t non_routable = 0;
    std::size_t invalid_port = 0;
    std::map<std::string, std::size_t> by_block; // reserved-block name -> removals

    std::size_t removed() const { return non_routable + invalid_port; }
};

/// Drops events whose source falls in a reserved block or whose port is
/// out of range. Idempotent.
std::pair<Dataset, CleanReport> clean(const Dataset& dataset,
                                      const ReservedBlocks& reserved = ReservedBlocks::defaults());

struct FilterReport {
    std::size_t single_event_contributors = 0;
    std::size_t single_day_contributors = 0; // one day and < 20 events
    std::size_t events_removed = 0;
};

/// Removes contributors that report (1) only one event overall, or
/// (2) only one day and fewer than 20 events. Idempotent.
std::pair<Dataset, FilterReport> filter_contributors(const Dataset& dataset);

/// Deduplicated sources of `victim`'s events inside `window`. Unknown
/// victims yield an empty set.
SourceSet source_set(const Dataset& dataset, const std::string& victim, DayRange window);

/// "YYYY-MM-DD HH:MM:SS" (UTC) -> epoch seconds; nullopt if malformed.
std::optional<std::int64_t> parse_timestamp(std::string_view text);
std::string format_timestamp(std::int64_t ts);

} // namespace coshare
