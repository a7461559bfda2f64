#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coshare/event.hpp"

namespace coshare {

/// Attack prediction for one test day from a sliding training window:
/// exponentially-weighted moving averages per source, thresholded (or
/// budget-capped) into a watchlist, plus the two worst-offender
/// baselines the scores are judged against.

struct PredictionParams {
    double alpha = 0.9;     // smoothing factor in (0, 1]
    int t_train = 5;        // training window length, days
    int t_test = 1;         // prediction horizon, days
    double threshold = 0.5; // minimum score to list a source
    std::optional<std::size_t> budget; // optional max watchlist length

    /// ConfigError on out-of-range fields.
    void validate() const;
};

/// Training window preceding `test_day`: the t_train days ending the
/// day before it.
DayRange training_window(const PredictionParams& params, int test_day);

struct WatchlistEntry {
    Ipv4 source_ip = 0;
    double score = 0.0;
    friend bool operator==(const WatchlistEntry&, const WatchlistEntry&) = default;
};

/// Sources one victim should watch on one test day. Entries are sorted
/// by score descending, ties by ascending address; scores are strictly
/// positive and at least the listing threshold.
struct Watchlist {
    std::string victim;
    int test_day = 0;
    std::vector<WatchlistEntry> entries;

    bool lists(Ipv4 ip) const;
    friend bool operator==(const Watchlist&, const Watchlist&) = default;
};

/// Per-source EWMA over the training window: with x_d the binary
/// attacked-that-day indicator, folds r <- alpha*x_d + (1-alpha)*r in
/// day order starting from 0. Sources whose final score is zero are
/// omitted, so every mapped score is positive. Events outside the
/// window are ignored.
std::map<Ipv4, double> ewma_scores(std::span<const AttackEvent> events,
                                   const Timeline& timeline, const PredictionParams& params,
                                   int test_day);

/// Threshold listing: every source scoring at least params.threshold,
/// best first, cut to params.budget when set.
Watchlist predict(const std::map<Ipv4, double>& scores, const PredictionParams& params,
                  std::string victim, int test_day);

/// Local worst-offender list: the victim's own top-k sources by attack
/// count inside the window, count as score.
Watchlist lwol(std::span<const AttackEvent> events, const Timeline& timeline, DayRange window,
               std::size_t k, std::string victim, int test_day);

/// Global worst-offender list: as lwol but counted across every
/// contributor's events; the one list (victim "*") serves all victims.
Watchlist gwol(std::span<const AttackEvent> events, const Timeline& timeline, DayRange window,
               std::size_t k, int test_day);

/// CSV rows (victim, test_day, rank, source_ip, score), rank 1-based.
void watchlist_csv(std::ostream& out, std::span<const Watchlist> lists);

} // namespace coshare
