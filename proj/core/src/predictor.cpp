#include "coshare/predictor.hpp"

#include <algorithm>
#include <ostream>

#include "coshare/errors.hpp"
#include "coshare/text.hpp"

namespace coshare {

void PredictionParams::validate() const {
    if (!(alpha > 0.0) || alpha > 1.0)
        throw ConfigError("prediction: alpha must be in (0, 1]");
    if (t_train < 1) throw ConfigError("prediction: t_train must be at least 1");
    if (t_test < 1) throw ConfigError("prediction: t_test must be at least 1");
    if (!(threshold >= 0.0)) throw ConfigError("prediction: threshold must be non-negative");
    if (budget && *budget < 1) throw ConfigError("prediction: budget must be at least 1");
}

DayRange training_window(const PredictionParams& params, int test_day) {
    return DayRange{test_day - params.t_train, test_day - 1};
}

bool Watchlist::lists(Ipv4 ip) const {
    return std::any_of(entries.begin(), entries.end(),
                       [ip](const WatchlistEntry& e) { return e.source_ip == ip; });
}

std::map<Ipv4, double> ewma_scores(std::span<const AttackEvent> events,
                                   const Timeline& timeline, const PredictionParams& params,
                                   int test_day) {
    params.validate();
    const DayRange window = training_window(params, test_day);
    const std::size_t days = static_cast<std::size_t>(params.t_train);

    std::map<Ipv4, std::vector<char>> attacked; // per source: day indicator over the window
    for (const AttackEvent& e : events) {
        long d = timeline.day_of(e.timestamp);
        if (!window.contains(d)) continue;
        auto [it, inserted] = attacked.try_emplace(e.source_ip);
        if (inserted) it->second.assign(days, 0);
        it->second[static_cast<std::size_t>(d - window.first)] = 1;
    }

    std::map<Ipv4, double> scores;
    for (const auto& [ip, days_hit] : attacked) {
        double r = 0.0;
        for (char x : days_hit) r = params.alpha * x + (1.0 - params.alpha) * r;
        if (r > 0.0) scores.emplace(ip, r);
    }
    return scores;
}

namespace {

void order_entries(std::vector<WatchlistEntry>& entries) {
    std::sort(entries.begin(), entries.end(), [](const WatchlistEntry& a,
                                                 const WatchlistEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.source_ip < b.source_ip;
    });
}

Watchlist top_offenders(std::span<const AttackEvent> events, const Timeline& timeline,
                        DayRange window, std::size_t k, std::string victim, int test_day) {
    if (k < 1) throw ConfigError("worst-offender list size must be at least 1");
    std::map<Ipv4, std::size_t> counts;
    for (const AttackEvent& e : events)
        if (window.contains(timeline.day_of(e.timestamp))) ++counts[e.source_ip];

    Watchlist list{std::move(victim), test_day, {}};
    list.entries.reserve(counts.size());
    for (const auto& [ip, count] : counts)
        list.entries.push_back(WatchlistEntry{ip, static_cast<double>(count)});
    order_entries(list.entries);
    if (list.entries.size() > k) list.entries.resize(k);
    return list;
}

} // namespace

Watchlist predict(const std::map<Ipv4, double>& scores, const PredictionParams& params,
                  std::string victim, int test_day) {
    params.validate();
    Watchlist list{std::move(victim), test_day, {}};
    for (const auto& [ip, score] : scores)
        if (score > 0.0 && score >= params.threshold)
            list.entries.push_back(WatchlistEntry{ip, score});
    order_entries(list.entries);
    if (params.budget && list.entries.size() > *params.budget)
        list.entries.resize(*params.budget);
    return list;
}

Watchlist lwol(std::span<const AttackEvent> events, const Timeline& timeline, DayRange window,
               std::size_t k, std::string victim, int test_day) {
    return top_offenders(events, timeline, window, k, std::move(victim), test_day);
}

Watchlist gwol(std::span<const AttackEvent> events, const Timeline& timeline, DayRange window,
               std::size_t k, int test_day) {
    return top_offenders(events, timeline, window, k, "*", test_day);
}

void watchlist_csv(std::ostream& out, std::span<const Watchlist> lists) {
    out << "victim,test_day,rank,source_ip,score\n";
    for (const Watchlist& list : lists)
        for (std::size_t rank = 0; rank < list.entries.size(); ++rank)
            out << list.victim << ',' << list.test_day << ',' << rank + 1 << ','
                << format_ipv4(list.entries[rank].source_ip) << ','
                << format_double(list.entries[rank].score) << '\n';
}

} // namespace coshare
